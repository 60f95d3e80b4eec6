#include "sset/blackbox.hpp"

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cmath>
#include <csignal>
#include <cstring>
#include <stdexcept>

#include <json.hpp>

namespace sset {

using nlohmann::json;

std::vector<std::vector<double>> PredictionOracle::predict_batch(
    const std::vector<TimeSeriesInstance>& instances) const {
    std::vector<std::vector<double>> out;
    out.reserve(instances.size());
    for (const auto& inst : instances) out.push_back(predict(inst));
    return out;
}

void validate_probability_vector(const std::vector<double>& probs, int num_classes, double tol) {
    if (static_cast<int>(probs.size()) != num_classes)
        throw std::runtime_error("oracle returned " + std::to_string(probs.size()) +
                                 " probabilities, expected " + std::to_string(num_classes));
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0 && p <= 1.0))
            throw std::runtime_error("oracle probability out of range [0,1]: " + std::to_string(p));
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol)
        throw std::runtime_error("oracle probabilities sum to " + std::to_string(sum) +
                                 ", expected 1 within " + std::to_string(tol));
}

CentroidClassifier::CentroidClassifier(std::vector<TimeSeriesInstance> centroids,
                                       double temperature)
    : centroids_(std::move(centroids)), temperature_(temperature) {
    if (centroids_.empty()) throw std::invalid_argument("CentroidClassifier: no centroids");
    if (!(temperature_ > 0.0))
        throw std::invalid_argument("CentroidClassifier: temperature must be positive");
    for (const auto& c : centroids_)
        if (!c.same_shape(centroids_.front()))
            throw std::invalid_argument("CentroidClassifier: centroid shape mismatch");
}

std::vector<double> CentroidClassifier::predict(const TimeSeriesInstance& instance) const {
    const int C = num_classes();
    std::vector<double> dist(C, 0.0);
    for (int c = 0; c < C; ++c) dist[c] = euclidean_distance(instance, centroids_[c]);
    // Shifted softmax of -temperature * distance.
    double dmin = *std::min_element(dist.begin(), dist.end());
    std::vector<double> probs(C, 0.0);
    double sum = 0.0;
    for (int c = 0; c < C; ++c) {
        probs[c] = std::exp(-temperature_ * (dist[c] - dmin));
        sum += probs[c];
    }
    for (int c = 0; c < C; ++c) probs[c] /= sum;
    return probs;
}

std::vector<std::vector<double>> CentroidClassifier::predict_batch(
    const std::vector<TimeSeriesInstance>& instances) const {
    std::vector<std::vector<double>> out(instances.size());
    const int64_t n = static_cast<int64_t>(instances.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) out[i] = predict(instances[i]);
    return out;
}

CentroidClassifier fit_centroid_classifier(const std::vector<LabeledInstance>& train,
                                           int num_classes, double temperature) {
    if (train.empty()) throw std::invalid_argument("fit_centroid_classifier: empty training set");
    const int T = train.front().instance.steps;
    const int V = train.front().instance.signals;
    std::vector<TimeSeriesInstance> centroids;
    std::vector<int> counts(num_classes, 0);
    for (int c = 0; c < num_classes; ++c)
        centroids.emplace_back("centroid_" + std::to_string(c), T, V);
    for (const auto& li : train) {
        if (li.label < 0 || li.label >= num_classes)
            throw std::invalid_argument("fit_centroid_classifier: label out of range");
        ++counts[li.label];
        auto& acc = centroids[li.label].values;
        for (size_t i = 0; i < acc.size(); ++i) acc[i] += li.instance.values[i];
    }
    for (int c = 0; c < num_classes; ++c) {
        if (counts[c] == 0)
            throw std::invalid_argument("fit_centroid_classifier: class " + std::to_string(c) +
                                        " has no training instances");
        for (auto& v : centroids[c].values) v /= counts[c];
    }
    return CentroidClassifier(std::move(centroids), temperature);
}

std::pair<int, double> predict_winner(const PredictionOracle& oracle,
                                      const TimeSeriesInstance& instance) {
    auto probs = oracle.predict(instance);
    validate_probability_vector(probs, oracle.num_classes());
    int best = 0;
    for (int c = 1; c < static_cast<int>(probs.size()); ++c)
        if (probs[c] > probs[best]) best = c;
    return {best, probs[best]};
}

namespace {

json values_to_json(const TimeSeriesInstance& instance) {
    json rows = json::array();
    for (int t = 0; t < instance.steps; ++t) {
        json row = json::array();
        for (int s = 0; s < instance.signals; ++s) row.push_back(instance.at(t, s));
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

SubprocessOracle::SubprocessOracle(const std::string& command, int steps, int signals)
    : command_(command), steps_(steps), signals_(signals) {
    // A model that dies mid-run must surface as a protocol error on the next
    // request, not kill the engine with SIGPIPE on the write.
    std::signal(SIGPIPE, SIG_IGN);
    int to_child[2];
    int from_child[2];
    if (pipe(to_child) != 0 || pipe(from_child) != 0)
        throw std::runtime_error("SubprocessOracle: pipe() failed");

    child_pid_ = fork();
    if (child_pid_ < 0) throw std::runtime_error("SubprocessOracle: fork() failed");
    if (child_pid_ == 0) {
        dup2(to_child[0], STDIN_FILENO);
        dup2(from_child[1], STDOUT_FILENO);
        // stderr stays attached to the parent's for diagnostics.
        close(to_child[0]);
        close(to_child[1]);
        close(from_child[0]);
        close(from_child[1]);
        execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
        std::fprintf(stderr, "SubprocessOracle: exec failed: %s\n", std::strerror(errno));
        _exit(127);
    }
    close(to_child[0]);
    close(from_child[1]);
    to_child_ = fdopen(to_child[1], "w");
    from_child_ = fdopen(from_child[0], "r");
    if (!to_child_ || !from_child_) throw std::runtime_error("SubprocessOracle: fdopen failed");

    json handshake = {{"type", "handshake"}, {"T", steps_}, {"V", signals_}};
    write_line_locked(handshake.dump());
    json ready;
    try {
        ready = json::parse(read_line_locked());
    } catch (const json::exception& e) {
        throw std::runtime_error("SubprocessOracle: non-JSON line during handshake: " +
                                 std::string(e.what()));
    }
    if (ready.value("type", "") != "ready" || !ready.contains("C"))
        throw std::runtime_error("SubprocessOracle: expected {\"type\":\"ready\",\"C\":..}, got: " +
                                 ready.dump());
    num_classes_ = ready["C"].get<int>();
    if (num_classes_ < 1)
        throw std::runtime_error("SubprocessOracle: model reported C=" +
                                 std::to_string(num_classes_));
}

SubprocessOracle::~SubprocessOracle() {
    if (to_child_) {
        json shutdown = {{"type", "shutdown"}};
        std::string line = shutdown.dump();
        line.push_back('\n');
        std::fwrite(line.data(), 1, line.size(), to_child_);
        std::fflush(to_child_);
        std::fclose(to_child_);
    }
    if (from_child_) std::fclose(from_child_);
    if (child_pid_ > 0) {
        int status = 0;
        for (int i = 0; i < 200; ++i) {
            if (waitpid(child_pid_, &status, WNOHANG) != 0) return;
            usleep(10 * 1000);
        }
        kill(child_pid_, SIGKILL);
        waitpid(child_pid_, &status, 0);
    }
}

std::string SubprocessOracle::read_line_locked() const {
    std::string line;
    int ch;
    while ((ch = std::fgetc(from_child_)) != EOF) {
        if (ch == '\n') return line;
        line.push_back(static_cast<char>(ch));
    }
    throw std::runtime_error("SubprocessOracle: model closed its output stream (command: " +
                             command_ + ")");
}

void SubprocessOracle::write_line_locked(const std::string& line) const {
    if (std::fwrite(line.data(), 1, line.size(), to_child_) != line.size() ||
        std::fputc('\n', to_child_) == EOF || std::fflush(to_child_) != 0)
        throw std::runtime_error("SubprocessOracle: failed to write to model stdin");
}

std::vector<double> SubprocessOracle::predict(const TimeSeriesInstance& instance) const {
    if (instance.steps != steps_ || instance.signals != signals_)
        throw std::invalid_argument("SubprocessOracle: instance shape does not match handshake");
    std::lock_guard<std::mutex> lock(pipe_mutex_);
    const std::string id = "q" + std::to_string(request_counter_++);
    json request = {{"type", "predict"}, {"id", id}, {"values", values_to_json(instance)}};
    write_line_locked(request.dump());
    std::string line = read_line_locked();
    json response;
    try {
        response = json::parse(line);
    } catch (const json::exception&) {
        throw std::runtime_error("SubprocessOracle: non-JSON line from model: " + line);
    }
    if (response.value("type", "") != "probs")
        throw std::runtime_error("SubprocessOracle: expected type 'probs', got: " + line);
    if (response.value("id", "") != id)
        throw std::runtime_error("SubprocessOracle: response id mismatch (sent '" + id +
                                 "', got '" + response.value("id", "") + "')");
    std::vector<double> probs;
    try {
        probs = response.at("probs").get<std::vector<double>>();
    } catch (const json::exception& e) {
        throw std::runtime_error("SubprocessOracle: malformed probs field: " + std::string(e.what()));
    }
    validate_probability_vector(probs, num_classes_);
    return probs;
}

}  // namespace sset
