#include "sset/eval.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sset {

namespace {

// Width of the centered moving average applied to the raw noise, so baseline
// series wander smoothly instead of jittering per step.
constexpr int kSmoothWindow = 5;

std::string class_name(int label) { return "class" + std::to_string(label); }

// One instance: smoothed noise around 0.5 per signal, plus the class bump.
TimeSeriesInstance synthesize_instance(const SyntheticSpec& spec, const std::string& id,
                                       int label, RandomSource& rng) {
    TimeSeriesInstance out(id, spec.steps, spec.signals);
    const int half = (kSmoothWindow - 1) / 2;
    std::vector<double> raw(static_cast<std::size_t>(spec.steps));
    for (int s = 0; s < spec.signals; ++s) {
        for (int t = 0; t < spec.steps; ++t) {
            raw[static_cast<std::size_t>(t)] = spec.noise_sigma * rng.next_gaussian();
        }
        for (int t = 0; t < spec.steps; ++t) {
            const int lo = std::max(0, t - half);
            const int hi = std::min(spec.steps - 1, t + half);
            double sum = 0.0;
            for (int k = lo; k <= hi; ++k) {
                sum += raw[static_cast<std::size_t>(k)];
            }
            out.at(t, s) = 0.5 + sum / static_cast<double>(hi - lo + 1);
        }
    }
    const PlantedSaliency& bump = spec.planted[static_cast<std::size_t>(label)];
    for (int t = bump.t_lo; t <= bump.t_hi; ++t) {
        out.at(t, bump.signal) += bump.amplitude;
    }
    for (double& v : out.values) {
        v = std::clamp(v, 0.0, 1.0);
    }
    return out;
}

}  // namespace

void SyntheticSpec::validate() const {
    if (steps < 1 || signals < 1 || classes < 1) {
        throw std::invalid_argument("synthetic spec shapes must be positive");
    }
    if (planted.size() != static_cast<std::size_t>(classes)) {
        throw std::invalid_argument("synthetic spec needs exactly one planted saliency per class");
    }
    for (std::size_t c = 0; c < planted.size(); ++c) {
        const PlantedSaliency& p = planted[c];
        if (p.signal < 0 || p.signal >= signals) {
            throw std::invalid_argument("planted signal for class " + std::to_string(c) +
                                        " out of range");
        }
        if (!(0 <= p.t_lo && p.t_lo <= p.t_hi && p.t_hi <= steps - 1)) {
            throw std::invalid_argument("planted interval for class " + std::to_string(c) +
                                        " must satisfy 0 <= lo <= hi <= T-1");
        }
        if (!std::isfinite(p.amplitude)) {
            throw std::invalid_argument("planted amplitude for class " + std::to_string(c) +
                                        " must be finite");
        }
        for (std::size_t prev = 0; prev < c; ++prev) {
            const PlantedSaliency& q = planted[prev];
            if (q.signal == p.signal && q.t_lo == p.t_lo && q.t_hi == p.t_hi) {
                throw std::invalid_argument("classes " + std::to_string(prev) + " and " +
                                            std::to_string(c) +
                                            " share the same planted (signal, interval) pair");
            }
        }
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw std::invalid_argument("noise_sigma must be finite and non-negative");
    }
    if (n_train < 1 || n_test < 0) {
        throw std::invalid_argument("synthetic spec needs n_train >= 1 and n_test >= 0");
    }
}

LabeledDataset generate_synthetic(const SyntheticSpec& spec) {
    spec.validate();

    LabeledDataset dataset;
    dataset.meta.steps = spec.steps;
    dataset.meta.signals = spec.signals;
    dataset.meta.classes = spec.classes;
    for (int s = 0; s < spec.signals; ++s) {
        dataset.meta.signal_names.push_back("s" + std::to_string(s));
    }
    for (int c = 0; c < spec.classes; ++c) {
        dataset.meta.class_names.push_back(class_name(c));
    }

    const RandomSource master(spec.seed);
    dataset.train.reserve(static_cast<std::size_t>(spec.n_train));
    for (int i = 0; i < spec.n_train; ++i) {
        RandomSource rng = master.derive_child(static_cast<std::uint64_t>(i));
        const int label = i % spec.classes;
        dataset.train.push_back(
            {synthesize_instance(spec, "train_" + std::to_string(i), label, rng), label});
    }
    dataset.test.reserve(static_cast<std::size_t>(spec.n_test));
    for (int i = 0; i < spec.n_test; ++i) {
        RandomSource rng =
            master.derive_child(static_cast<std::uint64_t>(spec.n_train) +
                                static_cast<std::uint64_t>(i));
        const int label = i % spec.classes;
        dataset.test.push_back(
            {synthesize_instance(spec, "test_" + std::to_string(i), label, rng), label});
    }
    return dataset;
}

double precision_metric(double y_i_c, double manipulated_score) {
    if (!(y_i_c >= 0.0 && y_i_c <= 1.0) || !(manipulated_score >= 0.0 && manipulated_score <= 1.0)) {
        throw std::invalid_argument("precision_metric inputs must lie in [0, 1]");
    }
    return std::max(0.0, y_i_c - manipulated_score);
}

int informativeness_metric(const ImportanceMatrix& importance) {
    int steps_with_mass = 0;
    for (int t = 0; t < importance.steps; ++t) {
        for (int s = 0; s < importance.signals; ++s) {
            if (importance.at(t, s) != 0.0) {
                ++steps_with_mass;
                break;
            }
        }
    }
    return steps_with_mass;
}

double similarity_metric(const TimeSeriesInstance& x, const TimeSeriesInstance& manipulated) {
    return euclidean_distance(x, manipulated);
}

namespace {

int representative_window(const Explanation& explanation) {
    int smallest = 0;
    for (const SalientSubsequence& sub : explanation.subsequences) {
        if (smallest == 0 || sub.window_size < smallest) {
            smallest = sub.window_size;
        }
    }
    return smallest;
}

}  // namespace

QualityRow quality_row(const Explanation& explanation, const TimeSeriesInstance& x) {
    if (explanation.instance_id != x.id) {
        throw std::invalid_argument("explanation '" + explanation.instance_id +
                                    "' does not belong to instance '" + x.id + "'");
    }
    QualityRow row;
    row.instance_id = explanation.instance_id;
    row.status = explanation.status;
    row.winner_score = explanation.winner_score;
    if (explanation.status != ExplanationStatus::Explained) {
        return row;
    }
    if (!explanation.best_manipulation || !explanation.chosen_neighbor) {
        throw std::invalid_argument("explained instance '" + explanation.instance_id +
                                    "' lacks its best manipulation");
    }
    row.has_metrics = true;
    row.precision =
        precision_metric(explanation.winner_score, explanation.best_manipulation->score);
    row.informativeness = static_cast<double>(informativeness_metric(explanation.importance));
    row.similarity = similarity_metric(x, explanation.best_manipulation->values);
    row.window_size = static_cast<double>(representative_window(explanation));
    row.neighbor_distance = explanation.chosen_neighbor->distance;
    return row;
}

QualityReport aggregate_quality(const std::vector<QualityRow>& rows) {
    QualityReport report;
    report.rows = rows;
    double precision_sum = 0.0;
    double informativeness_sum = 0.0;
    double similarity_sum = 0.0;
    for (const QualityRow& row : rows) {
        if (row.has_metrics) {
            ++report.n_explained;
            precision_sum += row.precision;
            informativeness_sum += row.informativeness;
            similarity_sum += row.similarity;
        } else {
            ++report.n_failed;
        }
    }
    if (report.n_explained > 0) {
        report.precision = precision_sum / report.n_explained;
        report.informativeness = informativeness_sum / report.n_explained;
        report.similarity = similarity_sum / report.n_explained;
    }
    if (!rows.empty()) {
        report.precision_pessimistic = precision_sum / static_cast<double>(rows.size());
    }
    return report;
}

std::vector<int> salient_signal_histogram(const std::vector<Explanation>& explanations,
                                          int num_signals) {
    if (num_signals < 1) {
        throw std::invalid_argument("signal count must be positive");
    }
    std::vector<int> counts(static_cast<std::size_t>(num_signals), 0);
    for (const Explanation& ex : explanations) {
        std::vector<char> seen(static_cast<std::size_t>(num_signals), 0);
        for (int s : ex.salient_signals) {
            if (s < 0 || s >= num_signals) {
                throw std::invalid_argument("salient signal index out of range");
            }
            seen[static_cast<std::size_t>(s)] = 1;
        }
        for (const auto& [a, b] : ex.salient_pairs) {
            if (a < 0 || a >= num_signals || b < 0 || b >= num_signals) {
                throw std::invalid_argument("salient pair index out of range");
            }
            seen[static_cast<std::size_t>(a)] = 1;
            seen[static_cast<std::size_t>(b)] = 1;
        }
        for (int s = 0; s < num_signals; ++s) {
            counts[static_cast<std::size_t>(s)] += seen[static_cast<std::size_t>(s)];
        }
    }
    return counts;
}

WindowSizeDistribution window_size_distribution(const std::vector<Explanation>& explanations) {
    WindowSizeDistribution dist;
    double sum = 0.0;
    for (const Explanation& ex : explanations) {
        if (ex.status != ExplanationStatus::Explained || ex.subsequences.empty()) {
            continue;
        }
        const int window = representative_window(ex);
        ++dist.histogram[window];
        sum += window;
        ++dist.count;
    }
    if (dist.count > 0) {
        dist.mean = sum / dist.count;
    }
    return dist;
}

double distance_window_correlation(const std::vector<Explanation>& explanations) {
    std::vector<double> distances;
    std::vector<double> windows;
    for (const Explanation& ex : explanations) {
        if (ex.status != ExplanationStatus::Explained || !ex.chosen_neighbor) {
            continue;
        }
        distances.push_back(ex.chosen_neighbor->distance);
        windows.push_back(static_cast<double>(representative_window(ex)));
    }
    return pearson_correlation(distances, windows);
}

}  // namespace sset
