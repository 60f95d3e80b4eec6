#include "sset/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace sset {

namespace {

using nlohmann::json;

void require_object(const json& j, const std::string& what) {
    if (!j.is_object()) {
        throw std::runtime_error(what + " must be a JSON object");
    }
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& what) {
    for (const auto& item : j.items()) {
        if (allowed.count(item.key()) == 0) {
            throw std::runtime_error("unknown key '" + item.key() + "' in " + what);
        }
    }
}

double get_number(const json& j, const char* key, const std::string& what) {
    const json& v = j.at(key);
    if (!v.is_number()) {
        throw std::runtime_error(std::string(key) + " in " + what + " must be a number");
    }
    return v.get<double>();
}

int get_integer(const json& j, const char* key, const std::string& what) {
    const json& v = j.at(key);
    if (!v.is_number_integer()) {
        throw std::runtime_error(std::string(key) + " in " + what + " must be an integer");
    }
    return v.get<int>();
}

std::string get_string(const json& j, const char* key, const std::string& what) {
    const json& v = j.at(key);
    if (!v.is_string()) {
        throw std::runtime_error(std::string(key) + " in " + what + " must be a string");
    }
    return v.get<std::string>();
}

json matrix_rows(const std::vector<double>& values, int steps, int signals) {
    json rows = json::array();
    for (int t = 0; t < steps; ++t) {
        json row = json::array();
        for (int s = 0; s < signals; ++s) {
            row.push_back(values[static_cast<std::size_t>(t) * signals + s]);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

// Parses [[V doubles] x T]; shape comes from the nesting.
void matrix_from_rows(const json& rows, const std::string& what, int& steps, int& signals,
                      std::vector<double>& values) {
    if (!rows.is_array() || rows.empty()) {
        throw std::runtime_error(what + " must be a non-empty array of rows");
    }
    steps = static_cast<int>(rows.size());
    signals = -1;
    values.clear();
    for (const json& row : rows) {
        if (!row.is_array() || row.empty()) {
            throw std::runtime_error(what + " rows must be non-empty arrays");
        }
        if (signals < 0) {
            signals = static_cast<int>(row.size());
        } else if (static_cast<int>(row.size()) != signals) {
            throw std::runtime_error(what + " rows have inconsistent lengths");
        }
        for (const json& cell : row) {
            if (!cell.is_number()) {
                throw std::runtime_error(what + " cells must be numbers");
            }
            values.push_back(cell.get<double>());
        }
    }
}

std::string format_metric(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

void check_file_safe_id(const std::string& id) {
    if (id.empty()) {
        throw std::runtime_error("instance id is empty");
    }
    for (char c : id) {
        const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                        (c >= '0' && c <= '9') || c == '_' || c == '-' || c == '.';
        if (!ok) {
            throw std::runtime_error("instance id '" + id +
                                     "' contains characters unsuitable for file names");
        }
    }
}

}  // namespace

// --- SsetConfig ---------------------------------------------------------

SsetConfig sset_config_from_json(const json& j) {
    require_object(j, "config");
    reject_unknown_keys(j,
                        {"thr_c", "thr_n", "thr_a", "l", "delta", "start", "n_neighbors", "ctx0",
                         "lambda", "alpha", "ctx_max"},
                        "config");
    SsetConfig config;
    if (j.contains("thr_c")) config.thr_c = get_number(j, "thr_c", "config");
    if (j.contains("thr_n")) config.thr_n = get_number(j, "thr_n", "config");
    if (j.contains("thr_a")) config.thr_a = get_integer(j, "thr_a", "config");
    if (j.contains("l")) config.l = get_number(j, "l", "config");
    if (j.contains("delta")) config.delta = get_number(j, "delta", "config");
    if (j.contains("start")) config.start = get_number(j, "start", "config");
    if (j.contains("n_neighbors")) config.n_neighbors = get_integer(j, "n_neighbors", "config");
    if (j.contains("ctx0")) config.ctx0 = get_integer(j, "ctx0", "config");
    if (j.contains("lambda")) config.lambda = get_number(j, "lambda", "config");
    if (j.contains("alpha")) config.alpha = get_number(j, "alpha", "config");
    if (j.contains("ctx_max") && !j.at("ctx_max").is_null()) {
        config.ctx_max = get_integer(j, "ctx_max", "config");
    }
    config.validate();
    return config;
}

SsetConfig load_sset_config(const std::filesystem::path& file) {
    return sset_config_from_json(parse_json_file(file));
}

json sset_config_to_json(const SsetConfig& config) {
    json j{{"thr_c", config.thr_c},
           {"thr_n", config.thr_n},
           {"thr_a", config.thr_a},
           {"l", config.l},
           {"delta", config.delta},
           {"start", config.start},
           {"n_neighbors", config.n_neighbors},
           {"ctx0", config.ctx0},
           {"lambda", config.lambda},
           {"alpha", config.alpha}};
    j["ctx_max"] = config.ctx_max ? json(*config.ctx_max) : json(nullptr);
    return j;
}

// --- SyntheticSpec ------------------------------------------------------

SyntheticSpec synthetic_spec_from_json(const json& j) {
    require_object(j, "synthetic spec");
    reject_unknown_keys(
        j, {"steps", "signals", "classes", "planted", "noise_sigma", "n_train", "n_test", "seed"},
        "synthetic spec");
    SyntheticSpec spec;
    if (j.contains("steps")) spec.steps = get_integer(j, "steps", "synthetic spec");
    if (j.contains("signals")) spec.signals = get_integer(j, "signals", "synthetic spec");
    if (j.contains("classes")) spec.classes = get_integer(j, "classes", "synthetic spec");
    if (j.contains("noise_sigma")) spec.noise_sigma = get_number(j, "noise_sigma", "synthetic spec");
    if (j.contains("n_train")) spec.n_train = get_integer(j, "n_train", "synthetic spec");
    if (j.contains("n_test")) spec.n_test = get_integer(j, "n_test", "synthetic spec");
    if (j.contains("seed")) {
        const json& v = j.at("seed");
        if (!v.is_number_integer() && !v.is_number_unsigned()) {
            throw std::runtime_error("seed in synthetic spec must be an integer");
        }
        spec.seed = v.get<std::uint64_t>();
    }
    if (!j.contains("planted")) {
        throw std::runtime_error("synthetic spec requires a 'planted' array, one entry per class");
    }
    const json& planted = j.at("planted");
    if (!planted.is_array()) {
        throw std::runtime_error("'planted' in synthetic spec must be an array");
    }
    for (const json& p : planted) {
        require_object(p, "planted entry");
        reject_unknown_keys(p, {"signal", "t_lo", "t_hi", "amplitude"}, "planted entry");
        PlantedSaliency ps;
        ps.signal = get_integer(p, "signal", "planted entry");
        ps.t_lo = get_integer(p, "t_lo", "planted entry");
        ps.t_hi = get_integer(p, "t_hi", "planted entry");
        ps.amplitude = get_number(p, "amplitude", "planted entry");
        spec.planted.push_back(ps);
    }
    spec.validate();
    return spec;
}

SyntheticSpec load_synthetic_spec(const std::filesystem::path& file) {
    return synthetic_spec_from_json(parse_json_file(file));
}

json synthetic_spec_to_json(const SyntheticSpec& spec) {
    json planted = json::array();
    for (const PlantedSaliency& p : spec.planted) {
        planted.push_back(json{{"signal", p.signal},
                               {"t_lo", p.t_lo},
                               {"t_hi", p.t_hi},
                               {"amplitude", p.amplitude}});
    }
    return json{{"steps", spec.steps},     {"signals", spec.signals},
                {"classes", spec.classes}, {"planted", std::move(planted)},
                {"noise_sigma", spec.noise_sigma}, {"n_train", spec.n_train},
                {"n_test", spec.n_test},   {"seed", spec.seed}};
}

void write_ground_truth(const SyntheticSpec& spec, const std::filesystem::path& dir) {
    json planted = json::array();
    for (std::size_t c = 0; c < spec.planted.size(); ++c) {
        const PlantedSaliency& p = spec.planted[c];
        planted.push_back(json{{"class", static_cast<int>(c)},
                               {"signal", p.signal},
                               {"t_lo", p.t_lo},
                               {"t_hi", p.t_hi},
                               {"amplitude", p.amplitude}});
    }
    write_text_file_atomic(dir / "ground_truth.json",
                           json{{"planted", std::move(planted)}}.dump(2) + "\n");
}

// --- Explanations -------------------------------------------------------

json explanation_to_json(const Explanation& explanation) {
    json j;
    j["instance_id"] = explanation.instance_id;
    j["signal_names"] = explanation.signal_names;
    j["status"] = to_string(explanation.status);
    j["winner_class"] = explanation.winner_class;
    j["winner_score"] = explanation.winner_score;
    j["salient_signals"] = explanation.salient_signals;
    json pairs = json::array();
    for (const auto& [a, b] : explanation.salient_pairs) {
        pairs.push_back(json::array({a, b}));
    }
    j["salient_pairs"] = std::move(pairs);
    json subs = json::array();
    for (const SalientSubsequence& sub : explanation.subsequences) {
        subs.push_back(json{{"signals", sub.signal_indices},
                            {"t_current", sub.t_current},
                            {"t_lo", sub.t_lo},
                            {"t_hi", sub.t_hi},
                            {"window_size", sub.window_size},
                            {"score", sub.score},
                            {"drop", sub.drop}});
    }
    j["subsequences"] = std::move(subs);
    j["importance"] = matrix_rows(explanation.importance.scores, explanation.importance.steps,
                                  explanation.importance.signals);
    if (explanation.chosen_neighbor) {
        j["chosen_neighbor"] = json{{"id", explanation.chosen_neighbor->id},
                                    {"distance", explanation.chosen_neighbor->distance}};
    } else {
        j["chosen_neighbor"] = nullptr;
    }
    if (explanation.best_manipulation) {
        j["best_manipulation"] =
            json{{"score", explanation.best_manipulation->score},
                 {"drop", explanation.best_manipulation->drop},
                 {"values", matrix_rows(explanation.best_manipulation->values.values,
                                        explanation.best_manipulation->values.steps,
                                        explanation.best_manipulation->values.signals)}};
    } else {
        j["best_manipulation"] = nullptr;
    }
    j["ctx_used"] = explanation.ctx_used;
    j["attempts_used"] = explanation.attempts_used;
    j["scope_used"] = json{{"lo", explanation.scope_used.lo}, {"hi", explanation.scope_used.hi}};
    return j;
}

Explanation explanation_from_json(const json& j) {
    require_object(j, "explanation");
    reject_unknown_keys(j,
                        {"instance_id", "signal_names", "status", "winner_class", "winner_score",
                         "salient_signals", "salient_pairs", "subsequences", "importance",
                         "chosen_neighbor", "best_manipulation", "ctx_used", "attempts_used",
                         "scope_used"},
                        "explanation");
    Explanation ex;
    ex.instance_id = get_string(j, "instance_id", "explanation");
    for (const json& name : j.at("signal_names")) {
        ex.signal_names.push_back(name.get<std::string>());
    }
    ex.status = explanation_status_from_string(get_string(j, "status", "explanation"));
    ex.winner_class = get_integer(j, "winner_class", "explanation");
    ex.winner_score = get_number(j, "winner_score", "explanation");
    for (const json& s : j.at("salient_signals")) {
        ex.salient_signals.push_back(s.get<int>());
    }
    for (const json& p : j.at("salient_pairs")) {
        if (!p.is_array() || p.size() != 2) {
            throw std::runtime_error("salient_pairs entries must be two-element arrays");
        }
        ex.salient_pairs.emplace_back(p[0].get<int>(), p[1].get<int>());
    }
    for (const json& s : j.at("subsequences")) {
        require_object(s, "subsequence");
        reject_unknown_keys(
            s, {"signals", "t_current", "t_lo", "t_hi", "window_size", "score", "drop"},
            "subsequence");
        SalientSubsequence sub;
        for (const json& idx : s.at("signals")) {
            sub.signal_indices.push_back(idx.get<int>());
        }
        sub.t_current = get_integer(s, "t_current", "subsequence");
        sub.t_lo = get_integer(s, "t_lo", "subsequence");
        sub.t_hi = get_integer(s, "t_hi", "subsequence");
        sub.window_size = get_integer(s, "window_size", "subsequence");
        sub.score = get_number(s, "score", "subsequence");
        sub.drop = get_number(s, "drop", "subsequence");
        ex.subsequences.push_back(std::move(sub));
    }
    matrix_from_rows(j.at("importance"), "importance", ex.importance.steps,
                     ex.importance.signals, ex.importance.scores);
    if (!j.at("chosen_neighbor").is_null()) {
        const json& n = j.at("chosen_neighbor");
        reject_unknown_keys(n, {"id", "distance"}, "chosen_neighbor");
        ex.chosen_neighbor =
            ChosenNeighbor{get_string(n, "id", "chosen_neighbor"),
                           get_number(n, "distance", "chosen_neighbor")};
    }
    if (!j.at("best_manipulation").is_null()) {
        const json& m = j.at("best_manipulation");
        reject_unknown_keys(m, {"score", "drop", "values"}, "best_manipulation");
        BestManipulation best;
        best.score = get_number(m, "score", "best_manipulation");
        best.drop = get_number(m, "drop", "best_manipulation");
        best.values.id = ex.instance_id;
        matrix_from_rows(m.at("values"), "best_manipulation values", best.values.steps,
                         best.values.signals, best.values.values);
        ex.best_manipulation = std::move(best);
    }
    ex.ctx_used = get_integer(j, "ctx_used", "explanation");
    ex.attempts_used = get_integer(j, "attempts_used", "explanation");
    const json& scope = j.at("scope_used");
    reject_unknown_keys(scope, {"lo", "hi"}, "scope_used");
    ex.scope_used.lo = get_number(scope, "lo", "scope_used");
    ex.scope_used.hi = get_number(scope, "hi", "scope_used");
    return ex;
}

void save_explanation(const Explanation& explanation, const std::filesystem::path& dir) {
    check_file_safe_id(explanation.instance_id);
    write_text_file_atomic(dir / (explanation.instance_id + ".json"),
                           explanation_to_json(explanation).dump(2) + "\n");
    std::ostringstream csv;
    csv << "t,s,score\n";
    for (int t = 0; t < explanation.importance.steps; ++t) {
        for (int s = 0; s < explanation.importance.signals; ++s) {
            csv << t << ',' << s << ',' << format_double(explanation.importance.at(t, s)) << '\n';
        }
    }
    write_text_file_atomic(dir / (explanation.instance_id + ".csv"), csv.str());
}

Explanation load_explanation(const std::filesystem::path& file) {
    try {
        return explanation_from_json(parse_json_file(file));
    } catch (const std::exception& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

std::vector<Explanation> load_explanations(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw std::runtime_error("not a directory: " + dir.string());
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".json") {
            continue;
        }
        if (entry.path().filename() == "manifest.json") {
            continue;
        }
        files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<Explanation> explanations;
    explanations.reserve(files.size());
    for (const auto& file : files) {
        explanations.push_back(load_explanation(file));
    }
    return explanations;
}

// --- Run manifests ------------------------------------------------------

json run_manifest_to_json(const RunManifest& manifest) {
    json j;
    j["tool_version"] = manifest.tool_version;
    j["command"] = manifest.command;
    j["dataset"] = manifest.dataset_path;
    j["oracle"] = manifest.oracle_spec;
    j["config"] = sset_config_to_json(manifest.config);
    j["seed"] = manifest.seed;
    if (manifest.sample >= 0) {
        j["sample"] = manifest.sample;
    } else {
        j["ids"] = manifest.ids;
    }
    j["output_dir"] = manifest.output_dir;
    j["jobs"] = manifest.jobs;
    return j;
}

void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& dir) {
    write_text_file_atomic(dir / "manifest.json", run_manifest_to_json(manifest).dump(2) + "\n");
}

// --- Quality reports ----------------------------------------------------

json quality_report_to_json(const QualityReport& report) {
    json rows = json::array();
    for (const QualityRow& row : report.rows) {
        json r;
        r["instance_id"] = row.instance_id;
        r["status"] = to_string(row.status);
        r["winner_score"] = row.winner_score;
        r["explained"] = row.has_metrics;
        if (row.has_metrics) {
            r["precision"] = row.precision;
            r["informativeness"] = row.informativeness;
            r["similarity"] = row.similarity;
            r["window_size"] = row.window_size;
            r["neighbor_distance"] = row.neighbor_distance;
        }
        rows.push_back(std::move(r));
    }
    return json{{"precision", report.precision},
                {"informativeness", report.informativeness},
                {"similarity", report.similarity},
                {"precision_pessimistic", report.precision_pessimistic},
                {"n_explained", report.n_explained},
                {"n_failed", report.n_failed},
                {"rows", std::move(rows)}};
}

std::string quality_report_markdown(
    const std::vector<std::pair<std::string, QualityReport>>& reports) {
    std::ostringstream out;
    out << "| Explainer | Precision | Informativeness | Similarity |\n";
    out << "| --- | --- | --- | --- |\n";
    for (const auto& [name, report] : reports) {
        out << "| " << name << " | " << format_metric(report.precision) << " | "
            << format_metric(report.informativeness) << " | " << format_metric(report.similarity)
            << " |\n";
    }
    return out.str();
}

// --- Plumbing -----------------------------------------------------------

std::string read_text_file(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + file.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in.good() && !in.eof()) {
        throw std::runtime_error("read failed: " + file.string());
    }
    return buffer.str();
}

void write_text_file_atomic(const std::filesystem::path& file, const std::string& content) {
    const std::filesystem::path tmp = file.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            throw std::runtime_error("write failed: " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, file);
}

json parse_json_file(const std::filesystem::path& file) {
    try {
        return json::parse(read_text_file(file));
    } catch (const json::parse_error& e) {
        throw std::runtime_error(file.string() + ": " + e.what());
    }
}

}  // namespace sset
