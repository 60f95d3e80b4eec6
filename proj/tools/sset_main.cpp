// Command-line front end: dataset synthesis, explanation runs, quality
// reports, and heatmap rendering.

#include <omp.h>

#include <algorithm>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "sset/blackbox.hpp"
#include "sset/core.hpp"
#include "sset/eval.hpp"
#include "sset/explain.hpp"
#include "sset/io.hpp"
#include "sset/occlusion.hpp"
#include "sset/render.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct OracleSpec {
    bool builtin = true;
    std::string command;  // shell command when not builtin
};

OracleSpec parse_oracle_spec(const std::string& text) {
    if (text == "builtin") {
        return {true, ""};
    }
    if (text.rfind("cmd:", 0) == 0 && text.size() > 4) {
        return {false, text.substr(4)};
    }
    throw CLI::ValidationError("--oracle", "expected 'builtin' or 'cmd:\"command\"'");
}

std::vector<std::string> split_ids(const std::string& text) {
    std::vector<std::string> ids;
    std::string cur;
    for (char c : text) {
        if (c == ',') {
            ids.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    ids.push_back(cur);
    for (const std::string& id : ids) {
        if (id.empty()) {
            throw CLI::ValidationError("--ids", "empty id in list");
        }
    }
    return ids;
}

int cmd_synth(const std::string& spec_file, const std::string& out_dir) {
    const sset::SyntheticSpec spec = sset::load_synthetic_spec(spec_file);
    const sset::LabeledDataset dataset = sset::generate_synthetic(spec);
    fs::create_directories(out_dir);
    // Manifest first so the directory is reproducible even if a later write
    // fails part-way.
    sset::write_text_file_atomic(fs::path(out_dir) / "manifest.json",
                                 json{{"tool_version", sset::kToolVersion},
                                      {"command", "synth"},
                                      {"spec", sset::synthetic_spec_to_json(spec)},
                                      {"output_dir", out_dir}}
                                         .dump(2) +
                                     "\n");
    sset::save_dataset(dataset, out_dir);
    sset::write_ground_truth(spec, out_dir);
    std::cout << "wrote dataset: " << dataset.train.size() << " train / " << dataset.test.size()
              << " test instances, T=" << spec.steps << " V=" << spec.signals
              << " C=" << spec.classes << "\n";
    return 0;
}

// Indices into dataset.test for the requested selection. Sampling is uniform
// without replacement; the result is sorted by test index either way so the
// processing order never depends on the selection syntax.
std::vector<int> select_instances(const sset::LabeledDataset& dataset,
                                  const std::vector<std::string>& ids, int sample,
                                  std::uint64_t seed) {
    std::vector<int> selection;
    if (!ids.empty()) {
        for (const std::string& id : ids) {
            int found = -1;
            for (std::size_t i = 0; i < dataset.test.size(); ++i) {
                if (dataset.test[i].instance.id == id) {
                    found = static_cast<int>(i);
                    break;
                }
            }
            if (found < 0) {
                throw std::runtime_error("instance '" + id + "' is not in the test split");
            }
            selection.push_back(found);
        }
    } else {
        if (sample > static_cast<int>(dataset.test.size())) {
            throw std::runtime_error("--sample " + std::to_string(sample) +
                                     " exceeds the test split size " +
                                     std::to_string(dataset.test.size()));
        }
        // Child stream 2^63 keeps selection draws apart from the per-instance
        // explanation streams (children 0..test_size-1).
        sset::RandomSource rng =
            sset::RandomSource(seed).derive_child(0x8000000000000000ULL);
        std::vector<int> indices(dataset.test.size());
        for (std::size_t i = 0; i < indices.size(); ++i) {
            indices[i] = static_cast<int>(i);
        }
        for (int j = 0; j < sample; ++j) {
            const std::size_t k =
                static_cast<std::size_t>(j) +
                static_cast<std::size_t>(rng.next_below(indices.size() - static_cast<std::size_t>(j)));
            std::swap(indices[static_cast<std::size_t>(j)], indices[k]);
            selection.push_back(indices[static_cast<std::size_t>(j)]);
        }
    }
    std::sort(selection.begin(), selection.end());
    selection.erase(std::unique(selection.begin(), selection.end()), selection.end());
    return selection;
}

int cmd_explain(const std::string& data_dir, const std::string& oracle_text,
                const std::string& config_file, const std::string& ids_text, int sample,
                std::uint64_t seed, const std::string& out_dir, int jobs) {
    const OracleSpec oracle_spec = parse_oracle_spec(oracle_text);
    const sset::LabeledDataset dataset = sset::load_dataset(data_dir);
    sset::SsetConfig config;
    if (!config_file.empty()) {
        config = sset::load_sset_config(config_file);
    }
    std::vector<std::string> ids;
    if (!ids_text.empty()) {
        ids = split_ids(ids_text);
    }
    const std::vector<int> selection = select_instances(dataset, ids, sample, seed);

    fs::create_directories(out_dir);
    sset::RunManifest manifest;
    manifest.command = "explain";
    manifest.dataset_path = data_dir;
    manifest.oracle_spec = oracle_text;
    manifest.config = config;
    manifest.seed = seed;
    manifest.ids = ids;
    manifest.sample = ids.empty() ? sample : -1;
    manifest.output_dir = out_dir;
    manifest.jobs = jobs;
    sset::write_run_manifest(manifest, out_dir);

    if (selection.empty()) {
        std::cout << "explained 0 instances\n";
        return 0;
    }

    // The builtin oracle is shared (thread-safe, immutable); a subprocess
    // oracle is one pipe per worker.
    std::optional<sset::CentroidClassifier> builtin;
    if (oracle_spec.builtin) {
        builtin.emplace(sset::fit_centroid_classifier(dataset.train, dataset.meta.classes,
                                                      sset::kDefaultCentroidTemperature));
    }
    std::vector<std::unique_ptr<sset::SubprocessOracle>> workers(
        static_cast<std::size_t>(std::max(1, jobs)));

    std::vector<std::string> errors(selection.size());
    std::vector<int> statuses(selection.size(), -1);

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs))
    for (std::size_t i = 0; i < selection.size(); ++i) {
        const int test_index = selection[i];
        const sset::LabeledInstance& item = dataset.test[static_cast<std::size_t>(test_index)];
        try {
            const sset::PredictionOracle* oracle = nullptr;
            if (oracle_spec.builtin) {
                oracle = &*builtin;
            } else {
                auto& worker = workers[static_cast<std::size_t>(omp_get_thread_num())];
                if (!worker) {
                    worker = std::make_unique<sset::SubprocessOracle>(
                        oracle_spec.command, dataset.meta.steps, dataset.meta.signals);
                }
                oracle = worker.get();
            }
            sset::RandomSource rng = sset::RandomSource(manifest.seed)
                                         .derive_child(static_cast<std::uint64_t>(test_index));
            const sset::Explanation ex =
                sset::explain(item.instance, dataset, *oracle, config, rng);
            sset::save_explanation(ex, out_dir);
            statuses[i] = static_cast<int>(ex.status);
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    }

    int n_explained = 0;
    int n_no_signal = 0;
    int n_no_subsequence = 0;
    int n_errors = 0;
    for (std::size_t i = 0; i < selection.size(); ++i) {
        if (!errors[i].empty()) {
            ++n_errors;
            std::cerr << "error: instance '"
                      << dataset.test[static_cast<std::size_t>(selection[i])].instance.id
                      << "': " << errors[i] << "\n";
            continue;
        }
        switch (static_cast<sset::ExplanationStatus>(statuses[i])) {
            case sset::ExplanationStatus::Explained: ++n_explained; break;
            case sset::ExplanationStatus::NoSalientSignal: ++n_no_signal; break;
            case sset::ExplanationStatus::NoSalientSubsequence: ++n_no_subsequence; break;
        }
    }
    std::cout << "explained " << n_explained << ", no salient signal " << n_no_signal
              << ", no salient subsequence " << n_no_subsequence << ", errors " << n_errors
              << "\n";
    return n_errors == 0 ? 0 : 1;
}

int cmd_report(const std::string& explanations_dir, const std::string& data_dir,
               bool with_baseline, const std::string& out_dir) {
    const std::vector<sset::Explanation> explanations =
        sset::load_explanations(explanations_dir);
    if (explanations.empty()) {
        throw std::runtime_error("no explanation files in " + explanations_dir);
    }
    const sset::LabeledDataset dataset = sset::load_dataset(data_dir);

    fs::create_directories(out_dir);
    sset::write_text_file_atomic(fs::path(out_dir) / "manifest.json",
                                 json{{"tool_version", sset::kToolVersion},
                                      {"command", "report"},
                                      {"explanations", explanations_dir},
                                      {"dataset", data_dir},
                                      {"with_baseline", with_baseline},
                                      {"output_dir", out_dir}}
                                         .dump(2) +
                                     "\n");

    std::vector<sset::QualityRow> rows;
    rows.reserve(explanations.size());
    for (const sset::Explanation& ex : explanations) {
        const sset::LabeledInstance* item = dataset.find_test(ex.instance_id);
        if (!item) {
            throw std::runtime_error("explained instance '" + ex.instance_id +
                                     "' is not in the dataset's test split");
        }
        if (item->instance.steps != ex.importance.steps ||
            item->instance.signals != ex.importance.signals) {
            throw std::runtime_error("explanation '" + ex.instance_id +
                                     "' does not match the dataset shape");
        }
        rows.push_back(sset::quality_row(ex, item->instance));
    }
    const sset::QualityReport sset_report = sset::aggregate_quality(rows);

    std::vector<std::pair<std::string, sset::QualityReport>> tables;
    tables.emplace_back("SSET", sset_report);

    if (with_baseline) {
        // The baseline shares the builtin centroid oracle; explanations made
        // with a subprocess oracle are still compared against this reference.
        const sset::CentroidClassifier oracle = sset::fit_centroid_classifier(
            dataset.train, dataset.meta.classes, sset::kDefaultCentroidTemperature);
        const sset::OcclusionConfig occlusion_config;
        std::vector<sset::QualityRow> baseline_rows;
        baseline_rows.reserve(explanations.size());
        for (const sset::Explanation& ex : explanations) {
            const sset::LabeledInstance* item = dataset.find_test(ex.instance_id);
            const auto [winner, winner_score] = sset::predict_winner(oracle, item->instance);
            const sset::OcclusionResult occ =
                sset::occlusion_explain(item->instance, oracle, winner, dataset.train,
                                        occlusion_config);
            sset::QualityRow row;
            row.instance_id = ex.instance_id;
            row.status = sset::ExplanationStatus::Explained;
            row.winner_score = winner_score;
            row.has_metrics = true;
            row.precision = sset::precision_metric(winner_score, occ.best_score);
            row.informativeness =
                static_cast<double>(sset::informativeness_metric(occ.importance));
            row.similarity = sset::similarity_metric(item->instance, occ.best_manipulated);
            row.window_size = occlusion_config.window_size;
            baseline_rows.push_back(std::move(row));
        }
        tables.emplace_back("Occlusion", sset::aggregate_quality(baseline_rows));
    }

    json report;
    report["sset"] = sset::quality_report_to_json(sset_report);
    if (with_baseline) {
        report["occlusion"] = sset::quality_report_to_json(tables[1].second);
    }
    const std::vector<int> histogram =
        sset::salient_signal_histogram(explanations, dataset.meta.signals);
    json histogram_json = json::object();
    for (int s = 0; s < dataset.meta.signals; ++s) {
        histogram_json[dataset.meta.signal_names[static_cast<std::size_t>(s)]] =
            histogram[static_cast<std::size_t>(s)];
    }
    report["salient_signal_histogram"] = std::move(histogram_json);
    const sset::WindowSizeDistribution windows = sset::window_size_distribution(explanations);
    json window_hist = json::object();
    for (const auto& [size, count] : windows.histogram) {
        window_hist[std::to_string(size)] = count;
    }
    report["window_size_distribution"] =
        json{{"histogram", std::move(window_hist)}, {"mean", windows.mean},
             {"count", windows.count}};
    std::string correlation_note;
    try {
        report["distance_window_correlation"] = sset::distance_window_correlation(explanations);
    } catch (const std::exception& e) {
        report["distance_window_correlation"] = nullptr;
        correlation_note = e.what();
    }
    sset::write_text_file_atomic(fs::path(out_dir) / "report.json", report.dump(2) + "\n");

    std::string markdown = "# Explanation quality report\n\n";
    markdown += sset::quality_report_markdown(tables);
    markdown += "\nInstances: " + std::to_string(sset_report.rows.size()) + " (" +
                std::to_string(sset_report.n_explained) + " explained, " +
                std::to_string(sset_report.n_failed) + " failed)\n";
    markdown += "\nPessimistic precision (failed explanations count as zero drop): " +
                sset::format_double(sset_report.precision_pessimistic) + "\n";
    markdown += "\nMean salient window size: " + sset::format_double(windows.mean) + " over " +
                std::to_string(windows.count) + " explained instances\n";
    if (correlation_note.empty()) {
        markdown += "\nDistance-window correlation: " +
                    sset::format_double(report["distance_window_correlation"].get<double>()) +
                    "\n";
    } else {
        markdown += "\nDistance-window correlation: undefined (" + correlation_note + ")\n";
    }
    sset::write_text_file_atomic(fs::path(out_dir) / "report.md", markdown);

    std::cout << "report over " << sset_report.rows.size() << " explanations -> " << out_dir
              << "\n";
    return 0;
}

int cmd_render(const std::string& explanation_file, const std::string& out_file) {
    const sset::Explanation ex = sset::load_explanation(explanation_file);
    std::vector<std::string> names = ex.signal_names;
    if (names.empty()) {
        for (int s = 0; s < ex.importance.signals; ++s) {
            names.push_back("s" + std::to_string(s));
        }
    }
    if (static_cast<int>(names.size()) != ex.importance.signals) {
        throw std::runtime_error("explanation lists " + std::to_string(names.size()) +
                                 " signal names for " + std::to_string(ex.importance.signals) +
                                 " signals");
    }
    const std::string title =
        ex.instance_id + " (" + sset::to_string(ex.status) + ")";
    sset::write_text_file_atomic(out_file,
                                 sset::render_heatmap_svg(ex.importance, names, title));
    std::cout << "wrote " << out_file << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Swap-slide saliency explanations for multivariate time-series classifiers"};
    app.require_subcommand(1);

    std::string spec_file;
    std::string synth_out;
    CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic benchmark dataset");
    synth->add_option("--spec", spec_file, "Synthetic spec JSON")->required();
    synth->add_option("--out", synth_out, "Output dataset directory")->required();

    std::string data_dir;
    std::string oracle_text = "builtin";
    std::string config_file;
    std::string ids_text;
    int sample = -1;
    std::uint64_t seed = 0;
    std::string explain_out;
    int jobs = 1;
    CLI::App* explain = app.add_subcommand("explain", "Explain test instances");
    explain->add_option("--data", data_dir, "Dataset directory")->required();
    explain->add_option("--oracle", oracle_text, "builtin or cmd:\"command\"");
    explain->add_option("--config", config_file, "Explainer config JSON");
    CLI::Option* ids_opt = explain->add_option("--ids", ids_text, "Comma-separated instance ids");
    CLI::Option* sample_opt =
        explain->add_option("--sample", sample, "Sample N test instances uniformly");
    ids_opt->excludes(sample_opt);
    explain->add_option("--seed", seed, "Run seed");
    explain->add_option("--out", explain_out, "Output directory")->required();
    explain->add_option("--jobs", jobs, "Worker count")->check(CLI::PositiveNumber);

    std::string explanations_dir;
    std::string report_data;
    bool with_baseline = false;
    std::string report_out;
    CLI::App* report = app.add_subcommand("report", "Aggregate explanation quality");
    report->add_option("--explanations", explanations_dir, "Directory of explanation JSON files")
        ->required();
    report->add_option("--data", report_data, "Dataset directory")->required();
    report->add_flag("--with-baseline", with_baseline, "Also run the occlusion baseline");
    report->add_option("--out", report_out, "Output directory")->required();

    std::string explanation_file;
    std::string render_out;
    CLI::App* render = app.add_subcommand("render", "Render an explanation heatmap as SVG");
    render->add_option("--explanation", explanation_file, "Explanation JSON file")->required();
    render->add_option("--out", render_out, "Output SVG file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) {
            return cmd_synth(spec_file, synth_out);
        }
        if (explain->parsed()) {
            if (ids_text.empty() && sample < 0) {
                throw std::runtime_error("explain needs --ids or --sample");
            }
            return cmd_explain(data_dir, oracle_text, config_file, ids_text, sample, seed,
                               explain_out, jobs);
        }
        if (report->parsed()) {
            return cmd_report(explanations_dir, report_data, with_baseline, report_out);
        }
        if (render->parsed()) {
            return cmd_render(explanation_file, render_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
