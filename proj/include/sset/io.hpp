#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "sset/eval.hpp"
#include "sset/explain.hpp"

namespace sset {

inline constexpr const char* kToolVersion = "0.1.0";

// --- SsetConfig ---------------------------------------------------------

/// Strict parse: unknown keys are errors, absent keys keep their defaults,
/// ctx_max accepts null for "derive from T".
SsetConfig sset_config_from_json(const nlohmann::json& j);
SsetConfig load_sset_config(const std::filesystem::path& file);
nlohmann::json sset_config_to_json(const SsetConfig& config);

// --- SyntheticSpec ------------------------------------------------------

SyntheticSpec synthetic_spec_from_json(const nlohmann::json& j);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& file);
nlohmann::json synthetic_spec_to_json(const SyntheticSpec& spec);

/// Ground-truth sidecar written next to a generated dataset.
void write_ground_truth(const SyntheticSpec& spec, const std::filesystem::path& dir);

// --- Explanations -------------------------------------------------------

nlohmann::json explanation_to_json(const Explanation& explanation);
Explanation explanation_from_json(const nlohmann::json& j);

/// JSON file plus a flat `t,s,score` CSV of the importance matrix, both named
/// after the instance id. Writes are atomic (rename over a temp file).
void save_explanation(const Explanation& explanation, const std::filesystem::path& dir);
Explanation load_explanation(const std::filesystem::path& file);

/// All *.json explanations in a directory, sorted by file name.
std::vector<Explanation> load_explanations(const std::filesystem::path& dir);

// --- Run manifests ------------------------------------------------------

/// Snapshot that makes an explanation run reproducible: rerunning with these
/// inputs yields byte-identical outputs.
struct RunManifest {
    std::string tool_version = kToolVersion;
    std::string command;       // synth | explain | report
    std::string dataset_path;
    std::string oracle_spec;   // "builtin" or "cmd:..."
    SsetConfig config;
    std::uint64_t seed = 0;
    std::vector<std::string> ids;  // explicit selection; empty when sampling
    int sample = -1;               // >= 0 when --sample was used
    std::string output_dir;
    int jobs = 1;
};

nlohmann::json run_manifest_to_json(const RunManifest& manifest);
void write_run_manifest(const RunManifest& manifest, const std::filesystem::path& dir);

// --- Quality reports ----------------------------------------------------

nlohmann::json quality_report_to_json(const QualityReport& report);

/// Markdown table, one row per explainer:
/// | Explainer | Precision | Informativeness | Similarity |
std::string quality_report_markdown(
    const std::vector<std::pair<std::string, QualityReport>>& reports);

// --- Plumbing -----------------------------------------------------------

std::string read_text_file(const std::filesystem::path& file);

/// Write-to-temp-then-rename so readers never observe a partial file.
void write_text_file_atomic(const std::filesystem::path& file, const std::string& content);

nlohmann::json parse_json_file(const std::filesystem::path& file);

}  // namespace sset
