#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sset/core.hpp"
#include "sset/explain.hpp"

namespace sset {

/// Ground truth planted for one class by the synthetic generator.
struct PlantedSaliency {
    int signal = 0;
    int t_lo = 0;  // inclusive interval bounds
    int t_hi = 0;
    double amplitude = 0.0;  // added to the baseline over the interval, may be negative
};

/// Recipe for a synthetic benchmark dataset with known per-class saliency.
struct SyntheticSpec {
    int steps = 30;
    int signals = 8;
    int classes = 3;
    std::vector<PlantedSaliency> planted;  // one per class, indexed by label
    double noise_sigma = 0.05;
    int n_train = 300;
    int n_test = 100;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Builds the dataset: per instance, every signal starts as smoothed Gaussian
/// noise around 0.5, the class's planted bump is added over its interval, and
/// values are clipped to [0,1]. Labels cycle 0,1,...,C-1. Deterministic in
/// spec.seed.
LabeledDataset generate_synthetic(const SyntheticSpec& spec);

/// Score suppression achieved by a manipulation: max(0, y_i_c - manipulated_score).
double precision_metric(double y_i_c, double manipulated_score);

/// Number of time steps with any nonzero importance cell.
int informativeness_metric(const ImportanceMatrix& importance);

/// Euclidean distance between the instance and its manipulated counterpart.
double similarity_metric(const TimeSeriesInstance& x, const TimeSeriesInstance& manipulated);

/// Per-instance metric row; the aggregate means skip rows without metrics
/// (i.e. failed explanations).
struct QualityRow {
    std::string instance_id;
    ExplanationStatus status = ExplanationStatus::NoSalientSignal;
    double winner_score = 0.0;
    bool has_metrics = false;  // true only for explained instances
    double precision = 0.0;
    double informativeness = 0.0;
    double similarity = 0.0;
    double window_size = 0.0;        // representative (minimum) salient window
    double neighbor_distance = 0.0;  // distance of the chosen neighbor
};

/// Builds the metric row for one explanation and its instance.
QualityRow quality_row(const Explanation& explanation, const TimeSeriesInstance& x);

struct QualityReport {
    double precision = 0.0;        // means over explained instances only
    double informativeness = 0.0;
    double similarity = 0.0;
    // Pessimistic precision counts failed explanations as 0 drop and averages
    // over every instance.
    double precision_pessimistic = 0.0;
    int n_explained = 0;
    int n_failed = 0;
    std::vector<QualityRow> rows;
};

QualityReport aggregate_quality(const std::vector<QualityRow>& rows);

/// How many explanations list each signal as salient (directly or as a pair
/// member). Size num_signals.
std::vector<int> salient_signal_histogram(const std::vector<Explanation>& explanations,
                                          int num_signals);

struct WindowSizeDistribution {
    std::map<int, int> histogram;  // representative (minimum) window size -> count
    double mean = 0.0;
    int count = 0;  // contributing explanations
};

WindowSizeDistribution window_size_distribution(const std::vector<Explanation>& explanations);

/// Pearson correlation between chosen-neighbor distance and the
/// representative window size, over explained instances. Propagates the
/// undefined-correlation error on zero variance.
double distance_window_correlation(const std::vector<Explanation>& explanations);

}  // namespace sset
