#pragma once

#include <vector>

#include "sset/blackbox.hpp"
#include "sset/core.hpp"

namespace sset {

/// Windowed occlusion baseline: a fixed-size window is occluded around every
/// (step, signal) cell and the score drop is attributed to that cell.
struct OcclusionConfig {
    enum class Replacement { TrainMean, Zero };

    int window_size = 3;  // odd and positive; clipped at series boundaries
    Replacement replacement = Replacement::TrainMean;

    void validate(int steps) const;
};

struct OcclusionResult {
    ImportanceMatrix importance;        // cell (t, s) = max(0, y_i_c - occluded score)
    TimeSeriesInstance best_manipulated;  // the single occlusion with the largest drop
    double best_score = 0.0;            // its winner-class score
    double best_drop = 0.0;
    int best_step = 0;                  // center of the winning occlusion
    int best_signal = 0;
};

/// Scores every occlusion of x at winner_class. Replacement values are the
/// per-cell train mean or zeros. Ties for the best occlusion break to the
/// lowest (step, signal) in row-major order.
OcclusionResult occlusion_explain(const TimeSeriesInstance& x, const PredictionOracle& oracle,
                                  int winner_class, const std::vector<LabeledInstance>& train,
                                  const OcclusionConfig& config);

}  // namespace sset
