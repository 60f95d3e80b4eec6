#pragma once

#include <string>
#include <vector>

#include "sset/core.hpp"

namespace sset {

/// Importance score to fill color: 0 -> white, 1 -> rgb(8,48,107), linear in
/// between (out-of-range scores are clamped).
std::string heatmap_color(double score);

/// Deterministic SVG heatmap: one column per time step, one row per signal,
/// signal names down the left edge, step labels along the bottom. The byte
/// output is stable for identical inputs, so renders can be golden-tested.
std::string render_heatmap_svg(const ImportanceMatrix& importance,
                               const std::vector<std::string>& signal_names,
                               const std::string& title);

}  // namespace sset
