#pragma once

#include <vector>

#include "sset/core.hpp"

namespace sset {

// Data-parallel scoring kernels. The parallel variants split work across
// OpenMP threads but keep each per-instance computation in serial order, so
// they are bit-identical to the serial reference implementations below.

/// Distance from `ref` to every instance in `pool`, in pool order.
std::vector<double> batch_distances(const TimeSeriesInstance& ref,
                                    const std::vector<LabeledInstance>& pool);

/// Distance from `ref` to pool[idx] for each idx in `indices`.
std::vector<double> batch_distances_at(const TimeSeriesInstance& ref,
                                       const std::vector<LabeledInstance>& pool,
                                       const std::vector<int>& indices);

namespace serial {

std::vector<double> batch_distances(const TimeSeriesInstance& ref,
                                    const std::vector<LabeledInstance>& pool);

std::vector<double> batch_distances_at(const TimeSeriesInstance& ref,
                                       const std::vector<LabeledInstance>& pool,
                                       const std::vector<int>& indices);

}  // namespace serial

}  // namespace sset
