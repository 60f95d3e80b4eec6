#include "sset/kernels.hpp"

namespace sset {

std::vector<double> batch_distances(const TimeSeriesInstance& ref,
                                    const std::vector<LabeledInstance>& pool) {
    std::vector<double> out(pool.size(), 0.0);
    const int64_t n = static_cast<int64_t>(pool.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) out[i] = euclidean_distance(ref, pool[i].instance);
    return out;
}

std::vector<double> batch_distances_at(const TimeSeriesInstance& ref,
                                       const std::vector<LabeledInstance>& pool,
                                       const std::vector<int>& indices) {
    std::vector<double> out(indices.size(), 0.0);
    const int64_t n = static_cast<int64_t>(indices.size());
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < n; ++i) out[i] = euclidean_distance(ref, pool[indices[i]].instance);
    return out;
}

namespace serial {

std::vector<double> batch_distances(const TimeSeriesInstance& ref,
                                    const std::vector<LabeledInstance>& pool) {
    std::vector<double> out;
    out.reserve(pool.size());
    for (const auto& li : pool) out.push_back(euclidean_distance(ref, li.instance));
    return out;
}

std::vector<double> batch_distances_at(const TimeSeriesInstance& ref,
                                       const std::vector<LabeledInstance>& pool,
                                       const std::vector<int>& indices) {
    std::vector<double> out;
    out.reserve(indices.size());
    for (int idx : indices) out.push_back(euclidean_distance(ref, pool[idx].instance));
    return out;
}

}  // namespace serial

}  // namespace sset
