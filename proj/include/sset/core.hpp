#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

namespace sset {

/// One multivariate series: T time steps by V signals, row-major in `values`.
/// Dataset loading guarantees every value lies in [0,1].
struct TimeSeriesInstance {
    std::string id;
    int steps = 0;    // T
    int signals = 0;  // V
    std::vector<double> values;  // values[t * signals + s]

    TimeSeriesInstance() = default;
    TimeSeriesInstance(std::string id_, int steps_, int signals_)
        : id(std::move(id_)), steps(steps_), signals(signals_),
          values(static_cast<size_t>(steps_) * signals_, 0.0) {}

    double at(int t, int s) const { return values[static_cast<size_t>(t) * signals + s]; }
    double& at(int t, int s) { return values[static_cast<size_t>(t) * signals + s]; }

    bool same_shape(const TimeSeriesInstance& other) const {
        return steps == other.steps && signals == other.signals;
    }
};

struct LabeledInstance {
    TimeSeriesInstance instance;
    int label = 0;
};

struct DatasetMeta {
    int steps = 0;    // T
    int signals = 0;  // V
    int classes = 0;  // C
    std::vector<std::string> signal_names;
    std::vector<std::string> class_names;
    // Disjoint groups of signal indices treated as correlated; signals in no
    // group form the implicit non-correlated set.
    std::vector<std::vector<int>> signal_groups;
};

struct LabeledDataset {
    DatasetMeta meta;
    std::vector<LabeledInstance> train;
    std::vector<LabeledInstance> test;

    const LabeledInstance* find_test(const std::string& id) const;
    const LabeledInstance* find_train(const std::string& id) const;
};

/// Per-(time step, signal) scores in [0,1]; zero everywhere a perturbation
/// had no recorded effect.
struct ImportanceMatrix {
    int steps = 0;
    int signals = 0;
    std::vector<double> scores;

    ImportanceMatrix() = default;
    ImportanceMatrix(int steps_, int signals_)
        : steps(steps_), signals(signals_),
          scores(static_cast<size_t>(steps_) * signals_, 0.0) {}

    double at(int t, int s) const { return scores[static_cast<size_t>(t) * signals + s]; }
    double& at(int t, int s) { return scores[static_cast<size_t>(t) * signals + s]; }
};

/// Deterministic random source. Same seed, same draw sequence; outputs never
/// depend on library-defined distributions so runs reproduce exactly.
class RandomSource {
public:
    explicit RandomSource(uint64_t seed) : seed_(seed), gen_(seed) {}

    uint64_t seed() const { return seed_; }

    uint64_t next_u64() { return gen_(); }

    /// Uniform integer in [0, n). Rejection sampling, n >= 1.
    uint64_t next_below(uint64_t n);

    /// Uniform double in [0, 1).
    double next_unit();

    /// Standard normal via Box-Muller.
    double next_gaussian();

    /// Independent child stream; derivation depends only on (seed, index).
    RandomSource derive_child(uint64_t index) const;

private:
    uint64_t seed_;
    std::mt19937_64 gen_;
    bool has_spare_gaussian_ = false;
    double spare_gaussian_ = 0.0;
};

/// Shortest decimal representation that round-trips the exact double.
std::string format_double(double v);

/// Root-sum-square difference over all T x V cells. Throws on shape mismatch.
double euclidean_distance(const TimeSeriesInstance& a, const TimeSeriesInstance& b);

/// Sample Pearson coefficient, clamped to [-1,1]. Throws on length mismatch,
/// n < 2, or zero variance ("undefined correlation").
double pearson_correlation(const std::vector<double>& xs, const std::vector<double>& ys);

/// Load a dataset directory (meta.json, train.csv, test.csv). Every invariant
/// is checked; errors carry file, line, and field context.
LabeledDataset load_dataset(const std::filesystem::path& dir);

/// Write a dataset in the directory format accepted by load_dataset.
/// Values round-trip bit-exactly.
void save_dataset(const LabeledDataset& dataset, const std::filesystem::path& dir);

}  // namespace sset
