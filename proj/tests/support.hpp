#pragma once

// Shared helpers for the test binaries: function-backed oracles, tiny dataset
// builders, and scratch directories.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "sset/blackbox.hpp"
#include "sset/core.hpp"

namespace testsupport {

/// Oracle backed by an arbitrary function; batch goes through the default
/// serial loop so constructed oracles stay single-threaded and simple.
class FunctionOracle final : public sset::PredictionOracle {
public:
    using Fn = std::function<std::vector<double>(const sset::TimeSeriesInstance&)>;

    FunctionOracle(int classes, Fn fn) : classes_(classes), fn_(std::move(fn)) {}

    int num_classes() const override { return classes_; }
    std::vector<double> predict(const sset::TimeSeriesInstance& instance) const override {
        return fn_(instance);
    }

private:
    int classes_;
    Fn fn_;
};

/// Two-class oracle helper: wraps a scalar winner-class-0 score function into
/// a simplex [p, 1-p].
inline FunctionOracle binary_oracle(std::function<double(const sset::TimeSeriesInstance&)> p0) {
    return FunctionOracle(2, [p0 = std::move(p0)](const sset::TimeSeriesInstance& x) {
        const double p = p0(x);
        return std::vector<double>{p, 1.0 - p};
    });
}

inline sset::TimeSeriesInstance make_instance(std::string id, int steps, int signals,
                                              const std::vector<double>& values) {
    sset::TimeSeriesInstance x(std::move(id), steps, signals);
    if (values.size() != x.values.size()) {
        throw std::invalid_argument("make_instance: value count does not match shape");
    }
    x.values = values;
    return x;
}

inline sset::TimeSeriesInstance constant_instance(std::string id, int steps, int signals,
                                                  double value) {
    sset::TimeSeriesInstance x(std::move(id), steps, signals);
    for (double& v : x.values) v = value;
    return x;
}

inline sset::DatasetMeta make_meta(int steps, int signals, int classes) {
    sset::DatasetMeta meta;
    meta.steps = steps;
    meta.signals = signals;
    meta.classes = classes;
    for (int s = 0; s < signals; ++s) meta.signal_names.push_back("s" + std::to_string(s));
    for (int c = 0; c < classes; ++c) meta.class_names.push_back("c" + std::to_string(c));
    return meta;
}

/// Instance with uniform random values in [0,1] from a plain engine (test-only
/// randomness, independent of the library's RandomSource).
inline sset::TimeSeriesInstance random_instance(std::string id, int steps, int signals,
                                                std::mt19937_64& gen) {
    sset::TimeSeriesInstance x(std::move(id), steps, signals);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (double& v : x.values) v = unit(gen);
    return x;
}

/// Unique scratch directory, removed on destruction. Rooted at SSET_WORK_DIR
/// when set (the ctest binary dir) so test debris stays out of the source tree.
class ScratchDir {
public:
    explicit ScratchDir(const std::string& tag) {
        namespace fs = std::filesystem;
        const char* root = std::getenv("SSET_WORK_DIR");
        fs::path base = root != nullptr ? fs::path(root) : fs::temp_directory_path();
        std::random_device rd;
        path_ = base / (tag + "_" + std::to_string(rd()) + std::to_string(rd()));
        fs::create_directories(path_);
    }
    ~ScratchDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    ScratchDir(const ScratchDir&) = delete;
    ScratchDir& operator=(const ScratchDir&) = delete;

    const std::filesystem::path& path() const { return path_; }

private:
    std::filesystem::path path_;
};

}  // namespace testsupport
