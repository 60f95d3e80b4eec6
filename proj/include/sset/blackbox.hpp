#pragma once

#include <cstdio>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "sset/core.hpp"

namespace sset {

/// The black-box: maps an instance to a probability vector over C classes.
/// Every response is a simplex (length C, entries in [0,1], sum 1 within
/// 1e-6) and a pure function of the instance.
class PredictionOracle {
public:
    virtual ~PredictionOracle() = default;

    virtual int num_classes() const = 0;
    virtual std::vector<double> predict(const TimeSeriesInstance& instance) const = 0;

    /// Default batch entry point: a plain serial loop over predict. The
    /// explainer scores whole batches of manipulated instances through this,
    /// so thread-safe oracles override it with a parallel version.
    virtual std::vector<std::vector<double>> predict_batch(
        const std::vector<TimeSeriesInstance>& instances) const;
};

/// Throws unless probs is a length-C simplex (sum within `tol` of 1).
void validate_probability_vector(const std::vector<double>& probs, int num_classes,
                                 double tol = 1e-6);

/// Nearest-centroid reference classifier: probabilities are a softmax of
/// negative distances, p_c proportional to exp(-temperature * d_c). Immutable
/// and safe to share across threads; predict_batch runs under OpenMP.
class CentroidClassifier final : public PredictionOracle {
public:
    CentroidClassifier(std::vector<TimeSeriesInstance> centroids, double temperature);

    int num_classes() const override { return static_cast<int>(centroids_.size()); }
    std::vector<double> predict(const TimeSeriesInstance& instance) const override;
    std::vector<std::vector<double>> predict_batch(
        const std::vector<TimeSeriesInstance>& instances) const override;

    const TimeSeriesInstance& centroid(int c) const { return centroids_[c]; }
    double temperature() const { return temperature_; }

private:
    std::vector<TimeSeriesInstance> centroids_;
    double temperature_;
};

/// Temperature used whenever a centroid classifier is fit without an explicit
/// choice (the CLI's builtin oracle and the report baseline).
inline constexpr double kDefaultCentroidTemperature = 12.0;

/// Element-wise per-class means of the training split. Throws if any class
/// has no training instance.
CentroidClassifier fit_centroid_classifier(const std::vector<LabeledInstance>& train,
                                           int num_classes, double temperature);

/// (argmax class, its probability); ties break to the lowest class index.
std::pair<int, double> predict_winner(const PredictionOracle& oracle,
                                      const TimeSeriesInstance& instance);

/// Oracle backed by a child process speaking newline-delimited JSON on
/// stdin/stdout:
///   -> {"type":"handshake","T":..,"V":..}      <- {"type":"ready","C":..}
///   -> {"type":"predict","id":..,"values":..}  <- {"type":"probs","id":..,"probs":..}
///   -> {"type":"shutdown"}                     (child exits 0)
/// Child stderr passes through. Any protocol violation is a hard error.
/// Requests are serialized over the single pipe; concurrent callers block.
class SubprocessOracle final : public PredictionOracle {
public:
    /// Spawns `command` via /bin/sh -c and performs the handshake.
    SubprocessOracle(const std::string& command, int steps, int signals);
    ~SubprocessOracle() override;

    SubprocessOracle(const SubprocessOracle&) = delete;
    SubprocessOracle& operator=(const SubprocessOracle&) = delete;

    int num_classes() const override { return num_classes_; }
    std::vector<double> predict(const TimeSeriesInstance& instance) const override;

private:
    std::string read_line_locked() const;
    void write_line_locked(const std::string& line) const;

    std::string command_;
    int steps_ = 0;
    int signals_ = 0;
    int num_classes_ = 0;
    pid_t child_pid_ = -1;
    mutable FILE* to_child_ = nullptr;
    mutable FILE* from_child_ = nullptr;
    mutable std::mutex pipe_mutex_;
    mutable uint64_t request_counter_ = 0;
};

}  // namespace sset
