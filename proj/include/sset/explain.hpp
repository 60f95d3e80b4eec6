#pragma once

#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "sset/blackbox.hpp"
#include "sset/core.hpp"

namespace sset {

/// Hyperparameters of the swap-slide search.
struct SsetConfig {
    double thr_c = 0.5;    // a manipulation counts once the winner score falls to <= thr_c
    double thr_n = 8.0;    // outermost neighborhood radius
    int thr_a = 10;        // sampling attempts per scope
    double l = 1.0;        // scope width
    double delta = 0.1;    // scope shift per round
    double start = -1.0;   // historical loop offset; the schedule itself uses k*delta (see
                           // neighborhood_scopes)
    int n_neighbors = 10;  // neighbors sampled per attempt
    int ctx0 = 1;          // initial context size
    double lambda = 0.1;   // window-size coefficient in the importance score
    double alpha = 0.9;    // neighbor-step proportion of the current step's score
    std::optional<int> ctx_max;  // context growth cap; defaults to floor((T-1)/2)

    /// Throws std::invalid_argument on any violated invariant.
    void validate() const;

    int ctx_max_for(int steps) const {
        return ctx_max ? *ctx_max : (steps - 1) / 2;
    }
};

struct NeighborhoodScope {
    double lo = 0.0;
    double hi = 0.0;
};

/// The scope schedule: [k*delta, k*delta+l] for k = 0,1,2,... while
/// k*delta+l <= thr_n (evaluated with a small tolerance so the count matches
/// exact arithmetic); hi is clamped to thr_n.
std::vector<NeighborhoodScope> neighborhood_scopes(const SsetConfig& config);

/// A training instance picked as a swap source.
struct NeighborSample {
    int train_index = -1;
    double distance = 0.0;
};

/// Up to `n` distinct instances drawn uniformly without replacement from the
/// target-class training instances whose distance to `x` lies in [lo, hi].
/// An empty result is a valid outcome and drives the retry loop.
std::vector<NeighborSample> sample_neighbors(const TimeSeriesInstance& x,
                                             const std::vector<LabeledInstance>& train,
                                             const std::set<int>& target_classes, double lo,
                                             double hi, int n, RandomSource& rng);

/// Outcome of swapping one signal (or a pair) across a neighbor set.
struct SwapResult {
    std::vector<int> signal_indices;  // one entry, or two for a dual swap
    struct Entry {
        int train_index = -1;
        std::string neighbor_id;
        double distance = 0.0;
        TimeSeriesInstance manipulated;  // x with the named columns taken from the neighbor
        double winner_score = 0.0;
    };
    std::vector<Entry> entries;  // one per neighbor, in neighbor order
    int best = -1;               // argmin winner_score; ties break to the lowest index

    double best_score() const { return entries[best].winner_score; }
};

/// Copies of `x` with the named columns replaced by each neighbor's columns
/// (all from the same neighbor per copy), scored at class `winner_class`.
SwapResult swap_signals(const TimeSeriesInstance& x, const std::vector<LabeledInstance>& train,
                        const std::vector<NeighborSample>& neighbors,
                        const std::vector<int>& signal_indices, const PredictionOracle& oracle,
                        int winner_class);

/// Single-signal convenience form of swap_signals.
SwapResult swap_signal(const TimeSeriesInstance& x, const std::vector<LabeledInstance>& train,
                       const std::vector<NeighborSample>& neighbors, int signal_index,
                       const PredictionOracle& oracle, int winner_class);

struct SalientSignalDetection {
    std::vector<int> salient;            // ascending signal indices with best score <= thr_c
    std::vector<SwapResult> per_signal;  // size V, indexed by signal
};

/// Runs swap_signal for every signal; a signal is salient when the minimum
/// winner-class score over its swapped instances is <= thr_c.
SalientSignalDetection detect_salient_signals(const TimeSeriesInstance& x,
                                              const std::vector<LabeledInstance>& train,
                                              const std::vector<NeighborSample>& neighbors,
                                              const PredictionOracle& oracle, int winner_class,
                                              double thr_c);

struct DualPairCandidates {
    std::vector<std::pair<int, int>> within_groups;   // lexicographic within each declared group
    std::vector<std::pair<int, int>> non_correlated;  // pairs from signals in no group
};

/// Pair search space for the dual-signal fallback. Throws "dual swap
/// impossible" when no pair exists in either phase.
DualPairCandidates enumerate_dual_pairs(const std::vector<std::vector<int>>& signal_groups,
                                        int num_signals);

struct DualSignalDetection {
    std::vector<std::pair<int, int>> salient_pairs;
    std::vector<SwapResult> per_pair;  // parallel to salient_pairs
};

/// Joint swap of signal pairs, within-group pairs first and the
/// non-correlated remainder only if no grouped pair succeeds.
DualSignalDetection dual_signals(const TimeSeriesInstance& x,
                                 const std::vector<LabeledInstance>& train,
                                 const std::vector<NeighborSample>& neighbors,
                                 const PredictionOracle& oracle, int winner_class, double thr_c,
                                 const std::vector<std::vector<int>>& signal_groups);

/// A windowed manipulation whose winner-class score fell to <= thr_c.
struct SalientSubsequence {
    std::vector<int> signal_indices;  // the slid signal, or the pair
    int t_current = 0;                // the step the window was built around
    int t_lo = 0;                     // inclusive window bounds after boundary clipping
    int t_hi = 0;
    int window_size = 0;  // t_hi - t_lo + 1
    double score = 0.0;   // winner-class score of the manipulated instance
    double drop = 0.0;    // winner score of x minus `score`
};

struct SlideResult {
    std::vector<SalientSubsequence> subsequences;
    int ctx_reached = 0;  // succeeding context, or the last one attempted (0 if none ran)
};

/// Grows the context from ctx0 and, per context, slides a clipped window
/// t' +/- ctx over every step, replacing windowed cells of the swap signals
/// with the best neighbor's values. Returns every qualifying step at the
/// first (smallest) context that yields one. winner_score is the unperturbed
/// score, used to fill each subsequence's drop.
SlideResult slide(const TimeSeriesInstance& x, const SwapResult& swap,
                  const PredictionOracle& oracle, int winner_class, double winner_score,
                  double thr_c, int ctx0, int ctx_max);

/// Per-cell scores: the current step of a subsequence gets
/// min(|drop| + lambda*exp(-window_size/T), 1), its window neighbors get
/// alpha times that, and overlaps resolve by taking the maximum. Everything
/// untouched stays exactly 0.
ImportanceMatrix importance_scores(double winner_score,
                                   const std::vector<SalientSubsequence>& subsequences, int steps,
                                   int signals, double lambda, double alpha);

enum class ExplanationStatus { Explained, NoSalientSignal, NoSalientSubsequence };

const char* to_string(ExplanationStatus status);
ExplanationStatus explanation_status_from_string(const std::string& text);

struct ChosenNeighbor {
    std::string id;
    double distance = 0.0;
};

struct BestManipulation {
    TimeSeriesInstance values;  // the best sliding-stage manipulated instance
    double score = 0.0;         // its winner-class score
    double drop = 0.0;
};

struct Explanation {
    std::string instance_id;
    std::vector<std::string> signal_names;  // carried so renders are self-contained
    ExplanationStatus status = ExplanationStatus::NoSalientSignal;
    int winner_class = 0;
    double winner_score = 0.0;
    std::vector<int> salient_signals;                  // single-signal stage result
    std::vector<std::pair<int, int>> salient_pairs;    // dual-signal stage result
    std::vector<SalientSubsequence> subsequences;
    ImportanceMatrix importance;
    std::optional<ChosenNeighbor> chosen_neighbor;     // source of the best manipulation
    std::optional<BestManipulation> best_manipulation;
    int ctx_used = 0;
    int attempts_used = 0;
    NeighborhoodScope scope_used;

    bool dual_used() const { return !salient_pairs.empty(); }
};

/// The full search: winner prediction, scope/attempt loop with single-signal
/// swapping, dual-signal fallback over every neighbor seen, sliding, and
/// importance scoring. Pure function of (x, dataset, oracle, config, rng seed).
Explanation explain(const TimeSeriesInstance& x, const LabeledDataset& dataset,
                    const PredictionOracle& oracle, const SsetConfig& config, RandomSource& rng);

}  // namespace sset
