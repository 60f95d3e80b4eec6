#include "sset/explain.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "sset/kernels.hpp"

namespace sset {

namespace {

// Tolerance on the scope-schedule termination test only: k*delta + l is
// compared against thr_n after accumulated FP error (e.g. 70*0.1 + 1 ==
// 8.000000000000002), and the schedule length should match exact arithmetic.
constexpr double kScopeTol = 1e-9;

// Scores a batch at the winner class, validating every oracle response.
std::vector<double> winner_scores(const PredictionOracle& oracle,
                                  const std::vector<TimeSeriesInstance>& batch,
                                  int winner_class) {
    const int classes = oracle.num_classes();
    if (winner_class < 0 || winner_class >= classes) {
        throw std::invalid_argument("winner class " + std::to_string(winner_class) +
                                    " out of range for " + std::to_string(classes) + " classes");
    }
    std::vector<std::vector<double>> probs = oracle.predict_batch(batch);
    std::vector<double> scores(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        validate_probability_vector(probs[i], classes);
        scores[i] = probs[i][static_cast<std::size_t>(winner_class)];
    }
    return scores;
}

void check_signal_indices(const std::vector<int>& signal_indices, int num_signals) {
    if (signal_indices.empty()) {
        throw std::invalid_argument("swap requires at least one signal index");
    }
    for (std::size_t i = 0; i < signal_indices.size(); ++i) {
        const int s = signal_indices[i];
        if (s < 0 || s >= num_signals) {
            throw std::invalid_argument("signal index " + std::to_string(s) +
                                        " out of range [0, " + std::to_string(num_signals) + ")");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (signal_indices[j] == s) {
                throw std::invalid_argument("duplicate signal index " + std::to_string(s) +
                                            " in swap");
            }
        }
    }
}

}  // namespace

void SsetConfig::validate() const {
    if (!(thr_c > 0.0 && thr_c < 1.0)) {
        throw std::invalid_argument("thr_c must lie in (0, 1)");
    }
    if (!(delta > 0.0)) {
        throw std::invalid_argument("delta must be positive");
    }
    if (!(delta <= l)) {
        throw std::invalid_argument("delta must not exceed l");
    }
    if (!(l <= thr_n)) {
        throw std::invalid_argument("l must not exceed thr_n");
    }
    if (thr_a < 1) {
        throw std::invalid_argument("thr_a must be at least 1");
    }
    if (n_neighbors < 1) {
        throw std::invalid_argument("n_neighbors must be at least 1");
    }
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("lambda must be non-negative");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }
    if (ctx0 < 1) {
        throw std::invalid_argument("ctx0 must be at least 1");
    }
    if (ctx_max && *ctx_max < 0) {
        throw std::invalid_argument("ctx_max must be non-negative");
    }
}

std::vector<NeighborhoodScope> neighborhood_scopes(const SsetConfig& config) {
    config.validate();
    std::vector<NeighborhoodScope> scopes;
    for (int k = 0;; ++k) {
        const double lo = k * config.delta;
        const double hi = lo + config.l;
        if (hi > config.thr_n + kScopeTol) {
            break;
        }
        scopes.push_back({lo, std::min(hi, config.thr_n)});
    }
    return scopes;
}

std::vector<NeighborSample> sample_neighbors(const TimeSeriesInstance& x,
                                             const std::vector<LabeledInstance>& train,
                                             const std::set<int>& target_classes, double lo,
                                             double hi, int n, RandomSource& rng) {
    if (!(lo >= 0.0 && lo < hi)) {
        throw std::invalid_argument("neighborhood scope requires 0 <= lo < hi");
    }
    if (target_classes.empty()) {
        throw std::invalid_argument("target class set is empty");
    }
    if (n < 1) {
        throw std::invalid_argument("neighbor count must be at least 1");
    }

    std::vector<int> target_indices;
    for (std::size_t i = 0; i < train.size(); ++i) {
        if (target_classes.count(train[i].label) != 0) {
            target_indices.push_back(static_cast<int>(i));
        }
    }
    const std::vector<double> distances = batch_distances_at(x, train, target_indices);

    std::vector<NeighborSample> candidates;
    for (std::size_t i = 0; i < target_indices.size(); ++i) {
        const double d = distances[i];
        if (d >= lo && d <= hi) {
            candidates.push_back({target_indices[i], d});
        }
    }
    if (candidates.size() <= static_cast<std::size_t>(n)) {
        // Everything qualifies; no randomness is consumed.
        return candidates;
    }

    // Partial Fisher-Yates: the first n slots end up as a uniform sample
    // without replacement.
    std::vector<NeighborSample> picked;
    picked.reserve(static_cast<std::size_t>(n));
    for (int j = 0; j < n; ++j) {
        const std::size_t k =
            static_cast<std::size_t>(j) +
            static_cast<std::size_t>(rng.next_below(candidates.size() - static_cast<std::size_t>(j)));
        std::swap(candidates[static_cast<std::size_t>(j)], candidates[k]);
        picked.push_back(candidates[static_cast<std::size_t>(j)]);
    }
    return picked;
}

SwapResult swap_signals(const TimeSeriesInstance& x, const std::vector<LabeledInstance>& train,
                        const std::vector<NeighborSample>& neighbors,
                        const std::vector<int>& signal_indices, const PredictionOracle& oracle,
                        int winner_class) {
    if (neighbors.empty()) {
        throw std::invalid_argument("swap requires at least one neighbor");
    }
    check_signal_indices(signal_indices, x.signals);

    SwapResult result;
    result.signal_indices = signal_indices;

    std::vector<TimeSeriesInstance> batch;
    batch.reserve(neighbors.size());
    for (const NeighborSample& nb : neighbors) {
        if (nb.train_index < 0 || static_cast<std::size_t>(nb.train_index) >= train.size()) {
            throw std::invalid_argument("neighbor train index " + std::to_string(nb.train_index) +
                                        " out of range");
        }
        const TimeSeriesInstance& source = train[static_cast<std::size_t>(nb.train_index)].instance;
        if (!x.same_shape(source)) {
            throw std::invalid_argument("neighbor '" + source.id + "' has a different shape");
        }
        TimeSeriesInstance manipulated = x;
        for (int t = 0; t < x.steps; ++t) {
            for (int s : signal_indices) {
                manipulated.at(t, s) = source.at(t, s);
            }
        }
        batch.push_back(std::move(manipulated));
    }

    const std::vector<double> scores = winner_scores(oracle, batch, winner_class);
    result.entries.reserve(neighbors.size());
    for (std::size_t i = 0; i < neighbors.size(); ++i) {
        SwapResult::Entry entry;
        entry.train_index = neighbors[i].train_index;
        entry.neighbor_id = train[static_cast<std::size_t>(neighbors[i].train_index)].instance.id;
        entry.distance = neighbors[i].distance;
        entry.manipulated = std::move(batch[i]);
        entry.winner_score = scores[i];
        result.entries.push_back(std::move(entry));
        if (result.best < 0 || scores[i] < result.entries[static_cast<std::size_t>(result.best)]
                                               .winner_score) {
            result.best = static_cast<int>(i);
        }
    }
    return result;
}

SwapResult swap_signal(const TimeSeriesInstance& x, const std::vector<LabeledInstance>& train,
                       const std::vector<NeighborSample>& neighbors, int signal_index,
                       const PredictionOracle& oracle, int winner_class) {
    return swap_signals(x, train, neighbors, std::vector<int>{signal_index}, oracle, winner_class);
}

SalientSignalDetection detect_salient_signals(const TimeSeriesInstance& x,
                                              const std::vector<LabeledInstance>& train,
                                              const std::vector<NeighborSample>& neighbors,
                                              const PredictionOracle& oracle, int winner_class,
                                              double thr_c) {
    SalientSignalDetection detection;
    detection.per_signal.reserve(static_cast<std::size_t>(x.signals));
    for (int s = 0; s < x.signals; ++s) {
        detection.per_signal.push_back(
            swap_signal(x, train, neighbors, s, oracle, winner_class));
        if (detection.per_signal.back().best_score() <= thr_c) {
            detection.salient.push_back(s);
        }
    }
    return detection;
}

DualPairCandidates enumerate_dual_pairs(const std::vector<std::vector<int>>& signal_groups,
                                        int num_signals) {
    if (num_signals < 1) {
        throw std::invalid_argument("signal count must be positive");
    }
    DualPairCandidates candidates;
    std::vector<char> grouped(static_cast<std::size_t>(num_signals), 0);
    for (const std::vector<int>& group : signal_groups) {
        std::vector<int> members = group;
        std::sort(members.begin(), members.end());
        for (int s : members) {
            if (s < 0 || s >= num_signals) {
                throw std::invalid_argument("signal group member " + std::to_string(s) +
                                            " out of range");
            }
            grouped[static_cast<std::size_t>(s)] = 1;
        }
        for (std::size_t i = 0; i < members.size(); ++i) {
            for (std::size_t j = i + 1; j < members.size(); ++j) {
                candidates.within_groups.emplace_back(members[i], members[j]);
            }
        }
    }
    std::vector<int> loose;
    for (int s = 0; s < num_signals; ++s) {
        if (!grouped[static_cast<std::size_t>(s)]) {
            loose.push_back(s);
        }
    }
    for (std::size_t i = 0; i < loose.size(); ++i) {
        for (std::size_t j = i + 1; j < loose.size(); ++j) {
            candidates.non_correlated.emplace_back(loose[i], loose[j]);
        }
    }
    return candidates;
}

DualSignalDetection dual_signals(const TimeSeriesInstance& x,
                                 const std::vector<LabeledInstance>& train,
                                 const std::vector<NeighborSample>& neighbors,
                                 const PredictionOracle& oracle, int winner_class, double thr_c,
                                 const std::vector<std::vector<int>>& signal_groups) {
    const DualPairCandidates candidates = enumerate_dual_pairs(signal_groups, x.signals);
    if (candidates.within_groups.empty() && candidates.non_correlated.empty()) {
        throw std::runtime_error("dual swap impossible: no signal pairs available");
    }
    if (neighbors.empty()) {
        throw std::invalid_argument("dual swap requires at least one neighbor");
    }

    DualSignalDetection detection;
    auto try_phase = [&](const std::vector<std::pair<int, int>>& pairs) {
        for (const auto& [a, b] : pairs) {
            SwapResult swapped =
                swap_signals(x, train, neighbors, std::vector<int>{a, b}, oracle, winner_class);
            if (swapped.best_score() <= thr_c) {
                detection.salient_pairs.emplace_back(a, b);
                detection.per_pair.push_back(std::move(swapped));
            }
        }
    };
    try_phase(candidates.within_groups);
    if (detection.salient_pairs.empty()) {
        try_phase(candidates.non_correlated);
    }
    return detection;
}

SlideResult slide(const TimeSeriesInstance& x, const SwapResult& swap,
                  const PredictionOracle& oracle, int winner_class, double winner_score,
                  double thr_c, int ctx0, int ctx_max) {
    if (swap.best < 0 || static_cast<std::size_t>(swap.best) >= swap.entries.size()) {
        throw std::invalid_argument("slide requires a swap result with a best swapped instance");
    }
    if (ctx0 < 1) {
        throw std::invalid_argument("ctx0 must be at least 1");
    }
    // The best swapped instance already carries the neighbor's values on the
    // swap signals, so windowed replacements copy from it directly.
    const TimeSeriesInstance& source =
        swap.entries[static_cast<std::size_t>(swap.best)].manipulated;

    SlideResult result;
    for (int ctx = ctx0; ctx <= ctx_max; ++ctx) {
        result.ctx_reached = ctx;
        std::vector<TimeSeriesInstance> batch;
        batch.reserve(static_cast<std::size_t>(x.steps));
        for (int t_prime = 0; t_prime < x.steps; ++t_prime) {
            const int t_lo = std::max(0, t_prime - ctx);
            const int t_hi = std::min(x.steps - 1, t_prime + ctx);
            TimeSeriesInstance manipulated = x;
            for (int t = t_lo; t <= t_hi; ++t) {
                for (int s : swap.signal_indices) {
                    manipulated.at(t, s) = source.at(t, s);
                }
            }
            batch.push_back(std::move(manipulated));
        }
        const std::vector<double> scores = winner_scores(oracle, batch, winner_class);
        for (int t_prime = 0; t_prime < x.steps; ++t_prime) {
            const double score = scores[static_cast<std::size_t>(t_prime)];
            if (score <= thr_c) {
                SalientSubsequence sub;
                sub.signal_indices = swap.signal_indices;
                sub.t_current = t_prime;
                sub.t_lo = std::max(0, t_prime - ctx);
                sub.t_hi = std::min(x.steps - 1, t_prime + ctx);
                sub.window_size = sub.t_hi - sub.t_lo + 1;
                sub.score = score;
                sub.drop = winner_score - score;
                result.subsequences.push_back(std::move(sub));
            }
        }
        if (!result.subsequences.empty()) {
            break;  // smallest context wins
        }
    }
    return result;
}

ImportanceMatrix importance_scores(double winner_score,
                                   const std::vector<SalientSubsequence>& subsequences, int steps,
                                   int signals, double lambda, double alpha) {
    if (steps < 1 || signals < 1) {
        throw std::invalid_argument("importance matrix shape must be positive");
    }
    if (!(lambda >= 0.0)) {
        throw std::invalid_argument("lambda must be non-negative");
    }
    if (!(alpha >= 0.0 && alpha <= 1.0)) {
        throw std::invalid_argument("alpha must lie in [0, 1]");
    }

    ImportanceMatrix matrix(steps, signals);
    for (const SalientSubsequence& sub : subsequences) {
        if (!(0 <= sub.t_lo && sub.t_lo <= sub.t_current && sub.t_current <= sub.t_hi &&
              sub.t_hi < steps)) {
            throw std::invalid_argument("subsequence window out of range");
        }
        if (sub.window_size != sub.t_hi - sub.t_lo + 1) {
            throw std::invalid_argument("subsequence window_size is inconsistent with its bounds");
        }
        check_signal_indices(sub.signal_indices, signals);

        const double current =
            std::min(std::abs(winner_score - sub.score) +
                         lambda * std::exp(-static_cast<double>(sub.window_size) /
                                           static_cast<double>(steps)),
                     1.0);
        for (int t = sub.t_lo; t <= sub.t_hi; ++t) {
            const double value = (t == sub.t_current) ? current : alpha * current;
            for (int s : sub.signal_indices) {
                double& cell = matrix.at(t, s);
                cell = std::max(cell, value);
            }
        }
    }
    return matrix;
}

const char* to_string(ExplanationStatus status) {
    switch (status) {
        case ExplanationStatus::Explained:
            return "explained";
        case ExplanationStatus::NoSalientSignal:
            return "no_salient_signal";
        case ExplanationStatus::NoSalientSubsequence:
            return "no_salient_subsequence";
    }
    throw std::invalid_argument("unknown explanation status");
}

ExplanationStatus explanation_status_from_string(const std::string& text) {
    if (text == "explained") {
        return ExplanationStatus::Explained;
    }
    if (text == "no_salient_signal") {
        return ExplanationStatus::NoSalientSignal;
    }
    if (text == "no_salient_subsequence") {
        return ExplanationStatus::NoSalientSubsequence;
    }
    throw std::invalid_argument("unknown explanation status '" + text + "'");
}

namespace {

// Slides every detected swap result, fills subsequences/importance/provenance,
// and settles the final status.
void finish_explanation(Explanation& ex, const TimeSeriesInstance& x,
                        const std::vector<const SwapResult*>& detected,
                        const PredictionOracle& oracle, const SsetConfig& config) {
    const int ctx_max = config.ctx_max_for(x.steps);

    // Source swap result per collected subsequence, for provenance.
    std::vector<const SwapResult*> sources;
    int deepest_ctx = 0;
    for (const SwapResult* swapped : detected) {
        SlideResult slid = slide(x, *swapped, oracle, ex.winner_class, ex.winner_score,
                                 config.thr_c, config.ctx0, ctx_max);
        deepest_ctx = std::max(deepest_ctx, slid.ctx_reached);
        for (SalientSubsequence& sub : slid.subsequences) {
            ex.subsequences.push_back(std::move(sub));
            sources.push_back(swapped);
        }
    }
    ex.ctx_used = deepest_ctx;
    ex.importance = importance_scores(ex.winner_score, ex.subsequences, x.steps, x.signals,
                                      config.lambda, config.alpha);

    if (!ex.subsequences.empty()) {
        ex.status = ExplanationStatus::Explained;
        // Best manipulation = the maximum-drop subsequence, ties to the first
        // collected.
        std::size_t best = 0;
        for (std::size_t i = 1; i < ex.subsequences.size(); ++i) {
            if (ex.subsequences[i].drop > ex.subsequences[best].drop) {
                best = i;
            }
        }
        const SalientSubsequence& sub = ex.subsequences[best];
        const SwapResult& swapped = *sources[best];
        const SwapResult::Entry& entry = swapped.entries[static_cast<std::size_t>(swapped.best)];

        TimeSeriesInstance manipulated = x;
        for (int t = sub.t_lo; t <= sub.t_hi; ++t) {
            for (int s : sub.signal_indices) {
                manipulated.at(t, s) = entry.manipulated.at(t, s);
            }
        }
        ex.best_manipulation = BestManipulation{std::move(manipulated), sub.score, sub.drop};
        ex.chosen_neighbor = ChosenNeighbor{entry.neighbor_id, entry.distance};
    } else {
        // Signals (or pairs) were found but no window ever crossed the
        // threshold; keep the strongest swapping-stage source as provenance.
        ex.status = ExplanationStatus::NoSalientSubsequence;
        const SwapResult* strongest = nullptr;
        for (const SwapResult* swapped : detected) {
            if (!strongest || swapped->best_score() < strongest->best_score()) {
                strongest = swapped;
            }
        }
        if (strongest) {
            const SwapResult::Entry& entry =
                strongest->entries[static_cast<std::size_t>(strongest->best)];
            ex.chosen_neighbor = ChosenNeighbor{entry.neighbor_id, entry.distance};
        }
    }
}

}  // namespace

Explanation explain(const TimeSeriesInstance& x, const LabeledDataset& dataset,
                    const PredictionOracle& oracle, const SsetConfig& config, RandomSource& rng) {
    config.validate();
    const DatasetMeta& meta = dataset.meta;
    if (x.steps != meta.steps || x.signals != meta.signals) {
        throw std::invalid_argument("instance shape does not match the dataset");
    }
    if (oracle.num_classes() != meta.classes) {
        throw std::invalid_argument("oracle reports " + std::to_string(oracle.num_classes()) +
                                    " classes but the dataset declares " +
                                    std::to_string(meta.classes));
    }
    if (meta.classes < 2) {
        throw std::invalid_argument("explanation requires at least two classes");
    }

    Explanation ex;
    ex.instance_id = x.id;
    ex.signal_names = meta.signal_names;
    ex.importance = ImportanceMatrix(x.steps, x.signals);

    const auto [winner, winner_score] = predict_winner(oracle, x);
    ex.winner_class = winner;
    ex.winner_score = winner_score;

    std::set<int> target_classes;
    for (int cls = 0; cls < meta.classes; ++cls) {
        if (cls != winner) {
            target_classes.insert(cls);
        }
    }

    const std::vector<NeighborhoodScope> scopes = neighborhood_scopes(config);

    // Every distinct neighbor seen across the whole search, in first-seen
    // order; the dual-signal fallback draws from this pool instead of
    // re-sampling.
    std::vector<NeighborSample> pool;
    std::vector<char> pooled(dataset.train.size(), 0);

    int attempts = 0;
    for (const NeighborhoodScope& scope : scopes) {
        for (int attempt = 0; attempt < config.thr_a; ++attempt) {
            ++attempts;
            const std::vector<NeighborSample> neighbors =
                sample_neighbors(x, dataset.train, target_classes, scope.lo, scope.hi,
                                 config.n_neighbors, rng);
            for (const NeighborSample& nb : neighbors) {
                if (!pooled[static_cast<std::size_t>(nb.train_index)]) {
                    pooled[static_cast<std::size_t>(nb.train_index)] = 1;
                    pool.push_back(nb);
                }
            }
            if (neighbors.empty()) {
                continue;
            }
            const SalientSignalDetection detection = detect_salient_signals(
                x, dataset.train, neighbors, oracle, winner, config.thr_c);
            if (detection.salient.empty()) {
                continue;
            }
            ex.salient_signals = detection.salient;
            ex.attempts_used = attempts;
            ex.scope_used = scope;
            std::vector<const SwapResult*> detected;
            for (int s : detection.salient) {
                detected.push_back(&detection.per_signal[static_cast<std::size_t>(s)]);
            }
            finish_explanation(ex, x, detected, oracle, config);
            return ex;
        }
    }

    // Single-signal search exhausted: dual-signal fallback over the pool.
    ex.attempts_used = attempts;
    ex.scope_used = {scopes.front().lo, scopes.back().hi};
    if (pool.empty() || x.signals < 2) {
        ex.status = ExplanationStatus::NoSalientSignal;
        return ex;
    }
    const DualPairCandidates candidates =
        enumerate_dual_pairs(meta.signal_groups, x.signals);
    if (candidates.within_groups.empty() && candidates.non_correlated.empty()) {
        ex.status = ExplanationStatus::NoSalientSignal;
        return ex;
    }
    const DualSignalDetection detection = dual_signals(x, dataset.train, pool, oracle, winner,
                                                       config.thr_c, meta.signal_groups);
    if (detection.salient_pairs.empty()) {
        ex.status = ExplanationStatus::NoSalientSignal;
        return ex;
    }
    ex.salient_pairs = detection.salient_pairs;
    std::vector<const SwapResult*> detected;
    detected.reserve(detection.per_pair.size());
    for (const SwapResult& swapped : detection.per_pair) {
        detected.push_back(&swapped);
    }
    finish_explanation(ex, x, detected, oracle, config);
    return ex;
}

}  // namespace sset
