#include "sset/occlusion.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace sset {

void OcclusionConfig::validate(int steps) const {
    if (window_size < 1 || window_size % 2 == 0) {
        throw std::invalid_argument("occlusion window_size must be odd and positive");
    }
    if (window_size > steps) {
        throw std::invalid_argument("occlusion window_size " + std::to_string(window_size) +
                                    " exceeds the series length " + std::to_string(steps));
    }
}

OcclusionResult occlusion_explain(const TimeSeriesInstance& x, const PredictionOracle& oracle,
                                  int winner_class, const std::vector<LabeledInstance>& train,
                                  const OcclusionConfig& config) {
    config.validate(x.steps);
    const int classes = oracle.num_classes();
    if (winner_class < 0 || winner_class >= classes) {
        throw std::invalid_argument("winner class out of range");
    }

    // Replacement values, one per cell.
    std::vector<double> fill(static_cast<std::size_t>(x.steps) * static_cast<std::size_t>(x.signals),
                             0.0);
    if (config.replacement == OcclusionConfig::Replacement::TrainMean) {
        if (train.empty()) {
            throw std::invalid_argument("train-mean occlusion requires training instances");
        }
        for (const LabeledInstance& item : train) {
            if (!x.same_shape(item.instance)) {
                throw std::invalid_argument("training instance '" + item.instance.id +
                                            "' has a different shape");
            }
            for (std::size_t i = 0; i < fill.size(); ++i) {
                fill[i] += item.instance.values[i];
            }
        }
        for (double& v : fill) {
            v /= static_cast<double>(train.size());
        }
    }

    std::vector<double> base = oracle.predict(x);
    validate_probability_vector(base, classes);
    const double y_i_c = base[static_cast<std::size_t>(winner_class)];

    const int half = (config.window_size - 1) / 2;
    std::vector<TimeSeriesInstance> batch;
    batch.reserve(static_cast<std::size_t>(x.steps) * static_cast<std::size_t>(x.signals));
    for (int t_prime = 0; t_prime < x.steps; ++t_prime) {
        const int t_lo = std::max(0, t_prime - half);
        const int t_hi = std::min(x.steps - 1, t_prime + half);
        for (int s = 0; s < x.signals; ++s) {
            TimeSeriesInstance manipulated = x;
            for (int t = t_lo; t <= t_hi; ++t) {
                manipulated.at(t, s) =
                    fill[static_cast<std::size_t>(t) * static_cast<std::size_t>(x.signals) +
                         static_cast<std::size_t>(s)];
            }
            batch.push_back(std::move(manipulated));
        }
    }

    const std::vector<std::vector<double>> probs = oracle.predict_batch(batch);

    OcclusionResult result;
    result.importance = ImportanceMatrix(x.steps, x.signals);
    double best_score = 0.0;
    int best_index = -1;
    for (int t_prime = 0; t_prime < x.steps; ++t_prime) {
        for (int s = 0; s < x.signals; ++s) {
            const std::size_t i = static_cast<std::size_t>(t_prime) *
                                      static_cast<std::size_t>(x.signals) +
                                  static_cast<std::size_t>(s);
            validate_probability_vector(probs[i], classes);
            const double score = probs[i][static_cast<std::size_t>(winner_class)];
            result.importance.at(t_prime, s) =
                std::min(std::max(0.0, y_i_c - score), 1.0);
            if (best_index < 0 || score < best_score) {
                best_score = score;
                best_index = static_cast<int>(i);
            }
        }
    }

    result.best_manipulated = std::move(batch[static_cast<std::size_t>(best_index)]);
    result.best_score = best_score;
    result.best_drop = y_i_c - best_score;
    result.best_step = best_index / x.signals;
    result.best_signal = best_index % x.signals;
    return result;
}

}  // namespace sset
