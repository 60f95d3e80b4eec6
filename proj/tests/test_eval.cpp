#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "sset/blackbox.hpp"
#include "sset/core.hpp"
#include "sset/eval.hpp"
#include "sset/explain.hpp"
#include "support.hpp"

using sset::Explanation;
using sset::ExplanationStatus;
using sset::ImportanceMatrix;
using sset::LabeledDataset;
using sset::PlantedSaliency;
using sset::QualityRow;
using sset::SyntheticSpec;
using sset::TimeSeriesInstance;
using testsupport::make_instance;

namespace {

SyntheticSpec small_spec() {
    SyntheticSpec spec;
    spec.steps = 12;
    spec.signals = 3;
    spec.classes = 2;
    spec.planted = {{0, 3, 6, 0.3}, {1, 3, 6, 0.3}};
    spec.noise_sigma = 0.05;
    spec.n_train = 10;
    spec.n_test = 4;
    spec.seed = 7;
    return spec;
}

Explanation explained_fixture(const std::string& id, int steps, int signals, int window_lo,
                              int window_hi, double neighbor_distance) {
    Explanation ex;
    ex.instance_id = id;
    ex.status = ExplanationStatus::Explained;
    ex.winner_class = 0;
    ex.winner_score = 0.9;
    ex.salient_signals = {0};
    ex.subsequences = {{{0}, window_lo, window_lo, window_hi, window_hi - window_lo + 1, 0.2, 0.7}};
    ex.importance = ImportanceMatrix(steps, signals);
    for (int t = window_lo; t <= window_hi; ++t) ex.importance.at(t, 0) = 0.5;
    ex.chosen_neighbor = sset::ChosenNeighbor{"train_0", neighbor_distance};
    sset::BestManipulation best;
    best.values = TimeSeriesInstance(id + "_m", steps, signals);
    best.score = 0.2;
    best.drop = 0.7;
    ex.best_manipulation = best;
    ex.ctx_used = 1;
    ex.attempts_used = 1;
    ex.scope_used = {0.0, 1.0};
    return ex;
}

}  // namespace

TEST_CASE("synthetic spec validation catches inconsistent plants") {
    CHECK_NOTHROW(small_spec().validate());
    auto broken = [](auto mutate) {
        SyntheticSpec spec = small_spec();
        mutate(spec);
        CHECK_THROWS_AS(spec.validate(), std::invalid_argument);
    };
    broken([](SyntheticSpec& s) { s.planted.pop_back(); });               // one per class
    broken([](SyntheticSpec& s) { s.planted[0].t_hi = 2; });              // b < a
    broken([](SyntheticSpec& s) { s.planted[0].t_hi = 12; });             // beyond T-1
    broken([](SyntheticSpec& s) { s.planted[0].signal = 3; });            // signal out of range
    broken([](SyntheticSpec& s) { s.planted[1] = s.planted[0]; });        // duplicate plant
    broken([](SyntheticSpec& s) { s.planted[0].amplitude = std::nan(""); });
    broken([](SyntheticSpec& s) { s.noise_sigma = -0.1; });
    broken([](SyntheticSpec& s) { s.n_train = 0; });
}

TEST_CASE("generation is deterministic and respects shapes, ids, and labels") {
    const SyntheticSpec spec = small_spec();
    const LabeledDataset a = sset::generate_synthetic(spec);
    const LabeledDataset b = sset::generate_synthetic(spec);

    REQUIRE(a.train.size() == 10);
    REQUIRE(a.test.size() == 4);
    CHECK(a.meta.steps == 12);
    CHECK(a.meta.signals == 3);
    CHECK(a.meta.classes == 2);
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].instance.id == "train_" + std::to_string(i));
        CHECK(a.train[i].label == static_cast<int>(i) % 2);  // round-robin labels
        CHECK(a.train[i].instance.values == b.train[i].instance.values);
        for (double v : a.train[i].instance.values) {
            CHECK(v >= 0.0);
            CHECK(v <= 1.0);
        }
    }
    CHECK(a.test[0].instance.id == "test_0");
    CHECK(a.test[2].instance.values == b.test[2].instance.values);

    SyntheticSpec other = spec;
    other.seed = 8;
    const LabeledDataset c = sset::generate_synthetic(other);
    CHECK(a.train[0].instance.values != c.train[0].instance.values);
}

TEST_CASE("with zero noise the plant is the only difference between classes") {
    SyntheticSpec spec = small_spec();
    spec.noise_sigma = 0.0;
    const LabeledDataset ds = sset::generate_synthetic(spec);

    const TimeSeriesInstance& c0 = ds.train[0].instance;  // label 0, plant on signal 0
    const TimeSeriesInstance& c1 = ds.train[1].instance;  // label 1, plant on signal 1
    for (int t = 0; t < spec.steps; ++t) {
        for (int s = 0; s < spec.signals; ++s) {
            const bool in0 = s == 0 && t >= 3 && t <= 6;
            const bool in1 = s == 1 && t >= 3 && t <= 6;
            if (in0) {
                CHECK(c0.at(t, s) == doctest::Approx(c1.at(t, s) + 0.3).epsilon(1e-12));
            } else if (in1) {
                CHECK(c1.at(t, s) == doctest::Approx(c0.at(t, s) + 0.3).epsilon(1e-12));
            } else {
                CHECK(c0.at(t, s) == c1.at(t, s));  // identical baseline
            }
        }
    }

    spec.planted[0].amplitude = 0.0;
    spec.planted[1].amplitude = 0.0;
    // Distinctness comes from the signal index; zero amplitude makes all
    // instances identical.
    const LabeledDataset flat = sset::generate_synthetic(spec);
    CHECK(flat.train[0].instance.values == flat.train[5].instance.values);
    CHECK(flat.train[0].instance.values == flat.test[3].instance.values);
}

TEST_CASE("a centroid classifier separates clearly planted classes") {
    SyntheticSpec spec = small_spec();
    spec.n_train = 40;
    spec.n_test = 20;
    const LabeledDataset ds = sset::generate_synthetic(spec);
    const auto oracle = sset::fit_centroid_classifier(ds.train, 2, sset::kDefaultCentroidTemperature);
    int correct = 0;
    for (const auto& item : ds.test) {
        if (sset::predict_winner(oracle, item.instance).first == item.label) ++correct;
    }
    CHECK(correct >= 19);  // >= 95%
}

TEST_CASE("precision is the clipped score drop") {
    CHECK(sset::precision_metric(0.9, 0.1) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(sset::precision_metric(0.9, 0.9) == 0.0);
    CHECK(sset::precision_metric(0.3, 0.9) == 0.0);  // negative drops clip to zero
    CHECK_THROWS_AS(sset::precision_metric(1.5, 0.2), std::invalid_argument);
}

TEST_CASE("informativeness counts time steps with any nonzero cell") {
    ImportanceMatrix imp(6, 2);
    CHECK(sset::informativeness_metric(imp) == 0);
    imp.at(1, 0) = 0.4;
    imp.at(1, 1) = 0.2;  // same step, still one
    imp.at(4, 1) = 0.1;
    CHECK(sset::informativeness_metric(imp) == 2);
}

TEST_CASE("similarity is the plain euclidean distance") {
    const TimeSeriesInstance a = make_instance("a", 1, 2, {0.0, 0.0});
    const TimeSeriesInstance b = make_instance("b", 1, 2, {0.3, 0.4});
    CHECK(sset::similarity_metric(a, a) == 0.0);
    CHECK(sset::similarity_metric(a, b) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("quality rows demand a matching instance and carry per-row metrics") {
    const Explanation ex = explained_fixture("test_0", 12, 3, 3, 6, 1.25);
    const TimeSeriesInstance x("test_0", 12, 3);

    const QualityRow row = sset::quality_row(ex, x);
    CHECK(row.instance_id == "test_0");
    CHECK(row.has_metrics);
    CHECK(row.precision == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(row.informativeness == 4.0);  // steps 3..6
    CHECK(row.window_size == 4.0);
    CHECK(row.neighbor_distance == 1.25);

    const TimeSeriesInstance wrong("other", 12, 3);
    CHECK_THROWS_AS(sset::quality_row(ex, wrong), std::invalid_argument);
}

TEST_CASE("aggregation averages explained rows and reports the pessimistic precision") {
    const TimeSeriesInstance x0("a", 12, 3), x1("b", 12, 3), x2("c", 12, 3);
    Explanation e0 = explained_fixture("a", 12, 3, 3, 6, 1.0);
    Explanation e1 = explained_fixture("b", 12, 3, 2, 7, 2.0);
    e1.best_manipulation->score = 0.5;
    e1.best_manipulation->drop = 0.4;
    Explanation e2;  // a failure
    e2.instance_id = "c";
    e2.status = ExplanationStatus::NoSalientSignal;
    e2.importance = ImportanceMatrix(12, 3);

    const std::vector<QualityRow> rows = {sset::quality_row(e0, x0), sset::quality_row(e1, x1),
                                          sset::quality_row(e2, x2)};
    const auto report = sset::aggregate_quality(rows);

    CHECK(report.n_explained == 2);
    CHECK(report.n_failed == 1);
    CHECK(report.precision == doctest::Approx((0.7 + 0.4) / 2).epsilon(1e-12));
    CHECK(report.precision_pessimistic == doctest::Approx((0.7 + 0.4) / 3).epsilon(1e-12));
    CHECK(report.informativeness == doctest::Approx((4.0 + 6.0) / 2).epsilon(1e-12));
    CHECK(report.rows.size() == 3);
}

TEST_CASE("the salient-signal histogram counts pair members once per instance") {
    Explanation single = explained_fixture("a", 12, 3, 3, 6, 1.0);
    Explanation dual;
    dual.instance_id = "b";
    dual.status = ExplanationStatus::Explained;
    dual.salient_pairs = {{0, 2}, {0, 1}};  // signal 0 appears twice, counts once
    dual.importance = ImportanceMatrix(12, 3);

    CHECK(sset::salient_signal_histogram({}, 3) == std::vector<int>{0, 0, 0});
    CHECK(sset::salient_signal_histogram({single}, 3) == std::vector<int>{1, 0, 0});
    CHECK(sset::salient_signal_histogram({single, dual}, 3) == std::vector<int>{2, 1, 1});
}

TEST_CASE("the window distribution keeps each instance's smallest window") {
    Explanation two_windows = explained_fixture("a", 12, 3, 3, 6, 1.0);
    two_windows.subsequences.push_back({{0}, 8, 8, 9, 2, 0.3, 0.6});  // minimum is 2
    const Explanation other = explained_fixture("b", 12, 3, 2, 7, 2.0);

    const auto dist = sset::window_size_distribution({two_windows, other});
    CHECK(dist.count == 2);
    CHECK(dist.histogram.at(2) == 1);
    CHECK(dist.histogram.at(6) == 1);
    CHECK(dist.mean == doctest::Approx(4.0).epsilon(1e-12));

    const auto empty = sset::window_size_distribution({});
    CHECK(empty.count == 0);
    CHECK(empty.histogram.empty());
}

TEST_CASE("the distance-window correlation runs pearson over explained instances") {
    // Windows grow linearly with distance: perfect correlation.
    std::vector<Explanation> exes;
    for (int i = 0; i < 4; ++i) {
        exes.push_back(explained_fixture("e" + std::to_string(i), 12, 3, 2, 2 + i, 1.0 + i));
    }
    CHECK(sset::distance_window_correlation(exes) == doctest::Approx(1.0).epsilon(1e-12));

    // Identical pairs have zero variance: undefined.
    const std::vector<Explanation> flat = {explained_fixture("a", 12, 3, 2, 4, 1.0),
                                           explained_fixture("b", 12, 3, 2, 4, 1.0)};
    CHECK_THROWS_WITH_AS(sset::distance_window_correlation(flat),
                         doctest::Contains("undefined correlation"), std::invalid_argument);
}
