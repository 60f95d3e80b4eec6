#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <charconv>
#include <cmath>
#include <random>
#include <set>
#include <vector>

#include "sset/core.hpp"
#include "support.hpp"

using sset::euclidean_distance;
using sset::format_double;
using sset::pearson_correlation;
using sset::RandomSource;
using sset::TimeSeriesInstance;
using testsupport::make_instance;
using testsupport::random_instance;
using testsupport::ScratchDir;

namespace {

// Direct-formula oracle, written independently of the library implementation:
// covariance and variances accumulated in one pass from explicit means.
double pearson_oracle(const std::vector<double>& xs, const std::vector<double>& ys) {
    const double n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
        syy += (ys[i] - my) * (ys[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

}  // namespace

TEST_CASE("euclidean distance of an instance to itself is zero") {
    std::mt19937_64 gen(1);
    const TimeSeriesInstance a = random_instance("a", 7, 3, gen);
    CHECK(euclidean_distance(a, a) == 0.0);
}

TEST_CASE("euclidean distance matches the 3-4-5 triangle") {
    const TimeSeriesInstance a = make_instance("a", 1, 2, {0.0, 0.0});
    const TimeSeriesInstance b = make_instance("b", 1, 2, {0.3, 0.4});
    CHECK(euclidean_distance(a, b) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("euclidean distance matches element-wise recomputation on random pairs") {
    std::mt19937_64 gen(2);
    for (int rep = 0; rep < 20; ++rep) {
        const TimeSeriesInstance a = random_instance("a", 30, 8, gen);
        const TimeSeriesInstance b = random_instance("b", 30, 8, gen);
        double acc = 0.0;
        for (std::size_t i = 0; i < a.values.size(); ++i) {
            const double d = a.values[i] - b.values[i];
            acc += d * d;
        }
        CHECK(euclidean_distance(a, b) == doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
        CHECK(euclidean_distance(a, b) == euclidean_distance(b, a));
    }
}

TEST_CASE("euclidean distance satisfies the triangle inequality on random triples") {
    std::mt19937_64 gen(3);
    for (int rep = 0; rep < 50; ++rep) {
        const TimeSeriesInstance a = random_instance("a", 6, 2, gen);
        const TimeSeriesInstance b = random_instance("b", 6, 2, gen);
        const TimeSeriesInstance c = random_instance("c", 6, 2, gen);
        CHECK(euclidean_distance(a, c) <=
              euclidean_distance(a, b) + euclidean_distance(b, c) + 1e-12);
    }
}

TEST_CASE("euclidean distance rejects shape mismatch") {
    const TimeSeriesInstance a("a", 2, 2);
    const TimeSeriesInstance b("b", 2, 3);
    CHECK_THROWS_AS(euclidean_distance(a, b), std::invalid_argument);
}

TEST_CASE("pearson correlation hits the exact poles") {
    CHECK(pearson_correlation({1, 2, 3}, {1, 2, 3}) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(pearson_correlation({1, 2, 3}, {3, 2, 1}) == doctest::Approx(-1.0).epsilon(1e-12));
}

TEST_CASE("pearson correlation matches a direct-formula oracle on random vectors") {
    std::mt19937_64 gen(4);
    std::uniform_real_distribution<double> unit(-5.0, 5.0);
    for (int rep = 0; rep < 100; ++rep) {
        std::vector<double> xs(50), ys(50);
        for (std::size_t i = 0; i < xs.size(); ++i) {
            xs[i] = unit(gen);
            ys[i] = unit(gen);
        }
        const double got = pearson_correlation(xs, ys);
        CHECK(got == doctest::Approx(pearson_oracle(xs, ys)).epsilon(1e-9));
        CHECK(got >= -1.0);
        CHECK(got <= 1.0);
    }
}

TEST_CASE("pearson correlation rejects degenerate input") {
    CHECK_THROWS_WITH_AS(pearson_correlation({1, 1, 1}, {1, 2, 3}),
                         doctest::Contains("undefined correlation"), std::invalid_argument);
    CHECK_THROWS_AS(pearson_correlation({1, 2}, {1, 2, 3}), std::invalid_argument);
    CHECK_THROWS_AS(pearson_correlation({1}, {2}), std::invalid_argument);
}

TEST_CASE("random source reproduces the same sequence for the same seed") {
    RandomSource a(99), b(99);
    for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("random source children are stable and distinct") {
    const RandomSource parent(7);
    RandomSource c0 = parent.derive_child(0);
    RandomSource c0_again = parent.derive_child(0);
    RandomSource c1 = parent.derive_child(1);
    CHECK(c0.next_u64() == c0_again.next_u64());
    CHECK(RandomSource(7).derive_child(0).next_u64() != c1.next_u64());
}

TEST_CASE("next_below stays in range and covers small supports") {
    RandomSource rng(5);
    std::set<uint64_t> seen;
    for (int i = 0; i < 200; ++i) {
        const uint64_t v = rng.next_below(7);
        CHECK(v < 7);
        seen.insert(v);
    }
    CHECK(seen.size() == 7);
}

TEST_CASE("next_unit lies in [0,1) and next_gaussian is finite") {
    RandomSource rng(6);
    for (int i = 0; i < 200; ++i) {
        const double u = rng.next_unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
        CHECK(std::isfinite(rng.next_gaussian()));
    }
}

TEST_CASE("format_double round-trips the exact bit pattern") {
    std::mt19937_64 gen(8);
    std::uniform_real_distribution<double> wide(-1e6, 1e6);
    std::vector<double> samples = {0.0, 1.0, 0.1, 1.0 / 3.0, 1e-300, 1e300};
    for (int i = 0; i < 200; ++i) samples.push_back(wide(gen));
    for (double v : samples) {
        const std::string text = format_double(v);
        double back = 0.0;
        const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), back);
        REQUIRE(ec == std::errc());
        REQUIRE(ptr == text.data() + text.size());
        CHECK(back == v);
    }
}

TEST_CASE("dataset save/load round-trips bit-identically") {
    ScratchDir dir("core_roundtrip");
    std::mt19937_64 gen(9);

    sset::LabeledDataset ds;
    ds.meta = testsupport::make_meta(4, 2, 2);
    for (int i = 0; i < 3; ++i) {
        ds.train.push_back({random_instance("train_" + std::to_string(i), 4, 2, gen), i % 2});
    }
    ds.test.push_back({random_instance("test_0", 4, 2, gen), 1});

    sset::save_dataset(ds, dir.path());
    const sset::LabeledDataset back = sset::load_dataset(dir.path());

    REQUIRE(back.meta.steps == 4);
    REQUIRE(back.meta.signals == 2);
    REQUIRE(back.meta.classes == 2);
    CHECK(back.meta.signal_names == ds.meta.signal_names);
    CHECK(back.meta.class_names == ds.meta.class_names);
    REQUIRE(back.train.size() == ds.train.size());
    REQUIRE(back.test.size() == ds.test.size());
    for (std::size_t i = 0; i < ds.train.size(); ++i) {
        CHECK(back.train[i].instance.id == ds.train[i].instance.id);
        CHECK(back.train[i].label == ds.train[i].label);
        CHECK(back.train[i].instance.values == ds.train[i].instance.values);
    }
    CHECK(back.test[0].instance.values == ds.test[0].instance.values);

    const sset::LabeledInstance* hit = back.find_test("test_0");
    REQUIRE(hit != nullptr);
    CHECK(hit->label == 1);
    CHECK(back.find_train("nope") == nullptr);
}

TEST_CASE("dataset loading reports missing files and bad values") {
    ScratchDir dir("core_badload");
    CHECK_THROWS(sset::load_dataset(dir.path() / "does_not_exist"));

    std::mt19937_64 gen(10);
    sset::LabeledDataset ds;
    ds.meta = testsupport::make_meta(2, 1, 2);
    ds.train.push_back({random_instance("train_0", 2, 1, gen), 0});
    ds.train.push_back({random_instance("train_1", 2, 1, gen), 1});
    ds.train[0].instance.values[0] = 1.5;  // out of [0,1]
    CHECK_THROWS_WITH_AS(
        [&] {
            sset::save_dataset(ds, dir.path());
            return sset::load_dataset(dir.path());
        }(),
        doctest::Contains("range"), std::runtime_error);
}
