#include "catch_amalgamated.hpp"

#include "hcsec/metrics.hpp"
#include "oracles.hpp"

using namespace hcsec;

namespace {

Clustering labels(std::vector<int> raw) { return Clustering::from_labels(raw); }

}  // namespace

TEST_CASE("hard dc counts disagreeing pairs") {
    Rng rng{12};
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + rng.below(40);
        const auto a = Clustering::from_labels(oracle::random_labels(rng, n, 1 + rng.below(6)));
        const auto b = Clustering::from_labels(oracle::random_labels(rng, n, 1 + rng.below(6)));
        REQUIRE(dc_squared(a, b) == oracle::disagreeing_pairs(a.labels(), b.labels()));
    }
}

TEST_CASE("soft dc matches the explicit co-association matrices") {
    Rng rng{13};
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(25);
        const auto y = oracle::random_soft(rng, n, 1 + rng.below(5));
        const auto yp = oracle::random_soft(rng, n, 1 + rng.below(5));
        const double expect = oracle::coassociation_distance_sq(y, yp);
        REQUIRE(dc_squared(y, yp) == Catch::Approx(expect).margin(1e-9));
    }
}

TEST_CASE("hard and one-hot dc agree") {
    Rng rng{14};
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t n = 1 + rng.below(30);
        const auto a = Clustering::from_labels(oracle::random_labels(rng, n, 4));
        const auto b = Clustering::from_labels(oracle::random_labels(rng, n, 3));
        REQUIRE(dc(indicator(a), indicator(b)) == Catch::Approx(dc(a, b)).margin(1e-12));
    }
}

TEST_CASE("three-point worked example") {
    // {a,b|c} against {a|b,c}
    CHECK(dc(labels({0, 0, 1}), labels({0, 1, 1})) == 2.0);
    CHECK(dc_squared(labels({0, 0, 1}), labels({0, 1, 1})) == 4);
}

TEST_CASE("dc is symmetric, relabeling invariant and zero on itself") {
    Rng rng{15};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(30);
        const auto raw = oracle::random_labels(rng, n, 5);
        const auto a = Clustering::from_labels(raw);
        const auto b = Clustering::from_labels(oracle::random_labels(rng, n, 5));
        std::vector<std::size_t> shifted(raw);
        for (auto& l : shifted) {
            l = 17 - l;
        }
        REQUIRE(dc(a, b) == dc(b, a));
        REQUIRE(dc(a, a) == 0.0);
        REQUIRE(dc(Clustering::from_labels(shifted), b) == dc(a, b));
    }
}

TEST_CASE("dc triangle inequality") {
    Rng rng{16};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + rng.below(20);
        const auto a = oracle::random_soft(rng, n, 3);
        const auto b = oracle::random_soft(rng, n, 4);
        const auto c = oracle::random_soft(rng, n, 2);
        REQUIRE(dc(a, c) <= dc(a, b) + dc(b, c) + 1e-9);
    }
}

TEST_CASE("dc rejects mismatched sizes") {
    CHECK_THROWS_AS(dc(labels({0, 1}), labels({0, 1, 1})), invalid_argument);
    CHECK_THROWS_AS(dc(indicator(labels({0, 1})), indicator(labels({0}))), invalid_argument);
}

TEST_CASE("indicator matrices") {
    const auto y = indicator(labels({0, 1, 0}));
    CHECK(y.is_hard());
    CHECK(y.argmax() == std::vector<std::size_t>{0, 1, 0});
    CHECK(indicator(labels({0, 0})).cols() == 1);
    CHECK_THROWS_AS(IndicatorMatrix{Matrix::from_rows({{0.5, 0.6}})}, invalid_argument);
    CHECK_THROWS_AS(IndicatorMatrix{Matrix::from_rows({{-0.1, 1.1}})}, invalid_argument);
    const IndicatorMatrix soft{Matrix::from_rows({{0.25, 0.75}})};
    CHECK_FALSE(soft.is_hard());
    CHECK(soft.argmax() == std::vector<std::size_t>{1});
}

TEST_CASE("projection keeps the induced partition") {
    const auto p = project(labels({0, 1, 2}), IndexSet{{0, 2}});
    CHECK(p.k() == 2);
    CHECK(p.labels() == std::vector<std::size_t>{0, 1});
    const auto q = project(labels({0, 1, 0, 2}), IndexSet{{0, 2, 3}});
    CHECK(q.labels() == std::vector<std::size_t>{0, 0, 1});
    CHECK_THROWS_AS(project(labels({0, 1}), IndexSet{}), invalid_argument);
    CHECK_THROWS_AS(project(labels({0, 1}), IndexSet{{0, 2}}), invalid_argument);
}

TEST_CASE("split and merge") {
    SECTION("identical clusterings") {
        const auto s = split_merge(labels({0, 0, 1, 1}), labels({0, 0, 1, 1}));
        CHECK(s.split == 1.0);
        CHECK(s.merge == 1.0);
    }
    SECTION("each cluster split in two") {
        const auto s = split_merge(labels({0, 0, 1, 1}), labels({0, 1, 2, 3}));
        CHECK(s.split == 2.0);
        CHECK(s.merge == 1.0);
    }
    SECTION("everything merged") {
        const auto s = split_merge(labels({0, 1, 2}), labels({0, 0, 0}));
        CHECK(s.split == 1.0);
        CHECK(s.merge == 3.0);
    }
    CHECK_THROWS_AS(split_merge(labels({0}), labels({0, 0})), invalid_argument);
}

TEST_CASE("split and merge are at least one") {
    Rng rng{18};
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 1 + rng.below(30);
        const auto s = split_merge(Clustering::from_labels(oracle::random_labels(rng, n, 4)),
                                   Clustering::from_labels(oracle::random_labels(rng, n, 6)));
        REQUIRE(s.split >= 1.0);
        REQUIRE(s.merge >= 1.0);
    }
}
