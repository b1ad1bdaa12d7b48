#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "helpers.hpp"
#include "numq/dataset.hpp"

using namespace numq;
using numq::testing::make_dataset;
using numq::testing::make_series;

TEST_CASE("expected_grid_timestamps covers the inclusive range") {
    CHECK(expected_grid_timestamps({0, 4000, 1000}) ==
          std::vector<Instant>{0, 1000, 2000, 3000, 4000});
    CHECK(expected_grid_timestamps({0, 0, 1000}) == std::vector<Instant>{0});
    // floor semantics: 2500 is not a slot
    CHECK(expected_grid_timestamps({0, 2500, 1000}) == std::vector<Instant>{0, 1000, 2000});
}

TEST_CASE("expected grid length formula holds for random shapes") {
    std::mt19937_64 rng(11);
    std::uniform_int_distribution<Instant> start_pick(-1'000'000, 1'000'000);
    std::uniform_int_distribution<Millis> span_pick(0, 500'000);
    std::uniform_int_distribution<Millis> interval_pick(1, 10'000);
    for (int i = 0; i < 1000; ++i) {
        ExpectedGrid g;
        g.start = start_pick(rng);
        g.end = g.start + span_pick(rng);
        g.interval = interval_pick(rng);
        const auto ts = expected_grid_timestamps(g);
        REQUIRE(ts.size() == static_cast<std::size_t>((g.end - g.start) / g.interval) + 1);
        CHECK(ts.front() == g.start);
        CHECK(ts.back() <= g.end);
        CHECK(ts.back() + g.interval > g.end);
    }
}

TEST_CASE("grid validation rejects degenerate shapes") {
    CHECK_THROWS_AS(expected_grid_timestamps({10, 0, 1000}), ConfigError);
    CHECK_THROWS_AS(expected_grid_timestamps({0, 10, 0}), ConfigError);
}

TEST_CASE("slot_of finds exact grid slots only") {
    ExpectedGrid g{1000, 9000, 2000};
    CHECK(g.slot_of(1000) == 0);
    CHECK(g.slot_of(3000) == 1);
    CHECK(g.slot_of(9000) == 4);
    CHECK_FALSE(g.slot_of(2000));  // between slots
    CHECK_FALSE(g.slot_of(0));     // before start
    CHECK_FALSE(g.slot_of(11000)); // past end
}

TEST_CASE("validate_dataset accepts a well-formed dataset") {
    const auto d = make_dataset({make_series("a", {1, 2, 3}), make_series("b", {4, 5})});
    CHECK(validate_dataset(d).empty());
}

TEST_CASE("validate_dataset reports each invariant breach with location") {
    SECTION("zero series") {
        Dataset d;
        d.dataset_id = "empty";
        const auto v = validate_dataset(d);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == ViolationKind::EmptyDataset);
    }
    SECTION("NaN value names parameter and timestamp") {
        auto d = make_dataset({make_series("a", {1, 2, 3})});
        d.series[0].points[1].value = std::numeric_limits<double>::quiet_NaN();
        const auto v = validate_dataset(d);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == ViolationKind::NonFiniteValue);
        CHECK(v[0].parameter_id == "a");
        CHECK(v[0].timestamp == 1000);
    }
    SECTION("infinite value") {
        auto d = make_dataset({make_series("a", {1, 2})});
        d.series[0].points[0].value = std::numeric_limits<double>::infinity();
        REQUIRE(validate_dataset(d).size() == 1);
    }
    SECTION("unordered timestamps") {
        auto d = make_dataset({make_series("a", {1, 2, 3})});
        d.series[0].points[2].timestamp = d.series[0].points[0].timestamp;
        const auto v = validate_dataset(d);
        REQUIRE(v.size() == 1);
        CHECK(v[0].kind == ViolationKind::UnorderedTimestamps);
    }
    SECTION("empty series") {
        auto d = make_dataset({make_series("a", {1})});
        d.series.push_back(Series{"b", "", {}});
        REQUIRE(validate_dataset(d).size() == 1);
        CHECK(validate_dataset(d)[0].kind == ViolationKind::EmptySeries);
    }
    SECTION("duplicate parameter id") {
        auto d = make_dataset({make_series("a", {1}), make_series("a", {2})});
        bool found = false;
        for (const auto& v : validate_dataset(d))
            if (v.kind == ViolationKind::DuplicateParameter) found = true;
        CHECK(found);
    }
    SECTION("arrival before generation, beyond the skew allowance") {
        auto d = make_dataset({make_series("a", {1})});
        d.series[0].points[0].arrival_timestamp = d.series[0].points[0].timestamp - 100;
        CHECK(validate_dataset(d, 0).size() == 1);
        CHECK(validate_dataset(d, 100).empty());  // within allowance
    }
}

TEST_CASE("series lookup is exact") {
    const auto s = make_series("a", {1, 2, 3}, 0, 500);
    REQUIRE(s.find(500) != nullptr);
    CHECK(*s.find(500)->value == 2);
    CHECK(s.find(501) == nullptr);
}
