#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "fixture.hpp"
#include "helpers.hpp"
#include "numq/inject.hpp"
#include "numq/io.hpp"

using namespace numq;
using numq::testing::make_dataset;
using numq::testing::make_series;

namespace {

AntipatternSpec spec_of(AntipatternKind kind, std::string parameter, nlohmann::json params,
                        std::uint64_t seed = 0) {
    AntipatternSpec s;
    s.kind = kind;
    s.parameter = std::move(parameter);
    s.seed = seed;
    s.params = std::move(params);
    return s;
}

}  // namespace

TEST_CASE("gap removes the named points and annotates them") {
    const auto d = make_dataset({make_series("a", {0, 1, 2, 3, 4, 5, 6, 7, 8, 9})});
    const auto r = inject_antipattern(d, spec_of(AntipatternKind::Gap, "a", {{"indices", {3, 7}}}));
    REQUIRE(r.dataset.series[0].points.size() == 8);
    CHECK(r.annotation["removed_indices"] == nlohmann::json({3, 7}));
    CHECK(r.annotation["removed_timestamps"] == nlohmann::json({3000, 7000}));
    CHECK(r.dataset.series[0].find(3000) == nullptr);
    CHECK(r.dataset.series[0].find(7000) == nullptr);
    // input untouched
    CHECK(d.series[0].points.size() == 10);
}

TEST_CASE("gap spanning the whole series is rejected") {
    const auto d = make_dataset({make_series("a", {1, 2})});
    CHECK_THROWS_AS(
        inject_antipattern(d, spec_of(AntipatternKind::Gap, "a", {{"indices", {0, 1}}})),
        ConfigError);
}

TEST_CASE("unknown parameter is rejected") {
    const auto d = make_dataset({make_series("a", {1, 2})});
    CHECK_THROWS_AS(inject_antipattern(d, spec_of(AntipatternKind::Gap, "zzz", {{"indices", {0}}})),
                    DataError);
}

TEST_CASE("spike adds the magnitude at the named slot") {
    const auto d = make_dataset({make_series("a", {5, 5, 5, 5, 5, 5})});
    const auto r = inject_antipattern(
        d, spec_of(AntipatternKind::Spike, "a", {{"index", 5}, {"magnitude", 495.0}}));
    CHECK(*r.dataset.series[0].points[5].value == 500.0);
    CHECK(r.annotation["original_value"] == 5.0);
    CHECK(r.annotation["new_value"] == 500.0);
}

TEST_CASE("bias shifts every present value in the window") {
    const auto d = make_dataset({make_series("a", {1, 2, 3, 4})});
    const auto r = inject_antipattern(d, spec_of(AntipatternKind::Bias, "a", {{"offset", 2.0}}));
    CHECK(*r.dataset.series[0].points[0].value == 3.0);
    CHECK(*r.dataset.series[0].points[3].value == 6.0);
    CHECK(r.annotation["changed_points"] == 4);
}

TEST_CASE("drift tilts values proportionally to elapsed time") {
    const auto d = make_dataset({make_series("a", {5, 5, 5}, 0, 1000)});
    const auto r = inject_antipattern(
        d, spec_of(AntipatternKind::Drift, "a", {{"slope_per_ms", 0.01}}));
    CHECK(*r.dataset.series[0].points[0].value == 5.0);
    CHECK(*r.dataset.series[0].points[1].value == Catch::Approx(15.0));
    CHECK(*r.dataset.series[0].points[2].value == Catch::Approx(25.0));
}

TEST_CASE("duplicate-subset copies a window verbatim into a new parameter") {
    const auto d = make_dataset({make_series("a", {1, 2, 3, 4, 5, 6})});
    const auto r = inject_antipattern(
        d, spec_of(AntipatternKind::DuplicateSubset, "a",
                   {{"start_index", 0}, {"length", 5}, {"target_parameter", "a_copy"}}));
    const Series* copy = r.dataset.find_series("a_copy");
    REQUIRE(copy != nullptr);
    REQUIRE(copy->points.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(copy->points[i].timestamp == d.series[0].points[i].timestamp);
        CHECK(copy->points[i].value == d.series[0].points[i].value);
    }
    CHECK_THROWS_AS(
        inject_antipattern(r.dataset,
                           spec_of(AntipatternKind::DuplicateSubset, "a",
                                   {{"start_index", 0}, {"length", 2}, {"target_parameter", "a_copy"}})),
        ConfigError);  // target already exists
}

TEST_CASE("stale prepends old points in ascending order") {
    const auto d = make_dataset({make_series("a", {7, 8, 9}, 1'000'000, 1000)});
    const auto r = inject_antipattern(
        d, spec_of(AntipatternKind::Stale, "a",
                   {{"count", 3}, {"age_ms", 500'000}, {"spacing_ms", 1000}}));
    const auto& pts = r.dataset.series[0].points;
    REQUIRE(pts.size() == 6);
    CHECK(pts[0].timestamp == 1'000'000 - 500'000 - 2000);
    CHECK(pts[2].timestamp == 1'000'000 - 500'000);
    CHECK(*pts[0].value == 7.0);  // copies the first present value
    CHECK(validate_dataset(r.dataset).empty());
}

TEST_CASE("delay rewrites arrival timestamps for the chosen points") {
    const auto d = make_dataset({make_series("a", {1, 2, 3, 4})});
    const auto r = inject_antipattern(
        d, spec_of(AntipatternKind::Delay, "a", {{"indices", {1, 3}}, {"delay_ms", 10'000}}));
    CHECK(r.dataset.series[0].points[1].arrival_timestamp == 1000 + 10'000);
    CHECK(r.dataset.series[0].points[3].arrival_timestamp == 3000 + 10'000);
    CHECK_FALSE(r.dataset.series[0].points[0].arrival_timestamp.has_value());
}

TEST_CASE("rule-breach overwrites values and keeps the originals in the annotation") {
    const auto d = make_dataset({make_series("a", {1, 2, 3})});
    const auto r = inject_antipattern(
        d, spec_of(AntipatternKind::RuleBreach, "a", {{"indices", {1}}, {"value", 999.0}}));
    CHECK(*r.dataset.series[0].points[1].value == 999.0);
    CHECK(r.annotation["original_values"] == nlohmann::json({2.0}));
}

TEST_CASE("seeded random index selection is deterministic and bit-identical") {
    const auto d = make_dataset({make_series("a", std::vector<double>(100, 1.0))});
    const auto spec = spec_of(AntipatternKind::Delay, "a", {{"count", 10}, {"delay_ms", 500}}, 42);
    const auto r1 = inject_antipattern(d, spec);
    const auto r2 = inject_antipattern(d, spec);
    CHECK(r1.annotation == r2.annotation);
    CHECK(serialize_csv(r1.dataset) == serialize_csv(r2.dataset));

    const auto other = spec_of(AntipatternKind::Delay, "a", {{"count", 10}, {"delay_ms", 500}}, 43);
    CHECK(inject_antipattern(d, other).annotation != r1.annotation);
}

TEST_CASE("injection adds no structural violations on random datasets") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<int> kind_pick(0, 7);
    for (int iter = 0; iter < 120; ++iter) {
        Dataset d = numq::testing::random_dataset(rng, 40);
        // ensure values exist for value-targeting kinds
        for (auto& s : d.series)
            for (auto& p : s.points)
                if (!p.value) p.value = 1.0;
        const Series& target = d.series[0];
        const auto n = static_cast<std::int64_t>(target.points.size());
        if (n < 3) continue;

        AntipatternSpec spec;
        spec.parameter = target.parameter_id;
        spec.seed = iter;
        switch (kind_pick(rng)) {
            case 0:
                spec.kind = AntipatternKind::Gap;
                spec.params = {{"count", 1}};
                break;
            case 1:
                spec.kind = AntipatternKind::Spike;
                spec.params = {{"index", n / 2}, {"magnitude", 100.0}};
                break;
            case 2:
                spec.kind = AntipatternKind::Bias;
                spec.params = {{"offset", 3.5}};
                break;
            case 3:
                spec.kind = AntipatternKind::Drift;
                spec.params = {{"slope_per_ms", 0.001}};
                break;
            case 4:
                spec.kind = AntipatternKind::DuplicateSubset;
                spec.params = {{"start_index", 0},
                               {"length", std::min<std::int64_t>(4, n)},
                               {"target_parameter", target.parameter_id + "_copy"}};
                break;
            case 5:
                spec.kind = AntipatternKind::Stale;
                spec.params = {{"count", 2}, {"age_ms", 100'000}, {"spacing_ms", 500}};
                break;
            case 6:
                spec.kind = AntipatternKind::Delay;
                spec.params = {{"count", 2}, {"delay_ms", 9'000}};
                break;
            default:
                spec.kind = AntipatternKind::RuleBreach;
                spec.params = {{"count", 1}, {"value", 1e6}};
                break;
        }

        const auto before = validate_dataset(d).size();
        const auto r = inject_antipattern(d, spec);
        CHECK(validate_dataset(r.dataset).size() <= before);
    }
}
