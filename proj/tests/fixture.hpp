#pragma once

// Pristine three-parameter fixture scoring 1.0 on every dimension: on-grid,
// reference-equal, fresh, timely, rule-clean, duplicate-free. Used as the
// baseline that antipattern injections are measured against.

#include <cmath>
#include <string>

#include "numq/config.hpp"
#include "numq/dataset.hpp"

namespace numq::testing {

inline constexpr Instant kFixtureStart = 1'700'000'000'000;
inline constexpr Millis kFixtureInterval = 1'000;
inline constexpr std::size_t kFixturePoints = 1'000;
inline constexpr Millis kFixtureArrivalDelay = 200;

inline double fixture_value(std::size_t parameter_index, std::size_t slot) {
    return 10.0 * static_cast<double>(parameter_index + 1) +
           std::sin(2.0 * 3.14159265358979323846 * static_cast<double>(slot) / 50.0);
}

inline Dataset identity_dataset(std::size_t parameters = 3, std::size_t points = kFixturePoints) {
    Dataset d;
    d.dataset_id = "identity";
    for (std::size_t k = 0; k < parameters; ++k) {
        Series s;
        s.parameter_id = "p" + std::to_string(k + 1);
        s.unit = "unit";
        for (std::size_t i = 0; i < points; ++i) {
            DataPoint p;
            p.timestamp = kFixtureStart + static_cast<Instant>(i) * kFixtureInterval;
            p.value = fixture_value(k, i);
            p.arrival_timestamp = p.timestamp + kFixtureArrivalDelay;
            s.points.push_back(p);
        }
        d.series.push_back(std::move(s));
    }
    return d;
}

inline EvalConfig identity_config(const Dataset& d, std::size_t points = kFixturePoints) {
    EvalConfig cfg;
    ExpectedGrid grid;
    grid.start = kFixtureStart;
    grid.end = kFixtureStart + static_cast<Instant>(points - 1) * kFixtureInterval;
    grid.interval = kFixtureInterval;
    cfg.grid = grid;
    cfg.as_of = grid.end + kFixtureInterval;

    cfg.reference.defaults.accuracy_tolerance = 0.25;
    cfg.reference.defaults.freshness_horizon = 2'000'000;
    cfg.reference.defaults.delay_budget = 5'000;
    cfg.reference.defaults.precision_threshold = 0.5;
    cfg.reference.defaults.unit = "unit";

    for (const auto& s : d.series) {
        ReferenceEntry entry = cfg.reference.defaults;
        for (const auto& p : s.points)
            if (p.has_finite_value()) entry.true_values[p.timestamp] = *p.value;
        cfg.reference.parameters[s.parameter_id] = std::move(entry);
    }

    cfg.rules.push_back(Rule{"valid-range", "*", RangePredicate{0.0, 100.0}});
    cfg.uniqueness_window = 16;
    cfg.detectors.z_threshold = 3.5;
    cfg.detectors.drift_threshold = 1e-6;
    return cfg;
}

}  // namespace numq::testing
