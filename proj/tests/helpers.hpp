#pragma once

// Shared fixtures and generators for the numq test suites.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "numq/dataset.hpp"

namespace numq::testing {

inline Series make_series(std::string parameter, std::vector<double> values, Instant start = 0,
                          Millis interval = 1000) {
    Series s;
    s.parameter_id = std::move(parameter);
    for (std::size_t i = 0; i < values.size(); ++i) {
        DataPoint p;
        p.timestamp = start + static_cast<Instant>(i) * interval;
        p.value = values[i];
        s.points.push_back(p);
    }
    return s;
}

inline Dataset make_dataset(std::vector<Series> series, std::string id = "test") {
    Dataset d;
    d.dataset_id = std::move(id);
    d.series = std::move(series);
    d.sort_canonical();
    return d;
}

/// Random dataset with small value and timestamp alphabets so duplicate
/// windows actually occur. Timestamps are grid-aligned and shared across
/// series, values drawn from a handful of levels.
inline Dataset random_dataset(std::mt19937_64& rng, std::size_t max_points = 200) {
    std::uniform_int_distribution<int> series_count(1, 3);
    std::uniform_int_distribution<std::size_t> points_count(1, max_points);
    std::uniform_int_distribution<int> level(0, 3);
    std::uniform_int_distribution<int> absent(0, 9);

    Dataset d;
    d.dataset_id = "random";
    const int n_series = series_count(rng);
    for (int k = 0; k < n_series; ++k) {
        Series s;
        s.parameter_id = "p" + std::to_string(k);
        const std::size_t n = points_count(rng);
        for (std::size_t i = 0; i < n; ++i) {
            DataPoint p;
            p.timestamp = static_cast<Instant>(i) * 1000;
            if (absent(rng) != 0) p.value = static_cast<double>(level(rng));
            s.points.push_back(p);
        }
        d.series.push_back(std::move(s));
    }
    d.sort_canonical();
    return d;
}

}  // namespace numq::testing
