#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "numq/error.hpp"
#include "numq/time.hpp"

namespace numq {

/// One timestamped observation. `value` is absent for records that arrived
/// without a usable numeric payload; `arrival_timestamp` is absent when the
/// ingesting system did not record reception time.
struct DataPoint {
    Instant timestamp = 0;
    std::optional<double> value;
    std::optional<Instant> arrival_timestamp;

    bool has_finite_value() const { return value.has_value() && std::isfinite(*value); }
};

/// A single parameter's observations, strictly ascending by timestamp.
struct Series {
    std::string parameter_id;
    std::string unit;
    std::vector<DataPoint> points;

    std::uint64_t present_value_count() const {
        std::uint64_t n = 0;
        for (const auto& p : points)
            if (p.has_finite_value()) ++n;
        return n;
    }

    /// Binary search for an exact timestamp; nullptr when absent.
    const DataPoint* find(Instant ts) const {
        auto it = std::lower_bound(points.begin(), points.end(), ts,
                                   [](const DataPoint& p, Instant t) { return p.timestamp < t; });
        if (it == points.end() || it->timestamp != ts) return nullptr;
        return &*it;
    }
};

struct Dataset {
    std::string dataset_id;
    std::string provenance;
    std::vector<Series> series;  // sorted by parameter_id

    const Series* find_series(std::string_view parameter_id) const {
        for (const auto& s : series)
            if (s.parameter_id == parameter_id) return &s;
        return nullptr;
    }

    void sort_canonical() {
        std::sort(series.begin(), series.end(),
                  [](const Series& a, const Series& b) { return a.parameter_id < b.parameter_id; });
        for (auto& s : series)
            std::sort(s.points.begin(), s.points.end(),
                      [](const DataPoint& a, const DataPoint& b) { return a.timestamp < b.timestamp; });
    }
};

/// The timestamps a complete recording is expected to cover:
/// start, start+interval, ..., up to and including end.
struct ExpectedGrid {
    Instant start = 0;
    Instant end = 0;
    Millis interval = 1;

    std::uint64_t size() const {
        return static_cast<std::uint64_t>((end - start) / interval) + 1;
    }
    Instant slot_timestamp(std::uint64_t slot) const {
        return start + static_cast<Instant>(slot) * interval;
    }
    /// Exact slot index for a timestamp; nullopt for off-grid instants.
    std::optional<std::uint64_t> slot_of(Instant ts) const {
        if (ts < start || ts > end) return std::nullopt;
        const Instant offset = ts - start;
        if (offset % interval != 0) return std::nullopt;
        return static_cast<std::uint64_t>(offset / interval);
    }
    void validate() const {
        if (start > end) throw ConfigError("grid start must not exceed end");
        if (interval <= 0) throw ConfigError("grid interval must be positive");
    }
};

inline std::vector<Instant> expected_grid_timestamps(const ExpectedGrid& g) {
    g.validate();
    std::vector<Instant> out;
    out.reserve(g.size());
    for (std::uint64_t i = 0; i < g.size(); ++i) out.push_back(g.slot_timestamp(i));
    return out;
}

enum class ViolationKind {
    EmptyDataset,
    EmptySeries,
    DuplicateParameter,
    NonFiniteValue,
    UnorderedTimestamps,
    ArrivalBeforeTimestamp,
};

inline std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::EmptyDataset: return "empty-dataset";
        case ViolationKind::EmptySeries: return "empty-series";
        case ViolationKind::DuplicateParameter: return "duplicate-parameter";
        case ViolationKind::NonFiniteValue: return "non-finite-value";
        case ViolationKind::UnorderedTimestamps: return "unordered-timestamps";
        case ViolationKind::ArrivalBeforeTimestamp: return "arrival-before-timestamp";
    }
    return "unknown";
}

struct Violation {
    ViolationKind kind{};
    std::string parameter_id;
    std::optional<Instant> timestamp;
    std::string message;
};

/// Total structural check: reports every invariant breach, empty when the
/// dataset is well formed. `clock_skew_allowance` tolerates arrival stamps
/// slightly behind generation stamps.
inline std::vector<Violation> validate_dataset(const Dataset& d, Millis clock_skew_allowance = 0) {
    std::vector<Violation> out;
    if (d.series.empty()) {
        out.push_back({ViolationKind::EmptyDataset, "", std::nullopt, "dataset has no series"});
        return out;
    }
    for (std::size_t i = 0; i < d.series.size(); ++i) {
        const Series& s = d.series[i];
        for (std::size_t j = i + 1; j < d.series.size(); ++j) {
            if (d.series[j].parameter_id == s.parameter_id) {
                out.push_back({ViolationKind::DuplicateParameter, s.parameter_id, std::nullopt,
                               "parameter '" + s.parameter_id + "' appears in multiple series"});
            }
        }
        if (s.points.empty()) {
            out.push_back({ViolationKind::EmptySeries, s.parameter_id, std::nullopt,
                           "series '" + s.parameter_id + "' has no points"});
            continue;
        }
        for (std::size_t j = 0; j < s.points.size(); ++j) {
            const DataPoint& p = s.points[j];
            if (j > 0 && s.points[j - 1].timestamp >= p.timestamp) {
                out.push_back({ViolationKind::UnorderedTimestamps, s.parameter_id, p.timestamp,
                               "timestamps not strictly increasing in '" + s.parameter_id + "'"});
            }
            if (p.value.has_value() && !std::isfinite(*p.value)) {
                out.push_back({ViolationKind::NonFiniteValue, s.parameter_id, p.timestamp,
                               "non-finite value in '" + s.parameter_id + "' at " +
                                   format_rfc3339(p.timestamp)});
            }
            if (p.arrival_timestamp.has_value() &&
                *p.arrival_timestamp < p.timestamp - clock_skew_allowance) {
                out.push_back({ViolationKind::ArrivalBeforeTimestamp, s.parameter_id, p.timestamp,
                               "arrival precedes generation beyond skew allowance in '" +
                                   s.parameter_id + "'"});
            }
        }
    }
    return out;
}

}  // namespace numq
