#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "numq/error.hpp"
#include "numq/time.hpp"

namespace numq {

enum class DistanceMode { Absolute, Relative };

inline std::string_view to_string(DistanceMode m) {
    return m == DistanceMode::Absolute ? "absolute" : "relative";
}

enum class PrecisionGrouping { Consecutive, Window };

/// Expert-supplied evaluation context for one parameter: ground truth,
/// tolerances, and time budgets. Optional fields leave the corresponding
/// dimension not evaluable rather than defaulting to a guess.
struct ReferenceEntry {
    std::string unit;
    std::map<Instant, double> true_values;          // empty: accuracy not evaluable
    double accuracy_tolerance = 0.0;                // tau, same unit as values
    DistanceMode distance_mode = DistanceMode::Absolute;
    std::optional<Millis> freshness_horizon;        // Delta; currency
    std::optional<Millis> delay_budget;             // timeliness
    std::optional<double> precision_threshold;      // pi; precision
    PrecisionGrouping precision_grouping = PrecisionGrouping::Consecutive;
    Millis precision_window_ms = 10'000;

    void validate(const std::string& parameter) const {
        if (accuracy_tolerance < 0)
            throw ConfigError("accuracy_tolerance must be >= 0 for '" + parameter + "'");
        if (freshness_horizon && *freshness_horizon <= 0)
            throw ConfigError("freshness_horizon_ms must be > 0 for '" + parameter + "'");
        if (delay_budget && *delay_budget < 0)
            throw ConfigError("delay_budget_ms must be >= 0 for '" + parameter + "'");
        if (precision_threshold && *precision_threshold < 0)
            throw ConfigError("precision_threshold must be >= 0 for '" + parameter + "'");
        if (precision_grouping == PrecisionGrouping::Window && precision_window_ms <= 0)
            throw ConfigError("precision window must be > 0 for '" + parameter + "'");
        if (distance_mode == DistanceMode::Relative) {
            for (const auto& [ts, v] : true_values)
                if (v == 0.0)
                    throw ConfigError("relative distance requires nonzero reference values ('" +
                                      parameter + "' at " + std::to_string(ts) + ")");
        }
    }
};

/// Per-parameter reference entries plus the defaults applied to parameters
/// without their own entry.
struct ReferenceSpec {
    ReferenceEntry defaults;
    std::map<std::string, ReferenceEntry> parameters;

    const ReferenceEntry& resolve(const std::string& parameter_id) const {
        auto it = parameters.find(parameter_id);
        return it == parameters.end() ? defaults : it->second;
    }
};

}  // namespace numq
