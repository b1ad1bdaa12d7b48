#pragma once

#include <array>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <string_view>

#include <json.hpp>

namespace numq {

/// The eight orthogonal axes a dataset is scored along.
enum class Dimension {
    Accuracy,
    Accessibility,
    Completeness,
    Consistency,
    Currency,
    Timeliness,
    Precision,
    Uniqueness,
};

inline constexpr std::array<Dimension, 8> kAllDimensions = {
    Dimension::Accuracy,   Dimension::Accessibility, Dimension::Completeness,
    Dimension::Consistency, Dimension::Currency,      Dimension::Timeliness,
    Dimension::Precision,  Dimension::Uniqueness,
};

inline std::string_view to_string(Dimension d) {
    switch (d) {
        case Dimension::Accuracy: return "accuracy";
        case Dimension::Accessibility: return "accessibility";
        case Dimension::Completeness: return "completeness";
        case Dimension::Consistency: return "consistency";
        case Dimension::Currency: return "currency";
        case Dimension::Timeliness: return "timeliness";
        case Dimension::Precision: return "precision";
        case Dimension::Uniqueness: return "uniqueness";
    }
    return "unknown";
}

inline std::optional<Dimension> dimension_from_string(std::string_view s) {
    for (Dimension d : kAllDimensions)
        if (to_string(d) == s) return d;
    return std::nullopt;
}

/// A score is the exact ratio passed/total; `proportion()` is its floating
/// rendering. Scores that cannot be computed are marked not evaluable and
/// carry a reason instead of a fabricated 0 or 1.
struct DimensionScore {
    Dimension dimension{};
    bool evaluable = false;
    std::uint64_t passed = 0;  // m
    std::uint64_t total = 0;   // n, > 0 whenever evaluable
    nlohmann::json auxiliary = nlohmann::json::object();
    std::string skip_reason;

    double proportion() const { return total == 0 ? 0.0 : static_cast<double>(passed) / static_cast<double>(total); }

    static DimensionScore of(Dimension d, std::uint64_t m, std::uint64_t n) {
        DimensionScore s;
        s.dimension = d;
        s.evaluable = true;
        s.passed = m;
        s.total = n;
        return s;
    }

    static DimensionScore not_evaluable(Dimension d, std::string reason) {
        DimensionScore s;
        s.dimension = d;
        s.evaluable = false;
        s.skip_reason = std::move(reason);
        return s;
    }
};

/// Fixed six-decimal rendering used everywhere a proportion is serialized.
inline std::string format_proportion(double p) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", p);
    return buf;
}

}  // namespace numq
