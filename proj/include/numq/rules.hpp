#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "numq/dataset.hpp"
#include "numq/expression.hpp"

namespace numq {

// Declarative per-record checks. Predicates are total over finite values:
// they answer pass/fail and never error.

struct RangePredicate {
    double min = 0;
    double max = 0;
};

struct MaxDecimalPlacesPredicate {
    int places = 0;
};

struct UnitEqualsPredicate {
    std::string unit;
};

struct MonotoneNondecreasingPredicate {};

struct ExpressionPredicate {
    std::shared_ptr<const Expression> expr;
};

using Predicate = std::variant<RangePredicate, MaxDecimalPlacesPredicate, UnitEqualsPredicate,
                               MonotoneNondecreasingPredicate, ExpressionPredicate>;

struct Rule {
    std::string id;
    std::string scope = "*";  // parameter id, or "*" for every parameter
    Predicate predicate;

    bool applies_to(std::string_view parameter_id) const {
        return scope == "*" || scope == parameter_id;
    }
};

using RuleSet = std::vector<Rule>;

namespace detail {

inline bool within_decimal_places(double v, int places) {
    // Scaled value must sit on an integer up to rounding noise.
    double scaled = v;
    for (int i = 0; i < places; ++i) scaled *= 10.0;
    return std::fabs(scaled - std::round(scaled)) <= 1e-9 * std::max(1.0, std::fabs(scaled));
}

}  // namespace detail

struct RuleCheck {
    std::size_t point_index = 0;
    Instant timestamp = 0;
    const Rule* rule = nullptr;
    bool passed = false;
};

/// Evaluates every rule in `rules` against every present-valued point of the
/// series, one check per (point, rule) pair, in point order then rule order.
/// Rules out of scope for the series' parameter are skipped entirely.
inline std::vector<RuleCheck> evaluate_rules(const Series& s, const RuleSet& rules) {
    std::vector<const Rule*> applicable;
    for (const auto& r : rules)
        if (r.applies_to(s.parameter_id)) applicable.push_back(&r);

    std::vector<RuleCheck> checks;
    if (applicable.empty()) return checks;

    std::optional<double> prev_value;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        const DataPoint& p = s.points[i];
        if (!p.has_finite_value()) continue;
        const double v = *p.value;
        for (const Rule* r : applicable) {
            bool passed = std::visit(
                [&](const auto& pred) -> bool {
                    using T = std::decay_t<decltype(pred)>;
                    if constexpr (std::is_same_v<T, RangePredicate>) {
                        return pred.min <= v && v <= pred.max;
                    } else if constexpr (std::is_same_v<T, MaxDecimalPlacesPredicate>) {
                        return detail::within_decimal_places(v, pred.places);
                    } else if constexpr (std::is_same_v<T, UnitEqualsPredicate>) {
                        return s.unit == pred.unit;
                    } else if constexpr (std::is_same_v<T, MonotoneNondecreasingPredicate>) {
                        return !prev_value || v >= *prev_value;
                    } else {
                        return pred.expr->truthy(v, static_cast<double>(p.timestamp));
                    }
                },
                r->predicate);
            checks.push_back({i, p.timestamp, r, passed});
        }
        prev_value = v;
    }
    return checks;
}

}  // namespace numq
