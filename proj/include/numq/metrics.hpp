#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "numq/config.hpp"
#include "numq/dataset.hpp"
#include "numq/error.hpp"
#include "numq/reference.hpp"
#include "numq/report.hpp"
#include "numq/rules.hpp"
#include "numq/score.hpp"

namespace numq {

/// Distance between an observation and its reference value. Zero iff they
/// are equal; relative mode divides by |x_true| and rejects zero truth.
inline double distance(double x, double x_true, DistanceMode mode) {
    if (mode == DistanceMode::Relative) {
        if (x_true == 0.0) throw DomainError("relative distance undefined for zero reference value");
        return std::fabs(x - x_true) / std::fabs(x_true);
    }
    return std::fabs(x - x_true);
}

/// Share of reference-matched values within tolerance of their true value.
/// Points without a matching reference timestamp are excluded from the count
/// and reported in the auxiliary detail. The auxiliary also carries the plain
/// mean distance over matched points.
inline DimensionScore accuracy(const Series& s, const ReferenceEntry& ref) {
    if (ref.true_values.empty())
        return DimensionScore::not_evaluable(Dimension::Accuracy, "no reference values");

    std::uint64_t matched = 0, within = 0, unmatched = 0;
    // Compensated summation keeps the reported mean exact to ~1 ulp even for
    // very long series.
    double sum = 0.0, comp = 0.0;
    for (const auto& p : s.points) {
        if (!p.has_finite_value()) continue;
        auto it = ref.true_values.find(p.timestamp);
        if (it == ref.true_values.end()) {
            ++unmatched;
            continue;
        }
        const double d = distance(*p.value, it->second, ref.distance_mode);
        ++matched;
        if (d <= ref.accuracy_tolerance) ++within;
        const double y = d - comp;
        const double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    if (matched == 0)
        return DimensionScore::not_evaluable(Dimension::Accuracy, "no points match the reference");

    DimensionScore score = DimensionScore::of(Dimension::Accuracy, within, matched);
    score.auxiliary["mean_distance"] = sum / static_cast<double>(matched);
    score.auxiliary["unmatched_points"] = unmatched;
    return score;
}

/// Share of expected grid slots holding a present value. Off-grid points do
/// not count toward the numerator; they are tallied in the auxiliary.
inline DimensionScore completeness(const Series& s, const ExpectedGrid& g) {
    g.validate();
    std::uint64_t present = 0, off_grid = 0;
    for (const auto& p : s.points) {
        if (!p.has_finite_value()) continue;
        if (g.slot_of(p.timestamp))
            ++present;
        else
            ++off_grid;
    }
    DimensionScore score = DimensionScore::of(Dimension::Completeness, present, g.size());
    score.auxiliary["off_grid_points"] = off_grid;
    return score;
}

/// Share of passing (point, rule) checks; each applicable rule is checked
/// independently against each present value.
inline DimensionScore consistency(const Series& s, const RuleSet& rules) {
    bool any_applicable = false;
    for (const auto& r : rules)
        if (r.applies_to(s.parameter_id)) any_applicable = true;
    if (!any_applicable)
        return DimensionScore::not_evaluable(Dimension::Consistency, "no applicable rules");

    const auto checks = evaluate_rules(s, rules);
    if (checks.empty())
        return DimensionScore::not_evaluable(Dimension::Consistency, "no values to check");

    std::uint64_t passed = 0;
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_rule;
    for (const auto& c : checks) {
        auto& [rule_passed, rule_total] = per_rule[c.rule->id];
        ++rule_total;
        if (c.passed) {
            ++passed;
            ++rule_passed;
        }
    }
    DimensionScore score = DimensionScore::of(Dimension::Consistency, passed, checks.size());
    nlohmann::json rule_stats = nlohmann::json::object();
    for (const auto& [id, counts] : per_rule)
        rule_stats[id] = {{"passed", counts.first}, {"total", counts.second}};
    score.auxiliary["rule_stats"] = rule_stats;
    return score;
}

/// Share of values still within the freshness horizon at `as_of`. Timestamps
/// from the future count as current but are flagged as clock anomalies.
inline DimensionScore currency(const Series& s, Millis freshness_horizon, Instant as_of) {
    if (freshness_horizon <= 0) throw ConfigError("freshness horizon must be positive");
    std::uint64_t total = 0, current = 0, future = 0;
    for (const auto& p : s.points) {
        if (!p.has_finite_value()) continue;
        ++total;
        if (as_of - p.timestamp <= freshness_horizon) ++current;
        if (p.timestamp > as_of) ++future;
    }
    if (total == 0) return DimensionScore::not_evaluable(Dimension::Currency, "no values");
    DimensionScore score = DimensionScore::of(Dimension::Currency, current, total);
    if (future > 0) score.auxiliary["future_points"] = future;
    return score;
}

/// Share of delivered records whose generation-to-arrival delay fits the
/// budget. Points without arrival data are excluded and tallied; an arrival
/// earlier than generation beyond the skew allowance counts as untimely and
/// is flagged.
inline DimensionScore timeliness(const Series& s, Millis delay_budget, Millis clock_skew = 0) {
    if (delay_budget < 0) throw ConfigError("delay budget must be >= 0");
    std::uint64_t total = 0, timely = 0, missing_arrival = 0, negative_delay = 0;
    for (const auto& p : s.points) {
        if (!p.arrival_timestamp) {
            ++missing_arrival;
            continue;
        }
        ++total;
        const Millis delay = *p.arrival_timestamp - p.timestamp;
        if (delay < -clock_skew) {
            ++negative_delay;
        } else if (delay <= delay_budget) {
            ++timely;
        }
    }
    if (total == 0)
        return DimensionScore::not_evaluable(Dimension::Timeliness, "no points carry arrival data");
    DimensionScore score = DimensionScore::of(Dimension::Timeliness, timely, total);
    score.auxiliary["missing_arrival"] = missing_arrival;
    if (negative_delay > 0) score.auxiliary["negative_delay_points"] = negative_delay;
    return score;
}

namespace detail {

// Repeat pairs for the precision metric. Consecutive: each adjacent pair of
// present values; window: every unordered pair inside each aligned time
// bucket of the given width.
inline std::vector<std::pair<double, double>> precision_pairs(const Series& s,
                                                              PrecisionGrouping grouping,
                                                              Millis window_ms) {
    std::vector<std::pair<double, double>> pairs;
    if (grouping == PrecisionGrouping::Consecutive) {
        std::optional<double> prev;
        for (const auto& p : s.points) {
            if (!p.has_finite_value()) continue;
            if (prev) pairs.emplace_back(*prev, *p.value);
            prev = *p.value;
        }
        return pairs;
    }
    std::vector<double> bucket_values;
    std::optional<std::int64_t> bucket;
    auto flush = [&]() {
        for (std::size_t i = 0; i < bucket_values.size(); ++i)
            for (std::size_t j = i + 1; j < bucket_values.size(); ++j)
                pairs.emplace_back(bucket_values[i], bucket_values[j]);
        bucket_values.clear();
    };
    for (const auto& p : s.points) {
        if (!p.has_finite_value()) continue;
        const std::int64_t b = floor_div(p.timestamp, window_ms);
        if (bucket && b != *bucket) flush();
        bucket = b;
        bucket_values.push_back(*p.value);
    }
    flush();
    return pairs;
}

}  // namespace detail

/// Share of repeat pairs whose absolute spread stays within the expert
/// threshold.
inline DimensionScore precision(const Series& s, double threshold, PrecisionGrouping grouping,
                                Millis window_ms = 10'000) {
    if (threshold < 0) throw ConfigError("precision threshold must be >= 0");
    const auto pairs = detail::precision_pairs(s, grouping, window_ms);
    if (pairs.empty())
        return DimensionScore::not_evaluable(Dimension::Precision, "fewer than two comparable values");
    std::uint64_t within = 0;
    for (const auto& [a, b] : pairs)
        if (distance(a, b, DistanceMode::Absolute) <= threshold) ++within;
    return DimensionScore::of(Dimension::Precision, within, pairs.size());
}

struct WindowRef {
    std::string parameter_id;
    std::uint64_t window_index = 0;
    std::size_t first_point = 0;  // index into the series' points
    std::size_t point_count = 0;
    Instant from = 0;
    Instant to = 0;
};

struct UniquenessAnalysis {
    DimensionScore dataset_score;  // unique windows / all windows
    std::map<std::string, std::pair<std::uint64_t, std::uint64_t>> per_parameter;  // (m, n)
    std::vector<std::vector<WindowRef>> duplicate_groups;
};

namespace detail {

inline void append_bytes(std::string& out, const void* p, std::size_t n) {
    out.append(static_cast<const char*>(p), n);
}

// Byte image of a window's (timestamp, value) sequence. Negative zero is
// normalized so equal-comparing values hash identically.
inline std::string window_key(const Series& s, std::size_t first, std::size_t count) {
    std::string key;
    key.reserve(count * 17);
    for (std::size_t i = first; i < first + count; ++i) {
        const DataPoint& p = s.points[i];
        append_bytes(key, &p.timestamp, sizeof(p.timestamp));
        const char present = p.value.has_value() ? 1 : 0;
        key.push_back(present);
        if (p.value) {
            double v = *p.value;
            if (v == 0.0) v = 0.0;  // collapse -0.0
            append_bytes(key, &v, sizeof(v));
        }
    }
    return key;
}

}  // namespace detail

/// Splits every series into non-overlapping windows of `window_length` points
/// (final short window included) and flags every window whose exact
/// (timestamp, value) content appears more than once anywhere in the dataset.
inline UniquenessAnalysis analyze_uniqueness(const Dataset& d, std::uint64_t window_length) {
    if (window_length < 1) throw ConfigError("uniqueness window length must be >= 1");
    UniquenessAnalysis out;

    std::unordered_map<std::string, std::vector<WindowRef>> by_content;
    std::uint64_t total_windows = 0;
    for (const auto& s : d.series) {
        std::uint64_t windows_here = 0;
        for (std::size_t first = 0; first < s.points.size(); first += window_length) {
            const std::size_t count = std::min<std::size_t>(window_length, s.points.size() - first);
            WindowRef ref;
            ref.parameter_id = s.parameter_id;
            ref.window_index = windows_here;
            ref.first_point = first;
            ref.point_count = count;
            ref.from = s.points[first].timestamp;
            ref.to = s.points[first + count - 1].timestamp;
            by_content[detail::window_key(s, first, count)].push_back(std::move(ref));
            ++windows_here;
        }
        total_windows += windows_here;
        out.per_parameter[s.parameter_id] = {windows_here, windows_here};
    }

    if (total_windows == 0) {
        out.dataset_score = DimensionScore::not_evaluable(Dimension::Uniqueness, "no points");
        return out;
    }

    std::uint64_t duplicated = 0;
    for (auto& [key, refs] : by_content) {
        if (refs.size() < 2) continue;
        std::sort(refs.begin(), refs.end(), [](const WindowRef& a, const WindowRef& b) {
            if (a.parameter_id != b.parameter_id) return a.parameter_id < b.parameter_id;
            return a.window_index < b.window_index;
        });
        duplicated += refs.size();
        for (const auto& ref : refs) {
            auto& [m, n] = out.per_parameter[ref.parameter_id];
            --m;
            (void)n;
        }
        out.duplicate_groups.push_back(refs);
    }
    std::sort(out.duplicate_groups.begin(), out.duplicate_groups.end(),
              [](const auto& a, const auto& b) {
                  if (a.front().parameter_id != b.front().parameter_id)
                      return a.front().parameter_id < b.front().parameter_id;
                  return a.front().window_index < b.front().window_index;
              });

    out.dataset_score = DimensionScore::of(Dimension::Uniqueness, total_windows - duplicated, total_windows);
    out.dataset_score.auxiliary["duplicate_groups"] = out.duplicate_groups.size();
    out.dataset_score.auxiliary["window_length"] = window_length;
    return out;
}

/// Dataset-level uniqueness proportion: unique windows over all windows.
inline DimensionScore uniqueness(const Dataset& d, std::uint64_t window_length) {
    return analyze_uniqueness(d, window_length).dataset_score;
}

struct ManifestEntry {
    std::string parameter_id;
    Instant timestamp = 0;
};

/// Default manifest: every grid slot for every series in the dataset.
inline std::vector<ManifestEntry> default_manifest(const Dataset& d, const ExpectedGrid& g) {
    std::vector<ManifestEntry> manifest;
    manifest.reserve(d.series.size() * g.size());
    for (const auto& s : d.series)
        for (std::uint64_t i = 0; i < g.size(); ++i)
            manifest.push_back({s.parameter_id, g.slot_timestamp(i)});
    return manifest;
}

/// Share of expected records that are present, carry a usable value, and
/// (when retrieval timings exist for them) were fetched within the latency
/// budget. Records with no latency entry are judged on presence alone.
inline DimensionScore accessibility(const Dataset& d, const std::vector<ManifestEntry>& manifest,
                                    const std::vector<LatencyRecord>& latency_log,
                                    std::optional<Millis> latency_budget) {
    if (manifest.empty())
        return DimensionScore::not_evaluable(Dimension::Accessibility, "empty manifest");

    std::unordered_map<std::string, std::unordered_map<Instant, Millis>> latency;
    for (const auto& rec : latency_log) latency[rec.parameter_id][rec.timestamp] = rec.latency_ms;

    std::uint64_t accessible = 0, missing = 0, unusable = 0, slow = 0;
    for (const auto& entry : manifest) {
        const Series* s = d.find_series(entry.parameter_id);
        const DataPoint* p = s ? s->find(entry.timestamp) : nullptr;
        if (!p) {
            ++missing;
            continue;
        }
        if (!p->has_finite_value()) {
            ++unusable;
            continue;
        }
        if (latency_budget && !latency.empty()) {
            auto param_it = latency.find(entry.parameter_id);
            if (param_it != latency.end()) {
                auto ts_it = param_it->second.find(entry.timestamp);
                if (ts_it != param_it->second.end() && ts_it->second > *latency_budget) {
                    ++slow;
                    continue;
                }
            }
        }
        ++accessible;
    }
    DimensionScore score = DimensionScore::of(Dimension::Accessibility, accessible, manifest.size());
    score.auxiliary["missing_records"] = missing;
    score.auxiliary["unusable_values"] = unusable;
    if (slow > 0) score.auxiliary["over_latency_budget"] = slow;
    return score;
}

/// Runs every evaluable dimension for every parameter and aggregates. Throws
/// when nothing at all is evaluable; individual gaps in configuration only
/// mark the affected dimension.
inline QualityReport evaluate_all(const Dataset& d, const EvalConfig& cfg) {
    QualityReport report;
    report.dataset_id = d.dataset_id;
    report.evaluated_at = resolve_as_of(cfg.as_of);
    report.config_fingerprint = cfg.fingerprint();

    for (const auto& [param, entry] : cfg.reference.parameters) {
        if (!d.find_series(param))
            report.warnings.push_back("config references unknown parameter '" + param + "'");
    }

    const auto unique_analysis = analyze_uniqueness(d, cfg.uniqueness_window);

    bool any_evaluable = false;
    for (const auto& s : d.series) {
        const ReferenceEntry& ref = cfg.resolve(s.parameter_id);
        ParameterScores scores;
        scores.parameter_id = s.parameter_id;
        scores.value_count = s.present_value_count();

        scores.scores[Dimension::Accuracy] = accuracy(s, ref);

        scores.scores[Dimension::Completeness] =
            cfg.grid ? completeness(s, *cfg.grid)
                     : DimensionScore::not_evaluable(Dimension::Completeness, "no expected grid");

        scores.scores[Dimension::Consistency] = consistency(s, cfg.rules);

        scores.scores[Dimension::Currency] =
            ref.freshness_horizon
                ? currency(s, *ref.freshness_horizon, report.evaluated_at)
                : DimensionScore::not_evaluable(Dimension::Currency, "no freshness horizon configured");

        scores.scores[Dimension::Timeliness] =
            ref.delay_budget ? timeliness(s, *ref.delay_budget, cfg.clock_skew_ms)
                             : DimensionScore::not_evaluable(Dimension::Timeliness,
                                                             "no delay budget configured");

        scores.scores[Dimension::Precision] =
            ref.precision_threshold
                ? precision(s, *ref.precision_threshold, ref.precision_grouping, ref.precision_window_ms)
                : DimensionScore::not_evaluable(Dimension::Precision,
                                                "no precision threshold configured");

        {
            auto it = unique_analysis.per_parameter.find(s.parameter_id);
            if (it == unique_analysis.per_parameter.end() || it->second.second == 0) {
                scores.scores[Dimension::Uniqueness] =
                    DimensionScore::not_evaluable(Dimension::Uniqueness, "no points");
            } else {
                scores.scores[Dimension::Uniqueness] =
                    DimensionScore::of(Dimension::Uniqueness, it->second.first, it->second.second);
            }
        }

        if (cfg.grid) {
            std::vector<ManifestEntry> manifest;
            manifest.reserve(cfg.grid->size());
            for (std::uint64_t i = 0; i < cfg.grid->size(); ++i)
                manifest.push_back({s.parameter_id, cfg.grid->slot_timestamp(i)});
            scores.scores[Dimension::Accessibility] =
                accessibility(d, manifest, cfg.latency_log, cfg.latency_budget);
        } else {
            scores.scores[Dimension::Accessibility] =
                DimensionScore::not_evaluable(Dimension::Accessibility, "no expected grid");
        }

        for (const auto& [dim, score] : scores.scores)
            if (score.evaluable) any_evaluable = true;
        report.parameters.push_back(std::move(scores));
    }
    if (!any_evaluable) throw DataError("no dimension is evaluable for any parameter");

    std::sort(report.parameters.begin(), report.parameters.end(),
              [](const ParameterScores& a, const ParameterScores& b) {
                  return a.parameter_id < b.parameter_id;
              });

    for (Dimension dim : kAllDimensions) {
        AggregateScore agg;
        agg.dimension = dim;
        double weighted_sum = 0.0;
        std::uint64_t weight_total = 0;
        for (const auto& p : report.parameters) {
            auto it = p.scores.find(dim);
            if (it == p.scores.end() || !it->second.evaluable) continue;
            const std::uint64_t w = p.value_count > 0 ? p.value_count : 1;
            weighted_sum += static_cast<double>(w) * it->second.proportion();
            weight_total += w;
        }
        if (weight_total > 0) {
            agg.evaluable = true;
            agg.proportion = weighted_sum / static_cast<double>(weight_total);
            agg.weight = weight_total;
        }
        report.aggregates[dim] = agg;
    }
    return report;
}

}  // namespace numq
