#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "numq/config.hpp"
#include "numq/dataset.hpp"
#include "numq/findings.hpp"
#include "numq/metrics.hpp"
#include "numq/rules.hpp"

namespace numq {

/// One finding per maximal run of consecutive missing grid slots; magnitude
/// is the run length.
inline DetectionResult detect_gaps(const Series& s, const ExpectedGrid& g) {
    g.validate();
    DetectionResult result;
    std::optional<std::uint64_t> run_start;
    std::uint64_t run_length = 0;

    auto flush = [&](std::uint64_t next_slot) {
        if (!run_start) return;
        Finding f;
        f.kind = FindingKind::Gap;
        f.parameter_id = s.parameter_id;
        f.from = g.slot_timestamp(*run_start);
        f.to = g.slot_timestamp(next_slot - 1);
        f.magnitude = static_cast<double>(run_length);
        f.linked = linked_dimension(FindingKind::Gap);
        result.findings.push_back(std::move(f));
        run_start.reset();
        run_length = 0;
    };

    for (std::uint64_t slot = 0; slot < g.size(); ++slot) {
        const DataPoint* p = s.find(g.slot_timestamp(slot));
        const bool present = p != nullptr && p->has_finite_value();
        if (present) {
            flush(slot);
        } else {
            if (!run_start) run_start = slot;
            ++run_length;
        }
    }
    flush(g.size());
    return result;
}

namespace detail {

inline double median_of(std::vector<double> values) {
    const std::size_t n = values.size();
    const std::size_t mid = n / 2;
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
    double med = values[mid];
    if (n % 2 == 0) {
        const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
        med = 0.5 * (med + lower);
    }
    return med;
}

}  // namespace detail

/// Robust spike detection: z = 0.6745 * |x - median| / MAD, flagged above the
/// threshold. A zero MAD (constant baseline) falls back to flagging any value
/// different from the median, with |x - median| as the magnitude.
inline DetectionResult detect_outliers(const Series& s, double z_threshold) {
    std::vector<double> values;
    std::vector<std::size_t> value_points;
    for (std::size_t i = 0; i < s.points.size(); ++i) {
        if (!s.points[i].has_finite_value()) continue;
        values.push_back(*s.points[i].value);
        value_points.push_back(i);
    }
    if (values.size() < 8)
        return DetectionResult::not_evaluable("fewer than 8 values");

    const double median = detail::median_of(values);
    std::vector<double> deviations;
    deviations.reserve(values.size());
    for (double v : values) deviations.push_back(std::fabs(v - median));
    const double mad = detail::median_of(deviations);

    DetectionResult result;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double dev = std::fabs(values[k] - median);
        bool flagged;
        double magnitude;
        if (mad == 0.0) {
            flagged = values[k] != median;
            magnitude = dev;
        } else {
            magnitude = 0.6745 * dev / mad;
            flagged = magnitude > z_threshold;
        }
        if (!flagged) continue;
        const DataPoint& p = s.points[value_points[k]];
        Finding f;
        f.kind = FindingKind::Outlier;
        f.parameter_id = s.parameter_id;
        f.from = f.to = p.timestamp;
        f.magnitude = magnitude;
        f.linked = linked_dimension(FindingKind::Outlier);
        result.findings.push_back(std::move(f));
    }
    return result;
}

/// Systematic error checks. With reference values: the mean signed residual
/// against truth, flagged beyond `bias_threshold`. Independently (and always,
/// given >= 16 values and a configured threshold): the least-squares slope of
/// value against time, flagged beyond `drift_threshold_per_ms`.
inline DetectionResult detect_systematic_error(const Series& s,
                                               const std::map<Instant, double>* reference,
                                               double bias_threshold,
                                               std::optional<double> drift_threshold_per_ms) {
    std::vector<double> values;
    std::vector<Instant> times;
    for (const auto& p : s.points) {
        if (!p.has_finite_value()) continue;
        values.push_back(*p.value);
        times.push_back(p.timestamp);
    }

    const bool have_reference = reference != nullptr && !reference->empty();
    const bool drift_possible = drift_threshold_per_ms.has_value() && values.size() >= 16;
    if (!have_reference && !drift_possible)
        return DetectionResult::not_evaluable(
            "no reference values and too few points for drift estimation");

    DetectionResult result;

    if (have_reference) {
        double sum = 0.0;
        std::uint64_t matched = 0;
        Instant first_match = 0, last_match = 0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            auto it = reference->find(times[i]);
            if (it == reference->end()) continue;
            if (matched == 0) first_match = times[i];
            last_match = times[i];
            sum += values[i] - it->second;
            ++matched;
        }
        if (matched > 0) {
            const double mean_residual = sum / static_cast<double>(matched);
            if (std::fabs(mean_residual) > bias_threshold) {
                Finding f;
                f.kind = FindingKind::SystematicBias;
                f.parameter_id = s.parameter_id;
                f.from = first_match;
                f.to = last_match;
                f.magnitude = mean_residual;
                f.linked = linked_dimension(FindingKind::SystematicBias);
                result.findings.push_back(std::move(f));
            }
        }
    }

    if (drift_possible) {
        const double t0 = static_cast<double>(times.front());
        double mean_t = 0.0, mean_v = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            mean_t += static_cast<double>(times[i]) - t0;
            mean_v += values[i];
        }
        mean_t /= static_cast<double>(values.size());
        mean_v /= static_cast<double>(values.size());
        double cov = 0.0, var = 0.0;
        for (std::size_t i = 0; i < values.size(); ++i) {
            const double dt = (static_cast<double>(times[i]) - t0) - mean_t;
            cov += dt * (values[i] - mean_v);
            var += dt * dt;
        }
        if (var > 0.0) {
            const double slope = cov / var;
            if (std::fabs(slope) > *drift_threshold_per_ms) {
                Finding f;
                f.kind = FindingKind::SystematicDrift;
                f.parameter_id = s.parameter_id;
                f.from = times.front();
                f.to = times.back();
                f.magnitude = slope;
                f.linked = linked_dimension(FindingKind::SystematicDrift);
                result.findings.push_back(std::move(f));
            }
        }
    }
    return result;
}

/// Stale findings for points older than the freshness horizon; delayed
/// findings for arrival delays over budget. Magnitudes are the overruns in
/// milliseconds.
inline DetectionResult detect_outdated(const Series& s, std::optional<Millis> freshness_horizon,
                                       std::optional<Millis> delay_budget, Instant as_of) {
    if (!freshness_horizon && !delay_budget)
        return DetectionResult::not_evaluable("neither freshness horizon nor delay budget configured");
    DetectionResult result;
    for (const auto& p : s.points) {
        if (freshness_horizon && p.has_finite_value()) {
            const Millis age = as_of - p.timestamp;
            if (age > *freshness_horizon) {
                Finding f;
                f.kind = FindingKind::Stale;
                f.parameter_id = s.parameter_id;
                f.from = f.to = p.timestamp;
                f.magnitude = static_cast<double>(age - *freshness_horizon);
                f.linked = linked_dimension(FindingKind::Stale);
                result.findings.push_back(std::move(f));
            }
        }
        if (delay_budget && p.arrival_timestamp) {
            const Millis delay = *p.arrival_timestamp - p.timestamp;
            if (delay > *delay_budget) {
                Finding f;
                f.kind = FindingKind::Delayed;
                f.parameter_id = s.parameter_id;
                f.from = f.to = p.timestamp;
                f.magnitude = static_cast<double>(delay - *delay_budget);
                f.linked = linked_dimension(FindingKind::Delayed);
                result.findings.push_back(std::move(f));
            }
        }
    }
    return result;
}

/// One finding per failed (point, rule) check; the finding count equals
/// n - m of the consistency score over the same inputs.
inline DetectionResult detect_inconsistency(const Series& s, const RuleSet& rules) {
    bool any_applicable = false;
    for (const auto& r : rules)
        if (r.applies_to(s.parameter_id)) any_applicable = true;
    if (!any_applicable) return DetectionResult::not_evaluable("no applicable rules");

    DetectionResult result;
    for (const auto& check : evaluate_rules(s, rules)) {
        if (check.passed) continue;
        Finding f;
        f.kind = FindingKind::RuleViolation;
        f.parameter_id = s.parameter_id;
        f.from = f.to = check.timestamp;
        f.magnitude = 1.0;
        f.linked = linked_dimension(FindingKind::RuleViolation);
        f.rule_id = check.rule->id;
        result.findings.push_back(std::move(f));
    }
    return result;
}

/// One finding per window that shares its exact content with another window;
/// findings carry a group id and the group size as magnitude. The flagged set
/// is the complement of the uniqueness metric's unique set.
inline DetectionResult detect_duplicate_subsets(const Dataset& d, std::uint64_t window_length) {
    const auto analysis = analyze_uniqueness(d, window_length);
    DetectionResult result;
    if (!analysis.dataset_score.evaluable)
        return DetectionResult::not_evaluable(analysis.dataset_score.skip_reason);
    int group_id = 0;
    for (const auto& group : analysis.duplicate_groups) {
        for (const auto& ref : group) {
            Finding f;
            f.kind = FindingKind::DuplicateSubset;
            f.parameter_id = ref.parameter_id;
            f.from = ref.from;
            f.to = ref.to;
            f.magnitude = static_cast<double>(group.size());
            f.linked = linked_dimension(FindingKind::DuplicateSubset);
            f.group = group_id;
            f.window_index = ref.window_index;
            result.findings.push_back(std::move(f));
        }
        ++group_id;
    }
    return result;
}

/// Runs every applicable detector over the dataset with the configured
/// thresholds, merging findings in canonical order. Detectors that cannot run
/// report into `skip_notes`.
inline std::vector<Finding> run_all_detectors(const Dataset& d, const EvalConfig& cfg,
                                              Instant as_of,
                                              std::vector<std::string>* skip_notes = nullptr) {
    std::vector<Finding> findings;
    auto absorb = [&](const DetectionResult& r, const Series& s, const char* what) {
        if (!r.evaluable) {
            if (skip_notes)
                skip_notes->push_back(std::string(what) + " not evaluable for '" + s.parameter_id +
                                      "': " + r.skip_reason);
            return;
        }
        findings.insert(findings.end(), r.findings.begin(), r.findings.end());
    };

    for (const auto& s : d.series) {
        const ReferenceEntry& ref = cfg.resolve(s.parameter_id);
        if (cfg.grid) absorb(detect_gaps(s, *cfg.grid), s, "gap detector");
        absorb(detect_outliers(s, cfg.detectors.z_threshold), s, "outlier detector");

        const double bias_threshold = cfg.detectors.bias_threshold.value_or(ref.accuracy_tolerance);
        const auto* reference = ref.true_values.empty() ? nullptr : &ref.true_values;
        absorb(detect_systematic_error(s, reference, bias_threshold, cfg.detectors.drift_threshold),
               s, "systematic error detector");

        absorb(detect_outdated(s, ref.freshness_horizon, ref.delay_budget, as_of), s,
               "outdated detector");
        absorb(detect_inconsistency(s, cfg.rules), s, "inconsistency detector");
    }
    if (!d.series.empty()) {
        const auto dup = detect_duplicate_subsets(d, cfg.uniqueness_window);
        if (dup.evaluable)
            findings.insert(findings.end(), dup.findings.begin(), dup.findings.end());
        else if (skip_notes)
            skip_notes->push_back("duplicate detector not evaluable: " + dup.skip_reason);
    }
    sort_findings(findings);
    return findings;
}

}  // namespace numq
