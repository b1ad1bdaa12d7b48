#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "numq/score.hpp"
#include "numq/time.hpp"

namespace numq {

/// Concrete defect instances that explain why a dimension score dropped.
enum class FindingKind {
    Gap,
    Outlier,
    SystematicBias,
    SystematicDrift,
    Stale,
    Delayed,
    RuleViolation,
    DuplicateSubset,
};

inline std::string_view to_string(FindingKind k) {
    switch (k) {
        case FindingKind::Gap: return "gap";
        case FindingKind::Outlier: return "outlier";
        case FindingKind::SystematicBias: return "systematic-bias";
        case FindingKind::SystematicDrift: return "systematic-drift";
        case FindingKind::Stale: return "stale";
        case FindingKind::Delayed: return "delayed";
        case FindingKind::RuleViolation: return "rule-violation";
        case FindingKind::DuplicateSubset: return "duplicate-subset";
    }
    return "unknown";
}

inline std::optional<FindingKind> finding_kind_from_string(std::string_view s) {
    static constexpr FindingKind kinds[] = {
        FindingKind::Gap,       FindingKind::Outlier,       FindingKind::SystematicBias,
        FindingKind::SystematicDrift, FindingKind::Stale,   FindingKind::Delayed,
        FindingKind::RuleViolation,   FindingKind::DuplicateSubset,
    };
    for (FindingKind k : kinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

/// The dimension a finding kind degrades. Systematic errors land on
/// consistency; isolated spikes on precision.
inline Dimension linked_dimension(FindingKind k) {
    switch (k) {
        case FindingKind::Gap: return Dimension::Completeness;
        case FindingKind::Outlier: return Dimension::Precision;
        case FindingKind::SystematicBias: return Dimension::Consistency;
        case FindingKind::SystematicDrift: return Dimension::Consistency;
        case FindingKind::Stale: return Dimension::Currency;
        case FindingKind::Delayed: return Dimension::Timeliness;
        case FindingKind::RuleViolation: return Dimension::Consistency;
        case FindingKind::DuplicateSubset: return Dimension::Uniqueness;
    }
    return Dimension::Consistency;
}

struct Finding {
    FindingKind kind{};
    std::string parameter_id;
    Instant from = 0;  // location start; from == to for single points
    Instant to = 0;
    double magnitude = 0.0;
    Dimension linked = Dimension::Consistency;
    std::string rule_id;                        // rule violations only
    std::optional<int> group;                   // duplicate-subset group id
    std::optional<std::uint64_t> window_index;  // duplicate-subset window
};

/// Detector output: the findings, or a marker that the detector could not run
/// on this input (too few points, nothing configured).
struct DetectionResult {
    bool evaluable = true;
    std::string skip_reason;
    std::vector<Finding> findings;

    static DetectionResult not_evaluable(std::string reason) {
        DetectionResult r;
        r.evaluable = false;
        r.skip_reason = std::move(reason);
        return r;
    }
};

inline nlohmann::json finding_to_json(const Finding& f) {
    nlohmann::json j;
    j["kind"] = std::string(to_string(f.kind));
    j["parameter"] = f.parameter_id;
    j["linked_dimension"] = std::string(to_string(f.linked));
    j["from"] = f.from;
    j["to"] = f.to;
    j["magnitude"] = f.magnitude;
    if (!f.rule_id.empty()) j["rule_id"] = f.rule_id;
    if (f.group) j["group"] = *f.group;
    if (f.window_index) j["window_index"] = *f.window_index;
    return j;
}

inline Finding finding_from_json(const nlohmann::json& j) {
    Finding f;
    if (auto k = finding_kind_from_string(j.at("kind").get<std::string>())) f.kind = *k;
    f.parameter_id = j.at("parameter").get<std::string>();
    if (auto d = dimension_from_string(j.at("linked_dimension").get<std::string>())) f.linked = *d;
    f.from = j.at("from").get<Instant>();
    f.to = j.at("to").get<Instant>();
    f.magnitude = j.at("magnitude").get<double>();
    if (j.contains("rule_id")) f.rule_id = j["rule_id"].get<std::string>();
    if (j.contains("group")) f.group = j["group"].get<int>();
    if (j.contains("window_index")) f.window_index = j["window_index"].get<std::uint64_t>();
    return f;
}

/// Canonical (parameter, kind, location) ordering for deterministic output.
inline void sort_findings(std::vector<Finding>& findings) {
    std::sort(findings.begin(), findings.end(), [](const Finding& a, const Finding& b) {
        if (a.parameter_id != b.parameter_id) return a.parameter_id < b.parameter_id;
        if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
        if (a.from != b.from) return a.from < b.from;
        if (a.to != b.to) return a.to < b.to;
        if (a.rule_id != b.rule_id) return a.rule_id < b.rule_id;
        return a.window_index.value_or(0) < b.window_index.value_or(0);
    });
}

}  // namespace numq
