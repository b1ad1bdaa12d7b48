#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "numq/error.hpp"
#include "numq/findings.hpp"
#include "numq/policy.hpp"
#include "numq/score.hpp"
#include "numq/time.hpp"

namespace numq {

struct ParameterScores {
    std::string parameter_id;
    std::uint64_t value_count = 0;  // present values; the aggregation weight
    std::map<Dimension, DimensionScore> scores;
};

/// Value-count-weighted mean of the evaluable per-parameter proportions.
struct AggregateScore {
    Dimension dimension{};
    bool evaluable = false;
    double proportion = 0.0;
    std::uint64_t weight = 0;
};

struct QualityReport {
    std::string dataset_id;
    Instant evaluated_at = 0;
    std::string config_fingerprint;
    std::vector<ParameterScores> parameters;  // sorted by parameter_id
    std::map<Dimension, AggregateScore> aggregates;
    std::vector<Finding> findings;
    std::vector<std::string> warnings;

    const ParameterScores* find_parameter(const std::string& id) const {
        for (const auto& p : parameters)
            if (p.parameter_id == id) return &p;
        return nullptr;
    }
};

inline nlohmann::json score_to_json(const DimensionScore& s) {
    nlohmann::json j;
    j["evaluable"] = s.evaluable;
    if (s.evaluable) {
        j["passed"] = s.passed;
        j["total"] = s.total;
        j["proportion"] = format_proportion(s.proportion());
    } else {
        j["reason"] = s.skip_reason;
    }
    if (!s.auxiliary.empty()) j["auxiliary"] = s.auxiliary;
    return j;
}

inline DimensionScore score_from_json(Dimension d, const nlohmann::json& j) {
    DimensionScore s;
    s.dimension = d;
    s.evaluable = j.at("evaluable").get<bool>();
    if (s.evaluable) {
        s.passed = j.at("passed").get<std::uint64_t>();
        s.total = j.at("total").get<std::uint64_t>();
    } else if (j.contains("reason")) {
        s.skip_reason = j["reason"].get<std::string>();
    }
    if (j.contains("auxiliary")) s.auxiliary = j["auxiliary"];
    return s;
}

inline nlohmann::json report_to_json(const QualityReport& r) {
    nlohmann::json j;
    j["dataset_id"] = r.dataset_id;
    j["evaluated_at"] = format_rfc3339(r.evaluated_at);
    j["config_fingerprint"] = r.config_fingerprint;

    nlohmann::json params = nlohmann::json::object();
    for (const auto& p : r.parameters) {
        nlohmann::json scores = nlohmann::json::object();
        for (const auto& [dim, score] : p.scores)
            scores[std::string(to_string(dim))] = score_to_json(score);
        scores["value_count"] = p.value_count;
        params[p.parameter_id] = scores;
    }
    j["parameters"] = params;

    nlohmann::json aggregates = nlohmann::json::object();
    for (const auto& [dim, agg] : r.aggregates) {
        nlohmann::json a;
        a["evaluable"] = agg.evaluable;
        if (agg.evaluable) {
            a["proportion"] = format_proportion(agg.proportion);
            a["weight"] = agg.weight;
        }
        aggregates[std::string(to_string(dim))] = a;
    }
    j["aggregates"] = aggregates;

    nlohmann::json findings = nlohmann::json::array();
    for (const auto& f : r.findings) findings.push_back(finding_to_json(f));
    j["findings"] = findings;
    j["warnings"] = r.warnings;
    return j;
}

inline QualityReport report_from_json(const nlohmann::json& j) {
    QualityReport r;
    r.dataset_id = j.at("dataset_id").get<std::string>();
    const auto at = parse_rfc3339(j.at("evaluated_at").get<std::string>());
    if (!at) throw DataError("report: bad evaluated_at timestamp");
    r.evaluated_at = *at;
    r.config_fingerprint = j.at("config_fingerprint").get<std::string>();

    for (const auto& [param, scores] : j.at("parameters").items()) {
        ParameterScores p;
        p.parameter_id = param;
        if (scores.contains("value_count")) p.value_count = scores["value_count"].get<std::uint64_t>();
        for (Dimension d : kAllDimensions) {
            const std::string key(to_string(d));
            if (scores.contains(key)) p.scores[d] = score_from_json(d, scores[key]);
        }
        r.parameters.push_back(std::move(p));
    }
    std::sort(r.parameters.begin(), r.parameters.end(),
              [](const ParameterScores& a, const ParameterScores& b) {
                  return a.parameter_id < b.parameter_id;
              });

    if (j.contains("aggregates")) {
        for (const auto& [key, a] : j["aggregates"].items()) {
            const auto dim = dimension_from_string(key);
            if (!dim) continue;
            AggregateScore agg;
            agg.dimension = *dim;
            agg.evaluable = a.at("evaluable").get<bool>();
            if (agg.evaluable) {
                agg.proportion = std::stod(a.at("proportion").get<std::string>());
                agg.weight = a.at("weight").get<std::uint64_t>();
            }
            r.aggregates[*dim] = agg;
        }
    }
    if (j.contains("findings"))
        for (const auto& f : j["findings"]) r.findings.push_back(finding_from_json(f));
    if (j.contains("warnings")) r.warnings = j["warnings"].get<std::vector<std::string>>();
    return r;
}

/// One row per (parameter, dimension): proportion, exact counts, band when a
/// policy is supplied, and how many findings degrade that cell.
inline std::string render_report_table(const QualityReport& r, const GatePolicy* policy = nullptr) {
    std::string out;
    char line[256];

    out += "dataset: " + r.dataset_id + "\n";
    out += "evaluated_at: " + format_rfc3339(r.evaluated_at) + "\n";
    out += "config_fingerprint: " + r.config_fingerprint + "\n\n";

    std::snprintf(line, sizeof(line), "%-16s %-14s %-10s %15s %-10s %8s\n", "parameter",
                  "dimension", "score", "m/n", policy ? "band" : "", "findings");
    out += line;
    out += std::string(80, '-') + "\n";

    for (const auto& p : r.parameters) {
        for (Dimension d : kAllDimensions) {
            auto it = p.scores.find(d);
            if (it == p.scores.end()) continue;
            const DimensionScore& s = it->second;
            std::uint64_t finding_count = 0;
            for (const auto& f : r.findings)
                if (f.parameter_id == p.parameter_id && f.linked == d) ++finding_count;

            std::string score_text = s.evaluable ? format_proportion(s.proportion()) : "n/a";
            std::string ratio = s.evaluable
                                    ? std::to_string(s.passed) + "/" + std::to_string(s.total)
                                    : "n/a";
            std::string band_text;
            if (policy) band_text = std::string(to_string(band(s, policy->lookup(p.parameter_id, d))));
            std::snprintf(line, sizeof(line), "%-16s %-14s %-10s %15s %-10s %8llu\n",
                          p.parameter_id.c_str(), std::string(to_string(d)).c_str(),
                          score_text.c_str(), ratio.c_str(), band_text.c_str(),
                          static_cast<unsigned long long>(finding_count));
            out += line;
        }
    }

    out += "\naggregates (value-count weighted):\n";
    for (const auto& [dim, agg] : r.aggregates) {
        std::snprintf(line, sizeof(line), "  %-14s %s\n", std::string(to_string(dim)).c_str(),
                      agg.evaluable ? format_proportion(agg.proportion).c_str() : "n/a");
        out += line;
    }

    if (!r.findings.empty()) {
        out += "\nfindings:\n";
        for (const auto& f : r.findings) {
            const std::string rule_suffix = f.rule_id.empty() ? "" : " rule=" + f.rule_id;
            std::snprintf(line, sizeof(line), "  %-16s %-16s %s..%s magnitude=%g%s\n",
                          std::string(to_string(f.kind)).c_str(), f.parameter_id.c_str(),
                          format_rfc3339(f.from).c_str(), format_rfc3339(f.to).c_str(), f.magnitude,
                          rule_suffix.c_str());
            out += line;
        }
    }

    if (!r.warnings.empty()) {
        out += "\nwarnings:\n";
        for (const auto& w : r.warnings) out += "  " + w + "\n";
    }
    return out;
}

}  // namespace numq
