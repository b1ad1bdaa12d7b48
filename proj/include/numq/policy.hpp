#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include <json.hpp>

#include "numq/digest.hpp"
#include "numq/error.hpp"
#include "numq/score.hpp"

namespace numq {

/// How much a (parameter, dimension) pair matters to the downstream workflow.
enum class Impact { Low = 1, Medium = 2, High = 3 };

inline std::string_view to_string(Impact i) {
    switch (i) {
        case Impact::Low: return "low";
        case Impact::Medium: return "medium";
        case Impact::High: return "high";
    }
    return "medium";
}

inline std::optional<Impact> impact_from_string(std::string_view s) {
    if (s == "low") return Impact::Low;
    if (s == "medium") return Impact::Medium;
    if (s == "high") return Impact::High;
    return std::nullopt;
}

/// Classification of a score against the policy's boundaries. Thresholds are
/// inclusive: a score exactly at a boundary lands in the better band.
enum class Band { Pass, Marginal, Fail, NotEvaluable };

inline std::string_view to_string(Band b) {
    switch (b) {
        case Band::Pass: return "pass";
        case Band::Marginal: return "marginal";
        case Band::Fail: return "fail";
        case Band::NotEvaluable: return "not-evaluable";
    }
    return "not-evaluable";
}

struct PolicyEntry {
    Impact impact = Impact::Medium;
    double low_boundary = 0.80;
    double high_boundary = 0.95;

    void validate() const {
        if (!(0.0 <= low_boundary && low_boundary <= high_boundary && high_boundary <= 1.0))
            throw ConfigError("policy entry requires 0 <= low <= high <= 1");
    }
};

struct GatePolicy {
    PolicyEntry defaults{};
    std::map<std::pair<std::string, Dimension>, PolicyEntry> entries;

    const PolicyEntry& lookup(const std::string& parameter_id, Dimension d) const {
        auto it = entries.find({parameter_id, d});
        return it == entries.end() ? defaults : it->second;
    }

    std::string fingerprint() const {
        nlohmann::json j = to_json();
        return digest_hex(j.dump());
    }

    nlohmann::json to_json() const {
        nlohmann::json j;
        j["default"] = {{"impact", std::string(to_string(defaults.impact))},
                        {"low", defaults.low_boundary},
                        {"high", defaults.high_boundary}};
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& [key, e] : entries) {
            arr.push_back({{"parameter", key.first},
                           {"dimension", std::string(to_string(key.second))},
                           {"impact", std::string(to_string(e.impact))},
                           {"low", e.low_boundary},
                           {"high", e.high_boundary}});
        }
        j["entries"] = arr;
        return j;
    }

    static GatePolicy from_json(const nlohmann::json& j) {
        GatePolicy p;
        auto parse_entry = [](const nlohmann::json& e, PolicyEntry base) {
            PolicyEntry out = base;
            if (e.contains("impact")) {
                auto i = impact_from_string(e["impact"].get<std::string>());
                if (!i) throw ConfigError("policy impact must be low|medium|high");
                out.impact = *i;
            }
            if (e.contains("low")) out.low_boundary = e["low"].get<double>();
            if (e.contains("high")) out.high_boundary = e["high"].get<double>();
            out.validate();
            return out;
        };
        if (j.contains("default")) p.defaults = parse_entry(j["default"], PolicyEntry{});
        if (j.contains("entries")) {
            for (const auto& e : j["entries"]) {
                const std::string param = e.at("parameter").get<std::string>();
                const auto dim = dimension_from_string(e.at("dimension").get<std::string>());
                if (!dim) throw ConfigError("policy entry names unknown dimension");
                p.entries[{param, *dim}] = parse_entry(e, p.defaults);
            }
        }
        return p;
    }
};

/// Bands a score against a policy entry; not-evaluable passes through.
inline Band band(const DimensionScore& score, const PolicyEntry& entry) {
    if (!score.evaluable) return Band::NotEvaluable;
    const double p = score.proportion();
    if (p >= entry.high_boundary) return Band::Pass;
    if (p >= entry.low_boundary) return Band::Marginal;
    return Band::Fail;
}

}  // namespace numq
