#pragma once

#include <cstdint>
#include <cstdlib>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "numq/digest.hpp"
#include "numq/error.hpp"
#include "numq/io.hpp"
#include "numq/policy.hpp"
#include "numq/reference.hpp"
#include "numq/rules.hpp"

namespace numq {

struct DetectorSettings {
    double z_threshold = 3.5;
    std::optional<double> bias_threshold;      // default: per-parameter accuracy tolerance
    std::optional<double> drift_threshold;     // per ms; expert-supplied, no default
};

struct LatencyRecord {
    std::string parameter_id;
    Instant timestamp = 0;
    Millis latency_ms = 0;
};

/// Everything an evaluation run needs besides the dataset itself.
struct EvalConfig {
    std::optional<Instant> as_of;
    std::optional<ExpectedGrid> grid;
    ReferenceSpec reference;
    RuleSet rules;
    std::uint64_t uniqueness_window = 16;
    Millis clock_skew_ms = 0;
    std::optional<Millis> latency_budget;
    std::vector<LatencyRecord> latency_log;
    DetectorSettings detectors;
    std::optional<GatePolicy> policy;

    const ReferenceEntry& resolve(const std::string& parameter_id) const {
        return reference.resolve(parameter_id);
    }

    /// Stable digest over the evaluation inputs: reference spec, rules, grid,
    /// uniqueness window. Reports carry it so a gate decision can tell apart
    /// evaluations made under different configurations.
    std::string fingerprint() const;
};

namespace detail {

inline Instant require_instant(const nlohmann::json& v, const char* what) {
    if (v.is_number_integer()) return v.get<Instant>();
    if (v.is_string()) {
        auto t = parse_instant(v.get_ref<const std::string&>());
        if (t) return *t;
    }
    throw ConfigError(std::string(what) + ": expected epoch milliseconds or RFC 3339 string");
}

inline Rule parse_rule(const nlohmann::json& j) {
    Rule r;
    r.id = j.at("id").get<std::string>();
    if (j.contains("scope")) r.scope = j["scope"].get<std::string>();
    const auto& pred = j.at("predicate");
    const std::string type = pred.at("type").get<std::string>();
    if (type == "range") {
        RangePredicate p;
        p.min = pred.at("min").get<double>();
        p.max = pred.at("max").get<double>();
        if (p.min > p.max) throw ConfigError("rule '" + r.id + "': range min exceeds max");
        r.predicate = p;
    } else if (type == "max_decimal_places") {
        MaxDecimalPlacesPredicate p;
        p.places = pred.at("places").get<int>();
        if (p.places < 0) throw ConfigError("rule '" + r.id + "': places must be >= 0");
        r.predicate = p;
    } else if (type == "unit_equals") {
        r.predicate = UnitEqualsPredicate{pred.at("unit").get<std::string>()};
    } else if (type == "monotone_nondecreasing") {
        r.predicate = MonotoneNondecreasingPredicate{};
    } else if (type == "expression") {
        auto expr = std::make_shared<Expression>(
            Expression::compile(pred.at("expr").get<std::string>()));
        r.predicate = ExpressionPredicate{std::move(expr)};
    } else {
        throw ConfigError("rule '" + r.id + "': unknown predicate type '" + type + "'");
    }
    return r;
}

inline nlohmann::json rule_to_canonical_json(const Rule& r) {
    nlohmann::json j;
    j["id"] = r.id;
    j["scope"] = r.scope;
    nlohmann::json p;
    std::visit(
        [&](const auto& pred) {
            using T = std::decay_t<decltype(pred)>;
            if constexpr (std::is_same_v<T, RangePredicate>) {
                p = {{"type", "range"}, {"min", pred.min}, {"max", pred.max}};
            } else if constexpr (std::is_same_v<T, MaxDecimalPlacesPredicate>) {
                p = {{"type", "max_decimal_places"}, {"places", pred.places}};
            } else if constexpr (std::is_same_v<T, UnitEqualsPredicate>) {
                p = {{"type", "unit_equals"}, {"unit", pred.unit}};
            } else if constexpr (std::is_same_v<T, MonotoneNondecreasingPredicate>) {
                p = {{"type", "monotone_nondecreasing"}};
            } else {
                p = {{"type", "expression"}, {"expr", pred.expr->source()}};
            }
        },
        r.predicate);
    j["predicate"] = p;
    return j;
}

inline void apply_entry_overrides(ReferenceEntry& e, const nlohmann::json& j,
                                  const std::string& parameter) {
    if (j.contains("unit")) e.unit = j["unit"].get<std::string>();
    if (j.contains("accuracy_tolerance")) e.accuracy_tolerance = j["accuracy_tolerance"].get<double>();
    if (j.contains("distance_mode")) {
        const std::string mode = j["distance_mode"].get<std::string>();
        if (mode == "absolute") e.distance_mode = DistanceMode::Absolute;
        else if (mode == "relative") e.distance_mode = DistanceMode::Relative;
        else throw ConfigError("distance_mode must be absolute|relative for '" + parameter + "'");
    }
    if (j.contains("freshness_horizon_ms"))
        e.freshness_horizon = j["freshness_horizon_ms"].get<Millis>();
    if (j.contains("delay_budget_ms")) e.delay_budget = j["delay_budget_ms"].get<Millis>();
    if (j.contains("precision_threshold")) e.precision_threshold = j["precision_threshold"].get<double>();
    if (j.contains("precision_grouping")) {
        const auto& g = j["precision_grouping"];
        if (g.is_string() && g.get<std::string>() == "consecutive") {
            e.precision_grouping = PrecisionGrouping::Consecutive;
        } else if (g.is_object() && g.contains("window_ms")) {
            e.precision_grouping = PrecisionGrouping::Window;
            e.precision_window_ms = g["window_ms"].get<Millis>();
        } else {
            throw ConfigError("precision_grouping must be \"consecutive\" or {\"window_ms\": n} for '" +
                              parameter + "'");
        }
    }
    if (j.contains("true_values")) {
        for (const auto& pair : j["true_values"]) {
            if (!pair.is_array() || pair.size() != 2)
                throw ConfigError("true_values entries must be [timestamp, value] pairs for '" +
                                  parameter + "'");
            e.true_values[require_instant(pair[0], "true_values timestamp")] = pair[1].get<double>();
        }
    }
}

}  // namespace detail

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot read file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Parses the evaluation configuration document. `base_dir` anchors relative
/// paths for side files (reference CSV, latency log).
inline EvalConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir = ".") {
    using namespace detail;
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    EvalConfig cfg;

    if (j.contains("as_of")) cfg.as_of = require_instant(j["as_of"], "as_of");
    if (j.contains("grid")) {
        const auto& g = j["grid"];
        ExpectedGrid grid;
        grid.start = require_instant(g.at("start"), "grid.start");
        grid.end = require_instant(g.at("end"), "grid.end");
        grid.interval = g.at("interval_ms").get<Millis>();
        grid.validate();
        cfg.grid = grid;
    }
    if (j.contains("defaults")) apply_entry_overrides(cfg.reference.defaults, j["defaults"], "<defaults>");
    cfg.reference.defaults.validate("<defaults>");

    if (j.contains("parameters")) {
        for (const auto& [param, overrides] : j["parameters"].items()) {
            ReferenceEntry e = cfg.reference.defaults;
            apply_entry_overrides(e, overrides, param);
            e.validate(param);
            cfg.reference.parameters[param] = std::move(e);
        }
    }

    if (j.contains("reference_file")) {
        const auto path = base_dir / j["reference_file"].get<std::string>();
        const std::string text = read_file(path);
        auto parsed = parse_dataset(text, detect_format_from_path(path.string()), {}, "reference");
        for (const auto& s : parsed.dataset.series) {
            ReferenceEntry& e = cfg.reference.parameters.try_emplace(s.parameter_id, cfg.reference.defaults)
                                    .first->second;
            for (const auto& p : s.points)
                if (p.has_finite_value()) e.true_values[p.timestamp] = *p.value;
            e.validate(s.parameter_id);
        }
    }

    if (j.contains("rules"))
        for (const auto& r : j["rules"]) cfg.rules.push_back(parse_rule(r));

    if (j.contains("uniqueness_window")) {
        const auto w = j["uniqueness_window"].get<std::int64_t>();
        if (w < 1) throw ConfigError("uniqueness_window must be >= 1");
        cfg.uniqueness_window = static_cast<std::uint64_t>(w);
    }
    if (j.contains("clock_skew_ms")) cfg.clock_skew_ms = j["clock_skew_ms"].get<Millis>();

    if (j.contains("accessibility")) {
        const auto& a = j["accessibility"];
        if (a.contains("latency_budget_ms")) cfg.latency_budget = a["latency_budget_ms"].get<Millis>();
        if (a.contains("latency_log")) {
            for (const auto& rec : a["latency_log"]) {
                LatencyRecord lr;
                lr.parameter_id = rec.at("parameter").get<std::string>();
                lr.timestamp = require_instant(rec.at("timestamp"), "latency_log timestamp");
                lr.latency_ms = rec.at("latency_ms").get<Millis>();
                cfg.latency_log.push_back(std::move(lr));
            }
        }
    }

    if (j.contains("detectors")) {
        const auto& d = j["detectors"];
        if (d.contains("z_threshold")) {
            cfg.detectors.z_threshold = d["z_threshold"].get<double>();
            if (cfg.detectors.z_threshold <= 0) throw ConfigError("z_threshold must be > 0");
        }
        if (d.contains("bias_threshold")) cfg.detectors.bias_threshold = d["bias_threshold"].get<double>();
        if (d.contains("drift_threshold")) cfg.detectors.drift_threshold = d["drift_threshold"].get<double>();
    }

    if (j.contains("policy")) cfg.policy = GatePolicy::from_json(j["policy"]);
    return cfg;
}

inline EvalConfig load_config(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw ConfigError("config is not valid JSON: " + path.string());
    return parse_config(j, path.parent_path().empty() ? "." : path.parent_path());
}

inline std::string EvalConfig::fingerprint() const {
    nlohmann::json j;
    if (grid) j["grid"] = {{"start", grid->start}, {"end", grid->end}, {"interval_ms", grid->interval}};
    j["uniqueness_window"] = uniqueness_window;
    j["clock_skew_ms"] = clock_skew_ms;

    auto entry_json = [](const ReferenceEntry& e) {
        nlohmann::json out;
        out["unit"] = e.unit;
        out["accuracy_tolerance"] = e.accuracy_tolerance;
        out["distance_mode"] = std::string(to_string(e.distance_mode));
        if (e.freshness_horizon) out["freshness_horizon_ms"] = *e.freshness_horizon;
        if (e.delay_budget) out["delay_budget_ms"] = *e.delay_budget;
        if (e.precision_threshold) out["precision_threshold"] = *e.precision_threshold;
        out["precision_grouping"] = e.precision_grouping == PrecisionGrouping::Consecutive
                                        ? nlohmann::json("consecutive")
                                        : nlohmann::json({{"window_ms", e.precision_window_ms}});
        nlohmann::json tv = nlohmann::json::array();
        for (const auto& [ts, v] : e.true_values) tv.push_back({ts, v});
        out["true_values"] = tv;
        return out;
    };
    j["defaults"] = entry_json(reference.defaults);
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [name, e] : reference.parameters) params[name] = entry_json(e);
    j["parameters"] = params;

    nlohmann::json rules_json = nlohmann::json::array();
    for (const auto& r : rules) rules_json.push_back(detail::rule_to_canonical_json(r));
    j["rules"] = rules_json;

    return digest_hex(j.dump());
}

/// Evaluation clock: NUMQ_AS_OF beats the config, which beats the system time.
inline Instant resolve_as_of(const std::optional<Instant>& config_as_of) {
    if (const char* env = std::getenv("NUMQ_AS_OF")) {
        auto t = parse_instant(env);
        if (!t) throw ConfigError("NUMQ_AS_OF is not a valid timestamp");
        return *t;
    }
    if (config_as_of) return *config_as_of;
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

}  // namespace numq
