#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "numq/dataset.hpp"
#include "numq/error.hpp"

namespace numq {

/// Dataset defect classes the injector can plant for ground-truth testing.
enum class AntipatternKind { Gap, Spike, Bias, Drift, DuplicateSubset, Stale, Delay, RuleBreach };

inline std::string_view to_string(AntipatternKind k) {
    switch (k) {
        case AntipatternKind::Gap: return "gap";
        case AntipatternKind::Spike: return "spike";
        case AntipatternKind::Bias: return "bias";
        case AntipatternKind::Drift: return "drift";
        case AntipatternKind::DuplicateSubset: return "duplicate-subset";
        case AntipatternKind::Stale: return "stale";
        case AntipatternKind::Delay: return "delay";
        case AntipatternKind::RuleBreach: return "rule-breach";
    }
    return "unknown";
}

inline std::optional<AntipatternKind> antipattern_kind_from_string(std::string_view s) {
    static constexpr AntipatternKind kinds[] = {
        AntipatternKind::Gap,   AntipatternKind::Spike,          AntipatternKind::Bias,
        AntipatternKind::Drift, AntipatternKind::DuplicateSubset, AntipatternKind::Stale,
        AntipatternKind::Delay, AntipatternKind::RuleBreach,
    };
    for (AntipatternKind k : kinds)
        if (to_string(k) == s) return k;
    return std::nullopt;
}

struct AntipatternSpec {
    AntipatternKind kind{};
    std::string parameter;
    std::uint64_t seed = 0;
    nlohmann::json params = nlohmann::json::object();

    static AntipatternSpec from_json(const nlohmann::json& j) {
        AntipatternSpec spec;
        const auto kind = antipattern_kind_from_string(j.at("kind").get<std::string>());
        if (!kind) throw ConfigError("unknown antipattern kind '" + j.at("kind").get<std::string>() + "'");
        spec.kind = *kind;
        spec.parameter = j.at("parameter").get<std::string>();
        if (j.contains("seed")) spec.seed = j["seed"].get<std::uint64_t>();
        if (j.contains("params")) spec.params = j["params"];
        return spec;
    }
};

struct InjectionResult {
    Dataset dataset;
    nlohmann::json annotation;  // machine-readable record of what changed
};

namespace detail {

// Target indices: explicit "indices", a "start_index"/"length" run, or
// "count" seeded-random distinct picks. Always returned sorted.
inline std::vector<std::size_t> resolve_indices(const nlohmann::json& params, std::size_t series_size,
                                                std::uint64_t seed) {
    std::vector<std::size_t> indices;
    if (params.contains("indices")) {
        for (const auto& v : params["indices"]) {
            const auto i = v.get<std::int64_t>();
            if (i < 0 || static_cast<std::size_t>(i) >= series_size)
                throw ConfigError("index " + std::to_string(i) + " out of range");
            indices.push_back(static_cast<std::size_t>(i));
        }
        std::sort(indices.begin(), indices.end());
        indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
        if (indices.empty()) throw ConfigError("indices must not be empty");
        return indices;
    }
    if (params.contains("start_index") || params.contains("length")) {
        const auto start = params.value("start_index", std::int64_t{0});
        const auto length = params.at("length").get<std::int64_t>();
        if (start < 0 || length < 1 || static_cast<std::size_t>(start + length) > series_size)
            throw ConfigError("start_index/length out of range");
        for (std::int64_t i = start; i < start + length; ++i)
            indices.push_back(static_cast<std::size_t>(i));
        return indices;
    }
    if (params.contains("count")) {
        const auto count = params.at("count").get<std::int64_t>();
        if (count < 1 || static_cast<std::size_t>(count) > series_size)
            throw ConfigError("count out of range");
        std::vector<std::size_t> all(series_size);
        for (std::size_t i = 0; i < series_size; ++i) all[i] = i;
        std::mt19937_64 rng(seed);
        for (std::size_t i = 0; i < static_cast<std::size_t>(count); ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, series_size - 1);
            std::swap(all[i], all[pick(rng)]);
        }
        indices.assign(all.begin(), all.begin() + count);
        std::sort(indices.begin(), indices.end());
        return indices;
    }
    throw ConfigError("spec needs 'indices', 'start_index'+'length', or 'count'");
}

inline nlohmann::json timestamps_of(const Series& s, const std::vector<std::size_t>& indices) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i : indices) arr.push_back(s.points[i].timestamp);
    return arr;
}

inline nlohmann::json indices_json(const std::vector<std::size_t>& indices) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t i : indices) arr.push_back(i);
    return arr;
}

}  // namespace detail

/// Applies one antipattern to a copy of the dataset and reports exactly what
/// changed. Deterministic for equal inputs and seeds; the input dataset is
/// never modified.
inline InjectionResult inject_antipattern(const Dataset& input, const AntipatternSpec& spec) {
    using namespace detail;
    InjectionResult out;
    out.dataset = input;

    Series* target = nullptr;
    for (auto& s : out.dataset.series)
        if (s.parameter_id == spec.parameter) target = &s;
    if (!target) throw DataError("antipattern spec references unknown parameter '" + spec.parameter + "'");

    nlohmann::json& note = out.annotation;
    note["kind"] = std::string(to_string(spec.kind));
    note["parameter"] = spec.parameter;
    note["seed"] = spec.seed;

    switch (spec.kind) {
        case AntipatternKind::Gap: {
            const auto indices = resolve_indices(spec.params, target->points.size(), spec.seed);
            if (indices.size() >= target->points.size())
                throw ConfigError("gap would remove the whole series");
            note["removed_indices"] = indices_json(indices);
            note["removed_timestamps"] = timestamps_of(*target, indices);
            std::vector<DataPoint> kept;
            kept.reserve(target->points.size() - indices.size());
            std::size_t next = 0;
            for (std::size_t i = 0; i < target->points.size(); ++i) {
                if (next < indices.size() && indices[next] == i) {
                    ++next;
                    continue;
                }
                kept.push_back(target->points[i]);
            }
            target->points = std::move(kept);
            break;
        }
        case AntipatternKind::Spike: {
            const auto index = spec.params.at("index").get<std::int64_t>();
            const double magnitude = spec.params.at("magnitude").get<double>();
            if (index < 0 || static_cast<std::size_t>(index) >= target->points.size())
                throw ConfigError("spike index out of range");
            DataPoint& p = target->points[static_cast<std::size_t>(index)];
            if (!p.has_finite_value()) throw ConfigError("spike target has no value");
            const double original = *p.value;
            const double spiked = original + magnitude;
            if (!std::isfinite(spiked)) throw ConfigError("spike produces non-finite value");
            p.value = spiked;
            note["index"] = index;
            note["timestamp"] = p.timestamp;
            note["magnitude"] = magnitude;
            note["original_value"] = original;
            note["new_value"] = spiked;
            break;
        }
        case AntipatternKind::Bias: {
            const double offset = spec.params.at("offset").get<double>();
            const auto start = spec.params.value("start_index", std::int64_t{0});
            const auto length = spec.params.value(
                "length", static_cast<std::int64_t>(target->points.size()) - start);
            if (start < 0 || length < 1 ||
                static_cast<std::size_t>(start + length) > target->points.size())
                throw ConfigError("bias start_index/length out of range");
            std::uint64_t changed = 0;
            for (std::int64_t i = start; i < start + length; ++i) {
                DataPoint& p = target->points[static_cast<std::size_t>(i)];
                if (!p.has_finite_value()) continue;
                const double v = *p.value + offset;
                if (!std::isfinite(v)) throw ConfigError("bias produces non-finite value");
                p.value = v;
                ++changed;
            }
            note["offset"] = offset;
            note["start_index"] = start;
            note["length"] = length;
            note["changed_points"] = changed;
            note["from"] = target->points[static_cast<std::size_t>(start)].timestamp;
            note["to"] = target->points[static_cast<std::size_t>(start + length - 1)].timestamp;
            break;
        }
        case AntipatternKind::Drift: {
            const double slope = spec.params.at("slope_per_ms").get<double>();
            const auto start = spec.params.value("start_index", std::int64_t{0});
            if (start < 0 || static_cast<std::size_t>(start) >= target->points.size())
                throw ConfigError("drift start_index out of range");
            const Instant t0 = target->points[static_cast<std::size_t>(start)].timestamp;
            std::uint64_t changed = 0;
            for (std::size_t i = static_cast<std::size_t>(start); i < target->points.size(); ++i) {
                DataPoint& p = target->points[i];
                if (!p.has_finite_value()) continue;
                const double v = *p.value + slope * static_cast<double>(p.timestamp - t0);
                if (!std::isfinite(v)) throw ConfigError("drift produces non-finite value");
                p.value = v;
                ++changed;
            }
            note["slope_per_ms"] = slope;
            note["start_index"] = start;
            note["changed_points"] = changed;
            note["from"] = t0;
            note["to"] = target->points.back().timestamp;
            break;
        }
        case AntipatternKind::DuplicateSubset: {
            const auto start = spec.params.value("start_index", std::int64_t{0});
            const auto length = spec.params.at("length").get<std::int64_t>();
            const std::string target_parameter = spec.params.at("target_parameter").get<std::string>();
            if (start < 0 || length < 1 ||
                static_cast<std::size_t>(start + length) > target->points.size())
                throw ConfigError("duplicate-subset start_index/length out of range");
            if (out.dataset.find_series(target_parameter))
                throw ConfigError("target parameter '" + target_parameter + "' already exists");
            Series copy;
            copy.parameter_id = target_parameter;
            copy.unit = target->unit;
            copy.points.assign(target->points.begin() + start, target->points.begin() + start + length);
            note["source_parameter"] = spec.parameter;
            note["target_parameter"] = target_parameter;
            note["start_index"] = start;
            note["length"] = length;
            note["from"] = copy.points.front().timestamp;
            note["to"] = copy.points.back().timestamp;
            out.dataset.series.push_back(std::move(copy));
            out.dataset.sort_canonical();
            break;
        }
        case AntipatternKind::Stale: {
            const auto count = spec.params.at("count").get<std::int64_t>();
            const auto age_ms = spec.params.at("age_ms").get<Millis>();
            const auto spacing = spec.params.value("spacing_ms", Millis{1000});
            if (count < 1) throw ConfigError("stale count must be >= 1");
            if (age_ms <= 0 || spacing <= 0) throw ConfigError("stale age_ms/spacing_ms must be > 0");
            if (target->points.empty()) throw ConfigError("stale target series is empty");
            double value;
            if (spec.params.contains("value")) {
                value = spec.params["value"].get<double>();
            } else {
                const DataPoint* first_present = nullptr;
                for (const auto& p : target->points)
                    if (p.has_finite_value()) {
                        first_present = &p;
                        break;
                    }
                if (!first_present) throw ConfigError("stale target has no value to copy");
                value = *first_present->value;
            }
            if (!std::isfinite(value)) throw ConfigError("stale value must be finite");
            const Instant first_ts = target->points.front().timestamp;
            std::vector<DataPoint> prepended;
            nlohmann::json added = nlohmann::json::array();
            for (std::int64_t j = count - 1; j >= 0; --j) {
                DataPoint p;
                p.timestamp = first_ts - age_ms - j * spacing;
                p.value = value;
                prepended.push_back(p);
            }
            for (const auto& p : prepended) added.push_back(p.timestamp);
            target->points.insert(target->points.begin(), prepended.begin(), prepended.end());
            note["count"] = count;
            note["age_ms"] = age_ms;
            note["spacing_ms"] = spacing;
            note["value"] = value;
            note["added_timestamps"] = added;
            break;
        }
        case AntipatternKind::Delay: {
            const auto delay_ms = spec.params.at("delay_ms").get<Millis>();
            if (delay_ms < 0) throw ConfigError("delay_ms must be >= 0");
            const auto indices = resolve_indices(spec.params, target->points.size(), spec.seed);
            for (std::size_t i : indices) {
                DataPoint& p = target->points[i];
                p.arrival_timestamp = p.timestamp + delay_ms;
            }
            note["delay_ms"] = delay_ms;
            note["indices"] = indices_json(indices);
            note["timestamps"] = timestamps_of(*target, indices);
            break;
        }
        case AntipatternKind::RuleBreach: {
            const double value = spec.params.at("value").get<double>();
            if (!std::isfinite(value)) throw ConfigError("rule-breach value must be finite");
            const auto indices = resolve_indices(spec.params, target->points.size(), spec.seed);
            nlohmann::json originals = nlohmann::json::array();
            for (std::size_t i : indices) {
                DataPoint& p = target->points[i];
                originals.push_back(p.value ? nlohmann::json(*p.value) : nlohmann::json(nullptr));
                p.value = value;
            }
            note["value"] = value;
            note["indices"] = indices_json(indices);
            note["timestamps"] = timestamps_of(*target, indices);
            note["original_values"] = originals;
            break;
        }
    }
    return out;
}

}  // namespace numq
