#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "numq/dataset.hpp"
#include "numq/error.hpp"
#include "numq/time.hpp"

namespace numq {

enum class DataFormat { Csv, JsonLines };

/// Maps file columns / object fields onto the four-column record model.
struct ColumnMapping {
    std::string timestamp = "timestamp";
    std::string parameter = "parameter";
    std::string value = "value";
    std::string arrival = "arrival_timestamp";
};

struct ParseReport {
    std::uint64_t rows_total = 0;
    std::uint64_t rows_ok = 0;
    std::uint64_t row_errors = 0;           // unusable rows, skipped
    std::uint64_t value_parse_warnings = 0; // rows kept with absent value
    std::uint64_t duplicate_rows = 0;       // repeated (parameter, timestamp), rejected
    std::vector<std::string> messages;      // capped detail, one per issue

    void note(std::string msg) {
        if (messages.size() < 100) messages.push_back(std::move(msg));
    }
};

struct ParsedDataset {
    Dataset dataset;
    ParseReport report;
};

namespace detail {

// Timestamp columns must use one representation consistently per file; the
// first parsed row pins it.
enum class TimeColumnFormat { Unknown, EpochMillis, Rfc3339 };

inline bool looks_like_integer(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

inline std::optional<Instant> parse_time_cell(std::string_view cell, TimeColumnFormat& fmt) {
    if (fmt == TimeColumnFormat::Unknown)
        fmt = looks_like_integer(cell) ? TimeColumnFormat::EpochMillis : TimeColumnFormat::Rfc3339;
    if (fmt == TimeColumnFormat::EpochMillis) {
        if (!looks_like_integer(cell)) return std::nullopt;
        Instant v = 0;
        auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) return std::nullopt;
        return v;
    }
    return parse_rfc3339(cell);
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            cells.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(std::move(cur));
    return cells;
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

struct RowAccumulator {
    // parameter -> (timestamp -> point); duplicates rejected on arrival.
    std::map<std::string, std::map<Instant, DataPoint>> series;

    // Returns false when (parameter, timestamp) was already present.
    bool add(const std::string& parameter, DataPoint point) {
        auto& by_ts = series[parameter];
        return by_ts.emplace(point.timestamp, point).second;
    }

    Dataset finish(std::string dataset_id, std::string provenance) const {
        Dataset d;
        d.dataset_id = std::move(dataset_id);
        d.provenance = std::move(provenance);
        for (const auto& [param, by_ts] : series) {
            Series s;
            s.parameter_id = param;
            s.points.reserve(by_ts.size());
            for (const auto& [ts, p] : by_ts) s.points.push_back(p);
            d.series.push_back(std::move(s));
        }
        return d;
    }
};

}  // namespace detail

/// Parses CSV text with header `timestamp,parameter,value[,arrival_timestamp]`
/// (column names adjustable through `mapping`). Rows with unusable timestamps
/// are skipped and counted; unusable numeric cells yield points with an absent
/// value; repeated (parameter, timestamp) rows are rejected.
inline ParsedDataset parse_dataset_csv(std::string_view text, const ColumnMapping& mapping,
                                       std::string dataset_id, std::string provenance = "") {
    using namespace detail;
    ParsedDataset out;
    ParseReport& rep = out.report;

    std::size_t pos = 0;
    auto next_line = [&]() -> std::optional<std::string_view> {
        if (pos >= text.size()) return std::nullopt;
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos) ? text.substr(pos)
                                                                : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
        return line;
    };

    auto header_line = next_line();
    if (!header_line) throw SchemaError("input is empty");
    auto header = split_csv_line(*header_line);
    int ts_col = -1, param_col = -1, value_col = -1, arrival_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name(trim(header[i]));
        if (name == mapping.timestamp) ts_col = static_cast<int>(i);
        else if (name == mapping.parameter) param_col = static_cast<int>(i);
        else if (name == mapping.value) value_col = static_cast<int>(i);
        else if (name == mapping.arrival) arrival_col = static_cast<int>(i);
    }
    if (ts_col < 0 || param_col < 0 || value_col < 0)
        throw SchemaError("header must name columns '" + mapping.timestamp + "', '" +
                          mapping.parameter + "', '" + mapping.value + "'");

    TimeColumnFormat ts_fmt = TimeColumnFormat::Unknown;
    TimeColumnFormat arrival_fmt = TimeColumnFormat::Unknown;
    RowAccumulator acc;
    std::uint64_t line_no = 1;

    while (auto line = next_line()) {
        ++line_no;
        if (trim(*line).empty()) continue;
        ++rep.rows_total;
        auto cells = split_csv_line(*line);
        auto cell = [&](int col) -> std::string_view {
            if (col < 0 || static_cast<std::size_t>(col) >= cells.size()) return {};
            return trim(cells[static_cast<std::size_t>(col)]);
        };

        const auto ts = parse_time_cell(cell(ts_col), ts_fmt);
        if (!ts) {
            ++rep.row_errors;
            rep.note("line " + std::to_string(line_no) + ": unparseable timestamp, row skipped");
            continue;
        }
        const std::string parameter(cell(param_col));
        if (parameter.empty()) {
            ++rep.row_errors;
            rep.note("line " + std::to_string(line_no) + ": missing parameter, row skipped");
            continue;
        }

        DataPoint p;
        p.timestamp = *ts;
        const std::string_view value_cell = cell(value_col);
        if (!value_cell.empty()) {
            double v = 0;
            auto res = std::from_chars(value_cell.data(), value_cell.data() + value_cell.size(), v);
            if (res.ec == std::errc() && res.ptr == value_cell.data() + value_cell.size() &&
                std::isfinite(v)) {
                p.value = v;
            } else {
                ++rep.value_parse_warnings;
                rep.note("line " + std::to_string(line_no) + ": unparseable value, kept as absent");
            }
        }
        if (arrival_col >= 0) {
            const std::string_view arrival_cell = cell(arrival_col);
            if (!arrival_cell.empty()) {
                const auto arrival = parse_time_cell(arrival_cell, arrival_fmt);
                if (!arrival) {
                    ++rep.row_errors;
                    rep.note("line " + std::to_string(line_no) +
                             ": unparseable arrival timestamp, row skipped");
                    continue;
                }
                p.arrival_timestamp = *arrival;
            }
        }

        if (!acc.add(parameter, p)) {
            ++rep.duplicate_rows;
            rep.note("line " + std::to_string(line_no) + ": duplicate (parameter, timestamp), row rejected");
            continue;
        }
        ++rep.rows_ok;
    }

    if (rep.rows_ok == 0) throw SchemaError("no valid rows in input");
    out.dataset = acc.finish(std::move(dataset_id), std::move(provenance));
    return out;
}

/// Parses JSON-lines input: one object per line carrying the same four fields
/// as the CSV model. Timestamps may be integers or RFC 3339 strings, uniformly
/// per field within one file.
inline ParsedDataset parse_dataset_jsonl(std::string_view text, const ColumnMapping& mapping,
                                         std::string dataset_id, std::string provenance = "") {
    using namespace detail;
    ParsedDataset out;
    ParseReport& rep = out.report;
    RowAccumulator acc;

    TimeColumnFormat ts_fmt = TimeColumnFormat::Unknown;
    TimeColumnFormat arrival_fmt = TimeColumnFormat::Unknown;

    auto parse_time_field = [&](const nlohmann::json& v, TimeColumnFormat& fmt) -> std::optional<Instant> {
        if (v.is_number_integer()) {
            if (fmt == TimeColumnFormat::Unknown) fmt = TimeColumnFormat::EpochMillis;
            if (fmt != TimeColumnFormat::EpochMillis) return std::nullopt;
            return v.get<Instant>();
        }
        if (v.is_string()) {
            if (fmt == TimeColumnFormat::Unknown) fmt = TimeColumnFormat::Rfc3339;
            if (fmt != TimeColumnFormat::Rfc3339) return std::nullopt;
            return parse_rfc3339(v.get_ref<const std::string&>());
        }
        return std::nullopt;
    };

    std::size_t pos = 0;
    std::uint64_t line_no = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        std::string_view line = (eol == std::string_view::npos) ? text.substr(pos)
                                                                : text.substr(pos, eol - pos);
        pos = (eol == std::string_view::npos) ? text.size() : eol + 1;
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        ++rep.rows_total;

        nlohmann::json obj = nlohmann::json::parse(line, nullptr, false);
        if (obj.is_discarded() || !obj.is_object()) {
            ++rep.row_errors;
            rep.note("line " + std::to_string(line_no) + ": not a JSON object, row skipped");
            continue;
        }
        if (!obj.contains(mapping.timestamp) || !obj.contains(mapping.parameter)) {
            ++rep.row_errors;
            rep.note("line " + std::to_string(line_no) + ": missing timestamp or parameter, row skipped");
            continue;
        }
        const auto ts = parse_time_field(obj[mapping.timestamp], ts_fmt);
        if (!ts) {
            ++rep.row_errors;
            rep.note("line " + std::to_string(line_no) + ": unparseable timestamp, row skipped");
            continue;
        }
        if (!obj[mapping.parameter].is_string() || obj[mapping.parameter].get_ref<const std::string&>().empty()) {
            ++rep.row_errors;
            rep.note("line " + std::to_string(line_no) + ": missing parameter, row skipped");
            continue;
        }
        const std::string parameter = obj[mapping.parameter].get<std::string>();

        DataPoint p;
        p.timestamp = *ts;
        if (obj.contains(mapping.value) && !obj[mapping.value].is_null()) {
            const auto& v = obj[mapping.value];
            if (v.is_number() && std::isfinite(v.get<double>())) {
                p.value = v.get<double>();
            } else {
                ++rep.value_parse_warnings;
                rep.note("line " + std::to_string(line_no) + ": unparseable value, kept as absent");
            }
        }
        if (obj.contains(mapping.arrival) && !obj[mapping.arrival].is_null()) {
            const auto arrival = parse_time_field(obj[mapping.arrival], arrival_fmt);
            if (!arrival) {
                ++rep.row_errors;
                rep.note("line " + std::to_string(line_no) +
                         ": unparseable arrival timestamp, row skipped");
                continue;
            }
            p.arrival_timestamp = *arrival;
        }

        if (!acc.add(parameter, p)) {
            ++rep.duplicate_rows;
            rep.note("line " + std::to_string(line_no) + ": duplicate (parameter, timestamp), row rejected");
            continue;
        }
        ++rep.rows_ok;
    }

    if (rep.rows_ok == 0) throw SchemaError("no valid rows in input");
    out.dataset = acc.finish(std::move(dataset_id), std::move(provenance));
    return out;
}

inline ParsedDataset parse_dataset(std::string_view text, DataFormat format,
                                   const ColumnMapping& mapping = {}, std::string dataset_id = "dataset",
                                   std::string provenance = "") {
    switch (format) {
        case DataFormat::Csv:
            return parse_dataset_csv(text, mapping, std::move(dataset_id), std::move(provenance));
        case DataFormat::JsonLines:
            return parse_dataset_jsonl(text, mapping, std::move(dataset_id), std::move(provenance));
    }
    throw SchemaError("unknown data format");
}

/// Canonical CSV: fixed four-column header, integer-millisecond timestamps,
/// shortest round-trip value text, series ordered by parameter then time.
inline std::string serialize_csv(const Dataset& d) {
    std::string out = "timestamp,parameter,value,arrival_timestamp\n";
    for (const auto& s : d.series) {
        for (const auto& p : s.points) {
            out += std::to_string(p.timestamp);
            out += ',';
            out += s.parameter_id;
            out += ',';
            if (p.value) out += detail::format_double(*p.value);
            out += ',';
            if (p.arrival_timestamp) out += std::to_string(*p.arrival_timestamp);
            out += '\n';
        }
    }
    return out;
}

inline std::string serialize_jsonl(const Dataset& d) {
    std::string out;
    for (const auto& s : d.series) {
        for (const auto& p : s.points) {
            nlohmann::json obj;
            obj["timestamp"] = p.timestamp;
            obj["parameter"] = s.parameter_id;
            obj["value"] = p.value ? nlohmann::json(*p.value) : nlohmann::json(nullptr);
            obj["arrival_timestamp"] =
                p.arrival_timestamp ? nlohmann::json(*p.arrival_timestamp) : nlohmann::json(nullptr);
            out += obj.dump();
            out += '\n';
        }
    }
    return out;
}

inline DataFormat detect_format_from_path(std::string_view path) {
    auto ends_with = [&](std::string_view suffix) {
        return path.size() >= suffix.size() &&
               path.substr(path.size() - suffix.size()) == suffix;
    };
    if (ends_with(".jsonl") || ends_with(".ndjson") || ends_with(".json")) return DataFormat::JsonLines;
    return DataFormat::Csv;
}

}  // namespace numq
