#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "numq/digest.hpp"
#include "numq/error.hpp"
#include "numq/policy.hpp"
#include "numq/report.hpp"
#include "numq/time.hpp"

#ifndef _WIN32
#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>
#endif

namespace numq {

enum class Verdict { Progress, Prompt, AutoProgress, AutoImprove };

inline std::string_view to_string(Verdict v) {
    switch (v) {
        case Verdict::Progress: return "progress";
        case Verdict::Prompt: return "prompt";
        case Verdict::AutoProgress: return "auto-progress";
        case Verdict::AutoImprove: return "auto-improve";
    }
    return "prompt";
}

enum class Choice { Progress, Improve };

inline std::string_view to_string(Choice c) { return c == Choice::Progress ? "progress" : "improve"; }

inline std::optional<Choice> choice_from_string(std::string_view s) {
    if (s == "progress") return Choice::Progress;
    if (s == "improve") return Choice::Improve;
    return std::nullopt;
}

/// A (parameter, dimension) score that sits below its high boundary, with the
/// policy context needed to rank it.
struct TriggerEntry {
    std::string parameter_id;
    Dimension dimension{};
    std::uint64_t passed = 0;
    std::uint64_t total = 0;
    double proportion = 0.0;
    Band band_value = Band::Fail;
    Impact impact = Impact::Medium;
};

struct GateOutcome {
    Verdict verdict = Verdict::Progress;
    std::vector<TriggerEntry> triggering;     // below-high entries with impact > low
    std::vector<TriggerEntry> waived;         // below-high entries waived as low impact
    std::vector<std::string> not_evaluable;   // informational "param/dimension" labels
    std::string condition_key;
    std::optional<Choice> recorded_choice;    // set on auto-* verdicts
};

/// Digest identifying a gating situation: workflow node, dataset, policy, and
/// the multiset of (parameter, dimension, band) classifications. Scores that
/// move within their band reuse the key; crossing a boundary changes it.
inline std::string condition_key(const QualityReport& report, const GatePolicy& policy,
                                 const std::string& node_id) {
    std::vector<std::string> triples;
    for (const auto& p : report.parameters) {
        for (const auto& [dim, score] : p.scores) {
            const Band b = band(score, policy.lookup(p.parameter_id, dim));
            triples.push_back(p.parameter_id + "\x1f" + std::string(to_string(dim)) + "\x1f" +
                              std::string(to_string(b)));
        }
    }
    std::sort(triples.begin(), triples.end());
    std::string material = node_id + "\x1e" + report.dataset_id + "\x1e" + policy.fingerprint();
    for (const auto& t : triples) {
        material += "\x1e";
        material += t;
    }
    return digest_hex(material);
}

struct DecisionRecord {
    std::string condition_key;
    Choice choice = Choice::Progress;
    Instant decided_at = 0;
    std::string decided_by;
};

inline nlohmann::json decision_to_json(const DecisionRecord& r) {
    return {{"condition_key", r.condition_key},
            {"choice", std::string(to_string(r.choice))},
            {"decided_at", format_rfc3339(r.decided_at)},
            {"decided_by", r.decided_by}};
}

inline DecisionRecord decision_from_json(const nlohmann::json& j) {
    DecisionRecord r;
    r.condition_key = j.at("condition_key").get<std::string>();
    const auto c = choice_from_string(j.at("choice").get<std::string>());
    if (!c) throw DataError("ledger: choice must be progress|improve");
    r.choice = *c;
    const auto at = parse_rfc3339(j.at("decided_at").get<std::string>());
    if (!at) throw DataError("ledger: bad decided_at timestamp");
    r.decided_at = *at;
    r.decided_by = j.value("decided_by", "");
    return r;
}

/// Append-only store of human decisions, persisted as one JSON object per
/// line. Lookup returns the most recent record for a key; earlier records
/// stay in the history. Appends take an advisory exclusive lock on the file.
class DecisionLedger {
public:
    DecisionLedger() = default;

    static DecisionLedger load(const std::filesystem::path& path) {
        DecisionLedger ledger;
        ledger.path_ = path;
        std::ifstream in(path);
        if (!in) return ledger;  // absent file: empty ledger
        std::string line;
        std::uint64_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (line.empty()) continue;
            nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
            if (j.is_discarded())
                throw DataError("ledger line " + std::to_string(line_no) + " is not valid JSON");
            ledger.index_record(decision_from_json(j));
        }
        return ledger;
    }

    const DecisionRecord* lookup(const std::string& key) const {
        auto it = latest_.find(key);
        return it == latest_.end() ? nullptr : &history_[it->second];
    }

    const std::vector<DecisionRecord>& history() const { return history_; }

    std::vector<DecisionRecord> history_for(const std::string& key) const {
        std::vector<DecisionRecord> out;
        for (const auto& r : history_)
            if (r.condition_key == key) out.push_back(r);
        return out;
    }

    /// Persists then indexes the record; on write failure the in-memory state
    /// is unchanged.
    void record(const DecisionRecord& r) {
        if (!path_.empty()) append_line(decision_to_json(r).dump());
        index_record(r);
    }

private:
    void index_record(DecisionRecord r) {
        history_.push_back(std::move(r));
        latest_[history_.back().condition_key] = history_.size() - 1;
    }

    void append_line(const std::string& line) {
#ifndef _WIN32
        const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
        if (fd < 0) throw DataError("cannot open ledger for writing: " + path_.string());
        if (::flock(fd, LOCK_EX) != 0) {
            ::close(fd);
            throw DataError("cannot lock ledger: " + path_.string());
        }
        const std::string payload = line + "\n";
        const ssize_t written = ::write(fd, payload.data(), payload.size());
        ::flock(fd, LOCK_UN);
        ::close(fd);
        if (written != static_cast<ssize_t>(payload.size()))
            throw DataError("short write to ledger: " + path_.string());
#else
        std::ofstream out(path_, std::ios::app);
        if (!out) throw DataError("cannot open ledger for writing: " + path_.string());
        out << line << "\n";
        if (!out) throw DataError("write to ledger failed: " + path_.string());
#endif
    }

    std::filesystem::path path_;
    std::vector<DecisionRecord> history_;
    std::unordered_map<std::string, std::size_t> latest_;
};

/// The decisional step. Every band passing, or every shortfall carrying low
/// impact, progresses outright. Otherwise a recorded decision for the same
/// condition replays automatically, and with no record the caller must
/// prompt. Not-evaluable scores never trigger; they are listed for
/// information only.
inline GateOutcome gate(const QualityReport& report, const GatePolicy& policy,
                        const DecisionLedger& ledger, const std::string& node_id) {
    if (report.parameters.empty()) throw DataError("cannot gate an empty report");

    GateOutcome outcome;
    outcome.condition_key = condition_key(report, policy, node_id);

    for (const auto& p : report.parameters) {
        for (const auto& [dim, score] : p.scores) {
            const PolicyEntry& entry = policy.lookup(p.parameter_id, dim);
            const Band b = band(score, entry);
            if (b == Band::NotEvaluable) {
                outcome.not_evaluable.push_back(p.parameter_id + "/" + std::string(to_string(dim)));
                continue;
            }
            if (b == Band::Pass) continue;
            TriggerEntry t;
            t.parameter_id = p.parameter_id;
            t.dimension = dim;
            t.passed = score.passed;
            t.total = score.total;
            t.proportion = score.proportion();
            t.band_value = b;
            t.impact = entry.impact;
            if (entry.impact == Impact::Low)
                outcome.waived.push_back(std::move(t));
            else
                outcome.triggering.push_back(std::move(t));
        }
    }

    std::sort(outcome.triggering.begin(), outcome.triggering.end(),
              [](const TriggerEntry& a, const TriggerEntry& b) {
                  if (a.impact != b.impact) return static_cast<int>(a.impact) > static_cast<int>(b.impact);
                  if (a.proportion != b.proportion) return a.proportion < b.proportion;
                  if (a.parameter_id != b.parameter_id) return a.parameter_id < b.parameter_id;
                  return static_cast<int>(a.dimension) < static_cast<int>(b.dimension);
              });

    if (outcome.triggering.empty()) {
        outcome.verdict = Verdict::Progress;
        return outcome;
    }
    if (const DecisionRecord* rec = ledger.lookup(outcome.condition_key)) {
        outcome.recorded_choice = rec->choice;
        outcome.verdict =
            rec->choice == Choice::Progress ? Verdict::AutoProgress : Verdict::AutoImprove;
        return outcome;
    }
    outcome.verdict = Verdict::Prompt;
    return outcome;
}

/// Machine-readable prompt payload: what triggered, and the key a decision
/// will be recorded under.
inline nlohmann::json prompt_payload(const GateOutcome& outcome) {
    nlohmann::json j;
    j["condition_key"] = outcome.condition_key;
    nlohmann::json entries = nlohmann::json::array();
    for (const auto& t : outcome.triggering) {
        entries.push_back({{"parameter", t.parameter_id},
                           {"dimension", std::string(to_string(t.dimension))},
                           {"proportion", format_proportion(t.proportion)},
                           {"passed", t.passed},
                           {"total", t.total},
                           {"band", std::string(to_string(t.band_value))},
                           {"impact", std::string(to_string(t.impact))}});
    }
    j["triggering"] = entries;
    j["not_evaluable"] = outcome.not_evaluable;
    return j;
}

}  // namespace numq
