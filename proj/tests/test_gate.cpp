#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <random>

#include "numq/gate.hpp"

using namespace numq;
namespace fs = std::filesystem;

namespace {

DimensionScore score_of(Dimension d, std::uint64_t m, std::uint64_t n) {
    return DimensionScore::of(d, m, n);
}

QualityReport small_report(std::uint64_t accuracy_m = 100, std::uint64_t completeness_m = 100) {
    QualityReport r;
    r.dataset_id = "ds";
    r.evaluated_at = 1'700'000'000'000;
    r.config_fingerprint = "cafebabecafebabe";
    ParameterScores p;
    p.parameter_id = "temp";
    p.value_count = 100;
    p.scores[Dimension::Accuracy] = score_of(Dimension::Accuracy, accuracy_m, 100);
    p.scores[Dimension::Completeness] = score_of(Dimension::Completeness, completeness_m, 100);
    p.scores[Dimension::Currency] = DimensionScore::not_evaluable(Dimension::Currency, "unset");
    r.parameters.push_back(std::move(p));
    return r;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("numq_gate_test_" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { std::error_code ec; fs::remove_all(path, ec); }
};

}  // namespace

TEST_CASE("band classification is inclusive at both boundaries") {
    PolicyEntry entry;  // low 0.80, high 0.95
    CHECK(band(score_of(Dimension::Accuracy, 100, 100), entry) == Band::Pass);
    CHECK(band(score_of(Dimension::Accuracy, 90, 100), entry) == Band::Marginal);
    CHECK(band(score_of(Dimension::Accuracy, 95, 100), entry) == Band::Pass);      // exactly high
    CHECK(band(score_of(Dimension::Accuracy, 80, 100), entry) == Band::Marginal);  // exactly low
    CHECK(band(score_of(Dimension::Accuracy, 79, 100), entry) == Band::Fail);
    CHECK(band(DimensionScore::not_evaluable(Dimension::Accuracy, "x"), entry) ==
          Band::NotEvaluable);
}

TEST_CASE("band boundaries hold at exact threshold values across many ratios") {
    std::mt19937_64 rng(83);
    std::uniform_int_distribution<std::uint64_t> n_pick(1, 1000);
    for (int iter = 0; iter < 500; ++iter) {
        const std::uint64_t n = n_pick(rng);
        std::uniform_int_distribution<std::uint64_t> m_pick(0, n);
        const std::uint64_t m = m_pick(rng);
        PolicyEntry entry;
        entry.low_boundary = static_cast<double>(m) / static_cast<double>(n);
        entry.high_boundary = 1.0;
        // a score exactly at the low boundary is marginal, never fail
        const Band b = band(score_of(Dimension::Accuracy, m, n), entry);
        CHECK((b == Band::Marginal || b == Band::Pass));
    }
}

TEST_CASE("policy lookup falls back to defaults and validates boundaries") {
    GatePolicy policy;
    policy.entries[{"temp", Dimension::Accuracy}] = PolicyEntry{Impact::High, 0.9, 0.99};
    CHECK(policy.lookup("temp", Dimension::Accuracy).impact == Impact::High);
    CHECK(policy.lookup("temp", Dimension::Completeness).impact == Impact::Medium);
    CHECK(policy.lookup("other", Dimension::Accuracy).low_boundary == 0.80);

    PolicyEntry bad{Impact::Low, 0.9, 0.5};
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("policy json round-trip preserves the fingerprint") {
    GatePolicy policy;
    policy.defaults = PolicyEntry{Impact::Medium, 0.7, 0.9};
    policy.entries[{"temp", Dimension::Accuracy}] = PolicyEntry{Impact::High, 0.9, 0.99};
    const auto back = GatePolicy::from_json(policy.to_json());
    CHECK(back.fingerprint() == policy.fingerprint());
    CHECK(back.lookup("temp", Dimension::Accuracy).impact == Impact::High);
}

TEST_CASE("condition keys depend on bands, not raw scores") {
    GatePolicy policy;
    const auto r1 = small_report(100, 100);
    const auto key1 = condition_key(r1, policy, "node-1");
    CHECK(key1 == condition_key(r1, policy, "node-1"));  // deterministic

    // moving within the pass band keeps the key
    const auto r2 = small_report(99, 100);
    CHECK(condition_key(r2, policy, "node-1") == key1);

    // crossing into marginal changes it
    const auto r3 = small_report(90, 100);
    CHECK(condition_key(r3, policy, "node-1") != key1);

    // crossing from marginal to fail changes it again
    const auto r4 = small_report(70, 100);
    CHECK(condition_key(r4, policy, "node-1") != condition_key(r3, policy, "node-1"));

    // a different node or dataset is a different situation
    CHECK(condition_key(r1, policy, "node-2") != key1);
    auto r5 = r1;
    r5.dataset_id = "other";
    CHECK(condition_key(r5, policy, "node-1") != key1);
}

TEST_CASE("gate: all passing bands progress") {
    GatePolicy policy;
    DecisionLedger ledger;
    const auto outcome = gate(small_report(), policy, ledger, "node");
    CHECK(outcome.verdict == Verdict::Progress);
    CHECK(outcome.triggering.empty());
    // not-evaluable entries are informational only
    REQUIRE(outcome.not_evaluable.size() == 1);
    CHECK(outcome.not_evaluable[0] == "temp/currency");
}

TEST_CASE("gate: a low-impact shortfall is waived") {
    GatePolicy policy;
    policy.entries[{"temp", Dimension::Accuracy}] = PolicyEntry{Impact::Low, 0.80, 0.95};
    DecisionLedger ledger;
    const auto outcome = gate(small_report(50, 100), policy, ledger, "node");
    CHECK(outcome.verdict == Verdict::Progress);
    REQUIRE(outcome.waived.size() == 1);
    CHECK(outcome.waived[0].parameter_id == "temp");
}

TEST_CASE("gate: a material shortfall prompts, then replays the decision") {
    GatePolicy policy;
    policy.entries[{"temp", Dimension::Accuracy}] = PolicyEntry{Impact::High, 0.80, 0.95};
    DecisionLedger ledger;
    const auto report = small_report(50, 100);

    const auto first = gate(report, policy, ledger, "node");
    CHECK(first.verdict == Verdict::Prompt);
    REQUIRE(first.triggering.size() == 1);
    CHECK(first.triggering[0].band_value == Band::Fail);
    CHECK(first.triggering[0].impact == Impact::High);

    DecisionRecord rec{first.condition_key, Choice::Progress, 1'700'000'000'000, "op"};
    ledger.record(rec);

    const auto second = gate(report, policy, ledger, "node");
    CHECK(second.verdict == Verdict::AutoProgress);
    CHECK(second.recorded_choice == Choice::Progress);

    // an improve decision replays as auto-improve
    DecisionLedger ledger2;
    ledger2.record({first.condition_key, Choice::Improve, 1'700'000'000'000, "op"});
    CHECK(gate(report, policy, ledger2, "node").verdict == Verdict::AutoImprove);
}

TEST_CASE("gate: marginal medium-impact entries also require a decision") {
    GatePolicy policy;
    DecisionLedger ledger;
    const auto outcome = gate(small_report(90, 100), policy, ledger, "node");
    CHECK(outcome.verdict == Verdict::Prompt);
    REQUIRE(outcome.triggering.size() == 1);
    CHECK(outcome.triggering[0].band_value == Band::Marginal);
}

TEST_CASE("gate: triggering entries sort by impact then score") {
    QualityReport r = small_report(50, 85);
    GatePolicy policy;
    policy.entries[{"temp", Dimension::Accuracy}] = PolicyEntry{Impact::Medium, 0.80, 0.95};
    policy.entries[{"temp", Dimension::Completeness}] = PolicyEntry{Impact::High, 0.80, 0.95};
    DecisionLedger ledger;
    const auto outcome = gate(r, policy, ledger, "node");
    REQUIRE(outcome.triggering.size() == 2);
    // high impact first even though its score is better
    CHECK(outcome.triggering[0].dimension == Dimension::Completeness);
    CHECK(outcome.triggering[1].dimension == Dimension::Accuracy);
}

TEST_CASE("gate: empty report is an error") {
    QualityReport r;
    r.dataset_id = "empty";
    GatePolicy policy;
    DecisionLedger ledger;
    CHECK_THROWS_AS(gate(r, policy, ledger, "node"), DataError);
}

TEST_CASE("verdict monotonicity: raising a score never breaks progress") {
    std::mt19937_64 rng(89);
    std::uniform_int_distribution<std::uint64_t> m_pick(0, 100);
    std::uniform_int_distribution<int> impact_pick(1, 3);
    for (int iter = 0; iter < 300; ++iter) {
        QualityReport r = small_report(m_pick(rng), m_pick(rng));
        GatePolicy policy;
        policy.entries[{"temp", Dimension::Accuracy}] =
            PolicyEntry{static_cast<Impact>(impact_pick(rng)), 0.80, 0.95};
        DecisionLedger ledger;
        const auto before = gate(r, policy, ledger, "node");
        if (before.verdict != Verdict::Progress) continue;

        auto& score = r.parameters[0].scores[Dimension::Accuracy];
        if (score.passed < score.total) ++score.passed;
        const auto after = gate(r, policy, ledger, "node");
        CHECK(after.verdict == Verdict::Progress);
    }
}

TEST_CASE("ledger: record, lookup, overwrite with history") {
    DecisionLedger ledger;
    CHECK(ledger.lookup("k1") == nullptr);

    ledger.record({"k1", Choice::Progress, 1000, "alice"});
    REQUIRE(ledger.lookup("k1") != nullptr);
    CHECK(ledger.lookup("k1")->choice == Choice::Progress);

    ledger.record({"k1", Choice::Improve, 2000, "bob"});
    CHECK(ledger.lookup("k1")->choice == Choice::Improve);
    CHECK(ledger.history_for("k1").size() == 2);
    CHECK(ledger.history_for("k1")[0].decided_by == "alice");
}

TEST_CASE("ledger: persists as json-lines and reloads") {
    TempDir tmp;
    const auto path = tmp.path / "decisions.jsonl";
    {
        auto ledger = DecisionLedger::load(path);  // absent file: empty
        CHECK(ledger.history().empty());
        ledger.record({"k1", Choice::Progress, 1'700'000'000'000, "alice"});
        ledger.record({"k2", Choice::Improve, 1'700'000'001'000, "bob"});
        ledger.record({"k1", Choice::Improve, 1'700'000'002'000, "carol"});
    }
    {
        const auto ledger = DecisionLedger::load(path);
        REQUIRE(ledger.history().size() == 3);
        CHECK(ledger.lookup("k1")->choice == Choice::Improve);
        CHECK(ledger.lookup("k1")->decided_by == "carol");
        CHECK(ledger.lookup("k2")->choice == Choice::Improve);
        CHECK(ledger.history_for("k1").size() == 2);
    }
    // corrupt line fails loudly
    {
        std::FILE* f = std::fopen(path.string().c_str(), "a");
        std::fputs("not json\n", f);
        std::fclose(f);
        CHECK_THROWS_AS(DecisionLedger::load(path), DataError);
    }
}

TEST_CASE("report json round-trip preserves scores, findings, fingerprint") {
    QualityReport r = small_report(73, 98);
    r.warnings.push_back("something");
    Finding f;
    f.kind = FindingKind::Gap;
    f.parameter_id = "temp";
    f.from = 1000;
    f.to = 3000;
    f.magnitude = 3.0;
    f.linked = Dimension::Completeness;
    r.findings.push_back(f);
    AggregateScore agg;
    agg.dimension = Dimension::Accuracy;
    agg.evaluable = true;
    agg.proportion = 0.73;
    agg.weight = 100;
    r.aggregates[Dimension::Accuracy] = agg;

    const auto j = report_to_json(r);
    const auto back = report_from_json(j);
    CHECK(report_to_json(back) == j);
    CHECK(back.parameters[0].scores.at(Dimension::Accuracy).passed == 73);
    CHECK(back.findings.size() == 1);
    CHECK(back.config_fingerprint == r.config_fingerprint);

    // gating works identically from the round-tripped report
    GatePolicy policy;
    DecisionLedger ledger;
    CHECK(condition_key(back, policy, "n") == condition_key(r, policy, "n"));
}
