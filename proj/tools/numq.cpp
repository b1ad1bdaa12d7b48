// numq: score timestamped numerical datasets along eight quality dimensions,
// detect antipatterns, and run a replayable quality gate.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "numq/numq.hpp"

namespace fs = std::filesystem;

namespace {

// Exit code contract, consumed by workflow engines:
//   0 ok / progress, 2 bad input or config, 3 nothing evaluable,
//   4 improve chosen or replayed, 5 prompt needed but non-interactive.
constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitNothingEvaluable = 3;
constexpr int kExitImprove = 4;
constexpr int kExitPromptNeeded = 5;

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw numq::DataError("cannot write file: " + path.string());
    out << content;
    if (!out) throw numq::DataError("write failed: " + path.string());
}

numq::Dataset load_dataset(const fs::path& path, const numq::EvalConfig* cfg) {
    const std::string text = numq::read_file(path);
    auto parsed = numq::parse_dataset(text, numq::detect_format_from_path(path.string()), {},
                                      path.stem().string(), path.string());
    for (const auto& msg : parsed.report.messages) std::cerr << "numq: " << msg << "\n";
    if (cfg) {
        for (auto& s : parsed.dataset.series) {
            const auto& ref = cfg->resolve(s.parameter_id);
            if (!ref.unit.empty()) s.unit = ref.unit;
        }
    }
    return std::move(parsed.dataset);
}

numq::GatePolicy load_policy(const fs::path& path) {
    const std::string text = numq::read_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw numq::ConfigError("policy file is not valid JSON: " + path.string());
    // Accept either a standalone policy document or a full evaluation config
    // carrying a "policy" section.
    if (j.contains("policy")) return numq::GatePolicy::from_json(j["policy"]);
    return numq::GatePolicy::from_json(j);
}

numq::QualityReport load_report(const fs::path& path) {
    const std::string text = numq::read_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) throw numq::DataError("report file is not valid JSON: " + path.string());
    return numq::report_from_json(j);
}

int cmd_evaluate(const fs::path& data_path, const fs::path& config_path, const fs::path& out_path,
                 const std::string& format) {
    numq::EvalConfig cfg = numq::load_config(config_path);
    numq::Dataset dataset = load_dataset(data_path, &cfg);

    numq::QualityReport report;
    try {
        report = numq::evaluate_all(dataset, cfg);
    } catch (const numq::DataError& e) {
        std::cerr << "numq: " << e.what() << "\n";
        return kExitNothingEvaluable;
    }

    for (const auto& v : numq::validate_dataset(dataset, cfg.clock_skew_ms))
        report.warnings.push_back("structural: " + v.message);
    report.findings =
        numq::run_all_detectors(dataset, cfg, report.evaluated_at, &report.warnings);

    if (format == "table") {
        const numq::GatePolicy* policy = cfg.policy ? &*cfg.policy : nullptr;
        write_file(out_path, numq::render_report_table(report, policy));
    } else {
        write_file(out_path, numq::report_to_json(report).dump(2) + "\n");
    }
    return kExitOk;
}

int cmd_gate(const fs::path& report_path, const fs::path& policy_path, const fs::path& ledger_path,
             const std::string& node_id, bool interactive, const std::string& operator_id) {
    const numq::QualityReport report = load_report(report_path);
    const numq::GatePolicy policy = load_policy(policy_path);
    numq::DecisionLedger ledger = numq::DecisionLedger::load(ledger_path);

    numq::GateOutcome outcome = numq::gate(report, policy, ledger, node_id);

    if (outcome.verdict == numq::Verdict::Prompt && interactive) {
        std::cout << "prompt: quality shortfalls need a decision\n";
        std::cout << numq::prompt_payload(outcome).dump(2) << "\n";
        std::cout << "decide [progress/improve]: " << std::flush;
        std::string answer;
        if (!std::getline(std::cin, answer)) {
            std::cerr << "numq: no answer received\n";
            return kExitPromptNeeded;
        }
        const auto choice = numq::choice_from_string(answer);
        if (!choice) {
            std::cerr << "numq: answer must be 'progress' or 'improve'\n";
            return kExitBadInput;
        }
        numq::DecisionRecord rec;
        rec.condition_key = outcome.condition_key;
        rec.choice = *choice;
        rec.decided_at = numq::resolve_as_of(std::nullopt);
        rec.decided_by = operator_id;
        ledger.record(rec);
        std::cout << "verdict: " << numq::to_string(*choice == numq::Choice::Progress
                                                        ? numq::Verdict::Progress
                                                        : numq::Verdict::AutoImprove)
                  << " (recorded)\n";
        return *choice == numq::Choice::Progress ? kExitOk : kExitImprove;
    }

    std::cout << "verdict: " << numq::to_string(outcome.verdict) << "\n";
    switch (outcome.verdict) {
        case numq::Verdict::Progress:
        case numq::Verdict::AutoProgress:
            return kExitOk;
        case numq::Verdict::AutoImprove:
            return kExitImprove;
        case numq::Verdict::Prompt:
            std::cout << numq::prompt_payload(outcome).dump(2) << "\n";
            return kExitPromptNeeded;
    }
    return kExitPromptNeeded;
}

int cmd_inject(const fs::path& data_path, const fs::path& spec_path, const fs::path& out_path) {
    const std::string spec_text = numq::read_file(spec_path);
    nlohmann::json spec_json = nlohmann::json::parse(spec_text, nullptr, false);
    if (spec_json.is_discarded())
        throw numq::ConfigError("spec file is not valid JSON: " + spec_path.string());
    const numq::AntipatternSpec spec = numq::AntipatternSpec::from_json(spec_json);

    numq::Dataset dataset = load_dataset(data_path, nullptr);
    numq::InjectionResult result = numq::inject_antipattern(dataset, spec);

    const auto format = numq::detect_format_from_path(out_path.string());
    write_file(out_path, format == numq::DataFormat::JsonLines
                             ? numq::serialize_jsonl(result.dataset)
                             : numq::serialize_csv(result.dataset));
    write_file(out_path.string() + ".annotation.json", result.annotation.dump(2) + "\n");
    return kExitOk;
}

int cmd_report(const fs::path& report_path, const std::string& format, const fs::path& policy_path) {
    const numq::QualityReport report = load_report(report_path);
    if (format == "json") {
        std::cout << numq::report_to_json(report).dump(2) << "\n";
        return kExitOk;
    }
    std::optional<numq::GatePolicy> policy;
    if (!policy_path.empty()) policy = load_policy(policy_path);
    std::cout << numq::render_report_table(report, policy ? &*policy : nullptr);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"numerical dataset quality evaluation"};
    app.require_subcommand(1);

    std::string data_path, config_path, out_path, report_path, policy_path, ledger_path;
    std::string node_id, spec_path;
    std::string eval_format = "json";
    std::string report_format = "table";
    std::string operator_id = "cli";
    bool interactive = false;

    auto* evaluate = app.add_subcommand("evaluate", "score a dataset and write a quality report");
    evaluate->add_option("--data", data_path, "dataset file (csv or jsonl)")->required();
    evaluate->add_option("--config", config_path, "evaluation configuration (json)")->required();
    evaluate->add_option("--out", out_path, "output path for the report")->required();
    evaluate->add_option("--format", eval_format, "output format: json|table")
        ->check(CLI::IsMember({"json", "table"}));

    auto* gate_cmd = app.add_subcommand("gate", "apply the quality gate to a report");
    gate_cmd->add_option("--report", report_path, "quality report (json)")->required();
    gate_cmd->add_option("--policy", policy_path, "gate policy (json; config files accepted)")->required();
    gate_cmd->add_option("--ledger", ledger_path, "decision ledger (jsonl, created on demand)")->required();
    gate_cmd->add_option("--node", node_id, "workflow node identifier")->required();
    gate_cmd->add_flag("--interactive", interactive, "prompt for a decision when needed");
    gate_cmd->add_option("--operator", operator_id, "recorded operator id");

    auto* inject = app.add_subcommand("inject", "plant an antipattern into a dataset");
    inject->add_option("--data", data_path, "dataset file (csv or jsonl)")->required();
    inject->add_option("--spec", spec_path, "antipattern spec (json)")->required();
    inject->add_option("--out", out_path, "output path for the mutated dataset")->required();

    auto* report_cmd = app.add_subcommand("report", "render a quality report");
    report_cmd->add_option("--report", report_path, "quality report (json)")->required();
    report_cmd->add_option("--format", report_format, "output format: table|json")
        ->check(CLI::IsMember({"json", "table"}));
    report_cmd->add_option("--policy", policy_path, "optional policy for band column");

    CLI11_PARSE(app, argc, argv);

    try {
        if (evaluate->parsed()) return cmd_evaluate(data_path, config_path, out_path, eval_format);
        if (gate_cmd->parsed())
            return cmd_gate(report_path, policy_path, ledger_path, node_id, interactive, operator_id);
        if (inject->parsed()) return cmd_inject(data_path, spec_path, out_path);
        if (report_cmd->parsed()) return cmd_report(report_path, report_format, policy_path);
    } catch (const numq::Error& e) {
        std::cerr << "numq: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "numq: " << e.what() << "\n";
        return kExitBadInput;
    } catch (const std::exception& e) {
        std::cerr << "numq: " << e.what() << "\n";
        return kExitBadInput;
    }
    return kExitBadInput;
}
