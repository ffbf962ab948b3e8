// safecase: command-line front end over the safety-case toolkit.
//
// Exit status: 0 success / all PASS, 1 FAIL or INSUFFICIENT_EVIDENCE verdicts
// or closure findings, 2 usage errors, 3 input, format or I/O errors.
// Diagnostics go to stderr; results to stdout or to --out files, which are
// never replaced without --force.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "safecase/cause_tree.hpp"
#include "safecase/errors.hpp"
#include "safecase/keyed_text.hpp"
#include "safecase/odd_monitor.hpp"
#include "safecase/requirements.hpp"
#include "safecase/risk_model.hpp"
#include "safecase/scenario_sim.hpp"

namespace {

using namespace safecase;

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;

// Thrown for flag values CLI11 cannot check itself (unknown S/E/C tokens, ...).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void emit(const std::string& text, const std::string& out_path, bool force) {
    if (out_path.empty())
        std::cout << text;
    else
        write_file(out_path, text, force);
}

template <typename T, typename F>
T parse_flag(const std::string& flag, const std::string& value, F parse) {
    auto v = parse(value);
    if (!v) throw UsageError("invalid value '" + value + "' for " + flag);
    return *v;
}

GateMode gate_mode_of(const std::string& s) { return parse_flag<GateMode>("--mode", s, parse_gate_mode); }

int status_of(VerdictStatus v) { return v == VerdictStatus::Pass ? kExitOk : kExitFail; }

// "0.99", "2 %", "2%", "5 m" -> quantity; a bare number is dimensionless.
Quantity parse_quantity(const std::string& text) {
    const auto t = std::string(trim(text));
    std::size_t end = 0;
    while (end < t.size() && (std::isdigit(static_cast<unsigned char>(t[end])) || t[end] == '.' || t[end] == '-' ||
                              t[end] == '+' || t[end] == 'e' || t[end] == 'E'))
        ++end;
    Quantity q;
    try {
        q.value = parse_double(t.substr(0, end), "", 0);
    } catch (const ParseError&) {
        throw UsageError("invalid quantity '" + text + "'");
    }
    const auto unit = trim(std::string_view(t).substr(end));
    q.unit = unit.empty() ? "1" : std::string(unit);
    return q;
}

std::pair<std::string, std::string> split_assignment(const std::string& kv, const std::string& flag) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw UsageError(flag + " expects key=value, got '" + kv + "'");
    return {std::string(trim(std::string_view(kv).substr(0, eq))),
            std::string(trim(std::string_view(kv).substr(eq + 1)))};
}

std::string format_cut_set(const CutSet& cs) {
    std::string out = "{";
    bool first = true;
    for (const auto& id : cs) {
        if (!first) out += ", ";
        out += id;
        first = false;
    }
    return out + "}";
}

std::string hara_report(const std::vector<Verdict>& verdicts) {
    KeyedWriter w;
    for (const auto& v : verdicts) {
        w.section("verdict");
        w.field("id", v.id);
        w.field("kind", to_string(v.kind));
        if (v.asil) {
            w.field("asil", to_string(*v.asil));
            if (v.asil_cell) w.field("cell", v.asil_cell->label());
            w.field("safe_state_required", v.safe_state_required ? "true" : "false");
        }
        w.field("rra", v.rra ? "RRA_REQUIRED" : "NO_RRA");
        w.field("gate", std::string(to_string(v.gate_mode)) + ": " + v.gate_rule);
    }
    return w.str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"safecase: hazard rating, cause trees, requirement closure, ODD monitor replay"};
    app.require_subcommand(1, 1);
    app.set_help_all_flag("--help-all", "Show help for every command");

    std::string s_tok, e_tok, c_tok, mode_tok = "or";
    std::string out_path;
    bool force = false;
    auto add_out = [&](CLI::App* cmd) {
        cmd->add_option("-o,--out", out_path, "Write results to this file instead of stdout");
        cmd->add_flag("-f,--force", force, "Allow replacing an existing output file");
    };

    // asil
    auto* asil = app.add_subcommand("asil", "ASIL for a severity/exposure/controllability triple");
    asil->add_option("--s", s_tok, "Severity S0..S3")->required();
    asil->add_option("--e", e_tok, "Exposure E1..E4")->required();
    asil->add_option("--c", c_tok, "Controllability C0..C3")->required();

    // gate
    auto* gate = app.add_subcommand("gate", "Residual-risk gate for a severity/controllability pair");
    gate->add_option("--s", s_tok, "Severity S0..S3")->required();
    gate->add_option("--c", c_tok, "Controllability C0..C3")->required();
    gate->add_option("--mode", mode_tok, "or (default) | and");

    // hara
    std::string registry_path;
    auto* hara = app.add_subcommand("hara", "Evaluate a hazard registry");
    hara->add_option("registry", registry_path, "Hazard registry file")->required();
    hara->add_option("--mode", mode_tok, "Gate mode: or (default) | and");
    add_out(hara);

    // ctree-cutsets
    std::string tree_path;
    auto* cutsets = app.add_subcommand("ctree-cutsets", "Minimal cut sets of a cause tree");
    cutsets->add_option("tree", tree_path, "Cause-tree file")->required();
    add_out(cutsets);

    // ctree-allocate
    double criterion = 1e-6;
    double confidence = 0.95;
    auto* allocate = app.add_subcommand("ctree-allocate", "Allocate per-class validation targets");
    allocate->add_option("tree", tree_path, "Cause-tree file")->required();
    allocate->add_option("--criterion", criterion, "Global acceptance criterion, events per km")->capture_default_str();
    allocate->add_option("--confidence", confidence, "Confidence level of every target")->capture_default_str();
    add_out(allocate);

    // derive
    std::string baseline_path, baseline_id, property_tok, new_id;
    std::vector<std::string> params;
    auto* derive = app.add_subcommand("derive", "Instantiate a safety-property requirement template");
    derive->add_option("--baseline", baseline_path, "Requirement file holding the baseline")->required();
    derive->add_option("--baseline-id", baseline_id, "Baseline requirement id (default: the only BASELINE_SOTIF)");
    derive->add_option("--property", property_tok, "ROBUSTNESS | RELIABILITY | BIAS_FAIRNESS")->required();
    derive->add_option("--param", params, "Template parameter name=value[ unit]");
    derive->add_option("--id", new_id, "Id of the derived requirement")->required();
    add_out(derive);

    // trace-check
    std::vector<std::string> graph_paths;
    std::vector<std::string> drops;
    std::string evidence_dir;
    auto* tcheck = app.add_subcommand("trace-check", "Closure check over hazards, requirements and trace links");
    tcheck->add_option("files", graph_paths, "Hazard, requirement and trace-graph files")->required();
    tcheck->add_option("--mode", mode_tok, "Gate mode: or (default) | and");
    tcheck->add_option("--drop", drops, "Remove a requirement (and its links) before checking");
    tcheck->add_option("--evidence-dir", evidence_dir, "Re-verify evidence digests against run records here");
    add_out(tcheck);

    // gen
    std::string spec_path;
    std::uint64_t seed = 0;
    auto* gen = app.add_subcommand("gen", "Generate a seeded scenario trace");
    gen->add_option("spec", spec_path, "Scenario spec file")->required();
    gen->add_option("--seed", seed, "Noise seed (required)")->required();
    add_out(gen);

    // run
    std::string trace_path, config_path;
    std::vector<std::string> overrides;
    auto* run = app.add_subcommand("run", "Replay a trace through the ODD monitor");
    run->add_option("trace", trace_path, "Trace file")->required();
    run->add_option("--config", config_path, "Monitor config file (default: $SAFECASE_CONFIG, else built-in)");
    run->add_option("--set", overrides, "Config override key=value");
    add_out(run);

    // metrics
    std::string run_path, baseline_report;
    auto* metrics_cmd = app.add_subcommand("metrics", "Validation metrics and requirement verdicts for a run");
    metrics_cmd->add_option("trace", trace_path, "Trace file")->required();
    metrics_cmd->add_option("run", run_path, "Run-record file")->required();
    metrics_cmd->add_option("--baseline", baseline_report, "Unperturbed metrics report for the degradation check");
    add_out(metrics_cmd);

    // verdict
    std::string targets_path;
    std::vector<std::string> report_paths;
    auto* verdict = app.add_subcommand("verdict", "Residual-risk verdict against allocated targets");
    verdict->add_option("--targets", targets_path, "Validation-target file")->required();
    verdict->add_option("reports", report_paths, "Metrics report files");
    add_out(verdict);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*asil) {
            const auto s = parse_flag<Severity>("--s", s_tok, parse_severity);
            const auto e = parse_flag<Exposure>("--e", e_tok, parse_exposure);
            const auto c = parse_flag<Controllability>("--c", c_tok, parse_controllability);
            std::cout << to_string(determine_asil(s, e, c)) << "\n";
            return kExitOk;
        }
        if (*gate) {
            const auto s = parse_flag<Severity>("--s", s_tok, parse_severity);
            const auto c = parse_flag<Controllability>("--c", c_tok, parse_controllability);
            std::cout << (rra_required(s, c, gate_mode_of(mode_tok)) ? "RRA_REQUIRED" : "NO_RRA") << "\n";
            return kExitOk;
        }
        if (*hara) {
            const auto mode = gate_mode_of(mode_tok);
            emit(hara_report(evaluate_registry(load_hazard_registry(registry_path), mode)), out_path, force);
            return kExitOk;
        }
        if (*cutsets) {
            const auto tree = load_cause_tree(tree_path);
            std::vector<CutSet> sets;
            for (const auto& cs : minimal_cut_sets(tree))
                sets.push_back(cs);
            std::stable_sort(sets.begin(), sets.end(),
                             [](const CutSet& a, const CutSet& b) { return a.size() < b.size(); });
            std::string text;
            for (const auto& cs : sets)
                text += format_cut_set(cs) + "\n";
            emit(text, out_path, force);
            return kExitOk;
        }
        if (*allocate) {
            emit(serialize_targets(allocate_targets(load_cause_tree(tree_path), criterion, confidence)), out_path,
                 force);
            return kExitOk;
        }
        if (*derive) {
            const auto prop = parse_flag<SafetyProperty>("--property", property_tok, parse_safety_property);
            const RequirementRegistry registry(load_requirements(baseline_path));
            const SafetyRequirement* baseline = nullptr;
            if (!baseline_id.empty()) {
                baseline = registry.find(baseline_id);
                if (!baseline) throw UsageError("no requirement '" + baseline_id + "' in " + baseline_path);
            } else {
                for (const auto& r : registry.records())
                    if (r.source == RequirementSource::BaselineSotif) {
                        if (baseline) throw UsageError("several BASELINE_SOTIF records; pass --baseline-id");
                        baseline = &r;
                    }
                if (!baseline) throw UsageError("no BASELINE_SOTIF record in " + baseline_path);
            }
            std::map<std::string, Quantity> qs;
            for (const auto& p : params) {
                auto [k, v] = split_assignment(p, "--param");
                qs[k] = parse_quantity(v);
            }
            const auto derived = derive_from_property(*baseline, prop, qs, new_id);
            emit(serialize_requirements(RequirementRegistry({derived})), out_path, force);
            return kExitOk;
        }
        if (*tcheck) {
            const auto mode = gate_mode_of(mode_tok);
            auto graph = load_trace_graph(graph_paths);
            for (const auto& id : drops) {
                if (!graph.requirements.contains(id)) throw UsageError("--drop: no requirement '" + id + "'");
                graph = remove_requirement(std::move(graph), id);
            }
            auto findings = trace_check(graph, mode);
            if (!evidence_dir.empty()) {
                auto ev = verify_evidence(graph, evidence_dir);
                findings.insert(findings.end(), ev.begin(), ev.end());
            }
            if (out_path.empty()) {
                std::cout << summarize_findings(findings);
            } else {
                write_file(out_path, serialize_findings(findings), force);
                std::cerr << summarize_findings(findings);
            }
            return findings.empty() ? kExitOk : kExitFail;
        }
        if (*gen) {
            auto spec = load_scenario_spec(spec_path);
            spec.seed = seed;
            emit(serialize_trace(generate(spec)), out_path, force);
            return kExitOk;
        }
        if (*run) {
            if (config_path.empty())
                if (const char* env = std::getenv("SAFECASE_CONFIG"); env && *env) config_path = env;
            MonitorConfig cfg = config_path.empty() ? MonitorConfig{} : load_monitor_config(config_path);
            for (const auto& kv : overrides) {
                auto [k, v] = split_assignment(kv, "--set");
                cfg.set(k, v);
            }
            cfg.validate();
            emit(serialize_run_record(replay(load_trace(trace_path), cfg)), out_path, force);
            return kExitOk;
        }
        if (*metrics_cmd) {
            auto report = metrics(load_run_record(run_path), load_trace(trace_path));
            std::string extra;
            if (!baseline_report.empty()) {
                const auto d = compare_pair(load_metrics(baseline_report), report);
                report.verdicts["REQ-2"] = d.verdict;
                extra = "  degradation " + format_double(d.degradation * 100.0) + " pp vs baseline\n";
            }
            VerdictStatus overall = VerdictStatus::Pass;
            for (const auto& [req, v] : report.verdicts)
                overall = worst(overall, v);
            if (out_path.empty()) {
                std::cout << serialize_metrics(report);
                std::cerr << summarize_metrics(report) << extra;
            } else {
                write_file(out_path, serialize_metrics(report), force);
                std::cout << summarize_metrics(report) << extra;
            }
            return status_of(overall);
        }
        if (*verdict) {
            std::vector<MetricsReport> reports;
            for (const auto& p : report_paths)
                reports.push_back(load_metrics(p));
            const auto v = evaluate_targets(reports, load_targets(targets_path));
            emit(summarize_residual_risk(v), out_path, force);
            return status_of(v.aggregate);
        }
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const safecase::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitUsage;
}
