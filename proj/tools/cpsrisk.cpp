// cpsrisk — model-based safety/security risk assessment for cyber-physical
// systems: hybrid-automaton hazard identification, hazard execution trees,
// attack-tree calculus, risk scoring, and mitigation timing.
//
// Exit codes: 0 success, 2 validation/parse failure, 3 design infeasible
// (with --enforce), 4 runtime/numerical failure.

#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cpsrisk/mitigation.hpp"
#include "cpsrisk/pipeline.hpp"

using namespace cpsrisk;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitInfeasible = 3;
constexpr int kExitRuntime = 4;

std::ostream& open_out(std::ofstream& file, const std::string& out_path) {
    if (out_path.empty()) return std::cout;
    file.open(out_path, std::ios::binary);
    if (!file) throw Error("cannot open output file '" + out_path + "'");
    return file;
}

Assignment full_assignment(const ModelBundle& bundle) {
    Assignment a = bundle.assignment;
    std::set<std::string> vars{"P_c"};
    for (const auto& t : bundle.attack_trees) {
        auto tv = tree_variables(t.root);
        vars.insert(tv.begin(), tv.end());
    }
    default_to_unity(a, vars);
    return a;
}

int cmd_validate(const std::string& model_path) {
    const ModelBundle bundle = parse_model(model_path);
    const auto report =
        validate_automaton(bundle.automaton, bundle.envelope, bundle.plant.flow_names());
    for (const auto& v : report.entries)
        std::cout << (v.severity == Severity::Error ? "error" : "warning") << " [" << v.code
                  << "] " << v.message << "\n";
    if (report.empty()) std::cout << "ok: " << model_path << " is valid\n";
    return report.ok() ? kExitOk : kExitValidation;
}

int cmd_simulate(const std::string& model_path, const std::string& mode_id, double horizon,
                 double dt, const std::string& out_path) {
    const ModelBundle bundle = parse_model(model_path);
    auto mi = bundle.automaton.mode_index(mode_id);
    if (!mi) throw CrossRefError("unknown mode '" + mode_id + "'");
    const Trajectory traj = simulate_mode(bundle.plant, bundle.automaton,
                                          bundle.automaton.modes[*mi],
                                          bundle.automaton.init_state, horizon, dt);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    out << "time";
    for (const auto& v : bundle.automaton.variables) out << "," << v.name;
    out << "\n";
    char buf[64];
    for (std::size_t i = 0; i < traj.times.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.15g", traj.times[i]);
        out << buf;
        for (double x : traj.states[i]) {
            std::snprintf(buf, sizeof(buf), "%.15g", x);
            out << "," << buf;
        }
        out << "\n";
    }
    return kExitOk;
}

int cmd_classify(const std::string& model_path, double horizon, double dt,
                 const std::string& format, const std::string& out_path) {
    const ModelBundle bundle = parse_model(model_path);
    const auto verdicts =
        classify_modes(bundle.plant, bundle.automaton, bundle.envelope, horizon, dt);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    if (format == "json") {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [id, v] : verdicts) {
            nlohmann::json jv{{"hazardous", v.hazardous}};
            if (v.hazardous) {
                jv["tau_p"] = *v.crossing_time;
                jv["variable"] = *v.violated_variable;
                jv["value"] = *v.crossing_value;
            }
            j[id] = std::move(jv);
        }
        out << j.dump(2) << "\n";
    } else {
        for (const auto& [id, v] : verdicts) {
            out << id << ": " << (v.hazardous ? "HAZARDOUS" : "safe");
            if (v.hazardous)
                out << "  tau_p=" << *v.crossing_time << " min  " << *v.violated_variable << "="
                    << *v.crossing_value;
            out << "\n";
        }
    }
    return kExitOk;
}

int cmd_hazard_tree(const std::string& model_path, double horizon, double dt,
                    const std::string& format, const std::string& out_path) {
    const ModelBundle bundle = parse_model(model_path);
    const auto verdicts =
        classify_modes(bundle.plant, bundle.automaton, bundle.envelope, horizon, dt);
    std::set<std::string> hazardous;
    for (const auto& [id, v] : verdicts)
        if (v.hazardous) hazardous.insert(id);
    const HazardTree tree = hazard_tree(bundle.automaton, bundle.automaton.initial(), hazardous);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    if (format == "json") {
        nlohmann::json jedges = nlohmann::json::array();
        for (const auto& e : tree.edges)
            jedges.push_back({{"parent", e.parent}, {"label", e.label}, {"child", e.child}});
        nlohmann::json j{{"root", tree.root},
                         {"nodes", tree.nodes},
                         {"edges", jedges},
                         {"mode_order", tree.mode_order},
                         {"matrix", tree.adjacency},
                         {"leaves", tree.hazard_leaves}};
        nlohmann::json jtr = nlohmann::json::array();
        for (const auto& t : traces(tree)) jtr.push_back(t.rendered);
        j["traces"] = jtr;
        out << j.dump(2) << "\n";
    } else {
        out << "root: " << tree.root << "\n";
        for (const auto& e : tree.edges)
            out << "  " << e.parent << " -[" << e.label << "]-> " << e.child << "\n";
        out << "hazard leaves:";
        for (const auto& l : tree.hazard_leaves) out << " " << l;
        out << "\nadjacency matrix (mode order:";
        for (const auto& m : tree.mode_order) out << " " << m;
        out << "):\n";
        for (const auto& row : tree.adjacency) {
            out << "  ";
            for (int v : row) out << v << " ";
            out << "\n";
        }
        for (const auto& t : traces(tree)) out << "trace: " << t.rendered << "\n";
    }
    return kExitOk;
}

int cmd_attack_eval(const std::string& model_path, const std::string& tree_name,
                    const std::string& semantics, const std::string& out_path) {
    const ModelBundle bundle = parse_model(model_path);
    const AttackTreeSpec* spec = bundle.tree(tree_name);
    if (!spec) throw CrossRefError("bundle has no attack tree named '" + tree_name + "'");
    const Assignment a = full_assignment(bundle);

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    const Polynomial poly =
        symbolic(spec->root, semantics == "exact" ? Semantics::Exact : Semantics::Approx);
    out << "tree: " << spec->name << "\n";
    out << "polynomial (" << semantics << "): " << poly.str() << "\n";
    if (!spec->simplify.empty())
        out << "simplified: " << substitute(poly, spec->simplify).str() << "\n";
    if (semantics == "exact") {
        out << "value: " << eval_exact(spec->root, a) << "\n";
    } else {
        const ApproxResult r = eval_approx(spec->root, a);
        out << "value: " << r.value << (r.exceeds_unity ? "  (exceeds 1: rare-event sum)" : "")
            << "\n";
    }
    out << "minimal cut sets:\n";
    for (const auto& cs : minimal_cut_sets(spec->root)) {
        out << "  {";
        bool first = true;
        for (const auto& v : cs) {
            out << (first ? "" : ", ") << v;
            first = false;
        }
        out << "}\n";
    }
    return kExitOk;
}

int cmd_risk(const std::string& model_path, std::optional<double> bound, bool enforce,
             const std::string& out_path) {
    const ModelBundle bundle = parse_model(model_path);
    if (!bundle.risk) throw CrossRefError("bundle carries no risk parameters");
    const double q = normalized_cost(*bundle.risk);
    const double r = target_risk(q, bundle.risk->zeta);
    const double L_max = likelihood_bound(q, bundle.risk->zeta);
    const double b = bound ? *bound : L_max;

    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    char buf[64];
    auto line = [&](const char* name, double v) {
        std::snprintf(buf, sizeof(buf), "%.4g", v);
        out << name << " = " << buf << "\n";
    };
    line("q", q);
    line("r", r);
    line("L_max", L_max);
    line("bound", b);

    bool feasible = true;
    if (!bundle.attack_trees.empty()) {
        const Polynomial likelihood = bundle_likelihood(bundle);
        const Assignment a = full_assignment(bundle);
        const DesignVerdict v = check_design(likelihood, a, b);
        out << "likelihood polynomial = " << likelihood.str() << "\n";
        line("L", v.likelihood);
        line("R", risk_score(v.likelihood, q));
        line("margin_log10", v.margin);
        out << (v.feasible ? "design feasible\n" : "design INFEASIBLE\n");
        feasible = v.feasible;
        if (bundle.design_assumptions) {
            out << "reduced design polynomial = "
                << reduce_to_design_equation(likelihood, *bundle.design_assumptions).str()
                << "\n";
        }
    }
    return (!feasible && enforce) ? kExitInfeasible : kExitOk;
}

int cmd_design_curve(double bound, double pc_min, double pc_max, int points,
                     const std::string& format, const std::string& out_path) {
    const auto curve = design_curve(bound, {pc_min, pc_max}, points);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    if (format == "svg")
        emit_curve_svg(curve, out);
    else
        emit_curve_csv(curve, out);
    return kExitOk;
}

int cmd_mitigate(const std::string& model_path, const std::string& mode_id,
                 std::optional<double> tau_p, double tau_s, double tau_d,
                 std::optional<double> tau_m, double horizon, double dt) {
    MitigationTiming t;
    t.tau_s = tau_s;
    t.tau_d = tau_d;
    if (tau_p) {
        t.tau_p = *tau_p;
    } else {
        if (model_path.empty() || mode_id.empty())
            throw Error("mitigate needs --tau-p, or --model and --mode to derive it");
        const ModelBundle bundle = parse_model(model_path);
        auto mi = bundle.automaton.mode_index(mode_id);
        if (!mi) throw CrossRefError("unknown mode '" + mode_id + "'");
        const HazardVerdict v =
            hazard_time(bundle.plant, bundle.automaton, bundle.automaton.modes[*mi],
                        bundle.automaton.init_state, bundle.envelope, horizon, dt);
        if (!v.hazardous) {
            std::cout << "mode " << mode_id << " develops no hazard within " << horizon
                      << " min; no mitigation deadline\n";
            return kExitOk;
        }
        t.tau_p = *v.crossing_time;
        std::cout << "tau_p(" << mode_id << ") = " << t.tau_p << " min (simulated)\n";
    }
    const double deadline = mitigation_deadline(t.tau_p, t.tau_s, t.tau_d);
    std::cout << "deadline = tau_p + tau_s - tau_d = " << deadline << " min\n";
    if (deadline <= 0.0)
        std::cout << "no cyber mitigation can succeed; a mechanical solution is required\n";
    if (tau_m) {
        t.tau_m = *tau_m;
        const MitigationVerdict v = check_mitigation(t);
        std::cout << "tau_m = " << t.tau_m << " min -> "
                  << (v.feasible ? "feasible" : "INFEASIBLE") << " (slack " << v.slack << " min)\n";
    }
    if (!model_path.empty() && !mode_id.empty()) {
        const ModelBundle bundle = parse_model(model_path);
        const auto verdicts =
            classify_modes(bundle.plant, bundle.automaton, bundle.envelope, horizon, dt);
        std::set<std::string> safe;
        for (const auto& [id, v] : verdicts)
            if (!v.hazardous) safe.insert(id);
        auto mi = bundle.automaton.mode_index(mode_id);
        if (mi) {
            std::cout << "recovery actions from " << mode_id << ":\n";
            for (const auto& [event, target] :
                 recovery_actions(bundle.automaton, bundle.automaton.modes[*mi], safe))
                std::cout << "  " << event.actuator_label << " -> " << target.id << "\n";
        }
    }
    return kExitOk;
}

int cmd_pipeline(const std::string& model_path, const PipelineOptions& options, bool enforce,
                 const std::string& format, const std::string& out_path) {
    const ModelBundle bundle = parse_model(model_path);
    const nlohmann::json report = run_pipeline(bundle, options);
    std::ofstream file;
    std::ostream& out = open_out(file, out_path);
    emit_report(report, format, out);
    if (enforce && report.contains("risk") && !report["risk"]["feasible"].get<bool>())
        return kExitInfeasible;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"model-based safety/security risk assessment for cyber-physical systems"};
    app.require_subcommand(1);

    std::string model, mode, out_path, format, semantics = "approx", tree_name;
    double horizon = 120.0, dt = 0.01;
    double tau_s = 0.0, tau_d = 0.0;
    std::optional<double> bound, tau_p, tau_m;
    double pc_min = 1e-5, pc_max = 1.0;
    int points = 101;
    bool enforce = false, fixed_clock = false, paper_eq11 = false;

    auto add_model = [&](CLI::App* cmd, bool required = true) {
        auto* opt = cmd->add_option("--model", model, "model bundle file");
        if (required) opt->required();
    };

    auto* validate = app.add_subcommand("validate", "check a model file");
    add_model(validate);

    auto* simulate = app.add_subcommand("simulate", "integrate one mode and emit a CSV trajectory");
    add_model(simulate);
    simulate->add_option("--mode", mode, "mode id")->required();
    simulate->add_option("--horizon", horizon, "minutes");
    simulate->add_option("--dt", dt, "step, minutes");
    simulate->add_option("--out", out_path, "output file (default stdout)");

    auto* classify = app.add_subcommand("classify", "hazard-classify every mode");
    add_model(classify);
    classify->add_option("--horizon", horizon, "minutes");
    classify->add_option("--dt", dt, "step, minutes");
    classify->add_option("--format", format, "text or json");
    classify->add_option("--out", out_path, "output file (default stdout)");

    auto* tree = app.add_subcommand("hazard-tree", "hazard execution tree and traces");
    add_model(tree);
    tree->add_option("--horizon", horizon, "minutes");
    tree->add_option("--dt", dt, "step, minutes");
    tree->add_option("--format", format, "text or json");
    tree->add_option("--out", out_path, "output file (default stdout)");

    auto* attack = app.add_subcommand("attack-eval", "evaluate a named attack tree");
    add_model(attack);
    attack->add_option("--tree", tree_name, "attack tree name")->required();
    attack->add_option("--semantics", semantics, "approx or exact");
    attack->add_option("--out", out_path, "output file (default stdout)");

    auto* risk = app.add_subcommand("risk", "risk scoring and the design constraint");
    add_model(risk);
    risk->add_option("--bound", bound, "explicit likelihood bound (paper-rounded mode)");
    risk->add_flag("--enforce", enforce, "exit 3 when the design is infeasible");
    risk->add_option("--out", out_path, "output file (default stdout)");

    auto* curve = app.add_subcommand("design-curve", "emit the P_CPS*P_c = bound boundary");
    curve->add_option("--bound", bound, "likelihood bound")->required();
    curve->add_option("--pc-min", pc_min, "lower end of the P_c range");
    curve->add_option("--pc-max", pc_max, "upper end of the P_c range");
    curve->add_option("--points", points, "number of samples");
    curve->add_option("--format", format, "csv or svg");
    curve->add_option("--out", out_path, "output file (default stdout)");

    auto* mitigate = app.add_subcommand("mitigate", "mitigation timing feasibility");
    add_model(mitigate, false);
    mitigate->add_option("--mode", mode, "hazardous mode (derives tau_p by simulation)");
    mitigate->add_option("--tau-p", tau_p, "hazard development time, minutes");
    mitigate->add_option("--tau-s", tau_s, "tolerable excursion time, minutes");
    mitigate->add_option("--tau-d", tau_d, "detection time, minutes");
    mitigate->add_option("--tau-m", tau_m, "mitigation implementation time, minutes");
    mitigate->add_option("--horizon", horizon, "minutes");
    mitigate->add_option("--dt", dt, "step, minutes");

    auto* pipeline = app.add_subcommand("pipeline", "full analysis, JSON or text report");
    add_model(pipeline);
    pipeline->add_option("--horizon", horizon, "minutes");
    pipeline->add_option("--dt", dt, "step, minutes");
    pipeline->add_option("--bound", bound, "explicit likelihood bound (paper-rounded mode)");
    pipeline->add_flag("--enforce", enforce, "exit 3 when the design is infeasible");
    pipeline->add_flag("--fixed-clock", fixed_clock, "freeze the report timestamp");
    pipeline->add_flag("--paper-eq11", paper_eq11,
                       "reproduce the published composition bracket (c8*c21 term)");
    pipeline->add_option("--format", format, "json or text");
    pipeline->add_option("--out", out_path, "output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    auto format_or = [&format](const char* fallback) {
        return format.empty() ? std::string(fallback) : format;
    };
    try {
        if (validate->parsed()) return cmd_validate(model);
        if (simulate->parsed()) return cmd_simulate(model, mode, horizon, dt, out_path);
        if (classify->parsed()) return cmd_classify(model, horizon, dt, format_or("text"), out_path);
        if (tree->parsed()) return cmd_hazard_tree(model, horizon, dt, format_or("text"), out_path);
        if (attack->parsed()) return cmd_attack_eval(model, tree_name, semantics, out_path);
        if (risk->parsed()) return cmd_risk(model, bound, enforce, out_path);
        if (curve->parsed())
            return cmd_design_curve(bound.value(), pc_min, pc_max, points, format_or("csv"),
                                    out_path);
        if (mitigate->parsed())
            return cmd_mitigate(model, mode, tau_p, tau_s, tau_d, tau_m, horizon, dt);
        if (pipeline->parsed()) {
            PipelineOptions opt;
            opt.horizon = horizon;
            opt.dt = dt;
            opt.bound = bound;
            opt.fixed_clock = fixed_clock;
            opt.paper_eq11 = paper_eq11;
            return cmd_pipeline(model, opt, enforce, format_or("json"), out_path);
        }
    } catch (const ParseError& e) {
        std::cerr << "parse error";
        if (e.line > 0) std::cerr << " (line " << e.line << ")";
        std::cerr << ": " << e.what() << "\n";
        return kExitValidation;
    } catch (const CrossRefError& e) {
        std::cerr << "cross-reference error: " << e.what() << "\n";
        return kExitValidation;
    } catch (const NonFiniteState& e) {
        std::cerr << "numerical failure: " << e.what() << " (last finite t=" << e.last_finite_time
                  << ")\n";
        return kExitRuntime;
    } catch (const PipelineError& e) {
        std::cerr << "pipeline failure: " << e.what() << "\n";
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}
