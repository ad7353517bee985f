#include "cpsrisk/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <ostream>
#include <sstream>

#include "cpsrisk/mitigation.hpp"

namespace cpsrisk {

using nlohmann::json;

namespace {

std::string sci4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string timestamp(bool fixed_clock) {
    if (fixed_clock) return "1970-01-01T00:00:00Z";
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json node_summary(const AttackNode& n) {
    json j;
    j["id"] = n.id;
    j["gate"] = n.gate == Gate::Basic ? "BASIC" : n.gate == Gate::And ? "AND" : "OR";
    if (n.gate == Gate::Basic) j["var"] = n.var;
    if (!n.children.empty()) {
        j["children"] = json::array();
        for (const auto& c : n.children) j["children"].push_back(node_summary(c));
    }
    return j;
}

}  // namespace

std::vector<std::string> default_to_unity(Assignment& a, const std::set<std::string>& vars) {
    std::vector<std::string> defaulted;
    for (const auto& v : vars) {
        if (!a.has(v)) {
            a.values[v] = 1.0;
            defaulted.push_back(v);
        }
    }
    return defaulted;
}

Polynomial bundle_likelihood(const ModelBundle& bundle, bool paper_eq11) {
    const AttackTreeSpec* entry = nullptr;
    std::vector<const AttackTreeSpec*> continuations;
    for (const auto& t : bundle.attack_trees) {
        if (t.role == "entry")
            entry = &t;
        else if (t.role == "continuation")
            continuations.push_back(&t);
    }
    if (!entry || continuations.empty())
        throw PipelineError("attack", "composition needs one entry tree and at least one continuation");

    auto simplified = [](const AttackTreeSpec& t) {
        return substitute(symbolic(t.root, Semantics::Approx), t.simplify);
    };
    Polynomial first = simplified(*continuations[0]);
    Polynomial rest(false);
    for (std::size_t i = 1; i < continuations.size(); ++i)
        rest = rest + simplified(*continuations[i]);
    Polynomial runaway = compose_runaway(simplified(*entry), first, rest);
    if (paper_eq11) {
        // the paper's printed composition carries c8*c21 where the tree
        // composition yields c18*c21; reproduce it on request for comparison
        runaway = substitute(runaway, {{"c18", Binding{std::string("c8")}}});
    }
    return Polynomial::variable("P_c") * runaway;
}

nlohmann::json run_pipeline(const ModelBundle& bundle, const PipelineOptions& options) {
    json report;
    report["tool"] = {{"name", "cpsrisk"}, {"version", kToolVersion}};
    report["provenance"] = {{"model", bundle.source_path},
                            {"hashes", bundle.file_hashes},
                            {"timestamp", timestamp(options.fixed_clock)},
                            {"options",
                             {{"horizon", options.horizon},
                              {"dt", options.dt},
                              {"paper_eq11", options.paper_eq11},
                              {"bound_mode", options.bound ? "explicit" : "derived"}}}};

    // validation gate
    const auto validation =
        validate_automaton(bundle.automaton, bundle.envelope, bundle.plant.flow_names());
    if (!validation.ok()) {
        std::string first;
        for (const auto& v : validation.entries)
            if (v.severity == Severity::Error) {
                first = v.message;
                break;
            }
        throw CrossRefError("model validation failed: " + first);
    }
    report["validation"] = json::array();
    for (const auto& v : validation.entries)
        report["validation"].push_back(
            {{"severity", v.severity == Severity::Error ? "error" : "warning"},
             {"code", v.code},
             {"message", v.message}});

    // hazard classification
    std::map<std::string, HazardVerdict> verdicts;
    try {
        verdicts = options.parallel
                       ? classify_modes(bundle.plant, bundle.automaton, bundle.envelope,
                                        options.horizon, options.dt)
                       : classify_modes_serial(bundle.plant, bundle.automaton, bundle.envelope,
                                               options.horizon, options.dt);
    } catch (const Error& e) {
        throw PipelineError("classify", e.what());
    }
    std::set<std::string> hazardous;
    json jmodes = json::object();
    for (const auto& [id, v] : verdicts) {
        json jv{{"hazardous", v.hazardous}};
        if (v.hazardous) {
            hazardous.insert(id);
            jv["tau_p"] = *v.crossing_time;
            jv["variable"] = *v.violated_variable;
            jv["value"] = *v.crossing_value;
        }
        jmodes[id] = std::move(jv);
    }
    report["hazard"] = {{"horizon", options.horizon},
                        {"dt", options.dt},
                        {"modes", jmodes},
                        {"hazardous_set", std::vector<std::string>(hazardous.begin(), hazardous.end())}};

    // hazard execution tree and traces
    HazardTree tree;
    try {
        tree = hazard_tree(bundle.automaton, bundle.automaton.initial(), hazardous);
    } catch (const Error& e) {
        throw PipelineError("hazard-tree", e.what());
    }
    json jedges = json::array();
    for (const auto& e : tree.edges)
        jedges.push_back({{"parent", e.parent}, {"label", e.label}, {"child", e.child}});
    report["hazard_tree"] = {{"root", tree.root},
                             {"nodes", tree.nodes},
                             {"edges", jedges},
                             {"mode_order", tree.mode_order},
                             {"matrix", tree.adjacency},
                             {"leaves", tree.hazard_leaves}};
    json jtraces = json::array();
    for (const auto& tr : traces(tree))
        jtraces.push_back({{"modes", tr.modes}, {"labels", tr.labels}, {"rendered", tr.rendered}});
    report["traces"] = jtraces;

    if (!bundle.actuator_map.entries.empty()) {
        try {
            const AttackNode abstract = abstract_attack_tree(tree, bundle.actuator_map);
            json jcuts = json::array();
            for (const auto& cs : minimal_cut_sets(abstract))
                jcuts.push_back(std::vector<std::string>(cs.begin(), cs.end()));
            report["abstract_attack_tree"] = {{"root", node_summary(abstract)},
                                              {"cut_sets", jcuts}};
        } catch (const Error& e) {
            throw PipelineError("abstract-attack-tree", e.what());
        }
    }

    // attack-tree arithmetic
    Assignment assignment = bundle.assignment;
    std::vector<std::string> defaulted;
    if (!bundle.attack_trees.empty()) {
        std::set<std::string> vars{"P_c"};
        for (const auto& t : bundle.attack_trees) {
            auto tv = tree_variables(t.root);
            vars.insert(tv.begin(), tv.end());
        }
        defaulted = default_to_unity(assignment, vars);

        json jtrees = json::object();
        for (const auto& t : bundle.attack_trees) {
            try {
                const Polynomial poly = symbolic(t.root, Semantics::Approx);
                const Polynomial simplified = substitute(poly, t.simplify);
                const ApproxResult approx = eval_approx(t.root, assignment);
                json jt{{"role", t.role},
                        {"polynomial", poly.str()},
                        {"simplified", simplified.str()},
                        {"approx", approx.value},
                        {"approx_exceeds_unity", approx.exceeds_unity},
                        {"exact", eval_exact(t.root, assignment)}};
                json jcuts = json::array();
                for (const auto& cs : minimal_cut_sets(t.root))
                    jcuts.push_back(std::vector<std::string>(cs.begin(), cs.end()));
                jt["cut_sets"] = jcuts;
                jtrees[t.name] = std::move(jt);
            } catch (const Error& e) {
                throw PipelineError("attack-eval(" + t.name + ")", e.what());
            }
        }
        report["attack"] = {{"trees", jtrees}, {"defaulted_to_unity", defaulted}};

        try {
            const Polynomial likelihood = bundle_likelihood(bundle, options.paper_eq11);
            report["attack"]["likelihood_polynomial"] = likelihood.str();
            if (bundle.design_assumptions) {
                const Polynomial reduced =
                    reduce_to_design_equation(likelihood, *bundle.design_assumptions);
                report["design"]["reduced_polynomial"] = reduced.str();
            }

            if (bundle.risk) {
                const double q = normalized_cost(*bundle.risk);
                const double r = target_risk(q, bundle.risk->zeta);
                const double L_max = likelihood_bound(q, bundle.risk->zeta);
                const double bound = options.bound ? *options.bound : L_max;
                const DesignVerdict verdict = check_design(likelihood, assignment, bound);
                report["risk"] = {{"q", q},
                                  {"r", r},
                                  {"L_max", L_max},
                                  {"bound", bound},
                                  {"bound_mode", options.bound ? "explicit" : "derived"},
                                  {"likelihood", verdict.likelihood},
                                  {"R", risk_score(verdict.likelihood, q)},
                                  {"feasible", verdict.feasible},
                                  {"margin", verdict.margin}};
            }
        } catch (const PipelineError&) {
            throw;
        } catch (const Error& e) {
            throw PipelineError("risk", e.what());
        }
    }

    // mitigation deadlines and recovery actions per hazardous mode
    std::set<std::string> safe;
    for (const auto& m : bundle.automaton.modes)
        if (!hazardous.count(m.id)) safe.insert(m.id);
    json jmit = json::object();
    for (const auto& id : hazardous) {
        const HazardVerdict& v = verdicts.at(id);
        MitigationTiming t;
        t.tau_p = *v.crossing_time;
        t.tau_s = bundle.mitigation.tau_s;
        t.tau_d = bundle.mitigation.tau_d;
        json jm{{"tau_p", t.tau_p},
                {"deadline", mitigation_deadline(t.tau_p, t.tau_s, t.tau_d)}};
        if (bundle.mitigation.tau_m) {
            t.tau_m = *bundle.mitigation.tau_m;
            const MitigationVerdict mv = check_mitigation(t);
            jm["tau_m"] = t.tau_m;
            jm["feasible"] = mv.feasible;
            jm["slack"] = mv.slack;
        }
        json jrec = json::array();
        const Mode& mode = bundle.automaton.modes[*bundle.automaton.mode_index(id)];
        for (const auto& [event, target] : recovery_actions(bundle.automaton, mode, safe))
            jrec.push_back({{"event", event.actuator_label},
                            {"switch", event.switch_name},
                            {"value", event.target_value},
                            {"target", target.id}});
        jm["recovery"] = std::move(jrec);
        jmit[id] = std::move(jm);
    }
    report["mitigation"] = {{"tau_s", bundle.mitigation.tau_s},
                            {"tau_d", bundle.mitigation.tau_d},
                            {"per_mode", jmit}};
    return report;
}

std::string report_text_summary(const json& report) {
    std::ostringstream os;
    os << "cpsrisk " << report["tool"]["version"].get<std::string>() << " — "
       << report["provenance"]["model"].get<std::string>() << "\n";
    const auto& hz = report["hazard"];
    os << "hazardous modes:";
    for (const auto& m : hz["hazardous_set"]) os << " " << m.get<std::string>();
    os << "\n";
    for (const auto& [id, jv] : hz["modes"].items())
        if (jv["hazardous"].get<bool>())
            os << "  " << id << ": tau_p = " << sci4(jv["tau_p"].get<double>()) << " min ("
               << jv["variable"].get<std::string>() << " -> " << sci4(jv["value"].get<double>())
               << ")\n";
    if (report.contains("traces")) {
        os << "hazard traces:\n";
        for (const auto& tr : report["traces"])
            os << "  " << tr["rendered"].get<std::string>() << "\n";
    }
    if (report.contains("attack"))
        os << "likelihood polynomial: "
           << report["attack"]["likelihood_polynomial"].get<std::string>() << "\n";
    if (report.contains("risk")) {
        const auto& r = report["risk"];
        os << "q = " << sci4(r["q"].get<double>()) << ", r = " << sci4(r["r"].get<double>())
           << ", L_max = " << sci4(r["L_max"].get<double>()) << "\n";
        os << "L = " << sci4(r["likelihood"].get<double>())
           << ", R = " << sci4(r["R"].get<double>()) << ", bound = "
           << sci4(r["bound"].get<double>()) << " ("
           << r["bound_mode"].get<std::string>() << ") -> "
           << (r["feasible"].get<bool>() ? "feasible" : "INFEASIBLE") << "\n";
    }
    if (report.contains("mitigation")) {
        for (const auto& [id, jm] : report["mitigation"]["per_mode"].items()) {
            os << "mitigation " << id << ": deadline " << sci4(jm["deadline"].get<double>())
               << " min, recovery:";
            for (const auto& rec : jm["recovery"])
                os << " " << rec["event"].get<std::string>() << "->"
                   << rec["target"].get<std::string>();
            os << "\n";
        }
    }
    return os.str();
}

void emit_report(const json& report, const std::string& format, std::ostream& out) {
    if (format == "json")
        out << report.dump(2) << "\n";
    else if (format == "text")
        out << report_text_summary(report);
    else
        throw Error("unknown report format '" + format + "' (expected json or text)");
}

void emit_curve_csv(const std::vector<std::pair<double, double>>& points, std::ostream& out) {
    out << "log10_p_c,log10_p_cps\n";
    char buf[64];
    for (const auto& [log_pcps, log_pc] : points) {
        std::snprintf(buf, sizeof(buf), "%.15g,%.15g\n", log_pc, log_pcps);
        out << buf;
    }
}

void emit_curve_svg(const std::vector<std::pair<double, double>>& points, std::ostream& out) {
    const int W = 640, H = 480, M = 60;
    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!points.empty()) {
        xmin = xmax = points[0].second;
        ymin = ymax = points[0].first;
        for (const auto& [y, x] : points) {
            xmin = std::min(xmin, x);
            xmax = std::max(xmax, x);
            ymin = std::min(ymin, y);
            ymax = std::max(ymax, y);
        }
        if (xmin == xmax) xmax = xmin + 1;
        if (ymin == ymax) ymax = ymin + 1;
    }
    auto sx = [&](double x) { return M + (x - xmin) / (xmax - xmin) * (W - 2 * M); };
    auto sy = [&](double y) { return H - M - (y - ymin) / (ymax - ymin) * (H - 2 * M); };

    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
    out << "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "  <line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << W - M << "\" y2=\""
        << H - M << "\" stroke=\"black\"/>\n";
    out << "  <line x1=\"" << M << "\" y1=\"" << H - M << "\" x2=\"" << M << "\" y2=\"" << M
        << "\" stroke=\"black\"/>\n";
    char buf[128];
    std::snprintf(buf, sizeof(buf), "%.3g", xmin);
    out << "  <text x=\"" << M << "\" y=\"" << H - M + 20 << "\" font-size=\"12\">" << buf
        << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", xmax);
    out << "  <text x=\"" << W - M << "\" y=\"" << H - M + 20
        << "\" font-size=\"12\" text-anchor=\"end\">" << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", ymin);
    out << "  <text x=\"" << M - 8 << "\" y=\"" << H - M << "\" font-size=\"12\" text-anchor=\"end\">"
        << buf << "</text>\n";
    std::snprintf(buf, sizeof(buf), "%.3g", ymax);
    out << "  <text x=\"" << M - 8 << "\" y=\"" << M << "\" font-size=\"12\" text-anchor=\"end\">"
        << buf << "</text>\n";
    out << "  <text x=\"" << W / 2 << "\" y=\"" << H - 15
        << "\" font-size=\"14\" text-anchor=\"middle\">log10 Pc</text>\n";
    out << "  <text x=\"15\" y=\"" << H / 2
        << "\" font-size=\"14\" text-anchor=\"middle\" transform=\"rotate(-90 15 " << H / 2
        << ")\">log10 Pcps</text>\n";
    out << "  <polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i) out << " ";
        std::snprintf(buf, sizeof(buf), "%.2f,%.2f", sx(points[i].second), sy(points[i].first));
        out << buf;
    }
    out << "\"/>\n</svg>\n";
}

}  // namespace cpsrisk
