#include "cpsrisk/risk.hpp"

#include <cmath>
#include <limits>

namespace cpsrisk {

double normalized_cost(const RiskParams& p) {
    if (std::abs(p.alpha + p.beta + p.gamma - 1.0) > 1e-12)
        throw InvalidWeights("weights alpha+beta+gamma must sum to 1");
    if (p.alpha < 0 || p.beta < 0 || p.gamma < 0)
        throw InvalidWeights("weights must be non-negative");
    if (!(p.S_m > 0) || !(p.F_m > 0) || !(p.E_m > 0))
        throw InvalidWeights("normalization maxima must be positive");
    if (p.S < 0 || p.S > p.S_m) throw LossExceedsMax("safety loss outside [0, S_m]");
    if (p.F < 0 || p.F > p.F_m) throw LossExceedsMax("financial loss outside [0, F_m]");
    if (p.E < 0 || p.E > p.E_m) throw LossExceedsMax("environmental loss outside [0, E_m]");
    return p.alpha * (p.S / p.S_m) + p.beta * (p.F / p.F_m) + p.gamma * (p.E / p.E_m);
}

double target_risk(double q, double zeta) {
    if (q < 0.0 || q > 1.0) throw Error("target_risk: q must lie in [0,1]");
    if (!(zeta > 0.0)) throw Error("target_risk: zeta must be positive");
    if (q == 0.0) return 1.0;  // degenerate: no hazard cost
    return std::pow(10.0, -zeta * q);
}

double risk_score(double likelihood, double q) {
    if (likelihood < 0.0) throw Error("risk_score: likelihood must be non-negative");
    return q * likelihood;
}

double likelihood_bound(double q, double zeta) {
    if (!(q > 0.0) || q > 1.0) throw Error("likelihood_bound: q must lie in (0,1]");
    if (!(zeta > 0.0)) throw Error("likelihood_bound: zeta must be positive");
    return std::pow(10.0, -(zeta * q + std::log10(q)));
}

DesignVerdict check_design(const Polynomial& likelihood_poly, const Assignment& a, double bound) {
    if (!(bound > 0.0) || bound > 1.0) throw Error("check_design: bound must lie in (0,1]");
    DesignVerdict v;
    v.likelihood = likelihood_poly.eval(a);
    v.feasible = v.likelihood <= bound;
    if (v.likelihood <= 0.0) {
        v.degenerate = true;
        v.margin = std::numeric_limits<double>::infinity();
    } else {
        v.margin = std::log10(bound) - std::log10(v.likelihood);
    }
    return v;
}

DesignPoint check_design_point(double p_cps, double p_c, double bound) {
    DesignPoint d;
    d.p_cps = p_cps;
    d.p_c = p_c;
    const double L = p_cps * p_c;
    d.feasible = L <= bound;
    d.margin = std::log10(bound) - std::log10(L);
    return d;
}

std::vector<std::pair<double, double>> design_curve(double bound,
                                                    std::pair<double, double> p_c_range,
                                                    int n_points) {
    const auto [lo, hi] = p_c_range;
    if (!(0.0 < lo && lo < hi && hi <= 1.0))
        throw Error("design_curve: require 0 < lo < hi <= 1");
    if (n_points < 2) throw Error("design_curve: need at least two points");
    if (!(bound > 0.0) || bound > 1.0) throw Error("design_curve: bound must lie in (0,1]");

    const double log_lo = std::log10(lo);
    const double log_hi = std::log10(hi);
    const double log_bound = std::log10(bound);
    std::vector<std::pair<double, double>> pts;
    pts.reserve(static_cast<std::size_t>(n_points));
    for (int i = 0; i < n_points; ++i) {
        const double log_pc = log_lo + (log_hi - log_lo) * i / (n_points - 1);
        pts.emplace_back(log_bound - log_pc, log_pc);
    }
    return pts;
}

AssumptionSet paper_design_assumptions() {
    AssumptionSet s;
    s.aliases = {{"c7", "c5"}, {"c14", "c13"}, {"c18", "c13"}};
    s.fixed = {{"c8", 0}, {"c17", 1}, {"c21", 0}};
    return s;
}

Polynomial reduce_to_design_equation(const Polynomial& likelihood,
                                     const AssumptionSet& assumptions) {
    Bindings b;
    for (const auto& [var, repl] : assumptions.aliases) b[var] = repl;
    for (const auto& [var, val] : assumptions.fixed) {
        if (b.count(var))
            throw AssumptionConflict("variable '" + var + "' is both aliased and fixed");
        b[var] = val;
    }
    return substitute(likelihood, b);
}

Polynomial reduce_to_design_equation(const Polynomial& likelihood) {
    return reduce_to_design_equation(likelihood, paper_design_assumptions());
}

}  // namespace cpsrisk
