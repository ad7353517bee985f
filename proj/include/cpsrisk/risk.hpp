#pragma once

// Risk scoring and the security design constraint: normalized consequence
// cost, target risk from log r = -zeta*q, likelihood bound, design-point
// feasibility checks, and the log-log design curve.

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpsrisk/attack.hpp"
#include "cpsrisk/errors.hpp"

namespace cpsrisk {

struct RiskParams {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;  // weights, sum to 1
    double S = 0.0, S_m = 1.0;                    // safety loss / maximum
    double F = 0.0, F_m = 1.0;                    // financial loss / maximum
    double E = 0.0, E_m = 1.0;                    // environmental loss / maximum
    double zeta = 1.0;                            // target-risk proportionality constant
};

struct DesignPoint {
    double p_cps = 0.0;
    double p_c = 0.0;
    bool feasible = false;
    double margin = 0.0;  // log10 slack against the bound
};

struct DesignVerdict {
    double likelihood = 0.0;
    bool feasible = false;
    double margin = 0.0;
    bool degenerate = false;  // likelihood evaluated to zero
};

// q = alpha*S/S_m + beta*F/F_m + gamma*E/E_m; throws InvalidWeights /
// LossExceedsMax on violated invariants.
double normalized_cost(const RiskParams& p);

// r = 10^(-zeta*q). q must lie in [0,1] and zeta must be positive; q == 0 is
// degenerate (no hazard cost) and returns 1.
double target_risk(double q, double zeta);

// R = q * L, L in hazardous events per time interval.
double risk_score(double likelihood, double q);

// L_max = 10^(-(zeta*q + log10 q)); satisfies q * L_max == target_risk(q, zeta).
double likelihood_bound(double q, double zeta);

// Evaluates the likelihood polynomial under rare-event semantics and checks
// L <= bound; margin is log10(bound) - log10(L).
DesignVerdict check_design(const Polynomial& likelihood_poly, const Assignment& a, double bound);
DesignPoint check_design_point(double p_cps, double p_c, double bound);

// Points on the boundary P_CPS * P_c = bound, evenly spaced in log10 P_c.
// Returned pairs are (log10 P_CPS, log10 P_c); the feasible region lies below.
std::vector<std::pair<double, double>> design_curve(double bound,
                                                    std::pair<double, double> p_c_range,
                                                    int n_points);

struct AssumptionSet {
    std::map<std::string, int> fixed;            // variable -> 0 or 1
    std::map<std::string, std::string> aliases;  // variable -> replacement
};

// The reduction used to collapse the composed likelihood into
// (c5^2 c13^2 c15) * P_c: c5 = c7, c13 = c14 = c18, c8 = 0, c17 = 1, c21 = 0.
AssumptionSet paper_design_assumptions();

// Applies an assumption set via simultaneous substitution; throws
// AssumptionConflict when a variable is both aliased and fixed.
Polynomial reduce_to_design_equation(const Polynomial& likelihood,
                                     const AssumptionSet& assumptions);
Polynomial reduce_to_design_equation(const Polynomial& likelihood);

}  // namespace cpsrisk
