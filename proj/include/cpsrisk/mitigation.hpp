#pragma once

// Mitigation timing: a cyber mitigation must complete before the hazard
// develops, tau_m < tau_p + tau_s - tau_d. A non-positive deadline means no
// cyber mitigation can succeed and a mechanical solution is required.

#include <set>
#include <string>
#include <utility>
#include <vector>

#include "cpsrisk/model.hpp"

namespace cpsrisk {

struct MitigationTiming {
    double tau_p = 0.0;  // hazard development time, minutes
    double tau_s = 0.0;  // tolerable excursion time outside the envelope
    double tau_d = 0.0;  // detection time
    double tau_m = 0.0;  // mitigation implementation time
};

struct MitigationVerdict {
    bool feasible = false;
    double deadline = 0.0;
    double slack = 0.0;  // deadline - tau_m
};

double mitigation_deadline(double tau_p, double tau_s, double tau_d);

// Strict inequality: tau_m equal to the deadline is infeasible.
MitigationVerdict check_mitigation(const MitigationTiming& t);

// Outgoing transitions from a hazardous mode whose target is safe.
std::vector<std::pair<Event, Mode>> recovery_actions(const HybridAutomaton& model,
                                                     const Mode& hazardous_mode,
                                                     const std::set<std::string>& safe_modes);

}  // namespace cpsrisk
