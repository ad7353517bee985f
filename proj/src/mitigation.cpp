#include "cpsrisk/mitigation.hpp"

namespace cpsrisk {

double mitigation_deadline(double tau_p, double tau_s, double tau_d) {
    return tau_p + tau_s - tau_d;
}

MitigationVerdict check_mitigation(const MitigationTiming& t) {
    MitigationVerdict v;
    v.deadline = mitigation_deadline(t.tau_p, t.tau_s, t.tau_d);
    v.slack = v.deadline - t.tau_m;
    v.feasible = t.tau_m < v.deadline;
    return v;
}

std::vector<std::pair<Event, Mode>> recovery_actions(const HybridAutomaton& model,
                                                     const Mode& hazardous_mode,
                                                     const std::set<std::string>& safe_modes) {
    std::vector<std::pair<Event, Mode>> out;
    for (auto& [event, target] : successors(model, hazardous_mode))
        if (safe_modes.count(target.id)) out.emplace_back(event, target);
    return out;
}

}  // namespace cpsrisk
