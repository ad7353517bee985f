#pragma once

// Hazard execution tree: merged shortest paths from the initial mode to each
// hazardous mode, its trace extraction, and the mapping of process actions to
// an abstract cyber attack tree. Hazardous targets end up as leaves; the
// tie-break prefers non-hazardous predecessors, then declaration order.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "cpsrisk/attack.hpp"
#include "cpsrisk/model.hpp"

namespace cpsrisk {

struct HazardTree {
    struct Edge {
        std::string parent;
        std::string label;  // event actuator label, verbatim
        std::string child;
    };

    std::string root;
    std::vector<std::string> nodes;  // declaration order
    std::vector<Edge> edges;         // ordered by (child depth, declaration order)
    std::vector<std::string> mode_order;          // adjacency row/column labels
    std::vector<std::vector<int>> adjacency;      // M over all modes, 0/1
    std::vector<std::string> hazard_leaves;       // hazardous nodes present in the tree
    std::map<std::string, int> depth;             // node -> distance from root
    std::map<std::string, std::string> parent;    // child -> parent
    std::map<std::string, std::string> parent_label;
};

struct Trace {
    std::vector<std::string> modes;   // root ... hazard leaf
    std::vector<std::string> labels;  // one per hop
    std::string rendered;             // "S0 -[C2c]-> S2"
};

struct ActuatorAction {
    std::string system;  // "BPCS" or "SIS"
    std::string device;  // valve tag, e.g. "C2"
    std::string action;  // "Open" or "Close"

    std::string leaf_name() const;  // <System letter>(<Device>_<Action letter>)
};

struct ActuatorMap {
    std::map<std::string, ActuatorAction> entries;  // atomic label token -> action
};

// Throws UnreachableHazard listing hazardous modes with no path from root.
HazardTree hazard_tree(const HybridAutomaton& model, const Mode& root,
                       const std::set<std::string>& hazardous);

std::vector<Trace> traces(const HazardTree& tree);

// OR-rooted tree whose children are the traces; multi-step traces become
// sequential AND nodes, composite guard labels ("X2c || C3c") expand per
// connector. Throws UnmappedActuator on unresolved tokens.
AttackNode abstract_attack_tree(const HazardTree& tree, const ActuatorMap& map);

}  // namespace cpsrisk
