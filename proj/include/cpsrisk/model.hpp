#pragma once

// Hybrid automaton core: modes defined by binary stream switches, events that
// flip one switch, and a deterministic transition function. All values are
// immutable after construction; every operation here is a pure function.

#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpsrisk/errors.hpp"

namespace cpsrisk {

struct VariableId {
    std::string name;
    std::string unit;
};

struct SwitchId {
    std::string name;  // 0 = closed, 1 = open
};

struct Event {
    std::string switch_name;
    int target_value = 0;        // 0 or 1
    std::string actuator_label;  // used verbatim in traces and tree labels
};

struct Mode {
    std::string id;
    std::map<std::string, int> switch_state;  // switch name -> 0/1
    std::string flow_ref;
    std::optional<std::string> annotation;  // uninterpreted metadata
};

struct Transition {
    std::size_t source = 0;  // indices into modes / events
    std::size_t event = 0;
    std::size_t target = 0;
};

struct HybridAutomaton {
    std::vector<SwitchId> switches;
    std::vector<VariableId> variables;
    std::vector<Mode> modes;
    std::vector<Event> events;
    std::vector<Transition> transitions;
    std::size_t initial_mode = 0;
    std::vector<double> init_state;  // one value per variable

    const Mode& initial() const { return modes.at(initial_mode); }
    std::optional<std::size_t> mode_index(const std::string& id) const;
    std::optional<std::size_t> variable_index(const std::string& name) const;
};

struct Envelope {
    struct Bound {
        double lower = -std::numeric_limits<double>::infinity();
        double upper = std::numeric_limits<double>::infinity();
    };
    std::map<std::string, Bound> bounds;  // variable name -> bound

    // A state is inside while lower <= x <= upper for every bounded variable.
    bool inside(const HybridAutomaton& model, const std::vector<double>& x) const;
    // First declared variable strictly outside its bound, if any.
    std::optional<std::size_t> violated(const HybridAutomaton& model,
                                        const std::vector<double>& x) const;
};

enum class Severity { Error, Warning };

struct Violation {
    Severity severity = Severity::Error;
    std::string code;  // e.g. "nondeterministic-transition"
    std::string message;
};

struct ValidationReport {
    std::vector<Violation> entries;
    bool ok() const;  // no error-severity entries
    bool empty() const { return entries.empty(); }
};

// Reports structural problems instead of throwing; an empty report means the
// model is well formed. Flow references are only checked when a registry of
// known flow names is supplied.
ValidationReport validate_automaton(const HybridAutomaton& model, const Envelope& envelope);
ValidationReport validate_automaton(const HybridAutomaton& model, const Envelope& envelope,
                                    const std::vector<std::string>& known_flows);

// Sigma(mode, event); throws NoSuchTransition where undefined.
const Mode& apply_event(const HybridAutomaton& model, const Mode& mode, const Event& event);

// All transitions out of `mode`, in declaration order.
std::vector<std::pair<Event, Mode>> successors(const HybridAutomaton& model, const Mode& mode);

}  // namespace cpsrisk
