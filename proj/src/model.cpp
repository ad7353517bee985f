#include "cpsrisk/model.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <set>
#include <sstream>

namespace cpsrisk {

std::optional<std::size_t> HybridAutomaton::mode_index(const std::string& id) const {
    for (std::size_t i = 0; i < modes.size(); ++i)
        if (modes[i].id == id) return i;
    return std::nullopt;
}

std::optional<std::size_t> HybridAutomaton::variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return i;
    return std::nullopt;
}

bool Envelope::inside(const HybridAutomaton& model, const std::vector<double>& x) const {
    return !violated(model, x).has_value();
}

std::optional<std::size_t> Envelope::violated(const HybridAutomaton& model,
                                              const std::vector<double>& x) const {
    for (std::size_t i = 0; i < model.variables.size() && i < x.size(); ++i) {
        auto it = bounds.find(model.variables[i].name);
        if (it == bounds.end()) continue;
        if (x[i] < it->second.lower || x[i] > it->second.upper) return i;
    }
    return std::nullopt;
}

bool ValidationReport::ok() const {
    return std::none_of(entries.begin(), entries.end(),
                        [](const Violation& v) { return v.severity == Severity::Error; });
}

namespace {

void add(ValidationReport& r, Severity s, std::string code, std::string msg) {
    r.entries.push_back({s, std::move(code), std::move(msg)});
}

template <typename T, typename NameOf>
void check_unique(ValidationReport& r, const std::vector<T>& items, const char* what,
                  NameOf name_of) {
    std::set<std::string> seen;
    for (const auto& item : items) {
        const std::string n = name_of(item);
        if (n.empty()) add(r, Severity::Error, "empty-identifier", std::string(what) + " with empty name");
        if (!seen.insert(n).second)
            add(r, Severity::Error, "duplicate-identifier",
                std::string(what) + " '" + n + "' declared more than once");
    }
}

}  // namespace

ValidationReport validate_automaton(const HybridAutomaton& model, const Envelope& envelope) {
    ValidationReport r;
    check_unique(r, model.switches, "switch", [](const SwitchId& s) { return s.name; });
    check_unique(r, model.variables, "variable", [](const VariableId& v) { return v.name; });
    check_unique(r, model.modes, "mode", [](const Mode& m) { return m.id; });

    std::set<std::string> switch_names;
    for (const auto& s : model.switches) switch_names.insert(s.name);

    for (const auto& m : model.modes) {
        if (m.switch_state.size() != model.switches.size()) {
            add(r, Severity::Error, "incomplete-switch-state",
                "mode '" + m.id + "' does not assign every declared switch exactly once");
            continue;
        }
        for (const auto& [sw, v] : m.switch_state) {
            if (!switch_names.count(sw))
                add(r, Severity::Error, "unknown-switch",
                    "mode '" + m.id + "' assigns undeclared switch '" + sw + "'");
            else if (v != 0 && v != 1)
                add(r, Severity::Error, "non-binary-switch",
                    "mode '" + m.id + "' assigns switch '" + sw + "' a non-binary value");
        }
    }

    for (const auto& e : model.events) {
        if (!switch_names.count(e.switch_name))
            add(r, Severity::Error, "unknown-switch",
                "event targets undeclared switch '" + e.switch_name + "'");
        if (e.actuator_label.empty())
            add(r, Severity::Error, "empty-actuator-label",
                "event on switch '" + e.switch_name + "' has an empty actuator label");
    }

    // determinism of Sigma plus switch arithmetic of each edge
    std::set<std::pair<std::size_t, std::size_t>> seen_pairs;
    for (const auto& t : model.transitions) {
        if (t.source >= model.modes.size() || t.target >= model.modes.size() ||
            t.event >= model.events.size()) {
            add(r, Severity::Error, "dangling-transition", "transition references an unknown mode or event");
            continue;
        }
        if (!seen_pairs.insert({t.source, t.event}).second)
            add(r, Severity::Error, "nondeterministic-transition",
                "mode '" + model.modes[t.source].id + "' has more than one transition for event '" +
                    model.events[t.event].actuator_label + "'");
        const Mode& src = model.modes[t.source];
        const Mode& dst = model.modes[t.target];
        const Event& ev = model.events[t.event];
        auto expected = src.switch_state;
        expected[ev.switch_name] = ev.target_value;
        if (dst.switch_state != expected)
            add(r, Severity::Error, "inconsistent-switch-arithmetic",
                "transition " + src.id + " -> " + dst.id + " on '" + ev.actuator_label +
                    "' does not flip exactly the event switch");
    }

    if (model.initial_mode >= model.modes.size())
        add(r, Severity::Error, "bad-initial-mode", "initial mode index out of range");
    if (model.init_state.size() != model.variables.size())
        add(r, Severity::Error, "bad-init-state",
            "init_state must carry one value per declared variable");

    // reachability from the initial mode
    if (model.initial_mode < model.modes.size()) {
        std::vector<bool> reached(model.modes.size(), false);
        std::deque<std::size_t> queue{model.initial_mode};
        reached[model.initial_mode] = true;
        while (!queue.empty()) {
            std::size_t m = queue.front();
            queue.pop_front();
            for (const auto& t : model.transitions) {
                if (t.source == m && t.target < reached.size() && !reached[t.target]) {
                    reached[t.target] = true;
                    queue.push_back(t.target);
                }
            }
        }
        for (std::size_t i = 0; i < model.modes.size(); ++i)
            if (!reached[i])
                add(r, Severity::Warning, "unreachable-mode",
                    "mode '" + model.modes[i].id + "' is unreachable from the initial mode");
    }

    for (const auto& [var, b] : envelope.bounds) {
        if (!model.variable_index(var))
            add(r, Severity::Error, "envelope-unknown-variable",
                "envelope bounds undeclared variable '" + var + "'");
        if (!(b.lower < b.upper))
            add(r, Severity::Error, "empty-envelope-interval",
                "envelope interval for '" + var + "' is empty");
    }

    return r;
}

ValidationReport validate_automaton(const HybridAutomaton& model, const Envelope& envelope,
                                    const std::vector<std::string>& known_flows) {
    ValidationReport r = validate_automaton(model, envelope);
    for (const auto& m : model.modes) {
        if (std::find(known_flows.begin(), known_flows.end(), m.flow_ref) == known_flows.end())
            r.entries.push_back({Severity::Error, "unresolved-flow",
                                 "mode '" + m.id + "' binds unknown flow '" + m.flow_ref + "'"});
    }
    return r;
}

const Mode& apply_event(const HybridAutomaton& model, const Mode& mode, const Event& event) {
    auto mi = model.mode_index(mode.id);
    if (!mi) throw NoSuchTransition("unknown mode '" + mode.id + "'");
    for (const auto& t : model.transitions) {
        if (t.source != *mi) continue;
        const Event& ev = model.events[t.event];
        if (ev.switch_name == event.switch_name && ev.target_value == event.target_value)
            return model.modes[t.target];
    }
    std::ostringstream os;
    os << "no transition from '" << mode.id << "' on " << event.switch_name << ":="
       << event.target_value;
    throw NoSuchTransition(os.str());
}

std::vector<std::pair<Event, Mode>> successors(const HybridAutomaton& model, const Mode& mode) {
    std::vector<std::pair<Event, Mode>> out;
    auto mi = model.mode_index(mode.id);
    if (!mi) return out;
    for (const auto& t : model.transitions)
        if (t.source == *mi) out.emplace_back(model.events[t.event], model.modes[t.target]);
    return out;
}

}  // namespace cpsrisk
