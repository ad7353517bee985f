#include "cpsrisk/modelfile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace cpsrisk {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(trim(cur));
    if (!s.empty() && s.back() == sep) out.push_back("");
    return out;
}

double parse_double(const std::string& s, int line) {
    const std::string t = trim(s);
    if (t == "inf" || t == "+inf") return std::numeric_limits<double>::infinity();
    if (t == "-inf") return -std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::exception&) {
        throw ParseError("expected a number, got '" + t + "'", line);
    }
}

bool parse_bool(const std::string& s, int line) {
    const std::string t = trim(s);
    if (t == "true" || t == "1" || t == "yes") return true;
    if (t == "false" || t == "0" || t == "no") return false;
    throw ParseError("expected true/false, got '" + t + "'", line);
}

struct IniEntry {
    int line = 0;
    bool has_key = false;
    std::string key;
    std::string value;  // raw line when has_key is false
};

struct IniSection {
    int line = 0;
    std::string name;
    std::vector<IniEntry> entries;

    const IniEntry* find(const std::string& key) const {
        for (const auto& e : entries)
            if (e.has_key && e.key == key) return &e;
        return nullptr;
    }
    std::string require(const std::string& key) const {
        const IniEntry* e = find(key);
        if (!e) throw ParseError("section [" + name + "] is missing key '" + key + "'", line);
        return e->value;
    }
    double require_double(const std::string& key) const {
        const IniEntry* e = find(key);
        if (!e) throw ParseError("section [" + name + "] is missing key '" + key + "'", line);
        return parse_double(e->value, e->line);
    }
    std::optional<double> maybe_double(const std::string& key) const {
        const IniEntry* e = find(key);
        if (!e) return std::nullopt;
        return parse_double(e->value, e->line);
    }
};

std::vector<IniSection> read_ini(const std::string& text) {
    std::vector<IniSection> sections;
    std::istringstream is(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(is, raw)) {
        ++line_no;
        const std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw ParseError("unterminated section header", line_no);
            sections.push_back({line_no, trim(line.substr(1, line.size() - 2)), {}});
            continue;
        }
        if (sections.empty()) throw ParseError("entry before any [section]", line_no);
        const auto eq = line.find('=');
        IniEntry entry;
        entry.line = line_no;
        if (eq == std::string::npos) {
            entry.has_key = false;
            entry.value = line;
        } else {
            entry.has_key = true;
            entry.key = trim(line.substr(0, eq));
            entry.value = trim(line.substr(eq + 1));
        }
        sections.back().entries.push_back(std::move(entry));
    }
    return sections;
}

const IniSection* find_section(const std::vector<IniSection>& sections, const std::string& name) {
    for (const auto& s : sections)
        if (s.name == name) return &s;
    return nullptr;
}

// ------------------------------------------------------------- automaton

std::map<std::string, int> parse_switch_state(const std::string& value,
                                              const std::vector<SwitchId>& switches, int line) {
    std::map<std::string, int> state;
    const std::string v = trim(value);
    // compact form: one 0/1 per declared switch, optionally blank separated
    std::string bits;
    for (char c : v)
        if (c == '0' || c == '1') bits.push_back(c);
    const bool compact =
        v.find(':') == std::string::npos && bits.size() == switches.size() &&
        std::all_of(v.begin(), v.end(), [](char c) { return c == '0' || c == '1' || c == ' '; });
    if (compact || (v.empty() && switches.empty())) {
        for (std::size_t i = 0; i < switches.size(); ++i)
            state[switches[i].name] = bits[i] - '0';
        return state;
    }
    for (const auto& item : split(v, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos)
            throw ParseError("expected '<switch>:<0|1>' in mode state, got '" + item + "'", line);
        const std::string name = trim(item.substr(0, colon));
        state[name] = static_cast<int>(parse_double(item.substr(colon + 1), line));
    }
    return state;
}

HybridAutomaton parse_automaton(const std::vector<IniSection>& sections) {
    const IniSection* autosec = find_section(sections, "automaton");
    if (!autosec) throw ParseError("missing [automaton] section", 1);

    HybridAutomaton a;
    for (const auto& s : split(autosec->require("switches"), ','))
        if (!s.empty()) a.switches.push_back({s});
    for (const auto& v : split(autosec->require("variables"), ',')) {
        const auto colon = v.find(':');
        if (colon == std::string::npos)
            a.variables.push_back({v, ""});
        else
            a.variables.push_back({trim(v.substr(0, colon)), trim(v.substr(colon + 1))});
    }
    const std::string default_flow =
        autosec->find("flow") ? autosec->find("flow")->value : std::string("cstr");
    const bool product =
        autosec->find("product_of_switches")
            ? parse_bool(autosec->find("product_of_switches")->value,
                         autosec->find("product_of_switches")->line)
            : false;

    // modes
    const IniSection* modesec = find_section(sections, "modes");
    if (modesec) {
        for (const auto& e : modesec->entries) {
            if (!e.has_key) throw ParseError("mode entries use '<name> = <state>'", e.line);
            Mode m;
            m.id = e.key;
            m.switch_state = parse_switch_state(e.value, a.switches, e.line);
            m.flow_ref = default_flow;
            a.modes.push_back(std::move(m));
        }
    }
    if (product && a.modes.empty()) {
        const std::size_t n = a.switches.size();
        for (std::size_t code = 0; code < (1u << n); ++code) {
            Mode m;
            std::string bits;
            for (std::size_t i = 0; i < n; ++i) {
                const int v = (code >> (n - 1 - i)) & 1;
                bits.push_back(static_cast<char>('0' + v));
                m.switch_state[a.switches[i].name] = v;
            }
            m.id = "m" + bits;
            m.flow_ref = default_flow;
            a.modes.push_back(std::move(m));
        }
    }

    if (const IniSection* flowsec = find_section(sections, "flow_overrides")) {
        for (const auto& e : flowsec->entries) {
            auto mi = a.mode_index(e.key);
            if (!mi) throw CrossRefError("flow override for unknown mode '" + e.key + "'");
            a.modes[*mi].flow_ref = e.value;
        }
    }
    if (const IniSection* annsec = find_section(sections, "annotations")) {
        for (const auto& e : annsec->entries) {
            auto mi = a.mode_index(e.key);
            if (!mi) throw CrossRefError("annotation for unknown mode '" + e.key + "'");
            a.modes[*mi].annotation = e.value;
        }
    }

    // events: one per (switch, target) with an optional display label
    std::map<std::pair<std::string, int>, std::string> labels;
    if (const IniSection* labsec = find_section(sections, "event_labels")) {
        for (const auto& e : labsec->entries) {
            const auto colon = e.key.find(':');
            if (colon == std::string::npos)
                throw ParseError("event label keys use '<switch>:<0|1>'", e.line);
            labels[{trim(e.key.substr(0, colon)),
                    static_cast<int>(parse_double(e.key.substr(colon + 1), e.line))}] = e.value;
        }
    }
    auto event_index = [&a](const std::string& sw, int v) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < a.events.size(); ++i)
            if (a.events[i].switch_name == sw && a.events[i].target_value == v) return i;
        return std::nullopt;
    };
    auto ensure_event = [&](const std::string& sw, int v) {
        if (auto i = event_index(sw, v)) return *i;
        Event ev;
        ev.switch_name = sw;
        ev.target_value = v;
        auto it = labels.find({sw, v});
        ev.actuator_label = it != labels.end() ? it->second : sw + ":=" + std::to_string(v);
        a.events.push_back(std::move(ev));
        return a.events.size() - 1;
    };
    for (const auto& sw : a.switches) {
        ensure_event(sw.name, 0);
        ensure_event(sw.name, 1);
    }

    // transitions
    if (product) {
        auto mode_with_state = [&a](const std::map<std::string, int>& st) {
            for (std::size_t i = 0; i < a.modes.size(); ++i)
                if (a.modes[i].switch_state == st) return std::optional<std::size_t>(i);
            return std::optional<std::size_t>();
        };
        if (a.modes.size() != (1u << a.switches.size()))
            throw CrossRefError("product_of_switches expects all 2^n switch states to be named");
        for (std::size_t mi = 0; mi < a.modes.size(); ++mi) {
            for (const auto& sw : a.switches) {
                auto st = a.modes[mi].switch_state;
                st[sw.name] = 1 - st[sw.name];
                auto ti = mode_with_state(st);
                if (!ti)
                    throw CrossRefError("no mode declared for a switch state reachable from '" +
                                        a.modes[mi].id + "'");
                a.transitions.push_back({mi, *event_index(sw.name, st[sw.name]), *ti});
            }
        }
    } else if (const IniSection* transec = find_section(sections, "transitions")) {
        // one item per line: <source> -> <target> : <switch>=<0|1>
        for (const auto& e : transec->entries) {
            const std::string raw = e.has_key ? e.key + "=" + e.value : e.value;
            const auto arrow = raw.find("->");
            const auto colon = raw.find(':', arrow == std::string::npos ? 0 : arrow);
            if (arrow == std::string::npos || colon == std::string::npos)
                throw ParseError("transitions use '<source> -> <target> : <switch>=<0|1>'", e.line);
            const std::string src = trim(raw.substr(0, arrow));
            const std::string dst = trim(raw.substr(arrow + 2, colon - arrow - 2));
            const std::string guard = trim(raw.substr(colon + 1));
            const auto eq = guard.find('=');
            if (eq == std::string::npos)
                throw ParseError("transition guard uses '<switch>=<0|1>'", e.line);
            const std::string sw = trim(guard.substr(0, eq));
            const int v = static_cast<int>(parse_double(guard.substr(eq + 1), e.line));
            auto si = a.mode_index(src), di = a.mode_index(dst);
            if (!si) throw CrossRefError("transition from unknown mode '" + src + "'");
            if (!di) throw CrossRefError("transition to unknown mode '" + dst + "'");
            a.transitions.push_back({*si, ensure_event(sw, v), *di});
        }
    }

    const std::string initial = autosec->require("initial");
    auto ii = a.mode_index(initial);
    if (!ii) throw CrossRefError("initial mode '" + initial + "' is not declared");
    a.initial_mode = *ii;

    for (const auto& s : split(autosec->require("init_state"), ','))
        if (!s.empty()) a.init_state.push_back(parse_double(s, autosec->line));
    if (a.init_state.size() != a.variables.size())
        throw ParseError("init_state must list one value per variable", autosec->line);
    return a;
}

// ------------------------------------------------------------- plant & loops

CstrParams parse_cstr_params(const IniSection& sec) {
    CstrParams p;
    p.F0 = sec.require_double("F0");
    p.CA0 = sec.require_double("CA0");
    p.T0 = sec.require_double("T0");
    p.V = sec.require_double("V");
    p.A = sec.require_double("A");
    p.F = sec.require_double("F");
    p.k0 = sec.require_double("k0");
    p.E_over_R = sec.require_double("E_over_R");
    p.lambda = sec.require_double("lambda");
    p.rho_cp = sec.require_double("rho_cp");
    p.VJ = sec.require_double("VJ");
    p.TJ0 = sec.require_double("TJ0");
    p.FJ0 = sec.require_double("FJ0");
    p.rhoJ_cJ = sec.require_double("rhoJ_cJ");
    p.UA = sec.require_double("UA");
    if (auto v = sec.maybe_double("wetted_ref_level")) p.wetted_ref_level = *v;
    if (auto v = sec.maybe_double("outlet_taper_level")) p.outlet_taper_level = *v;
    for (double v : {p.F0, p.CA0, p.T0, p.V, p.A, p.F, p.k0, p.E_over_R, p.lambda, p.rho_cp, p.VJ,
                     p.TJ0, p.FJ0, p.rhoJ_cJ, p.UA, p.wetted_ref_level, p.outlet_taper_level})
        if (!(v > 0.0)) throw ParseError("cstr plant parameters must be strictly positive", sec.line);
    return p;
}

PidParams parse_controller(const IniSection& sec, const HybridAutomaton& a) {
    PidParams c;
    c.name = sec.name.substr(std::string("controller.").size());
    c.measures = sec.require("measures");
    if (!a.variable_index(c.measures))
        throw CrossRefError("controller '" + c.name + "' measures unknown variable '" +
                            c.measures + "'");
    const std::string manip = sec.require("manipulates");
    if (manip == "inlet_flow")
        c.manipulates = Manipulates::InletFlow;
    else if (manip == "jacket_flow")
        c.manipulates = Manipulates::JacketFlow;
    else
        throw ParseError("manipulates must be inlet_flow or jacket_flow", sec.line);
    c.stream = sec.require("stream");
    bool known_stream = false;
    for (const auto& s : a.switches) known_stream |= s.name == c.stream;
    if (!known_stream)
        throw CrossRefError("controller '" + c.name + "' gates on unknown stream '" + c.stream +
                            "'");
    c.gain = sec.require_double("Kp");
    c.integral_time = sec.require_double("Ti");
    c.derivative_time = sec.find("Td") ? sec.require_double("Td") : 0.0;
    c.setpoint = sec.require_double("setpoint");
    c.out_min = sec.require_double("out_min");
    c.out_max = sec.require_double("out_max");
    if (!(c.integral_time > 0.0)) throw ParseError("controller Ti must be positive", sec.line);
    if (!(c.out_min < c.out_max))
        throw ParseError("controller output limits must satisfy min < max", sec.line);
    return c;
}

// ------------------------------------------------------------- attack trees

std::vector<AttackTreeSpec> parse_attack_tree_sections(const std::vector<IniSection>& sections,
                                                       const std::string& where) {
    std::vector<AttackTreeSpec> out;
    struct Raw {
        const IniSection* tree = nullptr;
        const IniSection* nodes = nullptr;
        const IniSection* basic = nullptr;
        const IniSection* simplify = nullptr;
    };
    std::vector<Raw> groups;
    for (const auto& s : sections) {
        if (s.name == "tree") {
            groups.push_back({&s, nullptr, nullptr, nullptr});
        } else if (s.name == "nodes" || s.name == "basic" || s.name == "simplify") {
            if (groups.empty()) throw ParseError("[" + s.name + "] before any [tree]", s.line);
            if (s.name == "nodes") groups.back().nodes = &s;
            if (s.name == "basic") groups.back().basic = &s;
            if (s.name == "simplify") groups.back().simplify = &s;
        }
    }
    for (const auto& g : groups) {
        AttackTreeSpec spec;
        spec.name = g.tree->require("name");
        if (const auto* role = g.tree->find("role")) spec.role = role->value;
        const std::string root_id = g.tree->require("root");

        std::map<std::string, std::pair<int, std::string>> gate_defs;  // id -> (line, def)
        if (g.nodes)
            for (const auto& e : g.nodes->entries) {
                if (!e.has_key) throw ParseError("node entries use '<id> = GATE(...)'", e.line);
                gate_defs[e.key] = {e.line, e.value};
            }
        if (g.basic)
            for (const auto& e : g.basic->entries) spec.basic_descriptions[e.key] = e.value;
        if (g.simplify)
            for (const auto& e : g.simplify->entries)
                spec.simplify[e.key] = static_cast<int>(parse_double(e.value, e.line));

        std::function<AttackNode(const std::string&, std::vector<std::string>&)> build =
            [&](const std::string& id, std::vector<std::string>& path) -> AttackNode {
            if (std::find(path.begin(), path.end(), id) != path.end())
                throw CrossRefError("attack tree '" + spec.name + "' has a cycle through '" + id +
                                    "'");
            auto def = gate_defs.find(id);
            if (def == gate_defs.end()) {
                if (!spec.basic_descriptions.count(id))
                    throw CrossRefError("attack tree '" + spec.name +
                                        "' references undeclared node '" + id + "' in " + where);
                return AttackNode::basic(id, spec.basic_descriptions.at(id));
            }
            const auto& [line, text] = def->second;
            const auto open = text.find('(');
            if (open == std::string::npos || text.back() != ')')
                throw ParseError("gate definitions use 'AND(a, b)' or 'OR(a, b)'", line);
            const std::string gate = trim(text.substr(0, open));
            const std::string args = text.substr(open + 1, text.size() - open - 2);
            std::vector<AttackNode> children;
            path.push_back(id);
            for (const auto& child : split(args, ','))
                if (!child.empty()) children.push_back(build(child, path));
            path.pop_back();
            if (gate == "AND") return AttackNode::and_(id, std::move(children));
            if (gate == "OR") return AttackNode::or_(id, std::move(children));
            throw ParseError("unknown gate '" + gate + "' (expected AND or OR)", line);
        };
        std::vector<std::string> path;
        spec.root = build(root_id, path);
        out.push_back(std::move(spec));
    }
    if (out.empty()) throw ParseError("no [tree] section in " + where, 1);
    return out;
}

RiskParams parse_risk_sections(const std::vector<IniSection>& sections) {
    const IniSection* sec = find_section(sections, "risk");
    if (!sec) throw ParseError("missing [risk] section", 1);
    RiskParams r;
    r.alpha = sec->require_double("alpha");
    r.beta = sec->require_double("beta");
    r.gamma = sec->require_double("gamma");
    r.S = sec->require_double("S");
    r.S_m = sec->require_double("S_m");
    r.F = sec->require_double("F");
    r.F_m = sec->require_double("F_m");
    r.E = sec->require_double("E");
    r.E_m = sec->require_double("E_m");
    r.zeta = sec->require_double("zeta");
    return r;
}

AssumptionSet parse_substitution_sections(const std::vector<IniSection>& sections) {
    const IniSection* sec = find_section(sections, "assume");
    if (!sec) throw ParseError("missing [assume] section", 1);
    AssumptionSet s;
    for (const auto& e : sec->entries) {
        if (!e.has_key) throw ParseError("assumptions use '<var> = 0|1|<alias>'", e.line);
        if (e.value == "0" || e.value == "1")
            s.fixed[e.key] = e.value == "1";
        else
            s.aliases[e.key] = e.value;
    }
    return s;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open '" + path + "'", 0);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

// ------------------------------------------------------- bundle cross-checks

void check_bundle(ModelBundle& b) {
    const auto flows = b.plant.flow_names();
    for (const auto& m : b.automaton.modes)
        if (std::find(flows.begin(), flows.end(), m.flow_ref) == flows.end())
            throw CrossRefError("mode '" + m.id + "' binds unknown flow '" + m.flow_ref + "'");

    if (b.plant.cstr) {
        const std::vector<std::string> layout = {"L", "T", "T_J", "C_A"};
        for (std::size_t i = 0; i < layout.size(); ++i)
            if (i >= b.automaton.variables.size() || b.automaton.variables[i].name != layout[i])
                throw CrossRefError("the cstr plant requires variables (L, T, T_J, C_A)");
        for (const auto& sw : {"inlet", "outlet", "coolant"}) {
            bool found = false;
            for (const auto& s : b.automaton.switches) found |= s.name == sw;
            if (!found)
                throw CrossRefError(std::string("the cstr plant requires switch '") + sw + "'");
        }
        for (const auto& c : b.plant.cstr->controllers)
            if (c.measures != "L" && c.measures != "T")
                throw CrossRefError("cstr controllers can only measure L or T");
    }
    for (const auto& [name, rates] : b.plant.rate_tables)
        if (rates.size() != b.automaton.variables.size())
            throw CrossRefError("flow '" + name + "' must list one rate per variable");

    for (const auto& [var, bound] : b.envelope.bounds)
        if (!b.automaton.variable_index(var))
            throw CrossRefError("envelope bounds undeclared variable '" + var + "'");

    if (!b.actuator_map.entries.empty()) {
        std::set<std::pair<std::string, std::string>> devices;
        for (const auto& [token, act] : b.actuator_map.entries) {
            if (act.system != "BPCS" && act.system != "SIS")
                throw CrossRefError("actuator system for '" + token + "' must be BPCS or SIS");
            if (act.action != "Open" && act.action != "Close")
                throw CrossRefError("actuator action for '" + token + "' must be Open or Close");
            if (!devices.insert({act.system, act.device + "_" + act.action}).second)
                throw CrossRefError("duplicate actuator mapping for device '" + act.device + "'");
        }
        for (const auto& ev : b.automaton.events) {
            std::string label = ev.actuator_label;
            const bool has_or = label.find("||") != std::string::npos;
            for (const auto& tok : split(label, has_or ? '|' : '&')) {
                if (tok.empty()) continue;
                if (!b.actuator_map.entries.count(tok))
                    throw CrossRefError("event label token '" + tok +
                                        "' has no actuator mapping");
            }
        }
    }

    for (const auto& [var, p] : b.assignment.values)
        if (p < 0.0 || p > 1.0)
            throw CrossRefError("assignment for '" + var + "' is outside [0,1]");
}

}  // namespace

const AttackTreeSpec* ModelBundle::tree(const std::string& name) const {
    for (const auto& t : attack_trees)
        if (t.name == name) return &t;
    return nullptr;
}

std::string fnv1a64_file(const std::string& path) {
    const std::string data = read_file(path);
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::vector<AttackTreeSpec> parse_attack_tree_file(const std::string& path) {
    return parse_attack_tree_sections(read_ini(read_file(path)), path);
}

RiskParams parse_risk_file(const std::string& path) {
    return parse_risk_sections(read_ini(read_file(path)));
}

AssumptionSet parse_substitution_file(const std::string& path) {
    return parse_substitution_sections(read_ini(read_file(path)));
}

ModelBundle parse_model_text(const std::string& text, const std::string& source_dir,
                             const std::string& source_name) {
    const auto sections = read_ini(text);
    ModelBundle b;
    b.source_path = source_name;
    b.automaton = parse_automaton(sections);

    if (const IniSection* env = find_section(sections, "envelope")) {
        for (const auto& e : env->entries) {
            const auto parts = split(e.value, ',');
            if (parts.size() != 2)
                throw ParseError("envelope entries use '<variable> = <lower>, <upper>'", e.line);
            Envelope::Bound bound;
            bound.lower = parse_double(parts[0], e.line);
            bound.upper = parse_double(parts[1], e.line);
            if (!(bound.lower < bound.upper))
                throw ParseError("envelope interval for '" + e.key + "' is empty", e.line);
            b.envelope.bounds[e.key] = bound;
        }
    }

    if (const IniSection* plant = find_section(sections, "plant")) {
        const std::string type = plant->require("type");
        if (type == "cstr") {
            CstrSystem sys;
            sys.params = parse_cstr_params(*plant);
            for (const auto& s : sections)
                if (s.name.rfind("controller.", 0) == 0)
                    sys.controllers.push_back(parse_controller(s, b.automaton));
            b.plant.cstr = std::move(sys);
        } else if (type != "none") {
            throw ParseError("plant type must be cstr or none", plant->line);
        }
    }
    for (const auto& s : sections) {
        if (s.name.rfind("flow.", 0) != 0) continue;
        const std::string name = s.name.substr(5);
        std::vector<double> rates(b.automaton.variables.size(), 0.0);
        for (const auto& e : s.entries) {
            auto vi = b.automaton.variable_index(e.key);
            if (!vi) throw CrossRefError("flow '" + name + "' rates unknown variable '" + e.key + "'");
            rates[*vi] = parse_double(e.value, e.line);
        }
        b.plant.rate_tables[name] = std::move(rates);
    }

    if (const IniSection* acts = find_section(sections, "actuator_map")) {
        for (const auto& e : acts->entries) {
            const auto parts = split(e.value, ',');
            if (parts.size() != 3)
                throw ParseError("actuator entries use '<token> = <system>, <device>, <action>'",
                                 e.line);
            b.actuator_map.entries[e.key] = {parts[0], parts[1], parts[2]};
        }
    }

    if (const IniSection* assign = find_section(sections, "assignment")) {
        for (const auto& e : assign->entries)
            b.assignment.values[e.key] = parse_double(e.value, e.line);
    }
    if (find_section(sections, "risk")) b.risk = parse_risk_sections(sections);
    if (const IniSection* mit = find_section(sections, "mitigation")) {
        if (auto v = mit->maybe_double("tau_s")) b.mitigation.tau_s = *v;
        if (auto v = mit->maybe_double("tau_d")) b.mitigation.tau_d = *v;
        if (auto v = mit->maybe_double("tau_m")) b.mitigation.tau_m = *v;
    }

    if (const IniSection* inc = find_section(sections, "include")) {
        auto resolve = [&source_dir](const std::string& rel) {
            fs::path p(rel);
            return p.is_absolute() ? p.string() : (fs::path(source_dir) / p).string();
        };
        if (const auto* trees = inc->find("attack_trees")) {
            for (const auto& rel : split(trees->value, ',')) {
                if (rel.empty()) continue;
                const std::string path = resolve(rel);
                auto parsed = parse_attack_tree_file(path);
                b.file_hashes[fs::path(rel).filename().string()] = fnv1a64_file(path);
                for (auto& t : parsed) b.attack_trees.push_back(std::move(t));
            }
        }
        if (const auto* riskfile = inc->find("risk")) {
            const std::string path = resolve(riskfile->value);
            b.risk = parse_risk_file(path);
            b.file_hashes[fs::path(riskfile->value).filename().string()] = fnv1a64_file(path);
        }
        if (const auto* subst = inc->find("substitutions")) {
            const std::string path = resolve(subst->value);
            b.design_assumptions = parse_substitution_file(path);
            b.file_hashes[fs::path(subst->value).filename().string()] = fnv1a64_file(path);
        }
    }

    check_bundle(b);
    return b;
}

// --------------------------------------------------------------------- JSON

namespace {

using nlohmann::json;

json automaton_to_json(const HybridAutomaton& a) {
    json j;
    j["switches"] = json::array();
    for (const auto& s : a.switches) j["switches"].push_back(s.name);
    j["variables"] = json::array();
    for (const auto& v : a.variables) j["variables"].push_back({{"name", v.name}, {"unit", v.unit}});
    j["modes"] = json::array();
    for (const auto& m : a.modes) {
        json jm{{"id", m.id}, {"switch_state", m.switch_state}, {"flow", m.flow_ref}};
        if (m.annotation) jm["annotation"] = *m.annotation;
        j["modes"].push_back(std::move(jm));
    }
    j["events"] = json::array();
    for (const auto& e : a.events)
        j["events"].push_back(
            {{"switch", e.switch_name}, {"value", e.target_value}, {"label", e.actuator_label}});
    j["transitions"] = json::array();
    for (const auto& t : a.transitions)
        j["transitions"].push_back({{"source", a.modes[t.source].id},
                                    {"event", t.event},
                                    {"target", a.modes[t.target].id}});
    j["initial"] = a.modes[a.initial_mode].id;
    j["init_state"] = a.init_state;
    return j;
}

HybridAutomaton automaton_from_json(const json& j) {
    HybridAutomaton a;
    for (const auto& s : j.at("switches")) a.switches.push_back({s.get<std::string>()});
    for (const auto& v : j.at("variables"))
        a.variables.push_back({v.at("name").get<std::string>(), v.value("unit", "")});
    for (const auto& m : j.at("modes")) {
        Mode mode;
        mode.id = m.at("id").get<std::string>();
        mode.switch_state = m.at("switch_state").get<std::map<std::string, int>>();
        mode.flow_ref = m.value("flow", "cstr");
        if (m.contains("annotation")) mode.annotation = m.at("annotation").get<std::string>();
        a.modes.push_back(std::move(mode));
    }
    for (const auto& e : j.at("events")) {
        Event ev;
        ev.switch_name = e.at("switch").get<std::string>();
        ev.target_value = e.at("value").get<int>();
        ev.actuator_label = e.at("label").get<std::string>();
        a.events.push_back(std::move(ev));
    }
    for (const auto& t : j.at("transitions")) {
        Transition tr;
        auto si = a.mode_index(t.at("source").get<std::string>());
        auto di = a.mode_index(t.at("target").get<std::string>());
        if (!si || !di) throw CrossRefError("transition references an unknown mode");
        tr.source = *si;
        tr.target = *di;
        tr.event = t.at("event").get<std::size_t>();
        if (tr.event >= a.events.size()) throw CrossRefError("transition references an unknown event");
        a.transitions.push_back(tr);
    }
    auto ii = a.mode_index(j.at("initial").get<std::string>());
    if (!ii) throw CrossRefError("initial mode is not declared");
    a.initial_mode = *ii;
    a.init_state = j.at("init_state").get<std::vector<double>>();
    return a;
}

json node_to_json(const AttackNode& n) {
    json j;
    j["id"] = n.id;
    switch (n.gate) {
        case Gate::Basic:
            j["gate"] = "BASIC";
            j["var"] = n.var;
            break;
        case Gate::And:
            j["gate"] = "AND";
            break;
        case Gate::Or:
            j["gate"] = "OR";
            break;
    }
    if (!n.description.empty()) j["description"] = n.description;
    if (!n.children.empty()) {
        j["children"] = json::array();
        for (const auto& c : n.children) j["children"].push_back(node_to_json(c));
    }
    return j;
}

AttackNode node_from_json(const json& j) {
    AttackNode n;
    n.id = j.at("id").get<std::string>();
    const std::string gate = j.at("gate").get<std::string>();
    n.gate = gate == "BASIC" ? Gate::Basic : gate == "AND" ? Gate::And : Gate::Or;
    if (n.gate == Gate::Basic) n.var = j.at("var").get<std::string>();
    n.description = j.value("description", "");
    if (j.contains("children"))
        for (const auto& c : j.at("children")) n.children.push_back(node_from_json(c));
    return n;
}

json bindings_to_json(const Bindings& b) {
    json j = json::object();
    for (const auto& [var, v] : b) {
        if (const int* fixed = std::get_if<int>(&v))
            j[var] = *fixed;
        else
            j[var] = std::get<std::string>(v);
    }
    return j;
}

Bindings bindings_from_json(const json& j) {
    Bindings b;
    for (const auto& [var, v] : j.items()) {
        if (v.is_number_integer())
            b[var] = v.get<int>();
        else
            b[var] = v.get<std::string>();
    }
    return b;
}

}  // namespace

nlohmann::json bundle_to_json(const ModelBundle& b) {
    json j;
    j["automaton"] = automaton_to_json(b.automaton);
    j["envelope"] = json::object();
    for (const auto& [var, bound] : b.envelope.bounds) {
        json jb = json::object();
        if (std::isfinite(bound.lower)) jb["lower"] = bound.lower;
        if (std::isfinite(bound.upper)) jb["upper"] = bound.upper;
        j["envelope"][var] = std::move(jb);
    }
    if (b.plant.cstr) {
        const CstrParams& p = b.plant.cstr->params;
        j["plant"] = {{"type", "cstr"},
                      {"F0", p.F0},
                      {"CA0", p.CA0},
                      {"T0", p.T0},
                      {"V", p.V},
                      {"A", p.A},
                      {"F", p.F},
                      {"k0", p.k0},
                      {"E_over_R", p.E_over_R},
                      {"lambda", p.lambda},
                      {"rho_cp", p.rho_cp},
                      {"VJ", p.VJ},
                      {"TJ0", p.TJ0},
                      {"FJ0", p.FJ0},
                      {"rhoJ_cJ", p.rhoJ_cJ},
                      {"UA", p.UA},
                      {"wetted_ref_level", p.wetted_ref_level},
                      {"outlet_taper_level", p.outlet_taper_level}};
        j["controllers"] = json::array();
        for (const auto& c : b.plant.cstr->controllers)
            j["controllers"].push_back(
                {{"name", c.name},
                 {"measures", c.measures},
                 {"manipulates",
                  c.manipulates == Manipulates::InletFlow ? "inlet_flow" : "jacket_flow"},
                 {"stream", c.stream},
                 {"Kp", c.gain},
                 {"Ti", c.integral_time},
                 {"Td", c.derivative_time},
                 {"setpoint", c.setpoint},
                 {"out_min", c.out_min},
                 {"out_max", c.out_max}});
    }
    if (!b.plant.rate_tables.empty()) {
        j["flows"] = json::object();
        for (const auto& [name, rates] : b.plant.rate_tables) j["flows"][name] = rates;
    }
    if (!b.actuator_map.entries.empty()) {
        j["actuator_map"] = json::object();
        for (const auto& [token, act] : b.actuator_map.entries)
            j["actuator_map"][token] = {
                {"system", act.system}, {"device", act.device}, {"action", act.action}};
    }
    if (!b.attack_trees.empty()) {
        j["attack_trees"] = json::array();
        for (const auto& t : b.attack_trees) {
            json jt{{"name", t.name}, {"root", node_to_json(t.root)}};
            if (!t.role.empty()) jt["role"] = t.role;
            if (!t.simplify.empty()) jt["simplify"] = bindings_to_json(t.simplify);
            j["attack_trees"].push_back(std::move(jt));
        }
    }
    if (!b.assignment.values.empty()) j["assignment"] = b.assignment.values;
    if (b.risk) {
        const RiskParams& r = *b.risk;
        j["risk"] = {{"alpha", r.alpha}, {"beta", r.beta},   {"gamma", r.gamma}, {"S", r.S},
                     {"S_m", r.S_m},     {"F", r.F},         {"F_m", r.F_m},     {"E", r.E},
                     {"E_m", r.E_m},     {"zeta", r.zeta}};
    }
    if (b.design_assumptions) {
        json ja = json::object();
        for (const auto& [var, v] : b.design_assumptions->fixed) ja[var] = v;
        for (const auto& [var, alias] : b.design_assumptions->aliases) ja[var] = alias;
        j["design_assumptions"] = std::move(ja);
    }
    j["mitigation"] = {{"tau_s", b.mitigation.tau_s}, {"tau_d", b.mitigation.tau_d}};
    if (b.mitigation.tau_m) j["mitigation"]["tau_m"] = *b.mitigation.tau_m;
    return j;
}

ModelBundle parse_model_json(const nlohmann::json& doc, const std::string&,
                             const std::string& source_name) {
    ModelBundle b;
    b.source_path = source_name;
    try {
        b.automaton = automaton_from_json(doc.at("automaton"));
        if (doc.contains("envelope")) {
            for (const auto& [var, jb] : doc.at("envelope").items()) {
                Envelope::Bound bound;
                if (jb.contains("lower")) bound.lower = jb.at("lower").get<double>();
                if (jb.contains("upper")) bound.upper = jb.at("upper").get<double>();
                b.envelope.bounds[var] = bound;
            }
        }
        if (doc.contains("plant") && doc.at("plant").value("type", "") == "cstr") {
            CstrSystem sys;
            const auto& p = doc.at("plant");
            CstrParams& c = sys.params;
            c.F0 = p.at("F0");
            c.CA0 = p.at("CA0");
            c.T0 = p.at("T0");
            c.V = p.at("V");
            c.A = p.at("A");
            c.F = p.at("F");
            c.k0 = p.at("k0");
            c.E_over_R = p.at("E_over_R");
            c.lambda = p.at("lambda");
            c.rho_cp = p.at("rho_cp");
            c.VJ = p.at("VJ");
            c.TJ0 = p.at("TJ0");
            c.FJ0 = p.at("FJ0");
            c.rhoJ_cJ = p.at("rhoJ_cJ");
            c.UA = p.at("UA");
            c.wetted_ref_level = p.value("wetted_ref_level", c.wetted_ref_level);
            c.outlet_taper_level = p.value("outlet_taper_level", c.outlet_taper_level);
            if (doc.contains("controllers")) {
                for (const auto& jc : doc.at("controllers")) {
                    PidParams ctl;
                    ctl.name = jc.at("name");
                    ctl.measures = jc.at("measures");
                    ctl.manipulates = jc.at("manipulates") == "inlet_flow"
                                          ? Manipulates::InletFlow
                                          : Manipulates::JacketFlow;
                    ctl.stream = jc.at("stream");
                    ctl.gain = jc.at("Kp");
                    ctl.integral_time = jc.at("Ti");
                    ctl.derivative_time = jc.value("Td", 0.0);
                    ctl.setpoint = jc.at("setpoint");
                    ctl.out_min = jc.at("out_min");
                    ctl.out_max = jc.at("out_max");
                    sys.controllers.push_back(std::move(ctl));
                }
            }
            b.plant.cstr = std::move(sys);
        }
        if (doc.contains("flows"))
            for (const auto& [name, rates] : doc.at("flows").items())
                b.plant.rate_tables[name] = rates.get<std::vector<double>>();
        if (doc.contains("actuator_map"))
            for (const auto& [token, ja] : doc.at("actuator_map").items())
                b.actuator_map.entries[token] = {ja.at("system"), ja.at("device"), ja.at("action")};
        if (doc.contains("attack_trees")) {
            for (const auto& jt : doc.at("attack_trees")) {
                AttackTreeSpec spec;
                spec.name = jt.at("name");
                spec.role = jt.value("role", "");
                spec.root = node_from_json(jt.at("root"));
                if (jt.contains("simplify")) spec.simplify = bindings_from_json(jt.at("simplify"));
                b.attack_trees.push_back(std::move(spec));
            }
        }
        if (doc.contains("assignment"))
            b.assignment.values = doc.at("assignment").get<std::map<std::string, double>>();
        if (doc.contains("risk")) {
            RiskParams r;
            const auto& jr = doc.at("risk");
            r.alpha = jr.at("alpha");
            r.beta = jr.at("beta");
            r.gamma = jr.at("gamma");
            r.S = jr.at("S");
            r.S_m = jr.at("S_m");
            r.F = jr.at("F");
            r.F_m = jr.at("F_m");
            r.E = jr.at("E");
            r.E_m = jr.at("E_m");
            r.zeta = jr.at("zeta");
            b.risk = r;
        }
        if (doc.contains("design_assumptions")) {
            AssumptionSet s;
            for (const auto& [var, v] : doc.at("design_assumptions").items()) {
                if (v.is_number_integer() || v.is_boolean())
                    s.fixed[var] = v.is_boolean() ? (v.get<bool>() ? 1 : 0) : v.get<int>();
                else
                    s.aliases[var] = v.get<std::string>();
            }
            b.design_assumptions = std::move(s);
        }
        if (doc.contains("mitigation")) {
            const auto& jm = doc.at("mitigation");
            b.mitigation.tau_s = jm.value("tau_s", 0.0);
            b.mitigation.tau_d = jm.value("tau_d", 0.0);
            if (jm.contains("tau_m")) b.mitigation.tau_m = jm.at("tau_m").get<double>();
        }
    } catch (const json::exception& e) {
        throw ParseError(std::string("json model: ") + e.what(), 0);
    }
    check_bundle(b);
    return b;
}

ModelBundle parse_model(const std::string& path) {
    const std::string text = read_file(path);
    const std::string dir = fs::path(path).parent_path().string();
    const std::string name = fs::path(path).filename().string();

    const auto first = text.find_first_not_of(" \t\r\n");
    const bool is_json = fs::path(path).extension() == ".json" ||
                         (first != std::string::npos && text[first] == '{');
    ModelBundle b;
    if (is_json) {
        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("invalid json: ") + e.what(), 0);
        }
        b = parse_model_json(doc, dir, name);
    } else {
        b = parse_model_text(text, dir, name);
    }
    b.file_hashes[name] = fnv1a64_file(path);
    return b;
}

}  // namespace cpsrisk
