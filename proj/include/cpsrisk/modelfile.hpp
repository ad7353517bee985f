#pragma once

// Declarative model files: an INI-like sectioned text format (key = value,
// comma-separated lists) with JSON accepted as an alternative encoding.
// A bundle aggregates the automaton, envelope, plant, controllers, actuator
// map, attack trees, probability assignment, and risk parameters.

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cpsrisk/attack.hpp"
#include "cpsrisk/dynamics.hpp"
#include "cpsrisk/hazard.hpp"
#include "cpsrisk/model.hpp"
#include "cpsrisk/risk.hpp"

namespace cpsrisk {

struct AttackTreeSpec {
    std::string name;
    std::string role;  // "entry", "continuation", or empty
    AttackNode root;
    Bindings simplify;  // per-tree assumptions from the pentest findings (0/1 only)
    std::map<std::string, std::string> basic_descriptions;
};

struct MitigationDefaults {
    double tau_s = 0.0;
    double tau_d = 0.0;
    std::optional<double> tau_m;
};

struct ModelBundle {
    HybridAutomaton automaton;
    Envelope envelope;
    PlantModel plant;
    ActuatorMap actuator_map;
    std::vector<AttackTreeSpec> attack_trees;
    Assignment assignment;  // explicit entries only; pipeline defaults the rest to 1
    std::optional<RiskParams> risk;
    std::optional<AssumptionSet> design_assumptions;
    MitigationDefaults mitigation;

    std::string source_path;
    std::map<std::string, std::string> file_hashes;  // file name -> fnv1a64 hex

    const AttackTreeSpec* tree(const std::string& name) const;
};

// Parses a bundle from the sectioned text format or JSON (detected from the
// content / .json extension). Included files resolve relative to the model
// file. Throws ParseError (with line) or CrossRefError.
ModelBundle parse_model(const std::string& path);
ModelBundle parse_model_text(const std::string& text, const std::string& source_dir,
                             const std::string& source_name);
ModelBundle parse_model_json(const nlohmann::json& doc, const std::string& source_dir,
                             const std::string& source_name);

// Emits the expanded bundle as its JSON encoding; parse(emit(parse(f))) is
// structurally equal to parse(f).
nlohmann::json bundle_to_json(const ModelBundle& bundle);

// Standalone fixture parsers (also used by the [include] mechanism).
std::vector<AttackTreeSpec> parse_attack_tree_file(const std::string& path);
RiskParams parse_risk_file(const std::string& path);
AssumptionSet parse_substitution_file(const std::string& path);

std::string fnv1a64_file(const std::string& path);

}  // namespace cpsrisk
