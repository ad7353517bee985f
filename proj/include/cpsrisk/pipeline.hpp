#pragma once

// End-to-end analysis: classify -> hazard tree -> traces -> abstract attack
// tree -> attack-tree evaluation and composition -> risk scoring -> mitigation
// deadlines, emitted as a deterministic JSON report plus a text summary.

#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "cpsrisk/modelfile.hpp"

namespace cpsrisk {

inline constexpr const char* kToolVersion = "0.1.0";

struct PipelineOptions {
    double horizon = 120.0;  // minutes
    double dt = 0.01;        // minutes
    std::optional<double> bound;  // explicit likelihood bound (paper-rounded mode)
    bool fixed_clock = false;     // freeze the report timestamp
    bool paper_eq11 = false;      // reproduce the paper's printed Eq.-style bracket (c8*c21 term)
    bool parallel = true;
};

// Throws CrossRefError on validation failure and PipelineError (carrying the
// stage name) on runtime failures.
nlohmann::json run_pipeline(const ModelBundle& bundle, const PipelineOptions& options);

void emit_report(const nlohmann::json& report, const std::string& format, std::ostream& out);
std::string report_text_summary(const nlohmann::json& report);

// CSV columns "log10_p_c,log10_p_cps", LF endings, 15 significant digits.
void emit_curve_csv(const std::vector<std::pair<double, double>>& points, std::ostream& out);
// A single polyline over labeled log-scaled axes.
void emit_curve_svg(const std::vector<std::pair<double, double>>& points, std::ostream& out);

// Builds the likelihood polynomial P_c * runaway from the bundle's trees
// (entry tree times the sum of continuations, after per-tree simplification).
Polynomial bundle_likelihood(const ModelBundle& bundle, bool paper_eq11 = false);

// Completes a partial assignment with 1.0 for every unassigned variable, per
// the certain-event attacker assumption; returns the defaulted variable names.
std::vector<std::string> default_to_unity(Assignment& a, const std::set<std::string>& vars);

}  // namespace cpsrisk
