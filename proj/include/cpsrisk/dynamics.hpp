#pragma once

// Continuous-time simulation of mode dynamics: a fixed-step classical RK4
// integrator, the bundled first-order exothermic CSTR flow with PID loops,
// hazard detection against the operating envelope, and per-mode hazard-time
// classification. Flow functions are pure; classifying different modes over a
// shared immutable model is the intended parallelism point.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cpsrisk/errors.hpp"
#include "cpsrisk/model.hpp"

namespace cpsrisk {

// dxdt is written in place; both vectors have the same dimension.
using FlowFunction =
    std::function<void(double t, const std::vector<double>& x, std::vector<double>& dxdt)>;

struct Trajectory {
    std::vector<double> times;                // strictly increasing, fixed step
    std::vector<std::vector<double>> states;  // one row per time point
    std::optional<std::string> mode;          // set when simulated from the automaton
};

struct HazardVerdict {
    bool hazardous = false;
    std::optional<double> crossing_time;          // tau_p, minutes
    std::optional<std::string> violated_variable;
    std::optional<double> crossing_value;
};

// Classical 4th-order Runge-Kutta over [0, horizon]; throws NonFiniteState
// (carrying the last finite time) if the state leaves the finite domain.
Trajectory integrate(const FlowFunction& flow, std::vector<double> x0, double horizon, double dt);

// Reactor state layout is fixed: (L, T, T_J, C_A). All rates are per minute.
struct CstrParams {
    double F0 = 0.0;        // inlet flow, m3/min
    double CA0 = 0.0;       // inlet concentration, kmol/m3
    double T0 = 0.0;        // inlet temperature, K
    double V = 0.0;         // reactor volume, m3
    double A = 0.0;         // vessel cross section, m2
    double F = 0.0;         // outlet flow, m3/min
    double k0 = 0.0;        // Arrhenius pre-exponential, 1/min
    double E_over_R = 0.0;  // activation ratio, K
    double lambda = 0.0;    // heat of reaction, kJ/kmol (positive = exothermic)
    double rho_cp = 0.0;    // density * heat capacity, kJ/(m3*K)
    double VJ = 0.0;        // jacket volume, m3
    double TJ0 = 0.0;       // jacket inlet temperature, K
    double FJ0 = 0.0;       // nominal jacket flow, m3/min
    double rhoJ_cJ = 0.0;   // jacket density * heat capacity, kJ/(m3*K)
    double UA = 0.0;        // heat transfer coefficient * area, kJ/(min*K)

    // Model details of the bundled plant, normally left at their defaults:
    // the jacket heat-transfer area scales with wetted level relative to
    // wetted_ref_level, and the outlet flow tapers linearly below
    // outlet_taper_level as the nozzle uncovers.
    double wetted_ref_level = 0.5;   // m
    double outlet_taper_level = 0.05;  // m
};

enum class Manipulates { InletFlow, JacketFlow };

struct PidParams {
    std::string name;
    std::string measures;          // "L" or "T"
    Manipulates manipulates = Manipulates::JacketFlow;
    std::string stream;            // gating switch; loop acts only while it is open
    double gain = 0.0;             // signed; negative for reverse-acting loops
    double integral_time = 1.0;    // min, > 0
    double derivative_time = 0.0;  // min; derivative acts on filtered measurement
    double setpoint = 0.0;
    double out_min = 0.0;
    double out_max = 0.0;
};

struct CstrSystem {
    CstrParams params;
    std::vector<PidParams> controllers;

    // Right-hand side over the augmented state (plant + controller states).
    FlowFunction flow(const Mode& mode) const;
    // Appends controller states preset to the calibrated steady output.
    std::vector<double> augment(const std::vector<double>& plant_state) const;
    std::size_t plant_dim() const { return 4; }
    std::size_t state_dim() const;
};

FlowFunction cstr_flow(const CstrParams& params, const Mode& mode,
                       const std::vector<PidParams>& controllers);

// A bundle's continuous dynamics: either the CSTR system (flow name "cstr")
// or named constant-rate tables for toy models.
struct PlantModel {
    std::optional<CstrSystem> cstr;
    std::map<std::string, std::vector<double>> rate_tables;  // flow name -> dx/dt

    FlowFunction flow(const Mode& mode, std::size_t n_vars) const;
    std::vector<double> augment(const std::vector<double>& x, const Mode& mode) const;
    std::vector<std::string> flow_names() const;
};

// Simulates `mode` from `x0` and reports the visible (declared-variable)
// trajectory only; controller states stay internal.
Trajectory simulate_mode(const PlantModel& plant, const HybridAutomaton& model, const Mode& mode,
                         const std::vector<double>& x0, double horizon, double dt);

// First exit from the envelope, refined by bisection on the interpolated
// trajectory to a time tolerance of dt/100.
HazardVerdict hazard_time(const PlantModel& plant, const HybridAutomaton& model, const Mode& mode,
                          const std::vector<double>& x0, const Envelope& envelope, double horizon,
                          double dt);

// Runs hazard_time for every mode from the automaton's init_state. The
// parallel variant distributes modes over OpenMP threads; results are
// identical to the serial reference.
std::map<std::string, HazardVerdict> classify_modes(const PlantModel& plant,
                                                    const HybridAutomaton& model,
                                                    const Envelope& envelope, double horizon,
                                                    double dt);
std::map<std::string, HazardVerdict> classify_modes_serial(const PlantModel& plant,
                                                           const HybridAutomaton& model,
                                                           const Envelope& envelope, double horizon,
                                                           double dt);

// First time after which every state derivative magnitude stays below tol for
// the rest of the horizon, with the terminal state; nullopt if never settled.
std::optional<std::pair<double, std::vector<double>>> equilibrium(const Trajectory& trajectory,
                                                                  double tol);

}  // namespace cpsrisk
