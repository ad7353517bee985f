#include "cpsrisk/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <exception>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cpsrisk {

namespace {

bool all_finite(const std::vector<double>& x) {
    return std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); });
}

void rk4_step(const FlowFunction& flow, double t, double dt, std::vector<double>& x,
              std::vector<double>& k1, std::vector<double>& k2, std::vector<double>& k3,
              std::vector<double>& k4, std::vector<double>& tmp) {
    const std::size_t n = x.size();
    flow(t, x, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k1[i];
    flow(t + 0.5 * dt, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * dt * k2[i];
    flow(t + 0.5 * dt, tmp, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = x[i] + dt * k3[i];
    flow(t + dt, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        x[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

Trajectory integrate(const FlowFunction& flow, std::vector<double> x0, double horizon, double dt) {
    if (!(dt > 0.0)) throw Error("integrate: dt must be positive");
    if (!(horizon >= dt)) throw Error("integrate: horizon must be at least dt");
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(horizon / dt));
    const std::size_t n = x0.size();

    Trajectory traj;
    traj.times.reserve(n_steps + 1);
    traj.states.reserve(n_steps + 1);
    traj.times.push_back(0.0);
    traj.states.push_back(x0);

    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    std::vector<double> x = std::move(x0);
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t = static_cast<double>(i) * dt;
        rk4_step(flow, t, dt, x, k1, k2, k3, k4, tmp);
        if (!all_finite(x)) throw NonFiniteState("state became non-finite", t);
        traj.times.push_back(static_cast<double>(i + 1) * dt);
        traj.states.push_back(x);
    }
    return traj;
}

// ----------------------------------------------------------------- CSTR flow

std::size_t CstrSystem::state_dim() const {
    std::size_t d = plant_dim();
    for (const auto& c : controllers) d += c.derivative_time > 0.0 ? 2 : 1;
    return d;
}

std::vector<double> CstrSystem::augment(const std::vector<double>& plant_state) const {
    std::vector<double> x = plant_state;
    for (const auto& c : controllers) {
        // Integral preset so the loop outputs its nominal flow at zero error.
        const double u_nom = c.manipulates == Manipulates::InletFlow ? params.F0 : params.FJ0;
        x.push_back(u_nom * c.integral_time / c.gain);
        if (c.derivative_time > 0.0) {
            const double pv0 = c.measures == "L" ? plant_state[0] : plant_state[1];
            x.push_back(pv0);  // filtered measurement starts at the measurement
        }
    }
    return x;
}

FlowFunction cstr_flow(const CstrParams& params, const Mode& mode,
                       const std::vector<PidParams>& controllers) {
    const int sI = mode.switch_state.at("inlet");
    const int sO = mode.switch_state.at("outlet");
    const int sJ = mode.switch_state.at("coolant");

    // controller state offsets within the augmented vector
    struct LoopLayout {
        PidParams pid;
        int active = 1;         // stream open in this mode
        std::size_t i_state = 0;
        std::size_t d_state = 0;  // 0 = no derivative filter
        std::size_t pv_index = 0;
    };
    std::vector<LoopLayout> loops;
    std::size_t offset = 4;
    for (const auto& c : controllers) {
        LoopLayout l;
        l.pid = c;
        l.active = mode.switch_state.at(c.stream);
        l.i_state = offset++;
        if (c.derivative_time > 0.0) l.d_state = offset++;
        l.pv_index = c.measures == "L" ? 0 : 1;
        loops.push_back(std::move(l));
    }

    const CstrParams P = params;
    return [P, sI, sO, sJ, loops](double, const std::vector<double>& x,
                                  std::vector<double>& dxdt) {
        const double L = x[0], T = x[1], TJ = x[2], CA = x[3];
        std::fill(dxdt.begin(), dxdt.end(), 0.0);

        double F0 = P.F0;
        double FJ = P.FJ0;
        for (const auto& l : loops) {
            const double pv = x[l.pv_index];
            const double e = l.pid.setpoint - pv;
            double dterm = 0.0;
            if (l.d_state) {
                const double tau_f = l.pid.derivative_time / 10.0;
                const double dpv_f = (pv - x[l.d_state]) / tau_f;
                dxdt[l.d_state] = dpv_f;
                dterm = -l.pid.derivative_time * dpv_f;
            }
            const double u_raw = l.pid.gain * (e + x[l.i_state] / l.pid.integral_time + dterm);
            const double u = std::clamp(u_raw, l.pid.out_min, l.pid.out_max);
            // anti-windup: stop integrating while pushing further into a limit
            bool freeze = (u_raw > l.pid.out_max && l.pid.gain * e > 0.0) ||
                          (u_raw < l.pid.out_min && l.pid.gain * e < 0.0);
            dxdt[l.i_state] = (l.active && !freeze) ? e : 0.0;
            if (l.active) {
                if (l.pid.manipulates == Manipulates::InletFlow)
                    F0 = u;
                else
                    FJ = u;
            }
        }

        const double Lc = std::max(L, 1e-6);  // shared floor keeps ratios consistent
        const double Vl = P.A * Lc;
        const double taper = std::clamp(L / P.outlet_taper_level, 0.0, 1.0);
        const double F_out = P.F * taper;
        // wetted jacket area scales with level
        const double UA_eff = P.UA * std::min(Lc, P.V / P.A) / P.wetted_ref_level;
        const double k = P.k0 * std::exp(-P.E_over_R / std::max(T, 1.0));

        dxdt[0] = (sI * F0 - sO * F_out) / P.A;
        dxdt[1] = sI * F0 * (P.T0 - T) / Vl + (P.lambda / P.rho_cp) * k * CA -
                  UA_eff * (T - TJ) / (P.rho_cp * Vl);
        dxdt[2] = sJ * FJ * (P.TJ0 - TJ) / P.VJ + UA_eff * (T - TJ) / (P.rhoJ_cJ * P.VJ);
        dxdt[3] = sI * F0 * (P.CA0 - CA) / Vl - k * CA;
    };
}

FlowFunction CstrSystem::flow(const Mode& mode) const {
    return cstr_flow(params, mode, controllers);
}

// ---------------------------------------------------------------- PlantModel

FlowFunction PlantModel::flow(const Mode& mode, std::size_t n_vars) const {
    if (cstr && mode.flow_ref == "cstr") return cstr->flow(mode);
    auto it = rate_tables.find(mode.flow_ref);
    if (it == rate_tables.end())
        throw CrossRefError("mode '" + mode.id + "' binds unknown flow '" + mode.flow_ref + "'");
    if (it->second.size() != n_vars)
        throw CrossRefError("flow '" + mode.flow_ref + "' has the wrong number of rates");
    const std::vector<double> rates = it->second;
    return [rates](double, const std::vector<double>&, std::vector<double>& dxdt) {
        std::copy(rates.begin(), rates.end(), dxdt.begin());
    };
}

std::vector<double> PlantModel::augment(const std::vector<double>& x, const Mode& mode) const {
    if (cstr && mode.flow_ref == "cstr") return cstr->augment(x);
    return x;
}

std::vector<std::string> PlantModel::flow_names() const {
    std::vector<std::string> names;
    if (cstr) names.push_back("cstr");
    for (const auto& [n, r] : rate_tables) names.push_back(n);
    return names;
}

// -------------------------------------------------------------- hazard times

Trajectory simulate_mode(const PlantModel& plant, const HybridAutomaton& model, const Mode& mode,
                         const std::vector<double>& x0, double horizon, double dt) {
    const std::size_t n_vars = model.variables.size();
    Trajectory aug = integrate(plant.flow(mode, n_vars), plant.augment(x0, mode), horizon, dt);
    Trajectory out;
    out.times = std::move(aug.times);
    out.mode = mode.id;
    out.states.reserve(aug.states.size());
    for (auto& row : aug.states) {
        row.resize(n_vars);
        out.states.push_back(std::move(row));
    }
    return out;
}

HazardVerdict hazard_time(const PlantModel& plant, const HybridAutomaton& model, const Mode& mode,
                          const std::vector<double>& x0, const Envelope& envelope, double horizon,
                          double dt) {
    if (!(dt > 0.0) || !(horizon > 0.0)) throw Error("hazard_time: dt and horizon must be positive");
    const std::size_t n_vars = model.variables.size();

    auto visible = [n_vars](const std::vector<double>& x) {
        return std::vector<double>(x.begin(), x.begin() + static_cast<long>(n_vars));
    };

    HazardVerdict verdict;
    if (auto v = envelope.violated(model, x0)) {
        verdict.hazardous = true;
        verdict.crossing_time = 0.0;
        verdict.violated_variable = model.variables[*v].name;
        verdict.crossing_value = x0[*v];
        return verdict;
    }

    const FlowFunction flow = plant.flow(mode, n_vars);
    std::vector<double> x = plant.augment(x0, mode);
    const std::size_t n = x.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    const std::size_t n_steps = static_cast<std::size_t>(std::llround(horizon / dt));

    std::vector<double> prev = x;
    for (std::size_t i = 0; i < n_steps; ++i) {
        const double t0 = static_cast<double>(i) * dt;
        prev = x;
        rk4_step(flow, t0, dt, x, k1, k2, k3, k4, tmp);
        if (!all_finite(x)) throw NonFiniteState("state became non-finite", t0);
        if (!envelope.violated(model, visible(x))) continue;

        // bisect on the linearly interpolated segment to tolerance dt/100
        const std::vector<double> xa = visible(prev);
        const std::vector<double> xb = visible(x);
        double lo = 0.0, hi = 1.0;
        std::vector<double> mid_state(n_vars);
        auto at = [&](double theta) {
            for (std::size_t j = 0; j < n_vars; ++j)
                mid_state[j] = xa[j] + theta * (xb[j] - xa[j]);
            return mid_state;
        };
        while ((hi - lo) * dt > dt / 100.0) {
            const double mid = 0.5 * (lo + hi);
            if (envelope.violated(model, at(mid)))
                hi = mid;
            else
                lo = mid;
        }
        const auto crossing = at(hi);
        const auto v = envelope.violated(model, crossing);
        verdict.hazardous = true;
        verdict.crossing_time = t0 + hi * dt;
        verdict.violated_variable = model.variables[*v].name;
        verdict.crossing_value = crossing[*v];
        return verdict;
    }
    return verdict;
}

std::map<std::string, HazardVerdict> classify_modes_serial(const PlantModel& plant,
                                                           const HybridAutomaton& model,
                                                           const Envelope& envelope, double horizon,
                                                           double dt) {
    std::map<std::string, HazardVerdict> out;
    for (const auto& mode : model.modes)
        out[mode.id] = hazard_time(plant, model, mode, model.init_state, envelope, horizon, dt);
    return out;
}

std::map<std::string, HazardVerdict> classify_modes(const PlantModel& plant,
                                                    const HybridAutomaton& model,
                                                    const Envelope& envelope, double horizon,
                                                    double dt) {
    const long n = static_cast<long>(model.modes.size());
    std::vector<HazardVerdict> verdicts(model.modes.size());
    std::vector<std::exception_ptr> failures(model.modes.size());

#pragma omp parallel for schedule(dynamic)
    for (long i = 0; i < n; ++i) {
        try {
            verdicts[i] = hazard_time(plant, model, model.modes[i], model.init_state, envelope,
                                      horizon, dt);
        } catch (...) {
            failures[i] = std::current_exception();
        }
    }
    for (long i = 0; i < n; ++i)
        if (failures[i]) std::rethrow_exception(failures[i]);

    std::map<std::string, HazardVerdict> out;
    for (long i = 0; i < n; ++i) out[model.modes[i].id] = verdicts[i];
    return out;
}

std::optional<std::pair<double, std::vector<double>>> equilibrium(const Trajectory& trajectory,
                                                                  double tol) {
    if (!(tol > 0.0)) throw Error("equilibrium: tol must be positive");
    const std::size_t n = trajectory.times.size();
    if (n == 0) return std::nullopt;
    if (n == 1) return std::make_pair(trajectory.times[0], trajectory.states[0]);

    // forward-difference derivative magnitude per step
    std::size_t settled_from = n - 1;  // index of first time from which all steps are quiet
    for (std::size_t i = n - 1; i-- > 0;) {
        const double dt = trajectory.times[i + 1] - trajectory.times[i];
        double worst = 0.0;
        for (std::size_t j = 0; j < trajectory.states[i].size(); ++j)
            worst = std::max(worst,
                             std::abs(trajectory.states[i + 1][j] - trajectory.states[i][j]) / dt);
        if (worst < tol)
            settled_from = i;
        else
            break;
    }
    if (settled_from == n - 1) return std::nullopt;
    return std::make_pair(trajectory.times[settled_from], trajectory.states.back());
}

}  // namespace cpsrisk
