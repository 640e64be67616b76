#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mfc/detail/linalg.hpp"

namespace mfc {

using Vec = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Per-channel magnitude and rate bounds on the actuator. +-inf disables a bound.
struct ActuatorConstraints {
    Vec u_min, u_max;    ///< magnitude bounds
    Vec du_min, du_max;  ///< rate bounds, units of u per second

    static ActuatorConstraints unbounded(std::size_t channels) {
        ActuatorConstraints c;
        c.u_min.assign(channels, -kInf);
        c.u_max.assign(channels, kInf);
        c.du_min.assign(channels, -kInf);
        c.du_max.assign(channels, kInf);
        return c;
    }

    void validate() const {
        for (std::size_t i = 0; i < u_min.size(); ++i)
            if (u_min[i] > u_max[i]) throw std::invalid_argument("constraints: u_min > u_max");
        for (std::size_t i = 0; i < du_min.size(); ++i)
            if (du_min[i] > du_max[i]) throw std::invalid_argument("constraints: du_min > du_max");
    }
};

struct ClampResult {
    Vec u;                        ///< applied input
    std::vector<bool> saturated;  ///< per channel: any bound was active
};

/// Rate-limits u_desired against u_prev, then clamps to the magnitude bounds.
inline ClampResult clamp(const Vec& u_desired, const Vec& u_prev,
                         const ActuatorConstraints& c, double ts) {
    if (!(ts > 0.0)) throw std::invalid_argument("clamp: ts must be positive");
    ClampResult r;
    r.u = u_desired;
    r.saturated.assign(u_desired.size(), false);
    for (std::size_t i = 0; i < u_desired.size(); ++i) {
        double v = u_desired[i];
        if (i < c.du_max.size() && std::isfinite(c.du_max[i])) {
            const double hi = u_prev[i] + c.du_max[i] * ts;
            if (v > hi) { v = hi; r.saturated[i] = true; }
        }
        if (i < c.du_min.size() && std::isfinite(c.du_min[i])) {
            const double lo = u_prev[i] + c.du_min[i] * ts;
            if (v < lo) { v = lo; r.saturated[i] = true; }
        }
        if (i < c.u_max.size() && v > c.u_max[i]) { v = c.u_max[i]; r.saturated[i] = true; }
        if (i < c.u_min.size() && v < c.u_min[i]) { v = c.u_min[i]; r.saturated[i] = true; }
        r.u[i] = v;
    }
    return r;
}

enum class FaultKind { none, gain_loss };

/// Actuation-path fault: u_effective = factor * u from t_onset on.
struct FaultSpec {
    FaultKind kind = FaultKind::none;
    double factor = 1.0;  ///< (0, 1]
    double t_onset = 0.0;

    void validate() const {
        if (kind == FaultKind::gain_loss && !(factor > 0.0 && factor <= 1.0))
            throw std::invalid_argument("fault: gain-loss factor must be in (0, 1]");
        if (t_onset < 0.0) throw std::invalid_argument("fault: t_onset must be >= 0");
    }
};

/// Continuous-time state-space plant integrated under zero-order hold.
/// rhs(x, u, du, t): du is a per-step constant surrogate for the input rate,
/// used only by plants with uses_input_rate set (ball-and-beam).
struct PlantModel {
    std::size_t state_dim = 0;
    std::size_t input_dim = 0;
    std::size_t output_dim = 0;
    std::function<Vec(const Vec& x, const Vec& u, const Vec& du, double t)> rhs;
    std::function<Vec(const Vec& x)> output;
    ActuatorConstraints constraints;
    FaultSpec fault;
    bool uses_input_rate = false;
    std::string label;
    Vec default_initial_state;
    std::vector<std::string> aux_names;  ///< optional truth channels for traces
    std::function<Vec(const Vec& x, const Vec& u, const Vec& du, double t)> aux;
};

struct SimulationDiverged : std::runtime_error {
    explicit SimulationDiverged(double time)
        : std::runtime_error("simulation diverged at t = " + std::to_string(time)), t(time) {}
    double t;
};

namespace detail {

inline Vec axpy(const Vec& x, const Vec& d, double h) {
    Vec y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] + h * d[i];
    return y;
}

}  // namespace detail

/// Advances the plant by ts under constant input using fixed-step RK4.
/// u_prev is the input held over the previous step (for the input-rate
/// surrogate du = (u - u_prev)/ts); pass u itself when unavailable.
/// t is the absolute time at the start of the step (faults key off it).
inline Vec simulate_step(const PlantModel& plant, const Vec& x, const Vec& u_held,
                         double ts, double t = 0.0, const Vec* u_prev = nullptr,
                         int substeps = 4) {
    if (!(ts > 0.0)) throw std::invalid_argument("simulate_step: ts must be positive");
    if (substeps < 1) throw std::invalid_argument("simulate_step: substeps must be >= 1");

    Vec du(u_held.size(), 0.0);
    if (plant.uses_input_rate && u_prev)
        for (std::size_t i = 0; i < u_held.size(); ++i) du[i] = (u_held[i] - (*u_prev)[i]) / ts;

    auto effective_u = [&](double at) {
        if (plant.fault.kind == FaultKind::gain_loss && at >= plant.fault.t_onset) {
            Vec ue = u_held;
            for (double& v : ue) v *= plant.fault.factor;
            return ue;
        }
        return u_held;
    };

    Vec state = x;
    const double h = ts / substeps;
    for (int s = 0; s < substeps; ++s) {
        const double tk = t + s * h;
        const Vec u0 = effective_u(tk);
        const Vec um = effective_u(tk + 0.5 * h);
        const Vec u1 = effective_u(tk + h);
        const Vec k1 = plant.rhs(state, u0, du, tk);
        const Vec k2 = plant.rhs(detail::axpy(state, k1, 0.5 * h), um, du, tk + 0.5 * h);
        const Vec k3 = plant.rhs(detail::axpy(state, k2, 0.5 * h), um, du, tk + 0.5 * h);
        const Vec k4 = plant.rhs(detail::axpy(state, k3, h), u1, du, tk + h);
        for (std::size_t i = 0; i < state.size(); ++i)
            state[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        for (double v : state)
            if (!std::isfinite(v)) throw SimulationDiverged(tk + h);
    }
    return state;
}

// ---------------------------------------------------------------------------
// Plant builders
// ---------------------------------------------------------------------------

/// Controllable canonical realization of a strictly proper SISO transfer
/// function num(s)/den(s); den must be monic after normalization.
inline PlantModel make_siso_tf(std::vector<double> num, std::vector<double> den,
                               std::string label) {
    if (den.size() < 2 || num.size() >= den.size())
        throw std::invalid_argument("make_siso_tf: transfer function must be strictly proper");
    const double lead = den.back();
    for (double& c : den) c /= lead;
    for (double& c : num) c /= lead;
    num.resize(den.size() - 1, 0.0);

    const std::size_t n = den.size() - 1;
    PlantModel p;
    p.state_dim = n;
    p.input_dim = 1;
    p.output_dim = 1;
    p.label = std::move(label);
    p.constraints = ActuatorConstraints::unbounded(1);
    p.default_initial_state.assign(n, 0.0);
    p.rhs = [n, den](const Vec& x, const Vec& u, const Vec&, double) {
        Vec dx(n);
        for (std::size_t i = 0; i + 1 < n; ++i) dx[i] = x[i + 1];
        double acc = u[0];
        for (std::size_t i = 0; i < n; ++i) acc -= den[i] * x[i];
        dx[n - 1] = acc;
        return dx;
    };
    p.output = [n, num](const Vec& x) {
        double y = 0.0;
        for (std::size_t i = 0; i < n; ++i) y += num[i] * x[i];
        return Vec{y};
    };
    return p;
}

/// (s+2)^2 / (s+1)^3, the stable SISO benchmark; pole parameter exposed for
/// the aged variant.
inline PlantModel make_stable_siso(double pole = 1.0) {
    return make_siso_tf({4.0, 4.0, 1.0}, detail::poly_from_roots({-pole, -pole, -pole}),
                        pole == 1.0 ? "stable-siso" : "stable-siso-aged");
}

/// s^5 / ((s+1)(s+0.1)(s+0.01)(s-0.05)(s-0.5)(s-5)): stable and unstable
/// poles spread over three decades.
inline PlantModel make_large_spectrum() {
    return make_siso_tf({0, 0, 0, 0, 0, 1.0},
                        detail::poly_from_roots({-1.0, -0.1, -0.01, 0.05, 0.5, 5.0}),
                        "large-spectrum");
}

/// 2x2 transfer matrix, lower triangular:
///   y1 = [s^2/((s+0.01)(s+0.1)(s-1))] u1          (common factor s cancelled)
///   y2 = [(s+1)/((s+0.003)(s-0.03)(s+0.3)(s+3))] u1
///      + [s^2/((s+0.004)(s+0.04)(s-0.4)(s+4))] u2
inline PlantModel make_mimo_2x2() {
    auto g11 = make_siso_tf({0, 0, 1.0}, detail::poly_from_roots({-0.01, -0.1, 1.0}), "g11");
    auto g21 = make_siso_tf({1.0, 1.0}, detail::poly_from_roots({-0.003, 0.03, -0.3, -3.0}), "g21");
    auto g22 = make_siso_tf({0, 0, 1.0}, detail::poly_from_roots({-0.004, -0.04, 0.4, -4.0}), "g22");

    const std::size_t n1 = g11.state_dim, n2 = g21.state_dim, n3 = g22.state_dim;
    PlantModel p;
    p.state_dim = n1 + n2 + n3;
    p.input_dim = 2;
    p.output_dim = 2;
    p.label = "mimo-2x2";
    p.constraints = ActuatorConstraints::unbounded(2);
    p.default_initial_state.assign(p.state_dim, 0.0);
    p.rhs = [=](const Vec& x, const Vec& u, const Vec& du, double t) {
        Vec x1(x.begin(), x.begin() + n1);
        Vec x2(x.begin() + n1, x.begin() + n1 + n2);
        Vec x3(x.begin() + n1 + n2, x.end());
        const Vec d1 = g11.rhs(x1, {u[0]}, du, t);
        const Vec d2 = g21.rhs(x2, {u[0]}, du, t);
        const Vec d3 = g22.rhs(x3, {u[1]}, du, t);
        Vec dx;
        dx.reserve(x.size());
        dx.insert(dx.end(), d1.begin(), d1.end());
        dx.insert(dx.end(), d2.begin(), d2.end());
        dx.insert(dx.end(), d3.begin(), d3.end());
        return dx;
    };
    p.output = [=](const Vec& x) {
        Vec x1(x.begin(), x.begin() + n1);
        Vec x2(x.begin() + n1, x.begin() + n1 + n2);
        Vec x3(x.begin() + n1 + n2, x.end());
        return Vec{g11.output(x1)[0], g21.output(x2)[0] + g22.output(x3)[0]};
    };
    return p;
}

/// dy/dt = y + u^3 (open-loop unstable, cubic input nonlinearity).
inline PlantModel make_cubic_unstable() {
    PlantModel p;
    p.state_dim = 1;
    p.input_dim = 1;
    p.output_dim = 1;
    p.label = "cubic-unstable";
    p.constraints = ActuatorConstraints::unbounded(1);
    p.default_initial_state = {0.0};
    p.rhs = [](const Vec& x, const Vec& u, const Vec&, double) {
        return Vec{x[0] + u[0] * u[0] * u[0]};
    };
    p.output = [](const Vec& x) { return Vec{x[0]}; };
    return p;
}

/// Ball and beam: y'' = B*y*(du)^2 - B*G*sin(u), u = beam angle.
/// Under zero-order hold du is the backward difference of the held commands,
/// supplied per step by simulate_step.
inline PlantModel make_ball_beam(double b_const = 0.7143, double g_const = 9.81) {
    PlantModel p;
    p.state_dim = 2;
    p.input_dim = 1;
    p.output_dim = 1;
    p.label = "ball-beam";
    p.uses_input_rate = true;
    p.constraints = ActuatorConstraints::unbounded(1);
    const double pi = 3.14159265358979323846;
    p.constraints.u_min = {-pi / 3.0};
    p.constraints.u_max = {pi / 3.0};
    p.constraints.du_min = {-pi};
    p.constraints.du_max = {pi};
    p.default_initial_state = {0.0, 0.0};
    p.rhs = [b_const, g_const](const Vec& x, const Vec& u, const Vec& du, double) {
        return Vec{x[1], b_const * x[0] * du[0] * du[0] - b_const * g_const * std::sin(u[0])};
    };
    p.output = [](const Vec& x) { return Vec{x[0]}; };
    return p;
}

struct ThreeTankParams {
    double tank_section = 0.0154;   ///< S, m^2
    double pipe_section = 5e-5;     ///< S_p, m^2
    double gravity = 9.81;
    double mu1 = 0.5, mu2 = 0.675, mu3 = 0.5;
};

/// Three coupled tanks; tank 2 drains to the environment. State carries a
/// fourth component accumulating the drained volume per unit area so the
/// mass balance x1+x2+x3+x4 is conserved exactly by the integrator when u = 0.
inline PlantModel make_three_tanks(const ThreeTankParams& tp = {}) {
    const double c1 = (1.0 / tp.tank_section) * tp.mu1 * tp.pipe_section * std::sqrt(2.0 * tp.gravity);
    const double c2 = (1.0 / tp.tank_section) * tp.mu2 * tp.pipe_section * std::sqrt(2.0 * tp.gravity);
    const double c3 = (1.0 / tp.tank_section) * tp.mu3 * tp.pipe_section * std::sqrt(2.0 * tp.gravity);
    const double s = tp.tank_section;

    auto flow = [](double dh) {  // sign(dh) * sqrt(|dh|), with flow(0) = 0
        return dh == 0.0 ? 0.0 : (dh > 0.0 ? std::sqrt(dh) : -std::sqrt(-dh));
    };

    PlantModel p;
    p.state_dim = 4;
    p.input_dim = 2;
    p.output_dim = 3;
    p.label = "three-tanks";
    p.constraints = ActuatorConstraints::unbounded(2);
    p.constraints.u_min = {0.0, 0.0};
    p.default_initial_state = {0.3, 0.1, 0.2, 0.0};
    p.rhs = [=](const Vec& x, const Vec& u, const Vec&, double) {
        const double q13 = c1 * flow(x[0] - x[2]);
        const double q32 = c3 * flow(x[2] - x[1]);
        const double q20 = c2 * flow(x[1]);
        return Vec{-q13 + u[0] / s, q32 - q20 + u[1] / s, q13 - q32, q20};
    };
    p.output = [](const Vec& x) { return Vec{x[0], x[1], x[2]}; };
    return p;
}

struct TustinFriction {
    double coulomb = 0.5;   ///< Fc
    double stiction = 1.0;  ///< Fs
    double v_scale = 0.1;   ///< vs

    /// -sign(v) * (Fc + (Fs - Fc) * exp(-|v|/vs)); sign(0) = 0.
    double operator()(double v) const {
        if (v == 0.0) return 0.0;
        const double mag = coulomb + (stiction - coulomb) * std::exp(-std::abs(v) / v_scale);
        return v > 0.0 ? -mag : mag;
    }
};

struct SpringParams {
    double mass = 0.5;
    double k1 = 3.0;        ///< linear stiffness (true plant)
    double k3 = 10.0;       ///< cubic stiffness
    double damping = 5.0;   ///< d
    TustinFriction friction;
};

/// Point mass on a hardening spring with Tustin friction and viscous damping:
///   m y'' = -(k1 y + k3 y^3) + F(v) - d v + u
inline PlantModel make_spring(const SpringParams& sp = {}) {
    PlantModel p;
    p.state_dim = 2;
    p.input_dim = 1;
    p.output_dim = 1;
    p.label = "spring";
    p.constraints = ActuatorConstraints::unbounded(1);
    p.default_initial_state = {0.0, 0.0};
    p.aux_names = {"friction"};
    p.rhs = [sp](const Vec& x, const Vec& u, const Vec&, double) {
        const double force = -(sp.k1 * x[0] + sp.k3 * x[0] * x[0] * x[0]) + sp.friction(x[1]) -
                             sp.damping * x[1] + u[0];
        return Vec{x[1], force / sp.mass};
    };
    p.output = [](const Vec& x) { return Vec{x[0]}; };
    p.aux = [sp](const Vec& x, const Vec&, const Vec&, double) { return Vec{sp.friction(x[1])}; };
    return p;
}

enum class PerturbationKind { none, constant, speed_proportional };

/// Unmodeled additive effect on the second state equation of the
/// non-minimum-phase plant: vartheta = value (constant) or value * dy/dt.
struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::none;
    double value = 0.0;
};

/// x1' = x2; x2' = (b+c) x2 - b c x1 + u + w; y = x2 - a x1.
/// Non-minimum phase for a > 0 (zero at +a). The speed-proportional
/// perturbation w = k dy/dt is resolved implicitly (dy/dt depends on x2').
inline PlantModel make_nonmin_phase(double a = 1.0, double b = -1.0, double c = -0.5,
                                    const PerturbationSpec& pert = {}) {
    if (pert.kind == PerturbationKind::speed_proportional && std::abs(1.0 - pert.value) < 1e-12)
        throw std::invalid_argument("nonmin-phase: speed perturbation coefficient 1 is singular");
    PlantModel p;
    p.state_dim = 2;
    p.input_dim = 1;
    p.output_dim = 1;
    p.label = "nonmin-phase";
    p.constraints = ActuatorConstraints::unbounded(1);
    p.default_initial_state = {0.0, 0.0};
    p.aux_names = {"perturbation"};
    auto x2dot = [a, b, c, pert](const Vec& x, double u) {
        const double base = (b + c) * x[1] - b * c * x[0] + u;
        switch (pert.kind) {
            case PerturbationKind::none: return base;
            case PerturbationKind::constant: return base + pert.value;
            case PerturbationKind::speed_proportional:
                // x2' = base + k*(x2' - a*x2)  =>  x2' = (base - k*a*x2)/(1-k)
                return (base - pert.value * a * x[1]) / (1.0 - pert.value);
        }
        return base;
    };
    p.rhs = [x2dot](const Vec& x, const Vec& u, const Vec&, double) {
        return Vec{x[1], x2dot(x, u[0])};
    };
    p.output = [a](const Vec& x) { return Vec{x[1] - a * x[0]}; };
    p.aux = [a, pert, x2dot](const Vec& x, const Vec& u, const Vec&, double) {
        switch (pert.kind) {
            case PerturbationKind::constant: return Vec{pert.value};
            case PerturbationKind::speed_proportional:
                return Vec{pert.value * (x2dot(x, u[0]) - a * x[1])};
            default: return Vec{0.0};
        }
    };
    return p;
}

/// Catalog lookup by scenario label with each system's default parameters.
inline PlantModel build_plant(const std::string& scenario) {
    if (scenario == "stable-siso") return make_stable_siso();
    if (scenario == "stable-siso-aged") return make_stable_siso(1.5);
    if (scenario == "stable-siso-fault") {
        auto p = make_stable_siso();
        p.label = "stable-siso-fault";
        p.fault = {FaultKind::gain_loss, 0.5, 0.0};
        return p;
    }
    if (scenario == "large-spectrum") return make_large_spectrum();
    if (scenario == "mimo-2x2") return make_mimo_2x2();
    if (scenario == "cubic-unstable") return make_cubic_unstable();
    if (scenario == "ball-beam") return make_ball_beam();
    if (scenario == "three-tanks") return make_three_tanks();
    if (scenario == "spring") return make_spring();
    if (scenario == "nonmin-phase") return make_nonmin_phase();
    throw std::invalid_argument("build_plant: unknown scenario label '" + scenario + "'");
}

}  // namespace mfc
