#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mfc/detail/linalg.hpp"
#include "mfc/signal.hpp"

namespace mfc {

// Sign convention used throughout: e = y* - y with positive gains for stable
// loops. Laws quoted with e = y - y* elsewhere map onto this by negating the
// error gains; each scenario config records the mapping.

struct PidGains {
    double kp = 0.0;
    double ki = 0.0;
    double kd = 0.0;
    /// Optional iterated-integral chain replacing the single ki term:
    /// sum_l ki_chain[l] * (l+1)-fold integral of e. Last entry must be nonzero.
    std::vector<double> ki_chain;

    void validate() const {
        if (!ki_chain.empty() && ki_chain.back() == 0.0)
            throw std::invalid_argument("PidGains: last ki_chain entry must be nonzero");
    }
};

/// Discrete controller state shared by the PID-family laws. Integral
/// accumulators advance by the rectangle rule and hold their values while
/// freeze is set (anti-windup).
struct ControllerState {
    PidGains gains;
    std::vector<double> integrals;  ///< iterated integrals of e: I1 = int e, I2 = int I1, ...
    bool freeze = false;
    double last_error = 0.0;
    bool has_last_error = false;

    explicit ControllerState(PidGains g = {}) : gains(std::move(g)) {
        gains.validate();
        integrals.assign(std::max<std::size_t>(1, gains.ki_chain.size()), 0.0);
    }

    void reset() {
        std::fill(integrals.begin(), integrals.end(), 0.0);
        freeze = false;
        last_error = 0.0;
        has_last_error = false;
    }

    /// Rectangle-rule advance of the accumulator chain; skipped when frozen.
    void advance_integrals(double e, double ts) {
        if (freeze) return;
        integrals[0] += ts * e;
        for (std::size_t i = 1; i < integrals.size(); ++i) integrals[i] += ts * integrals[i - 1];
    }

    double integral_term() const {
        if (gains.ki_chain.empty()) return gains.ki * integrals[0];
        double s = 0.0;
        for (std::size_t i = 0; i < gains.ki_chain.size(); ++i) s += gains.ki_chain[i] * integrals[i];
        return s;
    }

    /// kd * de/dt, from the supplied derivative estimate or a backward
    /// difference of e as fallback.
    double derivative_term(double e, double ts, std::optional<double> e_dot_est) {
        double ed = 0.0;
        if (e_dot_est) {
            ed = *e_dot_est;
        } else if (has_last_error) {
            ed = (e - last_error) / ts;
        }
        last_error = e;
        has_last_error = true;
        return gains.kd * ed;
    }
};

/// u = Kp e + Ki int e + Kd de/dt with e = y* - y.
inline double classic_pid_step(ControllerState& cs, double e, double ts,
                               std::optional<double> e_dot_est = std::nullopt) {
    cs.advance_integrals(e, ts);
    return cs.gains.kp * e + cs.integral_term() + cs.derivative_term(e, ts, e_dot_est);
}

/// freeze <- saturated; frozen accumulators are bit-identical across steps.
inline void antiwindup_update(ControllerState& cs, bool saturated) { cs.freeze = saturated; }

/// Per-output ultra-local model y_j^(nu) = F_j + sum_i alpha_ji u_i with F_j
/// re-estimated every sample from the derivative estimate and the previously
/// applied input (one-sample delay; no algebraic loop).
struct UltraLocalState {
    int nu = 1;                     ///< 1 or 2
    std::vector<double> alpha_row;  ///< alpha_{j,i} over input channels
    std::size_t channel = 0;        ///< own input channel (diagonal term)
    double f_estimate = 0.0;
    bool ready = false;

    UltraLocalState() = default;
    UltraLocalState(int nu_, double alpha_diag) : nu(nu_), alpha_row{alpha_diag} {
        validate();
    }
    UltraLocalState(int nu_, std::vector<double> row, std::size_t own)
        : nu(nu_), alpha_row(std::move(row)), channel(own) {
        validate();
    }

    void validate() const {
        if (nu != 1 && nu != 2) throw std::invalid_argument("UltraLocalState: nu must be 1 or 2");
        if (channel >= alpha_row.size() || alpha_row[channel] == 0.0)
            throw std::invalid_argument("UltraLocalState: own-channel alpha must be nonzero");
        for (double a : alpha_row)
            if (!std::isfinite(a)) throw std::invalid_argument("UltraLocalState: alpha not finite");
    }

    double alpha() const { return alpha_row[channel]; }
};

/// F_j(k) = [y_j^(nu)(k)]_e - sum_i alpha_ji u_i(k-1); u_prev is the input
/// actually applied at the previous sample (post-saturation).
inline double estimate_F(UltraLocalState& ul, double y_deriv_est, const std::vector<double>& u_prev) {
    double f = y_deriv_est;
    for (std::size_t i = 0; i < ul.alpha_row.size(); ++i) f -= ul.alpha_row[i] * u_prev[i];
    ul.f_estimate = f;
    ul.ready = true;
    return f;
}

/// Model-cancelling PID around the ultra-local model:
///   u = ( y*^(nu) - [F]_e + Kp e + Ki int e + Kd de/dt ) / alpha
/// For nu = 1 the derivative term is absent. Closed loop with exact estimates:
/// e^(nu) + Kd e' + Kp e + Ki int e = 0.
inline double ipid_step(UltraLocalState& ul, ControllerState& cs, double y_ref_deriv_nu,
                        double e, std::optional<double> e_dot_est, double ts) {
    cs.advance_integrals(e, ts);
    double v = y_ref_deriv_nu - ul.f_estimate + cs.gains.kp * e + cs.integral_term();
    if (ul.nu == 2) v += cs.derivative_term(e, ts, e_dot_est);
    return v / ul.alpha();
}

// ---------------------------------------------------------------------------
// First-order-plus-dead-time identification and PID tuning
// ---------------------------------------------------------------------------

struct FopdtModel {
    double gain = 0.0;           ///< K
    double time_constant = 0.0;  ///< T
    double dead_time = 0.0;      ///< tau
};

struct IdentificationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double crossing_time(const SampledSignal& y, double level) {
    for (std::size_t k = 1; k < y.size(); ++k) {
        const double a = y.samples[k - 1], b = y.samples[k];
        if ((a < level && b >= level) || (a > level && b <= level)) {
            const double frac = (level - a) / (b - a);
            return y.time_at(k - 1) + frac * y.ts;
        }
    }
    throw IdentificationError("step response never crosses the required level");
}

}  // namespace detail

/// Two-point fit of a step response to K e^{-tau s} / (T s + 1):
/// with t1, t2 the 28% / 40% crossing times of the steady-state change,
/// T = 5.5 (t2 - t1) and tau = 2.8 t1 - 1.8 t2.
inline FopdtModel broida_identify(const SampledSignal& step_response, double u_step) {
    if (u_step == 0.0) throw IdentificationError("broida_identify: zero input step");
    if (step_response.size() < 20) throw IdentificationError("broida_identify: response too short");

    const std::size_t n = step_response.size();
    const std::size_t tail = std::max<std::size_t>(2, n / 10);
    double tail_min = step_response.samples[n - tail], tail_max = tail_min;
    for (std::size_t k = n - tail; k < n; ++k) {
        tail_min = std::min(tail_min, step_response.samples[k]);
        tail_max = std::max(tail_max, step_response.samples[k]);
    }
    const double y0 = step_response.samples.front();
    const double y_ss = step_response.samples.back();
    const double dy = y_ss - y0;
    if (dy == 0.0 || (tail_max - tail_min) > 0.01 * std::abs(dy))
        throw IdentificationError("broida_identify: response has not settled");

    const double t_base = step_response.t0;
    const double t1 = detail::crossing_time(step_response, y0 + 0.28 * dy) - t_base;
    const double t2 = detail::crossing_time(step_response, y0 + 0.40 * dy) - t_base;
    const double T = 5.5 * (t2 - t1);
    const double tau = 2.8 * t1 - 1.8 * t2;
    if (!(T > 10.0 * step_response.ts) || !(tau > 0.0))
        throw IdentificationError("broida_identify: degenerate fit (response too fast)");
    return {dy / u_step, T, tau};
}

/// Kp = 100(0.4 tau + T)/(120 K tau), Ki = 1/(1.33 K tau), Kd = 0.35 T / K.
inline PidGains broida_gains(const FopdtModel& m) {
    if (!(m.gain > 0.0 && m.time_constant > 0.0 && m.dead_time > 0.0))
        throw std::invalid_argument("broida_gains: K, T, tau must be positive");
    PidGains g;
    g.kp = 100.0 * (0.4 * m.dead_time + m.time_constant) / (120.0 * m.gain * m.dead_time);
    g.ki = 1.0 / (1.33 * m.gain * m.dead_time);
    g.kd = 0.35 * m.time_constant / m.gain;
    return g;
}

// ---------------------------------------------------------------------------
// Pole placement helpers
// ---------------------------------------------------------------------------

/// Gains making e^(nu) + Kd e' + Kp e + Ki int e = 0 have all roots at `pole`.
inline PidGains pole_placement_gains(int nu, double pole) {
    if (!(pole < 0.0)) throw std::invalid_argument("pole_placement_gains: pole must be negative");
    PidGains g;
    if (nu == 1) {  // (s - p)^2 = s^2 + Kp s + Ki
        g.kp = -2.0 * pole;
        g.ki = pole * pole;
    } else if (nu == 2) {  // (s - p)^3 = s^3 + Kd s^2 + Kp s + Ki
        g.kd = -3.0 * pole;
        g.kp = 3.0 * pole * pole;
        g.ki = -pole * pole * pole;
    } else {
        throw std::invalid_argument("pole_placement_gains: nu must be 1 or 2");
    }
    return g;
}

/// Restricted spring model m y'' = -k1_hat y + u under u = PID(e), e = y* - y:
/// characteristic m s^3 + Kd s^2 + (k1_hat + Kp) s + Ki, all roots at `pole`.
inline PidGains spring_pid_gains(double mass, double k1_hat, double pole = -3.0) {
    if (!(mass > 0.0)) throw std::invalid_argument("spring_pid_gains: mass must be positive");
    PidGains g;
    g.kd = -3.0 * pole * mass;
    g.kp = 3.0 * pole * pole * mass - k1_hat;
    g.ki = -pole * pole * pole * mass;
    return g;
}

// ---------------------------------------------------------------------------
// Restricted-model intelligent controller (spring)
// ---------------------------------------------------------------------------

/// The known part of the plant: m y'' = -k1_hat y + u.
struct RestrictedModel {
    double mass = 0.5;
    double k1_hat = 2.0;

    double nominal_control(double y_star, double y_star_dd) const {
        return mass * y_star_dd + k1_hat * y_star;
    }

    /// [G]_e = m [y'']_e + k1_hat [y]_e - u_prev (strictly causal in u).
    double estimate_G(double ydd_est, double y_est, double u_prev) const {
        return mass * ydd_est + k1_hat * y_est - u_prev;
    }
};

/// u = u* - [G]_e + PID(e).
inline double restricted_icontroller_step(const RestrictedModel&, ControllerState& pid,
                                          double u_star, double g_estimate, double e,
                                          std::optional<double> e_dot_est, double ts) {
    return u_star - g_estimate + classic_pid_step(pid, e, ts, e_dot_est);
}

// ---------------------------------------------------------------------------
// GPI controller for the non-minimum-phase plant
// ---------------------------------------------------------------------------

struct GpiCoefficients {
    double gamma = 0.0, kp = 0.0, ki = 0.0, kii = 0.0;
};

/// Coefficients of u = u* + gamma int(u-u*) + Kp(y-y*) + Ki int(y-y*)
/// + Kii iint(y-y*) placing the flat-output error dynamics
///   s^4 - (b+c+gamma+Kp) s^3 + (bc + gamma(b+c) + aKp - Ki) s^2
///       + (aKi - gamma bc - Kii) s + aKii
/// at a quadruple root `pole`. Degenerate when the zero collides with a pole
/// (a == b or a == c).
inline GpiCoefficients gpi_pole_placement(double a, double b, double c, double pole = -3.0) {
    if (a == 0.0) throw std::invalid_argument("gpi_pole_placement: a must be nonzero");
    if (std::abs((a - b) * (a - c)) < 1e-12)
        throw std::invalid_argument("gpi_pole_placement: zero coincides with a pole");
    // (s - p)^4 target coefficients
    const double p = pole;
    const double c3 = -4.0 * p, c2 = 6.0 * p * p, c1 = -4.0 * p * p * p, c0 = p * p * p * p;

    detail::SmallMatrix m(4, 4);
    std::vector<double> rhs(4);
    // unknowns: (gamma, kp, ki, kii)
    m(0, 0) = 1;        m(0, 1) = 1;  m(0, 2) = 0;  m(0, 3) = 0;   rhs[0] = -(b + c) - c3;
    m(1, 0) = b + c;    m(1, 1) = a;  m(1, 2) = -1; m(1, 3) = 0;   rhs[1] = c2 - b * c;
    m(2, 0) = -b * c;   m(2, 1) = 0;  m(2, 2) = a;  m(2, 3) = -1;  rhs[2] = c1;
    m(3, 0) = 0;        m(3, 1) = 0;  m(3, 2) = 0;  m(3, 3) = a;   rhs[3] = c0;
    const auto q = detail::solve(m, rhs);
    return {q[0], q[1], q[2], q[3]};
}

/// Accumulator state for the GPI law. The int(u - u*) term is discretized
/// causally: the accumulator advances with the values of the previous sample.
struct GpiState {
    GpiCoefficients coeffs;
    double int_u_diff = 0.0;
    double int_e = 0.0;
    double int_int_e = 0.0;
    double varpi_estimate = 0.0;

    double last_u = 0.0;       ///< applied control of the previous sample
    double last_u_star = 0.0;  ///< nominal (or corrected) u* the law used then
    bool has_last = false;

    void reset() {
        int_u_diff = int_e = int_int_e = 0.0;
        varpi_estimate = 0.0;
        last_u = last_u_star = 0.0;
        has_last = false;
    }
};

/// u = u* + gamma int(u - u*) + Kp (y - y*) + Ki int(y - y*) + Kii iint(y - y*).
/// Call note_applied() with the actually applied u after clamping.
inline double gpi_step(GpiState& gs, double u_star, double y, double y_star, double ts) {
    if (gs.has_last) gs.int_u_diff += ts * (gs.last_u - gs.last_u_star);
    const double ey = y - y_star;
    gs.int_e += ts * ey;
    gs.int_int_e += ts * gs.int_e;
    const double u = u_star + gs.coeffs.gamma * gs.int_u_diff + gs.coeffs.kp * ey +
                     gs.coeffs.ki * gs.int_e + gs.coeffs.kii * gs.int_int_e;
    gs.last_u_star = u_star;
    gs.has_last = true;
    return u;
}

inline void gpi_note_applied(GpiState& gs, double u_applied) { gs.last_u = u_applied; }

/// Perturbation reconstruction for x2' = (b+c)x2 - bc x1 + u + varpi, with the
/// control-derivative estimate supplied by the caller:
///   [varpi]_e = -(([y'']_e - (b+c)[y']_e + bc [y]_e - [u']_e)/a + u)
inline double estimate_varpi_with_udot(GpiState& gs, double y_est, double yd_est,
                                       double ydd_est, double u_ref, double u_dot_est,
                                       double a, double b, double c) {
    if (a == 0.0) throw std::invalid_argument("estimate_varpi: a must be nonzero");
    const double varpi =
        -((ydd_est - (b + c) * yd_est + b * c * y_est - u_dot_est) / a + u_ref);
    gs.varpi_estimate = varpi;
    return varpi;
}

/// As above with [u']_e obtained by differentiating the GPI law:
///   [u']_e = u*' + gamma (u - u*) + Kp ([y']_e - y*') + Ki ([y]_e - y*)
///          + Kii int([y]_e - y*)
inline double estimate_varpi(GpiState& gs, double y_est, double yd_est, double ydd_est,
                             double u_prev, double u_star_prev, double u_star_dot,
                             double y_star, double y_star_dot, double a, double b, double c) {
    const double u_dot_est = u_star_dot + gs.coeffs.gamma * (u_prev - u_star_prev) +
                             gs.coeffs.kp * (yd_est - y_star_dot) +
                             gs.coeffs.ki * (y_est - y_star) + gs.coeffs.kii * gs.int_e;
    return estimate_varpi_with_udot(gs, y_est, yd_est, ydd_est, u_prev, u_dot_est, a, b, c);
}

}  // namespace mfc
