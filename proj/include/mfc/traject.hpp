#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <variant>
#include <vector>

#include "mfc/signal.hpp"

namespace mfc {

namespace traj_detail {

/// Degree-5 minimum-jerk transition on normalized time: 10 tau^3 - 15 tau^4 + 6 tau^5.
/// Zero first and second derivatives at both endpoints.
struct Bezier {
    double y_from = 0.0, y_to = 0.0;
    double t_start = 0.0, duration = 1.0;

    double eval(double t, int order) const {
        const double tau = (t - t_start) / duration;
        if (tau <= 0.0) return order == 0 ? y_from : 0.0;
        if (tau >= 1.0) return order == 0 ? y_to : 0.0;
        static constexpr double base[6] = {0, 0, 0, 10, -15, 6};
        double c[6];
        std::copy(base, base + 6, c);
        int top = 5;
        for (int d = 0; d < order; ++d) {
            for (int i = 0; i < top; ++i) c[i] = c[i + 1] * (i + 1);
            c[top--] = 0.0;
            if (top < 0) return 0.0;
        }
        double v = 0.0;
        for (int i = top; i >= 0; --i) v = v * tau + c[i];
        return (order == 0 ? y_from : 0.0) +
               (y_to - y_from) * v / std::pow(duration, order);
    }
};

struct Constant {
    double value = 0.0;
    double eval(double, int order) const { return order == 0 ? value : 0.0; }
};

struct Sine {
    double amplitude = 1.0, omega = 1.0, phase = 0.0, offset = 0.0;

    double eval(double t, int order) const {
        const double arg = omega * t + phase;
        const double scale = std::pow(omega, order);
        double v;
        switch (order % 4) {
            case 0: v = std::sin(arg); break;
            case 1: v = std::cos(arg); break;
            case 2: v = -std::sin(arg); break;
            default: v = -std::cos(arg); break;
        }
        return amplitude * scale * v + (order == 0 ? offset : 0.0);
    }
};

/// Chain of non-overlapping minimum-jerk transitions, constant in between.
struct Piecewise {
    std::vector<Bezier> steps;  // sorted by t_start, value-continuous

    double eval(double t, int order) const {
        const Bezier* active = nullptr;
        for (const auto& s : steps) {
            if (t >= s.t_start) active = &s;
        }
        if (!active) {
            return order == 0 ? (steps.empty() ? 0.0 : steps.front().y_from) : 0.0;
        }
        return active->eval(t, order);
    }
};

}  // namespace traj_detail

/// Reference trajectory with analytic derivatives of any order.
class Trajectory {
public:
    Trajectory() : node_(traj_detail::Constant{}) {}

    double eval(double t, int order = 0) const {
        if (order < 0) throw std::invalid_argument("Trajectory: negative derivative order");
        return std::visit([&](const auto& n) { return n.eval(t, order); }, node_);
    }

    static Trajectory constant(double value) {
        Trajectory t;
        t.node_ = traj_detail::Constant{value};
        return t;
    }

    static Trajectory bezier(double y_from, double y_to, double t_start, double duration) {
        if (!(duration > 0.0)) throw std::invalid_argument("bezier: duration must be positive");
        Trajectory t;
        t.node_ = traj_detail::Bezier{y_from, y_to, t_start, duration};
        return t;
    }

    static Trajectory sine(double amplitude, double omega, double phase = 0.0, double offset = 0.0) {
        Trajectory t;
        t.node_ = traj_detail::Sine{amplitude, omega, phase, offset};
        return t;
    }

    /// steps: (target, t_start, duration) triples, applied in time order
    /// starting from start_value.
    static Trajectory piecewise(double start_value,
                                const std::vector<std::array<double, 3>>& steps) {
        traj_detail::Piecewise pw;
        double from = start_value;
        double prev_end = -std::numeric_limits<double>::infinity();
        for (const auto& s : steps) {
            const double target = s[0], t_start = s[1], duration = s[2];
            if (!(duration > 0.0)) throw std::invalid_argument("piecewise: duration must be positive");
            if (t_start < prev_end)
                throw std::invalid_argument("piecewise: overlapping transitions");
            pw.steps.push_back({from, target, t_start, duration});
            from = target;
            prev_end = t_start + duration;
        }
        Trajectory t;
        t.node_ = pw;
        return t;
    }

private:
    std::variant<traj_detail::Constant, traj_detail::Bezier, traj_detail::Sine,
                 traj_detail::Piecewise>
        node_;
};

/// Convenience matching the construction vocabulary used by scenario configs.
inline Trajectory bezier_transition(double y_from, double y_to, double t_start, double duration) {
    return Trajectory::bezier(y_from, y_to, t_start, duration);
}

/// Nominal flat-output plan for the non-minimum-phase plant
///   x1' = x2, x2' = (b+c)x2 - bc x1 + u, y = x2 - a x1  (flat output z = x1).
/// z* solves z*' = a z* + y* integrated backward in time (stable direction for
/// a > 0) from the steady-state-matching terminal condition
/// z*(t_end) = -y*(t_end)/a; u* and its derivative follow pointwise from
///   u* = z*'' - (b+c) z*' + bc z*.
struct FlatNominal {
    SampledSignal z_star;      ///< flat-output reference
    SampledSignal z_dot_star;
    SampledSignal u_star;      ///< nominal open-loop control
    SampledSignal u_dot_star;
};

inline FlatNominal flat_nominal_nonminphase(const Trajectory& y_star, double a, double b,
                                            double c, double t0, double duration, double ts) {
    if (a == 0.0)
        throw std::invalid_argument("flat_nominal_nonminphase: a = 0 degenerates the flat-output relation");
    if (!(duration > 0.0) || !(ts > 0.0))
        throw std::invalid_argument("flat_nominal_nonminphase: need positive duration and ts");

    const std::size_t n = static_cast<std::size_t>(std::round(duration / ts)) + 1;
    const double t_end = t0 + static_cast<double>(n - 1) * ts;

    std::vector<double> z(n);
    z[n - 1] = -y_star.eval(t_end) / a;
    auto f = [&](double t, double zv) { return a * zv + y_star.eval(t); };
    for (std::size_t k = n - 1; k > 0; --k) {
        // RK4 with negative step from t_k to t_{k-1}
        const double t = t0 + static_cast<double>(k) * ts;
        const double h = -ts;
        const double k1 = f(t, z[k]);
        const double k2 = f(t + 0.5 * h, z[k] + 0.5 * h * k1);
        const double k3 = f(t + 0.5 * h, z[k] + 0.5 * h * k2);
        const double k4 = f(t + h, z[k] + h * k3);
        z[k - 1] = z[k] + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    FlatNominal out;
    out.z_star = {z, ts, t0};
    out.z_dot_star = {std::vector<double>(n), ts, t0};
    out.u_star = {std::vector<double>(n), ts, t0};
    out.u_dot_star = {std::vector<double>(n), ts, t0};
    for (std::size_t k = 0; k < n; ++k) {
        const double t = t0 + static_cast<double>(k) * ts;
        const double zd = a * z[k] + y_star.eval(t);
        const double zdd = a * zd + y_star.eval(t, 1);
        const double zddd = a * zdd + y_star.eval(t, 2);
        out.z_dot_star.samples[k] = zd;
        out.u_star.samples[k] = zdd - (b + c) * zd + b * c * z[k];
        out.u_dot_star.samples[k] = zddd - (b + c) * zdd + b * c * zd;
    }
    return out;
}

}  // namespace mfc
