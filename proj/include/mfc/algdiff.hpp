#pragma once

#include <cmath>
#include <cstddef>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "mfc/detail/linalg.hpp"
#include "mfc/signal.hpp"

namespace mfc {

/// Finite-window integral kernel estimating the n-th derivative of a signal
/// that is locally well modeled by a polynomial of degree <= N:
///
///   est(t) = integral_0^L w(sigma) * y(t - sigma) dsigma  ~=  y^(n)(t)
///
/// w is the unique polynomial of degree <= N satisfying the moment conditions
///   integral_0^L sigma^j w(sigma) dsigma = (-1)^n * n!  if j == n, else 0,
/// for j = 0..N, which makes the estimator exact on polynomials of degree <= N.
struct DerivativeKernel {
    int order = 0;        ///< derivative order n >= 0
    int degree = 0;       ///< local polynomial degree N >= n
    double window = 1.0;  ///< L, seconds
    std::vector<double> coeffs;  ///< w(sigma) = sum coeffs[i] * sigma^i

    double weight(double sigma) const { return detail::poly_eval(coeffs, sigma); }

    /// Exact integral of sigma^j * w(sigma) over [0, L].
    double moment(int j) const {
        std::vector<double> mono(static_cast<std::size_t>(j) + 1, 0.0);
        mono.back() = 1.0;
        return detail::poly_integral(detail::poly_mul(mono, coeffs), 0.0, window);
    }

    /// Exact integral of w^2 over [0, L] (white-noise gain of the continuous kernel).
    double l2_norm_sq() const {
        return detail::poly_integral(detail::poly_mul(coeffs, coeffs), 0.0, window);
    }
};

namespace detail {

inline double factorial(int n) {
    double f = 1.0;
    for (int i = 2; i <= n; ++i) f *= i;
    return f;
}

}  // namespace detail

/// Solves the (N+1)x(N+1) moment system for the degree-N kernel. The system is
/// assembled on the normalized window [0,1] (a Hilbert matrix) and rescaled,
/// which keeps it well conditioned for the small degrees used here.
inline DerivativeKernel make_kernel(int order, int degree, double window) {
    if (order < 0 || degree < order)
        throw std::invalid_argument("make_kernel: need 0 <= order <= degree");
    if (!(window > 0.0) || !std::isfinite(window))
        throw std::invalid_argument("make_kernel: window must be positive");

    const std::size_t m = static_cast<std::size_t>(degree) + 1;
    detail::SmallMatrix a(m, m);
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i) a(j, i) = 1.0 / static_cast<double>(i + j + 1);
    std::vector<double> b(m, 0.0);
    b[static_cast<std::size_t>(order)] =
        ((order % 2) ? -1.0 : 1.0) * detail::factorial(order);

    const auto v = detail::solve(a, b);  // kernel on [0,1]

    DerivativeKernel k;
    k.order = order;
    k.degree = degree;
    k.window = window;
    k.coeffs.resize(m);
    // w(sigma) = v(sigma/L) / L^(n+1)
    double scale = std::pow(window, order + 1);
    for (std::size_t i = 0; i < m; ++i) {
        k.coeffs[i] = v[i] / scale;
        scale *= window;
    }
    return k;
}

enum class Quadrature { trapezoid, midpoint };

/// Causal streaming evaluation of a DerivativeKernel on a sampled signal.
///
/// The estimate at time t uses only the samples in [t - L, t]. Discrete
/// weights are built by integrating the kernel exactly against the
/// piecewise-linear interpolant of the samples (trapezoid flavor) or by a
/// per-interval midpoint product rule, then minimally corrected so the
/// discrete moment sums match the continuous ones. The correction is what
/// keeps the estimator exact on sampled polynomials of degree <= N; raw
/// pointwise quadrature of the kernel loses that property badly for n >= 2.
class SlidingEstimator {
public:
    SlidingEstimator(DerivativeKernel kernel, double ts,
                     Quadrature quadrature = Quadrature::trapezoid)
        : kernel_(std::move(kernel)), ts_(ts), quadrature_(quadrature) {
        if (!(ts > 0.0)) throw std::invalid_argument("SlidingEstimator: ts must be positive");
        const double raw = kernel_.window / ts;
        const double rounded = std::round(raw);
        if (rounded < 1.0 || std::abs(raw - rounded) > 1e-6 * std::max(1.0, raw))
            throw std::invalid_argument(
                "SlidingEstimator: window must be a positive multiple of ts");
        intervals_ = static_cast<std::size_t>(rounded);
        build_weights();
    }

    const DerivativeKernel& kernel() const { return kernel_; }
    double ts() const { return ts_; }

    /// Number of samples needed before estimates become available.
    std::size_t warmup_samples() const { return intervals_ + 1; }

    bool ready() const { return buffer_.size() >= warmup_samples(); }

    /// Discrete weights; weights()[k] multiplies the sample at t - k*ts.
    const std::vector<double>& weights() const { return weights_; }

    /// Weights a_j such that, for the synthetic world y^(nu) = F + u under
    /// zero-order hold (constant F), this estimator applied to y returns
    /// exactly F + sum_j a_j * u(t - (j+1) ts). An ultra-local F estimate that
    /// subtracts the input history reduced with these weights cancels the
    /// input dependence identically; subtracting the single previous input
    /// instead leaves a delayed unit-gain internal loop that destabilizes the
    /// closed loop for any window of two or more intervals. The a_j are
    /// nonnegative and sum to 1 (convex averaging of the held inputs).
    std::vector<double> input_weights(int nu) const {
        if (nu != 1 && nu != 2)
            throw std::invalid_argument("input_weights: nu must be 1 or 2");
        const std::size_t m = intervals_;
        std::vector<double> a(m, 0.0);
        for (std::size_t j = 0; j < m; ++j) {
            for (std::size_t k = 0; k <= j; ++k) {
                const double d = static_cast<double>(j - k);
                const double g = nu == 1 ? ts_ : ts_ * ts_ * (d + 0.5);
                a[j] += weights_[k] * g;
            }
        }
        return a;
    }

    double weight_l2_sq() const {
        double s = 0.0;
        for (double w : weights_) s += w * w;
        return s;
    }

    void reset() { buffer_.clear(); }

    /// Feeds the next sample; returns the estimate at that sample's time once
    /// the window is full, std::nullopt while warming up.
    std::optional<double> push(double sample) {
        buffer_.push_front(sample);
        if (buffer_.size() > warmup_samples()) buffer_.pop_back();
        if (!ready()) return std::nullopt;
        double est = 0.0;
        for (std::size_t k = 0; k < weights_.size(); ++k) est += weights_[k] * buffer_[k];
        return est;
    }

    /// Batch evaluation at a grid time of `signal` (which must share ts).
    double estimate(const SampledSignal& signal, double t) const {
        if (std::abs(signal.ts - ts_) > 1e-12)
            throw std::invalid_argument("SlidingEstimator: signal ts mismatch");
        const std::size_t idx = signal.index_at(t);
        if (idx + 1 < warmup_samples())
            throw std::invalid_argument("SlidingEstimator: window not yet full at t");
        double est = 0.0;
        for (std::size_t k = 0; k < weights_.size(); ++k)
            est += weights_[k] * signal.samples[idx - k];
        return est;
    }

private:
    void build_weights() {
        const std::size_t m = intervals_;
        weights_.assign(m + 1, 0.0);

        // Product-integration base weights. weights_[k] pairs with the sample
        // at sigma = k*ts (k = 0 newest).
        for (std::size_t k = 0; k < m; ++k) {
            const double lo = static_cast<double>(k) * ts_;
            const double hi = lo + ts_;
            if (quadrature_ == Quadrature::trapezoid) {
                // integral of w(s) * hat functions of the linear interpolant
                const auto near = detail::poly_mul(kernel_.coeffs, {hi / ts_, -1.0 / ts_});
                const auto far = detail::poly_mul(kernel_.coeffs, {-lo / ts_, 1.0 / ts_});
                weights_[k] += detail::poly_integral(near, lo, hi);
                weights_[k + 1] += detail::poly_integral(far, lo, hi);
            } else {
                const double wm = kernel_.weight(0.5 * (lo + hi)) * ts_ * 0.5;
                weights_[k] += wm;
                weights_[k + 1] += wm;
            }
        }

        // Minimal-norm correction enforcing the discrete moment conditions
        //   sum_k weights_[k] * (k*ts)^j = continuous moment_j, j = 0..N.
        // Assembled in normalized abscissae x = sigma/L for conditioning.
        const std::size_t rows = static_cast<std::size_t>(kernel_.degree) + 1;
        std::vector<std::vector<double>> vand(rows, std::vector<double>(m + 1));
        for (std::size_t k = 0; k <= m; ++k) {
            const double x = static_cast<double>(k) * ts_ / kernel_.window;
            double p = 1.0;
            for (std::size_t j = 0; j < rows; ++j) {
                vand[j][k] = p;
                p *= x;
            }
        }
        std::vector<double> residual(rows);
        for (std::size_t j = 0; j < rows; ++j) {
            double target = (static_cast<int>(j) == kernel_.order)
                                ? ((kernel_.order % 2) ? -1.0 : 1.0) *
                                      detail::factorial(kernel_.order) /
                                      std::pow(kernel_.window, kernel_.order)
                                : 0.0;
            double got = 0.0;
            for (std::size_t k = 0; k <= m; ++k) got += vand[j][k] * weights_[k];
            residual[j] = target - got;
        }
        detail::SmallMatrix gram(rows, rows);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < rows; ++c) {
                double s = 0.0;
                for (std::size_t k = 0; k <= m; ++k) s += vand[r][k] * vand[c][k];
                gram(r, c) = s;
            }
        const auto lambda = detail::solve(gram, residual);
        for (std::size_t k = 0; k <= m; ++k) {
            double corr = 0.0;
            for (std::size_t j = 0; j < rows; ++j) corr += lambda[j] * vand[j][k];
            weights_[k] += corr;
        }
    }

    DerivativeKernel kernel_;
    double ts_;
    Quadrature quadrature_;
    std::size_t intervals_ = 0;
    std::vector<double> weights_;
    std::deque<double> buffer_;
};

/// Spec-shaped free function: estimate of the kernel'd derivative at grid time t.
inline double estimate(const SlidingEstimator& est, const SampledSignal& signal, double t) {
    return est.estimate(signal, t);
}

struct DenoiseResult {
    SampledSignal signal;
    std::size_t ready_from = 0;  ///< samples before this index carry the input value
};

/// Samplewise application of the (n = 0, N = degree) kernel. Output equals the
/// input while the window fills.
inline DenoiseResult denoise(const SampledSignal& signal, int degree, double window,
                             Quadrature quadrature = Quadrature::trapezoid) {
    if (signal.empty()) throw std::invalid_argument("denoise: empty signal");
    if (!(window > 0.0) || window > signal.ts * static_cast<double>(signal.size() - 1))
        throw std::invalid_argument("denoise: window must fit inside the signal duration");
    SlidingEstimator est(make_kernel(0, degree, window), signal.ts, quadrature);
    DenoiseResult out;
    out.signal = signal;
    out.ready_from = signal.size();
    for (std::size_t k = 0; k < signal.size(); ++k) {
        if (auto v = est.push(signal.samples[k])) {
            if (out.ready_from == signal.size()) out.ready_from = k;
            out.signal.samples[k] = *v;
        }
    }
    return out;
}

}  // namespace mfc
