// Test-only reference implementations, kept independent of the library's
// numerical paths: cofactor-expansion linear solve, discrete least-squares
// polynomial fitting, and a series matrix exponential for analytic
// step responses of linear plants.
#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace oracle {

using Matrix = std::vector<std::vector<double>>;

inline double determinant(const Matrix& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    double det = 0.0;
    for (std::size_t c = 0; c < n; ++c) {
        Matrix minor(n - 1, std::vector<double>(n - 1));
        for (std::size_t r = 1; r < n; ++r) {
            std::size_t cc = 0;
            for (std::size_t k = 0; k < n; ++k) {
                if (k == c) continue;
                minor[r - 1][cc++] = m[r][k];
            }
        }
        det += ((c % 2) ? -1.0 : 1.0) * m[0][c] * determinant(minor);
    }
    return det;
}

/// Cramer's rule; exact-ish for the tiny systems used in tests.
inline std::vector<double> cramer_solve(const Matrix& a, const std::vector<double>& b) {
    const std::size_t n = a.size();
    const double d = determinant(a);
    if (d == 0.0) throw std::runtime_error("cramer_solve: singular");
    std::vector<double> x(n);
    for (std::size_t j = 0; j < n; ++j) {
        Matrix aj = a;
        for (std::size_t r = 0; r < n; ++r) aj[r][j] = b[r];
        x[j] = determinant(aj) / d;
    }
    return x;
}

/// Brute-force kernel synthesis: solve the raw (unnormalized) moment system
/// integral_0^L sigma^(i+j) dsigma * c_i = (-1)^n n! [j == n] on [0, L].
inline std::vector<double> kernel_coefficients(int order, int degree, double window) {
    const std::size_t m = static_cast<std::size_t>(degree) + 1;
    Matrix a(m, std::vector<double>(m));
    for (std::size_t j = 0; j < m; ++j)
        for (std::size_t i = 0; i < m; ++i)
            a[j][i] = std::pow(window, static_cast<double>(i + j + 1)) /
                      static_cast<double>(i + j + 1);
    std::vector<double> b(m, 0.0);
    double fact = 1.0;
    for (int i = 2; i <= order; ++i) fact *= i;
    b[static_cast<std::size_t>(order)] = ((order % 2) ? -1.0 : 1.0) * fact;
    return cramer_solve(a, b);
}

/// Least-squares degree-N polynomial fit of (t_k, y_k); returns coefficients
/// of y(t) in powers of (t - t_ref).
inline std::vector<double> lsq_poly_fit(const std::vector<double>& t,
                                        const std::vector<double>& y, int degree,
                                        double t_ref) {
    const std::size_t m = static_cast<std::size_t>(degree) + 1;
    Matrix a(m, std::vector<double>(m, 0.0));
    std::vector<double> b(m, 0.0);
    for (std::size_t s = 0; s < t.size(); ++s) {
        const double x = t[s] - t_ref;
        std::vector<double> p(m);
        double v = 1.0;
        for (std::size_t i = 0; i < m; ++i) {
            p[i] = v;
            v *= x;
        }
        for (std::size_t r = 0; r < m; ++r) {
            b[r] += p[r] * y[s];
            for (std::size_t c = 0; c < m; ++c) a[r][c] += p[r] * p[c];
        }
    }
    return cramer_solve(a, b);
}

/// exp(M) by scaling-and-squaring on the Taylor series.
inline Matrix expm(Matrix m) {
    const std::size_t n = m.size();
    double norm = 0.0;
    for (const auto& row : m) {
        double s = 0.0;
        for (double v : row) s += std::abs(v);
        norm = std::max(norm, s);
    }
    int squarings = 0;
    while (norm > 0.5) {
        norm /= 2.0;
        ++squarings;
    }
    const double scale = std::pow(2.0, -squarings);
    for (auto& row : m)
        for (double& v : row) v *= scale;

    auto matmul = [n](const Matrix& a, const Matrix& b) {
        Matrix r(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                for (std::size_t j = 0; j < n; ++j) r[i][j] += a[i][k] * b[k][j];
        return r;
    };

    Matrix result(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) result[i][i] = 1.0;
    Matrix term = result;
    for (int k = 1; k <= 24; ++k) {
        term = matmul(term, m);
        for (auto& row : term)
            for (double& v : row) v /= k;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) result[i][j] += term[i][j];
    }
    for (int s = 0; s < squarings; ++s) result = matmul(result, result);
    return result;
}

/// Analytic ZOH step response of x' = A x + B u, y = C x from x(0) = 0 under
/// u(t) = step: x(t) via the augmented exponential exp([[A, B u]; [0, 0]] t).
inline std::vector<double> linear_step_state(const Matrix& a, const std::vector<double>& b,
                                             double u, double t) {
    const std::size_t n = a.size();
    Matrix aug(n + 1, std::vector<double>(n + 1, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) aug[i][j] = a[i][j] * t;
        aug[i][n] = b[i] * u * t;
    }
    const Matrix e = expm(aug);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = e[i][n];
    return x;
}

}  // namespace oracle
