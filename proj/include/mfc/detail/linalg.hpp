#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mfc::detail {

// Dense row-major square matrix helper for the small systems this library
// solves (moment systems up to 5x5, pole-placement up to 4x4). Not a
// general-purpose linear algebra layer.
class SmallMatrix {
public:
    SmallMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

private:
    std::size_t rows_, cols_;
    std::vector<double> data_;
};

// Gaussian elimination with partial pivoting. Throws on (near-)singular input.
inline std::vector<double> solve(SmallMatrix a, std::vector<double> b) {
    const std::size_t n = a.rows();
    if (a.cols() != n || b.size() != n)
        throw std::invalid_argument("solve: dimension mismatch");

    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a(r, col)) > std::abs(a(pivot, col))) pivot = r;
        if (std::abs(a(pivot, col)) < 1e-14)
            throw std::runtime_error("solve: singular matrix");
        if (pivot != col) {
            for (std::size_t c = col; c < n; ++c) std::swap(a(col, c), a(pivot, c));
            std::swap(b[col], b[pivot]);
        }
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = a(r, col) / a(col, col);
            if (f == 0.0) continue;
            for (std::size_t c = col; c < n; ++c) a(r, c) -= f * a(col, c);
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = n; i-- > 0;) {
        double s = b[i];
        for (std::size_t c = i + 1; c < n; ++c) s -= a(i, c) * x[c];
        x[i] = s / a(i, i);
    }
    return x;
}

// --- polynomial helpers (coefficient vectors, c[i] multiplies x^i) ---

inline std::vector<double> poly_mul(const std::vector<double>& p, const std::vector<double>& q) {
    std::vector<double> r(p.size() + q.size() - 1, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i)
        for (std::size_t j = 0; j < q.size(); ++j) r[i + j] += p[i] * q[j];
    return r;
}

// Monic polynomial with the given roots: prod (x - r_k).
inline std::vector<double> poly_from_roots(const std::vector<double>& roots) {
    std::vector<double> p{1.0};
    for (double r : roots) p = poly_mul(p, {-r, 1.0});
    return p;
}

inline double poly_eval(const std::vector<double>& c, double x) {
    double v = 0.0;
    for (std::size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
}

inline std::vector<double> poly_derivative(const std::vector<double>& c) {
    if (c.size() <= 1) return {0.0};
    std::vector<double> d(c.size() - 1);
    for (std::size_t i = 1; i < c.size(); ++i) d[i - 1] = c[i] * static_cast<double>(i);
    return d;
}

inline std::vector<double> poly_antiderivative(const std::vector<double>& c) {
    std::vector<double> a(c.size() + 1, 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) a[i + 1] = c[i] / static_cast<double>(i + 1);
    return a;
}

// Integral of the polynomial over [lo, hi].
inline double poly_integral(const std::vector<double>& c, double lo, double hi) {
    const auto a = poly_antiderivative(c);
    return poly_eval(a, hi) - poly_eval(a, lo);
}

}  // namespace mfc::detail
