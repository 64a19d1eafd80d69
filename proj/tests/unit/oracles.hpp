#pragma once

// Reference implementations used only as test oracles. They share no code
// with the library: plain loops, composite Simpson rules and Gauss-Jordan
// elimination, chosen for being obviously correct rather than fast.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

namespace oracle {

inline constexpr double pi = std::numbers::pi;

/// Composite Simpson on [a, b] with `panels` (even) subintervals.
inline double simpson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    if (panels % 2) ++panels;
    const double h = (b - a) / panels;
    double sum = f(a) + f(b);
    for (int i = 1; i < panels; ++i) sum += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return sum * h / 3.0;
}

/// Richardson-extrapolated Simpson: S(2n) + (S(2n) - S(n)) / 15.
inline double simpson_richardson(const std::function<double(double)>& f, double a, double b, int panels = 20000) {
    const double coarse = simpson(f, a, b, panels);
    const double fine = simpson(f, a, b, 2 * panels);
    return fine + (fine - coarse) / 15.0;
}

using Matrix = std::vector<std::vector<double>>;

inline Matrix identity(std::size_t n) {
    Matrix m(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

/// Inverse and determinant by Gauss-Jordan with partial pivoting.
inline Matrix invert(Matrix a, double* determinant = nullptr) {
    const std::size_t n = a.size();
    Matrix inv = identity(n);
    double det = 1.0;
    for (std::size_t c = 0; c < n; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < n; ++r) {
            if (std::abs(a[r][c]) > std::abs(a[p][c])) p = r;
        }
        if (a[p][c] == 0.0) throw std::runtime_error("singular matrix");
        if (p != c) {
            std::swap(a[p], a[c]);
            std::swap(inv[p], inv[c]);
            det = -det;
        }
        const double pivot = a[c][c];
        det *= pivot;
        for (std::size_t k = 0; k < n; ++k) {
            a[c][k] /= pivot;
            inv[c][k] /= pivot;
        }
        for (std::size_t r = 0; r < n; ++r) {
            if (r == c) continue;
            const double f = a[r][c];
            for (std::size_t k = 0; k < n; ++k) {
                a[r][k] -= f * a[c][k];
                inv[r][k] -= f * inv[c][k];
            }
        }
    }
    if (determinant) *determinant = det;
    return inv;
}

inline std::vector<double> multiply(const Matrix& m, const std::vector<double>& v) {
    std::vector<double> out(m.size(), 0.0);
    for (std::size_t i = 0; i < m.size(); ++i) {
        for (std::size_t j = 0; j < v.size(); ++j) out[i] += m[i][j] * v[j];
    }
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double se_kernel(double sf2, double ell, double r) { return sf2 * std::exp(-r * r / (2 * ell * ell)); }

inline double matern_kernel(double nu, double sf2, double ell, double r) {
    if (r == 0.0) return sf2;
    if (nu == 0.5) return sf2 * std::exp(-r / ell);
    if (nu == 1.5) {
        const double z = std::sqrt(3.0) * r / ell;
        return sf2 * (1 + z) * std::exp(-z);
    }
    if (nu == 2.5) {
        const double z = std::sqrt(5.0) * r / ell;
        return sf2 * (1 + z + z * z / 3) * std::exp(-z);
    }
    const double z = std::sqrt(2 * nu) * r / ell;
    return sf2 * std::pow(2.0, 1 - nu) / std::tgamma(nu) * std::pow(z, nu) * std::cyl_bessel_k(nu, z);
}

/// Log marginal likelihood from an explicit inverse and determinant.
inline double log_marginal_likelihood(const Matrix& k, const std::vector<double>& y) {
    double det = 0.0;
    const Matrix inv = invert(k, &det);
    return -0.5 * dot(y, multiply(inv, y)) - 0.5 * std::log(det) - 0.5 * static_cast<double>(y.size()) * std::log(2 * pi);
}

/// Central difference of f at x with step h.
inline double central_difference(const std::function<double(double)>& f, double x, double h) {
    return (f(x + h) - f(x - h)) / (2 * h);
}

/// Small deterministic generator for property tests (xorshift64*).
class Generator {
public:
    explicit Generator(std::uint64_t seed) : state_(seed ? seed : 0x9e3779b97f4a7c15ULL) {}

    std::uint64_t next() {
        state_ ^= state_ >> 12;
        state_ ^= state_ << 25;
        state_ ^= state_ >> 27;
        return state_ * 0x2545f4914f6cdd1dULL;
    }
    double uniform(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * (static_cast<double>(next() >> 11) * 0x1.0p-53);
    }
    double log_uniform(double lo, double hi) { return std::exp(uniform(std::log(lo), std::log(hi))); }
    int integer(int lo, int hi) { return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1)); }
    double normal() {
        const double u1 = uniform(1e-300, 1.0), u2 = uniform();
        return std::sqrt(-2 * std::log(u1)) * std::cos(2 * pi * u2);
    }
    /// n strictly increasing times with random gaps.
    std::vector<double> times(int n, double min_gap = 0.2, double max_gap = 2.0) {
        std::vector<double> t{uniform(-3.0, 3.0)};
        for (int i = 1; i < n; ++i) t.push_back(t.back() + uniform(min_gap, max_gap));
        return t;
    }
    std::vector<double> values(int n, double scale = 1.0) {
        std::vector<double> v;
        for (int i = 0; i < n; ++i) v.push_back(scale * normal());
        return v;
    }

private:
    std::uint64_t state_;
};

inline double sinc(double t) { return t == 0.0 ? 1.0 : std::sin(t) / t; }

}  // namespace oracle
