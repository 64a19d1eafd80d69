#include "shortgp/kernels.hpp"

#include "shortgp/errors.hpp"
#include "shortgp/special.hpp"

#include <cmath>
#include <cstdlib>
#include <sstream>

namespace shortgp {

namespace {

using special::kPi;

constexpr double kSqrt3 = 1.7320508075688772935274463415059;
constexpr double kSqrt5 = 2.2360679774997896964091736687313;

enum class ClosedForm { None, SquaredExponential, Matern12, Matern32, Matern52 };

ClosedForm closed_form(const KernelFamily& family) {
    if (!family.is_matern()) return ClosedForm::SquaredExponential;
    if (family.nu == 0.5) return ClosedForm::Matern12;
    if (family.nu == 1.5) return ClosedForm::Matern32;
    if (family.nu == 2.5) return ClosedForm::Matern52;
    return ClosedForm::None;
}

// 2^{1-nu} / Gamma(nu), the normalizer of z^nu K_nu(z).
double matern_normalizer(double nu) {
    return std::exp((1.0 - nu) * std::log(2.0) - special::log_gamma(nu));
}

// Below this scaled distance the general-nu Matern kernel equals sigma_f^2 to
// double precision for nu > 1 (the deficit is ~z^2 / (4 (nu - 1))).
constexpr double kGeneralMaternFlat = 1e-8;

double general_matern_unit(double nu, double z) {
    if (z == 0.0 || (nu > 1.0 && z < kGeneralMaternFlat)) return 1.0;
    return matern_normalizer(nu) * std::pow(z, nu) * special::bessel_k(nu, z);
}

}  // namespace

KernelFamily KernelFamily::matern(double nu) {
    if (!(nu > 0.0) || !std::isfinite(nu)) throw DomainError("Matern smoothness nu must be positive");
    return {Kind::Matern, nu};
}

bool KernelFamily::has_closed_form() const { return closed_form(*this) != ClosedForm::None; }

std::string KernelFamily::name() const {
    switch (closed_form(*this)) {
        case ClosedForm::SquaredExponential: return "se";
        case ClosedForm::Matern12: return "matern12";
        case ClosedForm::Matern32: return "matern32";
        case ClosedForm::Matern52: return "matern52";
        case ClosedForm::None: break;
    }
    std::ostringstream out;
    out.precision(17);
    out << "matern:" << nu;
    return out.str();
}

KernelFamily parse_kernel_family(const std::string& text) {
    if (text == "se" || text == "rbf" || text == "squared_exponential") {
        return KernelFamily::squared_exponential();
    }
    if (text == "matern12") return KernelFamily::matern(0.5);
    if (text == "matern32") return KernelFamily::matern(1.5);
    if (text == "matern52") return KernelFamily::matern(2.5);
    if (text.rfind("matern:", 0) == 0) {
        const std::string number = text.substr(7);
        char* end = nullptr;
        const double nu = std::strtod(number.c_str(), &end);
        if (number.empty() || *end != '\0') throw DataError("bad Matern order in '" + text + "'");
        return KernelFamily::matern(nu);
    }
    throw DataError("unknown kernel family '" + text + "'");
}

void KernelSpec::validate() const {
    auto positive = [](double v) { return v > 0.0 && std::isfinite(v); };
    if (!positive(signal_variance)) throw DomainError("signal variance must be positive");
    if (!positive(length_scale)) throw DomainError("length-scale must be positive");
    if (family.is_matern() && !positive(family.nu)) throw DomainError("Matern nu must be positive");
}

std::vector<double> noise_diagonal(const NoiseModel& noise, std::size_t n) {
    if (const auto* estimated = std::get_if<EstimatedNoise>(&noise)) {
        if (!(estimated->variance >= 0.0)) throw DataError("noise variance must be non-negative");
        return std::vector<double>(n, estimated->variance);
    }
    const auto& fixed = std::get<FixedNoise>(noise).variances;
    if (fixed.size() != n) throw DataError("fixed noise variances do not match the series length");
    for (double v : fixed) {
        if (!(v >= 0.0)) throw DataError("fixed noise variances must be non-negative");
    }
    return fixed;
}

double covariance(const KernelSpec& spec, double r) {
    r = std::abs(r);
    const double ell = spec.length_scale;
    const double sf2 = spec.signal_variance;
    switch (closed_form(spec.family)) {
        case ClosedForm::SquaredExponential: return sf2 * std::exp(-0.5 * r * r / (ell * ell));
        case ClosedForm::Matern12: return sf2 * std::exp(-r / ell);
        case ClosedForm::Matern32: {
            const double z = kSqrt3 * r / ell;
            return sf2 * (1.0 + z) * std::exp(-z);
        }
        case ClosedForm::Matern52: {
            const double z = kSqrt5 * r / ell;
            return sf2 * (1.0 + z + z * z / 3.0) * std::exp(-z);
        }
        case ClosedForm::None: break;
    }
    const double nu = spec.family.nu;
    return sf2 * general_matern_unit(nu, std::sqrt(2.0 * nu) * r / ell);
}

KernelGradient covariance_gradient(const KernelSpec& spec, double r) {
    r = std::abs(r);
    const double ell = spec.length_scale;
    const double sf2 = spec.signal_variance;
    KernelGradient g;
    switch (closed_form(spec.family)) {
        case ClosedForm::SquaredExponential: {
            const double unit = std::exp(-0.5 * r * r / (ell * ell));
            g.d_signal_variance = unit;
            g.d_length_scale = sf2 * unit * r * r / (ell * ell * ell);
            return g;
        }
        case ClosedForm::Matern12: {
            const double unit = std::exp(-r / ell);
            g.d_signal_variance = unit;
            g.d_length_scale = sf2 * unit * r / (ell * ell);
            return g;
        }
        case ClosedForm::Matern32: {
            const double z = kSqrt3 * r / ell;
            const double e = std::exp(-z);
            g.d_signal_variance = (1.0 + z) * e;
            g.d_length_scale = sf2 * z * z * e / ell;
            return g;
        }
        case ClosedForm::Matern52: {
            const double z = kSqrt5 * r / ell;
            const double e = std::exp(-z);
            g.d_signal_variance = (1.0 + z + z * z / 3.0) * e;
            g.d_length_scale = sf2 * z * z * (1.0 + z) * e / (3.0 * ell);
            return g;
        }
        case ClosedForm::None: break;
    }
    // d/dz [z^nu K_nu(z)] = -z^nu K_{nu-1}(z) and dz/d ell = -z / ell.
    const double nu = spec.family.nu;
    const double z = std::sqrt(2.0 * nu) * r / ell;
    g.d_signal_variance = general_matern_unit(nu, z);
    if (z > 0.0) {
        g.d_length_scale = sf2 * matern_normalizer(nu) * std::pow(z, nu + 1.0) *
                           special::bessel_k(nu - 1.0, z) / ell;
    }
    return g;
}

double spectral_density(const KernelSpec& spec, double frequency) {
    const double ell = spec.length_scale;
    if (!spec.family.is_matern()) {
        const double a = kPi * ell * frequency;
        return spec.signal_variance * std::sqrt(2.0 * kPi) * ell * std::exp(-2.0 * a * a);
    }
    // 2 sqrt(pi) Gamma(nu+1/2) (2nu)^nu / (Gamma(nu) ell^{2nu}) (2nu/ell^2 + 4 pi^2 s^2)^{-(nu+1/2)},
    // rearranged as C ell (1 + u^2)^{-(nu+1/2)} with u^2 = (2 pi ell s)^2 / (2 nu).
    const double nu = spec.family.nu;
    const double log_c = std::log(2.0) + 0.5 * std::log(kPi) + special::log_gamma(nu + 0.5) -
                         special::log_gamma(nu) - 0.5 * std::log(2.0 * nu);
    const double w = 2.0 * kPi * ell * frequency;
    const double u2 = w * w / (2.0 * nu);
    return spec.signal_variance * ell * std::exp(log_c - (nu + 0.5) * std::log1p(u2));
}

Eigen::MatrixXd cross_covariance(const KernelSpec& spec, std::span<const double> a,
                                 std::span<const double> b) {
    Eigen::MatrixXd k(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) k(i, j) = covariance(spec, a[i] - b[j]);
    }
    return k;
}

Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, std::span<const double> times,
                                  const NoiseModel& noise) {
    spec.validate();
    const auto n = times.size();
    const std::vector<double> diag = noise_diagonal(noise, n);
    Eigen::MatrixXd k(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        k(i, i) = spec.signal_variance + diag[i];
        for (std::size_t j = 0; j < i; ++j) {
            const double v = covariance(spec, times[i] - times[j]);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    return k;
}

Eigen::MatrixXd covariance_matrix_length_scale_derivative(const KernelSpec& spec,
                                                          std::span<const double> times) {
    const auto n = times.size();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < i; ++j) {
            const double v = covariance_gradient(spec, times[i] - times[j]).d_length_scale;
            d(i, j) = v;
            d(j, i) = v;
        }
    }
    return d;
}

}  // namespace shortgp
