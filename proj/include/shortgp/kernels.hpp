#pragma once

#include <Eigen/Core>

#include <span>
#include <string>
#include <variant>
#include <vector>

namespace shortgp {

/// Covariance family: squared exponential, or Matern with smoothness nu > 0.
struct KernelFamily {
    enum class Kind { SquaredExponential, Matern };

    Kind kind = Kind::SquaredExponential;
    double nu = 0.0;  // only meaningful for Matern

    static KernelFamily squared_exponential() { return {Kind::SquaredExponential, 0.0}; }
    static KernelFamily matern(double nu);

    bool is_matern() const { return kind == Kind::Matern; }
    /// True for the families with closed-form kernels: SE and Matern 1/2, 3/2, 5/2.
    bool has_closed_form() const;
    std::string name() const;

    friend bool operator==(const KernelFamily&, const KernelFamily&) = default;
};

/// Parses "se", "matern12", "matern32", "matern52" or "matern:<nu>".
KernelFamily parse_kernel_family(const std::string& text);

/// Family plus hyperparameters, always in natural (not log) space.
struct KernelSpec {
    KernelFamily family;
    double signal_variance = 1.0;  // sigma_f^2
    double length_scale = 1.0;     // ell

    /// Throws DomainError unless every hyperparameter is finite and positive.
    void validate() const;
};

struct KernelGradient {
    double d_signal_variance = 0.0;
    double d_length_scale = 0.0;
};

/// Observation noise: one estimated variance shared by all points, or
/// known per-point variances.
struct EstimatedNoise {
    double variance = 0.0;
};
struct FixedNoise {
    std::vector<double> variances;
};
using NoiseModel = std::variant<EstimatedNoise, FixedNoise>;

/// Per-point noise variances for n observations. Throws DataError if a fixed
/// model has the wrong length or a negative entry.
std::vector<double> noise_diagonal(const NoiseModel& noise, std::size_t n);

/// k(r) for distance r >= 0.
double covariance(const KernelSpec& spec, double r);

/// Partial derivatives of k(r) with respect to sigma_f^2 and ell.
KernelGradient covariance_gradient(const KernelSpec& spec, double r);

/// Spectral density of the one-dimensional kernel, normalized so that it
/// integrates to sigma_f^2 over the whole frequency axis.
double spectral_density(const KernelSpec& spec, double frequency);

/// Noise-free Gram matrix k(|a_i - b_j|).
Eigen::MatrixXd cross_covariance(const KernelSpec& spec, std::span<const double> a,
                                 std::span<const double> b);

/// Gram matrix with the noise variances added on the diagonal.
Eigen::MatrixXd covariance_matrix(const KernelSpec& spec, std::span<const double> times,
                                  const NoiseModel& noise);

/// Element-wise derivative of the Gram matrix with respect to ell.
Eigen::MatrixXd covariance_matrix_length_scale_derivative(const KernelSpec& spec,
                                                          std::span<const double> times);

}  // namespace shortgp
