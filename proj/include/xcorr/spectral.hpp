#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "xcorr/kernel.hpp"

namespace xcorr {

enum class QuadratureRule { adaptive, fixed_grid };

struct QuadratureSettings {
  /// Frequency cut-off; 0 picks it from the kernels (band limit or tail extent).
  double lambda_max = 0.0;
  double abs_tol = 1e-9;
  double rel_tol = 1e-9;
  QuadratureRule rule = QuadratureRule::adaptive;
  /// Number of Fejér lobes on each side of the origin integrated explicitly.
  int fejer_lobes = 512;
};

struct CovarianceModel {
  Kernel h;
  std::optional<Kernel> g;
  double c = 1.0;
  QuadratureSettings quadrature{};
};

/// Φ_T(λ) = (1/2πT) (sin(Tλ/2) / (λ/2))².
double fejer(double T, double lambda);

/// ∫ Φ_T(λ) dλ through the same lobe-plus-tail scheme used for the covariance.
double fejer_integral(double T, const QuadratureSettings& q = {});

/// σ²(τ) = ∫ |H*(λ)|² sin²(τλ/2) dλ.
double sigma_squared(const Kernel& h, double tau, const QuadratureSettings& q = {});
double sigma(const Kernel& h, double tau, const QuadratureSettings& q = {});
inline double sigma(const Kernel& h, double tau1, double tau2, const QuadratureSettings& q = {}) {
  return sigma(h, tau2 - tau1, q);
}

/// E|Y(τ₂) − Y(τ₁)|² = (2/π) σ²(τ₂ − τ₁).
double msq_increment_Y(const Kernel& h, double tau1, double tau2, const QuadratureSettings& q = {});

/// K_Y(v) = E Y(t+v) Y(t).
double covariance_Y(const Kernel& h, double lag, const QuadratureSettings& q = {});
/// K_YX(v) = E Y(t+v) X(t).
double cross_covariance(const Kernel& h, const Kernel& g, double lag,
                        const QuadratureSettings& q = {});

/// C_∞(τ₁, τ₂) = (1/2π) ∫ [e^{i(τ₁−τ₂)λ}|H*|² + e^{i(τ₁+τ₂)λ}(H*)²] dλ.
double cov_limit(const Kernel& h, double tau1, double tau2, const QuadratureSettings& q = {});
Eigen::MatrixXd cov_limit_matrix(const Kernel& h, std::span<const double> taus,
                                 const QuadratureSettings& q = {});

/// Finite-(T, Δ) covariance E Ẑ(τ₁)Ẑ(τ₂), integrated in the frequency domain
/// with the difference variable u = λ₁ − λ₂ on the outside.
double cov_finite(const CovarianceModel& model, double T, double tau1, double tau2);
Eigen::MatrixXd cov_finite_matrix(const CovarianceModel& model, double T,
                                  std::span<const double> taus);

/// Diagonal E Ẑ(τ)² only; cost linear in the number of lags.
Eigen::VectorXd cov_finite_diagonal(const CovarianceModel& model, double T,
                                    std::span<const double> taus);

/// Same covariance through the lag-domain representation
/// (1/c²) ∫_{−T}^{T} (1 − |v|/T)[K_Y(v+τ₁−τ₂) K_X(v) + K_YX(v+τ₁) K_YX(τ₂−v)] dv.
/// Much slower; used to cross-check the frequency-domain route.
double cov_finite_lag_domain(const CovarianceModel& model, double T, double tau1, double tau2);

/// Canonical pseudometric of Ẑ: (E|Ẑ(τ₁) − Ẑ(τ₂)|²)^{1/2}.
double rho_exact(const CovarianceModel& model, double T, double tau1, double tau2);
/// Pairwise ρ over a grid from a single covariance matrix.
Eigen::MatrixXd rho_exact_matrix(const CovarianceModel& model, double T,
                                 std::span<const double> taus);

/// (1/c) ((2/π) ‖H*‖₂)^{1/2} · g_family_sup · σ(τ₁, τ₂)^{1/2}.
double rho_upper(const Kernel& h, double g_family_sup, double c, double tau1, double tau2,
                 const QuadratureSettings& q = {});
/// Multiplier that makes rho_upper a valid bound: expanding E|Ẑ(τ₁) − Ẑ(τ₂)|²
/// gives the prefactor 2/(πc²) rather than 1/(πc²), so ρ ≤ √2 · rho_upper.
/// With factor 1, sinc/triangular at (τ₁, τ₂) = (0, 1) is a counterexample.
inline constexpr double kRhoUpperSafetyFactor = 1.4142135623730951;

/// (2/c) ‖H‖₂ · g_family_sup, uniform in T, Δ and the lags.
double rho_uniform_bound(const Kernel& h, double g_family_sup, double c);

struct IncrementBound {
  double dZ = 0.0;     // (E|Z(τ₁) − Z(τ₂)|²)^{1/2}
  double bound = 0.0;  // (2/√π) σ(τ₁, τ₂)
};

/// Throws NumericalConsistencyError when dZ exceeds the bound by more than abs_tol.
IncrementBound dZ_bound_check(const Kernel& h, double tau1, double tau2,
                              const QuadratureSettings& q = {});

/// Lower-triangle clamp used for variances and squared distances: values in
/// [−slack, 0) become 0, anything more negative throws.
double clamp_nonnegative(double v, double slack, const char* what);

}  // namespace xcorr
