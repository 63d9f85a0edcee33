#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xcorr/kernel.hpp"
#include "xcorr/signal.hpp"

namespace xcorr {

enum class RiemannRule { left, trapezoid };

struct CorrelogramEstimate {
  std::vector<double> tau_grid;  // lattice-snapped lags
  std::vector<double> h_hat;
  std::vector<double> h_mean;
  std::vector<double> z_hat;
  double T = 0.0;
  double delta = 0.0;
  double c = 1.0;
  double dt = 0.0;
  std::uint64_t seed = 0;
  /// Largest |requested τ − snapped τ|.
  double max_snap_shift = 0.0;
};

/// Lags rounded to the nearest multiple of dt.
std::vector<double> snap_to_lattice(std::span<const double> tau_grid, double dt);

/// Ĥ(τ) = (1/(cT)) Σ_{t_j ∈ [0,T)} Y(t_j + τ) X(t_j) dt with τ snapped to the
/// path lattice. The trapezoid rule spans [0, T] with half weights at the ends.
std::vector<double> cross_correlogram(const SampledPath& Y, const SampledPath& X, double c, double T,
                                      std::span<const double> tau_grid,
                                      RiemannRule rule = RiemannRule::left);

/// E Ĥ(τ) = (1/c) ∫ g(s) H(s + τ) ds, evaluated in the frequency domain.
double theoretical_bias(const Kernel& h, const Kernel& g, double c, double tau);

/// Same quantity by direct quadrature over the support of g.
double theoretical_bias_time_domain(const Kernel& h, const Kernel& g, double c, double tau);

/// Ẑ(τ) = √T (Ĥ(τ) − E Ĥ(τ)).
std::vector<double> centered_process(const CorrelogramEstimate& est);

/// Ĥ, E Ĥ and Ẑ for one simulated pair.
CorrelogramEstimate estimate(const SampledPath& Y, const SampledPath& X, const Kernel& h,
                             const Kernel& g, double c, double T, double delta,
                             std::span<const double> tau_grid,
                             RiemannRule rule = RiemannRule::left);

/// Lowest and highest time the estimator needs from the paths.
std::pair<double, double> required_span(double T, std::span<const double> tau_grid, double dt);

/// CSV columns tau,h_hat,h_mean,z_hat plus a JSON sidecar {T, delta, c, dt, seed}.
void write_estimate(const CorrelogramEstimate& est, const std::filesystem::path& csv,
                    const std::filesystem::path& sidecar);

}  // namespace xcorr
