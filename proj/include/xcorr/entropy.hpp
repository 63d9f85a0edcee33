#pragma once

#include <filesystem>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "xcorr/kernel.hpp"
#include "xcorr/spectral.hpp"

namespace xcorr {

enum class PseudometricKind { uniform_d, sigma, sqrt_sigma, rho_upper, rho_exact, custom };

std::string to_string(PseudometricKind k);

/// A distance on the real line. Translation-invariant kinds are described by
/// their profile p(u) = d(τ, τ + u); others by a pairwise function, optionally
/// restricted to a fixed lattice.
class Pseudometric {
 public:
  static Pseudometric uniform();
  static Pseudometric sigma(Kernel h, QuadratureSettings q = {});
  static Pseudometric sqrt_sigma(Kernel h, QuadratureSettings q = {});
  /// factor · κ √σ with κ = (1/c) ((2/π)‖H*‖₂)^{1/2} g_family_sup.
  static Pseudometric rho_upper(Kernel h, double g_family_sup, double c, QuadratureSettings q = {},
                                double factor = 1.0);
  /// Exact ρ on a fixed lattice; distances between off-lattice points use the
  /// nearest lattice points.
  static Pseudometric rho_exact(const CovarianceModel& model, double T, std::vector<double> lattice);
  static Pseudometric translation_invariant(std::string name, std::function<double(double)> profile);
  static Pseudometric general(std::string name, std::function<double(double, double)> dist);

  double operator()(double t1, double t2) const;
  PseudometricKind kind() const;
  const std::string& name() const;
  bool translation_invariant() const;
  /// p(u) for translation-invariant kinds; throws InvalidInput otherwise.
  double profile(double u) const;
  /// Lattice of a grid-based pseudometric (empty otherwise).
  std::span<const double> lattice() const;

  /// Running maximum of the profile tabulated on 4096 points over [0, span],
  /// computed once per span and cached.
  struct Table {
    double span = 0.0;
    std::vector<double> u;
    std::vector<double> value;
    std::vector<double> running_max;
  };
  std::shared_ptr<const Table> profile_table(double span) const;

  struct State;

 private:
  explicit Pseudometric(std::shared_ptr<State> s) : state_(std::move(s)) {}
  std::shared_ptr<State> state_;
};

struct Covering {
  std::size_t count = 0;
  bool upper_bound_only = false;  // greedy construction
  bool infinite = false;          // ε below every positive distance scale
  double achieved_radius = 0.0;   // greedy only: largest distance to a centre
};

/// N_p([a, b], ε): exact for translation-invariant p (up to profile
/// resolution), greedy farthest-point upper bound otherwise.
Covering covering_number(const Pseudometric& p, double a, double b, double eps);

/// Greedy farthest-point covering of an explicit point set.
Covering greedy_covering(const Pseudometric& p, std::span<const double> points, double eps);

struct EntropyProfile {
  double a = 0.0, b = 0.0;
  std::vector<double> epsilons;  // descending
  std::vector<std::size_t> covering_numbers;
  std::vector<double> entropies;  // ln N (∞ for infinite covers)
};

EntropyProfile entropy_profile(const Pseudometric& p, double a, double b,
                               std::span<const double> epsilons);
void write_entropy_profile(const EntropyProfile& e, const std::filesystem::path& csv);

struct EntropyIntegral {
  double value = 0.0;
  bool divergent = false;
  double tail = 0.0;         // contribution below the smallest resolved ε
  double fitted_slope = 0.0; // d ln f / d ln ε over the two smallest decades
  std::vector<double> epsilons;
  std::vector<double> integrand;
};

struct EntropyGrid {
  int decades = 8;
  int points_per_decade = 24;
  double divergence_margin = 0.1;
};

/// ∫₀ᵘ f(N_p([a,b], ε)) dε on a log-spaced grid (trapezoid) plus a fitted
/// bottom tail. `transform` maps a covering number to the integrand.
EntropyIntegral integrate_covering(const Pseudometric& p, double a, double b, double u,
                                   const std::function<double(double)>& transform,
                                   const EntropyGrid& grid = {});

/// ∫₀ᵘ H_p^power([a,b], ε) dε, with H = ln N.
EntropyIntegral entropy_integral(const Pseudometric& p, double a, double b, double u,
                                 double power, const EntropyGrid& grid = {});

/// Running integral x ↦ ∫₀ˣ f(ε) dε over the grid of an EntropyIntegral.
class CumulativeIntegral {
 public:
  explicit CumulativeIntegral(const EntropyIntegral& e);
  double operator()(double x) const;
  double upper() const { return eps_.empty() ? 0.0 : eps_.back(); }

 private:
  std::vector<double> eps_, f_, cum_;
  double tail_ = 0.0;
};

/// C_r = r⁻² |ln(1 − r)| − r⁻¹.
double c_r(double r);
/// (C_r / ln 2)^{1/2} · sup_rho.
double epsilon_T_delta(double r, double sup_rho);

}  // namespace xcorr
