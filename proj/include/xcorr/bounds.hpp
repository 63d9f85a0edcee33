#pragma once

#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "xcorr/entropy.hpp"
#include "xcorr/kernel.hpp"
#include "xcorr/spectral.hpp"

namespace xcorr {

enum class BoundMethod { theorem3_pointwise, theorem4_sup, corollary1, corollary2 };

std::string to_string(BoundMethod m);

struct TailBoundReport {
  BoundMethod method = BoundMethod::theorem3_pointwise;
  std::vector<double> x_values;
  std::vector<double> bound_values;  // capped at 1
  std::vector<double> raw_values;    // before capping
  std::map<std::string, double> constants;
  nlohmann::ordered_json settings = nlohmann::ordered_json::object();
  bool degenerate = false;
  std::string note;
};

nlohmann::ordered_json to_json(const TailBoundReport& r);

/// K(x) = (1 + √2 x)^{1/2} e^{−x/√2}; strictly decreasing on x ≥ 0.
double k_of_x(double x);

/// u ≥ 0 with 2K(u) = tail, for tail ∈ (0, 2].
double two_k_inverse(double tail);

/// Half-width w with P{|Ĥ − EĤ| ≥ w} ≤ 1 − confidence, given var_hat = E Ẑ(τ)².
/// var_hat = 0 gives 0.
double pointwise_ci(double var_hat, double T, double confidence);

/// P{|Ẑ(τ)| ≥ x} ≤ min(1, 2K(x/√var)).
TailBoundReport theorem3_report(double var_hat, std::span<const double> x_values);

struct Extremum {
  double value = 0.0;
  double argument = 0.0;
};

/// inf over τ ∈ [a, b] of (H∗H)(2τ): grid search plus a Brent polish.
Extremum autocorrelation_infimum(const Kernel& h, double a, double b);

/// b²(τ) = (H∗H)(2τ) − inf_{[a,b]} (H∗H)(2·), clamped at 0.
double b_squared(const Kernel& h, double a, double b, double tau);
double b_function(const Kernel& h, double a, double b, double tau);
/// sup over [a, b] of b(τ).
double sup_b(const Kernel& h, double a, double b);

/// B_{[a,b]} = 16‖H‖² − 16 inf_{[a,b]} (H∗H)(2·).
double b_constant(const Kernel& h, double a, double b);

using TailFunction = std::function<double(double)>;

/// 2·P{sup|Y| > x/(2√2)} + 4 exp(−x²/B). With B ≤ 0 the second term is dropped
/// and `degenerate` set.
double corollary2_bound(const Kernel& h, double a, double b, double x, const TailFunction& y_tail,
                        bool* degenerate = nullptr);
TailBoundReport corollary2_report(const Kernel& h, double a, double b,
                                  std::span<const double> x_values, const TailFunction& y_tail);

/// 2·P{sup Y > γx/√2} + 2·P{ξ·sup_b > (1 − γ)x}.
double corollary1_bound(double x, double gamma, const TailFunction& y_onesided_tail, double sup_b);
TailBoundReport corollary1_report(const Kernel& h, double a, double b, double gamma,
                                  std::span<const double> x_values,
                                  const TailFunction& y_onesided_tail);

enum class RhoMode { surrogate, exact };

struct Theorem4Options {
  double r = 0.5;
  RhoMode mode = RhoMode::surrogate;
  /// sup_Δ ‖g*_Δ‖_∞; when unset, sup_λ |g*(λ)| of the model's g.
  std::optional<double> g_family_sup;
  /// Multiplier on the rho_upper surrogate (see kRhoUpperSafetyFactor).
  double rho_upper_factor = kRhoUpperSafetyFactor;
  int variance_points = 21;  // grid for inf E Ẑ²
  int exact_points = 33;     // lattice for the exact-ρ mode
  EntropyGrid entropy{};
};

struct Theorem4Constants {
  double C_r = 0.0;
  double sup_rho = 0.0;
  double eps_TDelta = 0.0;
  double inf_varZ = 0.0;
  double theta_star = 0.0;
  double theta_opt = 0.0;
  double entropy_term = 0.0;
  double A_TDelta = 0.0;
  double g_family_sup = 0.0;
  double rho_upper_factor = 1.0;
  bool entropy_divergent = false;
};

/// A_{T,Δ} and its intermediates. Throws DegenerateBound when Θ is empty and
/// BoundUnavailable when the entropy integral is flagged divergent.
Theorem4Constants theorem4_constants(const CovarianceModel& model, double T, double a, double b,
                                     const Theorem4Options& opts = {});
/// min(1, 2 exp(−x/A)).
double theorem4_bound(const CovarianceModel& model, double T, double a, double b, double r,
                      double x);
TailBoundReport theorem4_report(const Theorem4Constants& k, std::span<const double> x_values);

}  // namespace xcorr
