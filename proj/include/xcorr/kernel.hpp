#pragma once

#include <complex>
#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xcorr {

enum class Parity { even, odd, none };

std::string to_string(Parity p);

/// Default L2 tail-mass tolerance used to size time and frequency truncations.
inline constexpr double kDefaultTailTolerance = 1e-10;

/// A real-valued L2 impulse-response component together with its
/// Fourier-Plancherel transform  k*(λ) = ∫ e^{-iλt} k(t) dt.
///
/// Kernels are immutable and cheap to copy; copies share one model.
class Kernel {
 public:
  /// Evaluation backend. Built-ins implement closed forms; tabulated kernels
  /// interpolate samples.
  class Model {
   public:
    virtual ~Model() = default;
    virtual double value(double t) const = 0;
    virtual std::complex<double> transform(double lambda) const = 0;
  };

  struct Traits {
    std::string name;
    Parity parity = Parity::none;
    double l2_norm = 0.0;
    /// R such that the L2 mass of k outside [-R, R] is below the tail tolerance.
    double effective_support = 0.0;
    /// When set, k* vanishes outside [-B, B].
    std::optional<double> band_limit;
    /// Frequencies where k* is discontinuous (quadrature break points).
    std::vector<double> spectral_breakpoints;
    /// L such that the mass of |k*|² outside [-L, L] is below the tail tolerance.
    double spectral_extent = 0.0;
  };

  Kernel(std::shared_ptr<const Model> model, Traits traits);

  double operator()(double t) const { return model_->value(t); }
  std::complex<double> transform(double lambda) const { return model_->transform(lambda); }

  const std::string& name() const { return traits_->name; }
  Parity parity() const { return traits_->parity; }
  double l2_norm() const { return traits_->l2_norm; }
  double effective_support() const { return traits_->effective_support; }
  std::optional<double> band_limit() const { return traits_->band_limit; }
  std::span<const double> spectral_breakpoints() const { return traits_->spectral_breakpoints; }
  double spectral_extent() const { return traits_->spectral_extent; }

 private:
  std::shared_ptr<const Model> model_;
  std::shared_ptr<const Traits> traits_;
};

/// g_Δ(t) = cΔ(1 − Δ|t|) on |t| ≤ 1/Δ (scaled Bartlett window).
Kernel make_triangular(double delta, double c);
/// g_Δ(t) = (cΔ/2) e^{−Δ|t|}.
Kernel make_laplace(double delta, double c);
/// H(t) = sin(πt)/(πt), the ideal low-pass filter with H* = 1 on [−π, π].
Kernel make_sinc();
/// H(t) = (1 − cos πt)/(πt), with H*(λ) = i·sign(λ) on [−π, π].
Kernel make_hilbert_sinc();
/// g_Δ(t) = cΔ on [0, 1/Δ]. Not even; exists to exercise the symmetry check.
Kernel make_one_sided_box(double delta, double c);

/// Kernel given by samples on a uniform grid: linear interpolation inside the
/// grid, zero outside. The transform is the exact transform of that
/// interpolant, with the periodic sample sum taken from a zero-padded FFT and
/// interpolated linearly between bins (error O(spacing²)).
Kernel make_tabulated(std::span<const double> times, std::span<const double> values,
                      std::string name = "tabulated");

/// Two-column CSV (time,value), optional header line.
Kernel load_tabulated_csv(const std::filesystem::path& path);

/// Family (g_Δ, Δ > 0) with the limit constant c of the δ-like condition.
struct KernelFamily {
  std::string family_name;
  double c = 1.0;
  std::function<Kernel(double)> make;

  Kernel operator()(double delta) const { return make(delta); }
};

KernelFamily triangular_family(double c);
KernelFamily laplace_family(double c);
KernelFamily one_sided_box_family(double c);

/// Builds a kernel or family from a short identifier ("sinc", "hilbert_sinc",
/// "triangular", "laplace", "one_sided_box"). Throws InvalidInput for unknown names.
Kernel make_named_kernel(const std::string& kind, double delta = 1.0, double c = 1.0);
KernelFamily make_named_family(const std::string& kind, double c);

struct ConditionCheck {
  bool passed = false;
  double evidence = 0.0;  // the number the verdict was based on
  std::string detail;
};

struct ConditionReport {
  std::vector<double> deltas;
  double lambda_window = 0.0;
  double tol = 0.0;
  ConditionCheck finite_l2;          // (1a)
  ConditionCheck evenness;           // (1b)
  ConditionCheck bounded_transform;  // (1c)
  ConditionCheck delta_like;         // (1d)
  std::vector<double> l2_norms;
  std::vector<double> asymmetry;        // max |g(t) − g(−t)| per Δ
  std::vector<double> transform_sup;    // sup_λ |g*_Δ(λ)| per Δ
  std::vector<double> window_deviation; // sup_{|λ|≤a} |g*_Δ(λ) − c| per Δ
  /// sup over the sampled Δ of ‖g*_Δ‖_∞; feeds the Lipschitz-type ρ bound.
  double family_sup = 0.0;

  bool all_passed() const {
    return finite_l2.passed && evenness.passed && bounded_transform.passed && delta_like.passed;
  }
};

ConditionReport check_family_conditions(const KernelFamily& family, std::span<const double> deltas,
                                        double lambda_window, double tol);

struct WeightedSpectral {
  double value = 0.0;          // ∫_{−L}^{L} |k*|² ln^p(1+|λ|) dλ
  double doubled_value = 0.0;  // same over [−2L, 2L]
  bool converged = false;      // relative change below the tolerance
};

/// Log-weighted spectral integral used by the Hunt-type continuity conditions.
WeightedSpectral check_weighted_spectral(const Kernel& k, double exponent, double lambda_max,
                                         double rel_change_tol = 1e-3);

/// Convolution (k ∗ k)(lag) = ∫ k(lag − s) k(s) ds, evaluated as
/// (1/2π) ∫ e^{iλ·lag} (k*(λ))² dλ. For even k this equals ‖k‖² at zero lag;
/// for odd k it equals −‖k‖².
double autocorrelation(const Kernel& k, double lag);

}  // namespace xcorr
