#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "xcorr/bounds.hpp"
#include "xcorr/estimator.hpp"
#include "xcorr/kernel.hpp"
#include "xcorr/signal.hpp"

namespace xcorr {

/// Failure inside one replication; the message carries the index.
class ReplicationError : public std::runtime_error {
 public:
  ReplicationError(std::size_t index, const std::string& what)
      : std::runtime_error("replication " + std::to_string(index) + ": " + what), index_(index) {}
  std::size_t index() const { return index_; }

 private:
  std::size_t index_;
};

struct ExperimentConfig {
  Kernel h = make_sinc();
  KernelFamily g_family = triangular_family(1.0);
  double T = 500.0;
  double delta = 100.0;
  double dt = 0.01;
  std::vector<double> tau_grid{0.0, 0.5, 1.0};
  std::size_t replications = 500;
  NoiseSeed base_seed{};
  double a = 0.0;
  double b = 1.0;
  SimulationOptions simulation{};
  RiemannRule rule = RiemannRule::left;
  /// Draws of the limit process Z (and of Y) on the lattice, for the
  /// corollary bounds; 0 disables.
  std::size_t limit_samples = 0;
  /// Keep the first replication's Y and X paths.
  bool keep_first_paths = false;

  double c() const { return g_family.c; }
  /// Throws InvalidInput / InvalidParameter on inconsistent settings.
  void validate() const;
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  bool degenerate = false;  // variance0 = 0 threshold test
};

struct MonteCarloResult {
  std::vector<double> lattice;       // dt lattice over [a, b]
  std::vector<double> tau_grid;      // snapped requested lags
  std::vector<std::size_t> tau_index;  // positions of tau_grid in the lattice
  std::vector<double> h_mean;        // E Ĥ on the lattice
  Eigen::MatrixXd z;                 // replications × lattice
  std::vector<double> mean;          // per tau_grid entry
  std::vector<double> variance;
  std::vector<double> variance_se;   // jackknife
  Eigen::MatrixXd empirical_cov;     // tau_grid × tau_grid
  Eigen::MatrixXd cov_se;            // jackknife
  std::vector<double> limit_variance;  // C_∞(τ, τ)
  std::vector<KsResult> ks;
  std::vector<double> sup_abs;       // per replication, max over the lattice of |Ẑ|
  std::vector<double> limit_sup_abs; // max |Z| per limit draw
  std::vector<double> y_sup_abs;     // max |Y| per stationary draw
  std::vector<double> y_sup;         // max Y per stationary draw
  double lattice_spacing = 0.0;
  std::optional<std::pair<SampledPath, SampledPath>> first_paths;
};

/// Runs the replications on `workers` threads. Output is identical for any
/// worker count: replication r always uses stream base + r and statistics are
/// accumulated in replication order.
MonteCarloResult run_replications(const ExperimentConfig& cfg, std::size_t workers = 1);

/// One-sample Kolmogorov-Smirnov test against N(0, variance0). For
/// variance0 = 0 the test passes iff max|x| ≤ zero_tol.
KsResult normality_test(std::span<const double> samples, double variance0, double zero_tol = 1e-9);

/// Asymptotic Kolmogorov survival function Q(λ) = 2 Σ (−1)^{k−1} e^{−2k²λ²}, 100 terms.
double kolmogorov_survival(double lambda);

/// Draws M realisations of a centred Gaussian vector with covariance C using
/// the symmetric square root (negative eigenvalues down to −floor clipped).
Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& C, std::size_t M, NoiseSeed seed,
                                double floor = 1e-8);

/// Exact draws of the limit process Z on tau_grid (rows are draws).
Eigen::MatrixXd sample_limit_Z(const Kernel& h, std::span<const double> tau_grid, std::size_t M,
                               NoiseSeed seed);

/// Exact draws of the stationary output Y on tau_grid.
Eigen::MatrixXd sample_output_Y(const Kernel& h, std::span<const double> tau_grid, std::size_t M,
                                NoiseSeed seed);

/// Empirical P{sample ≥ x}.
double empirical_tail(std::span<const double> samples, double x);

struct CoverageRow {
  std::string method;
  double x = 0.0;
  double empirical = 0.0;
  double se = 0.0;
  double bound = 0.0;
  bool valid = false;  // empirical ≤ bound + 3 se
};

/// Compares each bound with the matching empirical tail: theorem 3 against
/// |Ẑ(τ)| at constants["tau"], theorem 4 against sup|Ẑ|, the corollaries
/// against sup|Z| from the limit sampler (sup|Ẑ| when no limit draws exist).
std::vector<CoverageRow> ci_coverage(const MonteCarloResult& result,
                                     std::span<const TailBoundReport> bounds);

struct ModulusRow {
  double h = 0.0;
  double delta = 0.0;
  double probability = 0.0;
  double se = 0.0;
};

/// Empirical P{sup_{|τ₂−τ₁|<h} |Ẑ(τ₂) − Ẑ(τ₁)| > δ} on the lattice.
std::vector<ModulusRow> modulus_of_continuity(const MonteCarloResult& result,
                                              std::span<const double> h_ladder,
                                              std::span<const double> delta_thresholds);

/// Writes ensemble.csv, covariance.csv, sup_tail.csv and summary.json into dir;
/// returns the file names written.
std::vector<std::string> write_results(const MonteCarloResult& r, const ExperimentConfig& cfg,
                                       const std::filesystem::path& dir);

/// Long-format path file: replication,label,t,value.
void write_paths_long(const MonteCarloResult& r, const std::filesystem::path& file);

}  // namespace xcorr
