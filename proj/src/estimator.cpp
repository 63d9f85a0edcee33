#include "xcorr/estimator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <json.hpp>

#include "format.hpp"
#include "spectral_domain.hpp"
#include "xcorr/errors.hpp"
#include "xcorr/quadrature.hpp"

namespace xcorr {

std::vector<double> snap_to_lattice(std::span<const double> tau_grid, double dt) {
  std::vector<double> out;
  out.reserve(tau_grid.size());
  for (double t : tau_grid) out.push_back(std::round(t / dt) * dt);
  return out;
}

std::pair<double, double> required_span(double T, std::span<const double> tau_grid, double dt) {
  const auto snapped = snap_to_lattice(tau_grid, dt);
  const auto [lo, hi] = std::minmax_element(snapped.begin(), snapped.end());
  return {std::min(*lo, 0.0), T + std::max(*hi, 0.0)};
}

namespace {

long lattice_index(double x, double dt, const char* what) {
  const double r = x / dt;
  const double k = std::round(r);
  if (std::abs(r - k) > 1e-6 * std::max(1.0, std::abs(k)))
    throw InvalidInput(std::string(what) + " is not a multiple of dt");
  return static_cast<long>(k);
}

}  // namespace

std::vector<double> cross_correlogram(const SampledPath& Y, const SampledPath& X, double c, double T,
                                      std::span<const double> tau_grid, RiemannRule rule) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidParameter("c must be positive");
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidParameter("T must be positive");
  if (tau_grid.empty()) throw InvalidInput("tau grid is empty");
  if (Y.grid.n != X.grid.n || Y.grid.dt != X.grid.dt || Y.grid.t_start != X.grid.t_start ||
      Y.values.size() != Y.grid.n || X.values.size() != X.grid.n)
    throw InvalidInput("Y and X must share one grid");
  const double dt = X.grid.dt;
  const long NT = lattice_index(T, dt, "T");
  const long j0 = lattice_index(-X.grid.t_start, dt, "grid origin");
  const long n = static_cast<long>(X.grid.n);

  std::vector<long> lags;
  for (double t : tau_grid) lags.push_back(static_cast<long>(std::round(t / dt)));
  const long kmin = std::min(0L, *std::min_element(lags.begin(), lags.end()));
  const long kmax = std::max(0L, *std::max_element(lags.begin(), lags.end()));
  const long last = (rule == RiemannRule::left) ? NT - 1 : NT;
  if (j0 + kmin < 0 || j0 + last + kmax > n - 1) {
    const auto [lo, hi] = required_span(T, tau_grid, dt);
    throw CoverageError("path covers [" + detail::format_double(X.grid.t_start) + ", " +
                        detail::format_double(X.grid.t_end()) + "] but the estimator needs [" +
                        detail::format_double(lo) + ", " + detail::format_double(hi) + "]");
  }

  const double scale = dt / (c * T);
  std::vector<double> out(lags.size());
  const double* x = X.values.data() + j0;
  for (std::size_t i = 0; i < lags.size(); ++i) {
    const double* y = Y.values.data() + j0 + lags[i];
    double acc = 0.0;
    for (long j = 0; j < NT; ++j) acc += y[j] * x[j];
    if (rule == RiemannRule::trapezoid) acc += 0.5 * (y[NT] * x[NT] - y[0] * x[0]);
    out[i] = scale * acc;
  }
  return out;
}

double theoretical_bias(const Kernel& h, const Kernel& g, double c, double tau) {
  if (!(c > 0.0)) throw InvalidParameter("c must be positive");
  const auto dom = detail::joint_domain({&h, &g});
  auto f = [&](double l) {
    return (std::polar(1.0, tau * l) * h.transform(l) * std::conj(g.transform(l))).real();
  };
  const quad::Tolerance tol{1e-13, 1e-12, 20000};
  const auto r = quad::adaptive(f, std::span<const double>(dom.points), tol);
  return r.value / (2.0 * std::numbers::pi * c);
}

double theoretical_bias_time_domain(const Kernel& h, const Kernel& g, double c, double tau) {
  if (!(c > 0.0)) throw InvalidParameter("c must be positive");
  const double R = g.effective_support();
  std::vector<double> pts{-R, 0.0, R};
  for (double p : {-tau, -tau - 1.0, -tau + 1.0}) {
    if (p > -R && p < R) pts.push_back(p);
  }
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  auto f = [&](double s) { return g(s) * h(s + tau); };
  const quad::Tolerance tol{1e-14, 1e-12, 20000};
  return quad::adaptive(f, std::span<const double>(pts), tol).value / c;
}

std::vector<double> centered_process(const CorrelogramEstimate& est) {
  if (est.h_hat.size() != est.h_mean.size()) throw InvalidInput("h_hat and h_mean differ in length");
  const double s = std::sqrt(est.T);
  std::vector<double> z(est.h_hat.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = s * (est.h_hat[i] - est.h_mean[i]);
  return z;
}

CorrelogramEstimate estimate(const SampledPath& Y, const SampledPath& X, const Kernel& h,
                             const Kernel& g, double c, double T, double delta,
                             std::span<const double> tau_grid, RiemannRule rule) {
  CorrelogramEstimate est;
  est.T = T;
  est.delta = delta;
  est.c = c;
  est.dt = X.grid.dt;
  est.tau_grid = snap_to_lattice(tau_grid, est.dt);
  for (std::size_t i = 0; i < tau_grid.size(); ++i)
    est.max_snap_shift = std::max(est.max_snap_shift, std::abs(tau_grid[i] - est.tau_grid[i]));
  est.h_hat = cross_correlogram(Y, X, c, T, est.tau_grid, rule);
  for (double t : est.tau_grid) est.h_mean.push_back(theoretical_bias(h, g, c, t));
  est.z_hat = centered_process(est);
  return est;
}

void write_estimate(const CorrelogramEstimate& est, const std::filesystem::path& csv,
                    const std::filesystem::path& sidecar) {
  {
    std::ofstream out(csv);
    if (!out) throw InvalidInput("cannot write " + csv.string());
    out << "tau,h_hat,h_mean,z_hat\n";
    for (std::size_t i = 0; i < est.tau_grid.size(); ++i) {
      out << detail::format_double(est.tau_grid[i]) << ',' << detail::format_double(est.h_hat[i])
          << ',' << detail::format_double(est.h_mean[i]) << ','
          << detail::format_double(est.z_hat[i]) << '\n';
    }
  }
  nlohmann::ordered_json j;
  j["T"] = est.T;
  j["delta"] = est.delta;
  j["c"] = est.c;
  j["dt"] = est.dt;
  j["seed"] = est.seed;
  j["max_snap_shift"] = est.max_snap_shift;
  std::ofstream out(sidecar);
  if (!out) throw InvalidInput("cannot write " + sidecar.string());
  out << j.dump(2) << '\n';
}

}  // namespace xcorr
