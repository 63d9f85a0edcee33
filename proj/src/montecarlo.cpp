#include "xcorr/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numbers>
#include <thread>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "format.hpp"
#include "xcorr/errors.hpp"
#include "xcorr/spectral.hpp"

namespace xcorr {

using detail::format_double;

void ExperimentConfig::validate() const {
  if (!(T > 0.0) || !std::isfinite(T)) throw InvalidParameter("T must be positive");
  if (!(delta > 0.0) || !std::isfinite(delta)) throw InvalidParameter("delta must be positive");
  if (!(dt > 0.0) || !std::isfinite(dt)) throw InvalidParameter("dt must be positive");
  if (!(c() > 0.0)) throw InvalidParameter("c must be positive");
  if (replications < 2) throw InvalidParameter("at least two replications are required");
  if (!(a <= b)) throw InvalidInput("interval [a, b] is empty");
  if (tau_grid.empty()) throw InvalidInput("tau grid is empty");
  const double r = T / dt;
  if (std::abs(r - std::round(r)) > 1e-6 * std::max(1.0, r))
    throw InvalidInput("T is not a multiple of dt");
  for (double t : tau_grid) {
    const double s = std::round(t / dt) * dt;
    if (s < a - 1e-9 * dt || s > b + 1e-9 * dt)
      throw InvalidInput("tau " + format_double(t) + " lies outside [a, b]");
  }
}

namespace {

std::vector<double> make_lattice(double a, double b, double dt) {
  const long k0 = static_cast<long>(std::ceil(a / dt - 1e-9));
  const long k1 = static_cast<long>(std::floor(b / dt + 1e-9));
  std::vector<double> out;
  for (long k = k0; k <= k1; ++k) out.push_back(static_cast<double>(k) * dt);
  return out;
}

// Jackknife standard error of the sample covariance of (x, y).
double jackknife_cov_se(const Eigen::Ref<const Eigen::VectorXd>& x,
                        const Eigen::Ref<const Eigen::VectorXd>& y) {
  const auto n = static_cast<double>(x.size());
  if (x.size() < 3) return 0.0;
  const double sx = x.sum(), sy = y.sum(), sxy = x.dot(y);
  std::vector<double> loo(x.size());
  double mean = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double ax = sx - x[i], ay = sy - y[i], axy = sxy - x[i] * y[i];
    loo[i] = (axy - ax * ay / (n - 1.0)) / (n - 2.0);
    mean += loo[i];
  }
  mean /= n;
  double ss = 0.0;
  for (double v : loo) ss += (v - mean) * (v - mean);
  return std::sqrt((n - 1.0) / n * ss);
}

double sample_cov(const Eigen::Ref<const Eigen::VectorXd>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  const auto n = static_cast<double>(x.size());
  const double mx = x.mean(), my = y.mean();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) acc += (x[i] - mx) * (y[i] - my);
  return acc / (n - 1.0);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

std::vector<double> row_sup(const Eigen::MatrixXd& m, bool absolute) {
  std::vector<double> out(static_cast<std::size_t>(m.rows()));
  for (Eigen::Index r = 0; r < m.rows(); ++r)
    out[r] = absolute ? m.row(r).cwiseAbs().maxCoeff() : m.row(r).maxCoeff();
  return out;
}

}  // namespace

double kolmogorov_survival(double lambda) {
  if (!(lambda > 0.1)) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * lambda * lambda);
    s += (k % 2 == 1) ? term : -term;
  }
  return std::clamp(2.0 * s, 0.0, 1.0);
}

KsResult normality_test(std::span<const double> samples, double variance0, double zero_tol) {
  if (samples.empty()) throw InvalidInput("no samples");
  if (variance0 < 0.0 || !std::isfinite(variance0)) throw InvalidParameter("variance must be nonnegative");
  KsResult r;
  if (variance0 == 0.0) {
    r.degenerate = true;
    for (double x : samples) r.statistic = std::max(r.statistic, std::abs(x));
    r.p_value = r.statistic <= zero_tol ? 1.0 : 0.0;
    return r;
  }
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  const double sd = std::sqrt(variance0);
  const auto n = static_cast<double>(s.size());
  double D = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const double F = normal_cdf(s[i] / sd);
    D = std::max({D, (static_cast<double>(i) + 1.0) / n - F, F - static_cast<double>(i) / n});
  }
  r.statistic = D;
  r.p_value = kolmogorov_survival(std::sqrt(n) * D);
  return r;
}

Eigen::MatrixXd sample_gaussian(const Eigen::MatrixXd& C, std::size_t M, NoiseSeed seed, double floor) {
  if (C.rows() != C.cols()) throw InvalidInput("covariance must be square");
  const Eigen::MatrixXd S = 0.5 * (C + C.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  if (es.info() != Eigen::Success) throw NumericalConsistencyError("eigen decomposition failed");
  const Eigen::VectorXd ev = es.eigenvalues();
  const double scale = std::max(1.0, ev.cwiseAbs().maxCoeff());
  if (ev.minCoeff() < -floor * scale)
    throw NumericalConsistencyError("covariance is not positive semidefinite: eigenvalue " +
                                    format_double(ev.minCoeff()));
  const Eigen::MatrixXd root =
      es.eigenvectors() * ev.cwiseMax(0.0).cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
  const auto L = static_cast<std::size_t>(C.rows());
  const auto xi = standard_normals(seed, L * M);
  const Eigen::Map<const Eigen::MatrixXd> Xi(xi.data(), static_cast<Eigen::Index>(L),
                                             static_cast<Eigen::Index>(M));
  return (root * Xi).transpose();
}

Eigen::MatrixXd sample_limit_Z(const Kernel& h, std::span<const double> tau_grid, std::size_t M,
                               NoiseSeed seed) {
  return sample_gaussian(cov_limit_matrix(h, tau_grid), M, seed);
}

Eigen::MatrixXd sample_output_Y(const Kernel& h, std::span<const double> tau_grid, std::size_t M,
                                NoiseSeed seed) {
  const auto L = static_cast<Eigen::Index>(tau_grid.size());
  // Stationary: the Gram matrix only depends on the lag index on a uniform grid.
  Eigen::MatrixXd C(L, L);
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = i; j < L; ++j) C(i, j) = C(j, i) = covariance_Y(h, tau_grid[j] - tau_grid[i]);
  return sample_gaussian(C, M, seed);
}

MonteCarloResult run_replications(const ExperimentConfig& cfg, std::size_t workers) {
  cfg.validate();
  if (workers == 0) workers = 1;
  const double dt = cfg.dt;
  const Kernel g = cfg.g_family(cfg.delta);
  const double c = cfg.c();

  MonteCarloResult res;
  res.lattice = make_lattice(cfg.a, cfg.b, dt);
  if (res.lattice.empty()) throw InvalidInput("no lattice point in [a, b]");
  res.lattice_spacing = dt;
  res.tau_grid = snap_to_lattice(cfg.tau_grid, dt);
  const long k0 = std::lround(res.lattice.front() / dt);
  for (double t : res.tau_grid) res.tau_index.push_back(static_cast<std::size_t>(std::lround(t / dt) - k0));
  for (double t : res.lattice) res.h_mean.push_back(theoretical_bias(cfg.h, g, c, t));

  const auto [lo, hi] = required_span(cfg.T, res.lattice, dt);
  TimeGrid grid;
  grid.t_start = std::round(lo / dt) * dt;
  grid.dt = dt;
  grid.n = static_cast<std::size_t>(std::lround((hi - lo) / dt)) + 2;

  const auto M = cfg.replications;
  const auto L = res.lattice.size();
  res.z.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(L));
  const double sqrtT = std::sqrt(cfg.T);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::mutex err_mu;
  std::size_t err_index = M;
  std::string err_what;

  auto work = [&] {
    for (;;) {
      const std::size_t r = next.fetch_add(1);
      if (r >= M || failed.load()) return;
      try {
        const NoiseSeed seed{cfg.base_seed.seed, cfg.base_seed.stream_id + r};
        auto paths = simulate_pair(cfg.h, g, grid, seed, cfg.simulation);
        const auto hh = cross_correlogram(paths.first, paths.second, c, cfg.T, res.lattice, cfg.rule);
        for (std::size_t i = 0; i < L; ++i)
          res.z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(i)) = sqrtT * (hh[i] - res.h_mean[i]);
        if (r == 0 && cfg.keep_first_paths) res.first_paths = std::move(paths);
      } catch (const std::exception& e) {
        std::lock_guard lock(err_mu);
        if (r < err_index) {
          err_index = r;
          err_what = e.what();
        }
        failed.store(true);
      }
    }
  };

  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (failed.load()) throw ReplicationError(err_index, err_what);

  const auto K = res.tau_grid.size();
  res.empirical_cov.resize(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(K));
  res.cov_se.resizeLike(res.empirical_cov);
  for (std::size_t i = 0; i < K; ++i) {
    const auto ci = res.z.col(static_cast<Eigen::Index>(res.tau_index[i]));
    for (std::size_t j = i; j < K; ++j) {
      const auto cj = res.z.col(static_cast<Eigen::Index>(res.tau_index[j]));
      const auto I = static_cast<Eigen::Index>(i), J = static_cast<Eigen::Index>(j);
      res.empirical_cov(I, J) = res.empirical_cov(J, I) = sample_cov(ci, cj);
      res.cov_se(I, J) = res.cov_se(J, I) = jackknife_cov_se(ci, cj);
    }
    res.mean.push_back(ci.mean());
    res.variance.push_back(res.empirical_cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    res.variance_se.push_back(res.cov_se(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)));
    const double v0 = std::max(0.0, cov_limit(cfg.h, res.tau_grid[i], res.tau_grid[i]));
    res.limit_variance.push_back(v0);
    std::vector<double> col(ci.data(), ci.data() + ci.size());
    res.ks.push_back(normality_test(col, v0));
  }
  res.sup_abs = row_sup(res.z, true);

  if (cfg.limit_samples > 0) {
    const NoiseSeed zs{cfg.base_seed.seed ^ 0x5a5a5a5a5a5a5a5aULL, cfg.base_seed.stream_id};
    res.limit_sup_abs = row_sup(sample_limit_Z(cfg.h, res.lattice, cfg.limit_samples, zs), true);
    const NoiseSeed ys{cfg.base_seed.seed ^ 0xa5a5a5a5a5a5a5a5ULL, cfg.base_seed.stream_id};
    const auto Yd = sample_output_Y(cfg.h, res.lattice, cfg.limit_samples, ys);
    res.y_sup_abs = row_sup(Yd, true);
    res.y_sup = row_sup(Yd, false);
  }
  return res;
}

double empirical_tail(std::span<const double> samples, double x) {
  if (samples.empty()) throw InvalidInput("no samples");
  const auto hits = std::count_if(samples.begin(), samples.end(), [x](double s) { return s >= x; });
  return static_cast<double>(hits) / static_cast<double>(samples.size());
}

std::vector<CoverageRow> ci_coverage(const MonteCarloResult& result,
                                     std::span<const TailBoundReport> bounds) {
  std::vector<CoverageRow> rows;
  for (const auto& rep : bounds) {
    std::vector<double> samples;
    switch (rep.method) {
      case BoundMethod::theorem3_pointwise: {
        const auto it = rep.constants.find("tau");
        if (it == rep.constants.end()) throw InvalidInput("pointwise bound has no tau");
        const long k = std::lround((it->second - result.lattice.front()) / result.lattice_spacing);
        if (k < 0 || k >= static_cast<long>(result.lattice.size()))
          throw InvalidInput("tau " + format_double(it->second) + " is off the simulated lattice");
        const auto col = result.z.col(k);
        for (Eigen::Index r = 0; r < col.size(); ++r) samples.push_back(std::abs(col[r]));
        break;
      }
      case BoundMethod::theorem4_sup:
        samples = result.sup_abs;
        break;
      case BoundMethod::corollary1:
      case BoundMethod::corollary2:
        samples = result.limit_sup_abs.empty() ? result.sup_abs : result.limit_sup_abs;
        break;
    }
    const auto n = static_cast<double>(samples.size());
    for (std::size_t i = 0; i < rep.x_values.size(); ++i) {
      CoverageRow row;
      row.method = to_string(rep.method);
      row.x = rep.x_values[i];
      row.bound = rep.bound_values[i];
      row.empirical = empirical_tail(samples, row.x);
      row.se = std::sqrt(row.empirical * (1.0 - row.empirical) / n);
      row.valid = row.empirical <= row.bound + 3.0 * row.se;
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<ModulusRow> modulus_of_continuity(const MonteCarloResult& result,
                                              std::span<const double> h_ladder,
                                              std::span<const double> delta_thresholds) {
  if (h_ladder.empty() || delta_thresholds.empty()) throw InvalidInput("empty h ladder or threshold list");
  const double spacing = result.lattice_spacing;
  for (double h : h_ladder)
    if (!(h > 0.0) || spacing > h / 4.0)
      throw InvalidInput("lattice spacing " + format_double(spacing) + " exceeds h/4 for h = " +
                         format_double(h));
  const auto M = result.z.rows();
  const auto L = result.z.cols();
  std::vector<ModulusRow> rows;
  for (double h : h_ladder) {
    // Largest index offset k with k·spacing < h.
    long kmax = static_cast<long>(std::ceil(h / spacing - 1e-9)) - 1;
    kmax = std::min<long>(kmax, L - 1);
    std::vector<double> osc(static_cast<std::size_t>(M), 0.0);
    for (Eigen::Index r = 0; r < M; ++r) {
      double m = 0.0;
      for (long k = 1; k <= kmax; ++k)
        for (Eigen::Index j = 0; j + k < L; ++j) m = std::max(m, std::abs(result.z(r, j + k) - result.z(r, j)));
      osc[r] = m;
    }
    for (double d : delta_thresholds) {
      ModulusRow row;
      row.h = h;
      row.delta = d;
      const auto hits = std::count_if(osc.begin(), osc.end(), [d](double v) { return v > d; });
      row.probability = static_cast<double>(hits) / static_cast<double>(M);
      row.se = std::sqrt(row.probability * (1.0 - row.probability) / static_cast<double>(M));
      rows.push_back(row);
    }
  }
  return rows;
}

std::vector<std::string> write_results(const MonteCarloResult& r, const ExperimentConfig& cfg,
                                       const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name);
    if (!f) throw InvalidInput("cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open("ensemble.csv");
    f << "tau,mean,variance,variance_se,limit_variance,ks_statistic,ks_p_value\n";
    for (std::size_t i = 0; i < r.tau_grid.size(); ++i)
      f << format_double(r.tau_grid[i]) << ',' << format_double(r.mean[i]) << ','
        << format_double(r.variance[i]) << ',' << format_double(r.variance_se[i]) << ','
        << format_double(r.limit_variance[i]) << ',' << format_double(r.ks[i].statistic) << ','
        << format_double(r.ks[i].p_value) << '\n';
  }
  {
    auto f = open("covariance.csv");
    f << "tau1,tau2,empirical,se\n";
    for (Eigen::Index i = 0; i < r.empirical_cov.rows(); ++i)
      for (Eigen::Index j = 0; j < r.empirical_cov.cols(); ++j)
        f << format_double(r.tau_grid[i]) << ',' << format_double(r.tau_grid[j]) << ','
          << format_double(r.empirical_cov(i, j)) << ',' << format_double(r.cov_se(i, j)) << '\n';
  }
  {
    auto f = open("sup_tail.csv");
    f << "x,survival,lattice_spacing\n";
    std::vector<double> s = r.sup_abs;
    std::sort(s.begin(), s.end());
    const auto n = static_cast<double>(s.size());
    for (std::size_t i = 0; i < s.size(); ++i)
      f << format_double(s[i]) << ',' << format_double((n - static_cast<double>(i)) / n) << ','
        << format_double(r.lattice_spacing) << '\n';
  }
  {
    nlohmann::ordered_json j;
    j["T"] = cfg.T;
    j["delta"] = cfg.delta;
    j["c"] = cfg.c();
    j["dt"] = cfg.dt;
    j["replications"] = cfg.replications;
    j["seed"] = cfg.base_seed.seed;
    j["stream_id"] = cfg.base_seed.stream_id;
    j["interval"] = {cfg.a, cfg.b};
    j["kernel"] = cfg.h.name();
    j["g_family"] = cfg.g_family.family_name;
    j["truncation_radius"] = cfg.simulation.truncation_radius;
    j["lattice_points"] = r.lattice.size();
    j["limit_samples"] = cfg.limit_samples;
    auto f = open("summary.json");
    f << j.dump(2) << '\n';
  }
  return {"ensemble.csv", "covariance.csv", "sup_tail.csv", "summary.json"};
}

void write_paths_long(const MonteCarloResult& r, const std::filesystem::path& file) {
  if (!r.first_paths) throw PreconditionError("no paths were kept");
  std::ofstream f(file);
  if (!f) throw InvalidInput("cannot write " + file.string());
  f << "replication,label,t,value\n";
  for (const SampledPath* p : {&r.first_paths->first, &r.first_paths->second})
    for (std::size_t j = 0; j < p->values.size(); ++j)
      f << "0," << p->label << ',' << format_double(p->grid.time(j)) << ','
        << format_double(p->values[j]) << '\n';
}

}  // namespace xcorr
