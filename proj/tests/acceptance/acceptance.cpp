// Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "cli.hpp"
#include "xcorr/bounds.hpp"
#include "xcorr/estimator.hpp"
#include "xcorr/montecarlo.hpp"
#include "xcorr/spectral.hpp"

using namespace xcorr;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, double budget_s, const std::function<Outcome()>& body) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const bool in_time = secs < budget_s;
  const bool ok = o.pass && in_time;
  if (!ok) ++failures;
  std::printf("%s criterion %d (%s): %s; %.1f s of %.0f s budget%s\n", ok ? "PASS" : "FAIL", id, title,
              o.detail.c_str(), secs, budget_s, in_time ? "" : " (over budget)");
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

ExperimentConfig reference_setup(const Kernel& h, std::size_t M, std::uint64_t seed) {
  ExperimentConfig c;
  c.h = h;
  c.g_family = triangular_family(1.0);
  c.T = 500.0;
  c.delta = 100.0;
  c.dt = 0.01;
  c.tau_grid = {0.0, 0.5, 1.0};
  c.replications = M;
  c.base_seed = {seed, 0};
  c.a = 0.0;
  c.b = 1.0;
  return c;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

}  // namespace

int main() {
  std::setvbuf(stdout, nullptr, _IONBF, 0);
  double c5_seconds = 0.0;

  criterion(1, "closed-form limit covariance", 10.0, [] {
    std::vector<double> grid;
    for (int i = 0; i < 9; ++i) grid.push_back(0.25 * i);
    const auto S = cov_limit_matrix(make_sinc(), grid);
    const auto H = cov_limit_matrix(make_hilbert_sinc(), grid);
    double es = 0.0, eh = 0.0;
    for (int i = 0; i < 9; ++i)
      for (int j = 0; j < 9; ++j) {
        es = std::max(es, std::abs(S(i, j) - (sinc(grid[i] - grid[j]) + sinc(grid[i] + grid[j]))));
        eh = std::max(eh, std::abs(H(i, j) - (sinc(grid[i] - grid[j]) - sinc(grid[i] + grid[j]))));
      }
    const double h00 = std::abs(cov_limit(make_hilbert_sinc(), 0.0, 0.0));
    return Outcome{es < 1e-8 && eh < 1e-8 && h00 < 1e-8,
                   "max error sinc " + num(es) + ", hilbert-sinc " + num(eh) + ", |C(0,0)| " + num(h00)};
  });

  criterion(2, "Fejer normalisation", 5.0, [] {
    double worst = 0.0;
    for (double T : {1.0, 10.0, 100.0, 1000.0}) worst = std::max(worst, std::abs(fejer_integral(T) - 1.0));
    return Outcome{worst < 1e-6, "max |integral - 1| " + num(worst)};
  });

  criterion(3, "exact pseudometric below the Lipschitz surrogate", 300.0, [] {
    std::mt19937_64 rng(20240917);
    auto unit = [&rng] { return static_cast<double>(rng() >> 11) * 0x1.0p-53; };
    const auto h = make_sinc();
    std::size_t violations = 0;
    double worst = 0.0, w1 = 0.0, w2 = 0.0;
    for (auto [T, delta] : {std::pair{50.0, 10.0}, std::pair{500.0, 100.0}}) {
      const CovarianceModel m{h, make_triangular(delta, 1.0), 1.0, {}};
      for (int k = 0; k < 50; ++k) {
        const double t1 = unit(), t2 = unit();
        const double ex = rho_exact(m, T, t1, t2);
        const double up = rho_upper(h, 1.0, 1.0, t1, t2);
        if (ex > up + 1e-9) ++violations;
        if (up > 0.0 && ex / up > worst) {
          worst = ex / up;
          w1 = t1;
          w2 = t2;
        }
      }
    }
    return Outcome{violations == 0, std::to_string(violations) + " violations in 100 pairs, worst ratio " +
                                        num(worst) + " at (" + num(w1) + ", " + num(w2) + ")"};
  });

  criterion(4, "majorisation of limit increments", 30.0, [] {
    std::vector<std::pair<double, double>> pairs;
    for (int i = 0; i < 7 && pairs.size() < 20; ++i)
      for (int j = i + 1; j < 7 && pairs.size() < 20; ++j) pairs.emplace_back(0.3 * i, 0.3 * j + 0.05);
    double worst_a = -1e300, worst_b = -1e300;
    for (const auto& h : {make_sinc(), make_hilbert_sinc()})
      for (auto [t1, t2] : pairs) {
        const double dz2 = cov_limit(h, t1, t1) + cov_limit(h, t2, t2) - 2.0 * cov_limit(h, t1, t2);
        worst_a = std::max(worst_a, dz2 - 4.0 / pi * sigma_squared(h, t2 - t1));
        worst_b = std::max(worst_b, dz2 - 2.0 * msq_increment_Y(h, t1, t2));
      }
    return Outcome{worst_a <= 1e-8 && worst_b <= 1e-8,
                   std::to_string(pairs.size()) + " pairs x 2 kernels, max excess " + num(worst_a) + " / " +
                       num(worst_b)};
  });

  criterion(5, "empirical covariance matches the finite-(T,Delta) truth", 900.0, [&c5_seconds] {
    const auto t0 = std::chrono::steady_clock::now();
    const auto cfg = reference_setup(make_sinc(), 500, 500);
    const auto r = run_replications(cfg);
    const CovarianceModel m{cfg.h, make_triangular(cfg.delta, 1.0), 1.0, {}};
    const auto C = cov_finite_matrix(m, cfg.T, r.tau_grid);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = i; j < 3; ++j) worst = std::max(worst, std::abs(r.empirical_cov(i, j) - C(i, j)) / r.cov_se(i, j));
    c5_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return Outcome{worst <= 3.0, "max |empirical - cov_finite| / se = " + num(worst) + " over 6 entries"};
  });

  criterion(6, "finite-dimensional CLT", 1200.0, [] {
    const auto r = run_replications(reference_setup(make_sinc(), 500, 600));
    const auto o = run_replications(reference_setup(make_hilbert_sinc(), 500, 601));
    const bool ok = r.ks[0].p_value > 0.01 && r.ks[1].p_value > 0.01 && r.variance[0] >= 1.7 &&
                    r.variance[0] <= 2.3 && o.variance[0] < 0.15;
    return Outcome{ok, "KS p " + num(r.ks[0].p_value) + " / " + num(r.ks[1].p_value) + ", Var Z(0) " +
                           num(r.variance[0]) + ", odd-kernel Var Z(0) " + num(o.variance[0])};
  });

  criterion(7, "bias decays along the Delta ladder", 60.0, [] {
    const auto h = make_sinc();
    std::string detail;
    bool ok = true;
    for (const auto& fam : {triangular_family(1.0), laplace_family(1.0)}) {
      std::vector<double> sups;
      for (double delta : {5.0, 50.0, 500.0}) {
        const auto g = fam(delta);
        double s = 0.0;
        for (int i = 0; i <= 20; ++i) {
          const double tau = 0.1 * i;
          s = std::max(s, std::abs(theoretical_bias(h, g, fam.c, tau) - h(tau)));
        }
        sups.push_back(s);
      }
      ok = ok && sups[1] < sups[0] && sups[2] < sups[1];
      if (!detail.empty()) detail += "; ";
      detail += fam.family_name + " " + num(sups[0]) + " > " + num(sups[1]) + " > " + num(sups[2]);
    }
    return Outcome{ok, detail};
  });

  criterion(8, "bounds dominate the empirical tails", 1800.0, [] {
    auto cfg = reference_setup(make_sinc(), 1000, 800);
    cfg.limit_samples = 10000;
    const auto r = run_replications(cfg);
    const CovarianceModel m{cfg.h, make_triangular(cfg.delta, 1.0), 1.0, {}};

    const double u = two_k_inverse(0.1);
    const auto var = cov_finite_diagonal(m, cfg.T, r.tau_grid);
    double worst_rate = 0.0;
    for (std::size_t i = 0; i < r.tau_grid.size(); ++i) {
      const double hw = u * std::sqrt(var[i]);  // on the √T scale of Ẑ
      std::size_t hits = 0;
      for (Eigen::Index k = 0; k < r.z.rows(); ++k) hits += std::abs(r.z(k, r.tau_index[i])) >= hw;
      worst_rate = std::max(worst_rate, static_cast<double>(hits) / static_cast<double>(r.z.rows()));
    }

    std::vector<TailBoundReport> reports;
    const auto k4 = theorem4_constants(m, cfg.T, cfg.a, cfg.b);
    reports.push_back(theorem4_report(k4, std::vector<double>{1.5 * k4.A_TDelta, 2.0 * k4.A_TDelta, 3.0 * k4.A_TDelta}));
    auto strict = [](std::vector<double> v) {
      return [v](double x) {
        return static_cast<double>(std::count_if(v.begin(), v.end(), [x](double s) { return s > x; })) /
               static_cast<double>(v.size());
      };
    };
    const std::vector<double> xs{4.0, 6.0, 8.0};
    reports.push_back(corollary1_report(cfg.h, cfg.a, cfg.b, 0.5, xs, strict(r.y_sup)));
    reports.push_back(corollary2_report(cfg.h, cfg.a, cfg.b, xs, strict(r.y_sup_abs)));
    const auto rows = ci_coverage(r, reports);
    std::size_t invalid = 0;
    double min_margin = 1e300;
    for (const auto& row : rows) {
      if (!row.valid) ++invalid;
      min_margin = std::min(min_margin, row.bound - row.empirical + 3.0 * row.se);
    }
    const bool ok = worst_rate <= 0.10 && invalid == 0;
    return Outcome{ok, "pointwise violation rate " + num(worst_rate) + ", A = " + num(k4.A_TDelta) + ", " +
                           std::to_string(rows.size() - invalid) + "/" + std::to_string(rows.size()) +
                           " tail checks valid, min margin " + num(min_margin)};
  });

  criterion(9, "exact limit sampler", 10.0, [] {
    const std::vector<double> g{0.0, 0.5, 1.0};
    const auto Z = sample_limit_Z(make_sinc(), g, 10000, {900, 0});
    const Eigen::MatrixXd c = Z.rowwise() - Z.colwise().mean();
    const Eigen::MatrixXd S = c.transpose() * c / double(Z.rows() - 1);
    double worst = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        const double target = sinc(g[i] - g[j]) + sinc(g[i] + g[j]);
        const double tii = 1.0 + sinc(2.0 * g[i]), tjj = 1.0 + sinc(2.0 * g[j]);
        const double scale = std::max(std::abs(target), std::sqrt(tii * tjj));
        worst = std::max(worst, std::abs(S(i, j) - target) / scale);
      }
    return Outcome{worst <= 0.05, "max relative covariance error " + num(worst)};
  });

  criterion(10, "montecarlo output independent of workers", std::max(2.0 * c5_seconds, 60.0), [] {
    const auto root = fs::temp_directory_path() / "xcorr_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    const auto cfg = root / "mc.json";
    std::ofstream(cfg) << R"({
  "command_defaults": {"seed": 500, "dt": 0.01, "T": 500, "c": 1},
  "montecarlo": {"h": "sinc", "family": "triangular", "delta": 100, "tau_grid": [0, 0.5, 1],
                 "interval": [0, 1], "replications": 500, "h_ladder": [0.5, 0.25, 0.125],
                 "delta_thresholds": [0.5, 1.0]}
})";
    auto run = [&](const char* workers, const fs::path& out) {
      std::vector<std::string> args{"xcorr", "montecarlo", "--config", cfg.string(), "--out", out.string(),
                                    "--workers", workers, "--emit-paths"};
      std::vector<char*> argv;
      for (auto& a : args) argv.push_back(a.data());
      return cli::run(static_cast<int>(argv.size()), argv.data());
    };
    if (run("1", root / "w1") != 0 || run("4", root / "w4") != 0) return Outcome{false, "command failed"};
    const auto m1 = cli::read_manifest(root / "w1" / "manifest.json");
    const auto m4 = cli::read_manifest(root / "w4" / "manifest.json");
    std::size_t same = 0;
    for (const auto& name : m1.outputs) same += slurp(root / "w1" / name) == slurp(root / "w4" / name);
    const bool ok = same == m1.outputs.size() && m1.outputs == m4.outputs && m1.config_digest == m4.config_digest;
    return Outcome{ok, std::to_string(same) + "/" + std::to_string(m1.outputs.size()) +
                           " output files byte-identical, manifest digests equal"};
  });

  std::printf("%d of 10 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
