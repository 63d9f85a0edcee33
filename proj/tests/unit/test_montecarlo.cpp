#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "xcorr/errors.hpp"
#include "xcorr/montecarlo.hpp"
#include "xcorr/spectral.hpp"

using namespace xcorr;

namespace {

ExperimentConfig small_config(std::size_t M) {
  ExperimentConfig c;
  c.T = 50.0;
  c.delta = 10.0;
  c.dt = 0.01;
  c.replications = M;
  c.base_seed = {2718, 0};
  return c;
}

const MonteCarloResult& sinc_run() {
  static const MonteCarloResult r = [] {
    ExperimentConfig c;
    c.replications = 500;
    c.base_seed = {31415, 0};
    return run_replications(c);
  }();
  return r;
}

}  // namespace

TEST_CASE("kolmogorov survival function") {
  CHECK(kolmogorov_survival(0.0) == 1.0);
  CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
  CHECK(kolmogorov_survival(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
  double prev = 1.0;
  for (int i = 1; i < 40; ++i) {
    const double q = kolmogorov_survival(0.1 * i);
    CHECK(q <= prev);
    CHECK(q >= 0.0);
    prev = q;
  }
}

TEST_CASE("normality test on its own target distribution") {
  int passed = 0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    auto z = standard_normals({555, trial}, 200);
    for (double& v : z) v *= std::sqrt(2.0);
    const auto r = normality_test(z, 2.0);
    CHECK(r.p_value >= 0.0);
    CHECK(r.p_value <= 1.0);
    if (r.p_value > 0.01) ++passed;
  }
  CHECK(passed >= 98);
}

TEST_CASE("normality test rejects the wrong variance") {
  auto z = standard_normals({556, 0}, 500);
  for (double& v : z) v *= 2.0;
  CHECK(normality_test(z, 1.0).p_value < 0.01);
}

TEST_CASE("degenerate normality test") {
  const std::vector<double> zeros(50, 0.0);
  const auto r = normality_test(zeros, 0.0);
  CHECK(r.degenerate);
  CHECK(r.p_value == 1.0);
  const std::vector<double> ones(50, 1.0);
  CHECK(normality_test(ones, 0.0).p_value == 0.0);
  CHECK_THROWS_AS(normality_test(std::vector<double>{}, 1.0), InvalidInput);
}

TEST_CASE("exact limit sampler") {
  SUBCASE("odd kernel at the origin is identically zero") {
    const std::vector<double> g{0.0};
    const auto Z = sample_limit_Z(make_hilbert_sinc(), g, 1000, {1, 0});
    CHECK(Z.cwiseAbs().maxCoeff() < 1e-6);
  }
  SUBCASE("sinc variance and covariance") {
    const std::vector<double> g{0.0, 0.5};
    const auto Z = sample_limit_Z(make_sinc(), g, 10000, {2, 0});
    const Eigen::MatrixXd c = Z.rowwise() - Z.colwise().mean();
    const Eigen::MatrixXd S = c.transpose() * c / double(Z.rows() - 1);
    CHECK(S(0, 0) == doctest::Approx(2.0).epsilon(0.05));
    CHECK(S(0, 1) == doctest::Approx(4.0 / std::numbers::pi).epsilon(0.05));
  }
  SUBCASE("indefinite matrices are refused") {
    Eigen::MatrixXd C(2, 2);
    C << 1.0, 2.0, 2.0, 1.0;
    CHECK_THROWS_AS(sample_gaussian(C, 10, {1, 0}), NumericalConsistencyError);
  }
}

TEST_CASE("experiment validation") {
  auto c = small_config(10);
  c.tau_grid = {0.0, 1.5};
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  c = small_config(1);
  CHECK_THROWS_AS(c.validate(), InvalidParameter);
  c = small_config(10);
  c.T = 50.005;
  CHECK_THROWS_AS(c.validate(), InvalidInput);
  const ReplicationError e(7, "boom");
  CHECK(e.index() == 7);
  CHECK(std::string(e.what()) == "replication 7: boom");
}

TEST_CASE("two replications: covariance diagonal is the sample variance") {
  const auto r = run_replications(small_config(2));
  for (std::size_t i = 0; i < r.tau_grid.size(); ++i) {
    const double a = r.z(0, r.tau_index[i]), b = r.z(1, r.tau_index[i]);
    const double m = 0.5 * (a + b);
    const double v = (a - m) * (a - m) + (b - m) * (b - m);
    CHECK(r.empirical_cov(i, i) == doctest::Approx(v).epsilon(1e-12));
    CHECK(r.variance[i] == r.empirical_cov(i, i));
  }
  CHECK(r.lattice.size() == 101);
}

TEST_CASE("property: results do not depend on the worker count") {
  const auto a = run_replications(small_config(12), 1);
  const auto b = run_replications(small_config(12), 3);
  CHECK(a.z == b.z);
  CHECK(a.sup_abs == b.sup_abs);
  CHECK(a.variance == b.variance);
  auto c = small_config(12);
  c.base_seed.stream_id = 5;
  const auto d = run_replications(c, 2);
  CHECK(d.z.row(0) == a.z.row(5));
}

TEST_CASE("Monte Carlo ensemble for sinc/triangular") {
  const auto& r = sinc_run();
  CHECK(r.variance[0] == doctest::Approx(2.0).epsilon(0.15));
  CHECK(r.ks[1].p_value > 0.01);
  for (double v : r.variance) CHECK(v >= 0.0);
  for (const auto& k : r.ks) {
    CHECK(k.p_value >= 0.0);
    CHECK(k.p_value <= 1.0);
  }
}

TEST_CASE("Monte Carlo ensemble for hilbert-sinc/triangular") {
  ExperimentConfig c;
  c.h = make_hilbert_sinc();
  c.replications = 500;
  c.base_seed = {27182, 0};
  const auto r = run_replications(c);
  CHECK(r.variance[0] < 0.15);
}

TEST_CASE("modulus of continuity") {
  const auto& r = sinc_run();
  const std::vector<double> hs{0.5, 0.25, 0.125};
  const std::vector<double> ds{0.5, 1e6};
  const auto rows = modulus_of_continuity(r, hs, ds);
  REQUIRE(rows.size() == 6);
  CHECK(rows[1].probability == 0.0);
  CHECK(rows[2].probability <= rows[0].probability + 2.0 * rows[0].se);
  CHECK(rows[4].probability <= rows[2].probability + 2.0 * rows[2].se);
  const std::vector<double> tiny{0.005};
  CHECK_THROWS_AS(modulus_of_continuity(r, tiny, ds), InvalidInput);
}

TEST_CASE("coverage table") {
  const auto& r = sinc_run();
  TailBoundReport one;
  one.method = BoundMethod::theorem4_sup;
  one.x_values = {0.1, 1.0, 5.0};
  one.bound_values = {1.0, 1.0, 1.0};
  const std::vector<TailBoundReport> reps{one};
  for (const auto& row : ci_coverage(r, reps)) CHECK(row.valid);

  TailBoundReport pw = theorem3_report(2.0, std::vector<double>{5.8067383035758137 * std::sqrt(2.0)});
  const std::vector<TailBoundReport> no_tau{pw};
  CHECK_THROWS_AS(ci_coverage(r, no_tau), InvalidInput);
  pw.constants["tau"] = 0.0;
  const std::vector<TailBoundReport> with_tau{pw};
  const auto rows = ci_coverage(r, with_tau);
  CHECK(rows[0].empirical <= 0.1);
  CHECK(empirical_tail(std::vector<double>{1.0, 2.0, 3.0, 4.0}, 2.5) == 0.5);
}

TEST_CASE("result files") {
  const auto cfg = small_config(20);
  auto c = cfg;
  c.keep_first_paths = true;
  const auto r = run_replications(c);
  const auto dir = std::filesystem::temp_directory_path() / "xcorr_mc_test";
  std::filesystem::remove_all(dir);
  const auto names = write_results(r, c, dir);
  for (const auto& n : names) CHECK(std::filesystem::exists(dir / n));
  std::ifstream f(dir / "sup_tail.csv");
  std::string line;
  std::getline(f, line);
  CHECK(line == "x,survival,lattice_spacing");
  double prev = 2.0;
  while (std::getline(f, line)) {
    const auto a = line.find(','), b = line.rfind(',');
    const double s = std::stod(line.substr(a + 1, b - a - 1));
    CHECK(s <= prev);
    prev = s;
  }
  write_paths_long(r, dir / "paths.csv");
  CHECK(std::filesystem::file_size(dir / "paths.csv") > 1000);
  CHECK_THROWS_AS(write_paths_long(run_replications(cfg), dir / "none.csv"), PreconditionError);
}
