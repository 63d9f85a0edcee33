#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "xcorr/entropy.hpp"
#include "xcorr/errors.hpp"

using namespace xcorr;

TEST_CASE("uniform covering numbers") {
  const auto d = Pseudometric::uniform();
  CHECK(covering_number(d, 0.0, 1.0, 0.25).count == 2);
  CHECK(covering_number(d, 0.0, 1.0, 0.5).count == 1);
  CHECK(covering_number(d, 0.0, 1.0, 0.1).count == 5);
  CHECK(covering_number(d, 0.0, 1.0, 0.09).count == 6);
  CHECK_THROWS_AS(covering_number(d, 2.0, 2.0, 1e-6), InvalidInput);
  CHECK_FALSE(covering_number(d, 0.0, 1.0, 0.25).upper_bound_only);
  CHECK(d.kind() == PseudometricKind::uniform_d);
  CHECK(d(0.2, 0.7) == doctest::Approx(0.5));
}

TEST_CASE("sigma covering number at ε = σ(0.1)") {
  const auto h = make_sinc();
  const auto p = Pseudometric::sigma(h);
  double prev = 0.0;
  for (int i = 1; i <= 100; ++i) {
    const double v = p.profile(0.001 * i);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(covering_number(p, 0.0, 1.0, sigma(h, 0.1)).count == 5);
}

TEST_CASE("greedy covering of a custom distance") {
  const auto g = Pseudometric::general("abs", [](double a, double b) { return std::abs(a - b); });
  CHECK_FALSE(g.translation_invariant());
  const auto c = covering_number(g, 0.0, 1.0, 0.25);
  CHECK(c.upper_bound_only);
  CHECK(c.count >= 2);
  CHECK(c.count <= 3);
  CHECK(c.achieved_radius <= 0.25);
  std::vector<double> pts{0.0, 0.1, 0.2, 5.0};
  const auto gc = greedy_covering(g, pts, 0.15);
  CHECK(gc.count >= 2);
  CHECK(gc.count <= 3);
  CHECK(gc.upper_bound_only);
}

TEST_CASE("property: covering numbers are nonincreasing in ε") {
  const auto p = Pseudometric::sqrt_sigma(make_sinc());
  std::vector<double> eps;
  for (int i = 0; i < 30; ++i) eps.push_back(1.5 * std::pow(0.8, i));
  const auto prof = entropy_profile(p, 0.0, 1.0, eps);
  for (std::size_t i = 1; i < prof.covering_numbers.size(); ++i)
    CHECK(prof.covering_numbers[i] >= prof.covering_numbers[i - 1]);
  CHECK(prof.covering_numbers.front() == 1);
  CHECK(prof.entropies.front() == 0.0);

  const auto dir = std::filesystem::temp_directory_path() / "xcorr_entropy_test";
  std::filesystem::create_directories(dir);
  write_entropy_profile(prof, dir / "h.csv");
  std::ifstream f(dir / "h.csv");
  std::string header;
  std::getline(f, header);
  CHECK(header == "eps,N,H");
}

TEST_CASE("entropy integrals") {
  SUBCASE("uniform distance against the series value") {
    const auto r = entropy_integral(Pseudometric::uniform(), 0.0, 1.0, 1.0, 1.0);
    CHECK_FALSE(r.divergent);
    CHECK(r.value == doctest::Approx(0.62858533871031812).epsilon(0.05));
    const CumulativeIntegral cum(r);
    CHECK(cum(1.0) == doctest::Approx(r.value).epsilon(1e-12));
    CHECK(cum(0.3) <= cum(0.6));
    CHECK(cum(0.6) <= cum(1.0));
  }
  SUBCASE("a single ball at every scale integrates to zero") {
    const auto flat = Pseudometric::translation_invariant("flat", [](double) { return 0.0; });
    CHECK(covering_number(flat, 0.0, 1.0, 1e-9).count == 1);
    const auto r = entropy_integral(flat, 0.0, 1.0, 1.0, 0.5);
    CHECK(r.value == 0.0);
  }
  SUBCASE("sqrt-sigma for sinc is finite") {
    const auto r = entropy_integral(Pseudometric::sqrt_sigma(make_sinc()), 0.0, 1.0, 2.0, 1.0);
    CHECK_FALSE(r.divergent);
    CHECK(std::isfinite(r.value));
    CHECK(r.value > 0.0);
  }
  SUBCASE("an entropy growing like 1/ε is flagged divergent") {
    const auto p = Pseudometric::translation_invariant(
        "log_scale", [](double u) { return u <= 0.0 ? 0.0 : (u >= 0.5 ? 1.0 / std::log(2.0) : 1.0 / std::log(1.0 / u)); });
    const auto r = entropy_integral(p, 0.0, 1.0, 1.0, 1.0);
    CHECK(r.divergent);
  }
}

TEST_CASE("C_r and ε_{T,Δ}") {
  CHECK(c_r(0.5) == doctest::Approx(0.77258872223978124).epsilon(1e-13));
  CHECK(c_r(0.9) == doctest::Approx(1.7315865345605502).epsilon(1e-13));
  CHECK(std::abs(c_r(1e-4) - 0.5) < 1e-3);
  CHECK(c_r(1e-4) == doctest::Approx(0.50003333583353335).epsilon(1e-10));
  CHECK(epsilon_T_delta(0.5, 0.0) == 0.0);
  CHECK(epsilon_T_delta(0.5, 1.0) == doctest::Approx(1.0557508788639833).epsilon(1e-13));
  CHECK(epsilon_T_delta(0.5, 2.0) == doctest::Approx(2.1115017577279666).epsilon(1e-13));
  CHECK_THROWS_AS(c_r(1.0), InvalidParameter);
  CHECK_THROWS_AS(c_r(0.0), InvalidParameter);
}

TEST_CASE("exact pseudometric on a lattice") {
  const CovarianceModel m{make_sinc(), make_triangular(10.0, 1.0), 1.0, {}};
  std::vector<double> lattice;
  for (int i = 0; i <= 8; ++i) lattice.push_back(0.125 * i);
  const auto p = Pseudometric::rho_exact(m, 50.0, lattice);
  CHECK(p.kind() == PseudometricKind::rho_exact);
  CHECK(p.lattice().size() == 9);
  CHECK(p(0.0, 0.5) == doctest::Approx(rho_exact(m, 50.0, 0.0, 0.5)).epsilon(1e-8));
  CHECK(p(0.25, 0.25) == 0.0);
  const auto c = covering_number(p, 0.0, 1.0, 0.3);
  CHECK(c.count >= 1);
  CHECK(c.count <= 9);
}
