#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <vector>

#include "xcorr/errors.hpp"
#include "xcorr/kernel.hpp"
#include "xcorr/quadrature.hpp"

using namespace xcorr;
using std::numbers::pi;

namespace {

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(pi * x) / (pi * x); }

Kernel tabulate(const Kernel& k, double lo, double hi, double step) {
  std::vector<double> t, v;
  const auto n = static_cast<int>(std::lround((hi - lo) / step));
  for (int i = 0; i <= n; ++i) {
    t.push_back(lo + i * step);
    v.push_back(k(t.back()));
  }
  return make_tabulated(t, v);
}

}  // namespace

TEST_CASE("triangular closed forms") {
  const auto g = make_triangular(1.0, 1.0);
  CHECK(g.transform(0.0).real() == doctest::Approx(1.0));
  CHECK(g(0.5) == doctest::Approx(0.5));
  CHECK(g(2.0) == 0.0);
  const auto g23 = make_triangular(2.0, 3.0);
  CHECK(g23.transform(4.0).real() == doctest::Approx(2.1242202548207136).epsilon(1e-13));
  CHECK(g.parity() == Parity::even);
  CHECK(g.l2_norm() == doctest::Approx(std::sqrt(2.0 / 3.0)).epsilon(1e-12));
}

TEST_CASE("laplace closed forms") {
  const auto g = make_laplace(1.0, 1.0);
  CHECK(g.transform(0.0).real() == doctest::Approx(1.0));
  CHECK(g.transform(1.0).real() == doctest::Approx(0.5));
  CHECK(make_laplace(3.0, 2.0)(1.0) == doctest::Approx(0.14936120510359183).epsilon(1e-13));
}

TEST_CASE("sinc closed forms") {
  const auto h = make_sinc();
  CHECK(h.transform(1.0).real() == 1.0);
  CHECK(std::abs(h.transform(4.0)) == 0.0);
  CHECK(h(0.0) == 1.0);
  CHECK(h.l2_norm() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(h.band_limit().value() == doctest::Approx(pi));
}

TEST_CASE("hilbert-sinc closed forms") {
  const auto h = make_hilbert_sinc();
  CHECK(h(0.0) == 0.0);
  CHECK(h(1.0) == doctest::Approx(2.0 / pi).epsilon(1e-14));
  const auto v = h.transform(-2.0);
  CHECK(v.real() == 0.0);
  CHECK(v.imag() == -1.0);
  CHECK(h.parity() == Parity::odd);
  CHECK(h(1e-9) == doctest::Approx(pi * 1e-9 / 2.0).epsilon(1e-6));
}

TEST_CASE("one-sided box is neither even nor odd") {
  const auto g = make_one_sided_box(2.0, 1.0);
  CHECK(g(0.25) == 2.0);
  CHECK(g(-0.25) == 0.0);
  CHECK(g.parity() == Parity::none);
  CHECK(std::abs(g.transform(0.0) - std::complex<double>(1.0, 0.0)) < 1e-14);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(make_triangular(0.0, 1.0), InvalidParameter);
  CHECK_THROWS_AS(make_laplace(1.0, -1.0), InvalidParameter);
  CHECK_THROWS_AS(make_named_kernel("gaussian"), InvalidInput);
  const double t[] = {0.0, 1.0, 0.5};
  const double v[] = {1.0, 1.0, 1.0};
  CHECK_THROWS(make_tabulated(t, v));
}

TEST_CASE("tabulated kernels") {
  SUBCASE("triangular copy") {
    const auto k = tabulate(make_triangular(1.0, 1.0), -2.0, 2.0, 1e-3);
    CHECK(k.transform(0.0).real() == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(std::abs(k.transform(3.0) - make_triangular(1.0, 1.0).transform(3.0)) < 1e-3);
    CHECK(k.parity() == Parity::even);
  }
  SUBCASE("zero function") {
    const auto z = make_named_kernel("zero");
    CHECK(z(0.3) == 0.0);
    CHECK(std::abs(z.transform(1.7)) == 0.0);
  }
  SUBCASE("sinc copy") {
    const auto k = tabulate(make_sinc(), -40.0, 40.0, 1e-2);
    CHECK(std::abs(k.l2_norm() - 1.0) < 2e-2);
  }
  SUBCASE("csv round trip") {
    const auto dir = std::filesystem::temp_directory_path() / "xcorr_kernel_test";
    std::filesystem::create_directories(dir);
    {
      std::ofstream f(dir / "k.csv");
      f << "t,value\n-1,0\n0,1\n1,0\n";
    }
    const auto k = load_tabulated_csv(dir / "k.csv");
    CHECK(k(0.5) == doctest::Approx(0.5));
    CHECK(k.transform(0.0).real() == doctest::Approx(1.0).epsilon(1e-6));
  }
}

TEST_CASE("property: Plancherel and parity for every built-in kernel") {
  const std::vector<Kernel> kernels{make_triangular(1.0, 1.0), make_triangular(7.0, 2.0),
                                    make_laplace(1.0, 1.0),     make_laplace(4.0, 0.5),
                                    make_sinc(),                make_hilbert_sinc(),
                                    make_one_sided_box(3.0, 1.0)};
  for (const auto& k : kernels) {
    CAPTURE(k.name());
    const double L = k.band_limit().value_or(k.spectral_extent());
    const auto pts = quad::symmetric_partition(L, k.spectral_breakpoints());
    const auto spec = quad::adaptive([&](double l) { return std::norm(k.transform(l)); }, pts,
                                     {1e-12, 1e-9, 200000});
    CHECK(spec.value / (2.0 * pi) == doctest::Approx(k.l2_norm() * k.l2_norm()).epsilon(1e-4));
    for (double l : {0.3, 1.1, 2.9}) {
      const auto v = k.transform(l);
      if (k.parity() == Parity::even) CHECK(std::abs(v.imag()) <= 1e-12 * (1.0 + std::abs(v)));
      if (k.parity() == Parity::odd) CHECK(std::abs(v.real()) <= 1e-12 * (1.0 + std::abs(v)));
    }
  }
}

TEST_CASE("family conditions") {
  const double deltas[] = {1.0, 10.0, 100.0};
  SUBCASE("triangular passes, deviation below c a^2 / (12 Δ^2)") {
    const auto r = check_family_conditions(triangular_family(1.0), deltas, 5.0, 1e-2);
    CHECK(r.all_passed());
    CHECK(r.window_deviation[2] <= 25.0 / (12.0 * 1e4));
    CHECK(r.family_sup == doctest::Approx(1.0));
  }
  SUBCASE("laplace deviation equals c a^2 / (Δ^2 + a^2)") {
    const auto r = check_family_conditions(laplace_family(1.0), deltas, 5.0, 1e-2);
    CHECK(r.all_passed());
    for (std::size_t i = 0; i < 3; ++i)
      CHECK(r.window_deviation[i] == doctest::Approx(25.0 / (deltas[i] * deltas[i] + 25.0)).epsilon(1e-8));
  }
  SUBCASE("one-sided box fails evenness") {
    const auto r = check_family_conditions(one_sided_box_family(1.0), deltas, 5.0, 1e-2);
    CHECK_FALSE(r.evenness.passed);
    CHECK_FALSE(r.all_passed());
  }
}

TEST_CASE("weighted spectral integral") {
  const auto s = check_weighted_spectral(make_sinc(), 4.5, pi);
  CHECK(s.value == doctest::Approx(8.4985321737680285).epsilon(1e-9));
  CHECK(s.converged);
  const auto t = check_weighted_spectral(make_triangular(1.0, 1.0), 1.5, 2000.0);
  CHECK(std::isfinite(t.value));
  CHECK(t.converged);
  CHECK(check_weighted_spectral(make_named_kernel("zero"), 2.0, 10.0).value == 0.0);
}

TEST_CASE("autocorrelation") {
  const auto h = make_sinc();
  CHECK(autocorrelation(h, 0.7) == doctest::Approx(0.36788301057177419).epsilon(1e-9));
  CHECK(autocorrelation(h, 0.0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(std::abs(autocorrelation(make_triangular(1.0, 1.0), 2.0)) < 1e-9);
  // For an odd kernel the convolution at zero is −‖H‖².
  CHECK(autocorrelation(make_hilbert_sinc(), 0.0) == doctest::Approx(-1.0).epsilon(1e-8));
  for (double lag : {0.2, 1.3, 2.5}) CHECK(autocorrelation(h, lag) == doctest::Approx(sinc(lag)).epsilon(1e-8));
}
