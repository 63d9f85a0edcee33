#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "xcorr/errors.hpp"
#include "xcorr/kernel.hpp"
#include "xcorr/signal.hpp"

using namespace xcorr;

namespace {

double mean(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0) / v.size(); }

double lag_cov(const std::vector<double>& a, const std::vector<double>& b, std::size_t lag) {
  double acc = 0.0;
  const std::size_t n = a.size() - lag;
  for (std::size_t j = 0; j < n; ++j) acc += a[j + lag] * b[j];
  return acc / n;
}

}  // namespace

TEST_CASE("philox known answers") {
  using A = std::array<std::uint32_t, 4>;
  CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == A{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
        A{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
        A{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("standard normals are reproducible and offset-consistent") {
  const NoiseSeed s{42, 3};
  const auto a = standard_normals(s, 101);
  const auto b = standard_normals(s, 101);
  CHECK(a == b);
  const auto tail = standard_normals(s, 50, 51);
  for (std::size_t i = 0; i < 50; ++i) CHECK(tail[i] == a[51 + i]);
  const auto other = standard_normals({42, 4}, 101);
  CHECK(other != a);
}

TEST_CASE("standard normals have unit moments") {
  const auto z = standard_normals({7, 0}, 1000000);
  const double m = mean(z);
  double v = 0.0, k4 = 0.0;
  for (double x : z) {
    v += (x - m) * (x - m);
    k4 += x * x * x * x;
  }
  v /= z.size() - 1;
  k4 /= z.size();
  CHECK(std::abs(m) < 4e-3);
  CHECK(v == doctest::Approx(1.0).epsilon(0.01));
  CHECK(k4 == doctest::Approx(3.0).epsilon(0.02));
}

TEST_CASE("wiener increments: mean, variance and determinism") {
  const TimeGrid g{0.0, 0.01, 4};
  const auto inc = wiener_increments(g, 0, {1, 0});
  CHECK(inc.size() == 4);
  CHECK(inc == wiener_increments(g, 0, {1, 0}));
  CHECK(wiener_increments(g, 3, {1, 0}).size() == 10);

  const std::size_t M = 1000000;
  double s = 0.0, s2 = 0.0;
  for (std::size_t r = 0; r < M; ++r) {
    const double x = wiener_increments(g, 0, {9, r})[0];
    s += x;
    s2 += x * x;
  }
  const double m = s / M;
  CHECK(std::abs(m) < 4.0 * std::sqrt(0.01 / M));
  CHECK((s2 / M - m * m) == doctest::Approx(0.01).epsilon(0.01));
}

TEST_CASE("time grid validation") {
  CHECK_THROWS_AS((TimeGrid{0.0, 0.01, 0}.validate()), InvalidParameter);
  CHECK_THROWS_AS((TimeGrid{0.0, 0.0, 5}.validate()), InvalidParameter);
  CHECK_NOTHROW((TimeGrid{-1.0, 0.5, 5}.validate()));
  CHECK(TimeGrid{-1.0, 0.5, 5}.t_end() == 1.0);
}

TEST_CASE("padding, truncation and resolution warnings") {
  CHECK(required_pad(make_triangular(1.0, 1.0), 0.01) == 100);
  CHECK(simulation_radius(make_sinc()) == 100.0);
  CHECK(simulation_radius(make_sinc(), {20.0}) == 20.0);
  CHECK(resolution_warning(make_triangular(1000.0, 1.0), 0.01).has_value());
  CHECK_FALSE(resolution_warning(make_triangular(1.0, 1.0), 0.01).has_value());

  const TimeGrid g{0.0, 0.01, 100};
  const auto k = make_triangular(1.0, 1.0);
  const auto inc = wiener_increments(g, 10, {1, 0});
  CHECK_THROWS_AS(simulate_output(k, inc, g, 10), PreconditionError);
  CHECK_THROWS_AS(simulate_output(k, inc, g, 11), InvalidInput);
}

TEST_CASE("zero kernel gives a zero path") {
  const TimeGrid g{0.0, 0.01, 500};
  const auto z = make_named_kernel("zero");
  const std::size_t pad = required_pad(z, g.dt);
  const auto p = simulate_output(z, wiener_increments(g, pad, {1, 0}), g, pad);
  for (double v : p.values) CHECK(v == 0.0);
}

TEST_CASE("laplace path variance equals c^2 Δ / 4") {
  const TimeGrid g{0.0, 0.005, std::size_t{1} << 17};
  const auto k = make_laplace(1.0, 2.0);
  const std::size_t pad = required_pad(k, g.dt);
  const auto p = simulate_output(k, wiener_increments(g, pad, {2024, 0}), g, pad);
  const double m = mean(p.values);
  double v = 0.0;
  for (double x : p.values) v += (x - m) * (x - m);
  v /= p.values.size() - 1;
  CHECK(v == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("triangular path lag-dt autocovariance") {
  const TimeGrid g{0.0, 0.01, std::size_t{1} << 17};
  const auto k = make_triangular(10.0, 1.0);
  const std::size_t pad = required_pad(k, g.dt);
  const auto p = simulate_output(k, wiener_increments(g, pad, {5, 0}), g, pad);
  CHECK(lag_cov(p.values, p.values, 1) == doctest::Approx(6.5633333333333333).epsilon(0.05));
}

TEST_CASE("simulate_pair cross moments") {
  SUBCASE("h = g triangular: mean of YX is the squared norm") {
    const TimeGrid g{0.0, 0.01, 200000};
    const auto k = make_triangular(1.0, 1.0);
    const auto [Y, X] = simulate_pair(k, k, g, {11, 0});
    CHECK(Y.values == X.values);
    CHECK(lag_cov(Y.values, X.values, 0) == doctest::Approx(2.0 / 3.0).epsilon(0.05));
    CHECK(Y.label == "Y");
    CHECK(X.label == "X");
  }
  SUBCASE("sinc against a narrow triangle: E Y X ≈ H(0)") {
    const TimeGrid g{0.0, 0.01, 100000};
    const auto [Y, X] = simulate_pair(make_sinc(), make_triangular(100.0, 1.0), g, {12, 0});
    CHECK(lag_cov(Y.values, X.values, 0) == doctest::Approx(1.0).epsilon(0.10));
  }
}

TEST_CASE("property: separate streams are uncorrelated") {
  const std::size_t M = 400;
  const TimeGrid g{0.0, 0.01, 1000};
  std::vector<double> a(M), b(M);
  for (std::size_t r = 0; r < M; ++r) {
    const auto x = wiener_increments(g, 0, {77, r});
    const auto y = wiener_increments(g, 0, {77, r + M});
    a[r] = std::accumulate(x.begin(), x.end(), 0.0);
    b[r] = std::accumulate(y.begin(), y.end(), 0.0);
  }
  const double ma = mean(a), mb = mean(b);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t r = 0; r < M; ++r) {
    sab += (a[r] - ma) * (b[r] - mb);
    saa += (a[r] - ma) * (a[r] - ma);
    sbb += (b[r] - mb) * (b[r] - mb);
  }
  CHECK(std::abs(sab / std::sqrt(saa * sbb)) < 4.0 / std::sqrt(double(M)));
}

TEST_CASE("path files round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "xcorr_signal_test";
  std::filesystem::create_directories(dir);
  SampledPath p{{-0.5, 0.25, 4}, {1.0, -2.5, 1e-300, 3.0 / 7.0}, "X"};
  write_path_binary(p, dir / "p.bin");
  const auto q = read_path_binary(dir / "p.bin");
  CHECK(q.values == p.values);
  CHECK(q.grid.dt == p.grid.dt);
  CHECK(q.grid.t_start == p.grid.t_start);
  CHECK(q.grid.n == 4);
  CHECK(std::filesystem::file_size(dir / "p.bin") == 24 + 4 * 8);

  write_path_csv(p, dir / "p.csv");
  std::ifstream f(dir / "p.csv");
  std::string header, first;
  std::getline(f, header);
  std::getline(f, first);
  CHECK(header == "t,value");
  CHECK(first == "-0.5,1");
  CHECK_THROWS(read_path_binary(dir / "missing.bin"));
}
