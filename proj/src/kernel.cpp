#include "xcorr/kernel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <sstream>

#include <boost/math/tools/minima.hpp>

#include "fft.hpp"
#include "spectral_domain.hpp"
#include "xcorr/errors.hpp"
#include "xcorr/quadrature.hpp"

namespace xcorr {

using cplx = std::complex<double>;
using std::numbers::pi;

std::string to_string(Parity p) {
  switch (p) {
    case Parity::even: return "even";
    case Parity::odd: return "odd";
    case Parity::none: return "none";
  }
  return "none";
}

Kernel::Kernel(std::shared_ptr<const Model> model, Traits traits)
    : model_(std::move(model)), traits_(std::make_shared<const Traits>(std::move(traits))) {}

namespace {

void require_positive(double v, const char* what) {
  if (!std::isfinite(v) || v <= 0.0)
    throw InvalidParameter(std::string(what) + " must be finite and positive");
}

// sin(x)/x with the removable singularity filled in.
double sinc_unnormalized(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
  return std::sin(x) / x;
}

class TriangularModel final : public Kernel::Model {
 public:
  TriangularModel(double delta, double c) : delta_(delta), c_(c) {}
  double value(double t) const override {
    const double u = delta_ * std::abs(t);
    return u <= 1.0 ? c_ * delta_ * (1.0 - u) : 0.0;
  }
  cplx transform(double lambda) const override {
    const double s = sinc_unnormalized(lambda / (2.0 * delta_));
    return {c_ * s * s, 0.0};
  }

 private:
  double delta_, c_;
};

class LaplaceModel final : public Kernel::Model {
 public:
  LaplaceModel(double delta, double c) : delta_(delta), c_(c) {}
  double value(double t) const override {
    return 0.5 * c_ * delta_ * std::exp(-delta_ * std::abs(t));
  }
  cplx transform(double lambda) const override {
    const double d2 = delta_ * delta_;
    return {c_ * d2 / (d2 + lambda * lambda), 0.0};
  }

 private:
  double delta_, c_;
};

class SincModel final : public Kernel::Model {
 public:
  double value(double t) const override { return sinc_unnormalized(pi * t); }
  cplx transform(double lambda) const override {
    return {std::abs(lambda) <= pi ? 1.0 : 0.0, 0.0};
  }
};

class HilbertSincModel final : public Kernel::Model {
 public:
  double value(double t) const override {
    if (t == 0.0) return 0.0;
    // 1 − cos x = 2 sin²(x/2), free of cancellation near zero.
    const double s = std::sin(0.5 * pi * t);
    return 2.0 * s * s / (pi * t);
  }
  cplx transform(double lambda) const override {
    if (std::abs(lambda) > pi || lambda == 0.0) return {0.0, 0.0};
    return {0.0, lambda > 0.0 ? 1.0 : -1.0};
  }
};

class OneSidedBoxModel final : public Kernel::Model {
 public:
  OneSidedBoxModel(double delta, double c) : delta_(delta), c_(c) {}
  double value(double t) const override {
    return (t >= 0.0 && delta_ * t <= 1.0) ? c_ * delta_ : 0.0;
  }
  cplx transform(double lambda) const override {
    const double half = 0.5 * lambda / delta_;
    return c_ * sinc_unnormalized(half) * std::polar(1.0, -half);
  }

 private:
  double delta_, c_;
};

// ∫_0^h (1 − s/h) e^{−a s} ds for complex a, series near a·h = 0.
cplx half_hat(cplx a, double h) {
  const cplx x = a * h;
  if (std::abs(x) < 1e-2) {
    return h * (0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0 + x * x * x * x / 720.0);
  }
  return (x - 1.0 + std::exp(-x)) / (a * a * h);
}

class TabulatedModel final : public Kernel::Model {
 public:
  TabulatedModel(double t0, double dt, std::vector<double> values)
      : t0_(t0), dt_(dt), values_(std::move(values)) {
    const std::size_t n = values_.size();
    t_end_ = t0_ + dt_ * static_cast<double>(n - 1);
    center_offset_ = 0.5 * static_cast<double>(n - 1);
    nfft_ = 1024;
    while (nfft_ < 8 * n) nfft_ *= 2;
    const auto half = fft::forward_real(values_, nfft_);
    // Store the centred sum D̃ on bins j = −N/2 .. N/2 (inclusive).
    centered_.resize(nfft_ + 1);
    const double bin = 2.0 * pi / (static_cast<double>(nfft_) * dt_);
    for (std::size_t idx = 0; idx <= nfft_; ++idx) {
      const long j = static_cast<long>(idx) - static_cast<long>(nfft_ / 2);
      const std::size_t aj = static_cast<std::size_t>(std::labs(j));
      cplx d = half[aj];
      if (j < 0) d = std::conj(d);  // real input: X_{−j} = conj(X_j)
      const double lambda = bin * static_cast<double>(j);
      centered_[idx] = d * std::polar(1.0, lambda * center_offset_ * dt_);
    }
  }

  double value(double t) const override {
    if (!(t >= t0_ && t <= t_end_)) return 0.0;
    const double x = (t - t0_) / dt_;
    std::size_t i = static_cast<std::size_t>(std::floor(x));
    if (i >= values_.size() - 1) i = values_.size() - 2;
    const double f = x - static_cast<double>(i);
    return (1.0 - f) * values_[i] + f * values_[i + 1];
  }

  cplx transform(double lambda) const override {
    const double period = 2.0 * pi / dt_;
    const double reduced = lambda - std::round(lambda / period) * period;
    double x = reduced / period * static_cast<double>(nfft_) + 0.5 * static_cast<double>(nfft_);
    x = std::clamp(x, 0.0, static_cast<double>(nfft_));
    std::size_t i = static_cast<std::size_t>(std::floor(x));
    if (i >= nfft_) i = nfft_ - 1;
    const double f = x - static_cast<double>(i);
    const cplx dcent = (1.0 - f) * centered_[i] + f * centered_[i + 1];
    const cplx d = dcent * std::polar(1.0, -reduced * center_offset_ * dt_);
    const cplx sum = d * std::polar(1.0, -lambda * t0_);
    const double s = sinc_unnormalized(0.5 * lambda * dt_);
    cplx result = dt_ * sum * (s * s);
    const cplx a(0.0, lambda);
    result -= values_.front() * std::polar(1.0, -lambda * t0_) * half_hat(-a, dt_);
    result -= values_.back() * std::polar(1.0, -lambda * t_end_) * half_hat(a, dt_);
    return result;
  }

  double t0() const { return t0_; }
  double t_end() const { return t_end_; }
  double dt() const { return dt_; }
  const std::vector<double>& values() const { return values_; }

 private:
  double t0_, dt_, t_end_ = 0.0, center_offset_ = 0.0;
  std::vector<double> values_;
  std::size_t nfft_ = 0;
  std::vector<cplx> centered_;
};

Parity detect_parity(const Kernel::Model& m, double radius, double scale) {
  constexpr int kPoints = 1024;
  constexpr double kTol = 1e-9;
  double even_dev = 0.0, odd_dev = 0.0;
  for (int i = 0; i < kPoints; ++i) {
    const double t = radius * static_cast<double>(i) / (kPoints - 1);
    const double p = m.value(t), q = m.value(-t);
    even_dev = std::max(even_dev, std::abs(p - q));
    odd_dev = std::max(odd_dev, std::abs(p + q));
  }
  const double tol = kTol * (scale > 0.0 ? scale : 1.0);
  if (even_dev <= tol) return Parity::even;
  if (odd_dev <= tol) return Parity::odd;
  return Parity::none;
}

}  // namespace

Kernel make_triangular(double delta, double c) {
  require_positive(delta, "delta");
  require_positive(c, "c");
  Kernel::Traits t;
  t.name = "triangular";
  t.parity = Parity::even;
  t.l2_norm = std::sqrt(2.0 * c * c * delta / 3.0);
  t.effective_support = 1.0 / delta;
  // |g*|² ≤ c²(2Δ/λ)⁴  ⇒  tail mass ≤ 32 c² Δ⁴ / (3 L³).
  t.spectral_extent = std::cbrt(32.0 * c * c * std::pow(delta, 4) / (3.0 * kDefaultTailTolerance));
  return Kernel(std::make_shared<TriangularModel>(delta, c), std::move(t));
}

Kernel make_laplace(double delta, double c) {
  require_positive(delta, "delta");
  require_positive(c, "c");
  Kernel::Traits t;
  t.name = "laplace";
  t.parity = Parity::even;
  const double mass = c * c * delta / 4.0;
  t.l2_norm = std::sqrt(mass);
  // Tail mass outside [−R, R] is (c²Δ/4) e^{−2ΔR}.
  t.effective_support =
      std::max(std::log(std::max(mass / kDefaultTailTolerance, 1.0)) / (2.0 * delta), 1.0 / delta);
  t.spectral_extent = std::cbrt(2.0 * c * c * std::pow(delta, 4) / (3.0 * kDefaultTailTolerance));
  return Kernel(std::make_shared<LaplaceModel>(delta, c), std::move(t));
}

Kernel make_sinc() {
  Kernel::Traits t;
  t.name = "sinc";
  t.parity = Parity::even;
  t.l2_norm = 1.0;
  // sin² ≤ 1 gives tail mass ≤ 2/(π² R).
  t.effective_support = 2.0 / (pi * pi * kDefaultTailTolerance);
  t.band_limit = pi;
  t.spectral_breakpoints = {-pi, pi};
  t.spectral_extent = pi;
  return Kernel(std::make_shared<SincModel>(), std::move(t));
}

Kernel make_hilbert_sinc() {
  Kernel::Traits t;
  t.name = "hilbert_sinc";
  t.parity = Parity::odd;
  t.l2_norm = 1.0;
  // (1 − cos)² ≤ 4 gives tail mass ≤ 8/(π² R).
  t.effective_support = 8.0 / (pi * pi * kDefaultTailTolerance);
  t.band_limit = pi;
  t.spectral_breakpoints = {-pi, 0.0, pi};
  t.spectral_extent = pi;
  return Kernel(std::make_shared<HilbertSincModel>(), std::move(t));
}

Kernel make_one_sided_box(double delta, double c) {
  require_positive(delta, "delta");
  require_positive(c, "c");
  Kernel::Traits t;
  t.name = "one_sided_box";
  t.parity = Parity::none;
  t.l2_norm = std::sqrt(c * c * delta);
  t.effective_support = 1.0 / delta;
  // |g*|² ≤ 4c²Δ²/λ²  ⇒  tail mass ≤ 8c²Δ²/L.
  t.spectral_extent = 8.0 * c * c * delta * delta / kDefaultTailTolerance;
  return Kernel(std::make_shared<OneSidedBoxModel>(delta, c), std::move(t));
}

Kernel make_tabulated(std::span<const double> times, std::span<const double> values,
                      std::string name) {
  if (times.size() != values.size()) throw InvalidInput("times and values differ in length");
  if (times.size() < 2) throw InvalidInput("tabulated kernel needs at least two samples");
  for (std::size_t i = 0; i < times.size(); ++i) {
    if (!std::isfinite(times[i]) || !std::isfinite(values[i]))
      throw InvalidInput("tabulated kernel contains non-finite samples");
  }
  const std::size_t n = times.size();
  const double dt = (times.back() - times.front()) / static_cast<double>(n - 1);
  if (!(dt > 0.0)) throw InvalidInput("tabulated times must be strictly increasing");
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double step = times[i + 1] - times[i];
    if (!(step > 0.0) || std::abs(step - dt) > 1e-6 * dt)
      throw InvalidInput("tabulated time grid is not uniform");
  }

  std::vector<double> v(values.begin(), values.end());
  auto model = std::make_shared<TabulatedModel>(times.front(), dt, v);

  Kernel::Traits t;
  t.name = std::move(name);
  double sq = 0.0, abs_sum = 0.0, scale = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double a = v[i], b = v[i + 1];
    sq += dt / 3.0 * (a * a + a * b + b * b);
  }
  for (double x : v) {
    abs_sum += std::abs(x);
    scale = std::max(scale, std::abs(x));
  }
  t.l2_norm = std::sqrt(sq);
  t.effective_support = std::max(std::abs(times.front()), std::abs(times.back()));
  t.parity = detect_parity(*model, t.effective_support, scale);
  const double amp = dt * abs_sum + (std::abs(v.front()) + std::abs(v.back())) * dt;
  const double extent =
      std::cbrt(32.0 * amp * amp / (3.0 * kDefaultTailTolerance * std::pow(dt, 4)));
  t.spectral_extent = std::max(extent, pi / dt);
  return Kernel(std::move(model), std::move(t));
}

Kernel load_tabulated_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open kernel file " + path.string());
  std::vector<double> times, values;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidInput("kernel CSV line without comma: " + line);
    auto parse = [](std::string_view s, double& out) {
      while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
      while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
      const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
      return res.ec == std::errc() && res.ptr == s.data() + s.size();
    };
    double t = 0.0, v = 0.0;
    const std::string_view sv(line);
    const bool ok = parse(sv.substr(0, comma), t) && parse(sv.substr(comma + 1), v);
    if (!ok) {
      if (first) {  // header
        first = false;
        continue;
      }
      throw InvalidInput("malformed kernel CSV line: " + line);
    }
    first = false;
    times.push_back(t);
    values.push_back(v);
  }
  return make_tabulated(times, values, path.stem().string());
}

KernelFamily triangular_family(double c) {
  require_positive(c, "c");
  return {"triangular", c, [c](double d) { return make_triangular(d, c); }};
}

KernelFamily laplace_family(double c) {
  require_positive(c, "c");
  return {"laplace", c, [c](double d) { return make_laplace(d, c); }};
}

KernelFamily one_sided_box_family(double c) {
  require_positive(c, "c");
  return {"one_sided_box", c, [c](double d) { return make_one_sided_box(d, c); }};
}

Kernel make_named_kernel(const std::string& kind, double delta, double c) {
  if (kind == "sinc") return make_sinc();
  if (kind == "hilbert_sinc") return make_hilbert_sinc();
  if (kind == "triangular") return make_triangular(delta, c);
  if (kind == "laplace") return make_laplace(delta, c);
  if (kind == "one_sided_box") return make_one_sided_box(delta, c);
  if (kind == "zero") {
    const double t[2] = {-1.0, 1.0}, v[2] = {0.0, 0.0};
    return make_tabulated(t, v, "zero");
  }
  throw InvalidInput("unknown kernel '" + kind + "'");
}

KernelFamily make_named_family(const std::string& kind, double c) {
  if (kind == "triangular") return triangular_family(c);
  if (kind == "laplace") return laplace_family(c);
  if (kind == "one_sided_box") return one_sided_box_family(c);
  throw InvalidInput("unknown kernel family '" + kind + "'");
}

namespace {

// max over a uniform grid on [lo, hi], then a Brent polish in the cells next
// to the best grid point.
double grid_max(const std::function<double(double)>& f, double lo, double hi, int points) {
  double best = -std::numeric_limits<double>::infinity();
  int best_i = 0;
  const double step = (hi - lo) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double v = f(lo + step * i);
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  const double a = lo + step * std::max(best_i - 1, 0);
  const double b = lo + step * std::min(best_i + 1, points - 1);
  if (b > a) {
    std::uintmax_t iters = 200;
    auto r = boost::math::tools::brent_find_minima([&](double x) { return -f(x); }, a, b, 40, iters);
    best = std::max(best, -r.second);
  }
  return best;
}

}  // namespace

ConditionReport check_family_conditions(const KernelFamily& family, std::span<const double> deltas,
                                        double lambda_window, double tol) {
  if (deltas.empty()) throw InvalidInput("deltas must be non-empty");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require_positive(deltas[i], "delta");
    if (i > 0 && !(deltas[i] > deltas[i - 1])) throw InvalidInput("deltas must be ascending");
  }
  require_positive(lambda_window, "lambda_window");
  require_positive(tol, "tol");

  ConditionReport r;
  r.deltas.assign(deltas.begin(), deltas.end());
  r.lambda_window = lambda_window;
  r.tol = tol;
  const double c = family.c;

  for (double d : deltas) {
    const Kernel g = family(d);
    r.l2_norms.push_back(g.l2_norm());

    const double radius = std::min(g.effective_support(), 1e6);
    double asym = 0.0;
    for (int i = 0; i < 1024; ++i) {
      const double t = radius * i / 1023.0;
      asym = std::max(asym, std::abs(g(t) - g(-t)));
    }
    r.asymmetry.push_back(asym);

    const double span = std::min(g.spectral_extent(), 50.0 * std::max(d, lambda_window));
    auto mag = [&](double l) { return std::abs(g.transform(l)); };
    r.transform_sup.push_back(std::max(grid_max(mag, -span, span, 8193),
                                       grid_max(mag, -lambda_window, lambda_window, 2049)));

    auto dev = [&](double l) { return std::abs(g.transform(l) - c); };
    r.window_deviation.push_back(grid_max(dev, -lambda_window, lambda_window, 2049));
  }

  const double max_l2 = *std::max_element(r.l2_norms.begin(), r.l2_norms.end());
  r.finite_l2 = {std::all_of(r.l2_norms.begin(), r.l2_norms.end(),
                             [](double v) { return std::isfinite(v); }),
                 max_l2, "largest L2 norm over the sampled deltas"};

  const double max_asym = *std::max_element(r.asymmetry.begin(), r.asymmetry.end());
  r.evenness = {max_asym <= tol, max_asym, "max |g(t) - g(-t)| over the test grid"};

  r.family_sup = *std::max_element(r.transform_sup.begin(), r.transform_sup.end());
  r.bounded_transform = {std::isfinite(r.family_sup), r.family_sup,
                         "max over deltas of sup |g*(lambda)|"};

  bool monotone = true;
  for (std::size_t i = 0; i + 1 < r.window_deviation.size(); ++i) {
    if (r.window_deviation[i + 1] > r.window_deviation[i] * (1.0 + 1e-12) + 1e-15) monotone = false;
  }
  const double last = r.window_deviation.back();
  r.delta_like = {monotone && last <= tol, last,
                  monotone ? "deviation at the largest delta" : "deviation not monotone in delta"};
  return r;
}

WeightedSpectral check_weighted_spectral(const Kernel& k, double exponent, double lambda_max,
                                         double rel_change_tol) {
  if (!std::isfinite(exponent) || exponent <= 1.0)
    throw InvalidParameter("exponent must exceed 1");
  require_positive(lambda_max, "lambda_max");
  auto integrand = [&](double l) {
    return std::norm(k.transform(l)) * std::pow(std::log1p(std::abs(l)), exponent);
  };
  const quad::Tolerance tol{1e-14, 1e-10, 20000};
  auto run = [&](double L) {
    const auto pts = quad::symmetric_partition(L, k.spectral_breakpoints());
    return quad::adaptive(integrand, std::span<const double>(pts), tol).value;
  };
  WeightedSpectral w;
  w.value = run(lambda_max);
  w.doubled_value = run(2.0 * lambda_max);
  const double change = std::abs(w.doubled_value - w.value);
  w.converged = std::isfinite(w.doubled_value) &&
                change <= rel_change_tol * std::max(std::abs(w.doubled_value), 1e-300);
  if (w.value == 0.0 && w.doubled_value == 0.0) w.converged = true;
  return w;
}

double autocorrelation(const Kernel& k, double lag) {
  const auto dom = detail::joint_domain({&k});
  auto integrand = [&](double l) {
    const cplx t = k.transform(l);
    return (std::polar(1.0, l * lag) * t * t).real();
  };
  const quad::Tolerance tol{1e-13, 1e-12, 20000};
  return quad::adaptive(integrand, std::span<const double>(dom.points), tol).value / (2.0 * pi);
}

}  // namespace xcorr
