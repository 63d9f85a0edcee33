#include "xcorr/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/tools/minima.hpp>

#include "xcorr/errors.hpp"

namespace xcorr {

using std::numbers::sqrt2;

std::string to_string(BoundMethod m) {
  switch (m) {
    case BoundMethod::theorem3_pointwise: return "theorem3_pointwise";
    case BoundMethod::theorem4_sup: return "theorem4_sup";
    case BoundMethod::corollary1: return "corollary1";
    case BoundMethod::corollary2: return "corollary2";
  }
  return "unknown";
}

nlohmann::ordered_json to_json(const TailBoundReport& r) {
  nlohmann::ordered_json j;
  j["method"] = to_string(r.method);
  j["x"] = r.x_values;
  j["bound"] = r.bound_values;
  j["raw"] = r.raw_values;
  nlohmann::ordered_json c = nlohmann::ordered_json::object();
  for (const auto& [k, v] : r.constants) c[k] = v;
  j["constants"] = c;
  j["settings"] = r.settings;
  j["degenerate"] = r.degenerate;
  if (!r.note.empty()) j["note"] = r.note;
  return j;
}

double k_of_x(double x) {
  if (!(x >= 0.0)) throw InvalidParameter("K(x) needs x >= 0");
  return std::sqrt(1.0 + sqrt2 * x) * std::exp(-x / sqrt2);
}

double two_k_inverse(double tail) {
  if (!(tail > 0.0 && tail <= 2.0)) throw InvalidParameter("tail probability must lie in (0, 2]");
  if (tail == 2.0) return 0.0;
  double lo = 0.0, hi = 1.0;
  while (2.0 * k_of_x(hi) > tail) {
    lo = hi;
    hi *= 2.0;
    if (hi > 1e6) throw NumericalConsistencyError("cannot bracket the K inverse");
  }
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (2.0 * k_of_x(mid) > tail) lo = mid; else hi = mid;
  }
  return 0.5 * (lo + hi);
}

double pointwise_ci(double var_hat, double T, double confidence) {
  if (!(var_hat >= 0.0) || !std::isfinite(var_hat)) throw InvalidParameter("var_hat must be >= 0");
  if (!(T > 0.0)) throw InvalidParameter("T must be positive");
  if (!(confidence >= 0.0 && confidence < 1.0))
    throw InvalidParameter("confidence must lie in [0, 1)");
  const double u = two_k_inverse(1.0 - confidence);
  return u * std::sqrt(var_hat / T);
}

TailBoundReport theorem3_report(double var_hat, std::span<const double> x_values) {
  if (!(var_hat >= 0.0)) throw InvalidParameter("var_hat must be >= 0");
  TailBoundReport r;
  r.method = BoundMethod::theorem3_pointwise;
  r.x_values.assign(x_values.begin(), x_values.end());
  r.constants["var_Z"] = var_hat;
  if (var_hat == 0.0) {
    r.degenerate = true;
    r.note = "zero variance: Z_hat vanishes at this lag, relative interval is unbounded";
  }
  for (double x : x_values) {
    if (!(x > 0.0)) throw InvalidParameter("x values must be positive");
    const double raw = var_hat == 0.0 ? 0.0 : 2.0 * k_of_x(x / std::sqrt(var_hat));
    r.raw_values.push_back(raw);
    r.bound_values.push_back(std::min(raw, 1.0));
  }
  return r;
}

namespace {

Extremum minimize_on_grid(const std::function<double(double)>& f, double a, double b, int points) {
  Extremum best{std::numeric_limits<double>::infinity(), a};
  int best_i = 0;
  const double step = (b - a) / (points - 1);
  for (int i = 0; i < points; ++i) {
    const double t = i == points - 1 ? b : a + step * i;
    const double v = f(t);
    if (v < best.value) {
      best = {v, t};
      best_i = i;
    }
  }
  const double lo = a + step * std::max(best_i - 1, 0);
  const double hi = std::min(b, a + step * std::min(best_i + 1, points - 1));
  if (hi > lo) {
    std::uintmax_t iters = 200;
    const auto r = boost::math::tools::brent_find_minima(f, lo, hi, 40, iters);
    if (r.second < best.value) best = {r.second, r.first};
  }
  return best;
}

void require_interval(double a, double b) {
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b))
    throw InvalidInput("interval needs finite a < b");
}

}  // namespace

Extremum autocorrelation_infimum(const Kernel& h, double a, double b) {
  require_interval(a, b);
  return minimize_on_grid([&](double t) { return autocorrelation(h, 2.0 * t); }, a, b, 401);
}

double b_squared(const Kernel& h, double a, double b, double tau) {
  const auto inf = autocorrelation_infimum(h, a, b);
  return std::max(0.0, autocorrelation(h, 2.0 * tau) - inf.value);
}

double b_function(const Kernel& h, double a, double b, double tau) {
  return std::sqrt(b_squared(h, a, b, tau));
}

double sup_b(const Kernel& h, double a, double b) {
  const auto inf = autocorrelation_infimum(h, a, b);
  const auto neg = minimize_on_grid([&](double t) { return -autocorrelation(h, 2.0 * t); }, a, b, 401);
  return std::sqrt(std::max(0.0, -neg.value - inf.value));
}

double b_constant(const Kernel& h, double a, double b) {
  const double n = h.l2_norm();
  return 16.0 * n * n - 16.0 * autocorrelation_infimum(h, a, b).value;
}

namespace {

double corollary2_value(double B, double x, const TailFunction& y_tail, bool& degenerate) {
  if (!(x > 0.0)) throw InvalidParameter("x must be positive");
  const double first = 2.0 * y_tail(x / (2.0 * sqrt2));
  degenerate = !(B > 0.0);
  const double second = degenerate ? 0.0 : 4.0 * std::exp(-x * x / B);
  return first + second;
}

}  // namespace

double corollary2_bound(const Kernel& h, double a, double b, double x, const TailFunction& y_tail,
                        bool* degenerate) {
  bool d = false;
  const double v = corollary2_value(b_constant(h, a, b), x, y_tail, d);
  if (degenerate) *degenerate = d;
  return v;
}

TailBoundReport corollary2_report(const Kernel& h, double a, double b,
                                  std::span<const double> x_values, const TailFunction& y_tail) {
  TailBoundReport r;
  r.method = BoundMethod::corollary2;
  const auto inf = autocorrelation_infimum(h, a, b);
  const double n = h.l2_norm();
  const double B = 16.0 * n * n - 16.0 * inf.value;
  r.constants["B_ab"] = B;
  r.constants["inf_autocorrelation"] = inf.value;
  r.constants["argmin_tau"] = inf.argument;
  r.x_values.assign(x_values.begin(), x_values.end());
  for (double x : x_values) {
    bool d = false;
    const double raw = corollary2_value(B, x, y_tail, d);
    r.degenerate = r.degenerate || d;
    r.raw_values.push_back(raw);
    r.bound_values.push_back(std::min(raw, 1.0));
  }
  if (r.degenerate) r.note = "B_ab <= 0: Gaussian term dropped";
  return r;
}

double corollary1_bound(double x, double gamma, const TailFunction& y_onesided_tail, double sup_b) {
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw InvalidParameter("gamma must lie in [0, 1]");
  if (!(x > 0.0)) throw InvalidParameter("x must be positive");
  if (!(sup_b >= 0.0)) throw InvalidParameter("sup_b must be nonnegative");
  const double first = 2.0 * y_onesided_tail(gamma * x / sqrt2);
  const double y = (1.0 - gamma) * x;
  // P{ξ·s > y} for standard normal ξ; zero when s = 0 and y ≥ 0.
  const double second = sup_b > 0.0 ? std::erfc(y / (sup_b * sqrt2)) : 0.0;
  return first + second;
}

TailBoundReport corollary1_report(const Kernel& h, double a, double b, double gamma,
                                  std::span<const double> x_values,
                                  const TailFunction& y_onesided_tail) {
  TailBoundReport r;
  r.method = BoundMethod::corollary1;
  const double sb = sup_b(h, a, b);
  r.constants["sup_b"] = sb;
  r.constants["gamma"] = gamma;
  r.x_values.assign(x_values.begin(), x_values.end());
  for (double x : x_values) {
    const double raw = corollary1_bound(x, gamma, y_onesided_tail, sb);
    r.raw_values.push_back(raw);
    r.bound_values.push_back(std::min(raw, 1.0));
  }
  return r;
}

namespace {

double transform_sup(const Kernel& g) {
  const double L = std::min(g.spectral_extent(), 1e3);
  double best = std::abs(g.transform(0.0));
  for (int i = 0; i <= 4096; ++i) best = std::max(best, std::abs(g.transform(-L + 2.0 * L * i / 4096)));
  return best;
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) v[i] = i == n - 1 ? b : a + (b - a) * i / (n - 1);
  return v;
}

}  // namespace

Theorem4Constants theorem4_constants(const CovarianceModel& model, double T, double a, double b,
                                     const Theorem4Options& opts) {
  require_interval(a, b);
  if (!model.g) throw InvalidInput("theorem 4 needs the estimator kernel g");
  if (opts.variance_points < 2 || opts.exact_points < 2)
    throw InvalidParameter("grids need at least two points");
  Theorem4Constants k;
  k.C_r = c_r(opts.r);
  k.g_family_sup = opts.g_family_sup ? *opts.g_family_sup : transform_sup(*model.g);

  std::optional<Pseudometric> p;
  if (opts.mode == RhoMode::surrogate) {
    k.rho_upper_factor = opts.rho_upper_factor;
    p = Pseudometric::rho_upper(model.h, k.g_family_sup, model.c, model.quadrature,
                                opts.rho_upper_factor);
    k.sup_rho = p->profile_table(b - a)->running_max.back();
  } else {
    const auto lat = linspace(a, b, opts.exact_points);
    p = Pseudometric::rho_exact(model, T, lat);
    for (double s : lat)
      for (double t : lat) k.sup_rho = std::max(k.sup_rho, (*p)(s, t));
  }
  k.eps_TDelta = epsilon_T_delta(opts.r, k.sup_rho);
  if (!(k.sup_rho > 0.0)) throw DegenerateBound("rho vanishes on [a, b]: Theta is empty");

  const double e2 = std::exp(2.0);
  auto big_cover = [&](double theta) {
    const auto c = covering_number(*p, a, b, theta * k.eps_TDelta);
    return c.infinite || static_cast<double>(c.count) > e2 - 1.0;
  };
  if (big_cover(1.0)) {
    k.theta_star = 1.0;
  } else {
    double lo = 0.5;
    while (!big_cover(lo)) {
      lo *= 0.5;
      if (lo < 1e-12) throw DegenerateBound("N(theta*eps) <= e^2 - 1 for all theta: Theta is empty");
    }
    double hi = std::min(1.0, 2.0 * lo);
    for (int it = 0; it < 200 && hi - lo > 1e-10; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (big_cover(mid)) lo = mid; else hi = mid;
    }
    k.theta_star = lo;
  }

  const auto ent = integrate_covering(
      *p, a, b, k.sup_rho, [](double N) { return std::log1p(N); }, opts.entropy);
  k.entropy_divergent = ent.divergent;
  if (ent.divergent) throw BoundUnavailable("entropy integral of rho is flagged divergent");
  const CumulativeIntegral cum(ent);
  const double s = std::sqrt(std::numbers::ln2 / k.C_r);
  auto J = [&](double theta) {
    return e2 / (theta * (1.0 - theta)) * cum(theta * k.sup_rho) / s;
  };
  const double top = k.theta_star < 1.0 ? k.theta_star : 1.0 - 1e-9;
  const double bottom = top * 1e-4;
  double best_t = top, best = J(top);
  constexpr int kThetaGrid = 200;
  int best_i = kThetaGrid - 1;
  for (int i = 0; i < kThetaGrid; ++i) {
    const double t = bottom * std::pow(top / bottom, static_cast<double>(i) / (kThetaGrid - 1));
    const double v = J(t);
    if (v < best) {
      best = v;
      best_t = t;
      best_i = i;
    }
  }
  auto at = [&](int i) {
    i = std::clamp(i, 0, kThetaGrid - 1);
    return bottom * std::pow(top / bottom, static_cast<double>(i) / (kThetaGrid - 1));
  };
  std::uintmax_t iters = 200;
  const auto polish = boost::math::tools::brent_find_minima(J, at(best_i - 1), at(best_i + 1), 40, iters);
  if (polish.second < best) {
    best = polish.second;
    best_t = polish.first;
  }
  k.theta_opt = best_t;
  k.entropy_term = best;

  const auto taus = linspace(a, b, opts.variance_points);
  const Eigen::VectorXd var = cov_finite_diagonal(model, T, taus);
  k.inf_varZ = var.minCoeff();
  k.A_TDelta = std::sqrt(k.C_r / std::numbers::ln2) * std::sqrt(k.inf_varZ) + k.entropy_term;
  return k;
}

double theorem4_bound(const CovarianceModel& model, double T, double a, double b, double r,
                      double x) {
  if (!(x > 0.0)) throw InvalidParameter("x must be positive");
  Theorem4Options o;
  o.r = r;
  const auto k = theorem4_constants(model, T, a, b, o);
  return std::min(1.0, 2.0 * std::exp(-x / k.A_TDelta));
}

TailBoundReport theorem4_report(const Theorem4Constants& k, std::span<const double> x_values) {
  TailBoundReport r;
  r.method = BoundMethod::theorem4_sup;
  r.constants = {{"C_r", k.C_r},           {"eps_TDelta", k.eps_TDelta},
                 {"A_TDelta", k.A_TDelta}, {"inf_varZ", k.inf_varZ},
                 {"theta_star", k.theta_star}, {"theta_opt", k.theta_opt},
                 {"sup_rho", k.sup_rho},   {"entropy_term", k.entropy_term},
                 {"g_family_sup", k.g_family_sup}, {"rho_upper_factor", k.rho_upper_factor}};
  r.x_values.assign(x_values.begin(), x_values.end());
  for (double x : x_values) {
    if (!(x > 0.0)) throw InvalidParameter("x values must be positive");
    const double raw = 2.0 * std::exp(-x / k.A_TDelta);
    r.raw_values.push_back(raw);
    r.bound_values.push_back(std::min(raw, 1.0));
  }
  return r;
}

}  // namespace xcorr
