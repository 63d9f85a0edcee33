#include "xcorr/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>

#include "format.hpp"
#include "xcorr/errors.hpp"

namespace xcorr {

std::string to_string(PseudometricKind k) {
  switch (k) {
    case PseudometricKind::uniform_d: return "uniform_d";
    case PseudometricKind::sigma: return "sigma";
    case PseudometricKind::sqrt_sigma: return "sqrt_sigma";
    case PseudometricKind::rho_upper: return "rho_upper";
    case PseudometricKind::rho_exact: return "rho_exact";
    case PseudometricKind::custom: return "custom";
  }
  return "custom";
}

struct Pseudometric::State {
  PseudometricKind kind = PseudometricKind::custom;
  std::string name;
  std::function<double(double)> profile;          // set for translation-invariant kinds
  std::function<double(double, double)> dist;     // set otherwise
  std::vector<double> lattice;
  mutable std::mutex mutex;
  mutable std::map<double, std::shared_ptr<const Table>> tables;
};

namespace {

constexpr std::size_t kProfilePoints = 4096;

std::shared_ptr<Pseudometric::State> make_state(PseudometricKind kind, std::string name) {
  auto s = std::make_shared<Pseudometric::State>();
  s->kind = kind;
  s->name = std::move(name);
  return s;
}

}  // namespace

Pseudometric Pseudometric::uniform() {
  auto s = make_state(PseudometricKind::uniform_d, "uniform_d");
  s->profile = [](double u) { return std::abs(u); };
  return Pseudometric(s);
}

Pseudometric Pseudometric::sigma(Kernel h, QuadratureSettings q) {
  auto s = make_state(PseudometricKind::sigma, "sigma");
  s->profile = [h = std::move(h), q](double u) { return xcorr::sigma(h, u, q); };
  return Pseudometric(s);
}

Pseudometric Pseudometric::sqrt_sigma(Kernel h, QuadratureSettings q) {
  auto s = make_state(PseudometricKind::sqrt_sigma, "sqrt_sigma");
  s->profile = [h = std::move(h), q](double u) { return std::sqrt(xcorr::sigma(h, u, q)); };
  return Pseudometric(s);
}

Pseudometric Pseudometric::rho_upper(Kernel h, double g_family_sup, double c, QuadratureSettings q,
                                     double factor) {
  if (!(c > 0.0)) throw InvalidParameter("c must be positive");
  if (!(factor > 0.0)) throw InvalidParameter("factor must be positive");
  auto s = make_state(PseudometricKind::rho_upper, "rho_upper");
  s->profile = [h = std::move(h), g_family_sup, c, q, factor](double u) {
    return factor * xcorr::rho_upper(h, g_family_sup, c, 0.0, u, q);
  };
  return Pseudometric(s);
}

Pseudometric Pseudometric::rho_exact(const CovarianceModel& model, double T,
                                     std::vector<double> lattice) {
  if (lattice.size() < 2) throw InvalidInput("rho_exact lattice needs at least two points");
  std::sort(lattice.begin(), lattice.end());
  auto R = std::make_shared<Eigen::MatrixXd>(rho_exact_matrix(model, T, lattice));
  auto s = make_state(PseudometricKind::rho_exact, "rho_exact");
  s->lattice = lattice;
  s->dist = [R, lat = lattice](double t1, double t2) {
    auto nearest = [&](double t) {
      auto it = std::lower_bound(lat.begin(), lat.end(), t);
      if (it == lat.end()) return lat.size() - 1;
      const auto i = static_cast<std::size_t>(it - lat.begin());
      if (i > 0 && t - lat[i - 1] < *it - t) return i - 1;
      return i;
    };
    return (*R)(static_cast<Eigen::Index>(nearest(t1)), static_cast<Eigen::Index>(nearest(t2)));
  };
  return Pseudometric(s);
}

Pseudometric Pseudometric::translation_invariant(std::string name,
                                                 std::function<double(double)> profile) {
  auto s = make_state(PseudometricKind::custom, std::move(name));
  s->profile = std::move(profile);
  return Pseudometric(s);
}

Pseudometric Pseudometric::general(std::string name, std::function<double(double, double)> dist) {
  auto s = make_state(PseudometricKind::custom, std::move(name));
  s->dist = std::move(dist);
  return Pseudometric(s);
}

double Pseudometric::operator()(double t1, double t2) const {
  if (state_->profile) return state_->profile(std::abs(t2 - t1));
  return state_->dist(t1, t2);
}

PseudometricKind Pseudometric::kind() const { return state_->kind; }
const std::string& Pseudometric::name() const { return state_->name; }
bool Pseudometric::translation_invariant() const { return static_cast<bool>(state_->profile); }
std::span<const double> Pseudometric::lattice() const { return state_->lattice; }

double Pseudometric::profile(double u) const {
  if (!state_->profile) throw InvalidInput("pseudometric '" + name() + "' has no profile");
  return state_->profile(std::abs(u));
}

std::shared_ptr<const Pseudometric::Table> Pseudometric::profile_table(double span) const {
  if (!(span > 0.0)) throw InvalidParameter("profile span must be positive");
  {
    std::lock_guard lock(state_->mutex);
    auto it = state_->tables.find(span);
    if (it != state_->tables.end()) return it->second;
  }
  auto t = std::make_shared<Table>();
  t->span = span;
  t->u.resize(kProfilePoints);
  t->value.resize(kProfilePoints);
  t->running_max.resize(kProfilePoints);
  double m = 0.0;
  for (std::size_t i = 0; i < kProfilePoints; ++i) {
    t->u[i] = span * static_cast<double>(i) / (kProfilePoints - 1);
    t->value[i] = profile(t->u[i]);
    m = std::max(m, t->value[i]);
    t->running_max[i] = m;
  }
  std::lock_guard lock(state_->mutex);
  return state_->tables.emplace(span, std::move(t)).first->second;
}

Covering greedy_covering(const Pseudometric& p, std::span<const double> points, double eps) {
  if (points.empty()) throw InvalidInput("greedy covering needs at least one point");
  if (!(eps > 0.0)) throw InvalidParameter("eps must be positive");
  Covering c;
  c.upper_bound_only = true;
  std::vector<double> nearest(points.size(), std::numeric_limits<double>::infinity());
  std::size_t next = 0;
  while (true) {
    ++c.count;
    const double centre = points[next];
    double far = -1.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
      nearest[i] = std::min(nearest[i], p(centre, points[i]));
      if (nearest[i] > far) {
        far = nearest[i];
        next = i;
      }
    }
    if (far <= eps) {
      c.achieved_radius = far;
      break;
    }
  }
  return c;
}

Covering covering_number(const Pseudometric& p, double a, double b, double eps) {
  if (!(a < b)) throw InvalidInput("covering interval needs a < b");
  if (!(eps > 0.0)) throw InvalidParameter("eps must be positive");
  const double span = b - a;

  if (!p.translation_invariant()) {
    std::vector<double> pts;
    for (double t : p.lattice()) {
      if (t >= a - 1e-12 && t <= b + 1e-12) pts.push_back(t);
    }
    if (pts.empty()) {
      constexpr int kGreedyPoints = 513;
      for (int i = 0; i < kGreedyPoints; ++i) pts.push_back(a + span * i / (kGreedyPoints - 1));
    }
    return greedy_covering(p, pts, eps);
  }

  const auto table = p.profile_table(span);
  const auto& rm = table->running_max;
  Covering c;
  const auto first_above = std::upper_bound(rm.begin(), rm.end(), eps);
  double delta;
  if (first_above == rm.end()) {
    delta = span;
  } else {
    const auto i = static_cast<std::size_t>(first_above - rm.begin());
    // The profile stays ≤ ε up to u[i−1] and exceeds it by u[i]; locate the
    // first crossing inside that cell.
    double lo = table->u[i - 1], hi = table->u[i];
    for (int it = 0; it < 200 && hi - lo > 1e-13 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (p.profile(mid) <= eps) lo = mid; else hi = mid;
    }
    delta = lo;
  }
  if (!(delta > 0.0)) {
    c.infinite = true;
    c.count = std::numeric_limits<std::size_t>::max();
    return c;
  }
  const double ratio = span / (2.0 * delta);
  c.count = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(ratio - 1e-9)));
  return c;
}

EntropyProfile entropy_profile(const Pseudometric& p, double a, double b,
                               std::span<const double> epsilons) {
  EntropyProfile e;
  e.a = a;
  e.b = b;
  e.epsilons.assign(epsilons.begin(), epsilons.end());
  std::sort(e.epsilons.begin(), e.epsilons.end(), std::greater<>());
  for (double eps : e.epsilons) {
    const auto c = covering_number(p, a, b, eps);
    e.covering_numbers.push_back(c.count);
    e.entropies.push_back(c.infinite ? std::numeric_limits<double>::infinity()
                                     : std::log(static_cast<double>(c.count)));
  }
  return e;
}

void write_entropy_profile(const EntropyProfile& e, const std::filesystem::path& csv) {
  std::ofstream out(csv);
  if (!out) throw InvalidInput("cannot write " + csv.string());
  out << "eps,N,H\n";
  for (std::size_t i = 0; i < e.epsilons.size(); ++i) {
    out << detail::format_double(e.epsilons[i]) << ',' << e.covering_numbers[i] << ','
        << detail::format_double(e.entropies[i]) << '\n';
  }
}

namespace {

// Least-squares slope of y against x.
double fit_slope(std::span<const double> x, std::span<const double> y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  return den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
}

}  // namespace

EntropyIntegral integrate_covering(const Pseudometric& p, double a, double b, double u,
                                   const std::function<double(double)>& transform,
                                   const EntropyGrid& grid) {
  if (!(u > 0.0) || !std::isfinite(u)) throw InvalidParameter("upper limit must be positive");
  if (grid.decades < 2 || grid.points_per_decade < 2) throw InvalidParameter("entropy grid too coarse");
  EntropyIntegral r;
  const int n = grid.decades * grid.points_per_decade + 1;
  r.epsilons.resize(n);
  r.integrand.resize(n);
  for (int i = 0; i < n; ++i) {
    const double expo = -grid.decades + static_cast<double>(i) / grid.points_per_decade;
    r.epsilons[i] = u * std::pow(10.0, expo);
  }
  r.epsilons.back() = u;
  for (int i = n - 1; i >= 0; --i) {
    const auto c = covering_number(p, a, b, r.epsilons[i]);
    if (c.infinite) {
      r.divergent = true;
      r.value = std::numeric_limits<double>::infinity();
      r.integrand[i] = std::numeric_limits<double>::infinity();
      for (int j = i - 1; j >= 0; --j) r.integrand[j] = r.integrand[i];
      return r;
    }
    r.integrand[i] = transform(static_cast<double>(c.count));
  }

  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i)
    sum += 0.5 * (r.integrand[i] + r.integrand[i + 1]) * (r.epsilons[i + 1] - r.epsilons[i]);

  // Growth over the two smallest decades: f ≈ α + β ln(1/ε) for the tail,
  // ln f against ln ε for the divergence heuristic.
  const int m = 2 * grid.points_per_decade + 1;
  std::vector<double> le, lf, f;
  for (int i = 0; i < m; ++i) {
    le.push_back(std::log(r.epsilons[i]));
    f.push_back(r.integrand[i]);
  }
  std::vector<double> neg_le(le.size());
  std::transform(le.begin(), le.end(), neg_le.begin(), [](double v) { return -v; });
  const double beta = std::max(0.0, fit_slope(neg_le, f));
  const bool positive = std::all_of(f.begin(), f.end(), [](double v) { return v > 0.0; });
  if (positive) {
    for (double v : f) lf.push_back(std::log(v));
    r.fitted_slope = fit_slope(le, lf);
    if (r.fitted_slope <= -1.0 + grid.divergence_margin) r.divergent = true;
  }
  r.tail = r.epsilons.front() * (r.integrand.front() + beta);
  r.value = r.divergent ? std::numeric_limits<double>::infinity() : sum + r.tail;
  return r;
}

EntropyIntegral entropy_integral(const Pseudometric& p, double a, double b, double u, double power,
                                 const EntropyGrid& grid) {
  if (!(power > 0.0)) throw InvalidParameter("power must be positive");
  return integrate_covering(
      p, a, b, u, [power](double N) { return std::pow(std::log(N), power); }, grid);
}

CumulativeIntegral::CumulativeIntegral(const EntropyIntegral& e)
    : eps_(e.epsilons), f_(e.integrand), tail_(e.tail) {
  cum_.assign(eps_.size(), tail_);
  for (std::size_t i = 1; i < eps_.size(); ++i)
    cum_[i] = cum_[i - 1] + 0.5 * (f_[i] + f_[i - 1]) * (eps_[i] - eps_[i - 1]);
}

double CumulativeIntegral::operator()(double x) const {
  if (eps_.empty() || x <= 0.0) return 0.0;
  if (x <= eps_.front()) return tail_ * x / eps_.front();
  if (x >= eps_.back()) return cum_.back() + f_.back() * (x - eps_.back());
  const auto i = static_cast<std::size_t>(std::upper_bound(eps_.begin(), eps_.end(), x) - eps_.begin());
  const double w = (x - eps_[i - 1]) / (eps_[i] - eps_[i - 1]);
  const double fx = f_[i - 1] + w * (f_[i] - f_[i - 1]);
  return cum_[i - 1] + 0.5 * (f_[i - 1] + fx) * (x - eps_[i - 1]);
}

double c_r(double r) {
  if (!(r > 0.0 && r < 1.0)) throw InvalidParameter("r must lie in (0, 1)");
  if (r < 1e-3) return 0.5 + r / 3.0 + r * r / 4.0 + r * r * r / 5.0 + r * r * r * r / 6.0;
  return -std::log1p(-r) / (r * r) - 1.0 / r;
}

double epsilon_T_delta(double r, double sup_rho) {
  if (!(sup_rho >= 0.0)) throw InvalidParameter("sup_rho must be nonnegative");
  return std::sqrt(c_r(r) / std::numbers::ln2) * sup_rho;
}

}  // namespace xcorr
