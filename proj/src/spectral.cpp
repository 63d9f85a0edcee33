#include "xcorr/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/quadrature/gauss.hpp>

#include "spectral_domain.hpp"
#include "xcorr/errors.hpp"
#include "xcorr/quadrature.hpp"

namespace xcorr {

using cplx = std::complex<double>;
using std::numbers::pi;

namespace {

constexpr double kTwoDimTol = 1e-6;

void require_T(double T) {
  if (!std::isfinite(T) || T <= 0.0) throw InvalidParameter("T must be finite and positive");
}

detail::FrequencyDomain domain_for(std::initializer_list<const Kernel*> ks,
                                   const QuadratureSettings& q) {
  auto dom = detail::joint_domain(ks);
  if (q.lambda_max > 0.0 && q.lambda_max < dom.extent) {
    std::vector<double> extra;
    for (const Kernel* k : ks) {
      auto bp = k->spectral_breakpoints();
      extra.insert(extra.end(), bp.begin(), bp.end());
    }
    dom.extent = q.lambda_max;
    dom.points = quad::symmetric_partition(dom.extent, extra);
  }
  return dom;
}

template <class F>
double integrate_1d(F&& f, const detail::FrequencyDomain& dom, const QuadratureSettings& q) {
  const quad::Tolerance tol{q.abs_tol, q.rel_tol, 50000};
  return quad::adaptive(std::forward<F>(f), std::span<const double>(dom.points), tol).value;
}

}  // namespace

double clamp_nonnegative(double v, double slack, const char* what) {
  if (v >= 0.0) return v;
  if (v >= -slack) return 0.0;
  throw NumericalConsistencyError(std::string(what) + " is negative beyond tolerance (" +
                                  std::to_string(v) + ")");
}

double fejer(double T, double lambda) {
  require_T(T);
  const double half = 0.5 * lambda;
  if (std::abs(T * half) < 1e-8) return T / (2.0 * pi);
  const double s = std::sin(T * half) / half;
  return s * s / (2.0 * pi * T);
}

namespace {

// ∫ Φ_T(u) F(u) du: Fejér lobes |u| ≤ U₁ = 2πK/T explicitly, beyond that the
// lobe average Φ_T ≈ 1/(πT u²), mapped to s = U₁/|u| ∈ (0, 1].
template <class F>
auto fejer_weighted(F&& f, double T, const QuadratureSettings& q, double abs_tol, double rel_tol) {
  using V = std::decay_t<decltype(f(0.0))>;
  const int K = std::max(q.fejer_lobes, 8);
  const double U1 = 2.0 * pi * K / T;
  std::vector<double> lobes;
  lobes.reserve(2 * K + 1);
  for (int k = -K; k <= K; ++k) lobes.push_back(2.0 * pi * k / T);
  auto core = [&](double u) -> V { return f(u) * fejer(T, u); };
  auto tail = [&](double s) -> V {
    const double u = U1 / s;
    V sum = f(u);
    sum = sum + f(-u);
    return sum * (1.0 / (pi * T * U1));
  };
  std::vector<double> tail_pts{0.0};
  for (double s = 1.0 / 1024.0; s < 1.0; s *= 2.0) tail_pts.push_back(s);
  tail_pts.push_back(1.0);

  const quad::Tolerance tol{abs_tol, rel_tol, 200000};
  if (q.rule == QuadratureRule::fixed_grid) {
    V a = quad::gauss_legendre(core, std::span<const double>(lobes), 1);
    V b = quad::gauss_legendre(tail, std::span<const double>(tail_pts), 4);
    return V(a + b);
  }
  V a = quad::adaptive(core, std::span<const double>(lobes), tol).value;
  V b = quad::adaptive(tail, std::span<const double>(tail_pts), tol).value;
  return V(a + b);
}

}  // namespace

double fejer_integral(double T, const QuadratureSettings& q) {
  require_T(T);
  return fejer_weighted([](double) { return 1.0; }, T, q, 1e-13, 1e-12);
}

double sigma_squared(const Kernel& h, double tau, const QuadratureSettings& q) {
  if (tau == 0.0) return 0.0;
  const auto dom = domain_for({&h}, q);
  auto f = [&](double l) {
    const double s = std::sin(0.5 * tau * l);
    return std::norm(h.transform(l)) * s * s;
  };
  QuadratureSettings rel = q;
  rel.abs_tol = 0.0;
  return integrate_1d(f, dom, rel);
}

double sigma(const Kernel& h, double tau, const QuadratureSettings& q) {
  return std::sqrt(std::max(sigma_squared(h, tau, q), 0.0));
}

double msq_increment_Y(const Kernel& h, double tau1, double tau2, const QuadratureSettings& q) {
  return 2.0 / pi * sigma_squared(h, tau2 - tau1, q);
}

double covariance_Y(const Kernel& h, double lag, const QuadratureSettings& q) {
  const auto dom = domain_for({&h}, q);
  auto f = [&](double l) { return std::cos(lag * l) * std::norm(h.transform(l)); };
  return integrate_1d(f, dom, q) / (2.0 * pi);
}

double cross_covariance(const Kernel& h, const Kernel& g, double lag,
                        const QuadratureSettings& q) {
  const auto dom = domain_for({&h, &g}, q);
  auto f = [&](double l) {
    return (std::polar(1.0, lag * l) * h.transform(l) * std::conj(g.transform(l))).real();
  };
  return integrate_1d(f, dom, q) / (2.0 * pi);
}

Eigen::MatrixXd cov_limit_matrix(const Kernel& h, std::span<const double> taus,
                                 const QuadratureSettings& q) {
  const auto L = static_cast<Eigen::Index>(taus.size());
  const auto dom = domain_for({&h}, q);
  auto f = [&](double l) {
    const cplx t = h.transform(l);
    const double p = std::norm(t);
    const cplx t2 = t * t;
    Eigen::VectorXcd v(L * L);
    for (Eigen::Index i = 0; i < L; ++i) {
      for (Eigen::Index j = 0; j < L; ++j) {
        v(i + L * j) = std::polar(1.0, (taus[i] - taus[j]) * l) * p +
                       std::polar(1.0, (taus[i] + taus[j]) * l) * t2;
      }
    }
    return v;
  };
  const quad::Tolerance tol{q.abs_tol * 1e-2, q.rel_tol * 1e-2, 50000};
  Eigen::VectorXcd r = quad::adaptive(f, std::span<const double>(dom.points), tol).value;
  r /= 2.0 * pi;
  const double imag = r.imag().cwiseAbs().maxCoeff();
  if (imag > q.abs_tol * std::max(1.0, r.real().cwiseAbs().maxCoeff()) * 10.0)
    throw NumericalConsistencyError("limit covariance has an imaginary residue of " +
                                    std::to_string(imag));
  Eigen::MatrixXd C = Eigen::Map<Eigen::MatrixXcd>(r.data(), L, L).real();
  return 0.5 * (C + C.transpose());
}

double cov_limit(const Kernel& h, double tau1, double tau2, const QuadratureSettings& q) {
  const double t[2] = {tau1, tau2};
  if (tau1 == tau2) return cov_limit_matrix(h, std::span<const double>(t, 1), q)(0, 0);
  return cov_limit_matrix(h, t, q)(0, 1);
}

namespace {

// Inner frequency integral of the finite-T covariance for one value of u.
class InnerIntegrand {
 public:
  InnerIntegrand(const Kernel& h, const Kernel& g, std::span<const double> taus,
                 const QuadratureSettings& q, bool diagonal_only = false)
      : h_(h), g_(g), taus_(taus.begin(), taus.end()), diagonal_only_(diagonal_only) {
    const auto dom = domain_for({&h, &g}, q);
    extent_ = dom.extent;
    if (auto b = h.band_limit()) extent_ = std::min(extent_, *b);
    for (const Kernel* k : {&h, &g}) {
      auto bp = k->spectral_breakpoints();
      breaks_.insert(breaks_.end(), bp.begin(), bp.end());
    }
    double tmax = 0.0;
    for (double t : taus_) tmax = std::max(tmax, std::abs(t));
    subdivisions_ = 1 + static_cast<int>(std::ceil(tmax / 4.0));
  }

  Eigen::VectorXcd operator()(double u) const {
    using boost::math::quadrature::gauss;
    const auto& xs = gauss<double, 16>::abscissa();
    const auto& ws = gauss<double, 16>::weights();

    std::vector<double> extra = breaks_;
    for (double b : breaks_) extra.push_back(b + u);
    if (auto b = h_.band_limit()) {
      extra.push_back(u - *b);
      extra.push_back(u + *b);
    }
    const auto pts = quad::symmetric_partition(extent_, extra);

    std::vector<double> mu, w;
    mu.reserve(pts.size() * 32 * subdivisions_);
    for (std::size_t p = 0; p + 1 < pts.size(); ++p) {
      const double step = (pts[p + 1] - pts[p]) / subdivisions_;
      for (int s = 0; s < subdivisions_; ++s) {
        const double half = 0.5 * step;
        const double center = pts[p] + (s + 0.5) * step;
        for (std::size_t k = 0; k < xs.size(); ++k) {
          const double off = half * xs[k];
          mu.push_back(center - off);
          w.push_back(ws[k] * half);
          if (off != 0.0) {
            mu.push_back(center + off);
            w.push_back(ws[k] * half);
          }
        }
      }
    }

    const auto N = static_cast<Eigen::Index>(mu.size());
    const auto L = static_cast<Eigen::Index>(taus_.size());
    Eigen::VectorXcd w1(N), w2(N);
    Eigen::MatrixXcd A(L, N), B(L, N);
    for (Eigen::Index k = 0; k < N; ++k) {
      const double m = mu[k];
      const cplx hm = h_.transform(m), hs = h_.transform(m - u);
      const cplx gm = g_.transform(m), gs = g_.transform(m - u);
      w1(k) = w[k] * std::norm(hm) * std::norm(gs);
      w2(k) = w[k] * hm * hs * std::conj(gm * gs);
      for (Eigen::Index i = 0; i < L; ++i) {
        A(i, k) = std::polar(1.0, taus_[i] * m);
        B(i, k) = std::polar(1.0, taus_[i] * (m - u));
      }
    }
    if (diagonal_only_) {
      Eigen::VectorXcd d(L);
      for (Eigen::Index i = 0; i < L; ++i)
        d(i) = w1.sum() + (A.row(i).array() * B.row(i).array() * w2.transpose().array()).sum();
      return d;
    }
    Eigen::MatrixXcd Aw1 = A * w1.asDiagonal();
    Eigen::MatrixXcd Aw2 = A * w2.asDiagonal();
    Eigen::MatrixXcd F = Aw1 * A.adjoint() + Aw2 * B.transpose();
    return Eigen::Map<Eigen::VectorXcd>(F.data(), L * L);
  }

 private:
  const Kernel& h_;
  const Kernel& g_;
  std::vector<double> taus_;
  std::vector<double> breaks_;
  double extent_ = 0.0;
  int subdivisions_ = 1;
  bool diagonal_only_ = false;
};

const Kernel& require_g(const CovarianceModel& m) {
  if (!m.g) throw InvalidInput("covariance model needs the estimator kernel g");
  if (!(m.c > 0.0)) throw InvalidParameter("c must be positive");
  return *m.g;
}

}  // namespace

Eigen::MatrixXd cov_finite_matrix(const CovarianceModel& model, double T,
                                  std::span<const double> taus) {
  require_T(T);
  const Kernel& g = require_g(model);
  if (taus.empty()) throw InvalidInput("tau grid is empty");
  const auto L = static_cast<Eigen::Index>(taus.size());
  InnerIntegrand F(model.h, g, taus, model.quadrature);
  Eigen::VectorXcd r = fejer_weighted(F, T, model.quadrature, 1e-12, 1e-9);
  r /= 2.0 * pi * model.c * model.c;

  Eigen::MatrixXcd C = Eigen::Map<Eigen::MatrixXcd>(r.data(), L, L);
  const double scale = std::max(1.0, C.real().cwiseAbs().maxCoeff());
  const double imag = C.imag().cwiseAbs().maxCoeff();
  if (imag > kTwoDimTol * scale)
    throw NumericalConsistencyError("finite-T covariance has an imaginary residue of " +
                                    std::to_string(imag));
  Eigen::MatrixXd R = C.real();
  const double asym = (R - R.transpose()).cwiseAbs().maxCoeff();
  if (asym > kTwoDimTol * scale)
    throw NumericalConsistencyError("finite-T covariance is not symmetric (" +
                                    std::to_string(asym) + ")");
  R = 0.5 * (R + R.transpose());
  for (Eigen::Index i = 0; i < L; ++i)
    R(i, i) = clamp_nonnegative(R(i, i), kTwoDimTol * scale, "variance of Z_hat");
  return R;
}

Eigen::VectorXd cov_finite_diagonal(const CovarianceModel& model, double T,
                                    std::span<const double> taus) {
  require_T(T);
  const Kernel& g = require_g(model);
  if (taus.empty()) throw InvalidInput("tau grid is empty");
  InnerIntegrand F(model.h, g, taus, model.quadrature, true);
  Eigen::VectorXcd r = fejer_weighted(F, T, model.quadrature, 1e-12, 1e-9);
  r /= 2.0 * pi * model.c * model.c;
  const double scale = std::max(1.0, r.real().cwiseAbs().maxCoeff());
  const double imag = r.imag().cwiseAbs().maxCoeff();
  if (imag > kTwoDimTol * scale)
    throw NumericalConsistencyError("finite-T variance has an imaginary residue of " +
                                    std::to_string(imag));
  Eigen::VectorXd v = r.real();
  for (Eigen::Index i = 0; i < v.size(); ++i)
    v(i) = clamp_nonnegative(v(i), kTwoDimTol * scale, "variance of Z_hat");
  return v;
}

double cov_finite(const CovarianceModel& model, double T, double tau1, double tau2) {
  const double t[2] = {tau1, tau2};
  if (tau1 == tau2) return cov_finite_matrix(model, T, std::span<const double>(t, 1))(0, 0);
  return cov_finite_matrix(model, T, t)(0, 1);
}

double cov_finite_lag_domain(const CovarianceModel& model, double T, double tau1, double tau2) {
  require_T(T);
  const Kernel& g = require_g(model);
  const Kernel& h = model.h;
  QuadratureSettings inner = model.quadrature;
  inner.abs_tol = 1e-12;
  inner.rel_tol = 1e-11;
  auto f = [&](double v) {
    const double w = 1.0 - std::abs(v) / T;
    const double a = covariance_Y(h, v + tau1 - tau2, inner) * covariance_Y(g, v, inner);
    const double b = cross_covariance(h, g, v + tau1, inner) * cross_covariance(h, g, tau2 - v, inner);
    return w * (a + b);
  };
  std::vector<double> pts{-T, T, 0.0, -tau1, tau2};
  const double r = g.effective_support();
  for (double p : {r, 2.0 * r}) {
    pts.push_back(p);
    pts.push_back(-p);
  }
  for (double p = 1.0; p < T; p *= 2.0) {
    pts.push_back(p);
    pts.push_back(-p);
  }
  std::erase_if(pts, [&](double p) { return p < -T || p > T; });
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  const quad::Tolerance tol{1e-10, 1e-9, 20000};
  return quad::adaptive(f, std::span<const double>(pts), tol).value / (model.c * model.c);
}

Eigen::MatrixXd rho_exact_matrix(const CovarianceModel& model, double T,
                                 std::span<const double> taus) {
  const Eigen::MatrixXd C = cov_finite_matrix(model, T, taus);
  const auto L = C.rows();
  const double scale = std::max(1.0, C.diagonal().maxCoeff());
  Eigen::MatrixXd R = Eigen::MatrixXd::Zero(L, L);
  for (Eigen::Index i = 0; i < L; ++i) {
    for (Eigen::Index j = i + 1; j < L; ++j) {
      const double d2 = clamp_nonnegative(C(i, i) + C(j, j) - 2.0 * C(i, j), kTwoDimTol * scale,
                                          "squared increment of Z_hat");
      R(i, j) = R(j, i) = std::sqrt(d2);
    }
  }
  return R;
}

double rho_exact(const CovarianceModel& model, double T, double tau1, double tau2) {
  if (tau1 == tau2) {
    require_T(T);
    return 0.0;
  }
  const double t[2] = {tau1, tau2};
  return rho_exact_matrix(model, T, t)(0, 1);
}

double rho_upper(const Kernel& h, double g_family_sup, double c, double tau1, double tau2,
                 const QuadratureSettings& q) {
  if (!(c > 0.0)) throw InvalidParameter("c must be positive");
  if (!(g_family_sup >= 0.0)) throw InvalidParameter("g_family_sup must be nonnegative");
  const double ftf_norm = std::sqrt(2.0 * pi) * h.l2_norm();
  return std::sqrt(2.0 / pi * ftf_norm) * g_family_sup * std::sqrt(sigma(h, tau1, tau2, q)) / c;
}

double rho_uniform_bound(const Kernel& h, double g_family_sup, double c) {
  if (!(c > 0.0)) throw InvalidParameter("c must be positive");
  return 2.0 / c * h.l2_norm() * g_family_sup;
}

IncrementBound dZ_bound_check(const Kernel& h, double tau1, double tau2,
                              const QuadratureSettings& q) {
  IncrementBound r;
  if (tau1 == tau2) return r;
  const double t[2] = {tau1, tau2};
  const Eigen::MatrixXd C = cov_limit_matrix(h, t, q);
  const double d2 = clamp_nonnegative(C(0, 0) + C(1, 1) - 2.0 * C(0, 1),
                                      q.abs_tol * 100.0, "squared increment of Z");
  r.dZ = std::sqrt(d2);
  r.bound = 2.0 / std::sqrt(pi) * sigma(h, tau1, tau2, q);
  if (r.dZ > r.bound + std::max(q.abs_tol, 1e-8))
    throw NumericalConsistencyError("increment bound violated: dZ=" + std::to_string(r.dZ) +
                                    " > " + std::to_string(r.bound));
  return r;
}

}  // namespace xcorr
