#pragma once

// Adaptive and fixed quadrature shared by the spectral, kernel and entropy code.
// Integrands may return double, std::complex<double> or an Eigen column vector;
// the vector form lets one sweep of nodes feed a whole covariance matrix.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <queue>
#include <span>
#include <vector>

#include <Eigen/Core>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace xcorr::quad {

struct Tolerance {
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  std::size_t max_segments = 20000;
};

template <class V>
struct Result {
  V value{};
  double error = 0.0;
  std::size_t evaluations = 0;
  bool converged = true;
};

inline double magnitude(double v) { return std::abs(v); }
inline double magnitude(const std::complex<double>& v) { return std::abs(v); }
template <class Derived>
double magnitude(const Eigen::MatrixBase<Derived>& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

namespace detail {

template <class V>
V zero_like(const V& proto) {
  if constexpr (std::is_arithmetic_v<V>) {
    return V{0};
  } else if constexpr (std::is_same_v<V, std::complex<double>>) {
    return V{0.0, 0.0};
  } else {
    return V::Zero(proto.rows(), proto.cols());
  }
}

template <class V>
struct Segment {
  double a;
  double b;
  V value;
  double error;
};

// One G7-K15 panel on [a, b].
template <class F>
auto gk15(F& f, double a, double b) {
  using V = std::decay_t<decltype(f(a))>;
  using boost::math::quadrature::gauss;
  using boost::math::quadrature::gauss_kronrod;
  const auto& xk = gauss_kronrod<double, 15>::abscissa();
  const auto& wk = gauss_kronrod<double, 15>::weights();
  const auto& wg = gauss<double, 7>::weights();

  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  V fc = f(center);
  V kron = fc * wk[0];
  V gaus = fc * wg[0];
  for (std::size_t i = 1; i < xk.size(); ++i) {
    const double dx = half * xk[i];
    V pair = f(center - dx);
    pair = pair + f(center + dx);
    kron = kron + pair * wk[i];
    // Gauss nodes sit at the even Kronrod indices.
    if (i % 2 == 0) gaus = gaus + pair * wg[i / 2];
  }
  V diff = kron - gaus;
  return Segment<V>{a, b, kron * half, magnitude(diff) * std::abs(half)};
}

}  // namespace detail

/// Globally adaptive G7-K15 over the partition given by `points`
/// (sorted, at least two entries). Integrable endpoint singularities are fine
/// since the rule never evaluates at interval ends.
template <class F>
auto adaptive(F&& f, std::span<const double> points, const Tolerance& tol = {}) {
  using V = std::decay_t<decltype(f(points[0]))>;
  using Seg = detail::Segment<V>;
  auto cmp = [](const Seg& x, const Seg& y) { return x.error < y.error; };
  std::priority_queue<Seg, std::vector<Seg>, decltype(cmp)> heap(cmp);

  Result<V> out;
  double total_error = 0.0;
  V total{};
  bool first = true;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    if (!(points[i + 1] > points[i])) continue;
    Seg s = detail::gk15(f, points[i], points[i + 1]);
    out.evaluations += 15;
    total_error += s.error;
    total = first ? s.value : V(total + s.value);
    first = false;
    heap.push(std::move(s));
  }
  if (first) {
    out.value = detail::zero_like(f(points[0]));
    return out;
  }

  while (total_error > std::max(tol.abs_tol, tol.rel_tol * magnitude(total)) &&
         heap.size() < tol.max_segments) {
    Seg worst = heap.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) break;
    heap.pop();
    Seg left = detail::gk15(f, worst.a, mid);
    Seg right = detail::gk15(f, mid, worst.b);
    out.evaluations += 30;
    total = total - worst.value + left.value + right.value;
    total_error += left.error + right.error - worst.error;
    heap.push(std::move(left));
    heap.push(std::move(right));
  }

  // Re-sum in left-to-right order so the result does not carry the drift of
  // the running updates and is independent of the refinement history order.
  std::vector<Seg> segs;
  segs.reserve(heap.size());
  while (!heap.empty()) {
    segs.push_back(heap.top());
    heap.pop();
  }
  std::sort(segs.begin(), segs.end(), [](const Seg& x, const Seg& y) { return x.a < y.a; });
  out.value = segs.front().value;
  out.error = segs.front().error;
  for (std::size_t i = 1; i < segs.size(); ++i) {
    out.value = out.value + segs[i].value;
    out.error += segs[i].error;
  }
  out.converged = out.error <= std::max(tol.abs_tol, tol.rel_tol * magnitude(out.value));
  return out;
}

template <class F>
auto adaptive(F&& f, double a, double b, const Tolerance& tol = {}) {
  const double pts[2] = {a, b};
  return adaptive(std::forward<F>(f), std::span<const double>(pts, 2), tol);
}

/// Composite 16-point Gauss-Legendre over the partition `points`, each panel
/// split into `subdivisions` equal pieces.
template <class F>
auto gauss_legendre(F&& f, std::span<const double> points, int subdivisions = 1) {
  using boost::math::quadrature::gauss;
  using V = std::decay_t<decltype(f(points[0]))>;
  const auto& x = gauss<double, 16>::abscissa();
  const auto& w = gauss<double, 16>::weights();
  V total{};
  bool first = true;
  for (std::size_t i = 0; i + 1 < points.size(); ++i) {
    const double step = (points[i + 1] - points[i]) / subdivisions;
    if (!(step > 0.0)) continue;
    for (int k = 0; k < subdivisions; ++k) {
      const double lo = points[i] + k * step;
      const double center = lo + 0.5 * step;
      const double half = 0.5 * step;
      for (std::size_t j = 0; j < x.size(); ++j) {
        V pair = f(center - half * x[j]);
        pair = pair + f(center + half * x[j]);
        V term = pair * (w[j] * half);
        total = first ? term : V(total + term);
        first = false;
      }
    }
  }
  if (first) return detail::zero_like(f(points[0]));
  return total;
}

/// Breakpoints for a symmetric range [-extent, extent]: 0, ±1, ±2, ±4, ... up to
/// the extent, merged with `extra` (clipped to the range).
std::vector<double> symmetric_partition(double extent, std::span<const double> extra = {});

}  // namespace xcorr::quad
