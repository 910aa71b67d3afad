#pragma once

// Thin layer over Boost.Math quadrature plus the few fixed rules the toolkit
// needs with runtime order (Gauss-Legendre nodes for product rules).

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "hyperwave/core.hpp"

namespace hyperwave::quad {

struct Result {
  double value = 0.0;
  double error = 0.0;

  Result& operator+=(const Result& o) {
    value += o.value;
    error += o.error;
    return *this;
  }
  friend Result operator+(Result a, const Result& b) { return a += b; }
  Result scaled(double c) const { return {c * value, std::abs(c) * error}; }
};

namespace detail {

using Kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
using Gauss = boost::math::quadrature::gauss<double, 10>;

struct Panel {
  double a, b, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

// G10/K21 pair on [a,b]; the error is the scaled |K - G| difference.
template <class F>
Panel panel(F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const auto& x = Kronrod::abscissa();
  const auto& wk = Kronrod::weights();
  const auto& wg = Gauss::weights();
  const double f0 = f(mid);
  double k = f0 * wk[0];
  double g = 0.0;
  // odd Kronrod indices are the embedded Gauss nodes (the 10-point rule has no centre node)
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double fp = f(mid + half * x[i]);
    const double fm = f(mid - half * x[i]);
    k += (fp + fm) * wk[i];
    if (i % 2 == 1) g += (fp + fm) * wg[i / 2];
  }
  const double err = std::max(std::abs(k - g) * half, 1e-15 * std::abs(k * half));
  return {a, b, k * half, err};
}

}  // namespace detail

/// Globally adaptive Gauss-Kronrod (G10/K21) on a finite interval. Stops when
/// the summed panel error drops below max(abs_tol, rel_tol * |value|).
template <class F>
Result gk(F&& f, double a, double b, double rel_tol = 1e-10, unsigned max_panels = 4000,
          double abs_tol = 0.0) {
  if (a == b) return {};
  if (b < a) return gk(f, b, a, rel_tol, max_panels, abs_tol).scaled(-1.0);
  std::vector<detail::Panel> heap;
  heap.push_back(detail::panel(f, a, b));
  double value = heap.front().value;
  double error = heap.front().error;
  while (error > std::max(abs_tol, rel_tol * std::abs(value)) && heap.size() < max_panels) {
    std::pop_heap(heap.begin(), heap.end());
    const detail::Panel worst = heap.back();
    heap.pop_back();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      heap.push_back(worst);
      std::push_heap(heap.begin(), heap.end());
      break;
    }
    const detail::Panel l = detail::panel(f, worst.a, mid);
    const detail::Panel r = detail::panel(f, mid, worst.b);
    value += l.value + r.value - worst.value;
    heap.push_back(l);
    std::push_heap(heap.begin(), heap.end());
    heap.push_back(r);
    std::push_heap(heap.begin(), heap.end());
    error = 0.0;
    for (const auto& p : heap) error += p.error;
  }
  // resum to limit drift from the incremental updates
  value = 0.0;
  for (const auto& p : heap) value += p.value;
  return {value, error};
}

/// Adaptive Gauss-Kronrod over consecutive breakpoints.
template <class F>
Result gk_pieces(F&& f, const std::vector<double>& breaks, double rel_tol = 1e-10) {
  Result r;
  for (std::size_t i = 0; i + 1 < breaks.size(); ++i) {
    if (breaks[i + 1] > breaks[i]) r += gk(f, breaks[i], breaks[i + 1], rel_tol);
  }
  return r;
}

/// int_a^b (x-a)^p g(x) dx for p > -1, computed with x = a + (b-a) v^{1/(1+p)},
/// which turns the weight into a constant and leaves g smooth in v.
template <class G>
Result left_power(G&& g, double a, double b, double p, double rel_tol = 1e-10) {
  if (b <= a) return {};
  const double q = 1.0 / (1.0 + p);
  const double scale = std::pow(b - a, 1.0 + p) * q;
  auto mapped = [&](double v) { return g(a + (b - a) * std::pow(v, q)); };
  return gk(mapped, 0.0, 1.0, rel_tol).scaled(scale);
}

/// Same as left_power with the weight (b-x)^p at the right endpoint.
template <class G>
Result right_power(G&& g, double a, double b, double p, double rel_tol = 1e-10) {
  if (b <= a) return {};
  const double q = 1.0 / (1.0 + p);
  const double scale = std::pow(b - a, 1.0 + p) * q;
  auto mapped = [&](double v) { return g(b - (b - a) * std::pow(v, q)); };
  return gk(mapped, 0.0, 1.0, rel_tol).scaled(scale);
}

/// Double-exponential rule on [a,b] for integrands with endpoint singularities.
template <class F>
Result tanh_sinh(F&& f, double a, double b, double rel_tol = 1e-10) {
  if (a == b) return {};
  thread_local boost::math::quadrature::tanh_sinh<double> rule(12);
  double err = 0.0;
  double l1 = 0.0;
  const double v = rule.integrate(f, a, b, rel_tol, &err, &l1);
  return {v, err + 1e-15 * l1};
}

/// Exponential-sinh rule on [a, +inf) for smooth, non-oscillatory decaying integrands.
template <class F>
Result exp_sinh(F&& f, double a, double rel_tol = 1e-10) {
  thread_local boost::math::quadrature::exp_sinh<double> rule(12);
  double err = 0.0;
  double l1 = 0.0;
  const double v =
      rule.integrate(f, a, std::numeric_limits<double>::infinity(), rel_tol, &err, &l1);
  return {v, err + 1e-15 * l1};
}

/// Gauss-Legendre nodes and weights on [-1,1].
struct Rule {
  std::vector<double> x;
  std::vector<double> w;
};

inline Rule gauss_legendre(int n) {
  Rule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double z = std::cos(constants::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = z;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      if (n == 1) p0 = 1.0, p1 = z;
      dp = n * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    r.x[i] = -z;
    r.x[n - 1 - i] = z;
    r.w[i] = r.w[n - 1 - i] = 2.0 / ((1.0 - z * z) * dp * dp);
  }
  return r;
}

}  // namespace hyperwave::quad
