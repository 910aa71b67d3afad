#pragma once

// Well-posedness decisions: the condition integral int (1+|xi|^2)^{-(3-a0)/2} mu(dxi),
// Dalang's integral, and the radial (Stieltjes) reduction they are built on.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "hyperwave/core.hpp"
#include "hyperwave/quadrature.hpp"
#include "hyperwave/spectral.hpp"

namespace hyperwave::condition {

using spectral::MeasureKind;
using spectral::NoiseModel;
using spectral::SpectralMeasure;

enum class Status { finite, divergent, inconclusive };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::finite: return "finite";
    case Status::divergent: return "divergent";
    case Status::inconclusive: return "inconclusive";
  }
  return "?";
}

/// Contribution of 2^k <= |xi| < 2^{k+1}; k = -1 stands for the core ball |xi| < 1.
struct Shell {
  int k = 0;
  double mass = 0.0;
  double error = 0.0;
};

struct ConvergenceVerdict {
  Status status = Status::inconclusive;
  std::optional<double> value;
  double error = 0.0;
  std::vector<Shell> shells;
  std::optional<double> fitted_tail_exponent;  // d log S / d log r over the fit window
  bool analytic = false;                       // decided by homogeneity, not by shells
  std::string note;
};

struct ShellOptions {
  int k_max = 20;  // outermost radius 2^{k_max}
  int window = 8;
  double delta = 0.05 * std::log(2.0);
  double quad_tol = 1e-11;
  unsigned max_panels = 20000;
};

using Profile = std::function<double(double)>;

namespace detail {

inline quad::Result core_integral(const SpectralMeasure& mu, const Profile& f, double tol) {
  if (auto alpha = mu.homogeneity_order()) {
    // int_{|xi|<1} f dmu = m int_0^1 f(u^{1/alpha}) du
    const double a = *alpha;
    auto g = [&](double u) { return f(std::pow(u, 1.0 / a)); };
    return quad::gk(g, 0.0, 1.0, tol, 20000).scaled(mu.unit_ball_mass());
  }
  auto g = [&](double r) { return f(r) * mu.mass_derivative(r); };
  return quad::tanh_sinh(g, 0.0, 1.0, tol);
}

// relative to the shell itself, or absolute against the running total when that is looser
inline quad::Result shell_integral(const SpectralMeasure& mu, const Profile& f, int k, const ShellOptions& o,
                                   double abs_tol = 0.0) {
  const double lo = std::ldexp(1.0, k);
  const double hi = 2.0 * lo;
  auto g = [&](double r) { return f(r) * mu.mass_derivative(r); };
  return quad::gk(g, lo, hi, o.quad_tol, o.max_panels, abs_tol);
}

struct Fit {
  double slope = 0.0;   // per shell, natural log
  double spread = std::numeric_limits<double>::infinity();  // largest deviation of a consecutive log ratio from the slope
  bool nondecreasing = false;
  bool vanishing = false;
};

inline Fit fit_tail(const std::vector<Shell>& shells, int window) {
  Fit fit;
  const std::size_t n = shells.size();
  const std::size_t w = std::min<std::size_t>(window, n);
  const auto first = shells.end() - static_cast<std::ptrdiff_t>(w);
  if (std::all_of(first, shells.end(), [](const Shell& s) { return s.mass <= 0.0; })) {
    fit.vanishing = true;
    return fit;
  }
  fit.nondecreasing = true;
  for (auto it = first + 1; it != shells.end(); ++it) {
    if (it->mass < (it - 1)->mass * (1.0 - 1e-9)) fit.nondecreasing = false;
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto it = first; it != shells.end(); ++it) {
    const double x = it->k;
    const double y = std::log(std::max(it->mass, std::numeric_limits<double>::min()));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double m = static_cast<double>(w);
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  if (std::all_of(first, shells.end(), [](const Shell& s) { return s.mass > 0.0; })) {
    fit.spread = 0.0;
    for (auto it = first + 1; it != shells.end(); ++it)
      fit.spread = std::max(fit.spread, std::abs(std::log(it->mass / (it - 1)->mass) - fit.slope));
  }
  return fit;
}

struct Classification {
  Status status = Status::inconclusive;
  double tail = 0.0;
  double tail_error = 0.0;
  bool clean = false;  // shells follow one geometric ratio
  std::optional<double> exponent;
};

inline Classification classify(const std::vector<Shell>& shells, double sum, double tol, const ShellOptions& o) {
  Classification c;
  if (static_cast<int>(shells.size()) < o.window) return c;
  const Fit fit = fit_tail(shells, o.window);
  if (fit.vanishing) {
    c.status = Status::finite;
    return c;
  }
  c.exponent = fit.slope / std::log(2.0);
  if (fit.nondecreasing || fit.slope >= 0.0) {
    c.status = Status::divergent;
    return c;
  }
  if (fit.slope <= -o.delta) {
    const double q = std::exp(fit.slope);
    const double last = shells.back().mass;
    c.tail = last * q / (1.0 - q);
    // a clean geometric tail is summed; otherwise the whole tail counts as error
    c.tail_error = c.tail;
    c.clean = fit.spread <= 1e-3 * std::abs(fit.slope);
    if (c.clean) c.tail_error = std::min(c.tail, last * q * fit.spread / ((1.0 - q) * (1.0 - q)));
    if (c.tail_error <= tol * std::abs(sum)) c.status = Status::finite;
  }
  return c;
}

inline double shell_mass_atomic(const SpectralMeasure& mu, const Profile& f, double lo, double hi) {
  double s = 0.0;
  for (const auto& a : mu.atoms()) {
    const double r = a.radius();
    if (r >= lo && r < hi) s += a.weight * f(r);
  }
  return s;
}

}  // namespace detail

/// Sum over dyadic shells of int f(|xi|) mu(dxi), classified by the decay of the
/// shell contributions. With `stop_early`, stops once the extrapolated tail is below tol.
inline ConvergenceVerdict shell_decision(const SpectralMeasure& mu, const Profile& f, double tol,
                                         const ShellOptions& o = {}, bool stop_early = false) {
  require(tol > 0.0, "tolerance must be positive");
  ConvergenceVerdict v;
  double sum = 0.0;
  double err = 0.0;

  if (mu.kind() == MeasureKind::atomic) {
    const double core = detail::shell_mass_atomic(mu, f, 0.0, 1.0);
    v.shells.push_back({-1, core, 0.0});
    sum = core;
    double r_top = 1.0;
    for (const auto& a : mu.atoms()) r_top = std::max(r_top, a.radius());
    const int k_top = static_cast<int>(std::floor(std::log2(r_top)));
    for (int k = 0; k <= k_top; ++k) {
      const double m = detail::shell_mass_atomic(mu, f, std::ldexp(1.0, k), std::ldexp(1.0, k + 1));
      v.shells.push_back({k, m, 0.0});
      sum += m;
    }
    const auto cut = mu.truncation_radius();
    if (!cut) {
      v.status = Status::finite;
      v.value = sum;
      v.note = "finite atom list: exact sum";
      return v;
    }
    v.value = sum;
    v.status = Status::inconclusive;
    v.note = "lattice truncated at radius " + std::to_string(*cut) +
             "; partial sum only, no homogeneity to extrapolate the tail";
    return v;
  }

  const auto core = detail::core_integral(mu, f, o.quad_tol);
  v.shells.push_back({-1, core.value, core.error});
  sum = core.value;
  err = core.error;
  detail::Classification c;
  for (int k = 0; k < o.k_max; ++k) {
    const auto s = detail::shell_integral(mu, f, k, o, o.quad_tol * std::abs(sum));
    v.shells.push_back({k, s.value, s.error});
    sum += s.value;
    err += s.error;
    if (stop_early && k + 1 >= o.window) {
      std::vector<Shell> outer(v.shells.begin() + 1, v.shells.end());
      c = detail::classify(outer, sum, tol, o);
      if (c.status == Status::finite) break;
    }
  }
  std::vector<Shell> outer(v.shells.begin() + 1, v.shells.end());
  c = detail::classify(outer, sum, tol, o);
  // a clean geometric decay decides finiteness even when its tail is not below tol
  if (c.status == Status::inconclusive && c.clean) c.status = Status::finite;
  v.status = c.status;
  v.fitted_tail_exponent = c.exponent;
  if (c.status == Status::finite) {
    v.value = sum + c.tail;
    v.error = err + c.tail_error;
  } else if (c.status == Status::inconclusive) {
    v.value = sum;
    v.error = err;
    v.note = "shell decay too slow to certify the tail below tol by radius 2^" + std::to_string(o.k_max);
  }
  return v;
}

/// int_{R^d} f(|xi|) mu(dxi) as the 1-d Stieltjes integral int_0^inf f(r) d mu(B(0,r)).
inline Estimate spherical_reduce(const SpectralMeasure& mu, const Profile& f, double tol = 1e-9) {
  require(tol > 0.0, "tolerance must be positive");
  if (mu.kind() == MeasureKind::atomic) {
    if (mu.truncation_radius()) throw Unsupported("truncated lattice measure: the radial integral has no tail");
    double s = 0.0;
    for (const auto& a : mu.atoms()) s += a.weight * f(a.radius());
    return {s, 0.0, 0, Method::closed_form};
  }
  if (!mu.is_radial() && !mu.homogeneity_order())
    throw Unsupported("spherical reduction needs a radial or homogeneous measure");
  ShellOptions o;
  o.k_max = 60;
  const auto v = shell_decision(mu, f, tol, o, true);
  if (v.status != Status::finite)
    throw QuadratureError("radial integral did not converge (" + to_string(v.status) + ")",
                          std::numeric_limits<double>::infinity());
  return {*v.value, v.error, 0, Method::quadrature};
}

// ---------------------------------------------------------------------------
// Homogeneous measures
// ---------------------------------------------------------------------------

/// True iff a0 + alpha < 3.
inline bool homogeneous_decision(double alpha0, double alpha) {
  require(alpha0 >= 0.0 && alpha0 < 1.0, "alpha0 must lie in [0, 1)");
  require(alpha > 0.0 && alpha <= 3.0, "alpha must lie in (0, d] with d <= 3");
  return alpha0 + alpha < 3.0;
}

namespace detail {

// alpha m int_0^inf r^{alpha-1} (1+r^2)^{-beta/2} dr, finite for alpha < beta
inline quad::Result homogeneous_power_integral(double alpha, double mass, double beta, double tol) {
  auto g = [beta](double x) { return std::pow(1.0 + x * x, -0.5 * beta); };
  const auto lo = quad::left_power(g, 0.0, 1.0, alpha - 1.0, tol);
  const auto hi = quad::left_power(g, 0.0, 1.0, beta - alpha - 1.0, tol);
  return (lo + hi).scaled(alpha * mass);
}

inline ConvergenceVerdict power_verdict(const SpectralMeasure& mu, double beta, double tol) {
  const double alpha = *mu.homogeneity_order();
  ConvergenceVerdict v;
  v.analytic = true;
  // shell diagnostics, which must reproduce the exponent alpha - beta
  ShellOptions o;
  o.k_max = 12;
  auto f = [beta](double r) { return std::pow(1.0 + r * r, -0.5 * beta); };
  if (mu.kind() != MeasureKind::atomic) {
    const auto diag = shell_decision(mu, f, tol, o);
    v.shells = diag.shells;
    v.fitted_tail_exponent = diag.fitted_tail_exponent;
  }
  if (alpha < beta) {
    v.status = Status::finite;
    if (mu.kind() == MeasureKind::atomic) {
      double s = 0.0;
      for (const auto& a : mu.atoms()) s += a.weight * f(a.radius());
      const double r = *mu.truncation_radius();
      // homogeneous tail beyond the truncation radius
      const auto tail = quad::left_power(
          [&](double x) { return std::pow(x * x + r * r, -0.5 * beta); }, 0.0, 1.0,
          beta - alpha - 1.0, tol);
      double w_max = 0.0;
      for (const auto& a : mu.atoms()) w_max = std::max(w_max, a.weight);
      const double scale = alpha * mu.unit_ball_mass() * std::pow(r, alpha);
      // one lattice layer of spacing w_max^{1/alpha} at the cut
      const double layer = scale / r * std::pow(w_max, 1.0 / alpha) * f(r);
      v.value = s + tail.value * scale;
      v.error = tail.error * scale + layer;
      v.note = "lattice sum inside the truncation radius plus continuum tail";
      return v;
    }
    const auto q = homogeneous_power_integral(alpha, mu.unit_ball_mass(), beta, tol);
    if (!(q.error <= 10.0 * tol * std::abs(q.value)))
      throw QuadratureError("homogeneous radial integral", q.error);
    v.value = q.value;
    v.error = q.error;
    return v;
  }
  v.status = Status::divergent;
  v.note = "homogeneous tail exponent alpha - " + std::to_string(beta) + " is nonnegative";
  return v;
}

inline ConvergenceVerdict power_integral(const SpectralMeasure& mu, double beta, double tol) {
  if (mu.homogeneity_order() && (mu.kind() != MeasureKind::atomic || mu.truncation_radius()))
    return power_verdict(mu, beta, tol);
  auto f = [beta](double r) { return std::pow(1.0 + r * r, -0.5 * beta); };
  return shell_decision(mu, f, tol);
}

}  // namespace detail

/// int (1 + |xi|^2)^{-(3 - a0)/2} mu(dxi).
inline ConvergenceVerdict condition_integral(const NoiseModel& model, double tol = 1e-8) {
  require(tol > 0.0, "tolerance must be positive");
  return detail::power_integral(model.measure, 3.0 - model.alpha0, tol);
}

/// int (1 + |xi|^2)^{-1} mu(dxi).
inline ConvergenceVerdict dalang_integral(const NoiseModel& model, double tol = 1e-8) {
  require(tol > 0.0, "tolerance must be positive");
  return detail::power_integral(model.measure, 2.0, tol);
}

/// int (1 + |xi|^2)^{-2} mu(dxi): finiteness of the time-independent first chaos.
inline ConvergenceVerdict first_chaos_integral(const NoiseModel& model, double tol = 1e-8) {
  require(tol > 0.0, "tolerance must be positive");
  return detail::power_integral(model.measure, 4.0, tol);
}

}  // namespace hyperwave::condition
