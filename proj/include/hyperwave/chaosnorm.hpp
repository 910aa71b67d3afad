#pragma once

// Wiener-chaos kernel norms ||f_n(., t, x)||^2 by closed form, deterministic
// quadrature and Monte Carlo, plus the Laplace-bound quantities Phi_p and L_{a0,n}.
//
// Norms use the spectral form of the H inner product. A direct-space integral
// against gamma equals (2 pi)^{-d} times the spectral form per chaos level.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "hyperwave/condition.hpp"
#include "hyperwave/core.hpp"
#include "hyperwave/quadrature.hpp"
#include "hyperwave/rng.hpp"
#include "hyperwave/spectral.hpp"
#include "hyperwave/wavekernel.hpp"

namespace hyperwave::chaos {

using condition::ConvergenceVerdict;
using condition::Status;
using spectral::CovarianceDescriptor;
using spectral::CovarianceKind;
using spectral::MeasureKind;
using spectral::NoiseModel;
using spectral::SpectralMeasure;

struct ChaosKernelSpec {
  int order = 1;
  double t = 1.0;
  NoiseModel model;
  double w_sup = 1.0;  // ||w||_inf; 1 gives the kernels f_n of w = 1

  ChaosKernelSpec(int n, double time, NoiseModel m, double w = 1.0) : order(n), t(time), model(std::move(m)), w_sup(w) {
    require(n >= 1, "chaos order must be at least 1");
    require(time >= 0.0, "time must be nonnegative");
    require(w >= 0.0, "sup of w must be nonnegative");
  }
};

// ---------------------------------------------------------------------------
// Phi_p
// ---------------------------------------------------------------------------

/// |(p - i tau)^2 + eta^2|^2 = 4 p^2 tau^2 + (p^2 + eta^2 - tau^2)^2.
inline double phi_p(double p, double tau, double eta_norm) {
  require(p > 0.0, "p must be positive");
  const long double P = p, T = tau, E = eta_norm;
  const long double c = P * P + E * E - T * T;
  return static_cast<double>(4.0L * P * P * T * T + c * c);
}

// ---------------------------------------------------------------------------
// Per-frequency first-chaos kernels
// ---------------------------------------------------------------------------

namespace detail {

// A(u) = int_0^{t-u} Ghat_{s+u}(rho) Ghat_s(rho) ds
inline double autocorrelation(double t, double rho, double u) {
  const double T = t - u;
  if (rho * t < 1e-2) {
    const double T2 = T * T, T3 = T2 * T;
    const double lead = T3 / 3.0 + 0.5 * u * T2;
    const double next = 0.4 * T3 * T2 + u * T2 * T2 + u * u * T3 + 0.5 * u * u * u * T2;
    return lead - rho * rho / 6.0 * next;
  }
  return (T * std::cos(rho * u) - (std::sin(rho * (2.0 * t - u)) - std::sin(rho * u)) / (2.0 * rho)) /
         (2.0 * rho * rho);
}

// 2 int_0^t u^{-a0} A(u) du with the weight mapped out
inline quad::Result k_time_quadrature(double alpha0, double t, double rho, double tol) {
  auto a = [&](double u) { return autocorrelation(t, rho, u); };
  return quad::left_power(a, 0.0, t, -alpha0, tol).scaled(2.0);
}

// M = int_0^t u^{a-1} e^{i rho u} du by rotating the contour onto the imaginary axis
inline std::complex<double> oscillatory_moment(double a, double t, double rho, double tol) {
  using C = std::complex<double>;
  const C ia = std::polar(1.0, 0.5 * constants::pi * a);
  const C gamma_term = ia * std::tgamma(a) * std::pow(rho, -a);
  auto re = [&](double z) { return (std::pow(C(t, z / rho), a - 1.0) * std::exp(-z)).real(); };
  auto im = [&](double z) { return (std::pow(C(t, z / rho), a - 1.0) * std::exp(-z)).imag(); };
  const double jr = quad::gk(re, 0.0, 50.0, tol).value / rho;
  const double ji = quad::gk(im, 0.0, 50.0, tol).value / rho;
  return gamma_term - C(0.0, 1.0) * std::polar(1.0, rho * t) * C(jr, ji);
}

inline double k_time_moments(double alpha0, double t, double rho, double tol) {
  const auto m0 = oscillatory_moment(1.0 - alpha0, t, rho, tol);
  const auto m1 = oscillatory_moment(2.0 - alpha0, t, rho, tol);
  const double t1 = t * m0.real() - m1.real();
  const double t2 = (std::polar(1.0, 2.0 * rho * t) * std::conj(m0)).imag();
  const double t3 = m0.imag();
  return (t1 - t2 / (2.0 * rho) + t3 / (2.0 * rho)) / (rho * rho);
}

inline constexpr double kMomentThreshold = 8.0;

}  // namespace detail

/// K_t(rho) = int_0^t int_0^t |r-s|^{-a0} Ghat_r(rho) Ghat_s(rho) dr ds.
inline double first_chaos_kernel_time(double alpha0, double t, double rho, double tol = 1e-11) {
  if (t == 0.0) return 0.0;
  if (rho * t > detail::kMomentThreshold) return detail::k_time_moments(alpha0, t, rho, tol);
  return detail::k_time_quadrature(alpha0, t, rho, tol).value;
}

/// (1 - cos(t rho))^2 / rho^4, the time-independent kernel.
inline double first_chaos_kernel_closed(double t, double rho) {
  const double x = t * rho;
  if (std::abs(x) < 1e-3) {
    const double t2 = t * t;
    return 0.25 * t2 * t2 * (1.0 - x * x / 6.0);
  }
  const double s = 2.0 * std::sin(0.5 * x) * std::sin(0.5 * x);
  return s * s / (rho * rho * rho * rho);
}

namespace detail {

// |int_0^t s e^{i lambda s} ds|^2
inline double ramp_fourier_square(double t, double lambda) {
  const double x = lambda * t;
  if (std::abs(x) < 1e-3) {
    const double re = 0.5 * t * t - lambda * lambda * t * t * t * t / 8.0;
    const double im = lambda * t * t * t / 3.0;
    return re * re + im * im;
  }
  const double l2 = lambda * lambda;
  const double re = (std::cos(x) - 1.0) / l2 + t * std::sin(x) / lambda;
  const double im = std::sin(x) / l2 - t * std::cos(x) / lambda;
  return re * re + im * im;
}

inline double fourier_square(double t, double lambda, double rho) {
  if (rho * t < 1e-6) return ramp_fourier_square(t, lambda);
  return wave::fourier_time_square(t, lambda, rho);
}

}  // namespace detail

/// Fourier-side kernel 2 c_{a0} int_0^inf lambda^{a0-1} |int_0^t e^{i lambda s} Ghat_s(rho) ds|^2 dlambda.
inline quad::Result first_chaos_kernel_fourier(double alpha0, double t, double rho, double tol = 1e-10) {
  require(alpha0 > 0.0 && alpha0 < 1.0, "the Fourier route needs alpha0 in (0, 1)");
  if (t == 0.0) return {};
  const double c = constants::c_alpha0(alpha0);
  auto sq = [&](double l) { return detail::fourier_square(t, l, rho); };
  auto weighted = [&](double l) { return std::pow(l, alpha0 - 1.0) * sq(l); };

  const double scale = 1.0 / t;
  const double head = rho > 0.0 ? std::min(0.5 * rho, scale) : scale;
  double lam = std::max(8.0 * rho, 1.0) + 400.0 * scale;

  quad::Result body = quad::left_power(sq, 0.0, head, alpha0 - 1.0, tol);
  std::vector<double> br{head};
  for (double b : {rho - 4.0 * scale, rho, rho + 4.0 * scale, 2.0 * rho + 16.0 * scale}) {
    if (b > head && b < lam) br.push_back(b);
  }
  std::sort(br.begin(), br.end());
  br.push_back(lam);
  body += quad::gk_pieces(weighted, br, tol);

  // beyond lam: the non-oscillatory part of |I|^2 exactly, the oscillatory remainder bounded
  const double r = std::max(rho, 1e-300);
  auto smooth = [&](double l) {
    if (rho * t < 1e-6) return t * t / (l * l);
    const double a = l + rho, b = l - rho;
    const double y = 2.0 * rho / (a * b);
    const double s = std::sin(rho * t);
    return (2.0 * y * y + 4.0 * s * s / (a * b)) / (4.0 * r * r);
  };
  auto tail_mapped = [&](double v) {
    if (v == 0.0) return 0.0;
    const double l = lam / v;
    return std::pow(l, alpha0 - 1.0) * smooth(l) * lam / (v * v);
  };
  quad::Result tail = quad::gk(tail_mapped, 0.0, 1.0, tol);
  double osc_amp;
  if (rho * t < 1e-6) {
    osc_amp = 2.0 * t / (lam * lam * lam);
  } else {
    const double a = lam + rho, b = lam - rho;
    const double y = 2.0 * rho / (a * b);
    const double diff = std::min(1.0 / a + 1.0 / b, 2.0 * rho * (t / b + 1.0 / (b * b)));
    osc_amp = 2.0 * y * diff / (4.0 * r * r);
  }
  tail.error += 2.0 * std::pow(lam, alpha0 - 1.0) * osc_amp / t;
  return (body + tail).scaled(2.0 * c);
}

// ---------------------------------------------------------------------------
// First-chaos norms
// ---------------------------------------------------------------------------

namespace detail {

template <class Kernel>
Estimate integrate_kernel(const SpectralMeasure& mu, Kernel&& k, double tol) {
  if (mu.kind() == MeasureKind::atomic) {
    if (mu.truncation_radius())
      throw Unsupported("truncated lattice measure: the first-chaos norm needs the full measure");
    double s = 0.0;
    double e = 0.0;
    for (const auto& a : mu.atoms()) {
      const quad::Result r = k(a.radius());
      s += a.weight * r.value;
      e += a.weight * r.error;
    }
    return {s, e, 0, Method::quadrature};
  }
  condition::Profile f = [&](double r) { return k(r).value; };
  return condition::spherical_reduce(mu, f, tol);
}

inline void require_first_order(const ChaosKernelSpec& spec) {
  require(spec.order == 1, "this route computes the first chaos only");
}

}  // namespace detail

/// Time-domain route: per frequency, the |r-s|^{-a0} singularity is removed by u = r - s.
inline Estimate first_chaos_norm_time(const ChaosKernelSpec& spec, double tol = 1e-9) {
  detail::require_first_order(spec);
  require(tol > 0.0, "tolerance must be positive");
  const double a0 = spec.model.alpha0;
  const double t = spec.t;
  if (t == 0.0) return {0.0, 0.0, 0, Method::quadrature};
  const double inner = std::clamp(1e-3 * tol, 1e-12, 1e-8);
  auto k = [&](double rho) -> quad::Result {
    if (rho * t > detail::kMomentThreshold) return {detail::k_time_moments(a0, t, rho, inner), 0.0};
    return detail::k_time_quadrature(a0, t, rho, inner);
  };
  Estimate e = detail::integrate_kernel(spec.model.measure, k, tol);
  e.value *= spec.w_sup * spec.w_sup;
  e.error *= spec.w_sup * spec.w_sup;
  return e;
}

/// Fourier route through the |lambda|^{a0-1} representation of |r-s|^{-a0}.
inline Estimate first_chaos_norm_fourier(const ChaosKernelSpec& spec, double tol = 1e-9) {
  detail::require_first_order(spec);
  require(tol > 0.0, "tolerance must be positive");
  const double a0 = spec.model.alpha0;
  if (a0 == 0.0) throw Unsupported("alpha0 = 0 has no Fourier weight; use the closed form");
  if (spec.t == 0.0) return {0.0, 0.0, 0, Method::quadrature};
  const double inner = std::clamp(1e-2 * tol, 1e-11, 1e-8);
  auto k = [&](double rho) { return first_chaos_kernel_fourier(a0, spec.t, rho, inner); };
  Estimate e = detail::integrate_kernel(spec.model.measure, k, tol);
  e.value *= spec.w_sup * spec.w_sup;
  e.error *= spec.w_sup * spec.w_sup;
  return e;
}

/// Time-independent noise: int (1 - cos(t|xi|))^2 / |xi|^4 mu(dxi).
inline Estimate first_chaos_norm_closed_alpha0(const ChaosKernelSpec& spec, double tol = 1e-9) {
  detail::require_first_order(spec);
  if (spec.model.alpha0 != 0.0) throw InvalidParameter("closed form needs alpha0 = 0");
  if (spec.t == 0.0) return {0.0, 0.0, 0, Method::closed_form};
  auto k = [&](double rho) -> quad::Result { return {first_chaos_kernel_closed(spec.t, rho), 0.0}; };
  Estimate e = detail::integrate_kernel(spec.model.measure, k, tol);
  e.value *= spec.w_sup * spec.w_sup;
  e.error *= spec.w_sup * spec.w_sup;
  if (spec.model.measure.kind() == MeasureKind::atomic) e.method = Method::closed_form;
  return e;
}

/// Lower bound C int_{|xi|>=1} |xi|^{a0-3} mu(dxi), C = (c_{a0}/4) int_0^1 ((1 - cos(tau t))/tau)^2 dtau.
inline Estimate first_chaos_lower_bound(const ChaosKernelSpec& spec, double tol = 1e-9) {
  detail::require_first_order(spec);
  const double a0 = spec.model.alpha0;
  require(a0 > 0.0, "the lower bound uses the Fourier weight, alpha0 in (0, 1)");
  const double t = spec.t;
  auto tau_int = [t](double tau) {
    const double v = wave::detail::one_minus_cos_over(tau, t);
    return v * v;
  };
  const double c = 0.25 * constants::c_alpha0(a0) * quad::gk(tau_int, 0.0, 1.0, 1e-13).value;
  const auto& mu = spec.model.measure;
  double outer;
  if (mu.kind() == MeasureKind::atomic) {
    outer = 0.0;
    for (const auto& a : mu.atoms())
      if (a.radius() >= 1.0) outer += a.weight * std::pow(a.radius(), a0 - 3.0);
  } else if (auto alpha = mu.homogeneity_order()) {
    if (*alpha + a0 >= 3.0) throw Unsupported("lower bound is infinite when alpha + alpha0 >= 3");
    outer = *alpha * mu.unit_ball_mass() / (3.0 - *alpha - a0);
  } else {
    condition::Profile f = [a0](double r) { return r >= 1.0 ? std::pow(r, a0 - 3.0) : 0.0; };
    outer = condition::spherical_reduce(mu, f, tol).value;
  }
  return {c * outer * spec.w_sup * spec.w_sup, 0.0, 0, Method::quadrature};
}

// ---------------------------------------------------------------------------
// ||g_n||^2 by Monte Carlo (d = 1)
// ---------------------------------------------------------------------------

namespace detail {

// Density proportional to |u - c|^{-a} on (lo, hi): normalizer and inverse CDF.
struct PowerSampler {
  double c, a;
  double h(double u) const {
    const double z = u - c;
    const double m = std::pow(std::abs(z), 1.0 - a) / (1.0 - a);
    return z < 0.0 ? -m : m;
  }
  double inv(double y) const {
    const double m = std::pow(std::abs(y) * (1.0 - a), 1.0 / (1.0 - a));
    return y < 0.0 ? c - m : c + m;
  }
  // draws u, returns the normalizer
  double draw(double lo, double hi, double unif, double& u) const {
    const double hl = h(lo);
    const double z = h(hi) - hl;
    u = std::clamp(inv(hl + unif * z), lo, hi);
    return z;
  }
};

inline void check_mc_kernel(const CovarianceDescriptor& cov) {
  cov.validate();
  require(cov.dimension == 1, "Monte Carlo norms are implemented for d = 1");
  switch (cov.kind) {
    case CovarianceKind::riesz:
      require(cov.alpha < 1.0, "riesz exponent must be below 1 in d = 1");
      break;
    case CovarianceKind::fractional_sheet: break;
    case CovarianceKind::bessel:
      require(cov.order > 1.0, "bessel kernel must be bounded (order > d)");
      break;
    default: throw Unsupported(spectral::to_string(cov.kind) + " covariance has no pointwise kernel to sample");
  }
}

inline double kernel_exponent(const CovarianceDescriptor& cov) {
  if (cov.kind == CovarianceKind::riesz) return cov.alpha;
  if (cov.kind == CovarianceKind::fractional_sheet) return 2.0 - 2.0 * cov.hurst[0];
  return 0.0;
}

}  // namespace detail

struct GnSampler {
  int n;
  double t;
  double alpha0;
  CovarianceDescriptor cov;
  double spatial_exponent;  // importance-sampled |z|^{-alpha}, 0 for bounded kernels

  GnSampler(int order, double time, double a0, CovarianceDescriptor c)
      : n(order), t(time), alpha0(a0), cov(std::move(c)), spatial_exponent(detail::kernel_exponent(cov)) {}

  /// One unbiased draw of the direct-space norm.
  double operator()(rng::Stream& g) const {
    std::array<double, 3> s{}, sp{}, x{}, xp{};
    for (int k = 0; k < n; ++k) s[k] = t * g.uniform();
    std::sort(s.begin(), s.begin() + n);
    double w = std::pow(t, n) / std::tgamma(n + 1.0);

    // x chain from (t, 0) backwards: uniform on each light-cone slice
    double prev_x = 0.0, prev_t = t;
    for (int k = n - 1; k >= 0; --k) {
      const double dt = prev_t - s[k];
      x[k] = prev_x + dt * (2.0 * g.uniform() - 1.0);
      w *= dt;
      prev_x = x[k];
      prev_t = s[k];
    }
    // ordered s' with density prop. to prod |s'_k - s_k|^{-a0}
    double lo = 0.0;
    for (int k = 0; k < n; ++k) {
      const detail::PowerSampler ps{s[k], alpha0};
      w *= ps.draw(lo, t, g.uniform(), sp[k]);
      lo = sp[k];
    }
    // x' chain, each step prop. to |x'_k - x_k|^{-alpha} inside its cone slice
    prev_x = 0.0;
    prev_t = t;
    for (int k = n - 1; k >= 0; --k) {
      const double dt = prev_t - sp[k];
      if (dt <= 0.0) return 0.0;
      if (spatial_exponent > 0.0) {
        const detail::PowerSampler ps{x[k], spatial_exponent};
        w *= 0.5 * ps.draw(prev_x - dt, prev_x + dt, g.uniform(), xp[k]);
      } else {
        xp[k] = prev_x + dt * (2.0 * g.uniform() - 1.0);
        const double z[1] = {xp[k] - x[k]};
        w *= dt * spectral::gamma_eval(cov, z);
      }
      prev_x = xp[k];
      prev_t = sp[k];
    }
    return w;
  }
};

struct McDiagnostics {
  double stderr_quarter = 0.0, stderr_half = 0.0, stderr_full = 0.0;
};

/// Monte Carlo ||g_n(., t, x)||^2 in spectral normalization, d = 1.
inline Estimate gn_norm_mc(const CovarianceDescriptor& cov, double alpha0, int n, double t, const rng::McConfig& cfg,
                           McDiagnostics* diag = nullptr, std::string_view op = "gn_norm_mc") {
  detail::check_mc_kernel(cov);
  require(n >= 1 && n <= 3, "Monte Carlo norms are implemented for n = 1, 2, 3");
  require(alpha0 >= 0.0 && alpha0 < 1.0, "alpha0 must lie in [0, 1)");
  require(t >= 0.0, "time must be nonnegative");
  if (t == 0.0) return {0.0, 0.0, cfg.samples, Method::mc};
  const GnSampler sampler(n, t, alpha0, cov);
  const std::string tag = std::string(op) + "/n=" + std::to_string(n);
  const auto run = rng::run_chunked(cfg, rng::op_id(tag), [&](rng::Stream& g) { return sampler(g); });

  // stderr over prefixes of 1/4, 1/2 and all chunks must shrink like N^{-1/2}
  McDiagnostics d;
  const std::size_t m = run.chunks.size();
  if (m >= 4) {
    rng::Moments q, h;
    for (std::size_t i = 0; i < m / 4; ++i) q.merge(run.chunks[i]);
    for (std::size_t i = 0; i < m / 2; ++i) h.merge(run.chunks[i]);
    d = {q.stderr_of_mean(), h.stderr_of_mean(), run.total.stderr_of_mean()};
    const double r1 = d.stderr_quarter / d.stderr_half;
    const double r2 = d.stderr_half / d.stderr_full;
    if (r1 < 1.1 && r2 < 1.1)
      throw McDiagnosticError("standard error does not shrink with sample size; variance may be infinite");
  } else {
    d.stderr_full = run.total.stderr_of_mean();
  }
  if (diag) *diag = d;
  const double scale = std::pow(2.0 * constants::pi, n);
  return {scale * run.total.mean, scale * run.total.stderr_of_mean(), run.total.n, Method::mc};
}

// ---------------------------------------------------------------------------
// L_{a0,n}
// ---------------------------------------------------------------------------

/// h_n(r) = int_R |lambda|^{a0-1} / Phi_n(lambda, r) dlambda, or 1/Phi_n(0, r) for a0 = 0.
inline double l_profile(double alpha0, int n, double r, double tol = 1e-12) {
  const double nn = n;
  if (alpha0 == 0.0) {
    const double v = nn * nn + r * r;
    return 1.0 / (v * v);
  }
  auto inv_phi = [&](double l) { return 1.0 / phi_p(nn, l, r); };
  auto weighted = [&](double l) { return std::pow(l, alpha0 - 1.0) * inv_phi(l); };
  const double head = 0.5 * std::min(nn, std::max(r, 0.25 * nn));
  quad::Result res = quad::left_power(inv_phi, 0.0, head, alpha0 - 1.0, tol);
  const double peak = std::sqrt(nn * nn + r * r);
  const double top = 4.0 * (peak + nn);
  std::vector<double> br{head};
  for (double b : {peak - 2.0 * nn, peak, peak + 2.0 * nn}) {
    if (b > head && b < top) br.push_back(b);
  }
  br.push_back(top);
  std::sort(br.begin(), br.end());
  res += quad::gk_pieces(weighted, br, tol);
  auto tail = [&](double v) {
    if (v == 0.0) return 0.0;
    const double l = top / v;
    return std::pow(l, alpha0 - 1.0) * inv_phi(l) * top / (v * v);
  };
  res += quad::gk(tail, 0.0, 1.0, tol);
  return 2.0 * res.value;
}

inline ConvergenceVerdict l_alpha0_n(const NoiseModel& model, int n, double tol = 1e-8) {
  require(n >= 1, "n must be at least 1");
  require(tol > 0.0, "tolerance must be positive");
  const auto& mu = model.measure;
  const double a0 = model.alpha0;
  ConvergenceVerdict v;
  if (auto alpha = mu.homogeneity_order()) {
    if (*alpha + a0 >= 3.0) {
      v.status = Status::divergent;
      v.analytic = true;
      v.note = "alpha + alpha0 >= 3: the frequency integral diverges";
      return v;
    }
  }
  condition::Profile f = [&](double r) { return l_profile(a0, n, r); };
  if (mu.kind() == MeasureKind::atomic) {
    if (mu.truncation_radius()) {
      v.status = Status::inconclusive;
      v.note = "truncated lattice measure";
      return v;
    }
    double s = 0.0;
    for (const auto& a : mu.atoms()) s += a.weight * f(a.radius());
    v.status = Status::finite;
    v.value = s;
    return v;
  }
  condition::ShellOptions o;
  o.k_max = 60;
  return condition::shell_decision(mu, f, tol, o, true);
}

// ---------------------------------------------------------------------------
// Inequality and scaling checks
// ---------------------------------------------------------------------------

enum class Check { holds, fails, inconclusive };

inline std::string to_string(Check c) {
  switch (c) {
    case Check::holds: return "holds";
    case Check::fails: return "fails";
    case Check::inconclusive: return "inconclusive";
  }
  return "?";
}

struct LaplaceReport {
  Check inequality = Check::inconclusive;
  Check monotone = Check::inconclusive;
  double lhs = 0.0, lhs_error = 0.0;
  double rhs = 0.0, rhs_error = 0.0;
  std::vector<std::pair<double, Estimate>> grid;  // (s, ||f_n(., s)||^2)
  bool ok() const { return inequality == Check::holds && monotone == Check::holds; }
};

/// First-chaos norm by the cheapest exact route for the model.
inline Estimate first_chaos_norm(const ChaosKernelSpec& spec, double tol = 1e-9) {
  if (spec.model.alpha0 == 0.0) return first_chaos_norm_closed_alpha0(spec, tol);
  return first_chaos_norm_time(spec, tol);
}

/// 2 int_0^inf e^{-2ps} N(s) ds >= e^{-2pt} N(t) / p and s -> N(s) nondecreasing, N = ||f_1(., s)||^2.
inline LaplaceReport laplace_monotonicity_check(const NoiseModel& model, int n, double t, double p = 0.0,
                                                double tol = 1e-8) {
  require(n == 1, "deterministic norms are available for the first chaos only");
  require(t > 0.0, "time must be positive");
  if (p == 0.0) p = n;
  require(p > 0.0, "p must be positive");
  LaplaceReport rep;
  auto norm_at = [&](double s) { return first_chaos_norm(ChaosKernelSpec(1, s, model), tol); };

  // s = z / (2p): int_0^inf e^{-z} N(z / 2p) dz / p, truncated where e^{-z} < 1e-17
  const double z_max = 40.0;
  double err = 0.0;
  auto integrand = [&](double z) {
    const Estimate e = norm_at(z / (2.0 * p));
    err = std::max(err, e.error);
    return std::exp(-z) * e.value;
  };
  // the outer rule must not chase the quadrature noise of the inner norms
  const auto lap = quad::gk_pieces(integrand, {0.0, 3.0, 10.0, z_max}, std::max(10.0 * tol, 1e-9));
  rep.lhs = lap.value / p;
  rep.lhs_error = (lap.error + err + 1e-16 * std::abs(lap.value)) / p;
  const Estimate at_t = norm_at(t);
  rep.rhs = std::exp(-2.0 * p * t) * at_t.value / p;
  rep.rhs_error = std::exp(-2.0 * p * t) * at_t.error / p;
  const double slack = rep.lhs_error + rep.rhs_error;
  rep.inequality = rep.lhs + slack >= rep.rhs ? Check::holds : Check::fails;

  const int points = 12;
  for (int i = 0; i <= points; ++i) {
    const double s = 2.0 * t * i / points;
    rep.grid.emplace_back(s, norm_at(s));
  }
  rep.monotone = Check::holds;
  for (std::size_t i = 1; i < rep.grid.size(); ++i) {
    const auto& a = rep.grid[i - 1].second;
    const auto& b = rep.grid[i].second;
    if (b.value + b.error + a.error + 1e-12 * std::abs(a.value) < a.value) rep.monotone = Check::fails;
  }
  return rep;
}

struct ScalingRow {
  double t = 0.0;
  double ratio = 0.0;
  double ratio_stderr = 0.0;
  double expected = 0.0;
  double z = 0.0;
  Estimate at_t;
};

struct ScalingReport {
  int n = 1;
  double alpha0 = 0.0, alpha = 0.0;
  Estimate at_one;
  std::vector<ScalingRow> rows;
  Check status = Check::inconclusive;
  std::uint64_t recommended_samples = 0;
};

/// Compares ||g_n(., t)||^2 / ||g_n(., 1)||^2 with t^{(4 - alpha - a0) n} for riesz(alpha), d = 1.
/// Each time uses its own random stream so the ratio carries honest noise.
inline ScalingReport scaling_check(int n, double alpha0, double alpha, const std::vector<double>& times,
                                   const rng::McConfig& cfg, double z_max = 3.0) {
  require(alpha > 0.0 && alpha < 1.0, "riesz exponent must lie in (0, 1)");
  require(!times.empty(), "need at least one time");
  const auto cov = CovarianceDescriptor::riesz(alpha, 1);
  ScalingReport rep;
  rep.n = n;
  rep.alpha0 = alpha0;
  rep.alpha = alpha;
  auto op = [&](double t) { return "scaling/t=" + std::to_string(t) + "/a0=" + std::to_string(alpha0); };
  rep.at_one = gn_norm_mc(cov, alpha0, n, 1.0, cfg, nullptr, op(1.0));
  bool all_ok = true;
  double worst_rel = 0.0;
  for (double t : times) {
    require(t > 0.0, "times must be positive");
    ScalingRow row;
    row.t = t;
    row.at_t = gn_norm_mc(cov, alpha0, n, t, cfg, nullptr, op(t));
    row.ratio = row.at_t.value / rep.at_one.value;
    const double r1 = rep.at_one.error / rep.at_one.value;
    const double rt = row.at_t.error / row.at_t.value;
    row.ratio_stderr = std::abs(row.ratio) * std::sqrt(r1 * r1 + rt * rt);
    row.expected = std::pow(t, (4.0 - alpha - alpha0) * n);
    row.z = (row.ratio - row.expected) / row.ratio_stderr;
    worst_rel = std::max(worst_rel, row.ratio_stderr / std::abs(row.ratio));
    if (!(std::abs(row.z) <= z_max)) all_ok = false;
    rep.rows.push_back(row);
  }
  if (worst_rel > 0.2) {
    rep.status = Check::inconclusive;
    const double f = worst_rel / 0.05;
    rep.recommended_samples = static_cast<std::uint64_t>(std::ceil(cfg.samples * f * f));
  } else {
    rep.status = all_ok ? Check::holds : Check::fails;
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Reverse convolution on the line
// ---------------------------------------------------------------------------

/// A positive function or measure density on R with a positive Fourier transform.
struct PositiveDefinite {
  enum class Kind { gaussian, cauchy, power, inverse_phi };
  Kind kind = Kind::gaussian;
  double scale = 1.0;  // gaussian sd, cauchy half-width, power exponent a in |x|^{a-1}, phi: eta

  double operator()(double x) const {
    switch (kind) {
      case Kind::gaussian: return std::exp(-0.5 * x * x / (scale * scale));
      case Kind::cauchy: return scale / (x * x + scale * scale);
      case Kind::power: return std::pow(std::abs(x), scale - 1.0);
      case Kind::inverse_phi: return 1.0 / phi_p(1.0, x, scale);
    }
    return 0.0;
  }
  bool singular_at_zero() const { return kind == Kind::power; }
  std::string name() const {
    switch (kind) {
      case Kind::gaussian: return "gaussian(" + std::to_string(scale) + ")";
      case Kind::cauchy: return "cauchy(" + std::to_string(scale) + ")";
      case Kind::power: return "power(" + std::to_string(scale) + ")";
      case Kind::inverse_phi: return "inverse-phi(" + std::to_string(scale) + ")";
    }
    return "?";
  }
};

struct ConvolutionRow {
  double eta = 0.0;
  double shifted = 0.0;
  double centered = 0.0;
  double error = 0.0;
  bool holds = false;
};

namespace detail {

// int_R f(x - eta) nu(x) dx with nu possibly singular at 0
inline quad::Result shifted_pairing(const PositiveDefinite& f, const PositiveDefinite& nu, double eta, double tol) {
  auto g = [&](double x) { return f(x - eta) * nu(x); };
  const double w = std::max({std::abs(eta), f.scale, nu.kind == PositiveDefinite::Kind::power ? 1.0 : nu.scale, 1.0});
  const double b = 20.0 * w;
  quad::Result r;
  if (nu.singular_at_zero()) {
    const double p = nu.scale - 1.0;
    auto fr = [&](double x) { return f(x - eta); };
    const double c = eta != 0.0 ? std::min(0.5, 0.5 * std::abs(eta)) : 0.5;
    r += quad::left_power(fr, 0.0, c, p, tol);
    r += quad::right_power(fr, -c, 0.0, p, tol);
    std::vector<double> br{c, b};
    if (eta > c && eta < b) br.insert(br.begin() + 1, eta);
    r += quad::gk_pieces(g, br, tol);
    std::vector<double> bl{-b, -c};
    if (eta < -c && eta > -b) bl.insert(bl.begin() + 1, eta);
    r += quad::gk_pieces(g, bl, tol);
  } else {
    std::vector<double> br{-b, 0.0, b};
    if (eta != 0.0 && std::abs(eta) < b) br.push_back(eta);
    std::sort(br.begin(), br.end());
    r += quad::gk_pieces(g, br, tol);
  }
  // tails through x = +-b / v
  auto right = [&](double v) { return v == 0.0 ? 0.0 : g(b / v) * b / (v * v); };
  auto left = [&](double v) { return v == 0.0 ? 0.0 : g(-b / v) * b / (v * v); };
  r += quad::gk(right, 0.0, 1.0, tol);
  r += quad::gk(left, 0.0, 1.0, tol);
  return r;
}

}  // namespace detail

/// int f(x - eta) nu(dx) <= int f(x) nu(dx) for each shift.
inline std::vector<ConvolutionRow> reverse_convolution_check(const PositiveDefinite& f, const PositiveDefinite& nu,
                                                             const std::vector<double>& etas, double tol = 1e-10) {
  const auto centered = detail::shifted_pairing(f, nu, 0.0, tol);
  std::vector<ConvolutionRow> rows;
  for (double eta : etas) {
    const auto s = detail::shifted_pairing(f, nu, eta, tol);
    ConvolutionRow row{eta, s.value, centered.value, s.error + centered.error, false};
    row.holds = row.shifted <= row.centered + row.error + 1e-12 * std::abs(row.centered);
    rows.push_back(row);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Chaos series diagnostic
// ---------------------------------------------------------------------------

struct SeriesTerm {
  int n = 0;
  std::optional<Estimate> norm;  // ||g_n||^2, absent when no route is available
  double weighted = 0.0;         // n! ||w||^2 ||g_n||^2
  double partial_sum = 0.0;
};

struct SeriesReport {
  double t = 0.0;
  double w_sup = 1.0;
  std::vector<SeriesTerm> terms;  // terms[0] is the zeroth chaos ||w||^2
  std::vector<double> ratios;     // weighted_{n+1} / weighted_n, n >= 1
  bool ratios_decreasing = false;
  std::string label = "diagnostic only: partial sums of the bound n! ||w||^2 ||g_n||^2, not a proof";
};

/// Partial sums of sum_n n! ||f_n^w||^2 bounded through ||f_n^w|| <= ||w||_inf ||g_n||.
inline SeriesReport series_diagnostic(const CovarianceDescriptor& cov, double alpha0, double t, int n_max, double w_sup,
                                      const rng::McConfig& cfg, double tol = 1e-8) {
  require(n_max >= 1 && n_max <= 3, "series diagnostic supports N_max <= 3");
  require(t >= 0.0, "time must be nonnegative");
  SeriesReport rep;
  rep.t = t;
  rep.w_sup = w_sup;
  const double w2 = w_sup * w_sup;
  rep.terms.push_back({0, std::nullopt, w2, w2});
  const NoiseModel model(spectral::to_spectral(cov), alpha0);
  double fact = 1.0;
  for (int n = 1; n <= n_max; ++n) {
    fact *= n;
    SeriesTerm term;
    term.n = n;
    if (t == 0.0) {
      term.norm = Estimate{0.0, 0.0, 0, Method::closed_form};
    } else if (n == 1) {
      term.norm = first_chaos_norm(ChaosKernelSpec(1, t, model), tol);
    } else if (cov.dimension == 1) {
      term.norm = gn_norm_mc(cov, alpha0, n, t, cfg, nullptr, "series");
    }
    if (term.norm) term.weighted = fact * w2 * term.norm->value;
    term.partial_sum = rep.terms.back().partial_sum + term.weighted;
    rep.terms.push_back(term);
  }
  for (std::size_t i = 2; i < rep.terms.size(); ++i) {
    if (rep.terms[i].norm && rep.terms[i - 1].weighted > 0.0)
      rep.ratios.push_back(rep.terms[i].weighted / rep.terms[i - 1].weighted);
  }
  rep.ratios_decreasing = !rep.ratios.empty();
  for (std::size_t i = 1; i < rep.ratios.size(); ++i)
    if (rep.ratios[i] > rep.ratios[i - 1]) rep.ratios_decreasing = false;
  return rep;
}

}  // namespace hyperwave::chaos
