#pragma once

// The wave kernel G_t in Fourier and direct space, the deterministic term
// w = d/dt (G_t * u0) + G_t * u1, and elementary closed-form time integrals.

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "hyperwave/core.hpp"
#include "hyperwave/quadrature.hpp"
#include "hyperwave/spectral.hpp"

namespace hyperwave::wave {

using spectral::norm;

/// sin(t r)/r with the value t at r = 0.
inline double ghat_radial(double t, double r) {
  const double x = t * r;
  if (std::abs(x) < 1e-6) return t * (1.0 - x * x / 6.0);
  return std::sin(x) / r;
}

inline double ghat(int d, double t, std::span<const double> xi) {
  require_dimension(d);
  require(static_cast<int>(xi.size()) == d, "frequency has wrong dimension");
  require(t >= 0.0, "time must be nonnegative");
  return ghat_radial(t, norm(xi));
}

/// Uniform surface measure of the given density on the sphere |y| = radius.
struct SphereMeasure {
  double radius = 0.0;
  double surface_density = 0.0;
  double total_mass() const { return surface_density * 4.0 * constants::pi * radius * radius; }
};

using KernelValue = std::variant<double, SphereMeasure>;

/// Direct-space G_t(x); in d = 3 the kernel is the measure sigma_t / (4 pi t).
inline KernelValue g_direct(int d, double t, std::span<const double> x) {
  require_dimension(d);
  require(t > 0.0, "time must be positive");
  require(static_cast<int>(x.size()) == d, "point has wrong dimension");
  const double r = norm(x);
  switch (d) {
    case 1: return r < t ? 0.5 : 0.0;
    case 2:
      if (r == t) throw SingularityError("2-d wave kernel is singular on the light cone");
      return r < t ? 1.0 / (2.0 * constants::pi * std::sqrt(t * t - r * r)) : 0.0;
    default: return SphereMeasure{t, 1.0 / (4.0 * constants::pi * t)};
  }
}

/// int G_t(y) dy, computed from the kernel itself rather than assumed.
inline double g_total_mass(int d, double t) {
  require_dimension(d);
  require(t > 0.0, "time must be positive");
  if (d == 1) {
    const double o[1] = {0.0};
    return 2.0 * t * std::get<double>(g_direct(1, t, o));
  }
  if (d == 2) {
    // 2 pi int_0^t rho (t^2 - rho^2)^{-1/2} / (2 pi) drho with the edge weight mapped out
    auto g = [t](double rho) { return rho / std::sqrt(t + rho); };
    return quad::right_power(g, 0.0, t, -0.5, 1e-13).value;
  }
  const double o[3] = {0.0, 0.0, 0.0};
  return std::get<SphereMeasure>(g_direct(3, t, o)).total_mass();
}

// ---------------------------------------------------------------------------
// Closed-form time integrals
// ---------------------------------------------------------------------------

namespace detail {

// (1 - cos(u t)) / u, zero at u = 0
inline double one_minus_cos_over(double u, double t) {
  const double x = u * t;
  if (std::abs(u) < 1e-6) return u * t * t * (0.5 - x * x / 24.0);
  return (1.0 - std::cos(x)) / u;
}

// sin(u t) / u, equal to t at u = 0
inline double sin_over(double u, double t) {
  const double x = u * t;
  if (std::abs(u) < 1e-6) return t * (1.0 - x * x / 6.0);
  return std::sin(x) / u;
}

}  // namespace detail

/// int_0^inf e^{-beta r} sin(r eta)/eta dr = 1/(beta^2 + eta^2).
inline std::complex<double> sine_laplace(std::complex<double> beta, double eta_norm) {
  require(beta.real() > 0.0, "sine Laplace transform needs Re(beta) > 0");
  require(eta_norm >= 0.0, "frequency norm must be nonnegative");
  return 1.0 / (beta * beta + eta_norm * eta_norm);
}

/// Q_t(lambda, xi) = int_0^t cos(lambda s) sin(|xi| s) ds.
inline double q_closed_form(double t, double lambda, double xi_norm) {
  require(t >= 0.0, "time must be nonnegative");
  return 0.5 * (detail::one_minus_cos_over(lambda + xi_norm, t) + detail::one_minus_cos_over(xi_norm - lambda, t));
}

/// P_t(lambda, xi) = int_0^t sin(lambda s) sin(|xi| s) ds.
inline double p_closed_form(double t, double lambda, double xi_norm) {
  require(t >= 0.0, "time must be nonnegative");
  return 0.5 * (detail::sin_over(lambda - xi_norm, t) - detail::sin_over(lambda + xi_norm, t));
}

/// |int_0^t e^{i lambda s} sin(s r)/r ds|^2 for r > 0.
inline double fourier_time_square(double t, double lambda, double r) {
  const double q = q_closed_form(t, lambda, r);
  const double p = p_closed_form(t, lambda, r);
  return (q * q + p * p) / (r * r);
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

/// Real function on R^d from a small closed catalog.
struct FunctionDescriptor {
  enum class Kind { constant, box, gaussian, fourier_atoms };

  Kind kind = Kind::constant;
  double amplitude = 0.0;
  std::vector<double> center;      // box, gaussian
  std::vector<double> half_width;  // box: prod 1{|y_j - c_j| <= h_j}
  double sigma = 1.0;              // gaussian: A exp(-|y-c|^2 / (2 sigma^2))
  std::vector<spectral::Atom> modes;  // fourier_atoms: sum_k a_k cos(xi_k . y)

  static FunctionDescriptor constant(double c) {
    FunctionDescriptor f;
    f.amplitude = c;
    return f;
  }
  static FunctionDescriptor box(double height, std::vector<double> center, std::vector<double> half_width) {
    FunctionDescriptor f;
    f.kind = Kind::box;
    f.amplitude = height;
    f.center = std::move(center);
    f.half_width = std::move(half_width);
    return f;
  }
  static FunctionDescriptor gaussian(double amplitude, std::vector<double> center, double sigma) {
    FunctionDescriptor f;
    f.kind = Kind::gaussian;
    f.amplitude = amplitude;
    f.center = std::move(center);
    f.sigma = sigma;
    return f;
  }
  /// Modes carry signed amplitudes in `weight`.
  static FunctionDescriptor fourier_atoms(std::vector<spectral::Atom> modes) {
    FunctionDescriptor f;
    f.kind = Kind::fourier_atoms;
    f.modes = std::move(modes);
    return f;
  }

  void validate(int d) const {
    require(std::isfinite(amplitude), "amplitude must be finite");
    switch (kind) {
      case Kind::constant: break;
      case Kind::box:
        require(static_cast<int>(center.size()) == d && static_cast<int>(half_width.size()) == d,
                "box needs a center and half-width per coordinate");
        for (double h : half_width) require(h > 0.0, "box half-widths must be positive");
        break;
      case Kind::gaussian:
        require(static_cast<int>(center.size()) == d, "gaussian center has wrong dimension");
        require(sigma > 0.0, "gaussian width must be positive");
        break;
      case Kind::fourier_atoms:
        for (const auto& m : modes) {
          require(static_cast<int>(m.location.size()) == d, "mode has wrong dimension");
          require(std::isfinite(m.weight), "mode amplitude must be finite");
        }
        break;
    }
  }

  double operator()(std::span<const double> y) const {
    switch (kind) {
      case Kind::constant: return amplitude;
      case Kind::box:
        for (std::size_t j = 0; j < y.size(); ++j)
          if (std::abs(y[j] - center[j]) > half_width[j]) return 0.0;
        return amplitude;
      case Kind::gaussian: {
        double s = 0.0;
        for (std::size_t j = 0; j < y.size(); ++j) s += (y[j] - center[j]) * (y[j] - center[j]);
        return amplitude * std::exp(-0.5 * s / (sigma * sigma));
      }
      case Kind::fourier_atoms: {
        double s = 0.0;
        for (const auto& m : modes) {
          double ph = 0.0;
          for (std::size_t j = 0; j < y.size(); ++j) ph += m.location[j] * y[j];
          s += m.weight * std::cos(ph);
        }
        return s;
      }
    }
    return 0.0;
  }

  double sup_norm() const {
    if (kind != Kind::fourier_atoms) return std::abs(amplitude);
    double s = 0.0;
    for (const auto& m : modes) s += std::abs(m.weight);
    return s;
  }

  /// (2 pi)^{-d} int |F f|; finite for every kind except boxes in d >= 2.
  double fourier_l1() const {
    switch (kind) {
      case Kind::constant: return std::abs(amplitude);  // point mass at the origin
      case Kind::gaussian: return std::abs(amplitude);
      case Kind::fourier_atoms: return sup_norm();
      case Kind::box: return std::numeric_limits<double>::infinity();
    }
    return 0.0;
  }
};

struct InitialData {
  FunctionDescriptor u0 = FunctionDescriptor::constant(0.0);
  FunctionDescriptor u1 = FunctionDescriptor::constant(0.0);

  /// sup|u0| in d = 1, the Fourier L1 norm otherwise.
  double m0(int d) const { return d == 1 ? u0.sup_norm() : u0.fourier_l1(); }
  double m1() const { return u1.sup_norm(); }

  void validate(int d) const {
    require_dimension(d);
    u0.validate(d);
    u1.validate(d);
    if (d > 1 && !std::isfinite(m0(d)))
      throw Unsupported("u0 must have an integrable Fourier transform in dimension " + std::to_string(d));
  }
};

namespace detail {

// int_{R^d} e^{i xi.z} h(|xi|) dxi for radial h, as a 1-d integral in r
template <class H>
double radial_fourier(int d, double z, H&& h, double r_max, double tol) {
  auto integrand = [&](double r) {
    switch (d) {
      case 1: return 2.0 * std::cos(r * z) * h(r);
      case 2: return 2.0 * constants::pi * r * boost::math::cyl_bessel_j(0, r * z) * h(r);
      default: {
        const double x = r * z;
        const double sinc = std::abs(x) < 1e-6 ? 1.0 - x * x / 6.0 : std::sin(x) / x;
        return 4.0 * constants::pi * r * r * sinc * h(r);
      }
    }
  };
  const auto res = quad::gk(integrand, 0.0, r_max, tol, 20000, tol * 1e-3);
  if (!(res.error <= 10.0 * tol * std::max(1.0, std::abs(res.value))))
    throw QuadratureError("w_eval: Fourier quadrature did not converge", res.error);
  return res.value;
}

// d/dt (G_t * u0)(x)
inline double w_initial_position(const FunctionDescriptor& u0, int d, double t, std::span<const double> x,
                                 double tol) {
  using Kind = FunctionDescriptor::Kind;
  if (d == 1) {
    const double p[1] = {x[0] + t};
    const double m[1] = {x[0] - t};
    return 0.5 * (u0(p) + u0(m));
  }
  switch (u0.kind) {
    case Kind::constant: return u0.amplitude;
    case Kind::fourier_atoms: {
      double s = 0.0;
      for (const auto& m : u0.modes) {
        double ph = 0.0;
        for (int j = 0; j < d; ++j) ph += m.location[j] * x[j];
        s += m.weight * std::cos(t * m.radius()) * std::cos(ph);
      }
      return s;
    }
    case Kind::gaussian: {
      const double sg = u0.sigma;
      std::vector<double> z(d);
      for (int j = 0; j < d; ++j) z[j] = x[j] - u0.center[j];
      const double zn = norm(z);
      const double pref = u0.amplitude * std::pow(sg, d) * std::pow(2.0 * constants::pi, -0.5 * d);
      auto h = [&](double r) { return std::cos(t * r) * std::exp(-0.5 * sg * sg * r * r); };
      return pref * radial_fourier(d, zn, h, 12.0 / sg, tol);
    }
    case Kind::box: break;
  }
  throw Unsupported("u0 must have an integrable Fourier transform for d >= 2");
}

// (G_t * u1)(x)
inline double w_velocity(const FunctionDescriptor& u1, int d, double t, std::span<const double> x, double tol) {
  using Kind = FunctionDescriptor::Kind;
  if (u1.kind == Kind::constant) return u1.amplitude * t;
  if (u1.kind == Kind::fourier_atoms) {
    double s = 0.0;
    for (const auto& m : u1.modes) {
      double ph = 0.0;
      for (int j = 0; j < d; ++j) ph += m.location[j] * x[j];
      s += m.weight * ghat_radial(t, m.radius()) * std::cos(ph);
    }
    return s;
  }
  auto check = [&](const quad::Result& r) {
    if (!(r.error <= 10.0 * tol * std::max(1.0, std::abs(r.value))))
      throw QuadratureError("w_eval: convolution quadrature did not converge", r.error);
    return r.value;
  };
  if (d == 1) {
    std::vector<double> br{x[0] - t, x[0] + t};
    if (u1.kind == Kind::box) {
      for (double e : {u1.center[0] - u1.half_width[0], u1.center[0] + u1.half_width[0]})
        if (e > br.front() && e < br.back()) br.push_back(e);
      std::sort(br.begin(), br.end());
    }
    auto f = [&](double y) {
      const double p[1] = {y};
      return 0.5 * u1(p);
    };
    return check(quad::gk_pieces(f, br, tol));
  }
  if (d == 2) {
    // rho = t sin(phi) absorbs the (t^2 - rho^2)^{-1/2} edge singularity
    auto radial = [&](double phi) {
      const double rho = t * std::sin(phi);
      auto ang = [&](double th) {
        const double y[2] = {x[0] - rho * std::cos(th), x[1] - rho * std::sin(th)};
        return u1(y);
      };
      const double a = check(quad::gk(ang, 0.0, 2.0 * constants::pi, tol, 2000, tol * 1e-3));
      return t * std::sin(phi) * a;
    };
    return check(quad::gk(radial, 0.0, 0.5 * constants::pi, tol, 2000, tol * 1e-3)) / (2.0 * constants::pi);
  }
  // d = 3: t/(4 pi) int_{S^2} u1(x - t theta) dtheta
  auto polar = [&](double c) {
    const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
    auto az = [&](double ph) {
      const double y[3] = {x[0] - t * s * std::cos(ph), x[1] - t * s * std::sin(ph), x[2] - t * c};
      return u1(y);
    };
    return check(quad::gk(az, 0.0, 2.0 * constants::pi, tol, 2000, tol * 1e-3));
  };
  return t / (4.0 * constants::pi) * check(quad::gk(polar, -1.0, 1.0, tol, 2000, tol * 1e-3));
}

}  // namespace detail

/// w(t,x) = d/dt (G_t * u0)(x) + (G_t * u1)(x).
inline double w_eval(const InitialData& data, int d, double t, std::span<const double> x, double tol = 1e-9) {
  data.validate(d);
  require(t >= 0.0, "time must be nonnegative");
  require(static_cast<int>(x.size()) == d, "point has wrong dimension");
  if (t == 0.0) return data.u0(x);
  return detail::w_initial_position(data.u0, d, t, x, tol) + detail::w_velocity(data.u1, d, t, x, tol);
}

}  // namespace hyperwave::wave
