#pragma once

// Spatial covariances gamma and their spectral measures mu = F gamma.

#include <boost/math/special_functions/bessel.hpp>

#include <algorithm>
#include <cmath>
#include <functional>
#include <memory>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hyperwave/core.hpp"
#include "hyperwave/quadrature.hpp"

namespace hyperwave::spectral {

inline double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

// ---------------------------------------------------------------------------
// Covariance catalog
// ---------------------------------------------------------------------------

enum class CovarianceKind { riesz, white_noise, fractional_sheet, delta_comb, bessel };

struct CovarianceDescriptor {
  CovarianceKind kind = CovarianceKind::white_noise;
  int dimension = 1;
  double alpha = 0.0;            // riesz exponent
  std::vector<double> hurst;     // fractional sheet, one per coordinate
  double spacing = 1.0;          // delta comb: spectral lattice a Z^d
  double truncation_radius = 32; // delta comb: atoms kept inside this radius
  double order = 0.0;            // bessel: density (1+|xi|^2)^{-order/2}

  static CovarianceDescriptor riesz(double alpha, int d) {
    CovarianceDescriptor c;
    c.kind = CovarianceKind::riesz;
    c.alpha = alpha;
    c.dimension = d;
    return c;
  }
  static CovarianceDescriptor white_noise(int d) {
    CovarianceDescriptor c;
    c.kind = CovarianceKind::white_noise;
    c.dimension = d;
    return c;
  }
  static CovarianceDescriptor fractional_sheet(std::vector<double> hurst) {
    CovarianceDescriptor c;
    c.kind = CovarianceKind::fractional_sheet;
    c.dimension = static_cast<int>(hurst.size());
    c.hurst = std::move(hurst);
    return c;
  }
  static CovarianceDescriptor delta_comb(double spacing, int d, double truncation_radius) {
    CovarianceDescriptor c;
    c.kind = CovarianceKind::delta_comb;
    c.spacing = spacing;
    c.dimension = d;
    c.truncation_radius = truncation_radius;
    return c;
  }
  static CovarianceDescriptor bessel(double order, int d) {
    CovarianceDescriptor c;
    c.kind = CovarianceKind::bessel;
    c.order = order;
    c.dimension = d;
    return c;
  }

  void validate() const {
    require_dimension(dimension);
    switch (kind) {
      case CovarianceKind::riesz:
        require(alpha > 0.0 && alpha < dimension, "riesz exponent must lie in (0, d)");
        break;
      case CovarianceKind::fractional_sheet:
        require(static_cast<int>(hurst.size()) == dimension, "one Hurst index per coordinate");
        for (double h : hurst) require(h > 0.5 && h < 1.0, "Hurst indices must lie in (1/2, 1)");
        break;
      case CovarianceKind::delta_comb:
        require(spacing > 0.0, "lattice spacing must be positive");
        require(truncation_radius > 0.0, "truncation radius must be positive");
        break;
      case CovarianceKind::bessel:
        require(order > 0.0, "bessel order must be positive");
        break;
      case CovarianceKind::white_noise:
        break;
    }
  }

  /// Spatial homogeneity order of gamma, when gamma is homogeneous.
  std::optional<double> homogeneity() const {
    switch (kind) {
      case CovarianceKind::riesz: return alpha;
      case CovarianceKind::white_noise: return static_cast<double>(dimension);
      case CovarianceKind::fractional_sheet: {
        double a = 0.0;
        for (double h : hurst) a += 2.0 - 2.0 * h;
        return a;
      }
      default: return std::nullopt;
    }
  }
};

inline std::string to_string(CovarianceKind k) {
  switch (k) {
    case CovarianceKind::riesz: return "riesz";
    case CovarianceKind::white_noise: return "white-noise";
    case CovarianceKind::fractional_sheet: return "fractional-sheet";
    case CovarianceKind::delta_comb: return "delta-comb";
    case CovarianceKind::bessel: return "bessel";
  }
  return "?";
}

/// Pointwise gamma(x) for function-valued kernels.
inline double gamma_eval(const CovarianceDescriptor& cov, std::span<const double> x) {
  cov.validate();
  require(static_cast<int>(x.size()) == cov.dimension, "point dimension mismatch");
  switch (cov.kind) {
    case CovarianceKind::white_noise:
    case CovarianceKind::delta_comb:
      throw Unsupported(to_string(cov.kind) + " covariance is a measure, not a function");
    case CovarianceKind::riesz: {
      const double r = norm(x);
      if (r == 0.0) throw SingularityError("riesz kernel is singular at the origin");
      return std::pow(r, -cov.alpha);
    }
    case CovarianceKind::fractional_sheet: {
      double v = 1.0;
      for (int j = 0; j < cov.dimension; ++j) {
        if (x[j] == 0.0) throw SingularityError("fractional-sheet kernel is singular on the axes");
        v *= std::pow(std::abs(x[j]), -(2.0 - 2.0 * cov.hurst[j]));
      }
      return v;
    }
    case CovarianceKind::bessel: {
      // (2 pi)^{-d} int e^{i xi.x} (1+|xi|^2)^{-s/2} dxi
      const double r = norm(x);
      const int d = cov.dimension;
      const double s = cov.order;
      if (r == 0.0) {
        if (s <= d) throw SingularityError("bessel kernel is singular at the origin for order <= d");
        return std::pow(4.0 * constants::pi, -0.5 * d) * std::tgamma(0.5 * (s - d)) / std::tgamma(0.5 * s);
      }
      const double nu = 0.5 * (d - s);
      return std::pow(2.0 * constants::pi, -0.5 * d) * std::pow(2.0, 1.0 - 0.5 * s) / std::tgamma(0.5 * s) *
             std::pow(r, 0.5 * (s - d)) * boost::math::cyl_bessel_k(std::abs(nu), r);
    }
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Spectral measure descriptor
// ---------------------------------------------------------------------------

enum class MeasureKind { continuous_density, atomic, homogeneous_radial };

inline std::string to_string(MeasureKind k) {
  switch (k) {
    case MeasureKind::continuous_density: return "continuous-density";
    case MeasureKind::atomic: return "atomic";
    case MeasureKind::homogeneous_radial: return "homogeneous-radial";
  }
  return "?";
}

struct Atom {
  std::vector<double> location;
  double weight = 0.0;
  double radius() const { return norm(location); }
};

using DensityFn = std::function<double(std::span<const double>)>;
using RadialFn = std::function<double(double)>;

/// Immutable description of mu. Copies share the density callables.
class SpectralMeasure {
public:
  /// Continuous density. `radial`, when given, is the density as a function of |xi|.
  static SpectralMeasure continuous(int d, DensityFn density, std::optional<RadialFn> radial = std::nullopt,
                                    std::optional<double> homogeneity = std::nullopt,
                                    double unit_ball_mass = 0.0) {
    require_dimension(d);
    require(static_cast<bool>(density), "density callable required");
    SpectralMeasure m(d, MeasureKind::continuous_density);
    m.density_ = std::move(density);
    m.radial_ = std::move(radial);
    m.set_homogeneity(homogeneity, unit_ball_mass);
    return m;
  }

  /// Finite atom list. `truncation_radius` marks a lattice cut out of an infinite measure.
  static SpectralMeasure atomic(int d, std::vector<Atom> atoms, std::optional<double> truncation_radius = std::nullopt,
                                std::optional<double> homogeneity = std::nullopt,
                                std::optional<double> tail_unit_mass = std::nullopt) {
    require_dimension(d);
    for (const auto& a : atoms) {
      require(static_cast<int>(a.location.size()) == d, "atom location has wrong dimension");
      require(a.weight > 0.0 && std::isfinite(a.weight), "atom weights must be positive");
    }
    SpectralMeasure m(d, MeasureKind::atomic);
    std::stable_sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.radius() < y.radius(); });
    m.atoms_ = std::move(atoms);
    m.check_atom_symmetry();
    m.truncation_ = truncation_radius;
    if (homogeneity) {
      // mass inside the unit ball fixes the scaling constant unless the tail law is given
      double mass = 0.0;
      for (const auto& a : m.atoms_)
        if (a.radius() <= 1.0) mass += a.weight;
      m.set_homogeneity(homogeneity, tail_unit_mass.value_or(mass));
    }
    return m;
  }

  /// Homogeneous measure known only through mu(B(0,r)) = r^alpha mu(B(0,1)); taken radial.
  static SpectralMeasure homogeneous_radial(int d, double alpha, double unit_ball_mass) {
    require_dimension(d);
    SpectralMeasure m(d, MeasureKind::homogeneous_radial);
    m.set_homogeneity(alpha, unit_ball_mass);
    return m;
  }

  int dimension() const { return dim_; }
  MeasureKind kind() const { return kind_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  std::optional<double> homogeneity_order() const { return alpha_; }
  double unit_ball_mass() const { return unit_mass_; }
  std::optional<double> truncation_radius() const { return truncation_; }
  bool has_density() const { return static_cast<bool>(density_); }

  /// Radial in the sense that integrals of radial functions reduce to 1-d.
  bool is_radial() const {
    return kind_ != MeasureKind::continuous_density || radial_.has_value();
  }

  const DensityFn& density() const {
    if (!density_) throw Unsupported("measure has no density");
    return density_;
  }

  double density(std::span<const double> xi) const {
    if (!density_) throw Unsupported("measure has no density");
    return density_(xi);
  }

  double radial_density(double r) const {
    if (!radial_) throw Unsupported("density is not radial");
    return (*radial_)(r);
  }

  /// d/dr mu(B(0,r)) for continuous or homogeneous measures.
  double mass_derivative(double r) const {
    if (kind_ == MeasureKind::atomic) throw Unsupported("atomic measure has no mass density");
    if (alpha_) return *alpha_ * unit_mass_ * std::pow(r, *alpha_ - 1.0);
    if (radial_) return constants::sphere_area(dim_) * std::pow(r, dim_ - 1) * (*radial_)(r);
    return angular_mass_density(r);
  }

  /// Sum of atom weights (atomic) or mu(B(0,r)) itself.
  const std::string& label() const { return label_; }
  SpectralMeasure with_label(std::string l) const {
    SpectralMeasure m = *this;
    m.label_ = std::move(l);
    return m;
  }

private:
  SpectralMeasure(int d, MeasureKind k) : dim_(d), kind_(k) {}

  void set_homogeneity(std::optional<double> alpha, double unit_ball_mass) {
    if (!alpha) {
      require(kind_ != MeasureKind::homogeneous_radial, "homogeneous-radial measure needs an order");
      return;
    }
    require(*alpha > 0.0, "homogeneity order must be positive");
    require(*alpha <= dim_ + 1e-12, "homogeneity order cannot exceed the dimension");
    require(unit_ball_mass >= 0.0, "unit ball mass must be nonnegative");
    alpha_ = alpha;
    unit_mass_ = unit_ball_mass;
  }

  void check_atom_symmetry() const {
    std::vector<bool> used(atoms_.size(), false);
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
      const auto& a = atoms_[i];
      bool found = false;
      const double scale = std::max(1.0, a.radius());
      for (std::size_t j = 0; j < atoms_.size() && !found; ++j) {
        if (used[j] && j != i) continue;
        const auto& b = atoms_[j];
        double dist = 0.0;
        for (int k = 0; k < dim_; ++k) dist = std::max(dist, std::abs(a.location[k] + b.location[k]));
        if (dist <= 1e-12 * scale && std::abs(a.weight - b.weight) <= 1e-12 * a.weight) found = true;
      }
      if (!found) throw InvalidParameter("atomic measure must be symmetric under xi -> -xi");
    }
  }

  // int over the unit sphere of density(r theta) r^{d-1} dtheta for non-radial densities
  double angular_mass_density(double r) const {
    if (dim_ == 1) {
      const double p[1] = {r};
      const double m[1] = {-r};
      return density_(p) + density_(m);
    }
    const int n = 48;
    const auto rule = quad::gauss_legendre(n);
    double s = 0.0;
    if (dim_ == 2) {
      for (int i = 0; i < n; ++i) {
        const double th = constants::pi * (rule.x[i] + 1.0);
        const double p[2] = {r * std::cos(th), r * std::sin(th)};
        s += rule.w[i] * constants::pi * density_(p);
      }
      return s * r;
    }
    for (int i = 0; i < n; ++i) {
      const double ct = rule.x[i];
      const double st = std::sqrt(1.0 - ct * ct);
      for (int j = 0; j < n; ++j) {
        const double ph = constants::pi * (rule.x[j] + 1.0);
        const double p[3] = {r * st * std::cos(ph), r * st * std::sin(ph), r * ct};
        s += rule.w[i] * rule.w[j] * constants::pi * density_(p);
      }
    }
    return s * r * r;
  }

  int dim_;
  MeasureKind kind_;
  DensityFn density_;
  std::optional<RadialFn> radial_;
  std::vector<Atom> atoms_;
  std::optional<double> alpha_;
  double unit_mass_ = 0.0;
  std::optional<double> truncation_;
  std::string label_;
};

/// Pairs a spatial spectral measure with the temporal exponent alpha0 in [0,1).
struct NoiseModel {
  SpectralMeasure measure;
  double alpha0 = 0.0;

  NoiseModel(SpectralMeasure m, double a0) : measure(std::move(m)), alpha0(a0) {
    require(a0 >= 0.0 && a0 < 1.0, "alpha0 must lie in [0, 1)");
  }
  int dimension() const { return measure.dimension(); }
};

// ---------------------------------------------------------------------------
// Catalog -> spectral measure
// ---------------------------------------------------------------------------

inline SpectralMeasure to_spectral(const CovarianceDescriptor& cov) {
  cov.validate();
  const int d = cov.dimension;
  switch (cov.kind) {
    case CovarianceKind::riesz: {
      const double c = constants::riesz(cov.alpha, d);
      const double e = cov.alpha - d;
      auto radial = [c, e](double r) { return c * std::pow(r, e); };
      auto dens = [c, e](std::span<const double> xi) { return c * std::pow(norm(xi), e); };
      const double mass = c * constants::sphere_area(d) / cov.alpha;
      return SpectralMeasure::continuous(d, dens, RadialFn(radial), cov.alpha, mass)
          .with_label("riesz(" + std::to_string(cov.alpha) + ")");
    }
    case CovarianceKind::white_noise: {
      auto radial = [](double) { return 1.0; };
      auto dens = [](std::span<const double>) { return 1.0; };
      return SpectralMeasure::continuous(d, dens, RadialFn(radial), static_cast<double>(d),
                                         constants::ball_volume(d))
          .with_label("white-noise");
    }
    case CovarianceKind::fractional_sheet: {
      std::vector<double> beta;
      double c = 1.0;
      double alpha = 0.0;
      for (double h : cov.hurst) {
        beta.push_back(2.0 - 2.0 * h);
        c *= constants::power_1d(beta.back());
        alpha += beta.back();
      }
      auto dens = [c, beta](std::span<const double> xi) {
        double v = c;
        for (std::size_t j = 0; j < beta.size(); ++j) v *= std::pow(std::abs(xi[j]), beta[j] - 1.0);
        return v;
      };
      // Dirichlet integral over the unit ball of prod |xi_j|^{beta_j - 1}
      double mass = c / std::tgamma(1.0 + 0.5 * alpha);
      for (double b : beta) mass *= std::tgamma(0.5 * b);
      std::optional<RadialFn> radial;
      if (d == 1) {
        const double b = beta[0];
        radial = [c, b](double r) { return c * std::pow(r, b - 1.0); };
      }
      return SpectralMeasure::continuous(d, dens, radial, alpha, mass).with_label("fractional-sheet");
    }
    case CovarianceKind::delta_comb: {
      // gamma = sum_k delta(x - k L), L = 2 pi / a, has F gamma = a^d sum_m delta(xi - m a)
      const double a = cov.spacing;
      const double w = std::pow(a, d);
      const int kmax = static_cast<int>(std::floor(cov.truncation_radius / a));
      std::vector<Atom> atoms;
      std::vector<int> idx(d, -kmax);
      while (true) {
        std::vector<double> loc(d);
        for (int j = 0; j < d; ++j) loc[j] = a * idx[j];
        if (norm(loc) <= cov.truncation_radius) atoms.push_back({loc, w});
        int j = 0;
        while (j < d && ++idx[j] > kmax) idx[j++] = -kmax;
        if (j == d) break;
      }
      // large-scale density 1: mu(B(0, r)) ~ |B(0, 1)| r^d
      return SpectralMeasure::atomic(d, std::move(atoms), cov.truncation_radius, static_cast<double>(d),
                                     constants::ball_volume(d))
          .with_label("delta-comb");
    }
    case CovarianceKind::bessel: {
      const double s = cov.order;
      auto radial = [s](double r) { return std::pow(1.0 + r * r, -0.5 * s); };
      auto dens = [s](std::span<const double> xi) {
        const double r = norm(xi);
        return std::pow(1.0 + r * r, -0.5 * s);
      };
      return SpectralMeasure::continuous(d, dens, RadialFn(radial)).with_label("bessel");
    }
  }
  throw Unsupported("unknown covariance kind");
}

/// Atoms at the points (+-r_i, 0, ...) carrying the shell masses of a radial
/// measure on geometric shells [r_min q^i, r_min q^{i+1}] plus the core ball
/// B(0, r_min) at r_min / 2. The rule is: shell midpoint, exact shell mass.
inline SpectralMeasure discretize(const SpectralMeasure& mu, double r_min, double r_max, int shells);

/// mu(B(0,r)).
inline double radial_mass(const SpectralMeasure& mu, double r, double rel_tol = 1e-10) {
  require(r > 0.0, "radius must be positive");
  if (mu.kind() == MeasureKind::atomic) {
    double s = 0.0;
    for (const auto& a : mu.atoms()) {
      if (a.radius() <= r) s += a.weight;
    }
    return s;
  }
  if (auto alpha = mu.homogeneity_order()) return std::pow(r, *alpha) * mu.unit_ball_mass();
  const auto res = quad::tanh_sinh([&](double rho) { return mu.mass_derivative(rho); }, 0.0, r, rel_tol);
  if (!(res.error <= std::max(1e-300, 10.0 * rel_tol * std::abs(res.value))))
    throw QuadratureError("radial_mass did not converge", res.error);
  return res.value;
}

inline SpectralMeasure discretize(const SpectralMeasure& mu, double r_min, double r_max, int shells) {
  require(r_min > 0.0 && r_max > r_min && shells > 0, "invalid discretization grid");
  require(mu.is_radial() || mu.homogeneity_order().has_value(), "discretization needs a radial measure");
  const int d = mu.dimension();
  const double q = std::pow(r_max / r_min, 1.0 / shells);
  std::vector<Atom> atoms;
  auto put = [&](double r, double mass) {
    if (mass <= 0.0) return;
    std::vector<double> p(d, 0.0), m(d, 0.0);
    p[0] = r;
    m[0] = -r;
    atoms.push_back({p, 0.5 * mass});
    atoms.push_back({m, 0.5 * mass});
  };
  double prev = radial_mass(mu, r_min);
  put(0.5 * r_min, prev);
  double lo = r_min;
  for (int i = 0; i < shells; ++i) {
    const double hi = lo * q;
    const double cur = radial_mass(mu, hi);
    put(0.5 * (lo + hi), cur - prev);
    prev = cur;
    lo = hi;
  }
  return SpectralMeasure::atomic(d, std::move(atoms)).with_label(mu.label() + " (discretized)");
}

}  // namespace hyperwave::spectral
