#pragma once

// Finite families of test functions, their Gram matrix under the H inner
// product, and exact Gaussian sampling of the isonormal family on them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>
#include <vector>

#include "hyperwave/chaosnorm.hpp"
#include "hyperwave/core.hpp"
#include "hyperwave/quadrature.hpp"
#include "hyperwave/rng.hpp"
#include "hyperwave/spectral.hpp"
#include "hyperwave/wavekernel.hpp"

namespace hyperwave::noise {

using spectral::NoiseModel;
using spectral::SpectralMeasure;
using cplx = std::complex<double>;

/// s -> a(s, |xi|), supported on [lo, hi].
struct TimeProfile {
  enum class Kind { polynomial, wave_kernel };
  Kind kind = Kind::polynomial;
  std::vector<double> coeffs;  // polynomial in s
  double lo = 0.0, hi = 1.0;
  double t = 0.0;  // wave kernel: Ghat_{t-s}(xi) on [0, t]

  static TimeProfile polynomial(std::vector<double> c, double lo, double hi) {
    require(hi > lo, "polynomial support must be a nonempty interval");
    TimeProfile p;
    p.coeffs = std::move(c);
    p.lo = lo;
    p.hi = hi;
    return p;
  }
  static TimeProfile wave_kernel(double t) {
    require(t >= 0.0, "time must be nonnegative");
    TimeProfile p;
    p.kind = Kind::wave_kernel;
    p.lo = 0.0;
    p.hi = t;
    p.t = t;
    return p;
  }

  double operator()(double s, double rho) const {
    if (s < lo || s > hi) return 0.0;
    if (kind == Kind::wave_kernel) return wave::ghat_radial(t - s, rho);
    double v = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) v = v * s + *it;
    return v;
  }
  bool empty() const { return hi <= lo; }
};

/// Spatial Fourier coefficients phi^(xi) on the atoms of a measure.
struct SpatialProfile {
  enum class Kind { plane_wave, atom_coefficients };
  Kind kind = Kind::plane_wave;
  std::vector<double> x;       // plane wave: e^{-i xi . x}
  std::vector<cplx> coeffs;    // one per atom, in the measure's atom order

  static SpatialProfile plane_wave(std::vector<double> x) {
    SpatialProfile p;
    p.x = std::move(x);
    return p;
  }
  static SpatialProfile atom_coefficients(std::vector<cplx> c) {
    SpatialProfile p;
    p.kind = Kind::atom_coefficients;
    p.coeffs = std::move(c);
    return p;
  }

  cplx at(std::size_t index, const spectral::Atom& atom) const {
    if (kind == Kind::atom_coefficients) {
      require(index < coeffs.size(), "atom coefficient list is shorter than the atom list");
      return coeffs[index];
    }
    double ph = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) ph += atom.location[j] * x[j];
    return std::polar(1.0, -ph);
  }
};

struct TestFunction {
  TimeProfile time;
  SpatialProfile space;

  /// f_1(s, y; t, x) = G_{t-s}(x - y) 1_{[0,t]}(s).
  static TestFunction first_chaos_kernel(double t, std::vector<double> x) {
    return {TimeProfile::wave_kernel(t), SpatialProfile::plane_wave(std::move(x))};
  }
};

namespace detail {

// C(u) = int a(s + u) b(s) ds for u >= 0
inline double cross_correlation(const TimeProfile& a, const TimeProfile& b, double rho, double u, double tol) {
  const double lo = std::max(b.lo, a.lo - u);
  const double hi = std::min(b.hi, a.hi - u);
  if (hi <= lo) return 0.0;
  auto f = [&](double s) { return a(s + u, rho) * b(s, rho); };
  return quad::gk(f, lo, hi, tol).value;
}

// int_0^inf u^{-a0} C_ab(u) du, split at the kinks of C_ab
inline double one_sided_pairing(const TimeProfile& a, const TimeProfile& b, double rho, double alpha0, double tol) {
  const double top = a.hi - b.lo;
  if (top <= 0.0) return 0.0;
  std::vector<double> br{0.0, top};
  for (double k : {a.lo - b.hi, a.lo - b.lo, a.hi - b.hi})
    if (k > 0.0 && k < top) br.push_back(k);
  std::sort(br.begin(), br.end());
  br.erase(std::unique(br.begin(), br.end()), br.end());
  auto c = [&](double u) { return cross_correlation(a, b, rho, u, 0.01 * tol); };
  auto weighted = [&](double u) { return std::pow(u, -alpha0) * c(u); };
  double s = quad::left_power(c, br[0], br[1], -alpha0, tol).value;
  for (std::size_t i = 1; i + 1 < br.size(); ++i) s += quad::gk(weighted, br[i], br[i + 1], tol).value;
  return s;
}

}  // namespace detail

/// int int |r - s|^{-a0} a(r) b(s) dr ds at frequency |xi| = rho.
inline double time_pairing(const TimeProfile& a, const TimeProfile& b, double rho, double alpha0, double tol = 1e-10) {
  if (a.empty() || b.empty()) return 0.0;
  if (alpha0 == 0.0) {
    auto fa = [&](double s) { return a(s, rho); };
    auto fb = [&](double s) { return b(s, rho); };
    return quad::gk(fa, a.lo, a.hi, tol).value * quad::gk(fb, b.lo, b.hi, tol).value;
  }
  return detail::one_sided_pairing(a, b, rho, alpha0, tol) + detail::one_sided_pairing(b, a, rho, alpha0, tol);
}

namespace detail {

inline void require_sampleable(const SpectralMeasure& mu) {
  if (mu.kind() != spectral::MeasureKind::atomic)
    throw Unsupported("noise sampling needs an atomic measure; discretize continuous measures explicitly");
  if (mu.truncation_radius()) throw Unsupported("truncated lattice measures cannot be sampled exactly");
}

}  // namespace detail

/// <phi, psi>_H = sum_k m_k int int |r-s|^{-a0} phi^(r, xi_k) conj(psi^(s, xi_k)) dr ds.
inline double inner_product(const TestFunction& phi, const TestFunction& psi, const NoiseModel& model,
                            double tol = 1e-10) {
  const auto& mu = model.measure;
  detail::require_sampleable(mu);
  std::map<double, double> cache;  // time pairings depend on |xi| only
  cplx sum = 0.0;
  const auto& atoms = mu.atoms();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const cplx c = phi.space.at(k, atoms[k]) * std::conj(psi.space.at(k, atoms[k]));
    if (c == cplx(0.0)) continue;
    const double rho = atoms[k].radius();
    auto it = cache.find(rho);
    if (it == cache.end()) it = cache.emplace(rho, time_pairing(phi.time, psi.time, rho, model.alpha0, tol)).first;
    sum += atoms[k].weight * c * it->second;
  }
  if (std::abs(sum.imag()) > 1e-8 * std::max(1.0, std::abs(sum.real())))
    throw InvalidParameter("test functions are not real: inner product has an imaginary part");
  return sum.real();
}

struct GramMatrix {
  Eigen::MatrixXd values;
  double tolerance = 0.0;  // quadrature tolerance used for the entries
};

inline GramMatrix gram(const std::vector<TestFunction>& family, const NoiseModel& model, double tol = 1e-10) {
  const auto n = static_cast<Eigen::Index>(family.size());
  GramMatrix g;
  g.values.resize(n, n);
  g.tolerance = tol;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i; j < n; ++j)
      g.values(i, j) = g.values(j, i) = inner_product(family[i], family[j], model, tol);
  return g;
}

struct GaussianSamples {
  Eigen::MatrixXd values;   // one sample per row
  double clipped = 0.0;     // sum of |negative eigenvalues| set to zero
  double min_eigenvalue = 0.0;
};

/// Symmetric square root of a PSD matrix; eigenvalues above -1e-10 trace are clipped to 0.
inline Eigen::MatrixXd psd_sqrt(const Eigen::MatrixXd& gram, double* clipped = nullptr, double* min_eig = nullptr) {
  require(gram.rows() == gram.cols(), "Gram matrix must be square");
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, gram.cwiseAbs().maxCoeff()))
    throw InvalidGram("Gram matrix is not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success) throw InvalidGram("eigendecomposition failed");
  Eigen::VectorXd ev = es.eigenvalues();
  const double floor = -1e-10 * std::max(gram.trace(), 0.0);
  double cut = 0.0;
  if (ev.size() > 0 && min_eig) *min_eig = ev.minCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < floor) throw InvalidGram("Gram matrix has eigenvalue " + std::to_string(ev[i]));
    if (ev[i] < 0.0) {
      cut += -ev[i];
      ev[i] = 0.0;
    }
  }
  if (clipped) *clipped = cut;
  return es.eigenvectors() * ev.cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

/// Rows are i.i.d. N(0, gram) vectors. Row i uses chunk i / chunk_size of the stream.
inline GaussianSamples sample_gaussian_family(const Eigen::MatrixXd& gram, std::uint64_t n_samples,
                                              std::uint64_t seed, unsigned threads = 1,
                                              std::uint64_t chunk_size = 1u << 14) {
  require(n_samples > 0, "sample count must be positive");
  GaussianSamples out;
  const Eigen::MatrixXd root = psd_sqrt(gram, &out.clipped, &out.min_eigenvalue);
  const Eigen::Index m = gram.rows();
  out.values.resize(static_cast<Eigen::Index>(n_samples), m);
  const std::size_t chunks = (n_samples + chunk_size - 1) / chunk_size;
  const auto op = rng::op_id("sample_gaussian_family");
  rng::parallel_chunks(chunks, threads, [&](std::size_t c) {
    rng::Stream s(seed, op, static_cast<std::uint32_t>(c));
    Eigen::VectorXd z(m);
    const std::uint64_t end = std::min<std::uint64_t>(n_samples, (c + 1) * chunk_size);
    for (std::uint64_t i = c * chunk_size; i < end; ++i) {
      for (Eigen::Index j = 0; j < m; ++j) z[j] = s.normal();
      out.values.row(static_cast<Eigen::Index>(i)) = (root * z).transpose();
    }
  });
  return out;
}

// ---------------------------------------------------------------------------
// First-chaos variance check
// ---------------------------------------------------------------------------

struct VarianceReport {
  double norm_quadrature = 0.0;
  double norm_error = 0.0;
  double norm_empirical = 0.0;
  double standard_error = 0.0;
  double z = 0.0;
  std::uint64_t samples = 0;
  std::size_t components = 0;
  double clipped = 0.0;
  bool passed = false;
};

/// Splits f_1(., t, x) into the cos and sin parts of each atom pair, samples the
/// Gaussian vector of their W-values, and compares Var W(f_1) with the time-domain norm.
inline VarianceReport first_chaos_variance_check(const NoiseModel& model, double t, std::uint64_t n_samples,
                                                 std::uint64_t seed, std::vector<double> x = {},
                                                 unsigned threads = 1, double z_max = 4.0) {
  const auto& mu = model.measure;
  detail::require_sampleable(mu);
  const auto& atoms = mu.atoms();
  require(atoms.size() <= 64, "variance check supports at most 64 atoms");
  if (x.empty()) x.assign(mu.dimension(), 0.0);
  require(static_cast<int>(x.size()) == mu.dimension(), "point has wrong dimension");

  // pair each atom with its mirror image
  std::vector<int> mate(atoms.size(), -1);
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (mate[i] >= 0) continue;
    for (std::size_t j = i; j < atoms.size(); ++j) {
      if (mate[j] >= 0) continue;
      bool mirror = true;
      for (int k = 0; k < mu.dimension(); ++k)
        if (std::abs(atoms[i].location[k] + atoms[j].location[k]) > 1e-12 * std::max(1.0, atoms[i].radius()))
          mirror = false;
      if (mirror) {
        mate[i] = static_cast<int>(j);
        mate[j] = static_cast<int>(i);
        break;
      }
    }
  }
  std::vector<TestFunction> family;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    if (mate[i] < static_cast<int>(i)) continue;
    double ph = 0.0;
    for (int k = 0; k < mu.dimension(); ++k) ph += atoms[i].location[k] * x[k];
    std::vector<cplx> cos_part(atoms.size(), 0.0), sin_part(atoms.size(), 0.0);
    cos_part[i] = cos_part[mate[i]] = std::cos(ph);
    sin_part[i] = cplx(0.0, -std::sin(ph));
    sin_part[mate[i]] = cplx(0.0, std::sin(ph));
    family.push_back({TimeProfile::wave_kernel(t), SpatialProfile::atom_coefficients(cos_part)});
    if (static_cast<std::size_t>(mate[i]) != i && std::abs(std::sin(ph)) > 0.0)
      family.push_back({TimeProfile::wave_kernel(t), SpatialProfile::atom_coefficients(sin_part)});
  }

  VarianceReport rep;
  rep.samples = n_samples;
  rep.components = family.size();
  const auto norm = chaos::first_chaos_norm_time(chaos::ChaosKernelSpec(1, t, model));
  rep.norm_quadrature = norm.value;
  rep.norm_error = norm.error;

  const GramMatrix g = gram(family, model);
  const auto draws = sample_gaussian_family(g.values, n_samples, seed, threads);
  rep.clipped = draws.clipped;
  rng::Moments sq;
  const Eigen::VectorXd w = draws.values.rowwise().sum();
  for (Eigen::Index i = 0; i < w.size(); ++i) sq.add(w[i] * w[i]);
  rep.norm_empirical = sq.mean;
  rep.standard_error = sq.stderr_of_mean();
  if (rep.standard_error > 0.0) {
    rep.z = (rep.norm_empirical - rep.norm_quadrature) / rep.standard_error;
    rep.passed = std::abs(rep.z) <= z_max;
  } else {
    rep.passed = rep.norm_empirical == rep.norm_quadrature;
  }
  return rep;
}

}  // namespace hyperwave::noise
