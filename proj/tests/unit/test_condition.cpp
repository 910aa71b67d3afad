#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

#include "hyperwave/condition.hpp"

using namespace hyperwave;
using condition::Status;
using spectral::CovarianceDescriptor;
using spectral::NoiseModel;
using spectral::SpectralMeasure;

namespace {

constexpr double kPi = 3.14159265358979323846;

NoiseModel model_of(const CovarianceDescriptor& c, double a0) { return NoiseModel(spectral::to_spectral(c), a0); }

std::vector<CovarianceDescriptor> catalog() {
  return {CovarianceDescriptor::riesz(0.5, 1),         CovarianceDescriptor::riesz(1.0, 2),
          CovarianceDescriptor::riesz(1.9, 2),         CovarianceDescriptor::riesz(2.5, 3),
          CovarianceDescriptor::riesz(1.5, 3),         CovarianceDescriptor::white_noise(1),
          CovarianceDescriptor::white_noise(2),        CovarianceDescriptor::white_noise(3),
          CovarianceDescriptor::fractional_sheet({0.75}), CovarianceDescriptor::fractional_sheet({0.7, 0.6}),
          CovarianceDescriptor::fractional_sheet({0.6, 0.6, 0.6}), CovarianceDescriptor::bessel(3.0, 2),
          CovarianceDescriptor::bessel(0.5, 3),        CovarianceDescriptor::delta_comb(1.0, 1, 30.0),
          CovarianceDescriptor::delta_comb(1.0, 2, 12.0)};
}

// independent dyadic-shell oracle for int (1+r^2)^{-beta/2} r^{a-1} dr: Simpson on each shell
double shell_oracle(double a, double beta, int k) {
  const double lo = std::ldexp(1.0, k), hi = 2.0 * lo;
  const int n = 2000;
  const double h = (hi - lo) / n;
  auto f = [&](double r) { return std::pow(1.0 + r * r, -0.5 * beta) * std::pow(r, a - 1.0); };
  double s = f(lo) + f(hi);
  for (int i = 1; i < n; ++i) s += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

}  // namespace

TEST(Condition, WhiteNoiseOneDimensionClosedForms) {
  const auto m = model_of(CovarianceDescriptor::white_noise(1), 0.0);
  const auto c = condition::condition_integral(m);
  ASSERT_EQ(c.status, Status::finite);
  EXPECT_NEAR(*c.value, 2.0, 1e-6);  // [xi / sqrt(1 + xi^2)] from -inf to inf
  const auto d = condition::dalang_integral(m);
  ASSERT_EQ(d.status, Status::finite);
  EXPECT_NEAR(*d.value, kPi, 1e-6);  // arctan
  const auto f = condition::first_chaos_integral(m);
  EXPECT_NEAR(*f.value, kPi / 2, 1e-6);
}

TEST(Condition, WhiteNoiseByDimension) {
  EXPECT_EQ(condition::condition_integral(model_of(CovarianceDescriptor::white_noise(3), 0.0)).status,
            Status::divergent);
  for (double a0 : {0.0, 0.3, 0.6, 0.95})
    EXPECT_EQ(condition::condition_integral(model_of(CovarianceDescriptor::white_noise(2), a0)).status,
              Status::finite);
  EXPECT_EQ(condition::dalang_integral(model_of(CovarianceDescriptor::white_noise(2), 0.0)).status, Status::divergent);
}

TEST(Condition, HomogeneousUnitMass) {
  const NoiseModel m(SpectralMeasure::homogeneous_radial(1, 1.0, 1.0), 0.0);
  const auto v = condition::condition_integral(m);
  ASSERT_EQ(v.status, Status::finite);
  EXPECT_NEAR(*v.value, 1.0, 1e-9);
}

TEST(Condition, RieszThreeDimensionsDalangByShellOracle) {
  // alpha = 2.5, d = 3: shells of int (1+r^2)^{-1} C |xi|^{-1/2} dxi grow like 2^{k/2}
  const double a = 2.5;
  std::vector<double> s;
  for (int k = 10; k < 18; ++k) s.push_back(shell_oracle(a, 2.0, k));
  for (std::size_t i = 1; i < s.size(); ++i) {
    EXPECT_GT(s[i], s[i - 1]);
    EXPECT_NEAR(s[i] / s[i - 1], std::sqrt(2.0), 1e-3);
  }
  const auto v = condition::dalang_integral(model_of(CovarianceDescriptor::riesz(2.5, 3), 0.0));
  EXPECT_EQ(v.status, Status::divergent);
  ASSERT_TRUE(v.fitted_tail_exponent);
  EXPECT_NEAR(*v.fitted_tail_exponent, 0.5, 0.01);
  // below alpha = 2 the same integral is finite
  EXPECT_EQ(condition::dalang_integral(model_of(CovarianceDescriptor::riesz(1.5, 3), 0.0)).status, Status::finite);
}

TEST(Condition, HomogeneousDecisionExamples) {
  EXPECT_FALSE(condition::homogeneous_decision(0.6, 2.5));
  EXPECT_TRUE(condition::homogeneous_decision(0.0, 2.9));
  EXPECT_THROW(condition::homogeneous_decision(1.0, 1.0), InvalidParameter);
}

TEST(Condition, FractionalSheetRecast) {
  // alpha0 = 2 - 2 H0, alpha = sum (2 - 2 H_j): a0 + alpha < 3 iff H0 + sum H_j > d - 1/2
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.51, 0.99);
  for (int i = 0; i < 200; ++i) {
    const int d = 1 + i % 3;
    const double h0 = u(gen);
    std::vector<double> h(d);
    double sum = h0;
    for (auto& x : h) sum += (x = u(gen));
    const auto m = model_of(CovarianceDescriptor::fractional_sheet(h), 2.0 - 2.0 * h0);
    const bool finite = condition::condition_integral(m).status == Status::finite;
    EXPECT_EQ(finite, sum > d - 0.5);
  }
  const auto m = model_of(CovarianceDescriptor::fractional_sheet({0.6, 0.6, 0.6}), 2.0 - 2.0 * 0.7);
  EXPECT_EQ(condition::condition_integral(m).status, Status::divergent);
}

TEST(Condition, BesselClosedForms) {
  // d = 2, s = 3: 2 pi int r (1+r^2)^{-(6-a0)/2} dr = 2 pi / (4 - a0)
  for (double a0 : {0.0, 0.5}) {
    const auto v = condition::condition_integral(model_of(CovarianceDescriptor::bessel(3.0, 2), a0));
    ASSERT_EQ(v.status, Status::finite);
    EXPECT_NEAR(*v.value, 2.0 * kPi / (4.0 - a0), 1e-6);
    EXPECT_FALSE(v.analytic);
  }
  // d = 3, s = 1/2, a0 = 0: 4 pi int r^2 (1+r^2)^{-7/4} dr = 2 pi Gamma(3/2) Gamma(1/4) / Gamma(7/4)
  const auto v = condition::condition_integral(model_of(CovarianceDescriptor::bessel(0.5, 3), 0.0));
  ASSERT_EQ(v.status, Status::finite);
  const double oracle = 2.0 * kPi * std::tgamma(1.5) * std::tgamma(0.25) / std::tgamma(1.75);
  EXPECT_NEAR(*v.value, oracle, 1e-5 * oracle);
  // its Dalang integral has shells growing like 2^{k/2}
  const auto d = condition::dalang_integral(model_of(CovarianceDescriptor::bessel(0.5, 3), 0.0));
  EXPECT_EQ(d.status, Status::divergent);
}

TEST(Condition, LatticeWithTailLaw) {
  // spacing 1 in d = 1, a0 = 0.25: sum_m (1 + m^2)^{-1.375}
  double s = 1.0;
  for (int m = 1; m < 2000000; ++m) s += 2.0 * std::pow(1.0 + double(m) * m, -1.375);
  s += 2.0 * std::pow(2e6, -1.75) / 1.75;
  const auto v = condition::condition_integral(model_of(CovarianceDescriptor::delta_comb(1.0, 1, 40.0), 0.25));
  ASSERT_EQ(v.status, Status::finite);
  EXPECT_NEAR(*v.value, s, v.error);
  EXPECT_EQ(condition::condition_integral(model_of(CovarianceDescriptor::delta_comb(0.5, 3, 6.0), 0.0)).status,
            Status::divergent);
}

TEST(Condition, TruncatedAtomsWithoutTailLawAreInconclusive) {
  const auto mu = SpectralMeasure::atomic(1, {{{1.0}, 1.0}, {{-1.0}, 1.0}, {{0.0}, 1.0}}, 1.5);
  const auto v = condition::condition_integral(NoiseModel(mu, 0.0));
  EXPECT_EQ(v.status, Status::inconclusive);
  EXPECT_FALSE(v.note.empty());
}

TEST(Condition, FiniteAtomListIsExact) {
  const auto mu = SpectralMeasure::atomic(1, {{{kPi}, 1.0}, {{-kPi}, 1.0}});
  const auto v = condition::condition_integral(NoiseModel(mu, 0.0));
  ASSERT_EQ(v.status, Status::finite);
  EXPECT_NEAR(*v.value, 2.0 * std::pow(1.0 + kPi * kPi, -1.5), 1e-15);
}

TEST(ConditionProperty, HomogeneousGridMatchesDecision) {
  for (int d = 1; d <= 3; ++d)
    for (double a0 : {0.0, 0.25, 0.5, 0.75, 0.99})
      for (double a = 0.5; a <= d + 1e-12; a += 0.5) {
        const NoiseModel m(SpectralMeasure::homogeneous_radial(d, a, 1.0), a0);
        const auto v = condition::condition_integral(m);
        EXPECT_EQ(v.status == Status::finite, condition::homogeneous_decision(a0, a)) << d << " " << a0 << " " << a;
        // the shell fit reproduces the exponent a + a0 - 3
        ASSERT_TRUE(v.fitted_tail_exponent);
        EXPECT_NEAR(*v.fitted_tail_exponent, a + a0 - 3.0, 0.01);
        if (a < d) {
          const auto r = condition::condition_integral(model_of(CovarianceDescriptor::riesz(a, d), a0));
          EXPECT_EQ(r.status, v.status);
        }
      }
}

TEST(ConditionProperty, MonotoneInAlpha0) {
  // the integrand grows with a0, so finiteness propagates to smaller a0 and divergence to larger a0
  for (const auto& cov : catalog()) {
    bool seen_divergent = false;
    std::optional<double> prev;
    for (double a0 : {0.0, 0.2, 0.4, 0.6, 0.8, 0.95}) {
      const auto v = condition::condition_integral(model_of(cov, a0));
      ASSERT_NE(v.status, Status::inconclusive) << spectral::to_string(cov.kind);
      if (seen_divergent) EXPECT_EQ(v.status, Status::divergent) << spectral::to_string(cov.kind) << " a0=" << a0;
      seen_divergent = seen_divergent || v.status == Status::divergent;
      if (prev && v.value) EXPECT_GE(*v.value, *prev * (1.0 - 1e-9));
      prev = v.value;
    }
  }
}

TEST(ConditionProperty, DalangImpliesCondition) {
  for (const auto& cov : catalog()) {
    const bool dalang = condition::dalang_integral(model_of(cov, 0.0)).status == Status::finite;
    for (double a0 : {0.1, 0.5, 0.9}) {
      const auto c = condition::condition_integral(model_of(cov, a0));
      if (dalang) EXPECT_EQ(c.status, Status::finite) << spectral::to_string(cov.kind);
      if (dalang && c.value)
        EXPECT_LE(*c.value, *condition::dalang_integral(model_of(cov, 0.0)).value * (1.0 + 1e-9));
    }
  }
}

TEST(SphericalReduce, Examples) {
  const auto atoms = SpectralMeasure::atomic(1, {{{kPi}, 1.0}, {{-kPi}, 1.0}});
  EXPECT_NEAR(condition::spherical_reduce(atoms, [](double r) { return r * r; }).value, 2.0 * kPi * kPi, 1e-12);
  const auto h = SpectralMeasure::homogeneous_radial(1, 1.0, 1.0);
  EXPECT_NEAR(condition::spherical_reduce(h, [](double r) { return std::pow(1.0 + r * r, -1.5); }).value, 1.0, 1e-8);
}

namespace {

// tensor midpoint rule in x = L s^3 coordinates, which flattens point singularities at the origin
double cartesian(int d, const spectral::DensityFn& rho, double (*f)(double), int n) {
  const double L = 6.0;
  const double h = 2.0 / n;
  std::vector<double> node(n), jac(n);
  for (int i = 0; i < n; ++i) {
    const double s = -1.0 + (i + 0.5) * h;
    node[i] = L * s * s * s;
    jac[i] = 3.0 * L * s * s * h;
  }
  double total = 0.0;
  std::vector<int> idx(d, 0);
  std::vector<double> xi(d);
  while (true) {
    double w = 1.0, r2 = 0.0;
    for (int j = 0; j < d; ++j) {
      xi[j] = node[idx[j]];
      w *= jac[idx[j]];
      r2 += xi[j] * xi[j];
    }
    total += w * rho(xi) * f(std::sqrt(r2));
    int j = 0;
    while (j < d && ++idx[j] == n) idx[j++] = 0;
    if (j == d) break;
  }
  return total;
}

double gauss_profile(double r) { return std::exp(-r * r); }

}  // namespace

TEST(SphericalReduceProperty, MatchesCartesianQuadratureOnRadialCatalog) {
  const std::vector<CovarianceDescriptor> radial = {
      CovarianceDescriptor::riesz(0.5, 1), CovarianceDescriptor::riesz(1.5, 2), CovarianceDescriptor::riesz(2.5, 3),
      CovarianceDescriptor::white_noise(1), CovarianceDescriptor::white_noise(2), CovarianceDescriptor::white_noise(3),
      CovarianceDescriptor::bessel(3.0, 2), CovarianceDescriptor::bessel(0.5, 3)};
  for (const auto& cov : radial) {
    const auto mu = spectral::to_spectral(cov);
    const int n = cov.dimension == 1 ? 20000 : cov.dimension == 2 ? 600 : 140;
    const double oracle = cartesian(cov.dimension, mu.density(), gauss_profile, n);
    const auto e = condition::spherical_reduce(mu, gauss_profile, 1e-10);
    EXPECT_NEAR(e.value, oracle, 1e-4 * oracle) << spectral::to_string(cov.kind) << " d=" << cov.dimension;
  }
  // white noise in d = 3: pi^{3/2}
  const auto e = condition::spherical_reduce(spectral::to_spectral(CovarianceDescriptor::white_noise(3)), gauss_profile);
  EXPECT_NEAR(e.value, std::pow(kPi, 1.5), 1e-6);
}

TEST(SphericalReduce, NonRadialHomogeneousSheet) {
  const auto mu = spectral::to_spectral(CovarianceDescriptor::fractional_sheet({0.7, 0.8}));
  const auto e = condition::spherical_reduce(mu, gauss_profile, 1e-9);
  // separable: prod_j c_j int |x|^{b_j - 1} e^{-x^2} dx = prod_j c_j Gamma(b_j / 2)
  double oracle = 1.0;
  for (double h : {0.7, 0.8}) {
    const double b = 2.0 - 2.0 * h;
    oracle *= constants::power_1d(b) * std::tgamma(0.5 * b);
  }
  EXPECT_NEAR(e.value, oracle, 1e-7 * oracle);
}
