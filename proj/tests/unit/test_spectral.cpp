#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hyperwave/spectral.hpp"

using namespace hyperwave;
using spectral::CovarianceDescriptor;
using spectral::SpectralMeasure;

namespace {

constexpr double kPi = 3.14159265358979323846;

SpectralMeasure pm_pi() {
  return SpectralMeasure::atomic(1, {{{kPi}, 1.0}, {{-kPi}, 1.0}});
}

std::vector<CovarianceDescriptor> catalog() {
  return {CovarianceDescriptor::riesz(0.5, 1), CovarianceDescriptor::riesz(1.0, 2), CovarianceDescriptor::riesz(2.5, 3),
          CovarianceDescriptor::white_noise(1), CovarianceDescriptor::white_noise(2),
          CovarianceDescriptor::white_noise(3), CovarianceDescriptor::fractional_sheet({0.75}),
          CovarianceDescriptor::fractional_sheet({0.7, 0.6}), CovarianceDescriptor::bessel(3.0, 2),
          CovarianceDescriptor::delta_comb(1.0, 1, 20.0)};
}

}  // namespace

TEST(Constants, RieszConstantAgainstFrozenValues) {
  // mpmath: 2^{d-a} pi^{d/2} Gamma((d-a)/2) / Gamma(a/2)
  EXPECT_NEAR(constants::riesz(1.0, 2), 2.0 * kPi, 1e-13);
  EXPECT_NEAR(constants::riesz(0.5, 1), 2.5066282746310005, 1e-13);
}

TEST(Constants, FourierWeightConstantAgainstFrozenValues) {
  EXPECT_NEAR(constants::c_alpha0(0.25), 0.14927036108294766, 1e-14);
  EXPECT_NEAR(constants::c_alpha0(0.5), 0.39894228040143268, 1e-14);
  EXPECT_NEAR(constants::c_alpha0(0.75), 1.0662193213524481, 1e-13);
}

TEST(Constants, OneDimensionalPowerTransformByQuadrature) {
  // int |x|^{-b} e^{-i xi x} dx at xi = 1, as 2 int_0^inf x^{-b} cos x dx, summed over half periods
  const double b = 0.4;
  double s = 0.0;
  const int n = 4000;
  // [0, pi/2] with x = u^{1/(1-b)} removes the endpoint power
  const double p = 1.0 / (1.0 - b);
  const double umax = std::pow(kPi / 2, 1.0 - b);
  for (int i = 0; i < n; ++i) {
    const double u = (i + 0.5) * umax / n;
    s += p * std::cos(std::pow(u, p)) * umax / n;
  }
  // alternating tail with Euler averaging over partial sums
  std::vector<double> partial;
  double acc = s;
  for (int k = 0; k < 40; ++k) {
    const double a = kPi / 2 + k * kPi, c = a + kPi;
    double piece = 0.0;
    for (int i = 0; i < n; ++i) {
      const double x = a + (i + 0.5) * (c - a) / n;
      piece += std::pow(x, -b) * std::cos(x) * (c - a) / n;
    }
    acc += piece;
    partial.push_back(acc);
  }
  for (int level = 0; level < 12; ++level)
    for (std::size_t i = 0; i + 1 < partial.size() - level; ++i) partial[i] = 0.5 * (partial[i] + partial[i + 1]);
  EXPECT_NEAR(2.0 * partial[0], constants::power_1d(b), 1e-6);
}

TEST(Spectral, RieszDescriptorCarriesDensityAndOrder) {
  const auto mu = spectral::to_spectral(CovarianceDescriptor::riesz(1.0, 3));
  EXPECT_EQ(*mu.homogeneity_order(), 1.0);
  const double xi[3] = {0.0, 2.0, 0.0};
  EXPECT_NEAR(mu.density()(xi), constants::riesz(1.0, 3) / 4.0, 1e-14);
}

TEST(Spectral, WhiteNoiseHasUnitDensity) {
  const auto mu = spectral::to_spectral(CovarianceDescriptor::white_noise(2));
  EXPECT_EQ(*mu.homogeneity_order(), 2.0);
  const double xi[2] = {0.3, -7.0};
  EXPECT_EQ(mu.density()(xi), 1.0);
}

TEST(Spectral, FractionalSheetOrder) {
  EXPECT_DOUBLE_EQ(*CovarianceDescriptor::fractional_sheet({0.75}).homogeneity(), 0.5);
  EXPECT_DOUBLE_EQ(*spectral::to_spectral(CovarianceDescriptor::fractional_sheet({0.75})).homogeneity_order(), 0.5);
}

TEST(Spectral, RadialMassExamples) {
  EXPECT_DOUBLE_EQ(spectral::radial_mass(SpectralMeasure::homogeneous_radial(1, 1.0, 1.0), 2.0), 2.0);
  EXPECT_EQ(spectral::radial_mass(pm_pi(), 1.0), 0.0);
  EXPECT_NEAR(spectral::radial_mass(spectral::to_spectral(CovarianceDescriptor::white_noise(1)), 1.0), 2.0, 1e-12);
}

TEST(Spectral, FractionalSheetUnitBallMassMatchesDirectQuadrature) {
  const auto mu = spectral::to_spectral(CovarianceDescriptor::fractional_sheet({0.7, 0.6}));
  // polar: int_0^1 r^{a-1} dr * int_0^{2pi} |cos|^{b1-1}|sin|^{b2-1} dphi * c, midpoint in phi
  const double b1 = 0.6, b2 = 0.8, a = b1 + b2;
  const double c = constants::power_1d(b1) * constants::power_1d(b2);
  // quarter circle with phi = (pi/2) v^{1/b2} near 0 and symmetric near pi/2; use the Beta identity instead
  const double beta = std::tgamma(0.5 * b1) * std::tgamma(0.5 * b2) / std::tgamma(0.5 * (b1 + b2));
  const double oracle = c * 2.0 * beta / a;
  EXPECT_NEAR(mu.unit_ball_mass(), oracle, 1e-12 * oracle);
}

TEST(Spectral, GammaEvalExamples) {
  const double x3[3] = {2.0, 0.0, 0.0};
  EXPECT_DOUBLE_EQ(spectral::gamma_eval(CovarianceDescriptor::riesz(1.0, 3), x3), 0.5);
  const double x1[1] = {4.0};
  EXPECT_DOUBLE_EQ(spectral::gamma_eval(CovarianceDescriptor::fractional_sheet({0.75}), x1), 0.5);
  const double zero[1] = {0.0};
  EXPECT_THROW(spectral::gamma_eval(CovarianceDescriptor::riesz(0.5, 1), zero), SingularityError);
  EXPECT_THROW(spectral::gamma_eval(CovarianceDescriptor::white_noise(1), x1), Unsupported);
  EXPECT_THROW(spectral::gamma_eval(CovarianceDescriptor::delta_comb(1.0, 1, 5.0), x1), Unsupported);
}

TEST(Spectral, BesselKernelMatchesInverseTransform) {
  // d = 1, s = 2: gamma(x) = e^{-|x|} / 2
  const auto cov = CovarianceDescriptor::bessel(2.0, 1);
  for (double x : {0.1, 0.7, 2.0, 5.0}) {
    const double p[1] = {x};
    EXPECT_NEAR(spectral::gamma_eval(cov, p), 0.5 * std::exp(-x), 1e-13);
  }
  // d = 3, s = 2: gamma(x) = e^{-|x|} / (4 pi |x|)
  const auto cov3 = CovarianceDescriptor::bessel(2.0, 3);
  const double p[3] = {0.0, 1.5, 0.0};
  EXPECT_NEAR(spectral::gamma_eval(cov3, p), std::exp(-1.5) / (4.0 * kPi * 1.5), 1e-13);
}

TEST(Spectral, InvalidParametersAreRejected) {
  EXPECT_THROW(spectral::to_spectral(CovarianceDescriptor::riesz(1.5, 1)), InvalidParameter);
  EXPECT_THROW(spectral::to_spectral(CovarianceDescriptor::fractional_sheet({0.4})), InvalidParameter);
  EXPECT_THROW(SpectralMeasure::homogeneous_radial(1, 2.0, 1.0), InvalidParameter);
  EXPECT_THROW(SpectralMeasure::atomic(1, {{{1.0}, 1.0}}), InvalidParameter);
  EXPECT_THROW(SpectralMeasure::atomic(1, {{{1.0}, -1.0}, {{-1.0}, -1.0}}), InvalidParameter);
  EXPECT_THROW(spectral::NoiseModel(pm_pi(), 1.0), InvalidParameter);
}

TEST(SpectralProperty, HomogeneityOfRadialMass) {
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.05, 4.0);
  for (const auto& cov : catalog()) {
    if (!cov.homogeneity()) continue;
    const auto mu = spectral::to_spectral(cov);
    const double a = *mu.homogeneity_order();
    for (int i = 0; i < 5; ++i) {
      const double r = u(gen), c = u(gen);
      const double lhs = spectral::radial_mass(mu, c * r);
      const double rhs = std::pow(c, a) * spectral::radial_mass(mu, r);
      EXPECT_NEAR(lhs, rhs, 1e-8 * std::abs(rhs)) << spectral::to_string(cov.kind);
    }
  }
}

TEST(SpectralProperty, RadialMassFromDensityMatchesHomogeneousLaw) {
  // riesz: integrate C r^{a-d} S_{d-1} r^{d-1} dr directly by midpoint in u = r^a
  const auto cov = CovarianceDescriptor::riesz(1.0, 2);
  const auto mu = spectral::to_spectral(cov);
  const double expected = constants::riesz(1.0, 2) * 2.0 * kPi * 1.5;  // int_0^1.5 dr
  EXPECT_NEAR(spectral::radial_mass(mu, 1.5), expected, 1e-10 * expected);
}

TEST(SpectralProperty, GammaScaling) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(0.1, 3.0);
  for (const auto& cov : catalog()) {
    if (cov.kind != spectral::CovarianceKind::riesz && cov.kind != spectral::CovarianceKind::fractional_sheet) continue;
    const double a = *cov.homogeneity();
    for (int i = 0; i < 20; ++i) {
      std::vector<double> x(cov.dimension), cx(cov.dimension);
      const double c = u(gen);
      for (int j = 0; j < cov.dimension; ++j) {
        x[j] = u(gen) * (i % 2 ? 1 : -1);
        cx[j] = c * x[j];
      }
      const double lhs = spectral::gamma_eval(cov, cx);
      const double rhs = std::pow(c, -a) * spectral::gamma_eval(cov, x);
      EXPECT_NEAR(lhs, rhs, 1e-13 * rhs);
    }
  }
}

TEST(SpectralProperty, SymmetryOfDensitiesAndAtoms) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  for (const auto& cov : catalog()) {
    const auto mu = spectral::to_spectral(cov);
    if (mu.kind() == spectral::MeasureKind::atomic) {
      for (const auto& a : mu.atoms()) {
        bool found = false;
        for (const auto& b : mu.atoms()) {
          bool mirror = b.weight == a.weight;
          for (std::size_t j = 0; j < a.location.size(); ++j) mirror = mirror && b.location[j] == -a.location[j];
          found = found || mirror;
        }
        EXPECT_TRUE(found);
      }
      continue;
    }
    for (int i = 0; i < 20; ++i) {
      std::vector<double> xi(cov.dimension), neg(cov.dimension);
      for (int j = 0; j < cov.dimension; ++j) neg[j] = -(xi[j] = u(gen));
      EXPECT_EQ(mu.density()(xi), mu.density()(neg));
    }
  }
}

TEST(SpectralProperty, RadialMassNondecreasing) {
  for (const auto& cov : catalog()) {
    const auto mu = spectral::to_spectral(cov);
    double prev = 0.0;
    for (double r = 0.05; r <= 12.0; r += 0.37) {
      const double m = spectral::radial_mass(mu, r);
      EXPECT_GE(m, prev * (1.0 - 1e-12)) << spectral::to_string(cov.kind) << " r=" << r;
      prev = m;
    }
  }
}

TEST(Spectral, DeltaCombAtomsAndTailLaw) {
  const auto mu = spectral::to_spectral(CovarianceDescriptor::delta_comb(0.5, 2, 3.0));
  double total = 0.0;
  int count = 0;
  for (int i = -6; i <= 6; ++i)
    for (int j = -6; j <= 6; ++j)
      if (0.25 * (i * i + j * j) <= 9.0) {
        ++count;
        total += 0.25;
      }
  EXPECT_EQ(static_cast<int>(mu.atoms().size()), count);
  EXPECT_NEAR(spectral::radial_mass(mu, 3.0), total, 1e-12);
  EXPECT_EQ(*mu.truncation_radius(), 3.0);
  EXPECT_EQ(*mu.homogeneity_order(), 2.0);
  EXPECT_NEAR(mu.unit_ball_mass(), kPi, 1e-14);
}

TEST(Spectral, DiscretizationPreservesShellMasses) {
  const auto base = spectral::to_spectral(CovarianceDescriptor::riesz(0.5, 1));
  const auto disc = spectral::discretize(base, 0.1, 10.0, 8);
  EXPECT_EQ(disc.atoms().size(), 18u);
  EXPECT_NEAR(spectral::radial_mass(disc, 10.0), spectral::radial_mass(base, 10.0), 1e-9);
  // each shell's atoms lie inside the shell
  const double q = std::pow(100.0, 1.0 / 8.0);
  EXPECT_NEAR(spectral::radial_mass(disc, 0.1 * q), spectral::radial_mass(base, 0.1 * q), 1e-9);
}
