#include <gtest/gtest.h>

#include <cmath>

#include "hyperwave/io.hpp"
#include "hyperwave/quadrature.hpp"
#include "hyperwave/rng.hpp"
#include "hyperwave/sweep.hpp"

using namespace hyperwave;
using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

TEST(Quadrature, SmoothAndSingularIntegrands) {
  EXPECT_NEAR(quad::gk([](double x) { return std::sin(x); }, 0.0, kPi).value, 2.0, 1e-13);
  EXPECT_NEAR(quad::gk_pieces([](double x) { return std::abs(x - 0.3); }, {0.0, 0.3, 1.0}).value, 0.29, 1e-14);
  EXPECT_NEAR(quad::left_power([](double) { return 1.0; }, 0.0, 1.0, -0.5).value, 2.0, 1e-13);
  EXPECT_NEAR(quad::right_power([](double x) { return x; }, 0.0, 1.0, -0.5).value, 4.0 / 3.0, 1e-12);
  EXPECT_NEAR(quad::tanh_sinh([](double x) { return std::log(x); }, 0.0, 1.0).value, -1.0, 1e-12);
  EXPECT_NEAR(quad::exp_sinh([](double x) { return std::exp(-x); }, 0.0).value, 1.0, 1e-12);
}

TEST(Quadrature, AbsoluteToleranceStopsRefinement) {
  const auto loose = quad::gk([](double x) { return std::sin(50.0 * x) * std::sin(50.0 * x); }, 0.0, 1.0, 1e-14, 4000, 1e-3);
  EXPECT_LE(loose.error, 1e-3);
}

TEST(Quadrature, GaussLegendreIsExactForPolynomials) {
  const auto r = quad::gauss_legendre(8);
  double w = 0.0, x14 = 0.0;
  for (std::size_t i = 0; i < r.x.size(); ++i) {
    w += r.w[i];
    x14 += r.w[i] * std::pow(r.x[i], 14);
  }
  EXPECT_NEAR(w, 2.0, 1e-14);
  EXPECT_NEAR(x14, 2.0 / 15.0, 1e-14);
}

TEST(Philox, StreamsAreReproducibleAndDistinct) {
  rng::Stream a(42, rng::op_id("x"), 0), b(42, rng::op_id("x"), 0), c(42, rng::op_id("x"), 1), e(43, rng::op_id("x"), 0);
  for (int i = 0; i < 100; ++i) {
    const double u = a.uniform();
    EXPECT_EQ(u, b.uniform());
    EXPECT_NE(u, c.uniform());
    EXPECT_NE(u, e.uniform());
    EXPECT_GT(u, 0.0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_NE(rng::op_id("x"), rng::op_id("y"));
}

TEST(Philox, UniformAndNormalMoments) {
  rng::Stream s(7, 1, 0);
  rng::Moments u, n, n2;
  for (int i = 0; i < 200000; ++i) {
    u.add(s.uniform());
    const double z = s.normal();
    n.add(z);
    n2.add(z * z);
  }
  EXPECT_NEAR(u.mean, 0.5, 0.003);
  EXPECT_NEAR(u.variance(), 1.0 / 12.0, 0.001);
  EXPECT_NEAR(n.mean, 0.0, 0.01);
  EXPECT_NEAR(n2.mean, 1.0, 0.01);
}

TEST(Moments, MergeEqualsSequential) {
  rng::Moments all, a, b;
  for (int i = 0; i < 1000; ++i) {
    const double x = std::sin(i * 1.7) + 0.01 * i;
    all.add(x);
    (i < 377 ? a : b).add(x);
  }
  a.merge(b);
  EXPECT_EQ(a.n, all.n);
  EXPECT_NEAR(a.mean, all.mean, 1e-14);
  EXPECT_NEAR(a.variance(), all.variance(), 1e-12);
}

TEST(RunChunked, IndependentOfThreadCount) {
  rng::McConfig cfg;
  cfg.samples = 100003;
  cfg.chunk_size = 1000;
  auto body = [](rng::Stream& s) { return s.uniform() * s.normal(); };
  const auto one = rng::run_chunked(cfg, 5, body);
  cfg.threads = 8;
  const auto many = rng::run_chunked(cfg, 5, body);
  EXPECT_EQ(one.total.mean, many.total.mean);
  EXPECT_EQ(one.total.m2, many.total.m2);
  EXPECT_EQ(one.total.n, 100003u);
}

TEST(Io, ParsesCatalogAndAtomicMeasures) {
  const auto doc = io::model_from_json(json::parse(R"({"schema": "hyperwave.model/1", "alpha0": 0.5,
      "measure": {"dimension": 1, "kind": "riesz", "params": {"alpha": 0.5}}})"));
  EXPECT_EQ(doc.model.alpha0, 0.5);
  ASSERT_TRUE(doc.covariance);
  EXPECT_EQ(doc.model.measure.homogeneity_order().value(), 0.5);
  const auto atoms = io::model_from_json(json::parse(R"({"measure": {"dimension": 1, "kind": "atomic",
      "params": {"atoms": [{"location": [1.0], "weight": 2.0}, {"location": [-1.0], "weight": 2.0}]}}})"));
  EXPECT_EQ(atoms.model.alpha0, 0.0);
  EXPECT_EQ(atoms.model.measure.atoms().size(), 2u);
  EXPECT_THROW(io::model_from_json(json::parse(R"({"measure": {"dimension": 1, "kind": "atomic",
      "params": {"atoms": [{"location": [1.0], "weight": 2.0}]}}})")), InvalidParameter);
}

TEST(Io, RejectsMalformedDocuments) {
  EXPECT_THROW(io::model_from_json(json::parse("[]")), io::ParseError);
  EXPECT_THROW(io::model_from_json(json::parse(R"({"measure": {"dimension": 1, "kind": "nope"}})")), io::ParseError);
  EXPECT_THROW(io::model_from_json(json::parse(R"({"measure": {"dimension": 1}})")), io::ParseError);
  EXPECT_THROW(io::model_from_json(json::parse(R"({"schema": "other/2", "measure": {}})")), io::ParseError);
  EXPECT_THROW(io::model_from_json(json::parse(R"({"measure": {"dimension": 4, "kind": "white-noise"}})")),
               InvalidParameter);
  EXPECT_THROW(io::read_model("/nonexistent/model.json"), io::ParseError);
}

TEST(IoProperty, MeasureRoundTrip) {
  const std::vector<spectral::SpectralMeasure> measures = {
      spectral::SpectralMeasure::atomic(2, {{{1.0, 0.5}, 0.7}, {{-1.0, -0.5}, 0.7}}),
      spectral::SpectralMeasure::homogeneous_radial(3, 1.5, 2.0),
      spectral::to_spectral(spectral::CovarianceDescriptor::delta_comb(0.5, 1, 6.0))};
  for (const auto& mu : measures) {
    const auto back = io::measure_from_json(io::to_json(mu)).measure;
    EXPECT_EQ(back.kind(), mu.kind());
    EXPECT_EQ(back.dimension(), mu.dimension());
    EXPECT_EQ(back.homogeneity_order(), mu.homogeneity_order());
    EXPECT_EQ(back.unit_ball_mass(), mu.unit_ball_mass());
    if (mu.kind() == spectral::MeasureKind::atomic) {
      ASSERT_EQ(back.atoms().size(), mu.atoms().size());
      for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
        EXPECT_EQ(back.atoms()[i].weight, mu.atoms()[i].weight);
        EXPECT_EQ(back.atoms()[i].location, mu.atoms()[i].location);
      }
    }
  }
}

TEST(IoProperty, CovarianceRoundTrip) {
  using CD = spectral::CovarianceDescriptor;
  for (const auto& c : {CD::riesz(0.7, 2), CD::white_noise(3), CD::fractional_sheet({0.6, 0.8}), CD::bessel(2.5, 1),
                        CD::delta_comb(2.0, 2, 10.0)}) {
    json j = {{"measure", io::to_json(c)}};
    const auto doc = io::model_from_json(j);
    ASSERT_TRUE(doc.covariance);
    EXPECT_EQ(io::to_json(*doc.covariance), io::to_json(c));
  }
}

TEST(Sweep, SinglePoints) {
  const auto finite = sweep::evaluate(2, 0.5, 1.0, 1.0, 1e-8);
  EXPECT_EQ(finite.verdict, "finite");
  EXPECT_TRUE(finite.expected_finite);
  const auto div = sweep::evaluate(3, 0.5, 2.5, 1.0, 1e-8);
  EXPECT_EQ(div.verdict, "divergent");
  const auto bad = sweep::evaluate(1, 0.5, 1.5, 1.0, 1e-8);
  EXPECT_EQ(bad.verdict, "invalid-parameter");
  EXPECT_FALSE(bad.decided());
}

TEST(Sweep, PhaseDiagramBoundary) {
  const auto rep = sweep::run(sweep::Grid::phase_diagram());
  EXPECT_EQ(rep.points.size(), 180u);
  EXPECT_EQ(rep.failed, 0);
  EXPECT_TRUE(rep.boundary_consistent);
  for (const auto& row : rep.boundary)
    if (row.first_divergent_alpha) EXPECT_GE(row.alpha0 + *row.first_divergent_alpha, 3.0 - 1e-12);
  const auto csv = sweep::to_csv(rep);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "d,alpha0,alpha,alpha0_plus_alpha,verdict,expected,value,fitted_tail_exponent");
}
