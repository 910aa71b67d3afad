#pragma once

// Condition verdicts over a grid of homogeneous radial models.

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hyperwave/condition.hpp"
#include "hyperwave/core.hpp"
#include "hyperwave/spectral.hpp"

namespace hyperwave::sweep {

struct Grid {
  std::vector<double> alpha0;
  std::vector<double> alpha;
  std::vector<int> dims;
  double unit_ball_mass = 1.0;
  double tol = 1e-8;

  static Grid phase_diagram() {
    Grid g;
    for (int i = 0; i < 10; ++i) g.alpha0.push_back(0.1 * i);
    for (int i = 1; i <= 6; ++i) g.alpha.push_back(0.5 * i);
    g.dims = {1, 2, 3};
    return g;
  }
};

struct Point {
  int d = 1;
  double alpha0 = 0.0;
  double alpha = 0.0;
  std::string verdict;  // finite | divergent | inconclusive | invalid-parameter | error
  std::optional<double> value;
  std::optional<double> fitted_tail_exponent;
  bool expected_finite = false;
  std::string message;

  bool decided() const { return verdict == "finite" || verdict == "divergent"; }
};

/// Smallest alpha with a divergent verdict for one (d, alpha0) row.
struct BoundaryRow {
  int d = 1;
  double alpha0 = 0.0;
  std::optional<double> first_divergent_alpha;
  std::optional<double> last_finite_alpha;
};

struct Report {
  std::vector<Point> points;
  std::vector<BoundaryRow> boundary;
  bool boundary_consistent = true;  // finite iff alpha0 + alpha < 3 on every decided point
  int invalid = 0;
  int failed = 0;                   // errors or inconclusive verdicts
  bool all_verdicts() const { return failed == 0; }
};

inline Point evaluate(int d, double alpha0, double alpha, double mass, double tol) {
  Point p;
  p.d = d;
  p.alpha0 = alpha0;
  p.alpha = alpha;
  p.expected_finite = alpha0 + alpha < 3.0;
  try {
    const spectral::NoiseModel model(spectral::SpectralMeasure::homogeneous_radial(d, alpha, mass), alpha0);
    const auto v = condition::condition_integral(model, tol);
    p.verdict = condition::to_string(v.status);
    p.value = v.value;
    p.fitted_tail_exponent = v.fitted_tail_exponent;
    if (!v.note.empty()) p.message = v.note;
  } catch (const InvalidParameter& e) {
    p.verdict = "invalid-parameter";
    p.message = e.what();
  } catch (const Error& e) {
    p.verdict = "error";
    p.message = e.what();
  }
  return p;
}

inline Report run(const Grid& grid) {
  require(!grid.alpha0.empty() && !grid.alpha.empty() && !grid.dims.empty(), "grid must be nonempty");
  Report rep;
  for (int d : grid.dims) {
    for (double a0 : grid.alpha0) {
      BoundaryRow row{d, a0, std::nullopt, std::nullopt};
      for (double a : grid.alpha) {
        Point p = evaluate(d, a0, a, grid.unit_ball_mass, grid.tol);
        if (p.verdict == "invalid-parameter") {
          ++rep.invalid;
        } else if (!p.decided()) {
          ++rep.failed;
        } else {
          const bool finite = p.verdict == "finite";
          if (finite != p.expected_finite) rep.boundary_consistent = false;
          if (finite) row.last_finite_alpha = a;
          else if (!row.first_divergent_alpha || a < *row.first_divergent_alpha) row.first_divergent_alpha = a;
        }
        rep.points.push_back(std::move(p));
      }
      rep.boundary.push_back(row);
    }
  }
  return rep;
}

inline std::string to_csv(const Report& rep) {
  std::ostringstream os;
  os.precision(17);
  os << "d,alpha0,alpha,alpha0_plus_alpha,verdict,expected,value,fitted_tail_exponent\n";
  for (const auto& p : rep.points) {
    os << p.d << ',' << p.alpha0 << ',' << p.alpha << ',' << p.alpha0 + p.alpha << ',' << p.verdict << ','
       << (p.expected_finite ? "finite" : "divergent") << ',';
    if (p.value) os << *p.value;
    os << ',';
    if (p.fitted_tail_exponent) os << *p.fitted_tail_exponent;
    os << '\n';
  }
  return os.str();
}

}  // namespace hyperwave::sweep
