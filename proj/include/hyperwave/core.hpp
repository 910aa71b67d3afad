#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>

namespace hyperwave {

// ---------------------------------------------------------------------------
// Error hierarchy. Every failure mode the toolkit reports maps onto one of
// these; the CLI turns them into exit codes.
// ---------------------------------------------------------------------------

class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A parameter is outside the domain of the operation (exit code 2).
class InvalidParameter : public Error {
public:
  using Error::Error;
};

/// Point evaluation at a pole of a singular kernel.
class SingularityError : public Error {
public:
  using Error::Error;
};

/// The requested operation is not defined for this kind of input.
class Unsupported : public Error {
public:
  using Error::Error;
};

/// Quadrature could not reach the requested tolerance.
class QuadratureError : public Error {
public:
  QuadratureError(const std::string& what, double achieved)
      : Error(what + " (achieved error bound " + std::to_string(achieved) + ")"),
        achieved_(achieved) {}
  double achieved() const noexcept { return achieved_; }

private:
  double achieved_;
};

/// Monte Carlo diagnostics indicate the estimator is unreliable.
class McDiagnosticError : public Error {
public:
  using Error::Error;
};

/// Gram matrix is indefinite beyond the numerical tolerance.
class InvalidGram : public Error {
public:
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Estimate
// ---------------------------------------------------------------------------

enum class Method { closed_form, quadrature, mc };

inline std::string_view to_string(Method m) {
  switch (m) {
    case Method::closed_form: return "closed-form";
    case Method::quadrature: return "quadrature";
    case Method::mc: return "mc";
  }
  return "?";
}

/// A value with its uncertainty: a standard error for Monte Carlo, an
/// absolute error bound for deterministic routes.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
  std::uint64_t samples = 0;
  Method method = Method::quadrature;
};

// ---------------------------------------------------------------------------
// Convention constants
//
// Fourier transform: (F f)(xi) = int e^{-i xi.x} f(x) dx.
// Spectral measure mu = F gamma, so gamma = delta has density 1.
// The H-norm is the spectral form int int |r-s|^{-a0} phi^(r,xi) conj(psi^(s,xi)) mu(dxi) dr ds;
// the direct-space double integral with gamma equals (2 pi)^{-d} times it.
// ---------------------------------------------------------------------------

namespace constants {

inline constexpr int table_version = 1;
inline constexpr double pi = std::numbers::pi;

/// Riesz kernel |x|^{-alpha} in R^d has F-transform riesz(alpha, d) |xi|^{alpha-d}.
inline double riesz(double alpha, int d) {
  return std::pow(2.0, d - alpha) * std::pow(pi, 0.5 * d) * std::tgamma(0.5 * (d - alpha)) /
         std::tgamma(0.5 * alpha);
}

/// 1-d transform of |x|^{-beta}, beta in (0,1): c |xi|^{beta-1}.
inline double power_1d(double beta) { return 2.0 * std::tgamma(1.0 - beta) * std::sin(0.5 * pi * beta); }

/// Time-frequency constant: int int |r-s|^{-a0} a(r) a(s) = c_a0 int |l|^{a0-1} |int e^{i l s} a(s) ds|^2 dl.
inline double c_alpha0(double alpha0) {
  return std::tgamma(1.0 - alpha0) * std::sin(0.5 * pi * alpha0) / pi;
}

/// Factor converting the spectral H-norm into the direct-space double integral.
inline double direct_space_factor(int d) { return std::pow(2.0 * pi, -d); }

/// Surface area of the unit sphere in R^d (d=1: the two points +-1).
inline double sphere_area(int d) { return 2.0 * std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d); }

/// Volume of the unit ball in R^d.
inline double ball_volume(int d) { return std::pow(pi, 0.5 * d) / std::tgamma(0.5 * d + 1.0); }

}  // namespace constants

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw InvalidParameter(msg);
}

inline void require_dimension(int d) { require(d >= 1 && d <= 3, "dimension must be 1, 2 or 3"); }

}  // namespace hyperwave
