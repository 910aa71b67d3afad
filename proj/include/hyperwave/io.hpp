#pragma once

// Versioned JSON documents for measures, models and initial data, and JSON
// views of the result types.
//
// measure:  {"dimension": d, "kind": K, "params": {...}}
//   riesz             {"alpha"}
//   white-noise       {}
//   fractional-sheet  {"hurst": [H_1, ...]}
//   delta-comb        {"spacing", "truncation_radius"}
//   bessel            {"order"}
//   atomic            {"atoms": [{"location": [...], "weight"}], "truncation_radius"?, "homogeneity_order"?}
//   homogeneous-radial {"alpha", "unit_ball_mass"}
//   discretized       {"base": measure, "r_min", "r_max", "shells"}
// model:    {"schema": "hyperwave.model/1", "alpha0", "measure", "initial_data"?}

#include <json.hpp>

#include <fstream>
#include <optional>
#include <string>

#include "hyperwave/chaosnorm.hpp"
#include "hyperwave/condition.hpp"
#include "hyperwave/core.hpp"
#include "hyperwave/spectral.hpp"
#include "hyperwave/wavekernel.hpp"

namespace hyperwave::io {

using json = nlohmann::json;

inline constexpr const char* model_schema = "hyperwave.model/1";

class ParseError : public InvalidParameter {
public:
  using InvalidParameter::InvalidParameter;
};

namespace detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
  return j.at(key);
}

inline double number(const json& j, const char* key) {
  const json& v = field(j, key);
  if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

inline std::vector<double> numbers(const json& v, const char* what) {
  if (!v.is_array()) throw ParseError(std::string(what) + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ParseError(std::string(what) + " must be an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

inline std::vector<spectral::Atom> atoms(const json& v) {
  if (!v.is_array()) throw ParseError("atoms must be an array");
  std::vector<spectral::Atom> out;
  for (const auto& a : v) out.push_back({numbers(field(a, "location"), "location"), number(a, "weight")});
  return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

struct MeasureDoc {
  spectral::SpectralMeasure measure;
  std::optional<spectral::CovarianceDescriptor> covariance;  // set for catalog kinds
};

inline std::optional<spectral::CovarianceDescriptor> covariance_from_json(const json& j) {
  const int d = static_cast<int>(detail::number(j, "dimension"));
  const std::string kind = detail::field(j, "kind").get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  using CD = spectral::CovarianceDescriptor;
  if (kind == "riesz") return CD::riesz(detail::number(params, "alpha"), d);
  if (kind == "white-noise") return CD::white_noise(d);
  if (kind == "fractional-sheet") {
    auto h = detail::numbers(detail::field(params, "hurst"), "hurst");
    require(static_cast<int>(h.size()) == d, "fractional-sheet needs one Hurst index per dimension");
    return CD::fractional_sheet(std::move(h));
  }
  if (kind == "delta-comb") {
    const double r = params.contains("truncation_radius") ? detail::number(params, "truncation_radius") : 32.0;
    return CD::delta_comb(detail::number(params, "spacing"), d, r);
  }
  if (kind == "bessel") return CD::bessel(detail::number(params, "order"), d);
  return std::nullopt;
}

inline MeasureDoc measure_from_json(const json& j) {
  const int d = static_cast<int>(detail::number(j, "dimension"));
  require_dimension(d);
  const std::string kind = detail::field(j, "kind").get<std::string>();
  const json params = j.contains("params") ? j.at("params") : json::object();
  if (auto cov = covariance_from_json(j)) return {spectral::to_spectral(*cov), cov};
  if (kind == "atomic") {
    std::optional<double> cut, alpha, tail;
    if (params.contains("truncation_radius")) cut = detail::number(params, "truncation_radius");
    if (params.contains("homogeneity_order")) alpha = detail::number(params, "homogeneity_order");
    if (params.contains("tail_unit_mass")) tail = detail::number(params, "tail_unit_mass");
    return {spectral::SpectralMeasure::atomic(d, detail::atoms(detail::field(params, "atoms")), cut, alpha, tail),
            std::nullopt};
  }
  if (kind == "homogeneous-radial")
    return {spectral::SpectralMeasure::homogeneous_radial(d, detail::number(params, "alpha"),
                                                          detail::number(params, "unit_ball_mass")),
            std::nullopt};
  if (kind == "discretized") {
    const auto base = measure_from_json(detail::field(params, "base"));
    return {spectral::discretize(base.measure, detail::number(params, "r_min"), detail::number(params, "r_max"),
                                 static_cast<int>(detail::number(params, "shells"))),
            std::nullopt};
  }
  throw ParseError("unknown measure kind '" + kind + "'");
}

inline json to_json(const spectral::CovarianceDescriptor& c) {
  using K = spectral::CovarianceKind;
  json params = json::object();
  switch (c.kind) {
    case K::riesz: params["alpha"] = c.alpha; break;
    case K::white_noise: break;
    case K::fractional_sheet: params["hurst"] = c.hurst; break;
    case K::delta_comb:
      params["spacing"] = c.spacing;
      params["truncation_radius"] = c.truncation_radius;
      break;
    case K::bessel: params["order"] = c.order; break;
  }
  return {{"dimension", c.dimension}, {"kind", spectral::to_string(c.kind)}, {"params", params}};
}

/// Atom lists and homogeneous-radial profiles; continuous densities only round-trip through the catalog.
inline json to_json(const spectral::SpectralMeasure& mu) {
  json params = json::object();
  switch (mu.kind()) {
    case spectral::MeasureKind::atomic: {
      json atoms = json::array();
      for (const auto& a : mu.atoms()) atoms.push_back({{"location", a.location}, {"weight", a.weight}});
      params["atoms"] = atoms;
      if (mu.truncation_radius()) params["truncation_radius"] = *mu.truncation_radius();
      if (mu.homogeneity_order()) {
        params["homogeneity_order"] = *mu.homogeneity_order();
        params["tail_unit_mass"] = mu.unit_ball_mass();
      }
      return {{"dimension", mu.dimension()}, {"kind", "atomic"}, {"params", params}};
    }
    case spectral::MeasureKind::homogeneous_radial:
      params["alpha"] = *mu.homogeneity_order();
      params["unit_ball_mass"] = mu.unit_ball_mass();
      return {{"dimension", mu.dimension()}, {"kind", "homogeneous-radial"}, {"params", params}};
    case spectral::MeasureKind::continuous_density: break;
  }
  throw Unsupported("continuous densities are serialized through their covariance descriptor");
}

// ---------------------------------------------------------------------------
// Initial data
// ---------------------------------------------------------------------------

inline wave::FunctionDescriptor function_from_json(const json& j) {
  using F = wave::FunctionDescriptor;
  const std::string kind = detail::field(j, "kind").get<std::string>();
  if (kind == "constant") return F::constant(detail::number(j, "value"));
  if (kind == "box")
    return F::box(detail::number(j, "height"), detail::numbers(detail::field(j, "center"), "center"),
                  detail::numbers(detail::field(j, "half_width"), "half_width"));
  if (kind == "gaussian")
    return F::gaussian(detail::number(j, "amplitude"), detail::numbers(detail::field(j, "center"), "center"),
                       detail::number(j, "sigma"));
  if (kind == "fourier-atoms") {
    std::vector<spectral::Atom> modes;
    for (const auto& m : detail::field(j, "modes"))
      modes.push_back({detail::numbers(detail::field(m, "location"), "location"), detail::number(m, "amplitude")});
    return F::fourier_atoms(std::move(modes));
  }
  throw ParseError("unknown function kind '" + kind + "'");
}

inline wave::InitialData initial_data_from_json(const json& j) {
  wave::InitialData data;
  if (j.contains("u0")) data.u0 = function_from_json(j.at("u0"));
  if (j.contains("u1")) data.u1 = function_from_json(j.at("u1"));
  return data;
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

struct ModelDoc {
  json source;
  spectral::NoiseModel model;
  std::optional<spectral::CovarianceDescriptor> covariance;
  std::optional<wave::InitialData> initial_data;
};

inline ModelDoc model_from_json(const json& j) {
  if (!j.is_object()) throw ParseError("model document must be a JSON object");
  if (j.contains("schema") && j.at("schema") != model_schema)
    throw ParseError("unsupported model schema " + j.at("schema").dump());
  const double a0 = j.contains("alpha0") ? detail::number(j, "alpha0") : 0.0;
  auto m = measure_from_json(detail::field(j, "measure"));
  ModelDoc doc{j, spectral::NoiseModel(std::move(m.measure), a0), m.covariance, std::nullopt};
  if (j.contains("initial_data")) doc.initial_data = initial_data_from_json(j.at("initial_data"));
  return doc;
}

inline json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline ModelDoc read_model(const std::string& path) { return model_from_json(read_json_file(path)); }

// ---------------------------------------------------------------------------
// Results
// ---------------------------------------------------------------------------

inline json to_json(const Estimate& e) {
  return {{"value", e.value}, {"error", e.error}, {"samples", e.samples}, {"method", std::string(to_string(e.method))}};
}

inline json to_json(const condition::ConvergenceVerdict& v) {
  json shells = json::array();
  for (const auto& s : v.shells) shells.push_back({{"k", s.k}, {"mass", s.mass}, {"error", s.error}});
  json j = {{"status", condition::to_string(v.status)},
            {"value", v.value ? json(*v.value) : json(nullptr)},
            {"error", v.error},
            {"analytic", v.analytic},
            {"shells", shells},
            {"fitted_tail_exponent", v.fitted_tail_exponent ? json(*v.fitted_tail_exponent) : json(nullptr)}};
  if (!v.note.empty()) j["note"] = v.note;
  return j;
}

}  // namespace hyperwave::io
