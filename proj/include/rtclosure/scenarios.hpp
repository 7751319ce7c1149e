#pragma once

// Benchmark scenarios: isotropic initial data, cross sections, boundary,
// final time and the closures to compare.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtclosure/basis.hpp"
#include "rtclosure/closures.hpp"
#include "rtclosure/kinetic.hpp"
#include "rtclosure/weno.hpp"

namespace rtclosure {

/// Random truncated Fourier series, regenerated from its seed.
struct FourierIcSpec {
  std::uint64_t seed = 0;
  int k_max = 10;
};

/// amplify * (c1 / sqrt(2 pi theta) * exp(-(x - x0)^2 / (2 theta)) + c2)
struct GaussianIcSpec {
  double c1 = 0.5;
  double c2 = 2.5;
  double x0 = 0.5;
  double theta = 0.01;
  double amplify = 1.0;
};

/// 2 + sin(2 pi k x + phi)
struct WaveIcSpec {
  int k = 1;
  double phi = 0.0;
};

using IcSpec = std::variant<FourierIcSpec, GaussianIcSpec, WaveIcSpec>;

struct ConstantSigma {
  double sigma_s = 1.0;
  double sigma_a = 0.0;
};

/// sigma_s(x) = c1 (tanh(1 + c2 (x - x0)) + tanh(1 - c2 (x - x0))) + base
struct TanhBumpSigma {
  double c1 = 15.0;
  double c2 = 15.0;
  double x0 = 0.5;
  double base = 1.0;
  double sigma_a = 1.0;
};

/// Piecewise constant: "inside" on (x1, x2), "outside" elsewhere.
struct PiecewiseSigma {
  double x1 = 0.3;
  double x2 = 0.7;
  double sigma_s_inside = 1.0;
  double sigma_s_outside = 10.0;
  double sigma_a_inside = 0.0;
  double sigma_a_outside = 0.0;
};

using SigmaSpec = std::variant<ConstantSigma, TanhBumpSigma, PiecewiseSigma>;

inline double evaluate_ic(const IcSpec& ic, double x) {
  return std::visit(
      [x](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FourierIcSpec>) {
          return sample_fourier_ic(s.seed, s.k_max)(x);
        } else if constexpr (std::is_same_v<T, GaussianIcSpec>) {
          const double d = x - s.x0;
          return s.amplify * (s.c1 / std::sqrt(2.0 * std::numbers::pi * s.theta) *
                                  std::exp(-d * d / (2.0 * s.theta)) +
                              s.c2);
        } else {
          return 2.0 + std::sin(2.0 * std::numbers::pi * s.k * x + s.phi);
        }
      },
      ic);
}

inline void evaluate_sigma(const SigmaSpec& spec, double x, double& s, double& a) {
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantSigma>) {
          s = p.sigma_s;
          a = p.sigma_a;
        } else if constexpr (std::is_same_v<T, TanhBumpSigma>) {
          const double d = p.c2 * (x - p.x0);
          s = p.c1 * (std::tanh(1.0 + d) + std::tanh(1.0 - d)) + p.base;
          a = p.sigma_a;
        } else {
          const bool inside = p.x1 < x && x < p.x2;
          s = inside ? p.sigma_s_inside : p.sigma_s_outside;
          a = inside ? p.sigma_a_inside : p.sigma_a_outside;
        }
      },
      spec);
}

struct Scenario {
  std::string name;
  IcSpec ic = FourierIcSpec{};
  SigmaSpec sigma = ConstantSigma{};
  Boundary boundary = Boundary::periodic;
  double t_final = 0.5;
  std::vector<ClosureTag> closures;
  /// Moments whose relative L2 error is reported; -1 stands for m_N.
  std::vector<int> error_moments = {0, -1};

  /// f_0 at the cell centres.
  std::vector<double> initial_density(int nx) const {
    if (const auto* f = std::get_if<FourierIcSpec>(&ic)) {
      const FourierIc series = sample_fourier_ic(f->seed, f->k_max);
      std::vector<double> out;
      for (double x : cell_centers(nx)) out.push_back(series(x));
      return out;
    }
    std::vector<double> out;
    for (double x : cell_centers(nx)) out.push_back(evaluate_ic(ic, x));
    return out;
  }

  /// Cross sections sampled at cell centres.
  CrossSections cross_sections(int nx) const {
    CrossSections xs;
    for (double x : cell_centers(nx)) {
      double s = 0.0;
      double a = 0.0;
      evaluate_sigma(sigma, x, s, a);
      xs.sigma_s.push_back(s);
      xs.sigma_a.push_back(a);
    }
    return xs;
  }

  AngularField initial_field(int nx, const Quadrature& quad) const {
    const auto f0 = initial_density(nx);
    return isotropic_field(f0, quad, boundary);
  }

  void validate() const {
    if (name.empty()) throw std::invalid_argument("Scenario: empty name");
    if (!(t_final > 0.0)) throw std::invalid_argument("Scenario '" + name + "': t_final must be > 0");
    if (const auto* g = std::get_if<GaussianIcSpec>(&ic); g && !(g->theta > 0.0)) {
      throw std::invalid_argument("Scenario '" + name + "': theta must be > 0");
    }
    if (const auto* w = std::get_if<WaveIcSpec>(&ic); w && (w->k < 1 || w->k > 25)) {
      throw std::invalid_argument("Scenario '" + name + "': wave number must be in [1, 25]");
    }
    if (const auto* c = std::get_if<ConstantSigma>(&sigma)) {
      if (!(c->sigma_s >= 0.0) || !(c->sigma_a >= 0.0)) {
        throw std::invalid_argument("Scenario '" + name + "': negative cross section");
      }
    }
    if (const auto* p = std::get_if<PiecewiseSigma>(&sigma); p && !(0.0 < p->x1 && p->x1 < p->x2 && p->x2 < 1.0)) {
      throw std::invalid_argument("Scenario '" + name + "': need 0 < x1 < x2 < 1");
    }
  }
};

namespace detail {

inline std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

inline std::vector<ClosureTag> default_comparison() {
  return {ClosureTag::pn, ClosureTag::lm, ClosureTag::lgnm};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Catalog constructors

inline Scenario scenario_constant(double sigma_s, double sigma_a, std::uint64_t seed) {
  if (!(sigma_s >= 0.1 && sigma_s <= 100.0)) {
    throw std::invalid_argument("scenario_constant: sigma_s must be in [0.1, 100]");
  }
  if (!(sigma_a >= 0.0 && sigma_a <= 10.0)) {
    throw std::invalid_argument("scenario_constant: sigma_a must be in [0, 10]");
  }
  Scenario s;
  s.name = "constant-s" + detail::format_number(sigma_s) + "-a" + detail::format_number(sigma_a) +
           "-seed" + std::to_string(seed);
  s.ic = FourierIcSpec{seed, 10};
  s.sigma = ConstantSigma{sigma_s, sigma_a};
  s.t_final = 0.5;
  s.closures = detail::default_comparison();
  return s;
}

/// Name of the regime for sigma_s = sigma_t: thick (>= 100), intermediate
/// (>= 10) or thin.
inline std::string regime_name(double sigma_t) {
  if (sigma_t >= 100.0) return "thick";
  if (sigma_t >= 10.0) return "intermediate";
  return "thin";
}

inline Scenario scenario_variable_scattering(double sigma_base, std::uint64_t seed = 0) {
  if (!(sigma_base > 0.0)) throw std::invalid_argument("scenario_variable_scattering: base must be > 0");
  Scenario s;
  s.name = "variable-scattering-" + detail::format_number(sigma_base);
  s.ic = FourierIcSpec{seed, 10};
  s.sigma = TanhBumpSigma{15.0, 15.0, 0.5, sigma_base, 1.0};
  s.t_final = 0.5;
  s.closures = detail::default_comparison();
  return s;
}

inline Scenario scenario_gaussian(double c1, double c2, double x0, double theta, double amplify,
                                  Boundary boundary) {
  if (!(theta > 0.0)) throw std::invalid_argument("scenario_gaussian: theta must be > 0");
  if (!(amplify > 0.0)) throw std::invalid_argument("scenario_gaussian: amplify must be > 0");
  Scenario s;
  s.name = std::string("gaussian-") + to_string(boundary) +
           (amplify == 1.0 ? "" : "-x" + detail::format_number(amplify));
  s.ic = GaussianIcSpec{c1, c2, x0, theta, amplify};
  s.sigma = ConstantSigma{1.0, 0.0};
  s.boundary = boundary;
  s.t_final = 0.5;
  s.closures = {ClosureTag::pn, ClosureTag::lm, ClosureTag::lg, ClosureTag::lgnm};
  if (boundary == Boundary::reflective) s.closures.push_back(ClosureTag::fpn);
  return s;
}

inline Scenario scenario_gaussian_periodic(double amplify = 1.0) {
  return scenario_gaussian(0.5, 2.5, 0.5, 0.01, amplify, Boundary::periodic);
}

inline Scenario scenario_gaussian_reflective() {
  return scenario_gaussian(0.5, 1e-6, 0.6, 0.005, 1.0, Boundary::reflective);
}

/// Initial data is the training-style Fourier series with `seed`.
inline Scenario scenario_two_material(std::uint64_t seed = 4) {
  Scenario s;
  s.name = "two-material";
  s.ic = FourierIcSpec{seed, 10};
  s.sigma = PiecewiseSigma{};
  s.t_final = 0.4;
  s.closures = {ClosureTag::pn, ClosureTag::fpn, ClosureTag::lgnm};
  return s;
}

inline Scenario scenario_wave_number(int k, double phi) {
  if (k < 1 || k > 25) throw std::invalid_argument("scenario_wave_number: k must be in [1, 25]");
  Scenario s;
  s.name = "wave-number-" + std::to_string(k);
  s.ic = WaveIcSpec{k, phi};
  s.sigma = ConstantSigma{1.0, 0.0};
  s.t_final = 0.4;
  s.closures = {ClosureTag::lgnm};
  s.error_moments = {0};
  return s;
}

/// Phase for the wave-number test drawn uniformly from [0, 2 pi).
inline double wave_number_phase(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x9au};
  std::mt19937_64 rng(seq);
  return std::uniform_real_distribution<double>(0.0, 2.0 * std::numbers::pi)(rng);
}

inline std::vector<Scenario> scenario_catalog() {
  std::vector<Scenario> c;
  for (double st : {100.0, 10.0, 1.0}) {
    Scenario s = scenario_constant(st, 0.0, 0);
    s.name = "constant-" + regime_name(st);
    c.push_back(s);
  }
  c.push_back(scenario_variable_scattering(1.0));
  c.push_back(scenario_variable_scattering(10.0));
  c.push_back(scenario_gaussian_periodic(1.0));
  c.push_back(scenario_gaussian_periodic(1000.0));
  c.push_back(scenario_gaussian_reflective());
  c.push_back(scenario_two_material());
  for (int k : {1, 5, 10, 15, 20, 25}) {
    c.push_back(scenario_wave_number(k, wave_number_phase(static_cast<std::uint64_t>(k))));
  }
  return c;
}

inline Scenario find_scenario(const std::string& name) {
  for (auto& s : scenario_catalog()) {
    if (s.name == name) return s;
  }
  throw std::invalid_argument("unknown scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// JSON

inline nlohmann::json to_json(const Scenario& s) {
  nlohmann::json ic = std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, FourierIcSpec>) {
          return {{"type", "fourier"}, {"seed", p.seed}, {"k_max", p.k_max}};
        } else if constexpr (std::is_same_v<T, GaussianIcSpec>) {
          return {{"type", "gaussian"}, {"c1", p.c1}, {"c2", p.c2}, {"x0", p.x0},
                  {"theta", p.theta}, {"amplify", p.amplify}};
        } else {
          return {{"type", "wave"}, {"k", p.k}, {"phi", p.phi}};
        }
      },
      s.ic);
  nlohmann::json sigma = std::visit(
      [](const auto& p) -> nlohmann::json {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, ConstantSigma>) {
          return {{"type", "constant"}, {"sigma_s", p.sigma_s}, {"sigma_a", p.sigma_a}};
        } else if constexpr (std::is_same_v<T, TanhBumpSigma>) {
          return {{"type", "tanh_bump"}, {"c1", p.c1}, {"c2", p.c2}, {"x0", p.x0},
                  {"base", p.base}, {"sigma_a", p.sigma_a}};
        } else {
          return {{"type", "piecewise"}, {"x1", p.x1}, {"x2", p.x2},
                  {"sigma_s_inside", p.sigma_s_inside}, {"sigma_s_outside", p.sigma_s_outside},
                  {"sigma_a_inside", p.sigma_a_inside}, {"sigma_a_outside", p.sigma_a_outside}};
        }
      },
      s.sigma);
  nlohmann::json closures = nlohmann::json::array();
  for (auto t : s.closures) closures.push_back(to_string(t));
  return {{"name", s.name},       {"ic", ic},
          {"sigma", sigma},       {"boundary", to_string(s.boundary)},
          {"t_final", s.t_final}, {"closures", closures},
          {"error_moments", s.error_moments}};
}

inline Scenario scenario_from_json(const nlohmann::json& j) {
  Scenario s;
  s.name = j.at("name").get<std::string>();
  const auto& ic = j.at("ic");
  const auto ic_type = ic.at("type").get<std::string>();
  if (ic_type == "fourier") {
    s.ic = FourierIcSpec{ic.at("seed").get<std::uint64_t>(), ic.value("k_max", 10)};
  } else if (ic_type == "gaussian") {
    s.ic = GaussianIcSpec{ic.at("c1").get<double>(), ic.at("c2").get<double>(),
                          ic.at("x0").get<double>(), ic.at("theta").get<double>(),
                          ic.value("amplify", 1.0)};
  } else if (ic_type == "wave") {
    s.ic = WaveIcSpec{ic.at("k").get<int>(), ic.value("phi", 0.0)};
  } else {
    throw std::invalid_argument("scenario: unknown ic type '" + ic_type + "'");
  }
  const auto& sg = j.at("sigma");
  const auto sg_type = sg.at("type").get<std::string>();
  if (sg_type == "constant") {
    s.sigma = ConstantSigma{sg.at("sigma_s").get<double>(), sg.value("sigma_a", 0.0)};
  } else if (sg_type == "tanh_bump") {
    s.sigma = TanhBumpSigma{sg.at("c1").get<double>(), sg.at("c2").get<double>(),
                            sg.at("x0").get<double>(), sg.at("base").get<double>(),
                            sg.value("sigma_a", 0.0)};
  } else if (sg_type == "piecewise") {
    s.sigma = PiecewiseSigma{sg.at("x1").get<double>(), sg.at("x2").get<double>(),
                             sg.at("sigma_s_inside").get<double>(),
                             sg.at("sigma_s_outside").get<double>(),
                             sg.value("sigma_a_inside", 0.0), sg.value("sigma_a_outside", 0.0)};
  } else {
    throw std::invalid_argument("scenario: unknown sigma type '" + sg_type + "'");
  }
  s.boundary = boundary_from_string(j.value("boundary", std::string("periodic")));
  s.t_final = j.at("t_final").get<double>();
  s.closures.clear();
  for (const auto& c : j.value("closures", nlohmann::json::array())) {
    s.closures.push_back(closure_tag_from_string(c.get<std::string>()));
  }
  if (j.contains("error_moments")) s.error_moments = j.at("error_moments").get<std::vector<int>>();
  s.validate();
  return s;
}

}  // namespace rtclosure
