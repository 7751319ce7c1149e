#pragma once

// Training-data generation over sampled initial data and run manifests.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <ctime>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "rtclosure/basis.hpp"
#include "rtclosure/errors.hpp"
#include "rtclosure/kinetic.hpp"

namespace rtclosure {

struct DataConfig {
  int n_ics = 100;
  int nx = 512;
  int quad_order = 64;
  double t_final = 1.0;
  /// Snapshots every record_every_dx * dx of simulated time.
  double record_every_dx = 8.0;
  int record_order = 10;
  std::uint64_t seed = 0;
  WenoWeights weights = WenoWeights::js;
  double cfl = 0.5;

  /// 10 initial conditions on a 128-cell grid with 32 ordinates.
  static DataConfig desk() {
    DataConfig c;
    c.n_ics = 10;
    c.nx = 128;
    c.quad_order = 32;
    return c;
  }

  double record_dt() const { return record_every_dx / nx; }

  void validate() const {
    if (n_ics < 1) throw std::invalid_argument("DataConfig: need at least one initial condition");
    if (nx < 16) throw std::invalid_argument("DataConfig: Nx must be >= 16");
    if (quad_order < 2 || quad_order % 2 != 0) {
      throw std::invalid_argument("DataConfig: quadrature order must be even and >= 2");
    }
    if (!(t_final > 0.0) || !(record_every_dx > 0.0)) {
      throw std::invalid_argument("DataConfig: t_final and record spacing must be > 0");
    }
  }
};

inline nlohmann::json to_json(const DataConfig& c) {
  return {{"n_ics", c.n_ics},           {"nx", c.nx},
          {"quad_order", c.quad_order}, {"t_final", c.t_final},
          {"record_every_dx", c.record_every_dx}, {"record_order", c.record_order},
          {"seed", c.seed},             {"kinetic_weights", to_string(c.weights)},
          {"kinetic_cfl", c.cfl}};
}

/// The sampled problem for initial condition i: Fourier data and constant
/// cross sections, both seeded with seed + i.
inline MomentTrajectory generate_trajectory(const DataConfig& cfg, int i) {
  const std::uint64_t s = cfg.seed + static_cast<std::uint64_t>(i);
  const FourierIc ic = sample_fourier_ic(s);
  const ConstantCrossSections xs = sample_cross_sections(s);
  std::vector<double> f0;
  for (double x : cell_centers(cfg.nx)) f0.push_back(ic(x));
  KineticOptions opts;
  opts.record_order = cfg.record_order;
  opts.cfl = cfg.cfl;
  opts.weights = cfg.weights;
  opts.seed = s;
  return run_kinetic(isotropic_field(f0, gauss_legendre(cfg.quad_order), Boundary::periodic),
                     CrossSections::constant(cfg.nx, xs.sigma_s, xs.sigma_a), cfg.t_final,
                     cfg.record_dt(), opts);
}

struct GeneratedData {
  std::vector<MomentTrajectory> trajectories;  // in initial-condition order
  std::vector<int> skipped;
  std::vector<std::string> messages;
};

/// Runs every initial condition; a blowup skips that run. Work is spread
/// over `threads` workers, results are collected in index order.
inline GeneratedData generate_trajectories(const DataConfig& cfg, int threads = 1) {
  cfg.validate();
  const auto n = static_cast<std::size_t>(cfg.n_ics);
  std::vector<MomentTrajectory> out(n);
  std::vector<std::string> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        out[i] = generate_trajectory(cfg, static_cast<int>(i));
      } catch (const NumericalError& e) {
        errors[i] = e.what();
      }
    }
  };
  const int nt = std::max(1, std::min<int>(threads, cfg.n_ics));
  if (nt == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < nt; ++t) pool.emplace_back(worker);
  }
  GeneratedData g;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i].empty()) {
      g.trajectories.push_back(std::move(out[i]));
    } else {
      g.skipped.push_back(static_cast<int>(i));
      g.messages.push_back(errors[i]);
    }
  }
  return g;
}

// ---------------------------------------------------------------------------
// Manifest

/// FNV-1a 64 of the compact dump; object keys are sorted, so equal configs
/// hash equally.
inline std::string config_hash(const nlohmann::json& config) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : config.dump()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct RunManifest {
  std::string command;
  nlohmann::json config = nlohmann::json::object();
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> artifacts;
  std::string tool_version;
  double wall_clock_seconds = 0.0;
  int exit_code = 0;

  nlohmann::json to_json() const {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char stamp[32];
    std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    return {{"command", command},       {"config", config},
            {"config_hash", config_hash(config)}, {"seeds", seeds},
            {"artifacts", artifacts},   {"tool_version", tool_version},
            {"wall_clock_seconds", wall_clock_seconds}, {"finished_utc", stamp},
            {"exit_code", exit_code}};
  }
};

}  // namespace rtclosure
