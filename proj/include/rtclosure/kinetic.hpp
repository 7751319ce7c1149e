#pragma once

// Discrete-ordinates reference solver for the gray slab transport equation
//
//   f_t + v f_x = sigma_s (<f> - f) - sigma_a f,   <f> = 1/2 int f dv,
//
// on x in [0, 1] with periodic or reflective walls. Transport is WENO5 per
// ordinate (upwinded on sign(v_q)); time integration is SSP-RK3 in
// integrating-factor form, where the collision operator is applied through
// its closed-form exponential. Isotropic scattering makes that exponential
// diagonal-plus-rank-one per node: the angular mean decays at sigma_a and
// the deviation from the mean at sigma_s + sigma_a.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rtclosure/basis.hpp"
#include "rtclosure/errors.hpp"
#include "rtclosure/spectral.hpp"
#include "rtclosure/weno.hpp"

namespace rtclosure {

/// Cell centres x_j = (j + 1/2) dx on [0, 1].
inline std::vector<double> cell_centers(int nx) {
  std::vector<double> x(static_cast<std::size_t>(nx));
  const double dx = 1.0 / nx;
  for (int j = 0; j < nx; ++j) x[static_cast<std::size_t>(j)] = (j + 0.5) * dx;
  return x;
}

// ---------------------------------------------------------------------------
// Random initial data and cross sections

/// f_0(x) = a_0 + sum_k a_k sin(2 k pi x + phi_k), a_0 = c + sum_k 1/k.
struct FourierIc {
  double c = 0.0;
  std::vector<double> amplitudes;  // a_1..a_kmax
  std::vector<double> phases;      // phi_1..phi_kmax

  int k_max() const noexcept { return static_cast<int>(amplitudes.size()); }

  double offset() const noexcept {
    double a0 = c;
    for (int k = 1; k <= k_max(); ++k) a0 += 1.0 / k;
    return a0;
  }

  double operator()(double x) const noexcept {
    double f = offset();
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
      const double k = static_cast<double>(i + 1);
      f += amplitudes[i] * std::sin(2.0 * k * std::numbers::pi * x + phases[i]);
    }
    return f;
  }
};

inline FourierIc sample_fourier_ic(std::uint64_t seed, int k_max = 10) {
  if (k_max < 1) throw std::invalid_argument("sample_fourier_ic: k_max must be >= 1");
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x1cu};
  std::mt19937_64 rng(seq);
  FourierIc ic;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  ic.c = unit(rng);
  for (int k = 1; k <= k_max; ++k) {
    std::uniform_real_distribution<double> amp(-1.0 / k, 1.0 / k);
    ic.amplitudes.push_back(amp(rng));
    ic.phases.push_back(phase(rng));
  }
  return ic;
}

struct ConstantCrossSections {
  double sigma_s = 0.0;
  double sigma_a = 0.0;
};

/// sigma_s log-uniform on [0.1, 100], sigma_a uniform on [0, 10].
inline ConstantCrossSections sample_cross_sections(std::uint64_t seed) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32), 0x5cu};
  std::mt19937_64 rng(seq);
  std::uniform_real_distribution<double> log_s(std::log(0.1), std::log(100.0));
  std::uniform_real_distribution<double> abs(0.0, 10.0);
  ConstantCrossSections xs;
  xs.sigma_s = std::clamp(std::exp(log_s(rng)), 0.1, 100.0);
  xs.sigma_a = abs(rng);
  return xs;
}

/// Cross sections sampled at the cell centres of a grid.
struct CrossSections {
  std::vector<double> sigma_s;
  std::vector<double> sigma_a;

  static CrossSections constant(int nx, double s, double a) {
    return {std::vector<double>(static_cast<std::size_t>(nx), s),
            std::vector<double>(static_cast<std::size_t>(nx), a)};
  }

  void validate(int nx) const {
    if (sigma_s.size() != static_cast<std::size_t>(nx) ||
        sigma_a.size() != static_cast<std::size_t>(nx)) {
      throw std::invalid_argument("CrossSections: size does not match the grid");
    }
    for (std::size_t j = 0; j < sigma_s.size(); ++j) {
      if (!(sigma_s[j] >= 0.0) || !(sigma_a[j] >= 0.0)) {
        throw std::invalid_argument("CrossSections: negative or NaN coefficient at node " +
                                    std::to_string(j));
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Angular field

/// Specific intensity on an Nx x Q grid, stored ordinate-major: value(j, q)
/// lives at values[q * nx + j].
struct AngularField {
  int nx = 0;
  Quadrature quad;
  Boundary boundary = Boundary::periodic;
  double time = 0.0;
  std::vector<double> values;

  double dx() const noexcept { return 1.0 / nx; }
  int n_ordinates() const noexcept { return static_cast<int>(quad.size()); }
  double& operator()(int j, int q) {
    return values[static_cast<std::size_t>(q) * static_cast<std::size_t>(nx) +
                  static_cast<std::size_t>(j)];
  }
  double operator()(int j, int q) const {
    return values[static_cast<std::size_t>(q) * static_cast<std::size_t>(nx) +
                  static_cast<std::size_t>(j)];
  }
  std::span<const double> ordinate(int q) const {
    return {values.data() + static_cast<std::size_t>(q) * static_cast<std::size_t>(nx),
            static_cast<std::size_t>(nx)};
  }
  /// f(x_j, .) gathered into a contiguous slice.
  std::vector<double> angular_slice(int j) const {
    std::vector<double> s(quad.size());
    for (int q = 0; q < n_ordinates(); ++q) s[static_cast<std::size_t>(q)] = (*this)(j, q);
    return s;
  }
};

inline AngularField isotropic_field(std::span<const double> f0, const Quadrature& quad,
                                    Boundary boundary) {
  AngularField f;
  f.nx = static_cast<int>(f0.size());
  f.quad = quad;
  f.boundary = boundary;
  f.values.resize(f0.size() * quad.size());
  for (std::size_t q = 0; q < quad.size(); ++q) {
    std::copy(f0.begin(), f0.end(), f.values.begin() + static_cast<std::ptrdiff_t>(q * f0.size()));
  }
  return f;
}

namespace detail {

inline constexpr double kKineticMaxCfl = 1.0;

// out = -v_q d/dx f_q for every ordinate.
inline void kinetic_transport(const AngularField& f, WenoWeights weights,
                              std::vector<double>& out, std::vector<double>& scratch) {
  const int nx = f.nx;
  const int nq = f.n_ordinates();
  const double dx = f.dx();
  out.resize(f.values.size());
  scratch.resize(static_cast<std::size_t>(nx + 2 * kGhost));
  for (int q = 0; q < nq; ++q) {
    const double v = f.quad.nodes[static_cast<std::size_t>(q)];
    auto slice = f.ordinate(q);
    std::copy(slice.begin(), slice.end(), scratch.begin() + kGhost);
    if (f.boundary == Boundary::periodic) {
      fill_ghosts(scratch, Boundary::periodic);
    } else {
      // f(x_{-g}, v) = f(x_{g-1}, -v); the rule is symmetric so -v_q = v_{Q-1-q}.
      auto mirror = f.ordinate(nq - 1 - q);
      for (int g = 1; g <= kGhost; ++g) {
        scratch[static_cast<std::size_t>(kGhost - g)] = mirror[static_cast<std::size_t>(g - 1)];
        scratch[static_cast<std::size_t>(kGhost + nx - 1 + g)] =
            mirror[static_cast<std::size_t>(nx - g)];
      }
    }
    std::span<double> dst(out.data() + static_cast<std::size_t>(q) * static_cast<std::size_t>(nx),
                          static_cast<std::size_t>(nx));
    if (v == 0.0) {
      std::fill(dst.begin(), dst.end(), 0.0);
      continue;
    }
    weno5_derivative(scratch, dx, v > 0.0 ? Wind::positive : Wind::negative, dst, weights);
    for (auto& d : dst) d *= -v;
  }
}

// In place g <- exp(tau * Q) g with Q the collision operator.
inline void collision_exponential(std::span<double> g, int nx, const Quadrature& quad,
                                  const CrossSections& xs, double tau) {
  const auto nq = quad.size();
  const auto n = static_cast<std::size_t>(nx);
  for (std::size_t j = 0; j < n; ++j) {
    double mean = 0.0;
    for (std::size_t q = 0; q < nq; ++q) mean += 0.5 * quad.weights[q] * g[q * n + j];
    const double decay_mean = std::exp(-xs.sigma_a[j] * tau);
    const double decay_dev = std::exp(-(xs.sigma_s[j] + xs.sigma_a[j]) * tau);
    for (std::size_t q = 0; q < nq; ++q) {
      double& val = g[q * n + j];
      val = decay_mean * mean + decay_dev * (val - mean);
    }
  }
}

inline void check_finite(const AngularField& f, const char* where) {
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!std::isfinite(f.values[i])) {
      throw NumericalBlowup(f.time, i % static_cast<std::size_t>(f.nx),
                            std::string(where) + ": non-finite specific intensity");
    }
  }
}

}  // namespace detail

/// Advance f by one step of size dt. Transport CFL: dt * max|v| / dx <= 1.
inline AngularField kinetic_step(const AngularField& f, const CrossSections& xs, double dt,
                                 WenoWeights weights = WenoWeights::js) {
  xs.validate(f.nx);
  double vmax = 0.0;
  for (double v : f.quad.nodes) vmax = std::max(vmax, std::abs(v));
  if (!(dt > 0.0) || dt * vmax / f.dx() > detail::kKineticMaxCfl) {
    throw std::invalid_argument("kinetic_step: dt=" + std::to_string(dt) +
                                " violates the transport CFL limit");
  }
  std::vector<double> t_op, scratch;
  const std::size_t size = f.values.size();

  AngularField stage = f;
  // Stage 1: f1 = E(dt) [f + dt T(f)]
  detail::kinetic_transport(f, weights, t_op, scratch);
  for (std::size_t i = 0; i < size; ++i) stage.values[i] = f.values[i] + dt * t_op[i];
  detail::collision_exponential(stage.values, f.nx, f.quad, xs, dt);

  // Stage 2: f2 = 3/4 E(dt/2) f + 1/4 E(-dt/2) [f1 + dt T(f1)]
  detail::kinetic_transport(stage, weights, t_op, scratch);
  std::vector<double> base = f.values;
  detail::collision_exponential(base, f.nx, f.quad, xs, 0.5 * dt);
  for (std::size_t i = 0; i < size; ++i) stage.values[i] += dt * t_op[i];
  detail::collision_exponential(stage.values, f.nx, f.quad, xs, -0.5 * dt);
  for (std::size_t i = 0; i < size; ++i) {
    stage.values[i] = 0.75 * base[i] + 0.25 * stage.values[i];
  }

  // Stage 3: f_new = 1/3 E(dt) f + 2/3 E(dt/2) [f2 + dt T(f2)]
  detail::kinetic_transport(stage, weights, t_op, scratch);
  base = f.values;
  detail::collision_exponential(base, f.nx, f.quad, xs, dt);
  for (std::size_t i = 0; i < size; ++i) stage.values[i] += dt * t_op[i];
  detail::collision_exponential(stage.values, f.nx, f.quad, xs, 0.5 * dt);

  AngularField out = f;
  for (std::size_t i = 0; i < size; ++i) {
    out.values[i] = base[i] / 3.0 + 2.0 / 3.0 * stage.values[i];
  }
  out.time = f.time + dt;
  detail::check_finite(out, "kinetic_step");
  return out;
}

// ---------------------------------------------------------------------------
// Trajectories

/// Legendre moments m_0..m_order and their spatial derivatives at a sequence
/// of recorded times. Storage is [snapshot][k][j].
struct MomentTrajectory {
  int nx = 0;
  int order = 0;
  int quad_order = 0;
  Boundary boundary = Boundary::periodic;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<double> moments;
  std::vector<double> derivatives;
  std::vector<double> sigma_s;
  std::vector<double> sigma_a;
  /// Smallest specific intensity seen over the run (positivity monitor).
  double min_intensity = std::numeric_limits<double>::infinity();

  double dx() const noexcept { return 1.0 / nx; }
  std::size_t n_snapshots() const noexcept { return times.size(); }
  std::size_t offset(std::size_t s, int k) const noexcept {
    return (s * static_cast<std::size_t>(order + 1) + static_cast<std::size_t>(k)) *
           static_cast<std::size_t>(nx);
  }
  std::span<const double> moment(std::size_t s, int k) const {
    return {moments.data() + offset(s, k), static_cast<std::size_t>(nx)};
  }
  std::span<const double> derivative(std::size_t s, int k) const {
    return {derivatives.data() + offset(s, k), static_cast<std::size_t>(nx)};
  }
};

struct KineticOptions {
  /// Highest Legendre moment recorded (inclusive).
  int record_order = 10;
  /// dt = cfl * dx.
  double cfl = 0.5;
  WenoWeights weights = WenoWeights::js;
  std::uint64_t seed = 0;
};

/// Legendre moments m_0..order of a field, as [k][j].
inline std::vector<double> field_moments(const AngularField& f, int order) {
  const auto n = static_cast<std::size_t>(f.nx);
  std::vector<double> out(static_cast<std::size_t>(order + 1) * n, 0.0);
  const auto nq = f.quad.size();
  for (std::size_t q = 0; q < nq; ++q) {
    const double v = f.quad.nodes[q];
    const double w = 0.5 * f.quad.weights[q];
    std::vector<double> p(static_cast<std::size_t>(order + 1));
    for (int k = 0; k <= order; ++k) p[static_cast<std::size_t>(k)] = w * legendre_eval(k, v);
    const double* row = f.values.data() + q * n;
    for (int k = 0; k <= order; ++k) {
      double* dst = out.data() + static_cast<std::size_t>(k) * n;
      const double pk = p[static_cast<std::size_t>(k)];
      for (std::size_t j = 0; j < n; ++j) dst[j] += pk * row[j];
    }
  }
  return out;
}

/// Spatial derivative used for recorded moments: spectral on the periodic
/// grid, spectral on the parity-mirrored extension for reflective walls.
inline std::vector<double> moment_derivative(std::span<const double> m, int k,
                                             Boundary boundary) {
  if (boundary == Boundary::periodic) return spectral_derivative(m);
  return spectral_derivative_mirrored(m, k % 2 == 0 ? 1.0 : -1.0);
}

inline void record_snapshot(const AngularField& f, MomentTrajectory& traj) {
  const auto m = field_moments(f, traj.order);
  traj.times.push_back(f.time);
  traj.moments.insert(traj.moments.end(), m.begin(), m.end());
  const auto n = static_cast<std::size_t>(f.nx);
  for (int k = 0; k <= traj.order; ++k) {
    std::span<const double> row(m.data() + static_cast<std::size_t>(k) * n, n);
    const auto d = moment_derivative(row, k, f.boundary);
    traj.derivatives.insert(traj.derivatives.end(), d.begin(), d.end());
  }
}

/// Integrate to t_final, recording moments at t = 0, record_dt, 2 record_dt,
/// ... and at t_final. The step is shrunk so that every record time is hit.
inline MomentTrajectory run_kinetic(const AngularField& ic, const CrossSections& xs,
                                    double t_final, double record_dt,
                                    const KineticOptions& opts = {}) {
  if (!(t_final > 0.0)) throw std::invalid_argument("run_kinetic: t_final must be > 0");
  if (!(record_dt > 0.0)) throw std::invalid_argument("run_kinetic: record_dt must be > 0");
  xs.validate(ic.nx);
  MomentTrajectory traj;
  traj.nx = ic.nx;
  traj.order = opts.record_order;
  traj.quad_order = ic.n_ordinates();
  traj.boundary = ic.boundary;
  traj.seed = opts.seed;
  traj.sigma_s = xs.sigma_s;
  traj.sigma_a = xs.sigma_a;

  AngularField f = ic;
  const double dt_max = opts.cfl * f.dx();
  const auto track_min = [&] {
    for (double v : f.values) traj.min_intensity = std::min(traj.min_intensity, v);
  };
  track_min();
  record_snapshot(f, traj);
  const double t0 = f.time;
  int record_index = 0;
  while (f.time < t0 + t_final - 1e-12 * t_final) {
    ++record_index;
    const double t_next = std::min(t0 + record_index * record_dt, t0 + t_final);
    const double span = t_next - f.time;
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt_max - 1e-9)));
    const double dt = span / steps;
    for (int s = 0; s < steps; ++s) {
      f = kinetic_step(f, xs, dt, opts.weights);
      track_min();
    }
    f.time = t_next;
    record_snapshot(f, traj);
  }
  return traj;
}

}  // namespace rtclosure
