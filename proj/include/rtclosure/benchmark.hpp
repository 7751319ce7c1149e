#pragma once

// Closed-loop runs of a scenario against a kinetic reference.

#include <cmath>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtclosure/basis.hpp"
#include "rtclosure/closures.hpp"
#include "rtclosure/kinetic.hpp"
#include "rtclosure/moment_solver.hpp"
#include "rtclosure/scenarios.hpp"
#include "rtclosure/training.hpp"

namespace rtclosure {

struct ReferenceConfig {
  /// Kinetic grid is nx_factor times the moment grid.
  int nx_factor = 2;
  int quad_order = 64;
  double cfl = 0.5;
  WenoWeights weights = WenoWeights::js;
};

/// Average consecutive groups of `factor` cells.
inline Eigen::MatrixXd restrict_average(const Eigen::MatrixXd& fine, int factor) {
  if (factor < 1 || fine.cols() % factor != 0) {
    throw std::invalid_argument("restrict_average: grid size is not a multiple of the factor");
  }
  const Eigen::Index coarse = fine.cols() / factor;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(fine.rows(), coarse);
  for (Eigen::Index j = 0; j < coarse; ++j) {
    for (int i = 0; i < factor; ++i) out.col(j) += fine.col(j * factor + i);
    out.col(j) /= factor;
  }
  return out;
}

/// Kinetic moments m_0..order at the scenario's final time on an nx grid.
inline Eigen::MatrixXd kinetic_reference(const Scenario& sc, int nx, int order,
                                         const ReferenceConfig& rc = {}) {
  const int fine_nx = nx * rc.nx_factor;
  const Quadrature quad = gauss_legendre(rc.quad_order);
  const AngularField ic = sc.initial_field(fine_nx, quad);
  KineticOptions opts;
  opts.record_order = order;
  opts.cfl = rc.cfl;
  opts.weights = rc.weights;
  const auto traj = run_kinetic(ic, sc.cross_sections(fine_nx), sc.t_final, sc.t_final, opts);
  const std::size_t last = traj.n_snapshots() - 1;
  Eigen::MatrixXd fine(order + 1, fine_nx);
  for (int k = 0; k <= order; ++k) {
    const auto row = traj.moment(last, k);
    for (int j = 0; j < fine_nx; ++j) fine(k, j) = row[static_cast<std::size_t>(j)];
  }
  return restrict_average(fine, rc.nx_factor);
}

/// Initial moments of a scenario on the moment grid, projected with the
/// kinetic quadrature.
inline MomentState scenario_initial_moments(const Scenario& sc, int nx, int order,
                                            int quad_order = 64) {
  return moments_of(sc.initial_field(nx, gauss_legendre(quad_order)), order);
}

inline double moment_error(const Eigen::MatrixXd& appx, const Eigen::MatrixXd& truth, int k) {
  const Eigen::VectorXd a = appx.row(k).transpose();
  const Eigen::VectorXd t = truth.row(k).transpose();
  return relative_l2(std::span<const double>(a.data(), static_cast<std::size_t>(a.size())),
                     std::span<const double>(t.data(), static_cast<std::size_t>(t.size())));
}

struct BenchmarkEntry {
  std::string scenario;
  std::string closure;
  int order = 0;
  int moment = 0;
  double error = NAN;
  bool completed = true;
  double blowup_time = NAN;
};

/// Closed-loop run of `closure` on the scenario, compared against `reference`
/// for each requested moment.
inline std::vector<BenchmarkEntry> benchmark_closure(const Scenario& sc, const Closure& closure,
                                                     const Eigen::MatrixXd& reference,
                                                     SolverConfig cfg, int quad_order = 64) {
  cfg.closure = closure;
  cfg.boundary = sc.boundary;
  cfg.diagnostics = false;
  const int order = closure.order;
  const auto sol = run_moment(scenario_initial_moments(sc, cfg.nx, order, quad_order),
                              sc.cross_sections(cfg.nx), cfg, sc.t_final);
  std::vector<BenchmarkEntry> out;
  for (int k : sc.error_moments) {
    BenchmarkEntry e;
    e.scenario = sc.name;
    e.closure = to_string(closure.tag);
    e.order = order;
    e.moment = k < 0 ? order : k;
    if (sol.completed()) {
      e.error = moment_error(sol.final_moments(), reference, e.moment);
    } else {
      e.completed = false;
      e.blowup_time = sol.blowup->time;
    }
    out.push_back(e);
  }
  return out;
}

}  // namespace rtclosure
