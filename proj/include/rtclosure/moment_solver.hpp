#pragma once

// Closed-loop solver for the truncated Legendre moment system
//   d_t m + A d_x m = S m  (last row closed by a Closure)
// with WENO5 in space, Lax-Friedrichs flux splitting and SSP-RK3 in time.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "rtclosure/closures.hpp"
#include "rtclosure/errors.hpp"
#include "rtclosure/kinetic.hpp"
#include "rtclosure/weno.hpp"

namespace rtclosure {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

inline constexpr double kTolImag = 1e-8;

struct SolverConfig {
  int nx = 256;
  /// dt = cfl * dx.
  double cfl = 0.1;
  double alpha_lf = 5.0;
  Boundary boundary = Boundary::periodic;
  Closure closure = Closure::pn(5);
  /// Spacing of recorded snapshots; 0 records only the initial and final state.
  double record_dt = 0.0;
  bool diagnostics = true;
  double tol_imag = kTolImag;
  /// |m| above this counts as a blowup, like a non-finite value.
  double blowup_limit = 1e12;
  /// Switch off the flux terms (leaves the pointwise source only).
  bool transport = true;
  /// Called with the ghosted moments, (N+1) x (Nx+6), after every ghost fill.
  std::function<void(const RowMatrix&)> ghost_observer;

  int order() const noexcept { return closure.order; }
  double dx() const noexcept { return 1.0 / nx; }

  void validate() const {
    if (nx < 16) throw std::invalid_argument("SolverConfig: Nx must be >= 16");
    if (!(cfl > 0.0)) throw std::invalid_argument("SolverConfig: CFL ratio must be > 0");
    if (!(alpha_lf > 0.0)) throw std::invalid_argument("SolverConfig: alpha_lf must be > 0");
    if (closure.order < 1) throw std::invalid_argument("SolverConfig: N must be >= 1");
    if (is_learned(closure.tag) && !closure.model) {
      throw std::invalid_argument("SolverConfig: learned closure without a model");
    }
    if (!(record_dt >= 0.0)) throw std::invalid_argument("SolverConfig: record_dt must be >= 0");
  }
};

inline nlohmann::json to_json(const SolverConfig& c) {
  nlohmann::json j = {{"Nx", c.nx},
                      {"cfl", c.cfl},
                      {"alpha_lf", c.alpha_lf},
                      {"boundary", to_string(c.boundary)},
                      {"N", c.closure.order},
                      {"closure", to_string(c.closure.tag)},
                      {"record_dt", c.record_dt},
                      {"tol_imag", c.tol_imag},
                      {"weno_epsilon", kWenoEpsilon}};
  if (c.closure.tag == ClosureTag::fpn) j["nu"] = c.closure.nu;
  if (c.closure.tag == ClosureTag::lm || c.closure.tag == ClosureTag::lwm) {
    j["closure_differencing"] = "conservative";
  } else if (c.closure.gradient_type()) {
    j["closure_differencing"] = "frozen-coefficient";
  }
  return j;
}

/// Moments m_0..m_N at every node, stored (N+1) x Nx (one column per node).
struct MomentState {
  Eigen::MatrixXd m;
  double time = 0.0;

  int order() const noexcept { return static_cast<int>(m.rows()) - 1; }
  int nx() const noexcept { return static_cast<int>(m.cols()); }
};

/// Legendre moments of an angular field as an (order+1) x Nx state.
inline MomentState moments_of(const AngularField& f, int order) {
  const auto flat = field_moments(f, order);
  MomentState s;
  s.m = Eigen::Map<const RowMatrix>(flat.data(), order + 1, f.nx);
  s.time = f.time;
  return s;
}

// ---------------------------------------------------------------------------
// Eigenvalue check

struct EigenCheck {
  Eigen::VectorXcd eigenvalues;
  double max_imag = 0.0;
  bool flagged = false;
};

inline EigenCheck eig_real_check(const Eigen::MatrixXd& a, double tol_imag = kTolImag) {
  if (a.rows() != a.cols() || a.rows() < 1 || a.rows() > 16) {
    throw std::invalid_argument("eig_real_check: expects a square matrix of size 1..16");
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, false);
  if (es.info() != Eigen::Success) throw NumericalError("eig_real_check: eigen-decomposition did not converge");
  EigenCheck r;
  r.eigenvalues = es.eigenvalues();
  for (Eigen::Index i = 0; i < r.eigenvalues.size(); ++i) {
    r.max_imag = std::max(r.max_imag, std::abs(r.eigenvalues[i].imag()));
  }
  r.flagged = r.max_imag > tol_imag;
  return r;
}

// ---------------------------------------------------------------------------
// Spatial operator

/// Copy `m` into a ghosted array and fill three ghost cells per side.
/// Reflective walls apply the parity (-1)^k to row k.
inline RowMatrix ghosted_moments(const Eigen::MatrixXd& m, Boundary boundary) {
  const Eigen::Index rows = m.rows();
  const Eigen::Index nx = m.cols();
  RowMatrix g(rows, nx + 2 * kGhost);
  g.middleCols(kGhost, nx) = m;
  for (Eigen::Index k = 0; k < rows; ++k) {
    fill_ghosts(std::span<double>(g.row(k).data(), static_cast<std::size_t>(g.cols())), boundary,
                k % 2 == 0 ? 1.0 : -1.0);
  }
  return g;
}

namespace detail {

/// d_x of LF-split flux g with dissipation alpha * u, both ghosted rows.
inline void lf_split_derivative(std::span<const double> g, std::span<const double> u, double alpha,
                                double dx, std::span<double> out) {
  const std::size_t n = g.size();
  std::vector<double> gp(n), gm(n), dp(out.size()), dm(out.size());
  for (std::size_t i = 0; i < n; ++i) {
    gp[i] = 0.5 * (g[i] + alpha * u[i]);
    gm[i] = 0.5 * (g[i] - alpha * u[i]);
  }
  weno5_derivative(gp, dx, Wind::positive, dp);
  weno5_derivative(gm, dx, Wind::negative, dm);
  for (std::size_t j = 0; j < out.size(); ++j) out[j] = dp[j] + dm[j];
}

}  // namespace detail

/// Lax-Friedrichs split WENO5 derivative of a ghosted flux: g+- = (g +- alpha u)/2,
/// g+ differenced left-biased and g- right-biased.
inline std::vector<double> lf_split_flux_derivative(std::span<const double> g,
                                                    std::span<const double> u, double alpha,
                                                    double dx) {
  if (g.size() != u.size() || g.size() <= 2 * kGhost) {
    throw std::invalid_argument("lf_split_flux_derivative: ghosted arrays of equal size required");
  }
  std::vector<double> out(g.size() - 2 * kGhost);
  detail::lf_split_derivative(g, u, alpha, dx, out);
  return out;
}

/// Per-step constants of the moment system.
struct MomentOperator {
  SolverConfig config;
  std::vector<double> sigma_s;
  std::vector<double> sigma_a;
  Eigen::MatrixXd a;
  std::vector<double> filter;  // nu * l_k for FP_N, zeros otherwise

  MomentOperator(const SolverConfig& cfg, const CrossSections& xs) : config(cfg) {
    config.validate();
    xs.validate(cfg.nx);
    sigma_s = xs.sigma_s;
    sigma_a = xs.sigma_a;
    const int order = cfg.order();
    a = pn_matrix(order);
    filter.assign(static_cast<std::size_t>(order + 1), 0.0);
    if (cfg.closure.tag == ClosureTag::fpn) {
      const auto spec = fpn_damping(order, cfg.closure.nu);
      for (int k = 0; k <= order; ++k) filter[static_cast<std::size_t>(k)] = spec.nu * spec.l[static_cast<std::size_t>(k)];
    }
  }

  int order() const noexcept { return config.order(); }
  double last_row_lower() const { return order() / (2.0 * order() + 1.0); }
  double last_row_upper() const { return (order() + 1.0) / (2.0 * order() + 1.0); }

  /// Transport term d_x (A m) with the closed last row, (N+1) x Nx.
  Eigen::MatrixXd transport(const Eigen::MatrixXd& m) const {
    const int order = this->order();
    const auto nx = static_cast<std::size_t>(config.nx);
    const double dx = config.dx();
    const double alpha = config.alpha_lf;
    const RowMatrix g = ghosted_moments(m, config.boundary);
    if (config.ghost_observer) config.ghost_observer(g);
    const auto width = static_cast<std::size_t>(g.cols());
    const auto row = [&](const RowMatrix& r, Eigen::Index k) {
      return std::span<const double>(r.row(k).data(), width);
    };

    RowMatrix out(order + 1, static_cast<Eigen::Index>(nx));
    std::vector<double> flux(width);
    for (int k = 0; k < order; ++k) {
      for (std::size_t i = 0; i < width; ++i) {
        double v = a(k, k + 1) * g(k + 1, static_cast<Eigen::Index>(i));
        if (k > 0) v += a(k, k - 1) * g(k - 1, static_cast<Eigen::Index>(i));
        flux[i] = v;
      }
      detail::lf_split_derivative(flux, row(g, k), alpha, dx,
                                  std::span<double>(out.row(k).data(), nx));
    }

    const Closure& closure = config.closure;
    const double lower = last_row_lower();
    const double upper = last_row_upper();
    if (closure.moment_type()) {
      // Conservative: d_x of N/(2N+1) m_{N-1} + (N+1)/(2N+1) m_{N+1}.
      const Eigen::VectorXd closing = closing_moment(closure, m);
      std::vector<double> gc(width, 0.0);
      for (std::size_t j = 0; j < nx; ++j) gc[j + kGhost] = closing[static_cast<Eigen::Index>(j)];
      fill_ghosts(gc, config.boundary, (order + 1) % 2 == 0 ? 1.0 : -1.0);
      for (std::size_t i = 0; i < width; ++i) {
        flux[i] = (order > 0 ? lower * g(order - 1, static_cast<Eigen::Index>(i)) : 0.0) + upper * gc[i];
      }
      detail::lf_split_derivative(flux, row(g, order), alpha, dx,
                                  std::span<double>(out.row(order).data(), nx));
    } else {
      // Frozen coefficients: the effective row r_j is applied to the stencil
      // of node j and the resulting local flux is LF split.
      const Eigen::MatrixXd c = gradient_coefficients(closure, m);
      double hp[7], hm[7];
      Eigen::VectorXd r(order + 1);
      for (std::size_t j = 0; j < nx; ++j) {
        r = upper * c.col(static_cast<Eigen::Index>(j));
        r[order - 1] += lower;
        for (int s = 0; s < 7; ++s) {
          const auto col = static_cast<Eigen::Index>(j) + s;
          double h = 0.0;
          for (int k = 0; k <= order; ++k) h += r[k] * g(k, col);
          hp[s] = 0.5 * (h + alpha * g(order, col));
          hm[s] = 0.5 * (h - alpha * g(order, col));
        }
        out(order, static_cast<Eigen::Index>(j)) =
            (weno5_local_difference(hp, Wind::positive) + weno5_local_difference(hm, Wind::negative)) / dx;
      }
    }
    return out;
  }

  /// S m - nu L m, pointwise.
  Eigen::MatrixXd source(const Eigen::MatrixXd& m) const {
    Eigen::MatrixXd out(m.rows(), m.cols());
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const double sa = sigma_a[static_cast<std::size_t>(j)];
      const double st = sigma_s[static_cast<std::size_t>(j)] + sa;
      out(0, j) = -(sa + filter[0]) * m(0, j);
      for (Eigen::Index k = 1; k < m.rows(); ++k) {
        out(k, j) = -(st + filter[static_cast<std::size_t>(k)]) * m(k, j);
      }
    }
    return out;
  }

  Eigen::MatrixXd rhs(const Eigen::MatrixXd& m) const {
    if (!config.transport) return source(m);
    return source(m) - transport(m);
  }

  /// Effective flux Jacobian at one node: A with its last row replaced by
  /// the closure's linearization.
  Eigen::MatrixXd effective_jacobian(const Eigen::VectorXd& closure_row) const {
    Eigen::MatrixXd j = a;
    j.row(order()) = upper_row(closure_row);
    return j;
  }

  /// Count of nodes whose effective Jacobian has a non-real eigenvalue.
  int imaginary_count(const Eigen::MatrixXd& m) const {
    const Closure& closure = config.closure;
    if (closure.tag == ClosureTag::pn || closure.tag == ClosureTag::fpn) {
      return eig_real_check(a, config.tol_imag).flagged ? static_cast<int>(m.cols()) : 0;
    }
    const Eigen::MatrixXd rows =
        closure.gradient_type() ? gradient_coefficients(closure, m) : closing_moment_jacobian(closure, m);
    int count = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (eig_real_check(effective_jacobian(rows.col(j)), config.tol_imag).flagged) ++count;
    }
    return count;
  }

 private:
  Eigen::RowVectorXd upper_row(const Eigen::VectorXd& closure_row) const {
    Eigen::RowVectorXd r = last_row_upper() * closure_row.transpose();
    r[order() - 1] += last_row_lower();
    return r;
  }
};

namespace detail {

inline void check_state(const Eigen::MatrixXd& m, double time, double limit, const char* where) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
      const double v = m(k, j);
      if (!std::isfinite(v) || std::abs(v) > limit) {
        throw NumericalBlowup(time, static_cast<std::size_t>(j),
                              std::string(where) + ": moment m_" + std::to_string(k) +
                                  (std::isfinite(v) ? " exceeded the blowup limit" : " is not finite"));
      }
    }
  }
}

}  // namespace detail

/// One SSP-RK3 (Shu-Osher) step.
inline MomentState step_moment(const MomentOperator& op, const MomentState& s, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_moment: dt must be > 0");
  if (s.m.rows() != op.order() + 1 || s.m.cols() != op.config.nx) {
    throw std::invalid_argument("step_moment: state shape does not match the configuration");
  }
  const double limit = op.config.blowup_limit;
  const Eigen::MatrixXd u1 = s.m + dt * op.rhs(s.m);
  detail::check_state(u1, s.time + dt, limit, "step_moment");
  const Eigen::MatrixXd u2 = 0.75 * s.m + 0.25 * (u1 + dt * op.rhs(u1));
  detail::check_state(u2, s.time + 0.5 * dt, limit, "step_moment");
  MomentState out;
  out.m = (1.0 / 3.0) * s.m + (2.0 / 3.0) * (u2 + dt * op.rhs(u2));
  out.time = s.time + dt;
  detail::check_state(out.m, out.time, limit, "step_moment");
  return out;
}

inline MomentState step_moment(const MomentState& s, const SolverConfig& cfg,
                               const CrossSections& xs, double dt) {
  return step_moment(MomentOperator(cfg, xs), s, dt);
}

/// Per-step hyperbolicity and size diagnostics.
struct HyperbolicityReport {
  std::vector<double> times;
  std::vector<int> imag_count;
  std::vector<double> linf_norm;

  long long cumulative_count() const {
    long long s = 0;
    for (int c : imag_count) s += c;
    return s;
  }
};

struct BlowupRecord {
  double time = 0.0;
  std::size_t node = 0;
  std::string message;
};

struct MomentSolution {
  std::vector<double> times;
  std::vector<Eigen::MatrixXd> snapshots;
  nlohmann::json config = nlohmann::json::object();
  HyperbolicityReport report;
  std::optional<BlowupRecord> blowup;
  long long steps = 0;

  bool completed() const noexcept { return !blowup.has_value(); }
  const Eigen::MatrixXd& final_moments() const { return snapshots.back(); }
};

inline double linf(const Eigen::MatrixXd& m) { return m.cwiseAbs().maxCoeff(); }

/// Integrate from `initial` for a duration t_final. A blowup (including a
/// closure that cannot be evaluated) stops the run and is recorded.
inline MomentSolution run_moment(const MomentState& initial, const CrossSections& xs,
                                 const SolverConfig& cfg, double t_final) {
  if (!(t_final > 0.0)) throw std::invalid_argument("run_moment: t_final must be > 0");
  const MomentOperator op(cfg, xs);
  if (initial.m.rows() != cfg.order() + 1 || initial.m.cols() != cfg.nx) {
    throw std::invalid_argument("run_moment: initial moments have shape " +
                                std::to_string(initial.m.rows()) + "x" + std::to_string(initial.m.cols()) +
                                ", expected " + std::to_string(cfg.order() + 1) + "x" +
                                std::to_string(cfg.nx));
  }
  MomentSolution sol;
  sol.config = to_json(cfg);
  MomentState s = initial;
  const auto diagnose = [&] {
    if (!cfg.diagnostics) return;
    sol.report.times.push_back(s.time);
    sol.report.imag_count.push_back(op.imaginary_count(s.m));
    sol.report.linf_norm.push_back(linf(s.m));
  };
  const auto record = [&] {
    sol.times.push_back(s.time);
    sol.snapshots.push_back(s.m);
  };
  const double t0 = s.time;
  const double t_end = t0 + t_final;
  const double dt_max = cfg.cfl * cfg.dx();
  try {
    record();
    diagnose();
    int record_index = 0;
    while (s.time < t_end - 1e-12 * t_final) {
      ++record_index;
      const double t_next = cfg.record_dt > 0.0 ? std::min(t0 + record_index * cfg.record_dt, t_end) : t_end;
      const double span = t_next - s.time;
      const auto steps = std::max<long long>(1, static_cast<long long>(std::ceil(span / dt_max - 1e-9)));
      const double dt = span / static_cast<double>(steps);
      for (long long i = 0; i < steps; ++i) {
        s = step_moment(op, s, dt);
        ++sol.steps;
        diagnose();
      }
      s.time = t_next;
      record();
    }
  } catch (const NumericalBlowup& e) {
    sol.blowup = BlowupRecord{e.time(), e.node(), e.what()};
  } catch (const NumericalError& e) {
    sol.blowup = BlowupRecord{s.time, 0, e.what()};
  }
  return sol;
}

}  // namespace rtclosure
