#pragma once

// Closure relations for the truncated Legendre moment system
//
//   d_t m_k + k/(2k+1) d_x m_{k-1} + (k+1)/(2k+1) d_x m_{k+1} = S_k m_k,
//
// k = 0..N. A closure supplies the unresolved m_{N+1} (moment-type
// closures) or d_x m_{N+1} as a linear combination of d_x m_0..d_x m_N with
// state-dependent coefficients (gradient-type closures).

#include <algorithm>
#include <cmath>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rtclosure/basis.hpp"
#include "rtclosure/errors.hpp"
#include "rtclosure/mlp.hpp"

namespace rtclosure {

inline constexpr double kDensityFloor = 1e-12;

/// Singular-denominator guard for the free-streaming closure.
inline double singular_tolerance(double n0) { return 1e-8 * std::max(std::abs(n0), 1.0); }

/// Flux matrix A of the P_N system: tridiagonal, zero diagonal,
/// A(k, k-1) = k/(2k+1), A(k, k+1) = (k+1)/(2k+1).
inline Eigen::MatrixXd pn_matrix(int order) {
  if (order < 1) throw std::invalid_argument("pn_matrix: N must be >= 1");
  const int n = order + 1;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    if (k > 0) a(k, k - 1) = static_cast<double>(k) / (2.0 * k + 1.0);
    if (k + 1 < n) a(k, k + 1) = (k + 1.0) / (2.0 * k + 1.0);
  }
  return a;
}

/// Diagonal of the relaxation matrix S at one node.
inline std::vector<double> relaxation_diagonal(int order, double sigma_s, double sigma_a) {
  std::vector<double> s(static_cast<std::size_t>(order + 1), -(sigma_s + sigma_a));
  s[0] = -sigma_a;
  return s;
}

struct FilterSpec {
  double nu = 0.0;
  std::vector<double> l;  // damping exponents l_0..l_N
};

/// l_k = log rho(k/(N+1)) / log rho(N/(N+1)) with rho(eta) = 1/(1+eta^4).
inline FilterSpec fpn_damping(int order, double nu) {
  if (order < 1) throw std::invalid_argument("fpn_damping: N must be >= 1");
  if (!(nu >= 0.0)) throw std::invalid_argument("fpn_damping: nu must be >= 0");
  const auto log_rho = [](double eta) { return -std::log1p(eta * eta * eta * eta); };
  const double denom = log_rho(static_cast<double>(order) / (order + 1.0));
  FilterSpec f;
  f.nu = nu;
  for (int k = 0; k <= order; ++k) {
    f.l.push_back(log_rho(static_cast<double>(k) / (order + 1.0)) / denom);
  }
  return f;
}

// ---------------------------------------------------------------------------
// Exact free-streaming closure (monomial moments, isotropic initial data)

/// d_x n_{k+1} from n_0..n_k and d_x n_1..d_x n_3. Valid for k >= 3.
inline double exact_fs_gradient(std::span<const double> n, std::span<const double> dn, int k) {
  if (k < 3) throw std::invalid_argument("exact_fs_gradient: requires k >= 3");
  if (n.size() < static_cast<std::size_t>(k + 1) || dn.size() < 4) {
    throw std::invalid_argument("exact_fs_gradient: not enough moments supplied");
  }
  const double denom = 3.0 * n[2] - n[0];
  if (std::abs(denom) <= singular_tolerance(n[0])) {
    throw SingularClosure("exact_fs_gradient: 3 n_2 - n_0 vanishes (isotropic state)");
  }
  const double even = (k % 2 == 0) ? 1.0 : 0.0;
  const double odd = 1.0 - even;
  const double ratio =
      ((k + 1.0) * n[static_cast<std::size_t>(k)] - even * n[0] - 2.0 * odd * n[1]) / denom;
  return even * dn[1] + odd * dn[2] + ratio * (dn[3] - dn[1]);
}

/// Legendre-basis coefficients c with d_x m_{N+1} = sum_k c_k d_x m_k implied
/// by the exact free-streaming closure at state m (Legendre, length N+1).
inline std::vector<double> exact_fs_coefficients(std::span<const double> m) {
  const int order = static_cast<int>(m.size()) - 1;
  if (order < 3) throw std::invalid_argument("exact_fs_coefficients: requires N >= 3");
  const Eigen::MatrixXd b = monomial_to_legendre_matrix(order + 1);  // m = B n
  const Eigen::MatrixXd b_n = b.topLeftCorner(order + 1, order + 1);
  const Eigen::Map<const Eigen::VectorXd> mv(m.data(), order + 1);
  const Eigen::VectorXd n = b_n.triangularView<Eigen::Lower>().solve(mv);

  const double denom = 3.0 * n[2] - n[0];
  if (std::abs(denom) <= singular_tolerance(n[0])) {
    throw SingularClosure("exact free-streaming closure: 3 n_2 - n_0 vanishes (isotropic state)");
  }
  const int k = order;
  const double even = (k % 2 == 0) ? 1.0 : 0.0;
  const double odd = 1.0 - even;
  const double ratio = ((k + 1.0) * n[k] - even * n[0] - 2.0 * odd * n[1]) / denom;
  // d n_{N+1} = g . d n with g supported on n_1, n_2, n_3.
  Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(order + 1);
  g[1] += even - ratio;
  g[2] += odd;
  g[3] += ratio;
  // d m_{N+1} = B(N+1, 0..N) d n + B(N+1, N+1) d n_{N+1},   d n = B_n^{-1} d m.
  const Eigen::RowVectorXd in_n = b.row(order + 1).head(order + 1) + b(order + 1, order + 1) * g;
  const Eigen::RowVectorXd c =
      b_n.transpose().triangularView<Eigen::Upper>().solve(in_n.transpose()).transpose();
  return {c.data(), c.data() + c.size()};
}

// ---------------------------------------------------------------------------
// Learned closures

enum class ClosureTag { pn, fpn, exact_free_streaming, lm, lwm, lg, lgnm };

inline const char* to_string(ClosureTag t) {
  switch (t) {
    case ClosureTag::pn: return "pn";
    case ClosureTag::fpn: return "fpn";
    case ClosureTag::exact_free_streaming: return "exact";
    case ClosureTag::lm: return "lm";
    case ClosureTag::lwm: return "lwm";
    case ClosureTag::lg: return "lg";
    case ClosureTag::lgnm: return "lgnm";
  }
  return "?";
}

inline ClosureTag closure_tag_from_string(const std::string& s) {
  for (auto t : {ClosureTag::pn, ClosureTag::fpn, ClosureTag::exact_free_streaming, ClosureTag::lm,
                 ClosureTag::lwm, ClosureTag::lg, ClosureTag::lgnm}) {
    if (s == to_string(t)) return t;
  }
  throw std::invalid_argument("unknown closure '" + s + "'");
}

inline bool is_learned(ClosureTag t) {
  return t == ClosureTag::lm || t == ClosureTag::lwm || t == ClosureTag::lg || t == ClosureTag::lgnm;
}

/// Network input width expected by a learned ansatz at truncation order N.
inline int ansatz_input_width(ClosureTag t, int order) {
  return t == ClosureTag::lgnm ? order : order + 1;
}
inline int ansatz_output_width(ClosureTag t, int order) {
  return t == ClosureTag::lm ? 1 : order + 1;
}

/// Network features for LGNM: (m_1/m_0, ..., m_N/m_0).
inline Eigen::VectorXd lgnm_features(std::span<const double> m) {
  if (!(m[0] > kDensityFloor)) {
    throw DegenerateDensity("LGNM: m_0 = " + std::to_string(m[0]) + " is at or below the floor");
  }
  Eigen::VectorXd r(static_cast<Eigen::Index>(m.size()) - 1);
  for (Eigen::Index k = 1; k < static_cast<Eigen::Index>(m.size()); ++k) {
    r[k - 1] = m[static_cast<std::size_t>(k)] / m[0];
  }
  return r;
}

namespace detail {

inline void check_width(const MlpModel& model, ClosureTag tag, int order) {
  if (model.input_width() != ansatz_input_width(tag, order) ||
      model.output_width() != ansatz_output_width(tag, order)) {
    throw std::invalid_argument(std::string("closure ") + to_string(tag) + ": model shape " +
                                std::to_string(model.input_width()) + "->" +
                                std::to_string(model.output_width()) +
                                " does not fit N=" + std::to_string(order));
  }
}

inline double dot(const Eigen::VectorXd& a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < b.size(); ++k) s += a[static_cast<Eigen::Index>(k)] * b[k];
  return s;
}

}  // namespace detail

/// LM: m_{N+1} = net(m_0..m_N).
inline double close_lm(const MlpModel& model, std::span<const double> m) {
  detail::check_width(model, ClosureTag::lm, static_cast<int>(m.size()) - 1);
  return forward(model, m)[0];
}

/// LWM: m_{N+1} = sum_k net_k(m) m_k.
inline double close_lwm(const MlpModel& model, std::span<const double> m) {
  detail::check_width(model, ClosureTag::lwm, static_cast<int>(m.size()) - 1);
  return detail::dot(forward(model, m), m);
}

/// LG: d_x m_{N+1} = sum_k net_k(m) d_x m_k.
inline double close_lg(const MlpModel& model, std::span<const double> m,
                       std::span<const double> dm) {
  detail::check_width(model, ClosureTag::lg, static_cast<int>(m.size()) - 1);
  if (dm.size() != m.size()) throw std::invalid_argument("close_lg: dm width mismatch");
  return detail::dot(forward(model, m), dm);
}

/// LGNM: d_x m_{N+1} = sum_k net_k(m_1/m_0, ..., m_N/m_0) d_x m_k.
inline double close_lgnm(const MlpModel& model, std::span<const double> m,
                         std::span<const double> dm) {
  detail::check_width(model, ClosureTag::lgnm, static_cast<int>(m.size()) - 1);
  if (dm.size() != m.size()) throw std::invalid_argument("close_lgnm: dm width mismatch");
  const Eigen::VectorXd r = lgnm_features(m);
  return detail::dot(forward(model, std::span<const double>(r.data(), static_cast<std::size_t>(r.size()))), dm);
}

/// A closure choice for the moment solver.
struct Closure {
  ClosureTag tag = ClosureTag::pn;
  int order = 1;
  double nu = 0.0;  // FP_N filter strength
  std::shared_ptr<const MlpModel> model;

  static Closure pn(int order) { return {ClosureTag::pn, order, 0.0, nullptr}; }
  static Closure fpn(int order, double nu) { return {ClosureTag::fpn, order, nu, nullptr}; }
  static Closure exact_free_streaming(int order) {
    if (order < 3) throw std::invalid_argument("exact free-streaming closure needs N >= 3");
    return {ClosureTag::exact_free_streaming, order, 0.0, nullptr};
  }
  static Closure learned(ClosureTag tag, int order, std::shared_ptr<const MlpModel> model) {
    if (!is_learned(tag)) throw std::invalid_argument("Closure::learned: tag is not a learned ansatz");
    if (!model) throw std::invalid_argument("Closure::learned: a model is required");
    detail::check_width(*model, tag, order);
    return {tag, order, 0.0, std::move(model)};
  }

  /// Closures that close the last equation through d_x m_{N+1} = c(m) . d_x m.
  bool gradient_type() const {
    return tag == ClosureTag::lg || tag == ClosureTag::lgnm ||
           tag == ClosureTag::exact_free_streaming;
  }
  /// Closures that supply m_{N+1} pointwise (P_N and FP_N supply 0).
  bool moment_type() const { return !gradient_type(); }
};

/// Gradient coefficients c(m_j) for every column of `m` ((N+1) x nodes).
inline Eigen::MatrixXd gradient_coefficients(const Closure& closure, const Eigen::MatrixXd& m) {
  const int order = closure.order;
  const Eigen::Index nodes = m.cols();
  switch (closure.tag) {
    case ClosureTag::lg:
      return forward_batch(*closure.model, m);
    case ClosureTag::lgnm: {
      Eigen::MatrixXd feats(order, nodes);
      for (Eigen::Index j = 0; j < nodes; ++j) {
        feats.col(j) = lgnm_features(std::span<const double>(m.col(j).data(),
                                                             static_cast<std::size_t>(order + 1)));
      }
      return forward_batch(*closure.model, feats);
    }
    case ClosureTag::exact_free_streaming: {
      Eigen::MatrixXd c(order + 1, nodes);
      for (Eigen::Index j = 0; j < nodes; ++j) {
        const auto col = exact_fs_coefficients(
            std::span<const double>(m.col(j).data(), static_cast<std::size_t>(order + 1)));
        c.col(j) = Eigen::Map<const Eigen::VectorXd>(col.data(), order + 1);
      }
      return c;
    }
    default:
      return Eigen::MatrixXd::Zero(order + 1, nodes);
  }
}

/// m_{N+1} for every column of `m`; zero for P_N / FP_N.
inline Eigen::VectorXd closing_moment(const Closure& closure, const Eigen::MatrixXd& m) {
  switch (closure.tag) {
    case ClosureTag::lm:
      return forward_batch(*closure.model, m).row(0).transpose();
    case ClosureTag::lwm:
      return forward_batch(*closure.model, m).cwiseProduct(m).colwise().sum().transpose();
    case ClosureTag::pn:
    case ClosureTag::fpn:
      return Eigen::VectorXd::Zero(m.cols());
    default:
      throw std::invalid_argument("closing_moment: closure is gradient-type");
  }
}

/// d m_{N+1} / d m_k for moment-type closures, one column per node; used
/// for the effective Jacobian of the closed system.
inline Eigen::MatrixXd closing_moment_jacobian(const Closure& closure, const Eigen::MatrixXd& m) {
  const int order = closure.order;
  switch (closure.tag) {
    case ClosureTag::lm: {
      ForwardCache cache;
      forward_batch(*closure.model, m, &cache);
      return backward(*closure.model, cache, Eigen::MatrixXd::Ones(1, m.cols())).inputs;
    }
    case ClosureTag::lwm: {
      // d/dm_i sum_k N_k(m) m_k = N_i(m) + sum_k m_k dN_k/dm_i
      ForwardCache cache;
      const Eigen::MatrixXd out = forward_batch(*closure.model, m, &cache);
      return out + backward(*closure.model, cache, m).inputs;
    }
    case ClosureTag::pn:
    case ClosureTag::fpn:
      return Eigen::MatrixXd::Zero(order + 1, m.cols());
    default:
      throw std::invalid_argument("closing_moment_jacobian: closure is gradient-type");
  }
}

}  // namespace rtclosure
