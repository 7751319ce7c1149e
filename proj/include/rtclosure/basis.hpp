#pragma once

// Angular discretization: Legendre polynomials, Gauss-Legendre quadrature
// and the projections that map an angular profile f(v) onto moments.
//
// Conventions:
//   Legendre moments  m_k = 1/2 * int_{-1}^{1} f(v) P_k(v) dv
//   monomial moments  n_k =       int_{-1}^{1} f(v) v^k   dv

#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace rtclosure {

enum class MomentBasis { legendre, monomial };

inline const char* to_string(MomentBasis b) {
  return b == MomentBasis::legendre ? "legendre" : "monomial";
}

struct Quadrature {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

/// P_k(v) via Bonnet's recursion (k+1) P_{k+1} = (2k+1) v P_k - k P_{k-1}.
inline double legendre_eval(int k, double v) {
  if (k == 0) return 1.0;
  double p_prev = 1.0;
  double p = v;
  for (int j = 1; j < k; ++j) {
    const double p_next = ((2.0 * j + 1.0) * v * p - j * p_prev) / (j + 1.0);
    p_prev = p;
    p = p_next;
  }
  return p;
}

namespace detail {

// Returns {P_n(v), P_n'(v)}.
inline std::pair<double, double> legendre_with_derivative(int n, double v) {
  double p_prev = 1.0;
  double p = v;
  for (int j = 1; j < n; ++j) {
    const double p_next = ((2.0 * j + 1.0) * v * p - j * p_prev) / (j + 1.0);
    p_prev = p;
    p = p_next;
  }
  if (n == 0) return {1.0, 0.0};
  const double dp = n * (v * p - p_prev) / (v * v - 1.0);
  return {p, dp};
}

}  // namespace detail

/// n-point Gauss-Legendre rule on [-1, 1], nodes in increasing order.
///
/// Roots are found by Newton iteration on P_n starting from the
/// Chebyshev-like guesses cos(pi (i + 3/4) / (n + 1/2)); only the upper half
/// is iterated and the rule is completed by symmetry.
inline Quadrature gauss_legendre(int n) {
  if (n < 1) {
    throw std::invalid_argument("gauss_legendre: n must be >= 1, got " +
                                std::to_string(n));
  }
  constexpr double kTol = 1e-15;
  constexpr int kMaxIter = 100;

  Quadrature q;
  q.nodes.assign(static_cast<std::size_t>(n), 0.0);
  q.weights.assign(static_cast<std::size_t>(n), 0.0);
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double v = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double dp = 0.0;
    for (int it = 0; it < kMaxIter; ++it) {
      const auto [p, d] = detail::legendre_with_derivative(n, v);
      dp = d;
      const double step = p / d;
      v -= step;
      if (std::abs(step) <= kTol) break;
    }
    dp = detail::legendre_with_derivative(n, v).second;
    const double w = 2.0 / ((1.0 - v * v) * dp * dp);
    // i-th largest root sits at index n-1-i; its mirror at index i.
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    const auto lo = static_cast<std::size_t>(i);
    q.nodes[hi] = v;
    q.nodes[lo] = -v;
    q.weights[hi] = w;
    q.weights[lo] = w;
  }
  if (n % 2 == 1) q.nodes[static_cast<std::size_t>(n / 2)] = 0.0;
  return q;
}

struct MomentVector {
  std::vector<double> values;
  MomentBasis basis = MomentBasis::legendre;

  int order() const noexcept { return static_cast<int>(values.size()) - 1; }
  double operator[](std::size_t k) const { return values[k]; }
};

/// Project one angular slice f(v_q) onto moments 0..N.
inline MomentVector project_moments(std::span<const double> f,
                                    const Quadrature& quad, int order,
                                    MomentBasis basis) {
  if (f.size() != quad.size()) {
    throw std::invalid_argument(
        "project_moments: angular slice has " + std::to_string(f.size()) +
        " samples but the quadrature has " + std::to_string(quad.size()));
  }
  if (order < 0) throw std::invalid_argument("project_moments: order < 0");
  MomentVector out;
  out.basis = basis;
  out.values.assign(static_cast<std::size_t>(order) + 1, 0.0);
  for (std::size_t q = 0; q < quad.size(); ++q) {
    const double v = quad.nodes[q];
    const double wf = quad.weights[q] * f[q];
    if (basis == MomentBasis::legendre) {
      double p_prev = 1.0;
      double p = v;
      out.values[0] += 0.5 * wf;
      for (int k = 1; k <= order; ++k) {
        out.values[static_cast<std::size_t>(k)] += 0.5 * wf * p;
        const double p_next = ((2.0 * k + 1.0) * v * p - k * p_prev) / (k + 1.0);
        p_prev = p;
        p = p_next;
      }
    } else {
      double vk = 1.0;
      for (int k = 0; k <= order; ++k) {
        out.values[static_cast<std::size_t>(k)] += wf * vk;
        vk *= v;
      }
    }
  }
  return out;
}

/// Lower-triangular C with P_k(v) = sum_j C(k, j) v^j, k, j = 0..order.
inline Eigen::MatrixXd legendre_monomial_coefficients(int order) {
  const int n = order + 1;
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  c(0, 0) = 1.0;
  if (n > 1) c(1, 1) = 1.0;
  for (int k = 1; k + 1 < n; ++k) {
    for (int j = 0; j <= k + 1; ++j) {
      double val = 0.0;
      if (j >= 1) val += (2.0 * k + 1.0) * c(k, j - 1);
      val -= k * c(k - 1, j);
      c(k + 1, j) = val / (k + 1.0);
    }
  }
  return c;
}

/// Matrix B with m = B n (B = C / 2, lower triangular).
inline Eigen::MatrixXd monomial_to_legendre_matrix(int order) {
  return 0.5 * legendre_monomial_coefficients(order);
}

/// Exact linear change of basis between Legendre and monomial moments.
inline MomentVector convert_basis(const MomentVector& m, MomentBasis to) {
  if (m.basis == to) return m;
  const int order = m.order();
  const Eigen::MatrixXd b = monomial_to_legendre_matrix(order);
  const Eigen::Map<const Eigen::VectorXd> in(m.values.data(),
                                             static_cast<Eigen::Index>(m.values.size()));
  Eigen::VectorXd res;
  if (to == MomentBasis::legendre) {
    res = b * in;
  } else {
    res = b.triangularView<Eigen::Lower>().solve(in);
  }
  MomentVector out;
  out.basis = to;
  out.values.assign(res.data(), res.data() + res.size());
  return out;
}

}  // namespace rtclosure
