#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "rtclosure/basis.hpp"

using namespace rtclosure;

namespace {

// Closed forms of the first few Legendre polynomials.
double legendre_closed(int k, double v) {
  switch (k) {
    case 0: return 1.0;
    case 1: return v;
    case 2: return 0.5 * (3 * v * v - 1);
    case 3: return 0.5 * (5 * v * v * v - 3 * v);
    case 4: return (35 * std::pow(v, 4) - 30 * v * v + 3) / 8.0;
    case 5: return (63 * std::pow(v, 5) - 70 * std::pow(v, 3) + 15 * v) / 8.0;
    default: return NAN;
  }
}

double monomial_integral(int k) { return k % 2 == 0 ? 2.0 / (k + 1) : 0.0; }

}  // namespace

TEST(GaussLegendre, OnePointIsMidpoint) {
  const auto q = gauss_legendre(1);
  ASSERT_EQ(q.size(), 1u);
  EXPECT_EQ(q.nodes[0], 0.0);
  EXPECT_NEAR(q.weights[0], 2.0, 1e-15);
}

TEST(GaussLegendre, TwoPointClosedForm) {
  const auto q = gauss_legendre(2);
  EXPECT_NEAR(q.nodes[0], -1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(q.nodes[1], 1.0 / std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(q.weights[0], 1.0, 1e-15);
  EXPECT_NEAR(q.weights[1], 1.0, 1e-15);
}

TEST(GaussLegendre, ZeroPointsRejected) { EXPECT_THROW(gauss_legendre(0), std::invalid_argument); }

TEST(GaussLegendre, SixtyFourPointExactness) {
  const auto q = gauss_legendre(64);
  double sum = 0.0;
  for (double w : q.weights) sum += w;
  EXPECT_NEAR(sum, 2.0, 1e-13);
  for (int k = 0; k <= 127; ++k) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
    EXPECT_NEAR(s, monomial_integral(k), 1e-12) << "degree " << k;
  }
}

TEST(GaussLegendre, NodesIncreasingInsideInterval) {
  for (int n : {1, 2, 3, 7, 16, 32, 63, 64, 128}) {
    const auto q = gauss_legendre(n);
    for (std::size_t i = 0; i < q.size(); ++i) {
      EXPECT_GT(q.nodes[i], -1.0);
      EXPECT_LT(q.nodes[i], 1.0);
      EXPECT_GT(q.weights[i], 0.0);
      if (i > 0) EXPECT_LT(q.nodes[i - 1], q.nodes[i]);
    }
  }
}

TEST(GaussLegendre, ExactToDegree2nMinus1) {
  for (int n : {1, 2, 3, 5, 8, 13, 21, 32}) {
    const auto q = gauss_legendre(n);
    for (int k = 0; k <= 2 * n - 1; ++k) {
      double s = 0.0;
      for (std::size_t i = 0; i < q.size(); ++i) s += q.weights[i] * std::pow(q.nodes[i], k);
      EXPECT_NEAR(s, monomial_integral(k), 1e-12) << "n=" << n << " degree " << k;
    }
  }
}

TEST(Legendre, SpotValues) {
  EXPECT_EQ(legendre_eval(0, 0.3), 1.0);
  EXPECT_NEAR(legendre_eval(2, 1.0), 1.0, 1e-15);
  EXPECT_NEAR(legendre_eval(3, 0.5), -0.4375, 1e-15);
}

TEST(Legendre, MatchesClosedForms) {
  for (int k = 0; k <= 5; ++k) {
    for (double v = -1.0; v <= 1.0; v += 0.0625) {
      EXPECT_NEAR(legendre_eval(k, v), legendre_closed(k, v), 1e-14);
    }
  }
}

TEST(Legendre, DiscreteOrthogonality) {
  const int order = 9;
  const auto q = gauss_legendre(order + 1);
  for (int i = 0; i <= order; ++i) {
    for (int j = 0; j <= order; ++j) {
      double s = 0.0;
      for (std::size_t a = 0; a < q.size(); ++a) {
        s += 0.5 * q.weights[a] * legendre_eval(i, q.nodes[a]) * legendre_eval(j, q.nodes[a]);
      }
      EXPECT_NEAR(s, i == j ? 1.0 / (2 * i + 1) : 0.0, 1e-12);
    }
  }
}

TEST(ProjectMoments, ConstantField) {
  const auto q = gauss_legendre(8);
  std::vector<double> f(q.size(), 1.0);
  const auto m = project_moments(f, q, 4, MomentBasis::legendre);
  EXPECT_NEAR(m[0], 1.0, 1e-15);
  for (int k = 1; k <= 4; ++k) EXPECT_NEAR(m[static_cast<std::size_t>(k)], 0.0, 1e-15);
  const auto n = project_moments(f, q, 2, MomentBasis::monomial);
  EXPECT_NEAR(n[0], 2.0, 1e-15);
  EXPECT_NEAR(n[1], 0.0, 1e-15);
  EXPECT_NEAR(n[2], 2.0 / 3.0, 1e-15);
}

TEST(ProjectMoments, LinearField) {
  const auto q = gauss_legendre(8);
  std::vector<double> f(q.nodes.begin(), q.nodes.end());
  const auto m = project_moments(f, q, 2, MomentBasis::legendre);
  EXPECT_NEAR(m[0], 0.0, 1e-15);
  EXPECT_NEAR(m[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(m[2], 0.0, 1e-15);
}

TEST(ProjectMoments, LengthMismatch) {
  const auto q = gauss_legendre(8);
  std::vector<double> f(7, 1.0);
  EXPECT_THROW(project_moments(f, q, 2, MomentBasis::legendre), std::invalid_argument);
}

TEST(ProjectMoments, NonnegativeFieldHasNonnegativeDensity) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 3.0);
  const auto q = gauss_legendre(16);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(q.size());
    for (auto& x : f) x = u(rng);
    EXPECT_GE(project_moments(f, q, 5, MomentBasis::legendre)[0], 0.0);
    EXPECT_GE(project_moments(f, q, 5, MomentBasis::monomial)[0], 0.0);
  }
}

TEST(ConvertBasis, IsotropicState) {
  MomentVector m{{1.0, 0.0, 0.0}, MomentBasis::legendre};
  const auto n = convert_basis(m, MomentBasis::monomial);
  EXPECT_EQ(n.basis, MomentBasis::monomial);
  EXPECT_NEAR(n[0], 2.0, 1e-15);
  EXPECT_NEAR(n[1], 0.0, 1e-15);
  EXPECT_NEAR(n[2], 2.0 / 3.0, 1e-15);
}

TEST(ConvertBasis, RoundTrip) {
  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (int order = 0; order <= 9; ++order) {
    MomentVector m;
    for (int k = 0; k <= order; ++k) m.values.push_back(g(rng));
    const auto back = convert_basis(convert_basis(m, MomentBasis::monomial), MomentBasis::legendre);
    for (int k = 0; k <= order; ++k) {
      EXPECT_NEAR(back[static_cast<std::size_t>(k)], m[static_cast<std::size_t>(k)], 1e-12);
    }
  }
}

TEST(ConvertBasis, AgreesWithDualProjection) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  const auto q = gauss_legendre(12);
  std::vector<double> c(6);
  for (auto& x : c) x = g(rng);
  std::vector<double> f;
  for (double v : q.nodes) {
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * std::pow(v, static_cast<double>(i));
    f.push_back(s);
  }
  const auto leg = project_moments(f, q, 5, MomentBasis::legendre);
  const auto mono = project_moments(f, q, 5, MomentBasis::monomial);
  const auto converted = convert_basis(leg, MomentBasis::monomial);
  for (int k = 0; k <= 5; ++k) {
    EXPECT_NEAR(converted[static_cast<std::size_t>(k)], mono[static_cast<std::size_t>(k)], 1e-12);
  }
}

TEST(ConvertBasis, CoefficientsMatchClosedForms) {
  const auto c = legendre_monomial_coefficients(5);
  for (int k = 0; k <= 5; ++k) {
    for (double v : {-0.9, -0.2, 0.35, 0.8}) {
      double s = 0.0;
      for (int j = 0; j <= k; ++j) s += c(k, j) * std::pow(v, j);
      EXPECT_NEAR(s, legendre_closed(k, v), 1e-14);
    }
  }
}
