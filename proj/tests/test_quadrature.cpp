#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "hdgstokes/quadrature.hpp"

using namespace hdgstokes;

namespace {

// exact integral of u^a v^b over the reference triangle: a! b! / (a+b+2)!
double monomial_integral(int a, int b) {
  double num = 1.0;
  for (int i = 2; i <= a; ++i) num *= i;
  for (int i = 2; i <= b; ++i) num *= i;
  double den = 1.0;
  for (int i = 2; i <= a + b + 2; ++i) den *= i;
  return num / den;
}

double integrate_monomial(const QuadratureRule& r, int a, int b) {
  double s = 0.0;
  for (int q = 0; q < r.weights.size(); ++q)
    s += r.weights(q) * std::pow(r.points(q, 0), a) * std::pow(r.points(q, 1), b);
  return s;
}

}  // namespace

TEST(TriangleQuadrature, ConstantAndCentroid) {
  const auto r = triangle_quadrature(4);
  EXPECT_NEAR(integrate_monomial(r, 0, 0), 0.5, 1e-14);
  EXPECT_NEAR(integrate_monomial(r, 1, 0), 1.0 / 6.0, 1e-14);
}

TEST(TriangleQuadrature, WeightsPositiveAndSumToMeasure) {
  for (int e : {1, 2, 5, 8, 14}) {
    const auto r = triangle_quadrature(e);
    EXPECT_GT(r.weights.minCoeff(), 0.0);
    EXPECT_NEAR(r.weights.sum(), 0.5, 1e-14);
    EXPECT_GE(r.exactness, e);
  }
}

TEST(TriangleQuadrature, AllMonomialsExact) {
  for (int e : {2, 5, 8, 10, 14}) {
    const auto r = triangle_quadrature(e);
    for (int a = 0; a <= e; ++a)
      for (int b = 0; a + b <= e; ++b) {
        const double exact = monomial_integral(a, b);
        EXPECT_NEAR(integrate_monomial(r, a, b), exact, 1e-13 * std::max(1.0, std::abs(exact)))
            << "e=" << e << " a=" << a << " b=" << b;
      }
  }
}

TEST(TriangleQuadrature, RejectsBadExactness) {
  EXPECT_THROW(triangle_quadrature(0), std::invalid_argument);
  EXPECT_THROW(triangle_quadrature(100), std::invalid_argument);
}

TEST(EdgeQuadrature, OnePointIntegratesLinears) {
  const auto r = edge_quadrature(1);
  double s0 = 0.0, s1 = 0.0;
  for (int q = 0; q < r.weights.size(); ++q) {
    s0 += r.weights(q);
    s1 += r.weights(q) * r.points(q, 0);
  }
  EXPECT_NEAR(s0, 2.0, 1e-14);
  EXPECT_NEAR(s1, 0.0, 1e-14);
}

TEST(EdgeQuadrature, ThreePointQuartic) {
  const auto r = edge_quadrature(3);
  double s = 0.0;
  for (int q = 0; q < r.weights.size(); ++q) s += r.weights(q) * std::pow(r.points(q, 0), 4);
  EXPECT_NEAR(s, 2.0 / 5.0, 1e-14);
}

TEST(EdgeQuadrature, RandomPolynomialMatchesAntiderivative) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(-1.0, 1.0);
  for (int p = 1; p <= 8; ++p) {
    const auto r = edge_quadrature(p);
    const int deg = 2 * p - 1;
    std::vector<double> coef(deg + 1);
    for (auto& c : coef) c = dist(rng);
    // exact: sum_j c_j (1 - (-1)^{j+1}) / (j+1)
    double exact = 0.0;
    for (int j = 0; j <= deg; ++j)
      exact += coef[j] * (1.0 - std::pow(-1.0, j + 1)) / (j + 1);
    double s = 0.0;
    for (int q = 0; q < r.weights.size(); ++q) {
      double xp = 1.0, val = 0.0;
      for (int j = 0; j <= deg; ++j) {
        val += coef[j] * xp;
        xp *= r.points(q, 0);
      }
      s += r.weights(q) * val;
    }
    EXPECT_NEAR(s, exact, 1e-13);
  }
}
