#include "helmfem/quadrature.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <utility>

namespace helmfem {

namespace {

// Legendre polynomial P_n and its derivative at x in (-1, 1).
std::pair<double, double> legendre(int n, double x) {
  double p0 = 1.0, p1 = x;
  for (int j = 2; j <= n; ++j) {
    const double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
    p0 = p1;
    p1 = p2;
  }
  return {p1, n * (x * p1 - p0) / (x * x - 1.0)};
}

}  // namespace

LineRule gauss_legendre(int n) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need n >= 1");
  LineRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  for (int i = 0; i < (n + 1) / 2; ++i) {
    double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    for (int it = 0; it < 100; ++it) {
      const auto [p, dp] = legendre(n, x);
      const double dx = p / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    const double dp = legendre(n, x).second;
    const double w = 1.0 / ((1.0 - x * x) * dp * dp);
    rule.points[i] = 0.5 * (1.0 - x);
    rule.points[n - 1 - i] = 0.5 * (1.0 + x);
    rule.weights[i] = rule.weights[n - 1 - i] = w;
  }
  return rule;
}

QuadratureRule triangle_rule(int degree) {
  if (degree < 0) throw std::invalid_argument("triangle_rule: negative degree");
  const int n = (degree + 3) / 2;
  const LineRule g = gauss_legendre(n);
  QuadratureRule rule;
  rule.degree = degree;
  for (int i = 0; i < n; ++i) {
    const double u = g.points[i];
    for (int j = 0; j < n; ++j) {
      rule.xi.push_back(u);
      rule.eta.push_back(g.points[j] * (1.0 - u));
      rule.weights.push_back(g.weights[i] * g.weights[j] * (1.0 - u));
    }
  }
  return rule;
}

}  // namespace helmfem
