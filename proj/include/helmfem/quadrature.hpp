#pragma once

#include <vector>

namespace helmfem {

/// Gauss-Legendre rule with n points on [0, 1].
struct LineRule {
  std::vector<double> points;
  std::vector<double> weights;
};

LineRule gauss_legendre(int n);

/// Rule on the reference triangle (0,0), (1,0), (0,1). Points are reference
/// coordinates (xi, eta); weights sum to the reference area 1/2.
struct QuadratureRule {
  std::vector<double> xi;
  std::vector<double> eta;
  std::vector<double> weights;
  int degree = 0;

  std::size_t size() const { return weights.size(); }
};

/// Collapsed (Duffy) Gauss-Legendre product rule exact for polynomials of
/// total degree <= degree.
QuadratureRule triangle_rule(int degree);

}  // namespace helmfem
