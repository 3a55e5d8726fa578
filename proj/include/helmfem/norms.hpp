#pragma once

#include <vector>

#include "helmfem/assembly.hpp"
#include "helmfem/fespace.hpp"

namespace helmfem {

/// Set of triangles over which element-restricted norms are summed.
struct SubdomainSelector {
  std::vector<int> elements;

  static SubdomainSelector all(const Mesh& mesh);
  static SubdomainSelector region(const Mesh& mesh, int tag);
  /// Triangles whose centroid lies in the box.
  static SubdomainSelector box(const Mesh& mesh, const Rect& box);
  /// Triangles whose centroid lies in the closed ball.
  static SubdomainSelector ball(const Mesh& mesh, const Point2& center, double radius);
  /// Triangles lying entirely inside the open ball.
  static SubdomainSelector inside_ball(const Mesh& mesh, const Point2& center, double radius);
};

/// Squared integrals of |v|^2 and |grad v|^2 over a selector.
struct NormParts {
  double l2_sq = 0.0;
  double grad_sq = 0.0;
  double h1k_sq(double k) const { return grad_sq / (k * k) + l2_sq; }
};

/// Quadrature degree 0 selects 2p + 4. Throws std::invalid_argument on an
/// empty selector.
NormParts norm_parts(const FemField& v, const SubdomainSelector& sel, int quadrature_degree = 0);
NormParts norm_parts(const ExactFunction& v, const Mesh& mesh, const SubdomainSelector& sel,
                     int quadrature_degree);

/// sqrt of sum over selected elements of k^-2 |grad v|^2 + |v|^2.
double h1k_norm(const FemField& v, const SubdomainSelector& sel, double k, int quadrature_degree = 0);
double h1k_norm(const ExactFunction& v, const Mesh& mesh, const SubdomainSelector& sel, double k,
                int quadrature_degree);
double l2_norm(const FemField& v, const SubdomainSelector& sel, int quadrature_degree = 0);
double l2_norm(const ExactFunction& v, const Mesh& mesh, const SubdomainSelector& sel,
               int quadrature_degree);

struct ErrorNorms {
  double l2_err = 0.0;
  double h1k_err = 0.0;
  double l2_rel = 0.0;
  double h1k_rel = 0.0;
  bool relative_valid = true;  // false when the exact solution has zero norm
};

/// Errors of u_h against u_exact by element quadrature; relative values
/// divide by the same norms of u_exact on the selector.
ErrorNorms error_norms(const FemField& uh, const ExactFunction& u_exact, const SubdomainSelector& sel,
                       double k, int quadrature_degree = 0);

}  // namespace helmfem
