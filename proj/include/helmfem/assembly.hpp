#pragma once

#include <array>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "helmfem/dtn.hpp"
#include "helmfem/fespace.hpp"
#include "helmfem/pml.hpp"

namespace helmfem {

using ComplexSparseMatrix = Eigen::SparseMatrix<cplx, Eigen::ColMajor, int>;

/// none: volume terms only (no boundary contribution).
enum class Truncation { none, impedance, pml, dtn };

/// a(u, v) = int k^-2 A grad u . grad conj(v) - c^-2 u conj(v) plus the
/// truncation term: -i k^-1 <u, v> on outer edges (impedance) or
/// -k^-1 <DtN u, v> (dtn). For pml, A and c^-2 come from the PML module
/// outside pml.r_inner.
struct FormSpec {
  Truncation truncation = Truncation::impedance;
  double k = 1.0;
  /// Real symmetric coefficient (row-major); empty means identity.
  std::function<std::array<double, 4>(const Point2&)> A;
  /// Wave speed; empty means 1.
  std::function<double(const Point2&)> c;
  PmlSpec pml;
  DtnSpec dtn;  // radius and n_max are used; dtn.k is replaced by k above
  int quadrature_degree = 0;  // 0 selects 2p + 2
};

/// M(i, j) = a(phi_j, phi_i). Throws MeshError when the truncation needs
/// outer boundary edges the mesh does not have, std::runtime_error on
/// non-finite coefficients.
ComplexSparseMatrix assemble_form(const FemSpace& space, const FormSpec& form);

/// Exact function with gradient, used for right-hand sides and residuals.
struct ExactFunction {
  std::function<cplx(const Point2&)> value;
  std::function<std::array<cplx, 2>(const Point2&)> gradient;
};

/// Boundary data g(x, outward unit normal).
using BoundaryFunction = std::function<cplx(const Point2&, const Point2&)>;

struct RhsFunctional {
  enum class Kind { volume_source, impedance_trace };
  Kind kind = Kind::volume_source;
  ComplexFunction volume;     // b_i = int g phi_i
  BoundaryFunction boundary;  // b_i = k^-1 int_{outer} g phi_i ds

  static RhsFunctional volume_source(ComplexFunction g);
  static RhsFunctional impedance_trace(BoundaryFunction g);
};

/// The impedance trace is scaled by k^-1 so that data g = k^-1 du/dn - i u
/// reproduces u as the discrete target of the impedance form.
ComplexVector assemble_rhs(const FemSpace& space, const RhsFunctional& rhs, double k,
                           int quadrature_degree = 0);

/// r_i = a(u, phi_i) for an exact function u, by element quadrature of the
/// given degree (boundary terms included for impedance).
ComplexVector form_against_basis(const FemSpace& space, const FormSpec& form,
                                 const ExactFunction& u, int quadrature_degree);

/// Homogeneous Dirichlet constraint: rows and columns of `dofs` are zeroed,
/// the diagonal set to 1 and the right-hand side entries to 0.
void apply_dirichlet(ComplexSparseMatrix& matrix, ComplexVector& rhs, const std::vector<int>& dofs);

/// Coordinate text "i j re im", one nonzero per line.
void write_matrix_coo(std::ostream& out, const ComplexSparseMatrix& matrix);

}  // namespace helmfem
