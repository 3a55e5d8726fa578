#pragma once

#include <complex>
#include <vector>

#include <Eigen/Core>

#include "helmfem/fespace.hpp"

namespace helmfem {

/// Truncated Fourier-Hankel DtN map on the circle of radius `radius`.
struct DtnSpec {
  double radius = 1.0;
  double k = 1.0;
  int n_max = 0;  // 0 selects ceil(2 k R) + 32
};

/// n_max after resolving the automatic default. Throws std::invalid_argument
/// when R or k is not positive or n_max < ceil(kR).
int resolved_n_max(const DtnSpec& spec);

/// H_n'(z) / H_n(z) for the Hankel function of the first kind, z > 0,
/// n = 0..n_top. J_n comes from Miller's backward recurrence, Y_n from the
/// forward recurrence; ratios are formed so that no Hankel value overflows.
std::vector<std::complex<double>> hankel_log_derivatives(int n_top, double z);

/// H_|n|'(kR) / H_|n|(kR).
std::complex<double> dtn_symbol(const DtnSpec& spec, int n);

/// Dense boundary block on the DOFs of edges tagged boundary::outer:
/// B(a, b) = -k^-1 sum_n symbol(n) / (2 pi R) c_n(phi_dofs[b]) conj(c_n(phi_dofs[a])).
struct DtnBlock {
  std::vector<int> dofs;
  Eigen::MatrixXcd matrix;
};

/// Fourier coefficients c_n(phi) = int phi e^{-i n theta} ds of the outer
/// boundary traces, one row per DOF in `dofs`, columns n = -n_max..n_max.
Eigen::MatrixXcd boundary_fourier_coefficients(const FemSpace& space, int n_max,
                                               std::vector<int>& dofs);

/// Throws MeshError when the mesh has no boundary edge tagged outer.
DtnBlock assemble_dtn_boundary(const FemSpace& space, const DtnSpec& spec);

}  // namespace helmfem
