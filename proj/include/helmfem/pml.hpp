#pragma once

#include <array>
#include <complex>
#include <numbers>

#include "helmfem/point.hpp"

namespace helmfem {

/// Radial PML: the scaling turns on at r_inner and the domain is truncated
/// at r_outer.
struct PmlSpec {
  double r_inner = 1.0;
  double r_outer = 1.5;
  double theta = std::numbers::pi / 4.0;
};

/// Throws std::invalid_argument unless 0 < r_inner < r_outer and
/// 0 < theta < pi/2.
void validate(const PmlSpec& spec);

struct ScalingProfile {
  double f_theta = 0.0;
  double f_theta_prime = 0.0;
};

/// f_theta = tan(theta) f(r) with f(r) = (r - r_inner)^2 / (r_outer - r_inner)
/// above r_inner and 0 below.
ScalingProfile scaling_profile(const PmlSpec& spec, double r);

struct AlphaBeta {
  std::complex<double> alpha{1.0, 0.0};
  std::complex<double> beta{1.0, 0.0};
};

/// alpha = 1 + i f_theta'(r), beta = 1 + i f_theta(r) / r.
AlphaBeta alpha_beta(const PmlSpec& spec, double r);

struct PmlCoefficients {
  std::array<std::complex<double>, 4> A{1.0, 0.0, 0.0, 1.0};  // row-major 2x2
  std::complex<double> c_inv2{1.0, 0.0};
};

/// A = H diag(beta/alpha, alpha/beta) H^T with H the rotation by the polar
/// angle of pt, and c^-2 = alpha beta. Identity and 1 for r <= r_inner.
PmlCoefficients pml_tensor_2d(const PmlSpec& spec, const Point2& pt);

}  // namespace helmfem
