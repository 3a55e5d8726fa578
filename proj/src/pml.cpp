#include "helmfem/pml.hpp"

#include <cmath>
#include <stdexcept>

namespace helmfem {

void validate(const PmlSpec& spec) {
  if (!(spec.r_inner > 0.0 && spec.r_outer > spec.r_inner))
    throw std::invalid_argument("pml: need 0 < r_inner < r_outer");
  if (!(spec.theta > 0.0 && spec.theta < std::numbers::pi / 2.0))
    throw std::invalid_argument("pml: theta must lie in (0, pi/2)");
}

ScalingProfile scaling_profile(const PmlSpec& spec, double r) {
  if (r <= spec.r_inner) return {};
  const double t = std::tan(spec.theta);
  const double w = spec.r_outer - spec.r_inner;
  const double d = r - spec.r_inner;
  return {t * d * d / w, 2.0 * t * d / w};
}

AlphaBeta alpha_beta(const PmlSpec& spec, double r) {
  if (r <= spec.r_inner) return {};
  const ScalingProfile s = scaling_profile(spec, r);
  return {{1.0, s.f_theta_prime}, {1.0, s.f_theta / r}};
}

PmlCoefficients pml_tensor_2d(const PmlSpec& spec, const Point2& pt) {
  const double r = norm(pt);
  if (r <= spec.r_inner) return {};
  const AlphaBeta ab = alpha_beta(spec, r);
  const std::complex<double> d0 = ab.beta / ab.alpha;
  const std::complex<double> d1 = ab.alpha / ab.beta;
  const double c = pt.x / r, s = pt.y / r;
  PmlCoefficients out;
  out.A[0] = c * c * d0 + s * s * d1;
  out.A[1] = c * s * (d0 - d1);
  out.A[2] = out.A[1];
  out.A[3] = s * s * d0 + c * c * d1;
  out.c_inv2 = ab.alpha * ab.beta;
  return out;
}

}  // namespace helmfem
