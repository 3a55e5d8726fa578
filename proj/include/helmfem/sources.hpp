#pragma once

#include <array>
#include <complex>
#include <string_view>

#include "helmfem/assembly.hpp"
#include "helmfem/point.hpp"

namespace helmfem {

/// u = exp(i k (cos(theta) x + sin(theta) y)).
struct PlaneWave {
  double k = 1.0;
  double theta = 0.0;

  Point2 direction() const;
  ValueGradient eval(const Point2& pt) const;
  ExactFunction as_exact() const;
};

/// Impedance data g = k^-1 du/dn - i u = i (d.n - 1) u for outward unit normal n.
cplx impedance_data_plane_wave(const PlaneWave& pw, const Point2& pt, const Point2& normal);

/// Compactly supported u(x, y) = chi(x) chi(y) exp(i k x) with
/// chi(t) = exp(5 t^2 / (t^2 - w^2)) for |t| < w, w = half_width.
struct BumpSource {
  double k = 1.0;
  double half_width = 0.1;

  /// chi and its first two derivatives at t.
  std::array<double, 3> chi(double t) const;
  ValueGradient eval_u(const Point2& pt) const;
  ExactFunction as_exact() const;
  /// g = Laplace(u) + k^2 u.
  cplx source(const Point2& pt) const;
  /// Volume density f = -k^-2 g for assemble_rhs, so that u solves
  /// a(u, v) = int f conj(v).
  ComplexFunction rhs_density() const;
};

cplx bump_source_eval(const BumpSource& src, const Point2& pt);

/// k_n = n pi / (L - b).
double flat_mirror_quasi_resonance(double L, double b, int n);

/// Tabulated resonance of the two curved mirrors (from a Mathieu-function
/// computation, not recomputed here).
double curved_mirror_quasi_resonance();
inline constexpr std::string_view curved_mirror_resonance_provenance =
    "tabulated constant 95.838 for the two curved mirror geometry";

}  // namespace helmfem
