#include "helmfem/sources.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace helmfem {

namespace {
const cplx I(0.0, 1.0);
}

Point2 PlaneWave::direction() const { return {std::cos(theta), std::sin(theta)}; }

ValueGradient PlaneWave::eval(const Point2& pt) const {
  const Point2 d = direction();
  const cplx u = std::polar(1.0, k * dot(d, pt));
  return {u, {I * k * d.x * u, I * k * d.y * u}};
}

ExactFunction PlaneWave::as_exact() const {
  const PlaneWave pw = *this;
  return {[pw](const Point2& x) { return pw.eval(x).value; },
          [pw](const Point2& x) { return pw.eval(x).grad; }};
}

cplx impedance_data_plane_wave(const PlaneWave& pw, const Point2& pt, const Point2& normal) {
  return I * (dot(pw.direction(), normal) - 1.0) * pw.eval(pt).value;
}

std::array<double, 3> BumpSource::chi(double t) const {
  const double a = half_width * half_width;
  const double s = t * t - a;
  if (!(s < 0.0)) return {0.0, 0.0, 0.0};
  const double c = std::exp(5.0 * t * t / s);
  const double d1 = -10.0 * a * t / (s * s);
  const double d2 = 10.0 * a * (3.0 * t * t + a) / (s * s * s);
  return {c, c * d1, c * (d2 + d1 * d1)};
}

ValueGradient BumpSource::eval_u(const Point2& pt) const {
  const auto cx = chi(pt.x);
  const auto cy = chi(pt.y);
  const cplx e = std::polar(1.0, k * pt.x);
  return {cx[0] * cy[0] * e, {(cx[1] + I * k * cx[0]) * cy[0] * e, cx[0] * cy[1] * e}};
}

ExactFunction BumpSource::as_exact() const {
  const BumpSource s = *this;
  return {[s](const Point2& x) { return s.eval_u(x).value; },
          [s](const Point2& x) { return s.eval_u(x).grad; }};
}

cplx BumpSource::source(const Point2& pt) const {
  const auto cx = chi(pt.x);
  const auto cy = chi(pt.y);
  if (cx[0] == 0.0 || cy[0] == 0.0) return 0.0;
  const cplx e = std::polar(1.0, k * pt.x);
  return ((cx[2] + 2.0 * I * k * cx[1]) * cy[0] + cx[0] * cy[2]) * e;
}

ComplexFunction BumpSource::rhs_density() const {
  const BumpSource s = *this;
  return [s](const Point2& x) { return -s.source(x) / (s.k * s.k); };
}

cplx bump_source_eval(const BumpSource& src, const Point2& pt) { return src.source(pt); }

double flat_mirror_quasi_resonance(double L, double b, int n) {
  if (!(L > b && b > 0.0) || n < 1)
    throw std::invalid_argument("flat_mirror_quasi_resonance: need L > b > 0 and n >= 1");
  return n * std::numbers::pi / (L - b);
}

double curved_mirror_quasi_resonance() { return 95.838; }

}  // namespace helmfem
