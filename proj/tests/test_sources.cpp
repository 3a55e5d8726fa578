#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "helmfem/sources.hpp"

using namespace helmfem;

namespace {

constexpr double pi = std::numbers::pi;
using C = std::complex<double>;

template <class F>
C fd_laplacian(F u, const Point2& p, double h) {
  return (u({p.x + h, p.y}) + u({p.x - h, p.y}) + u({p.x, p.y + h}) + u({p.x, p.y - h}) - 4.0 * u(p)) / (h * h);
}

}  // namespace

TEST(PlaneWave, SpotValues) {
  const PlaneWave pw{7.0, 0.0};
  EXPECT_NEAR(std::abs(pw.eval({0, 0}).value - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(pw.eval({pi / 7.0, 0}).value + 1.0), 0.0, 1e-14);
  EXPECT_NEAR(norm(PlaneWave{3.0, 1.1}.direction()), 1.0, 1e-15);
}

TEST(PlaneWave, UnimodularWithAnalyticGradient) {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  const PlaneWave pw{12.0, pi / 6};
  const double eps = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const Point2 x{u(rng), u(rng)};
    const ValueGradient vg = pw.eval(x);
    EXPECT_NEAR(std::abs(vg.value), 1.0, 1e-14);
    const C gx = (pw.eval({x.x + eps, x.y}).value - pw.eval({x.x - eps, x.y}).value) / (2 * eps);
    const C gy = (pw.eval({x.x, x.y + eps}).value - pw.eval({x.x, x.y - eps}).value) / (2 * eps);
    EXPECT_NEAR(std::abs(vg.grad[0] - gx), 0.0, 1e-7 * pw.k);
    EXPECT_NEAR(std::abs(vg.grad[1] - gy), 0.0, 1e-7 * pw.k);
  }
}

TEST(PlaneWave, SatisfiesHelmholtz) {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const PlaneWave pw{5.0, 0.8};
  const auto f = [&](const Point2& x) { return pw.eval(x).value; };
  for (int i = 0; i < 20; ++i) {
    const Point2 x{u(rng), u(rng)};
    EXPECT_LE(std::abs(fd_laplacian(f, x, 1e-4) / (pw.k * pw.k) + f(x)), 1e-6);
  }
}

TEST(ImpedanceData, EdgeCases) {
  const Point2 x{0.3, 0.7};
  const PlaneWave east{4.0, 0.0}, north{4.0, pi / 2};
  EXPECT_NEAR(std::abs(impedance_data_plane_wave(east, x, {1, 0})), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(impedance_data_plane_wave(east, x, {-1, 0}) - C(0, -2) * east.eval(x).value), 0.0, 1e-14);
  EXPECT_NEAR(std::abs(impedance_data_plane_wave(north, x, {0, -1}) - C(0, -2) * north.eval(x).value), 0.0, 1e-14);
}

TEST(ImpedanceData, MatchesNormalDerivativeDefinition) {
  const PlaneWave pw{9.0, 0.37};
  const Point2 x{1.0, 0.4}, n{0.6, 0.8};
  const ValueGradient vg = pw.eval(x);
  const C g = (vg.grad[0] * n.x + vg.grad[1] * n.y) / pw.k - C(0, 1) * vg.value;
  EXPECT_NEAR(std::abs(impedance_data_plane_wave(pw, x, n) - g), 0.0, 1e-13);
}

TEST(BumpSource, SupportAndCentre) {
  const BumpSource b{20.0, 0.1};
  EXPECT_NEAR(std::abs(b.eval_u({0, 0}).value - 1.0), 0.0, 1e-15);
  for (Point2 x : {Point2{0.1, 0.0}, Point2{-0.2, 0.05}, Point2{0.0, 0.1}, Point2{0.05, -0.13}}) {
    EXPECT_EQ(b.eval_u(x).value, C(0));
    EXPECT_EQ(b.source(x), C(0));
    EXPECT_EQ(bump_source_eval(b, x), C(0));
  }
}

TEST(BumpSource, ProfileDerivatives) {
  const BumpSource b{1.0, 0.1};
  const double eps = 1e-6;
  for (double t : {-0.09, -0.05, 0.0, 0.02, 0.07}) {
    const auto c = b.chi(t);
    EXPECT_NEAR(c[0], std::exp(5 * t * t / (t * t - 0.01)), 1e-15);
    EXPECT_NEAR(c[1], (b.chi(t + eps)[0] - b.chi(t - eps)[0]) / (2 * eps), 1e-6);
    EXPECT_NEAR(c[2], (b.chi(t + eps)[1] - b.chi(t - eps)[1]) / (2 * eps), 1e-4 * (1 + std::abs(c[2])));
  }
}

TEST(BumpSource, SourceMatchesFiniteDifferences) {
  const BumpSource b{10.0, 0.1};
  const auto u = [&](const Point2& x) { return b.eval_u(x).value; };
  const Point2 x{0.03, -0.02};
  const C fd = fd_laplacian(u, x, 1e-5) + b.k * b.k * u(x);
  EXPECT_LE(std::abs(b.source(x) - fd), 1e-4 * std::abs(b.source(x)));

  std::mt19937 rng(43);
  std::uniform_real_distribution<double> p(-0.09, 0.09);
  for (int i = 0; i < 20; ++i) {
    const Point2 y{p(rng), p(rng)};
    const C g = b.source(y);
    const C ref = fd_laplacian(u, y, 1e-5) + b.k * b.k * u(y);
    EXPECT_LE(std::abs(g - ref), 1e-4 * std::abs(g) + 1e-6);
    EXPECT_EQ(bump_source_eval(b, y), g);
    EXPECT_NEAR(std::abs(b.rhs_density()(y) + g / (b.k * b.k)), 0.0, 1e-14 * std::abs(g));
  }
}

TEST(BumpSource, GradientMatchesFiniteDifferences) {
  const BumpSource b{25.0, 0.1};
  const double eps = 1e-7;
  const Point2 x{-0.04, 0.06};
  const ValueGradient vg = b.eval_u(x);
  const C gx = (b.eval_u({x.x + eps, x.y}).value - b.eval_u({x.x - eps, x.y}).value) / (2 * eps);
  const C gy = (b.eval_u({x.x, x.y + eps}).value - b.eval_u({x.x, x.y - eps}).value) / (2 * eps);
  EXPECT_LE(std::abs(vg.grad[0] - gx), 1e-6 * std::abs(gx));
  EXPECT_LE(std::abs(vg.grad[1] - gy), 1e-6 * std::abs(gy));
}

TEST(QuasiResonance, FlatMirrors) {
  EXPECT_NEAR(flat_mirror_quasi_resonance(0.8, 0.2, 20), 104.7198, 1e-4);
  EXPECT_NEAR(flat_mirror_quasi_resonance(0.8, 0.2, 1), pi / 0.6, 1e-14);
  EXPECT_NEAR(flat_mirror_quasi_resonance(0.6, 0.2, 14), 2 * flat_mirror_quasi_resonance(0.6, 0.2, 7), 1e-12);
  EXPECT_THROW(flat_mirror_quasi_resonance(0.2, 0.2, 1), std::invalid_argument);
  EXPECT_THROW(flat_mirror_quasi_resonance(0.8, 0.2, 0), std::invalid_argument);
}

TEST(QuasiResonance, CurvedMirrorsTabulated) {
  EXPECT_EQ(curved_mirror_quasi_resonance(), 95.838);
  EXPECT_EQ(curved_mirror_quasi_resonance(), curved_mirror_quasi_resonance());
  EXPECT_FALSE(curved_mirror_resonance_provenance.empty());
}
