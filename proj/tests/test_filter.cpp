#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "helmfem/filter.hpp"

using namespace helmfem;

namespace {

constexpr double pi = std::numbers::pi;
using C = std::complex<double>;

SampleGrid random_grid(int N, unsigned seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> n;
  SampleGrid g;
  g.N = N;
  g.delta = 0.01;
  g.x0 = 0.1;
  g.y0 = -0.2;
  g.values.resize(N, N);
  for (int j = 0; j < N; ++j)
    for (int i = 0; i < N; ++i) g.values(i, j) = C(n(rng), n(rng));
  return g;
}

ComplexFunction plane(double kx, double ky) {
  return [=](const Point2& x) { return std::polar(1.0, kx * x.x + ky * x.y); };
}

double density_rho(const ComplexFunction& f, double k, const FilterBox& box, double delta, bool window) {
  const SampleGrid g = sample_on_grid(f, box, delta, WindowSpec{window, 0.6});
  return rho(g, lowpass_split(dft2(g), k, 2.0));
}

}  // namespace

TEST(Window, ProfileShape) {
  for (double t : {0.0, 1.0, -0.5, 1.5}) EXPECT_EQ(window_1d(t, 0.6), 0.0);
  for (double t : {0.2, 0.35, 0.5, 0.8}) EXPECT_EQ(window_1d(t, 0.6), 1.0);
  double prev = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double t = 0.2 * i / 200.0;
    const double v = window_1d(t, 0.6);
    EXPECT_GE(v, prev);
    EXPECT_NEAR(v, window_1d(1.0 - t, 0.6), 1e-15);
    prev = v;
  }
}

TEST(Window, DerivativeMatchesFiniteDifferences) {
  const double eps = 1e-7;
  for (double t : {0.01, 0.05, 0.1, 0.17, 0.83, 0.95}) {
    double d = 0.0;
    window_1d(t, 0.6, &d);
    EXPECT_NEAR(d, (window_1d(t + eps, 0.6) - window_1d(t - eps, 0.6)) / (2 * eps), 1e-5 * (1 + std::abs(d)));
  }
  const FilterBox box{0.2, -0.1, 0.3};
  const Point2 x{0.23, 0.18};
  Point2 g;
  window_value(box, 0.6, x, &g);
  EXPECT_NEAR(g.x, (window_value(box, 0.6, {x.x + eps, x.y}) - window_value(box, 0.6, {x.x - eps, x.y})) / (2 * eps),
              1e-5 * (1 + std::abs(g.x)));
  EXPECT_NEAR(g.y, (window_value(box, 0.6, {x.x, x.y + eps}) - window_value(box, 0.6, {x.x, x.y - eps})) / (2 * eps),
              1e-5 * (1 + std::abs(g.y)));
}

TEST(Sampling, GridSize) {
  EXPECT_EQ(grid_size(0.3, 1.0 / (20 * 50)), 300);
  EXPECT_EQ(grid_size(0.6, 2 * pi / (200 * 10)), 191);
  EXPECT_THROW(grid_size(0.3, 0.05), std::invalid_argument);
  EXPECT_THROW(grid_size(0.3, 0.0), std::invalid_argument);
}

TEST(Sampling, OnesWithoutWindow) {
  const SampleGrid g = sample_on_grid([](const Point2&) { return C(1); }, FilterBox{0, 0, 0.3}, 0.01);
  EXPECT_EQ(g.N, 30);
  EXPECT_EQ((g.values.array() - C(1)).matrix().norm(), 0.0);
  EXPECT_EQ(g.point(3, 4).x, 0.03);
}

TEST(Sampling, FiniteElementPlaneWave) {
  const double k = 10.0;
  auto mesh = std::make_shared<const Mesh>(build_uniform_rect_mesh({0, 0, 1, 1}, 1.0 / (4 * k)));
  const FemField f = interpolate(build_fem_space(mesh, 2), plane(k, 0));
  const FilterBox box{0.2, 0.2, 0.6};
  const SampleGrid g = sample_on_grid(f, box, 0.006);
  double worst = 0.0;
  for (int n = 0; n < g.N; ++n)
    for (int m = 0; m < g.N; ++m) worst = std::max(worst, std::abs(g.values(m, n) - plane(k, 0)(g.point(m, n))));
  EXPECT_LE(worst, 0.02);
}

TEST(Sampling, OutsideMeshNamesPoint) {
  auto mesh = std::make_shared<const Mesh>(build_uniform_rect_mesh({0, 0, 1, 1}, 0.1));
  const FemField f = interpolate(build_fem_space(mesh, 1), plane(1, 0));
  try {
    sample_on_grid(f, FilterBox{0.8, 0.8, 0.3}, 0.01);
    FAIL() << "expected OutOfDomainError";
  } catch (const OutOfDomainError& e) {
    EXPECT_NE(std::string(e.what()).find("("), std::string::npos);
  }
}

TEST(Dft, ConstantGrid) {
  SampleGrid g;
  g.N = 16;
  g.delta = 0.1;
  g.values = Eigen::MatrixXcd::Constant(16, 16, C(2, -1));
  const SpectralDecomposition s = dft2(g);
  EXPECT_NEAR(std::abs(s.vhat(0, 0) - 256.0 * C(2, -1)), 0.0, 1e-11);
  EXPECT_NEAR(s.vhat.norm(), std::abs(s.vhat(0, 0)), 1e-10);
}

TEST(Dft, SingleModeConcentrated) {
  const int N = 24;
  SampleGrid g;
  g.N = N;
  g.delta = 0.1;
  g.values.resize(N, N);
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < N; ++m) g.values(m, n) = std::polar(1.0, 2 * pi * 3 * m / N);
  const SpectralDecomposition s = dft2(g);
  EXPECT_NEAR(std::abs(s.vhat(3, 0)), N * N, 1e-9);
  EXPECT_NEAR(std::sqrt(s.vhat.squaredNorm() - std::norm(s.vhat(3, 0))), 0.0, 1e-9);
}

TEST(Dft, ParsevalAndRoundTrip) {
  for (int N : {8, 37, 64, 100}) {
    const SampleGrid g = random_grid(N, N);
    for (DftMethod m : {DftMethod::fft, DftMethod::naive}) {
      const SpectralDecomposition s = dft2(g, m);
      EXPECT_NEAR(g.values.squaredNorm(), s.vhat.squaredNorm() / (double(N) * N), 1e-10 * g.values.squaredNorm());
      EXPECT_LE((inverse_dft2(s.vhat, m) - g.values).norm(), 1e-10 * g.values.norm());
    }
  }
}

TEST(Dft, FastMatchesNaive) {
  for (int N : {9, 30, 51}) {
    const SampleGrid g = random_grid(N, 100 + N);
    const Eigen::MatrixXcd a = dft2(g, DftMethod::fft).vhat, b = dft2(g, DftMethod::naive).vhat;
    EXPECT_LE((a - b).cwiseAbs().maxCoeff(), 1e-10 * b.cwiseAbs().maxCoeff());
  }
}

TEST(Dft, FrequencyAxis) {
  SpectralDecomposition s;
  s.N = 10;
  s.delta = 0.5;
  EXPECT_NEAR(s.kappa(2), 2 * pi / 0.5 * 0.2, 1e-15);
  EXPECT_NEAR(s.folded_kappa(8), -2 * pi / 0.5 * 0.2, 1e-14);
  EXPECT_NEAR(s.folded_kappa(5), pi / 0.5, 1e-14);
}

TEST(Lowpass, MaskSymmetricWithExpectedCutoff) {
  bool clipped = true;
  const auto mask = lowpass_mask(300, 1e-3, 50.0, 2.0, &clipped);
  EXPECT_FALSE(clipped);
  int ones = 0;
  for (int m = 0; m < 300; ++m) {
    EXPECT_TRUE(mask[m] == 0 || mask[m] == 1);
    if (m > 0) EXPECT_EQ(mask[m], mask[300 - m]);
    ones += mask[m];
  }
  // kappa_m <= 100 iff m <= 4.77
  EXPECT_EQ(ones, 9);
  EXPECT_EQ(mask[4], 1);
  EXPECT_EQ(mask[5], 0);
}

TEST(Lowpass, NyquistClippingPassesEverything) {
  bool clipped = false;
  const auto mask = lowpass_mask(20, 0.1, 20.0, 2.0, &clipped);
  EXPECT_TRUE(clipped);
  for (int v : mask) EXPECT_EQ(v, 1);
}

TEST(Lowpass, EnergySplitAndParsevalRho) {
  for (unsigned seed : {1u, 2u, 3u}) {
    const SampleGrid g = random_grid(40, seed);
    const SpectralDecomposition s = dft2(g);
    const LowpassSplit sp = lowpass_split(s, 30.0 + 20.0 * seed, 2.0);
    EXPECT_LE((sp.low + sp.high - g.values).norm(), 1e-12 * g.values.norm());
    EXPECT_NEAR(g.values.squaredNorm(), sp.low.squaredNorm() + sp.high.squaredNorm(), 1e-10 * g.values.squaredNorm());
    const double r = rho(g, sp);
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
    EXPECT_NEAR(r * r, rho_parseval_ratio(s, sp.mask), 1e-10);
  }
}

TEST(Lowpass, NaiveReconstructionMatchesFast) {
  const SampleGrid g = random_grid(33, 9);
  const SpectralDecomposition s = dft2(g);
  const LowpassSplit a = lowpass_split(s, 40.0, 2.0, DftMethod::fft);
  const LowpassSplit b = lowpass_split(s, 40.0, 2.0, DftMethod::naive);
  EXPECT_LE((a.low - b.low).norm(), 1e-10 * b.low.norm());
}

TEST(Lowpass, RhoRangeOnRandomSignals) {
  std::mt19937 rng(77);
  std::uniform_real_distribution<double> k(1.0, 400.0);
  for (int trial = 0; trial < 20; ++trial) {
    const SampleGrid g = random_grid(16 + trial, 500 + trial);
    const double r = rho(g, lowpass_split(dft2(g), k(rng)));
    EXPECT_GE(r, 0.0);
    EXPECT_LE(r, 1.0);
  }
}

TEST(Lowpass, ConstantFieldHasNoHighPart) {
  const SampleGrid g = sample_on_grid([](const Point2&) { return C(3, 1); }, FilterBox{0.4, 0.1, 0.3}, 1e-3);
  const LowpassSplit sp = lowpass_split(dft2(g), 50.0);
  EXPECT_LE(sp.high.norm(), 1e-10 * g.values.norm());
  EXPECT_LE(rho(g, sp), 1e-12);
}

TEST(Lowpass, RhoLimits) {
  const SampleGrid g = random_grid(12, 5);
  LowpassSplit keep;
  keep.low = g.values;
  EXPECT_EQ(rho(g, keep), 0.0);
  LowpassSplit block;
  block.low = Eigen::MatrixXcd::Zero(12, 12);
  EXPECT_EQ(rho(g, block), 1.0);
  SampleGrid z = g;
  z.values.setZero();
  EXPECT_THROW(rho(z, keep), std::invalid_argument);
}

TEST(Lowpass, SeparatedGridModesRecovered) {
  // Both modes are periodic on the grid, so only the mask acts.
  const int N = 200;
  const double delta = 1e-3, side = N * delta, k = 50.0;
  const double k_low = 2 * pi * 3 / side, k_high = 2 * pi * 40 / side;  // 94 and 1257
  const FilterBox box{0.37, -0.21, side};
  const auto low_mode = plane(k_low, 0.0);
  const auto high_mode = plane(0.0, -k_high);
  const SampleGrid g = sample_on_grid([&](const Point2& x) { return low_mode(x) + 0.5 * high_mode(x); }, box, delta);
  const LowpassSplit sp = lowpass_split(dft2(g), k, 2.0);
  double err = 0.0;
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < N; ++m) {
      err = std::max(err, std::abs(sp.low(m, n) - low_mode(g.point(m, n))));
      err = std::max(err, std::abs(sp.high(m, n) - 0.5 * high_mode(g.point(m, n))));
    }
  EXPECT_LE(err, 1e-8);
}

TEST(Lowpass, WindowedSingleModeClassification) {
  const double k = 50.0, delta = 1.0 / (20 * k);
  const FilterBox box{0.7, -0.15, 0.3};
  EXPECT_GE(density_rho(plane(3 * k, 0), k, box, delta, true), 0.9);
  EXPECT_LE(density_rho(plane(k, 0), k, box, delta, true), 0.1);
  EXPECT_LE(density_rho(plane(k * std::cos(1.0), k * std::sin(1.0)), k, box, delta, true), 0.1);
}

TEST(SpectralH1k, GridModeNorm) {
  const int N = 100;
  const double delta = 0.003, side = N * delta, k = 20.0;
  const double kap = 2 * pi * 7 / side;  // ~146.6 > 2k
  const SampleGrid g = sample_on_grid(plane(-kap, 0), FilterBox{0, 0, side}, delta);
  const SpectralDecomposition s = dft2(g);
  const SpectralH1kSplit e = spectral_h1k_split(s, lowpass_mask(N, delta, k, 2.0), k);
  const double expected = side * std::sqrt(1 + kap * kap / (k * k));
  EXPECT_NEAR(e.total, expected, 1e-10 * expected);
  EXPECT_NEAR(e.high, expected, 1e-10 * expected);
  EXPECT_LE(e.low, 1e-10 * expected);
}

TEST(DeflatedSplit, PropagatingWaveCountedAsLow) {
  const double k = 40.0, delta = 2 * pi / (200 * k);
  const FilterBox box{0.2, 0.2, 0.6};
  const double phi = 0.123;
  const auto f = [&](const Point2& x) {
    const C u = std::polar(1.0, k * (std::cos(phi) * x.x + std::sin(phi) * x.y));
    return ValueGradient{u, {C(0, k * std::cos(phi)) * u, C(0, k * std::sin(phi)) * u}};
  };
  const DeflatedSplit d = deflated_split(sample_with_gradient(f, box, delta), k, 2.0, 0.6);
  EXPECT_LE(d.high, 0.02 * d.total);
  EXPECT_NEAR(d.low, d.total, 0.03 * d.total);
  EXPECT_GT(d.rank, 0);
}

TEST(DeflatedSplit, EvanescentScaleCountedAsHigh) {
  const double k = 40.0, delta = 2 * pi / (200 * k);
  const FilterBox box{0.2, 0.2, 0.6};
  const double kap = 5 * k;
  const auto f = [&](const Point2& x) {
    const C u = std::polar(1.0, kap * x.y);
    return ValueGradient{u, {C(0), C(0, kap) * u}};
  };
  const DeflatedSplit d = deflated_split(sample_with_gradient(f, box, delta), k, 2.0, 0.6);
  EXPECT_GE(d.high, 0.95 * d.total);
  EXPECT_LE(d.fitted, 0.05 * d.total);
  EXPECT_NEAR(d.low, std::hypot(d.fitted, d.residual_low), 1e-12 * d.total);
}

TEST(GridCsv, RoundTrip) {
  const SampleGrid g = sample_on_grid(plane(3, 1), FilterBox{-0.15, 0.2, 0.3}, 0.01);
  std::stringstream s;
  write_grid_csv(s, g);
  const SampleGrid r = read_grid_csv(s);
  EXPECT_EQ(r.N, g.N);
  EXPECT_NEAR(r.delta, g.delta, 1e-15);
  EXPECT_NEAR(r.x0, g.x0, 1e-15);
  EXPECT_NEAR(r.y0, g.y0, 1e-15);
  EXPECT_LE((r.values - g.values).norm(), 1e-14 * g.values.norm());
}

TEST(SpectrumCsv, HeaderAndRowCount) {
  const SampleGrid g = random_grid(9, 3);
  std::stringstream s;
  write_spectrum_csv(s, dft2(g));
  std::string line;
  std::getline(s, line);
  EXPECT_EQ(line, "mhat,nhat,abs");
  int rows = 0;
  while (std::getline(s, line)) ++rows;
  EXPECT_EQ(rows, 81);
}
