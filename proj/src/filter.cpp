#include "helmfem/filter.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <mutex>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <fftw3.h>

namespace helmfem {

namespace {

constexpr double two_pi = 2.0 * std::numbers::pi;

// Smooth step from 0 at tau <= 0 to 1 at tau >= 1:
// (1 + erf((tau - 1/2) / sqrt(tau (1 - tau)))) / 2, flat to all orders at both ends.
double smooth_step(double tau, double* derivative) {
  if (tau <= 0.0 || tau >= 1.0) {
    if (derivative) *derivative = 0.0;
    return tau <= 0.0 ? 0.0 : 1.0;
  }
  const double q = tau * (1.0 - tau);
  const double z = (tau - 0.5) / std::sqrt(q);
  if (derivative) *derivative = std::exp(-z * z) / (4.0 * std::sqrt(std::numbers::pi) * q * std::sqrt(q));
  return 0.5 * (1.0 + std::erf(z));
}

std::mutex fftw_mutex;

Eigen::MatrixXcd fft2(const Eigen::MatrixXcd& in, int sign) {
  const int n = static_cast<int>(in.rows());
  Eigen::MatrixXcd out(n, n);
  Eigen::MatrixXcd work = in;
  fftw_plan plan;
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    plan = fftw_plan_dft_2d(n, n, reinterpret_cast<fftw_complex*>(work.data()),
                            reinterpret_cast<fftw_complex*>(out.data()), sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard<std::mutex> lock(fftw_mutex);
    fftw_destroy_plan(plan);
  }
  return out;
}

// Separable sum out(a, b) = sum_{m,n} in(m, n) e^{sign 2 pi i (a m + b n)/N}.
Eigen::MatrixXcd naive_dft2(const Eigen::MatrixXcd& in, int sign) {
  const int n = static_cast<int>(in.rows());
  Eigen::MatrixXcd f(n, n);
  for (int a = 0; a < n; ++a)
    for (int m = 0; m < n; ++m) f(a, m) = std::polar(1.0, sign * two_pi * ((long)a * m % n) / n);
  return f * in * f.transpose();
}

}  // namespace

double window_1d(double t, double flat_fraction, double* derivative) {
  const double ramp = 0.5 * (1.0 - flat_fraction);
  if (t <= 0.0 || t >= 1.0) {
    if (derivative) *derivative = 0.0;
    return 0.0;
  }
  if (t < ramp) {
    double d = 0.0;
    const double v = smooth_step(t / ramp, derivative ? &d : nullptr);
    if (derivative) *derivative = d / ramp;
    return v;
  }
  if (t > 1.0 - ramp) {
    double d = 0.0;
    const double v = smooth_step((1.0 - t) / ramp, derivative ? &d : nullptr);
    if (derivative) *derivative = -d / ramp;
    return v;
  }
  if (derivative) *derivative = 0.0;
  return 1.0;
}

double window_value(const FilterBox& box, double flat_fraction, const Point2& pt, Point2* gradient) {
  double dx = 0.0, dy = 0.0;
  const double wx = window_1d((pt.x - box.x0) / box.side, flat_fraction, gradient ? &dx : nullptr);
  const double wy = window_1d((pt.y - box.y0) / box.side, flat_fraction, gradient ? &dy : nullptr);
  if (gradient) *gradient = {dx * wy / box.side, wx * dy / box.side};
  return wx * wy;
}

int grid_size(double side, double delta) {
  if (!(side > 0.0 && delta > 0.0)) throw std::invalid_argument("filter: side and delta must be positive");
  const int n = static_cast<int>(std::lround(side / delta));
  if (n < 8) throw std::invalid_argument("filter: grid needs at least 8 samples per side");
  return n;
}

SampleGrid sample_on_grid(const std::function<cplx(const Point2&)>& f, const FilterBox& box,
                          double delta, const WindowSpec& window) {
  SampleGrid g;
  g.x0 = box.x0;
  g.y0 = box.y0;
  g.delta = delta;
  g.N = grid_size(box.side, delta);
  g.values.resize(g.N, g.N);
  // The window lives on the sampled extent N * delta.
  const FilterBox wbox{box.x0, box.y0, g.N * delta};
  for (int n = 0; n < g.N; ++n)
    for (int m = 0; m < g.N; ++m) {
      const Point2 x = g.point(m, n);
      const double w = window.enabled ? window_value(wbox, window.flat_fraction, x) : 1.0;
      g.values(m, n) = w == 0.0 ? cplx(0.0) : w * f(x);
    }
  return g;
}

SampleGrid sample_on_grid(const FemField& field, const FilterBox& box, double delta,
                          const WindowSpec& window) {
  // Grid points are located even where the window vanishes so that a box
  // leaving the mesh is always reported.
  const int n = grid_size(box.side, delta);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const Point2 x{box.x0 + i * delta, box.y0 + j * delta};
      if (field.space->locator().locate(x).triangle < 0) {
        std::ostringstream msg;
        msg << std::setprecision(17) << "filter: grid point (" << x.x << ", " << x.y
            << ") is outside the mesh";
        throw OutOfDomainError(msg.str());
      }
    }
  return sample_on_grid([&](const Point2& x) { return evaluate_field(field, x); }, box, delta, window);
}

double SpectralDecomposition::kappa(int m) const { return two_pi / delta * m / N; }

double SpectralDecomposition::folded_kappa(int m) const {
  return 2 * m <= N ? kappa(m) : kappa(m) - two_pi / delta;
}

SpectralDecomposition dft2(const SampleGrid& grid, DftMethod method) {
  SpectralDecomposition s;
  s.N = grid.N;
  s.delta = grid.delta;
  s.x0 = grid.x0;
  s.y0 = grid.y0;
  s.vhat = method == DftMethod::fft ? fft2(grid.values, FFTW_FORWARD) : naive_dft2(grid.values, -1);
  return s;
}

Eigen::MatrixXcd inverse_dft2(const Eigen::MatrixXcd& vhat, DftMethod method) {
  const double n2 = static_cast<double>(vhat.rows()) * vhat.rows();
  const Eigen::MatrixXcd out =
      method == DftMethod::fft ? fft2(vhat, FFTW_BACKWARD) : naive_dft2(vhat, 1);
  return out / n2;
}

std::vector<int> lowpass_mask(int N, double delta, double k, double alpha, bool* clipped) {
  if (!(alpha > 0.0)) throw std::invalid_argument("filter: alpha must be positive");
  const double cutoff = alpha * k;
  const bool clip = cutoff >= std::numbers::pi / delta;
  if (clipped) *clipped = clip;
  std::vector<int> mask(N, 1);
  if (clip) return mask;
  const double period = two_pi / delta;
  for (int m = 0; m < N; ++m) {
    const double kap = period * m / N;
    mask[m] = (kap <= cutoff || period - kap <= cutoff) ? 1 : 0;
  }
  return mask;
}

LowpassSplit lowpass_split(const SpectralDecomposition& spec, double k, double alpha,
                           DftMethod method) {
  LowpassSplit out;
  out.alpha = alpha;
  const int N = spec.N;
  out.mask = lowpass_mask(N, spec.delta, k, alpha, &out.nyquist_clipped);
  if (method == DftMethod::fft) {
    Eigen::MatrixXcd masked = spec.vhat;
    for (int nh = 0; nh < N; ++nh)
      for (int mh = 0; mh < N; ++mh)
        if (!(out.mask[mh] && out.mask[nh])) masked(mh, nh) = 0.0;
    out.low = inverse_dft2(masked, DftMethod::fft);
  } else {
    // W = vhat e^{-i (kappa_mh x0 + kappa_nh y0)}; low(m, n) = N^-2 sum H H W e^{i kappa x_m} e^{i kappa y_n}.
    Eigen::MatrixXcd ex(N, N), ey(N, N);
    for (int m = 0; m < N; ++m)
      for (int mh = 0; mh < N; ++mh) {
        const double kap = spec.kappa(mh);
        ex(m, mh) = out.mask[mh] ? std::polar(1.0, kap * (spec.x0 + m * spec.delta)) : cplx(0.0);
        ey(m, mh) = out.mask[mh] ? std::polar(1.0, kap * (spec.y0 + m * spec.delta)) : cplx(0.0);
      }
    Eigen::MatrixXcd w(N, N);
    for (int nh = 0; nh < N; ++nh)
      for (int mh = 0; mh < N; ++mh)
        w(mh, nh) = spec.vhat(mh, nh) *
                    std::polar(1.0, -(spec.kappa(mh) * spec.x0 + spec.kappa(nh) * spec.y0));
    out.low = ex * w * ey.transpose() / (static_cast<double>(N) * N);
  }
  out.high = inverse_dft2(spec.vhat, method) - out.low;
  return out;
}

double rho(const SampleGrid& grid, const LowpassSplit& split) {
  const double v = grid.values.norm();
  if (v == 0.0) throw std::invalid_argument("filter: rho of a zero signal");
  return (grid.values - split.low).norm() / v;
}

double rho_parseval_ratio(const SpectralDecomposition& spec, const std::vector<int>& mask) {
  double num = 0.0, den = 0.0;
  for (int nh = 0; nh < spec.N; ++nh)
    for (int mh = 0; mh < spec.N; ++mh) {
      const double hh = mask[mh] * mask[nh];
      const double a = std::norm(spec.vhat(mh, nh));
      num += (1.0 - hh) * (1.0 - hh) * a;
      den += a;
    }
  if (den == 0.0) throw std::invalid_argument("filter: rho of a zero signal");
  return num / den;
}

SpectralH1kSplit spectral_h1k_split(const SpectralDecomposition& spec, const std::vector<int>& mask,
                                    double k) {
  double low = 0.0, high = 0.0;
  for (int nh = 0; nh < spec.N; ++nh) {
    const double ky = spec.folded_kappa(nh);
    for (int mh = 0; mh < spec.N; ++mh) {
      const double kx = spec.folded_kappa(mh);
      const double w = (1.0 + (kx * kx + ky * ky) / (k * k)) * std::norm(spec.vhat(mh, nh));
      (mask[mh] && mask[nh] ? low : high) += w;
    }
  }
  const double scale = spec.delta * spec.delta / (static_cast<double>(spec.N) * spec.N);
  SpectralH1kSplit out;
  out.low = std::sqrt(scale * low);
  out.high = std::sqrt(scale * high);
  out.total = std::sqrt(scale * (low + high));
  return out;
}

SampledGradientField sample_with_gradient(const std::function<ValueGradient(const Point2&)>& f,
                                          const FilterBox& box, double delta) {
  SampledGradientField out;
  SampleGrid& g = out.value;
  g.x0 = box.x0;
  g.y0 = box.y0;
  g.delta = delta;
  g.N = grid_size(box.side, delta);
  g.values.resize(g.N, g.N);
  out.dx.resize(g.N, g.N);
  out.dy.resize(g.N, g.N);
  for (int n = 0; n < g.N; ++n)
    for (int m = 0; m < g.N; ++m) {
      const ValueGradient v = f(g.point(m, n));
      g.values(m, n) = v.value;
      out.dx(m, n) = v.grad[0];
      out.dy(m, n) = v.grad[1];
    }
  return out;
}

namespace {

// Grid H^1_k energy delta^2 sum (|w|^2 + |grad w|^2 / k^2).
double grid_energy(const Eigen::MatrixXcd& v, const Eigen::MatrixXcd& dx, const Eigen::MatrixXcd& dy,
                   double delta, double k) {
  return delta * delta * (v.squaredNorm() + (dx.squaredNorm() + dy.squaredNorm()) / (k * k));
}

}  // namespace

DeflatedSplit deflated_split(const SampledGradientField& field, double k, double alpha,
                             double flat_fraction, int directions, double eig_tol) {
  const SampleGrid& g = field.value;
  const int N = g.N;
  const double side = N * g.delta;
  if (directions <= 0) directions = 2 * static_cast<int>(std::ceil(k * side)) + 16;
  const int M = directions;

  // Separable window and its derivative on both axes (same grid in x and y).
  Eigen::VectorXd w(N), dw(N);
  for (int m = 0; m < N; ++m) {
    double d = 0.0;
    w[m] = window_1d(m * g.delta / side, flat_fraction, &d);
    dw[m] = d / side;
  }
  const Eigen::VectorXd w2 = w.cwiseProduct(w);

  // Plane waves e^{i k (cos phi x + sin phi y)} in coordinates centred on the box.
  const double c0 = 0.5 * (N - 1) * g.delta;
  Eigen::MatrixXcd ex(N, M), ey(N, M);
  Eigen::VectorXd cx(M), sy(M);
  for (int j = 0; j < M; ++j) {
    const double phi = two_pi * j / M;
    cx[j] = std::cos(phi);
    sy[j] = std::sin(phi);
    for (int m = 0; m < N; ++m) {
      const double s = m * g.delta - c0;
      ex(m, j) = std::polar(1.0, k * cx[j] * s);
      ey(m, j) = std::polar(1.0, k * sy[j] * s);
    }
  }
  const Eigen::MatrixXcd gx = ex.adjoint() * w2.asDiagonal() * ex;
  const Eigen::MatrixXcd gy = ey.adjoint() * w2.asDiagonal() * ey;
  const Eigen::MatrixXcd G = gx.cwiseProduct(gy);
  // rhs_j = sum_{m,n} w2_m w2_n conj(ex_mj ey_nj) V_mn
  const Eigen::MatrixXcd t = ex.adjoint() * w2.asDiagonal() * g.values * w2.asDiagonal() * ey.conjugate();
  const Eigen::VectorXcd rhs = t.diagonal();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(G);
  const Eigen::VectorXd& lam = eig.eigenvalues();
  const double cut = eig_tol * lam.maxCoeff();
  Eigen::VectorXcd coef = Eigen::VectorXcd::Zero(M);
  DeflatedSplit out;
  for (int j = 0; j < M; ++j)
    if (lam[j] > cut) {
      const Eigen::VectorXcd u = eig.eigenvectors().col(j);
      coef += u * (u.dot(rhs) / lam[j]);
      ++out.rank;
    }

  // Fit and its gradient on the grid: F = ex diag(c) ey^T.
  const Eigen::MatrixXcd F = ex * coef.asDiagonal() * ey.transpose();
  const cplx ik(0.0, k);
  const Eigen::MatrixXcd Fx = ex * (ik * coef.cwiseProduct(cx.cast<cplx>())).asDiagonal() * ey.transpose();
  const Eigen::MatrixXcd Fy = ex * (ik * coef.cwiseProduct(sy.cast<cplx>())).asDiagonal() * ey.transpose();

  // chi f and grad(chi f) = grad(chi) f + chi grad f.
  auto windowed = [&](const Eigen::MatrixXcd& v, const Eigen::MatrixXcd& vx, const Eigen::MatrixXcd& vy,
                      Eigen::MatrixXcd& cv, Eigen::MatrixXcd& cvx, Eigen::MatrixXcd& cvy) {
    cv.resize(N, N);
    cvx.resize(N, N);
    cvy.resize(N, N);
    for (int n = 0; n < N; ++n)
      for (int m = 0; m < N; ++m) {
        const double chi = w[m] * w[n];
        cv(m, n) = chi * v(m, n);
        cvx(m, n) = dw[m] * w[n] * v(m, n) + chi * vx(m, n);
        cvy(m, n) = w[m] * dw[n] * v(m, n) + chi * vy(m, n);
      }
  };
  Eigen::MatrixXcd a, ax, ay;
  windowed(g.values, field.dx, field.dy, a, ax, ay);
  out.total = std::sqrt(grid_energy(a, ax, ay, g.delta, k));
  windowed(F, Fx, Fy, a, ax, ay);
  out.fitted = std::sqrt(grid_energy(a, ax, ay, g.delta, k));

  SampleGrid residual = g;
  for (int n = 0; n < N; ++n)
    for (int m = 0; m < N; ++m) residual.values(m, n) = w[m] * w[n] * (g.values(m, n) - F(m, n));
  const SpectralDecomposition spec = dft2(residual);
  const SpectralH1kSplit r = spectral_h1k_split(spec, lowpass_mask(N, g.delta, k, alpha), k);
  out.residual_low = r.low;
  out.low = std::hypot(out.fitted, r.low);
  out.high = r.high;
  return out;
}

void write_grid_csv(std::ostream& out, const SampleGrid& grid) {
  out << "m,n,x,y,re,im\n" << std::setprecision(17);
  for (int n = 0; n < grid.N; ++n)
    for (int m = 0; m < grid.N; ++m) {
      const Point2 x = grid.point(m, n);
      const cplx v = grid.values(m, n);
      out << m << ',' << n << ',' << x.x << ',' << x.y << ',' << v.real() << ',' << v.imag() << '\n';
    }
}

void write_grid_csv_file(const std::string& path, const SampleGrid& grid) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_grid_csv(out, grid);
}

SampleGrid read_grid_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("grid csv: empty input");
  struct Row {
    int m, n;
    double x, y, re, im;
  };
  std::vector<Row> rows;
  int nmax = -1;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    for (char& c : line)
      if (c == ',') c = ' ';
    std::istringstream ss(line);
    Row r;
    if (!(ss >> r.m >> r.n >> r.x >> r.y >> r.re >> r.im)) throw std::runtime_error("grid csv: bad row: " + line);
    nmax = std::max({nmax, r.m, r.n});
    rows.push_back(r);
  }
  SampleGrid g;
  g.N = nmax + 1;
  if (static_cast<long>(rows.size()) != static_cast<long>(g.N) * g.N)
    throw std::runtime_error("grid csv: expected a full N x N grid");
  g.values.resize(g.N, g.N);
  double x1 = 0.0;
  for (const auto& r : rows) {
    g.values(r.m, r.n) = cplx(r.re, r.im);
    if (r.m == 0 && r.n == 0) {
      g.x0 = r.x;
      g.y0 = r.y;
    }
    if (r.m == g.N - 1 && r.n == 0) x1 = r.x;
  }
  g.delta = g.N > 1 ? (x1 - g.x0) / (g.N - 1) : 1.0;
  return g;
}

void write_spectrum_csv(std::ostream& out, const SpectralDecomposition& spec) {
  out << "mhat,nhat,abs\n" << std::setprecision(17);
  for (int nh = 0; nh < spec.N; ++nh)
    for (int mh = 0; mh < spec.N; ++mh) out << mh << ',' << nh << ',' << std::abs(spec.vhat(mh, nh)) << '\n';
}

}  // namespace helmfem
