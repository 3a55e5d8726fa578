#pragma once

#include <complex>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "helmfem/fespace.hpp"

namespace helmfem {

/// Square sampling box with lower-left corner (x0, y0).
struct FilterBox {
  double x0 = 0.0;
  double y0 = 0.0;
  double side = 0.3;
};

/// Tensor-product smooth cutoff equal to 1 on the central `flat_fraction`
/// of the box in each direction and decaying to 0 at the box boundary.
struct WindowSpec {
  bool enabled = false;
  double flat_fraction = 0.6;
};

/// 1D profile on t in [0, 1]; optional derivative in t.
double window_1d(double t, double flat_fraction, double* derivative = nullptr);
/// Window value at a physical point; optional physical gradient.
double window_value(const FilterBox& box, double flat_fraction, const Point2& pt,
                    Point2* gradient = nullptr);

/// V(m, n) = v(x0 + m delta, y0 + n delta), 0 <= m, n < N.
struct SampleGrid {
  double x0 = 0.0;
  double y0 = 0.0;
  double delta = 1.0;
  int N = 0;
  Eigen::MatrixXcd values;

  Point2 point(int m, int n) const { return {x0 + m * delta, y0 + n * delta}; }
};

/// N = round(side / delta); throws std::invalid_argument when N < 8.
int grid_size(double side, double delta);

SampleGrid sample_on_grid(const std::function<cplx(const Point2&)>& f, const FilterBox& box,
                          double delta, const WindowSpec& window = {});
/// Throws OutOfDomainError naming the first grid point outside the mesh.
SampleGrid sample_on_grid(const FemField& field, const FilterBox& box, double delta,
                          const WindowSpec& window = {});

enum class DftMethod { fft, naive };

/// vhat(mh, nh) = sum_{m,n} V(m, n) exp(-2 pi i (mh m + nh n) / N).
struct SpectralDecomposition {
  int N = 0;
  double delta = 1.0;
  double x0 = 0.0;
  double y0 = 0.0;
  Eigen::MatrixXcd vhat;

  /// kappa_m = (2 pi / delta) (m / N).
  double kappa(int m) const;
  /// Signed frequency folded into (-pi/delta, pi/delta].
  double folded_kappa(int m) const;
};

SpectralDecomposition dft2(const SampleGrid& grid, DftMethod method = DftMethod::fft);
/// Inverse of dft2 (including the 1/N^2 factor).
Eigen::MatrixXcd inverse_dft2(const Eigen::MatrixXcd& vhat, DftMethod method = DftMethod::fft);

struct LowpassSplit {
  double alpha = 2.0;
  std::vector<int> mask;  // H_m in {0, 1}, symmetric under m -> N - m
  Eigen::MatrixXcd low;   // reconstruction from the masked spectrum
  Eigen::MatrixXcd high;  // V - low
  bool nyquist_clipped = false;  // alpha k >= pi / delta: everything passes
};

/// H_m = 1 iff kappa_m <= alpha k or 2 pi / delta - kappa_m <= alpha k.
std::vector<int> lowpass_mask(int N, double delta, double k, double alpha, bool* clipped = nullptr);

/// Low part by the phase-corrected sum over W = vhat exp(-i (kappa x0 + kappa y0));
/// the naive method evaluates that sum directly, the fft method uses the
/// equivalent inverse transform of the masked spectrum.
LowpassSplit lowpass_split(const SpectralDecomposition& spec, double k, double alpha = 2.0,
                           DftMethod method = DftMethod::fft);

/// rho = ||V - low||_l2 / ||V||_l2. Throws std::invalid_argument for zero V.
double rho(const SampleGrid& grid, const LowpassSplit& split);
/// sum (1 - H H)^2 |vhat|^2 / sum |vhat|^2, equal to rho^2 for 0/1 masks.
double rho_parseval_ratio(const SpectralDecomposition& spec, const std::vector<int>& mask);

/// Continuous H^1_k norm of the sampled (periodic) signal split by the mask:
/// ||v||^2 ~ (delta^2 / N^2) sum (1 + |kappa|^2 / k^2) |vhat|^2.
struct SpectralH1kSplit {
  double low = 0.0;
  double high = 0.0;
  double total = 0.0;
};

SpectralH1kSplit spectral_h1k_split(const SpectralDecomposition& spec,
                                    const std::vector<int>& mask, double k);

/// Samples of a function and its gradient on the box grid, no window.
struct SampledGradientField {
  SampleGrid value;
  Eigen::MatrixXcd dx;
  Eigen::MatrixXcd dy;
};

SampledGradientField sample_with_gradient(const std::function<ValueGradient(const Point2&)>& f,
                                          const FilterBox& box, double delta);

/// H^1_k split of chi v after deflation: the propagating part of v (plane
/// waves with |kappa| = k on `directions` equispaced angles, fitted by
/// least squares weighted with chi^2) is counted as low frequency, and the
/// windowed residual is split by the DFT mask. The fit and the windowed
/// residual are l2-orthogonal, so low^2 = fitted^2 + residual_low^2.
struct DeflatedSplit {
  double low = 0.0;
  double high = 0.0;
  double total = 0.0;     // grid H^1_k norm of chi v
  double fitted = 0.0;    // grid H^1_k norm of chi times the fit
  double residual_low = 0.0;
  int rank = 0;
};

DeflatedSplit deflated_split(const SampledGradientField& field, double k, double alpha,
                             double flat_fraction, int directions = 0, double eig_tol = 1e-10);

/// "m,n,x,y,re,im" rows with a header line.
void write_grid_csv(std::ostream& out, const SampleGrid& grid);
void write_grid_csv_file(const std::string& path, const SampleGrid& grid);
/// Reads the write_grid_csv format back; spacing and corner are recovered
/// from the coordinates.
SampleGrid read_grid_csv(std::istream& in);
/// "mhat,nhat,abs" rows with a header line.
void write_spectrum_csv(std::ostream& out, const SpectralDecomposition& spec);

}  // namespace helmfem
