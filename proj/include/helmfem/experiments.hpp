#pragma once

#include <string>
#include <utility>
#include <vector>

#include "helmfem/assembly.hpp"
#include "helmfem/config.hpp"
#include "helmfem/filter.hpp"
#include "helmfem/geometry.hpp"
#include "helmfem/norms.hpp"
#include "helmfem/solver.hpp"
#include "helmfem/sources.hpp"

namespace helmfem {

/// Least-squares slope of log(value) against log(k). Throws
/// std::invalid_argument for fewer than 3 pairs or nonpositive entries.
double fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs);

/// Solution of one discrete problem together with its solve diagnostics.
struct DiscreteSolution {
  FemField uh;
  LinearSolveReport report;
  double k_used = 0.0;  // differs from the requested k after a detuned retry
  bool detuned = false;
};

/// Impedance problem on a rectangle mesh with plane-wave data.
DiscreteSolution solve_plane_wave_impedance(std::shared_ptr<const Mesh> mesh, int p,
                                            const PlaneWave& pw);

/// Bump source problem on a disk mesh; obstacle edges are Dirichlet. For
/// pml the outer circle is Dirichlet as well. On a failed factorisation the
/// solve is retried once with k + 1e-6.
DiscreteSolution solve_bump_problem(std::shared_ptr<const Mesh> mesh, int p, double k,
                                    Truncation truncation, const PmlSpec& pml = {},
                                    const DtnSpec& dtn = {});

/// H^1_k norm of chi (uh - u) over the box, chi the filter window.
double windowed_error_h1k(const FemField& uh, const ExactFunction& u, const FilterBox& box,
                          double flat_fraction, double k);

struct BoxSpectrum {
  double rho = 0.0;
  SpectralH1kSplit h1k;
  bool nyquist_clipped = false;
  SampleGrid grid;
};

/// Samples chi f on the box grid and splits it at alpha k.
BoxSpectrum analyse_signal(const std::function<cplx(const Point2&)>& f, const FilterBox& box,
                           double delta, double k, double alpha, const WindowSpec& window);

/// Samples chi (u - uh) (or chi uh when u is empty) on the box grid and
/// splits it at alpha k.
BoxSpectrum analyse_box(const FemField& uh, const ExactFunction* u, const FilterBox& box,
                        double delta, double k, double alpha, const WindowSpec& window);

/// Deflated H^1_k split of chi (u - uh) on the box grid.
DeflatedSplit deflated_error_split(const FemField& uh, const ExactFunction& u, const FilterBox& box,
                                   double delta, double k, double alpha, double flat_fraction);

// Experiment 1: three meshes, error fields.

struct Experiment1Config {
  double k = 50.0;
  int p = 4;
  double theta = 0.0;
  PowerRule h1{1.78, -1.0};
  PowerRule h2{0.38, -1.0};
  int grid_nx = 600;
  int grid_ny = 300;
};

struct Experiment1Mesh {
  std::string name;  // coarse, fine, nonuniform
  double h1 = 0.0;
  double h2 = 0.0;
  int dofs = 0;
  ErrorNorms right;   // on [1.1, 2.1] x [0, 1]
  ErrorNorms global;
  double median_log_right = 0.0;  // median of log10(1e-12 + |Re(u - uh)|) on right-square grid points
  double local_qu_ratio = 0.0;
  LinearSolveReport solve;
  std::vector<double> grid;  // row-major grid_ny x grid_nx log10 levels
};

struct Experiment1Result {
  Experiment1Config config;
  std::vector<Experiment1Mesh> meshes;
  const Experiment1Mesh& find(const std::string& name) const;
};

Experiment1Config experiment1_config(const Config& cfg);
Experiment1Result run_experiment1(const Experiment1Config& config);
Config to_config(const Experiment1Config& config);
/// results.csv, grid_<mesh>.csv and meta.txt.
void write_experiment1(const Experiment1Result& result, const std::string& dir);

// Experiment 2: k sweep with frequency-split local errors.

struct Experiment2Config {
  std::vector<double> k_list{5, 10, 15, 20, 25, 30, 35, 40, 45, 50, 55, 60};
  int p = 2;
  double theta = 0.0;
  PowerRule h1{1.4142135623730951, -1.0};
  PowerRule h2{1.0, -1.5};
  FilterBox left{0.2, 0.2, 0.6};
  FilterBox right{1.3, 0.2, 0.6};
  double alpha = 2.0;
  PowerRule delta{0.031415926535897934, -1.0};  // 2 pi / (200 k)
  double window_flat = 0.6;
};

struct Experiment2Row {
  double k = 0.0;
  std::string box;
  double h1 = 0.0;
  double h2 = 0.0;
  int dofs = 0;
  double h1k_err = 0.0;
  double l2_err = 0.0;
  double h1k_windowed = 0.0;  // FE quadrature of chi (u - uh)
  double low = 0.0;           // deflated split of chi (u - uh)
  double high = 0.0;
  double split_total = 0.0;
  double fitted = 0.0;        // propagating part removed before the DFT
  double windowed_low = 0.0;  // plain DFT split of chi (u - uh)
  double windowed_high = 0.0;
  double spectral_total = 0.0;
  double rho = 0.0;
  double local_qu_ratio = 0.0;
  double residual = 0.0;
  double seconds = 0.0;
  bool ok = true;
  std::string message;
};

struct SweepSlopes {
  double left_total = 0.0, left_low = 0.0, left_high = 0.0;
  double right_total = 0.0, right_low = 0.0, right_high = 0.0;
  double k_from = 0.0;  // fits use k >= k_from
};

struct SweepResult {
  Experiment2Config config;
  std::vector<Experiment2Row> rows;
  SweepSlopes slopes;
};

Experiment2Config experiment2_config(const Config& cfg);
SweepResult run_experiment2(const Experiment2Config& config);
/// Slopes over the upper half of the k range, k >= (k_min + k_max) / 2.
SweepSlopes fit_sweep_slopes(const std::vector<Experiment2Row>& rows);
Config to_config(const Experiment2Config& config);
void write_experiment2(const SweepResult& result, const std::string& dir);

/// Geometry from mesh.* keys: mesh.geometry (rect_uniform, rect_two_region,
/// disk_with_obstacle), mesh.obstacle, mesh.extents, mesh.r_inner, mesh.r_outer,
/// mesh.r_pml and obstacle dimensions mesh.a, mesh.b, mesh.L, mesh.l1.
GeometrySpec geometry_config(const Config& cfg);

// Artificial source experiment on a disk with obstacles.

struct SourceConfig {
  ObstacleKind obstacle = ObstacleKind::none;
  double k = 50.0;
  bool auto_resonance = false;
  int resonance_n = 20;
  int p = 2;
  double hk = 1.0;
  PmlSpec pml;
  FilterBox away{0.7, -0.15, 0.3};
  FilterBox source_box{-0.15, -0.15, 0.3};
  PowerRule delta{0.05, -1.0};  // (20 k)^-1
  double alpha = 2.0;
  double window_flat = 0.6;
  bool write_grids = true;
};

struct SourceResult {
  SourceConfig config;
  double k_used = 0.0;
  int dofs = 0;
  double rho_away = 0.0;
  double rho_box = 0.0;
  double local_qu_ratio = 0.0;
  LinearSolveReport solve;
  bool detuned = false;
  BoxSpectrum away;
  BoxSpectrum box;
};

/// Default away box for an obstacle: (0.7, -0.15) for none / one mirror,
/// (-0.15, 0.2) inside the cavity otherwise.
FilterBox default_away_box(ObstacleKind obstacle);
SourceConfig source_config(const Config& cfg);
/// Wavenumber actually used: the requested k, or the quasi-resonance.
double resolve_source_k(const SourceConfig& config);
SourceResult run_source_experiment(const SourceConfig& config);
Config to_config(const SourceConfig& config);
void write_source_experiment(const SourceResult& result, const std::string& dir);

/// Git blob hash (SHA-1 of "blob <len>\0" + text), hex encoded.
std::string content_hash(const std::string& text);
/// meta.txt: resolved config lines followed by the content hash.
void write_meta(const std::string& dir, const Config& resolved, const std::string& extra = "");

}  // namespace helmfem
