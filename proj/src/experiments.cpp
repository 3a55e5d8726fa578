#include "helmfem/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <sstream>

#include <openssl/evp.h>

namespace helmfem {

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) { return format_number(v); }

std::string box_text(const FilterBox& b) { return fmt(b.x0) + "," + fmt(b.y0) + "," + fmt(b.side); }

FilterBox parse_box(const std::string& text) {
  const std::vector<double> v = parse_list(text);
  if (v.size() != 3) throw ConfigError("box must be x0,y0,side: " + text);
  return {v[0], v[1], v[2]};
}

std::ofstream open_output(const std::string& dir, const std::string& name) {
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / name).string();
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << std::setprecision(12);
  return out;
}

// Factor, solve and refactor once with k + 1e-6 if the factorisation fails.
template <class Build>
DiscreteSolution solve_with_retry(std::shared_ptr<const FemSpace> space, double k, Build build) {
  DiscreteSolution out;
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double kk = attempt == 0 ? k : k + 1e-6;
    auto [matrix, rhs] = build(kk);
    try {
      SolveResult r = solve(matrix, rhs);
      out.uh = FemField(space, std::move(r.x));
      out.report = r.report;
      out.k_used = kk;
      out.detuned = attempt > 0;
      return out;
    } catch (const SolverError&) {
      if (attempt == 1) throw;
    }
  }
  return out;
}

}  // namespace

double fit_loglog_slope(const std::vector<std::pair<double, double>>& pairs) {
  if (pairs.size() < 3) throw std::invalid_argument("fit_loglog_slope: need at least 3 pairs");
  double mx = 0.0, my = 0.0;
  for (const auto& [k, v] : pairs) {
    if (!(k > 0.0 && v > 0.0)) throw std::invalid_argument("fit_loglog_slope: values must be positive");
    mx += std::log(k);
    my += std::log(v);
  }
  mx /= static_cast<double>(pairs.size());
  my /= static_cast<double>(pairs.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [k, v] : pairs) {
    const double dx = std::log(k) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(v) - my);
  }
  if (sxx <= 1e-24 * (1.0 + mx * mx)) throw std::invalid_argument("fit_loglog_slope: all k are equal");
  return sxy / sxx;
}

DiscreteSolution solve_plane_wave_impedance(std::shared_ptr<const Mesh> mesh, int p,
                                            const PlaneWave& pw) {
  auto space = build_fem_space(std::move(mesh), p);
  FormSpec form;
  form.truncation = Truncation::impedance;
  form.k = pw.k;
  const ComplexSparseMatrix m = assemble_form(*space, form);
  const ComplexVector b = assemble_rhs(
      *space,
      RhsFunctional::impedance_trace(
          [&](const Point2& x, const Point2& n) { return impedance_data_plane_wave(pw, x, n); }),
      pw.k);
  SolveResult r = solve(m, b);
  DiscreteSolution out;
  out.uh = FemField(space, std::move(r.x));
  out.report = r.report;
  out.k_used = pw.k;
  return out;
}

DiscreteSolution solve_bump_problem(std::shared_ptr<const Mesh> mesh, int p, double k,
                                    Truncation truncation, const PmlSpec& pml, const DtnSpec& dtn) {
  auto space = build_fem_space(std::move(mesh), p);
  std::vector<int> fixed = space->dirichlet_dofs();
  if (truncation == Truncation::pml) {
    const std::vector<int> outer = space->boundary_dofs(boundary::outer);
    fixed.insert(fixed.end(), outer.begin(), outer.end());
  }
  return solve_with_retry(space, k, [&](double kk) {
    FormSpec form;
    form.truncation = truncation;
    form.k = kk;
    form.pml = pml;
    form.dtn = dtn;
    ComplexSparseMatrix m = assemble_form(*space, form);
    const BumpSource src{kk, 0.1};
    ComplexVector b = assemble_rhs(*space, RhsFunctional::volume_source(src.rhs_density()), kk);
    apply_dirichlet(m, b, fixed);
    return std::make_pair(std::move(m), std::move(b));
  });
}

double windowed_error_h1k(const FemField& uh, const ExactFunction& u, const FilterBox& box,
                          double flat_fraction, double k) {
  const FemSpace& space = *uh.space;
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = triangle_rule(2 * space.degree() + 4);
  const Tabulation tab = tabulate(space.reference(), rule);
  double sum = 0.0;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    const double bx0 = std::min({c[0].x, c[1].x, c[2].x}), bx1 = std::max({c[0].x, c[1].x, c[2].x});
    const double by0 = std::min({c[0].y, c[1].y, c[2].y}), by1 = std::max({c[0].y, c[1].y, c[2].y});
    if (bx1 <= box.x0 || bx0 >= box.x0 + box.side || by1 <= box.y0 || by0 >= box.y0 + box.side)
      continue;
    const ElementMap map(c);
    const int* dofs = space.element_dofs(t);
    double local = 0.0;
    for (int q = 0; q < tab.nq; ++q) {
      const Point2 x = map.to_physical(rule.xi[q], rule.eta[q]);
      Point2 gw;
      const double w = window_value(box, flat_fraction, x, &gw);
      if (w == 0.0 && gw.x == 0.0 && gw.y == 0.0) continue;
      cplx e = -u.value(x);
      const auto gu = u.gradient(x);
      cplx ex = -gu[0], ey = -gu[1];
      for (int i = 0; i < tab.nb; ++i) {
        const cplx cf = uh.coeffs[dofs[i]];
        const Point2 g = map.gradient(tab.dxi[q * tab.nb + i], tab.deta[q * tab.nb + i]);
        e += cf * tab.phi[q * tab.nb + i];
        ex += cf * g.x;
        ey += cf * g.y;
      }
      const cplx vx = gw.x * e + w * ex, vy = gw.y * e + w * ey;
      local += rule.weights[q] * ((std::norm(vx) + std::norm(vy)) / (k * k) + std::norm(w * e));
    }
    sum += local * std::abs(map.det);
  }
  return std::sqrt(sum);
}

BoxSpectrum analyse_signal(const std::function<cplx(const Point2&)>& f, const FilterBox& box,
                           double delta, double k, double alpha, const WindowSpec& window) {
  BoxSpectrum out;
  out.grid = sample_on_grid(f, box, delta, window);
  const SpectralDecomposition spec = dft2(out.grid);
  const LowpassSplit split = lowpass_split(spec, k, alpha);
  out.nyquist_clipped = split.nyquist_clipped;
  out.rho = rho(out.grid, split);
  out.h1k = spectral_h1k_split(spec, split.mask, k);
  return out;
}

BoxSpectrum analyse_box(const FemField& uh, const ExactFunction* u, const FilterBox& box,
                        double delta, double k, double alpha, const WindowSpec& window) {
  return analyse_signal(
      [&](const Point2& x) {
        const cplx v = evaluate_field(uh, x);
        return u ? u->value(x) - v : v;
      },
      box, delta, k, alpha, window);
}

DeflatedSplit deflated_error_split(const FemField& uh, const ExactFunction& u, const FilterBox& box,
                                   double delta, double k, double alpha, double flat_fraction) {
  const SampledGradientField f = sample_with_gradient(
      [&](const Point2& x) {
        ValueGradient e = evaluate_field_gradient(uh, x);
        const auto g = u.gradient(x);
        e.value = u.value(x) - e.value;
        e.grad = {g[0] - e.grad[0], g[1] - e.grad[1]};
        return e;
      },
      box, delta);
  return deflated_split(f, k, alpha, flat_fraction);
}

// Experiment 1 ----------------------------------------------------------------

const Experiment1Mesh& Experiment1Result::find(const std::string& name) const {
  for (const auto& m : meshes)
    if (m.name == name) return m;
  throw std::out_of_range("experiment 1: no mesh named " + name);
}

Experiment1Config experiment1_config(const Config& cfg) {
  Experiment1Config c;
  c.k = cfg.get_double("exp.k", c.k);
  c.p = cfg.get_int("exp.p", c.p);
  c.theta = cfg.get_double("exp.theta", c.theta);
  if (cfg.has("mesh.h1")) c.h1 = parse_power_rule(cfg.get_string("mesh.h1", ""));
  if (cfg.has("mesh.h2")) c.h2 = parse_power_rule(cfg.get_string("mesh.h2", ""));
  c.grid_nx = cfg.get_int("exp.grid_nx", c.grid_nx);
  c.grid_ny = cfg.get_int("exp.grid_ny", c.grid_ny);
  return c;
}

Config to_config(const Experiment1Config& c) {
  Config cfg;
  cfg.set("exp.id", "exp1");
  cfg.set("exp.k", fmt(c.k));
  cfg.set("exp.p", std::to_string(c.p));
  cfg.set("exp.theta", fmt(c.theta));
  cfg.set("mesh.h1", c.h1.to_string());
  cfg.set("mesh.h2", c.h2.to_string());
  cfg.set("exp.grid_nx", std::to_string(c.grid_nx));
  cfg.set("exp.grid_ny", std::to_string(c.grid_ny));
  return cfg;
}

Experiment1Result run_experiment1(const Experiment1Config& config) {
  Experiment1Result result;
  result.config = config;
  const double k = config.k;
  const double h1 = config.h1(k), h2 = config.h2(k);
  const PlaneWave pw{k, config.theta};
  const ExactFunction exact = pw.as_exact();
  const Rect domain{0.0, 0.0, 2.1, 1.0};
  const Rect right_square{1.1, 0.0, 2.1, 1.0};
  struct Item {
    std::string name;
    double a, b;
  };
  for (const Item& item : {Item{"coarse", h1, h1}, Item{"fine", h2, h2}, Item{"nonuniform", h1, h2}}) {
    auto mesh = std::make_shared<const Mesh>(item.name == "nonuniform"
                                                 ? build_rect_two_region_mesh(item.a, item.b)
                                                 : build_uniform_rect_mesh(domain, item.a));
    Experiment1Mesh r;
    r.name = item.name;
    r.h1 = item.a;
    r.h2 = item.b;
    r.local_qu_ratio = mesh_quality_report(*mesh, k).local_qu_ratio;
    const DiscreteSolution sol = solve_plane_wave_impedance(mesh, config.p, pw);
    r.dofs = sol.uh.space->num_dofs();
    r.solve = sol.report;
    r.right = error_norms(sol.uh, exact, SubdomainSelector::box(*mesh, right_square), k);
    r.global = error_norms(sol.uh, exact, SubdomainSelector::all(*mesh), k);
    r.grid.resize(static_cast<std::size_t>(config.grid_nx) * config.grid_ny);
    std::vector<double> right_levels;
    for (int j = 0; j < config.grid_ny; ++j)
      for (int i = 0; i < config.grid_nx; ++i) {
        const Point2 x{(i + 0.5) * domain.width() / config.grid_nx,
                       (j + 0.5) * domain.height() / config.grid_ny};
        const cplx e = pw.eval(x).value - evaluate_field(sol.uh, x);
        const double level = std::log10(1e-12 + std::abs(e.real()));
        r.grid[static_cast<std::size_t>(j) * config.grid_nx + i] = level;
        if (right_square.contains(x)) right_levels.push_back(level);
      }
    if (!right_levels.empty()) {
      auto mid = right_levels.begin() + right_levels.size() / 2;
      std::nth_element(right_levels.begin(), mid, right_levels.end());
      r.median_log_right = *mid;
    }
    result.meshes.push_back(std::move(r));
  }
  return result;
}

void write_experiment1(const Experiment1Result& result, const std::string& dir) {
  const auto& c = result.config;
  {
    auto out = open_output(dir, "results.csv");
    out << "mesh,k,p,theta,h1,h2,dofs,l2_err_right,h1k_err_right,h1k_rel_right,h1k_err_global,"
           "h1k_rel_global,median_log10_right,local_qu_ratio,residual\n";
    for (const auto& m : result.meshes)
      out << m.name << ',' << c.k << ',' << c.p << ',' << c.theta << ',' << m.h1 << ',' << m.h2 << ','
          << m.dofs << ',' << m.right.l2_err << ',' << m.right.h1k_err << ',' << m.right.h1k_rel << ','
          << m.global.h1k_err << ',' << m.global.h1k_rel << ',' << m.median_log_right << ','
          << m.local_qu_ratio << ',' << m.solve.residual_norm_rel << '\n';
  }
  for (const auto& m : result.meshes) {
    auto out = open_output(dir, "grid_" + m.name + ".csv");
    out << "m,n,x,y,log10_abs_re_err\n";
    for (int j = 0; j < c.grid_ny; ++j)
      for (int i = 0; i < c.grid_nx; ++i)
        out << i << ',' << j << ',' << (i + 0.5) * 2.1 / c.grid_nx << ',' << (j + 0.5) / c.grid_ny
            << ',' << m.grid[static_cast<std::size_t>(j) * c.grid_nx + i] << '\n';
  }
  write_meta(dir, to_config(c), "grid = cell centres of a " + std::to_string(c.grid_nx) + " x " +
                                    std::to_string(c.grid_ny) + " lattice on [0,2.1]x[0,1]\n");
}

// Experiment 2 ----------------------------------------------------------------

Experiment2Config experiment2_config(const Config& cfg) {
  Experiment2Config c;
  c.k_list = cfg.get_list("exp.k_list", c.k_list);
  c.p = cfg.get_int("exp.p", c.p);
  c.theta = cfg.get_double("exp.theta", c.theta);
  if (cfg.has("mesh.h1")) c.h1 = parse_power_rule(cfg.get_string("mesh.h1", ""));
  if (cfg.has("mesh.h2")) c.h2 = parse_power_rule(cfg.get_string("mesh.h2", ""));
  if (cfg.has("exp.left_box")) c.left = parse_box(cfg.get_string("exp.left_box", ""));
  if (cfg.has("exp.right_box")) c.right = parse_box(cfg.get_string("exp.right_box", ""));
  c.alpha = cfg.get_double("filter.alpha", c.alpha);
  if (cfg.has("filter.delta")) c.delta = parse_power_rule(cfg.get_string("filter.delta", ""));
  c.window_flat = cfg.get_double("filter.window_flat", c.window_flat);
  for (double k : c.k_list)
    if (!(k > 0.0)) throw ConfigError("exp.k_list entries must be positive");
  return c;
}

Config to_config(const Experiment2Config& c) {
  Config cfg;
  cfg.set("exp.id", "exp2");
  std::string ks;
  for (double k : c.k_list) ks += (ks.empty() ? "" : ",") + fmt(k);
  cfg.set("exp.k_list", ks);
  cfg.set("exp.p", std::to_string(c.p));
  cfg.set("exp.theta", fmt(c.theta));
  cfg.set("mesh.h1", c.h1.to_string());
  cfg.set("mesh.h2", c.h2.to_string());
  cfg.set("exp.left_box", box_text(c.left));
  cfg.set("exp.right_box", box_text(c.right));
  cfg.set("filter.alpha", fmt(c.alpha));
  cfg.set("filter.delta", c.delta.to_string());
  cfg.set("filter.window_flat", fmt(c.window_flat));
  return cfg;
}

SweepSlopes fit_sweep_slopes(const std::vector<Experiment2Row>& rows) {
  SweepSlopes s;
  double kmin = 1e300, kmax = 0.0;
  for (const auto& r : rows)
    if (r.ok) {
      kmin = std::min(kmin, r.k);
      kmax = std::max(kmax, r.k);
    }
  s.k_from = 0.5 * (kmin + kmax);
  auto slope = [&](const std::string& box, double Experiment2Row::*field) {
    std::vector<std::pair<double, double>> pairs;
    for (const auto& r : rows)
      if (r.ok && r.box == box && r.k >= s.k_from - 1e-9) pairs.emplace_back(r.k, r.*field);
    return pairs.size() >= 3 ? fit_loglog_slope(pairs) : std::nan("");
  };
  s.left_total = slope("left", &Experiment2Row::h1k_err);
  s.left_low = slope("left", &Experiment2Row::low);
  s.left_high = slope("left", &Experiment2Row::high);
  s.right_total = slope("right", &Experiment2Row::h1k_err);
  s.right_low = slope("right", &Experiment2Row::low);
  s.right_high = slope("right", &Experiment2Row::high);
  return s;
}

SweepResult run_experiment2(const Experiment2Config& config) {
  SweepResult result;
  result.config = config;
  for (double k : config.k_list) {
    const auto t0 = std::chrono::steady_clock::now();
    const double h1 = config.h1(k), h2 = config.h2(k);
    Experiment2Row base;
    base.k = k;
    base.h1 = h1;
    base.h2 = h2;
    try {
      auto mesh = std::make_shared<const Mesh>(build_rect_two_region_mesh(h1, h2));
      base.local_qu_ratio = mesh_quality_report(*mesh, k).local_qu_ratio;
      const PlaneWave pw{k, config.theta};
      const ExactFunction exact = pw.as_exact();
      const DiscreteSolution sol = solve_plane_wave_impedance(mesh, config.p, pw);
      base.dofs = sol.uh.space->num_dofs();
      base.residual = sol.report.residual_norm_rel;
      const WindowSpec window{true, config.window_flat};
      for (const auto& [name, box] : {std::pair{std::string("left"), config.left},
                                      std::pair{std::string("right"), config.right}}) {
        Experiment2Row row = base;
        row.box = name;
        const Rect rect{box.x0, box.y0, box.x0 + box.side, box.y0 + box.side};
        const ErrorNorms e = error_norms(sol.uh, exact, SubdomainSelector::box(*mesh, rect), k);
        row.h1k_err = e.h1k_err;
        row.l2_err = e.l2_err;
        row.h1k_windowed = windowed_error_h1k(sol.uh, exact, box, config.window_flat, k);
        const BoxSpectrum bs = analyse_box(sol.uh, &exact, box, config.delta(k), k, config.alpha, window);
        row.windowed_low = bs.h1k.low;
        row.windowed_high = bs.h1k.high;
        const DeflatedSplit ds =
            deflated_error_split(sol.uh, exact, box, config.delta(k), k, config.alpha, config.window_flat);
        row.low = ds.low;
        row.high = ds.high;
        row.split_total = ds.total;
        row.fitted = ds.fitted;
        row.spectral_total = bs.h1k.total;
        row.rho = bs.rho;
        row.seconds = seconds_since(t0);
        result.rows.push_back(row);
      }
    } catch (const std::exception& ex) {
      for (const char* name : {"left", "right"}) {
        Experiment2Row row = base;
        row.box = name;
        row.ok = false;
        row.message = ex.what();
        row.seconds = seconds_since(t0);
        result.rows.push_back(row);
      }
    }
  }
  result.slopes = fit_sweep_slopes(result.rows);
  return result;
}

void write_experiment2(const SweepResult& result, const std::string& dir) {
  const auto& c = result.config;
  {
    auto out = open_output(dir, "results.csv");
    out << "selector,k,p,h1,h2,dofs,l2_err,h1k_err,h1k_low,h1k_high,split_total,fitted,h1k_windowed,"
           "windowed_low,windowed_high,spectral_total,rho,"
           "local_qu_ratio,residual,seconds,ok,message\n";
    for (const auto& r : result.rows) {
      std::string msg = r.message;
      std::replace(msg.begin(), msg.end(), ',', ';');
      out << r.box << ',' << r.k << ',' << c.p << ',' << r.h1 << ',' << r.h2 << ',' << r.dofs << ','
          << r.l2_err << ',' << r.h1k_err << ',' << r.low << ',' << r.high << ',' << r.split_total << ',' << r.fitted
          << ',' << r.h1k_windowed << ',' << r.windowed_low << ',' << r.windowed_high << ',' << r.spectral_total << ',' << r.rho << ',' << r.local_qu_ratio << ',' << r.residual
          << ',' << r.seconds << ',' << (r.ok ? 1 : 0) << ',' << msg << '\n';
    }
  }
  {
    const auto& s = result.slopes;
    auto out = open_output(dir, "slopes.csv");
    out << "selector,quantity,slope,k_from\n";
    out << "left,h1k_err," << s.left_total << ',' << s.k_from << '\n';
    out << "left,h1k_low," << s.left_low << ',' << s.k_from << '\n';
    out << "left,h1k_high," << s.left_high << ',' << s.k_from << '\n';
    out << "right,h1k_err," << s.right_total << ',' << s.k_from << '\n';
    out << "right,h1k_low," << s.right_low << ',' << s.k_from << '\n';
    out << "right,h1k_high," << s.right_high << ',' << s.k_from << '\n';
  }
  write_meta(dir, to_config(c),
             "boxes = left " + box_text(c.left) + ", right " + box_text(c.right) +
                 " (x0,y0,side; chosen inside each square away from the transition band)\n" +
                 "low/high = DFT split of the windowed error after removing its chi^2-weighted least-squares "
                 "fit by plane waves with |kappa| = k (fit counted as low); windowed_* = plain DFT split\n" +
                 "window = smooth tensor bump, flat on the central " + fmt(c.window_flat) + "\n");
}

// Source experiment -------------------------------------------------------------

FilterBox default_away_box(ObstacleKind obstacle) {
  if (obstacle == ObstacleKind::none || obstacle == ObstacleKind::one_flat_mirror)
    return {0.7, -0.15, 0.3};
  return {-0.15, 0.2, 0.3};
}

SourceConfig source_config(const Config& cfg) {
  SourceConfig c;
  c.obstacle = parse_obstacle_kind(cfg.get_string("mesh.obstacle", "none"));
  const std::string k = cfg.get_string("exp.k", "50");
  if (k == "auto-resonance") {
    c.auto_resonance = true;
  } else {
    c.k = parse_number(k);
  }
  c.resonance_n = cfg.get_int("exp.resonance_n", c.resonance_n);
  c.p = cfg.get_int("exp.p", c.p);
  c.hk = cfg.get_double("mesh.hk", c.hk);
  c.pml.r_inner = cfg.get_double("pml.r_inner", c.pml.r_inner);
  c.pml.r_outer = cfg.get_double("pml.r_outer", c.pml.r_outer);
  c.pml.theta = cfg.get_double("pml.theta", c.pml.theta);
  validate(c.pml);
  c.away = cfg.has("filter.away_box") ? parse_box(cfg.get_string("filter.away_box", ""))
                                      : default_away_box(c.obstacle);
  if (cfg.has("filter.source_box")) c.source_box = parse_box(cfg.get_string("filter.source_box", ""));
  if (cfg.has("filter.delta")) c.delta = parse_power_rule(cfg.get_string("filter.delta", ""));
  c.alpha = cfg.get_double("filter.alpha", c.alpha);
  c.window_flat = cfg.get_double("filter.window_flat", c.window_flat);
  c.write_grids = cfg.get_bool("exp.write_grids", c.write_grids);
  return c;
}

Config to_config(const SourceConfig& c) {
  Config cfg;
  cfg.set("exp.id", "source");
  cfg.set("mesh.obstacle", to_string(c.obstacle));
  cfg.set("exp.k", c.auto_resonance ? "auto-resonance" : fmt(c.k));
  cfg.set("exp.resonance_n", std::to_string(c.resonance_n));
  cfg.set("exp.p", std::to_string(c.p));
  cfg.set("mesh.hk", fmt(c.hk));
  cfg.set("pml.r_inner", fmt(c.pml.r_inner));
  cfg.set("pml.r_outer", fmt(c.pml.r_outer));
  cfg.set("pml.theta", fmt(c.pml.theta));
  cfg.set("filter.away_box", box_text(c.away));
  cfg.set("filter.source_box", box_text(c.source_box));
  cfg.set("filter.delta", c.delta.to_string());
  cfg.set("filter.alpha", fmt(c.alpha));
  cfg.set("filter.window_flat", fmt(c.window_flat));
  cfg.set("exp.write_grids", c.write_grids ? "true" : "false");
  return cfg;
}

namespace {

ObstacleSpec default_obstacle(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::none: return ObstacleSpec::none();
    case ObstacleKind::one_flat_mirror: return ObstacleSpec::one_flat_mirror();
    case ObstacleKind::two_flat_mirrors: return ObstacleSpec::two_flat_mirrors();
    case ObstacleKind::two_curved_mirrors: return ObstacleSpec::two_curved_mirrors();
  }
  return ObstacleSpec::none();
}

}  // namespace

GeometrySpec geometry_config(const Config& cfg) {
  GeometrySpec g;
  g.kind = parse_geometry_kind(cfg.get_string("mesh.geometry", "disk_with_obstacle"));
  if (cfg.has("mesh.extents")) {
    const std::vector<double> e = cfg.get_list("mesh.extents", {});
    if (e.size() != 4) throw ConfigError("mesh.extents must be x0,y0,x1,y1");
    g.extents = {e[0], e[1], e[2], e[3]};
  }
  g.inner_radius = cfg.get_double("mesh.r_inner", g.inner_radius);
  g.outer_radius = cfg.get_double("mesh.r_outer", g.outer_radius);
  g.pml_inner_radius = cfg.get_double("mesh.r_pml", g.inner_radius);
  const ObstacleKind kind = parse_obstacle_kind(cfg.get_string("mesh.obstacle", "none"));
  ObstacleSpec o = default_obstacle(kind);
  switch (kind) {
    case ObstacleKind::none: break;
    case ObstacleKind::one_flat_mirror:
    case ObstacleKind::two_flat_mirrors: {
      const double a = cfg.get_double("mesh.a", o.a), b = cfg.get_double("mesh.b", o.b);
      const double L = cfg.get_double("mesh.L", o.L);
      o = kind == ObstacleKind::one_flat_mirror ? ObstacleSpec::one_flat_mirror(a, b, L)
                                                : ObstacleSpec::two_flat_mirrors(a, b, L);
      break;
    }
    case ObstacleKind::two_curved_mirrors:
      o = ObstacleSpec::two_curved_mirrors(cfg.get_double("mesh.l1", o.l1), cfg.get_double("mesh.b", o.b));
      break;
  }
  g.obstacle = o;
  validate(g);
  return g;
}

double resolve_source_k(const SourceConfig& c) {
  if (!c.auto_resonance) return c.k;
  switch (c.obstacle) {
    case ObstacleKind::two_flat_mirrors: {
      const ObstacleSpec s = ObstacleSpec::two_flat_mirrors();
      return flat_mirror_quasi_resonance(s.L, s.b, c.resonance_n);
    }
    case ObstacleKind::two_curved_mirrors:
      return curved_mirror_quasi_resonance();
    default:
      throw ConfigError("auto-resonance needs a trapping geometry (two_flat_mirrors or two_curved_mirrors)");
  }
}

SourceResult run_source_experiment(const SourceConfig& config) {
  SourceResult out;
  out.config = config;
  const double k = resolve_source_k(config);
  GeometrySpec geo;
  geo.kind = GeometryKind::disk_with_obstacle;
  geo.outer_radius = config.pml.r_outer;
  geo.pml_inner_radius = config.pml.r_inner;
  geo.inner_radius = config.pml.r_inner;
  geo.obstacle = default_obstacle(config.obstacle);
  auto mesh = std::make_shared<const Mesh>(build_disk_domain_mesh(geo, config.hk / k));
  out.local_qu_ratio = mesh_quality_report(*mesh, k).local_qu_ratio;
  const DiscreteSolution sol = solve_bump_problem(mesh, config.p, k, Truncation::pml, config.pml);
  out.k_used = sol.k_used;
  out.detuned = sol.detuned;
  out.solve = sol.report;
  out.dofs = sol.uh.space->num_dofs();
  const ExactFunction exact = BumpSource{sol.k_used, 0.1}.as_exact();
  const WindowSpec window{true, config.window_flat};
  const double delta = config.delta(k);
  // Both u and uh vanish on the sound-soft obstacles, so the error is extended
  // by zero into them; a box corner may clip a mirror.
  const auto error = [&](const Point2& x) -> cplx {
    try {
      return exact.value(x) - evaluate_field(sol.uh, x);
    } catch (const OutOfDomainError&) {
      for (const auto& loop : obstacle_polygons(geo.obstacle, config.hk / k))
        if (point_in_polygon(loop, x)) return 0.0;
      throw;
    }
  };
  out.away = analyse_signal(error, config.away, delta, sol.k_used, config.alpha, window);
  out.box = analyse_signal(error, config.source_box, delta, sol.k_used, config.alpha, window);
  out.rho_away = out.away.rho;
  out.rho_box = out.box.rho;
  return out;
}

void write_source_experiment(const SourceResult& r, const std::string& dir) {
  const auto& c = r.config;
  {
    auto out = open_output(dir, "results.csv");
    out << "geometry,k,p,hk,dofs,box,x0,y0,side,delta,N,alpha,rho,h1k_low,h1k_high,local_qu_ratio,"
           "residual,rcond,detuned\n";
    for (const auto& [name, box, bs] :
         {std::tuple{std::string("away"), c.away, &r.away}, std::tuple{std::string("source"), c.source_box, &r.box}})
      out << to_string(c.obstacle) << ',' << r.k_used << ',' << c.p << ',' << c.hk << ',' << r.dofs << ','
          << name << ',' << box.x0 << ',' << box.y0 << ',' << box.side << ',' << bs->grid.delta << ','
          << bs->grid.N << ',' << c.alpha << ',' << bs->rho << ',' << bs->h1k.low << ',' << bs->h1k.high
          << ',' << r.local_qu_ratio << ',' << r.solve.residual_norm_rel << ',' << r.solve.rcond << ','
          << (r.detuned ? 1 : 0) << '\n';
  }
  if (c.write_grids) {
    for (const auto& [name, bs] : {std::pair{std::string("away"), &r.away}, std::pair{std::string("source"), &r.box}}) {
      auto g = open_output(dir, "grid_" + name + ".csv");
      write_grid_csv(g, bs->grid);
      auto s = open_output(dir, "spectrum_" + name + ".csv");
      write_spectrum_csv(s, dft2(bs->grid));
    }
  }
  std::ostringstream extra;
  extra << "k_used = " << fmt(r.k_used) << "\n"
        << "signal = chi (u - uh), chi smooth tensor bump flat on the central " << c.window_flat << "\n";
  if (c.obstacle == ObstacleKind::two_curved_mirrors && c.auto_resonance)
    extra << "resonance = " << curved_mirror_resonance_provenance << "\n";
  write_meta(dir, to_config(c), extra.str());
}

std::string content_hash(const std::string& text) {
  const std::string blob = "blob " + std::to_string(text.size()) + '\0' + text;
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(blob.data(), blob.size(), digest, &len, EVP_sha1(), nullptr);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) hex << std::hex << std::setw(2) << std::setfill('0') << int(digest[i]);
  return hex.str();
}

void write_meta(const std::string& dir, const Config& resolved, const std::string& extra) {
  auto out = open_output(dir, "meta.txt");
  const std::string text = resolved.to_text();
  out << text << extra << "content_hash = " << content_hash(text) << '\n';
}

}  // namespace helmfem
