#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>

#include "CLI11.hpp"
#include "helmfem/experiments.hpp"

using namespace helmfem;

namespace {

Config load_config(const std::string& path) { return path.empty() ? Config{} : Config::parse_file(path); }

void print_report(const std::string& label, const LinearSolveReport& r) {
  std::printf("%s: residual %.3e, rcond %.2e, LU nnz %ld, %.2fs\n", label.c_str(), r.residual_norm_rel,
              r.rcond, static_cast<long>(r.factor_nnz), r.solve_time);
}

Truncation parse_truncation(const std::string& s) {
  if (s == "impedance") return Truncation::impedance;
  if (s == "pml") return Truncation::pml;
  if (s == "dtn") return Truncation::dtn;
  throw ConfigError("unknown truncation " + s);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite element Helmholtz solver and local error diagnostics"};
  app.require_subcommand(1);

  std::string config_path, out;

  auto* mesh_cmd = app.add_subcommand("mesh", "build a mesh from a geometry file");
  mesh_cmd->set_help_flag("--help");
  std::string geometry_path;
  double h = 0.05;
  mesh_cmd->add_option("--geometry", geometry_path, "key = value geometry file (mesh.* keys)")->required();
  mesh_cmd->add_option("--h", h, "target element size")->required();
  mesh_cmd->add_option("-o", out, "output mesh file")->required();

  auto* solve_cmd = app.add_subcommand("solve", "solve on an existing mesh and dump the field");
  std::string mesh_path, problem = "bump", truncation = "pml";
  double k = 10.0, theta = 0.0;
  int p = 2;
  solve_cmd->add_option("--mesh", mesh_path)->required();
  solve_cmd->add_option("--k", k)->required();
  solve_cmd->add_option("--p", p);
  solve_cmd->add_option("--problem", problem, "plane_wave or bump")->check(CLI::IsMember({"plane_wave", "bump"}));
  solve_cmd->add_option("--truncation", truncation, "bump only: pml, dtn or impedance");
  solve_cmd->add_option("--theta", theta, "plane wave direction");
  solve_cmd->add_option("-o", out, "field csv")->required();

  auto* filter_cmd = app.add_subcommand("filter", "frequency split of a field on a box");
  std::string field_path, box_text;
  double delta = 0.0, alpha = 2.0, filter_k = 0.0;
  bool window = false;
  filter_cmd->add_option("--field", field_path)->required();
  filter_cmd->add_option("--mesh", mesh_path, "mesh the field was computed on")->required();
  filter_cmd->add_option("--p", p, "polynomial degree of the field");
  filter_cmd->add_option("--k", filter_k)->required();
  filter_cmd->add_option("--box", box_text, "x0,y0,side")->required();
  filter_cmd->add_option("--delta", delta)->required();
  filter_cmd->add_option("--alpha", alpha);
  filter_cmd->add_flag("--window", window, "apply the smooth box window");
  filter_cmd->add_option("-o", out, "directory for grid.csv and spectrum.csv");

  auto* exp1_cmd = app.add_subcommand("exp1", "error fields on coarse, fine and non-uniform meshes");
  std::string theta_text;
  exp1_cmd->add_option("--config", config_path);
  exp1_cmd->add_option("--theta", theta_text, "0 or pi/2");
  exp1_cmd->add_option("-o", out)->required();

  auto* exp2_cmd = app.add_subcommand("exp2", "k sweep with frequency-split local errors");
  std::string k_list;
  exp2_cmd->add_option("--config", config_path);
  exp2_cmd->add_option("--k-list", k_list, "a:step:b or comma list");
  exp2_cmd->add_option("-o", out)->required();

  auto* source_cmd = app.add_subcommand("source", "bump source on a disk with obstacles");
  std::string geometry_name, k_text;
  source_cmd->add_option("--config", config_path);
  source_cmd->add_option("--geometry", geometry_name, "none, one_flat_mirror, two_flat_mirrors, two_curved_mirrors");
  source_cmd->add_option("--k", k_text, "number or auto-resonance");
  source_cmd->add_option("-o", out)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*mesh_cmd) {
      const Config cfg = Config::parse_file(geometry_path);
      const GeometrySpec g = geometry_config(cfg);
      Mesh mesh;
      switch (g.kind) {
        case GeometryKind::rect_uniform: mesh = build_uniform_rect_mesh(g.extents, h); break;
        case GeometryKind::rect_two_region: mesh = build_rect_two_region_mesh(h, cfg.get_double("mesh.h2", h)); break;
        case GeometryKind::disk_with_obstacle: mesh = build_disk_domain_mesh(g, h); break;
      }
      write_mesh_file(out, mesh);
      std::printf("%zu vertices, %zu triangles\n", mesh.num_vertices(), mesh.num_triangles());
    } else if (*solve_cmd) {
      auto mesh = std::make_shared<const Mesh>(read_mesh_file(mesh_path));
      DiscreteSolution sol = problem == "plane_wave"
                                 ? solve_plane_wave_impedance(mesh, p, PlaneWave{k, theta})
                                 : solve_bump_problem(mesh, p, k, parse_truncation(truncation));
      write_field_csv_file(out, sol.uh);
      print_report("solve", sol.report);
      if (sol.detuned) std::printf("factorisation failed at k; solved at k = %.9f\n", sol.k_used);
    } else if (*filter_cmd) {
      auto mesh = std::make_shared<const Mesh>(read_mesh_file(mesh_path));
      const FemField field = read_field_csv_file(field_path, build_fem_space(mesh, p));
      const std::vector<double> b = parse_list(box_text);
      if (b.size() != 3) throw ConfigError("--box must be x0,y0,side");
      const FilterBox box{b[0], b[1], b[2]};
      const SampleGrid grid = sample_on_grid(field, box, delta, WindowSpec{window, 0.6});
      const SpectralDecomposition spec = dft2(grid);
      const LowpassSplit split = lowpass_split(spec, filter_k, alpha);
      const SpectralH1kSplit e = spectral_h1k_split(spec, split.mask, filter_k);
      std::printf("N %d rho %.6f h1k_low %.6e h1k_high %.6e%s\n", grid.N, rho(grid, split), e.low, e.high,
                  split.nyquist_clipped ? " (alpha k above Nyquist)" : "");
      if (!out.empty()) {
        write_grid_csv_file(out + "/grid.csv", grid);
        std::ofstream s(out + "/spectrum.csv");
        write_spectrum_csv(s, spec);
      }
    } else if (*exp1_cmd) {
      Config cfg = load_config(config_path);
      if (!theta_text.empty()) cfg.set("exp.theta", theta_text);
      const Experiment1Result r = run_experiment1(experiment1_config(cfg));
      write_experiment1(r, out);
      for (const auto& m : r.meshes)
        std::printf("%-10s dofs %8d  right H1k err %.4e  global H1k rel %.4e  median log10 right %.3f\n",
                    m.name.c_str(), m.dofs, m.right.h1k_err, m.global.h1k_rel, m.median_log_right);
    } else if (*exp2_cmd) {
      Config cfg = load_config(config_path);
      if (!k_list.empty()) cfg.set("exp.k_list", k_list);
      const SweepResult r = run_experiment2(experiment2_config(cfg));
      write_experiment2(r, out);
      for (const auto& row : r.rows)
        std::printf("k %5.1f %-5s err %.4e low %.4e high %.4e rho %.4f%s\n", row.k, row.box.c_str(),
                    row.h1k_err, row.low, row.high, row.rho, row.ok ? "" : (" FAILED: " + row.message).c_str());
      const SweepSlopes& s = r.slopes;
      std::printf("slopes (k >= %.1f): left low %.3f high %.3f total %.3f | right low %.3f high %.3f total %.3f\n",
                  s.k_from, s.left_low, s.left_high, s.left_total, s.right_low, s.right_high, s.right_total);
    } else if (*source_cmd) {
      Config cfg = load_config(config_path);
      if (!geometry_name.empty()) cfg.set("mesh.obstacle", geometry_name);
      if (!k_text.empty()) cfg.set("exp.k", k_text);
      const SourceResult r = run_source_experiment(source_config(cfg));
      write_source_experiment(r, out);
      std::printf("k %.6f dofs %d rho_away %.5f rho_box %.5f\n", r.k_used, r.dofs, r.rho_away, r.rho_box);
      print_report("solve", r.solve);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
