#include "helmfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "helmfem/geometry.hpp"
#include "helmfem/triangulator.hpp"

namespace helmfem {

namespace {

std::uint64_t key_of(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

double longest_edge(const std::array<Point2, 3>& c) {
  return std::max({distance(c[0], c[1]), distance(c[1], c[2]), distance(c[2], c[0])});
}

}  // namespace

Mesh::Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
           std::vector<BoundaryEdge> boundary_edges, std::vector<double> target_sizes)
    : vertices_(std::move(vertices)),
      triangles_(std::move(triangles)),
      boundary_edges_(std::move(boundary_edges)),
      target_sizes_(std::move(target_sizes)) {
  for (const auto& p : vertices_)
    if (!is_finite(p)) throw MeshError("mesh: non-finite vertex coordinate");
  const int nv = static_cast<int>(vertices_.size());
  diameters_.reserve(triangles_.size());
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    for (int v : triangles_[t].v)
      if (v < 0 || v >= nv) throw MeshError("mesh: triangle vertex index out of range");
    if (!(area(t) > 0.0))
      throw MeshError("mesh: triangle " + std::to_string(t) + " has non-positive signed area");
    diameters_.push_back(longest_edge(corners(t)));
  }
  for (const auto& e : boundary_edges_)
    for (int v : e.v)
      if (v < 0 || v >= nv) throw MeshError("mesh: boundary edge vertex index out of range");
  if (!target_sizes_.empty() && target_sizes_.size() != triangles_.size())
    throw MeshError("mesh: target size count does not match triangle count");
}

double Mesh::area(std::size_t t) const {
  const auto c = corners(t);
  return 0.5 * orient2d(c[0], c[1], c[2]);
}

Point2 Mesh::centroid(std::size_t t) const {
  const auto c = corners(t);
  return (1.0 / 3.0) * (c[0] + c[1] + c[2]);
}

double Mesh::total_area() const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t) a += area(t);
  return a;
}

double Mesh::region_area(int tag) const {
  double a = 0.0;
  for (std::size_t t = 0; t < triangles_.size(); ++t)
    if (triangles_[t].region == tag) a += area(t);
  return a;
}

MeshTopology build_topology(const Mesh& mesh) {
  MeshTopology topo;
  const auto& tris = mesh.triangles();
  topo.triangle_edges.resize(tris.size());
  topo.neighbors.assign(tris.size(), {-1, -1, -1});
  std::unordered_map<std::uint64_t, int> index;
  index.reserve(tris.size() * 2);
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const int a = tris[t].v[i];
      const int b = tris[t].v[(i + 1) % 3];
      auto [it, inserted] = index.try_emplace(key_of(a, b), static_cast<int>(topo.edges.size()));
      if (inserted) {
        topo.edges.push_back({std::min(a, b), std::max(a, b)});
        topo.edge_triangles.push_back({static_cast<int>(t), -1});
      } else {
        auto& et = topo.edge_triangles[it->second];
        if (et[1] != -1)
          throw MeshError("mesh: edge shared by more than two triangles (non-conforming)");
        et[1] = static_cast<int>(t);
      }
      topo.triangle_edges[t][i] = it->second;
    }
  }
  for (std::size_t t = 0; t < tris.size(); ++t) {
    for (int i = 0; i < 3; ++i) {
      const auto& et = topo.edge_triangles[topo.triangle_edges[t][i]];
      topo.neighbors[t][i] = (et[0] == static_cast<int>(t)) ? et[1] : et[0];
    }
  }
  return topo;
}

void validate_conformity(const Mesh& mesh) {
  const MeshTopology topo = build_topology(mesh);
  std::unordered_map<std::uint64_t, int> edge_index;
  for (std::size_t e = 0; e < topo.edges.size(); ++e)
    edge_index[key_of(topo.edges[e][0], topo.edges[e][1])] = static_cast<int>(e);
  std::vector<int> listed(topo.edges.size(), 0);
  for (const auto& be : mesh.boundary_edges()) {
    const auto it = edge_index.find(key_of(be.v[0], be.v[1]));
    if (it == edge_index.end()) throw MeshError("mesh: boundary edge is not a triangle edge");
    if (topo.edge_triangles[it->second][1] != -1)
      throw MeshError("mesh: boundary edge lies on two triangles");
    if (listed[it->second]++) throw MeshError("mesh: duplicate boundary edge");
  }
  for (std::size_t e = 0; e < topo.edges.size(); ++e)
    if (topo.edge_triangles[e][1] == -1 && !listed[e])
      throw MeshError("mesh: unlisted edge with a single incident triangle (hanging node or gap)");
  // Triangles sharing a vertex must meet only in that vertex or a full edge:
  // with every edge on at most two triangles and consistent orientation, an
  // overlap would show up as two triangles traversing a shared edge in the
  // same direction.
  for (std::size_t e = 0; e < topo.edges.size(); ++e) {
    const auto& et = topo.edge_triangles[e];
    if (et[1] == -1) continue;
    auto direction = [&](int t) {
      const auto& v = mesh.triangles()[t].v;
      for (int i = 0; i < 3; ++i)
        if (v[i] == topo.edges[e][0] && v[(i + 1) % 3] == topo.edges[e][1]) return 1;
      return -1;
    };
    if (direction(et[0]) == direction(et[1]))
      throw MeshError("mesh: overlapping triangles across an edge");
  }
}

Mesh build_uniform_rect_mesh(const Rect& extents, double h) {
  const double w = extents.width();
  const double ht = extents.height();
  if (!(w > 0 && ht > 0)) throw MeshError("uniform mesh: degenerate extents");
  if (!(h > 0) || h > std::min(w, ht) * (1 + 1e-12))
    throw MeshError("uniform mesh: need 0 < h <= shortest side");
  const int nx = static_cast<int>(std::ceil(w / h - 1e-9));
  const int ny = static_cast<int>(std::ceil(ht / h - 1e-9));
  std::vector<Point2> vertices;
  vertices.reserve(static_cast<std::size_t>(nx + 1) * (ny + 1));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      vertices.push_back({extents.x0 + w * i / nx, extents.y0 + ht * j / ny});
  auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<Triangle> tris;
  tris.reserve(2 * static_cast<std::size_t>(nx) * ny);
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      tris.push_back({{id(i, j), id(i + 1, j), id(i + 1, j + 1)}, region::uniform});
      tris.push_back({{id(i, j), id(i + 1, j + 1), id(i, j + 1)}, region::uniform});
    }
  }
  std::vector<BoundaryEdge> edges;
  for (int i = 0; i < nx; ++i) edges.push_back({{id(i, 0), id(i + 1, 0)}, boundary::outer});
  for (int j = 0; j < ny; ++j) edges.push_back({{id(nx, j), id(nx, j + 1)}, boundary::outer});
  for (int i = nx; i > 0; --i) edges.push_back({{id(i, ny), id(i - 1, ny)}, boundary::outer});
  for (int j = ny; j > 0; --j) edges.push_back({{id(0, j), id(0, j - 1)}, boundary::outer});
  std::vector<double> targets(tris.size(), h);
  return Mesh(std::move(vertices), std::move(tris), std::move(edges), std::move(targets));
}

Mesh build_rect_two_region_mesh(double h1, double h2) {
  if (!(h1 > 0 && h2 > 0)) throw MeshError("two-region mesh: need h1, h2 > 0");
  if (h1 > 1.0 || h2 > 1.0) throw MeshError("two-region mesh: mesh size exceeds the square side");
  const double hm = std::sqrt(h1 * h2);
  auto n = [](double len, double h) { return std::max(1, static_cast<int>(std::ceil(len / h - 1e-9))); };
  Pslg g;
  const int p00 = g.add_point({0.0, 0.0});
  const int p10 = g.add_point({1.0, 0.0});
  const int p20 = g.add_point({1.1, 0.0});
  const int p30 = g.add_point({2.1, 0.0});
  const int p31 = g.add_point({2.1, 1.0});
  const int p21 = g.add_point({1.1, 1.0});
  const int p11 = g.add_point({1.0, 1.0});
  const int p01 = g.add_point({0.0, 1.0});
  g.add_polyline(p00, p10, n(1.0, h1), boundary::outer);
  g.add_polyline(p10, p20, n(0.1, hm), boundary::outer);
  g.add_polyline(p20, p30, n(1.0, h2), boundary::outer);
  g.add_polyline(p30, p31, n(1.0, h2), boundary::outer);
  g.add_polyline(p31, p21, n(1.0, h2), boundary::outer);
  g.add_polyline(p21, p11, n(0.1, hm), boundary::outer);
  g.add_polyline(p11, p01, n(1.0, h1), boundary::outer);
  g.add_polyline(p01, p00, n(1.0, h1), boundary::outer);
  g.add_polyline(p10, p11, n(1.0, h1), 0);
  g.add_polyline(p20, p21, n(1.0, h2), 0);

  const SizeField size = [h1, h2](const Point2& p) {
    if (p.x <= 1.0) return h1;
    if (p.x >= 1.1) return h2;
    return h1 + (h2 - h1) * (p.x - 1.0) / 0.1;
  };
  const RegionFunction tag = [](const Point2& p) {
    if (p.x < 1.0) return region::left;
    if (p.x < 1.1) return region::transition;
    return region::right;
  };
  return triangulate(g, size, tag);
}

Mesh build_disk_domain_mesh(const GeometrySpec& spec, double h) {
  if (spec.kind != GeometryKind::disk_with_obstacle)
    throw MeshError("disk mesh: geometry kind must be disk_with_obstacle");
  validate(spec);
  if (!(h > 0) || h > spec.outer_radius) throw MeshError("disk mesh: invalid mesh size");
  Pslg g;
  const int n_outer = std::max(16, static_cast<int>(std::ceil(2 * std::numbers::pi * spec.outer_radius / h)));
  std::vector<Point2> circle;
  for (int i = 0; i < n_outer; ++i) {
    const double t = 2 * std::numbers::pi * i / n_outer;
    circle.push_back({spec.outer_radius * std::cos(t), spec.outer_radius * std::sin(t)});
  }
  g.add_loop(circle, boundary::outer);
  for (const auto& loop : obstacle_polygons(spec.obstacle, h)) {
    g.add_loop(loop, boundary::dirichlet);
    g.holes.push_back(loop);
  }
  const double r_pml = spec.pml_inner_radius;
  const SizeField size = [h](const Point2&) { return h; };
  const RegionFunction tag = [r_pml](const Point2& p) {
    return norm(p) > r_pml ? region::pml : region::physical;
  };
  return triangulate(g, size, tag);
}

const MeshQualityReport::RegionSizes* MeshQualityReport::find(int r) const {
  for (const auto& s : regions)
    if (s.region == r) return &s;
  return nullptr;
}

namespace {

double point_triangle_distance(const Point2& p, const std::array<Point2, 3>& c) {
  if (orient2d(c[0], c[1], p) >= 0 && orient2d(c[1], c[2], p) >= 0 && orient2d(c[2], c[0], p) >= 0)
    return 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 3; ++i) {
    const Point2& a = c[i];
    const Point2& b = c[(i + 1) % 3];
    const Point2 ab = b - a;
    const double t = std::clamp(dot(p - a, ab) / dot(ab, ab), 0.0, 1.0);
    best = std::min(best, distance(p, a + t * ab));
  }
  return best;
}

}  // namespace

MeshQualityReport mesh_quality_report(const Mesh& mesh, double k) {
  if (!(k > 0)) throw MeshError("quality report: k must be positive");
  if (mesh.empty()) throw MeshError("quality report: empty mesh");
  MeshQualityReport rep;
  rep.probe_radius = 1.0 / k;
  const auto& diam = mesh.element_diameters();
  std::unordered_map<int, std::size_t> slot;
  Rect box{mesh.vertices()[0].x, mesh.vertices()[0].y, mesh.vertices()[0].x, mesh.vertices()[0].y};
  for (const auto& p : mesh.vertices()) {
    box.x0 = std::min(box.x0, p.x);
    box.x1 = std::max(box.x1, p.x);
    box.y0 = std::min(box.y0, p.y);
    box.y1 = std::max(box.y1, p.y);
  }
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const int r = mesh.triangles()[t].region;
    auto [it, fresh] = slot.try_emplace(r, rep.regions.size());
    if (fresh) rep.regions.push_back({r, diam[t], diam[t], 0});
    auto& s = rep.regions[it->second];
    s.min_diameter = std::min(s.min_diameter, diam[t]);
    s.max_diameter = std::max(s.max_diameter, diam[t]);
    ++s.count;
    const auto c = mesh.corners(t);
    const double perimeter = distance(c[0], c[1]) + distance(c[1], c[2]) + distance(c[2], c[0]);
    const double inradius = 2.0 * mesh.area(t) / perimeter;
    rep.shape_regularity = std::max(rep.shape_regularity, diam[t] / (2.0 * inradius));
  }
  std::sort(rep.regions.begin(), rep.regions.end(),
            [](const auto& a, const auto& b) { return a.region < b.region; });

  // Bucket triangles by bounding box on a grid of cell size = probe radius.
  const double cell = rep.probe_radius;
  const int nx = std::max(1, static_cast<int>(std::ceil(box.width() / cell)) + 1);
  const int ny = std::max(1, static_cast<int>(std::ceil(box.height() / cell)) + 1);
  const bool fine_grid = static_cast<double>(nx) * ny < 5e7;
  std::vector<std::vector<int>> buckets(fine_grid ? static_cast<std::size_t>(nx) * ny : 1);
  auto cx = [&](double x) { return std::clamp(static_cast<int>((x - box.x0) / cell), 0, nx - 1); };
  auto cy = [&](double y) { return std::clamp(static_cast<int>((y - box.y0) / cell), 0, ny - 1); };
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const auto c = mesh.corners(t);
    if (!fine_grid) {
      buckets[0].push_back(static_cast<int>(t));
      continue;
    }
    const int i0 = cx(std::min({c[0].x, c[1].x, c[2].x})), i1 = cx(std::max({c[0].x, c[1].x, c[2].x}));
    const int j0 = cy(std::min({c[0].y, c[1].y, c[2].y})), j1 = cy(std::max({c[0].y, c[1].y, c[2].y}));
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) buckets[static_cast<std::size_t>(j) * nx + i].push_back(static_cast<int>(t));
  }
  std::vector<int> seen(mesh.num_triangles(), -1);
  int probe_id = 0;
  for (const auto& p : mesh.vertices()) {
    double hmax = 0.0, hmin = std::numeric_limits<double>::infinity();
    auto visit = [&](const std::vector<int>& list) {
      for (int t : list) {
        if (seen[t] == probe_id) continue;
        seen[t] = probe_id;
        if (point_triangle_distance(p, mesh.corners(t)) <= rep.probe_radius) {
          hmax = std::max(hmax, diam[t]);
          hmin = std::min(hmin, diam[t]);
        }
      }
    };
    if (fine_grid) {
      for (int j = cy(p.y - cell); j <= cy(p.y + cell); ++j)
        for (int i = cx(p.x - cell); i <= cx(p.x + cell); ++i)
          visit(buckets[static_cast<std::size_t>(j) * nx + i]);
    } else {
      visit(buckets[0]);
    }
    if (hmax > 0.0) rep.local_qu_ratio = std::max(rep.local_qu_ratio, hmax / hmin);
    ++probe_id;
  }
  return rep;
}

void write_mesh(std::ostream& out, const Mesh& mesh) {
  out.precision(17);
  out << mesh.num_vertices() << ' ' << mesh.num_triangles() << ' ' << mesh.boundary_edges().size()
      << '\n';
  for (const auto& p : mesh.vertices()) out << p.x << ' ' << p.y << '\n';
  for (const auto& t : mesh.triangles())
    out << t.v[0] << ' ' << t.v[1] << ' ' << t.v[2] << ' ' << t.region << '\n';
  for (const auto& e : mesh.boundary_edges()) out << e.v[0] << ' ' << e.v[1] << ' ' << e.tag << '\n';
}

Mesh read_mesh(std::istream& in) {
  std::size_t nv = 0, nt = 0, nbe = 0;
  if (!(in >> nv >> nt >> nbe)) throw MeshError("mesh file: bad header");
  std::vector<Point2> vertices(nv);
  for (auto& p : vertices)
    if (!(in >> p.x >> p.y)) throw MeshError("mesh file: truncated vertex block");
  std::vector<Triangle> tris(nt);
  for (auto& t : tris)
    if (!(in >> t.v[0] >> t.v[1] >> t.v[2] >> t.region))
      throw MeshError("mesh file: truncated triangle block");
  std::vector<BoundaryEdge> edges(nbe);
  for (auto& e : edges)
    if (!(in >> e.v[0] >> e.v[1] >> e.tag)) throw MeshError("mesh file: truncated boundary block");
  return Mesh(std::move(vertices), std::move(tris), std::move(edges));
}

void write_mesh_file(const std::string& path, const Mesh& mesh) {
  std::ofstream out(path);
  if (!out) throw MeshError("cannot open " + path + " for writing");
  write_mesh(out, mesh);
}

Mesh read_mesh_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw MeshError("cannot open " + path);
  return read_mesh(in);
}

}  // namespace helmfem
