#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "helmfem/point.hpp"

namespace helmfem {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Region tags written into Mesh triangles by the builders.
namespace region {
inline constexpr int uniform = 0;
inline constexpr int left = 0;
inline constexpr int transition = 1;
inline constexpr int right = 2;
inline constexpr int physical = 0;
inline constexpr int pml = 1;
}  // namespace region

/// Boundary tags written into Mesh boundary edges.
namespace boundary {
inline constexpr int outer = 1;
inline constexpr int dirichlet = 2;
}  // namespace boundary

struct Triangle {
  std::array<int, 3> v{};
  int region = 0;
};

struct BoundaryEdge {
  std::array<int, 2> v{};
  int tag = boundary::outer;
};

/// Immutable conforming triangulation.
///
/// Triangles are stored counter-clockwise. Each boundary edge is oriented so
/// that its single incident triangle lies to its left. Element diameters
/// (longest edge) are cached, together with the target size the generator
/// aimed for at each centroid.
class Mesh {
 public:
  Mesh() = default;
  /// Throws MeshError on non-finite coordinates, bad indices, or
  /// non-positive signed areas.
  Mesh(std::vector<Point2> vertices, std::vector<Triangle> triangles,
       std::vector<BoundaryEdge> boundary_edges, std::vector<double> target_sizes = {});

  const std::vector<Point2>& vertices() const { return vertices_; }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }
  const std::vector<double>& element_diameters() const { return diameters_; }
  /// Empty when the mesh was not produced by a size-field driven generator.
  const std::vector<double>& target_sizes() const { return target_sizes_; }

  std::size_t num_vertices() const { return vertices_.size(); }
  std::size_t num_triangles() const { return triangles_.size(); }
  bool empty() const { return triangles_.empty(); }

  std::array<Point2, 3> corners(std::size_t t) const {
    const auto& v = triangles_[t].v;
    return {vertices_[v[0]], vertices_[v[1]], vertices_[v[2]]};
  }
  double area(std::size_t t) const;
  Point2 centroid(std::size_t t) const;
  double total_area() const;
  double region_area(int tag) const;

 private:
  std::vector<Point2> vertices_;
  std::vector<Triangle> triangles_;
  std::vector<BoundaryEdge> boundary_edges_;
  std::vector<double> diameters_;
  std::vector<double> target_sizes_;
};

/// Unique edges of a mesh and their incidences.
struct MeshTopology {
  std::vector<std::array<int, 2>> edges;            // (lo, hi) vertex pairs
  std::vector<std::array<int, 3>> triangle_edges;   // local edge i joins v[i], v[(i+1)%3]
  std::vector<std::array<int, 2>> edge_triangles;   // second entry -1 on the boundary
  std::vector<std::array<int, 3>> neighbors;        // across local edge i, -1 if none
};

MeshTopology build_topology(const Mesh& mesh);

/// Checks conformity: every edge has one or two incident triangles, no
/// duplicate triangles, every boundary edge lies on exactly one triangle and
/// every edge with a single triangle is a listed boundary edge. Throws
/// MeshError describing the first violation.
void validate_conformity(const Mesh& mesh);

struct Rect {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 1.0;
  double y1 = 1.0;
  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  bool contains(const Point2& p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

/// Structured mesh: ceil(side/h) cells per side, each split along a diagonal.
/// Refining h by a factor 2 yields a nested mesh. All boundary edges tagged outer.
Mesh build_uniform_rect_mesh(const Rect& extents, double h);

/// Two squares [0,1]^2 (h1) and [1.1,2.1]x[0,1] (h2) joined by the band
/// [1,1.1]x[0,1] whose size field is linear in x. Generated by Delaunay
/// refinement; regions tagged left/transition/right.
Mesh build_rect_two_region_mesh(double h1, double h2);

struct GeometrySpec;
/// Disk of radius spec.outer_radius minus the obstacle holes, tagged
/// physical/pml by centroid radius against spec.pml_inner_radius.
Mesh build_disk_domain_mesh(const GeometrySpec& spec, double h);

struct MeshQualityReport {
  struct RegionSizes {
    int region = 0;
    double min_diameter = 0.0;
    double max_diameter = 0.0;
    std::size_t count = 0;
  };
  std::vector<RegionSizes> regions;
  double shape_regularity = 1.0;  // max_K h_K / (2 inradius_K)
  double local_qu_ratio = 1.0;    // max over probe balls of max h_K / min h_K
  double probe_radius = 0.0;

  const RegionSizes* find(int region) const;
};

/// Probe balls of radius 1/k centred at every vertex; an element meets a ball
/// when its closest point lies within the radius.
MeshQualityReport mesh_quality_report(const Mesh& mesh, double k);

/// ASCII format: "nv nt nbe", nv lines "x y", nt lines "v0 v1 v2 region",
/// nbe lines "v0 v1 tag".
void write_mesh(std::ostream& out, const Mesh& mesh);
Mesh read_mesh(std::istream& in);
void write_mesh_file(const std::string& path, const Mesh& mesh);
Mesh read_mesh_file(const std::string& path);

}  // namespace helmfem
