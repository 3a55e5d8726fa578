#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "helmfem/mesh.hpp"
#include "helmfem/point.hpp"

namespace helmfem {

/// Input segment between two Pslg points. tag > 0 marks a boundary edge
/// that is written to the mesh; tag == 0 is an interior constraint (e.g. a
/// material interface) that the triangulation must conform to.
struct PslgSegment {
  int a = 0;
  int b = 0;
  int tag = boundary::outer;
};

/// Planar straight-line graph. The outer boundary must be convex; holes are
/// listed as closed polygons (their edges must also appear as segments).
struct Pslg {
  std::vector<Point2> points;
  std::vector<PslgSegment> segments;
  std::vector<std::vector<Point2>> holes;

  int add_point(const Point2& p) {
    points.push_back(p);
    return static_cast<int>(points.size()) - 1;
  }
  /// Joins existing points `first` and `last` by `pieces` equal segments.
  void add_polyline(int first, int last, int pieces, int tag);
  /// Adds a closed loop through `loop` (consecutive vertices joined).
  void add_loop(const std::vector<Point2>& loop, int tag);
};

struct RefinementOptions {
  /// Triangles with circumradius / shortest edge above this are split.
  double max_radius_edge_ratio = std::sqrt(2.0);
  /// Triangles with circumradius above size_factor * h(centroid) / sqrt(3)
  /// are split; 1.3 makes the mean edge length close to h.
  double size_factor = 1.3;
  std::size_t max_vertices = 4'000'000;
};

using SizeField = std::function<double(const Point2&)>;
using RegionFunction = std::function<int(const Point2&)>;

/// Conforming Delaunay refinement (Ruppert/Chew style) of a PSLG driven by a
/// spatial size field. Segments are recovered by midpoint splitting; bad or
/// oversized triangles get their circumcentre inserted unless it encroaches a
/// segment, in which case the segment is split instead.
Mesh triangulate(const Pslg& pslg, const SizeField& size, const RegionFunction& region,
                 const RefinementOptions& options = {});

}  // namespace helmfem
