#pragma once

#include <string>
#include <vector>

#include "helmfem/mesh.hpp"
#include "helmfem/point.hpp"

namespace helmfem {

enum class GeometryKind { rect_two_region, rect_uniform, disk_with_obstacle };
enum class ObstacleKind { none, one_flat_mirror, two_flat_mirrors, two_curved_mirrors };

/// Impenetrable obstacle inside the physical disk.
///
/// Flat mirrors are axis-aligned rectangles of height `a` (y-extent) and
/// thickness `b` (x-extent) whose inner faces sit at x = +-(L - b)/2; the
/// single-mirror variant keeps only the right one.
///
/// Curved mirrors hug the ellipse x = l1 cos t, y = l2 sin t on its left and
/// right: each mirror is the band between the elliptic arc of polar half
/// opening `theta_m` and its outward normal offset by `b`.
struct ObstacleSpec {
  ObstacleKind kind = ObstacleKind::none;
  double a = 0.0;
  double b = 0.0;
  double L = 0.0;
  double l1 = 0.0;
  double l2 = 0.0;
  double theta_m = 0.0;

  static ObstacleSpec none();
  static ObstacleSpec one_flat_mirror(double a = 0.4, double b = 0.2, double L = 0.6);
  static ObstacleSpec two_flat_mirrors(double a = 0.6, double b = 0.2, double L = 0.8);
  static ObstacleSpec two_curved_mirrors(double l1 = 0.265, double b = 0.17);
};

struct GeometrySpec {
  GeometryKind kind = GeometryKind::disk_with_obstacle;
  Rect extents{0.0, 0.0, 2.1, 1.0};  // rect kinds
  double inner_radius = 1.0;          // physical disk
  double outer_radius = 1.5;          // truncation circle
  double pml_inner_radius = 1.0;
  ObstacleSpec obstacle;
};

/// Throws MeshError when an obstacle leaves the physical disk or radii are
/// inconsistent.
void validate(const GeometrySpec& spec);

/// Closed obstacle boundary loops (counter-clockwise), each edge no longer
/// than `h` and every straight or curved side split into at least
/// `min_segments` pieces.
std::vector<std::vector<Point2>> obstacle_polygons(const ObstacleSpec& obstacle, double h,
                                                   int min_segments = 8);

/// Total area enclosed by the obstacle loops.
double obstacle_area(const ObstacleSpec& obstacle);

bool point_in_polygon(const std::vector<Point2>& polygon, const Point2& p);

ObstacleKind parse_obstacle_kind(const std::string& name);
std::string to_string(ObstacleKind kind);
GeometryKind parse_geometry_kind(const std::string& name);
std::string to_string(GeometryKind kind);

}  // namespace helmfem
