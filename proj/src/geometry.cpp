#include "helmfem/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace helmfem {

ObstacleSpec ObstacleSpec::none() { return {}; }

ObstacleSpec ObstacleSpec::one_flat_mirror(double a, double b, double L) {
  ObstacleSpec s;
  s.kind = ObstacleKind::one_flat_mirror;
  s.a = a;
  s.b = b;
  s.L = L;
  return s;
}

ObstacleSpec ObstacleSpec::two_flat_mirrors(double a, double b, double L) {
  ObstacleSpec s = one_flat_mirror(a, b, L);
  s.kind = ObstacleKind::two_flat_mirrors;
  return s;
}

ObstacleSpec ObstacleSpec::two_curved_mirrors(double l1, double b) {
  ObstacleSpec s;
  s.kind = ObstacleKind::two_curved_mirrors;
  s.l1 = l1;
  s.l2 = 2.0 * l1;
  s.b = b;
  s.theta_m = std::atan(2.0 * std::tan(std::numbers::pi / 3.0));
  return s;
}

namespace {

int pieces(double length, double h, int min_segments) {
  return std::max(min_segments, static_cast<int>(std::ceil(length / h - 1e-9)));
}

void append_side(std::vector<Point2>& loop, const Point2& from, const Point2& to, double h,
                 int min_segments) {
  const int n = pieces(distance(from, to), h, min_segments);
  for (int i = 0; i < n; ++i) loop.push_back(from + (static_cast<double>(i) / n) * (to - from));
}

std::vector<Point2> rectangle_loop(double x0, double y0, double x1, double y1, double h,
                                   int min_segments) {
  std::vector<Point2> loop;
  append_side(loop, {x0, y0}, {x1, y0}, h, min_segments);
  append_side(loop, {x1, y0}, {x1, y1}, h, min_segments);
  append_side(loop, {x1, y1}, {x0, y1}, h, min_segments);
  append_side(loop, {x0, y1}, {x0, y0}, h, min_segments);
  return loop;
}

// Right curved mirror: band between the elliptic arc |t| <= t_m and its
// outward normal offset by b. Mirrored in x for the left one.
std::vector<Point2> curved_mirror_loop(const ObstacleSpec& s, double h, int min_segments,
                                       double side) {
  const double t_m = std::atan(std::tan(s.theta_m) * s.l1 / s.l2);
  auto inner = [&](double t) { return Point2{s.l1 * std::cos(t), s.l2 * std::sin(t)}; };
  auto outer = [&](double t) {
    const Point2 n{s.l2 * std::cos(t), s.l1 * std::sin(t)};
    return inner(t) + (s.b / norm(n)) * n;
  };
  // Arc length estimate on the outer curve sets the resolution of both arcs.
  double arc = 0.0;
  const int probe = 256;
  for (int i = 0; i < probe; ++i) {
    const double ta = -t_m + 2.0 * t_m * i / probe;
    const double tb = -t_m + 2.0 * t_m * (i + 1) / probe;
    arc += distance(outer(ta), outer(tb));
  }
  const int n_arc = pieces(arc, h, min_segments);
  const int n_cap = pieces(s.b, h, min_segments);
  std::vector<Point2> loop;
  for (int i = 0; i < n_arc; ++i) loop.push_back(outer(-t_m + 2.0 * t_m * i / n_arc));
  append_side(loop, outer(t_m), inner(t_m), h, n_cap);
  for (int i = 0; i < n_arc; ++i) loop.push_back(inner(t_m - 2.0 * t_m * i / n_arc));
  append_side(loop, inner(-t_m), outer(-t_m), h, n_cap);
  if (side < 0) {
    for (auto& p : loop) p.x = -p.x;
    std::reverse(loop.begin(), loop.end());
  }
  return loop;
}

double polygon_area(const std::vector<Point2>& loop) {
  double a = 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) a += cross(loop[i], loop[(i + 1) % loop.size()]);
  return 0.5 * std::abs(a);
}

}  // namespace

std::vector<std::vector<Point2>> obstacle_polygons(const ObstacleSpec& s, double h,
                                                   int min_segments) {
  std::vector<std::vector<Point2>> loops;
  switch (s.kind) {
    case ObstacleKind::none:
      break;
    case ObstacleKind::two_flat_mirrors:
      loops.push_back(rectangle_loop(-0.5 * (s.L + s.b), -0.5 * s.a, -0.5 * (s.L - s.b),
                                     0.5 * s.a, h, min_segments));
      [[fallthrough]];
    case ObstacleKind::one_flat_mirror:
      loops.push_back(rectangle_loop(0.5 * (s.L - s.b), -0.5 * s.a, 0.5 * (s.L + s.b), 0.5 * s.a,
                                     h, min_segments));
      break;
    case ObstacleKind::two_curved_mirrors:
      loops.push_back(curved_mirror_loop(s, h, min_segments, -1.0));
      loops.push_back(curved_mirror_loop(s, h, min_segments, 1.0));
      break;
  }
  return loops;
}

double obstacle_area(const ObstacleSpec& s) {
  double area = 0.0;
  for (const auto& loop : obstacle_polygons(s, 1e-3, 64)) area += polygon_area(loop);
  return area;
}

bool point_in_polygon(const std::vector<Point2>& polygon, const Point2& p) {
  bool in = false;
  const std::size_t n = polygon.size();
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2& a = polygon[i];
    const Point2& b = polygon[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x)
      in = !in;
  }
  return in;
}

void validate(const GeometrySpec& spec) {
  if (spec.kind != GeometryKind::disk_with_obstacle) {
    if (!(spec.extents.width() > 0 && spec.extents.height() > 0))
      throw MeshError("geometry: degenerate rectangle extents");
    return;
  }
  if (!(spec.inner_radius > 0 && spec.outer_radius > spec.inner_radius))
    throw MeshError("geometry: need 0 < inner_radius < outer_radius");
  if (!(spec.pml_inner_radius > 0 && spec.pml_inner_radius < spec.outer_radius))
    throw MeshError("geometry: pml_inner_radius must be below the outer radius");
  const auto& o = spec.obstacle;
  switch (o.kind) {
    case ObstacleKind::none:
      return;
    case ObstacleKind::one_flat_mirror:
    case ObstacleKind::two_flat_mirrors:
      if (!(o.a > 0 && o.b > 0 && o.L > o.b))
        throw MeshError("geometry: flat mirrors need a > 0 and L > b > 0");
      break;
    case ObstacleKind::two_curved_mirrors:
      if (!(o.l1 > 0 && o.l2 > 0 && o.b > 0 && o.theta_m > 0 && o.theta_m < std::numbers::pi / 2))
        throw MeshError("geometry: invalid curved mirror parameters");
      break;
  }
  for (const auto& loop : obstacle_polygons(o, 0.01))
    for (const auto& p : loop)
      if (norm(p) >= std::min(spec.inner_radius, spec.pml_inner_radius))
        throw MeshError("geometry: obstacle intersects the PML annulus");
}

ObstacleKind parse_obstacle_kind(const std::string& name) {
  if (name == "none") return ObstacleKind::none;
  if (name == "one_flat_mirror") return ObstacleKind::one_flat_mirror;
  if (name == "two_flat_mirrors") return ObstacleKind::two_flat_mirrors;
  if (name == "two_curved_mirrors") return ObstacleKind::two_curved_mirrors;
  throw MeshError("unknown obstacle kind: " + name);
}

std::string to_string(ObstacleKind kind) {
  switch (kind) {
    case ObstacleKind::none: return "none";
    case ObstacleKind::one_flat_mirror: return "one_flat_mirror";
    case ObstacleKind::two_flat_mirrors: return "two_flat_mirrors";
    case ObstacleKind::two_curved_mirrors: return "two_curved_mirrors";
  }
  return "none";
}

GeometryKind parse_geometry_kind(const std::string& name) {
  if (name == "rect_two_region") return GeometryKind::rect_two_region;
  if (name == "rect_uniform") return GeometryKind::rect_uniform;
  if (name == "disk_with_obstacle") return GeometryKind::disk_with_obstacle;
  throw MeshError("unknown geometry kind: " + name);
}

std::string to_string(GeometryKind kind) {
  switch (kind) {
    case GeometryKind::rect_two_region: return "rect_two_region";
    case GeometryKind::rect_uniform: return "rect_uniform";
    case GeometryKind::disk_with_obstacle: return "disk_with_obstacle";
  }
  return "disk_with_obstacle";
}

}  // namespace helmfem
