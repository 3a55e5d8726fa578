#include "helmfem/triangulator.hpp"

#include "helmfem/geometry.hpp"

#include <algorithm>
#include <array>
#include <cstdint>
#include <deque>
#include <string>
#include <unordered_map>
#include <utility>

namespace helmfem {

void Pslg::add_polyline(int first, int last, int pieces, int tag) {
  const Point2 from = points.at(first);
  const Point2 to = points.at(last);
  int prev = first;
  for (int i = 1; i < pieces; ++i) {
    const int next = add_point(from + (static_cast<double>(i) / pieces) * (to - from));
    segments.push_back({prev, next, tag});
    prev = next;
  }
  segments.push_back({prev, last, tag});
}

void Pslg::add_loop(const std::vector<Point2>& loop, int tag) {
  const int base = static_cast<int>(points.size());
  for (const auto& p : loop) add_point(p);
  const int n = static_cast<int>(loop.size());
  for (int i = 0; i < n; ++i) segments.push_back({base + i, base + (i + 1) % n, tag});
}

namespace {

constexpr int kNone = -1;

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

double incircle(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  const double alift = adx * adx + ady * ady;
  const double blift = bdx * bdx + bdy * bdy;
  const double clift = cdx * cdx + cdy * cdy;
  return alift * (bdx * cdy - bdy * cdx) + blift * (cdx * ady - cdy * adx) +
         clift * (adx * bdy - ady * bdx);
}

Point2 circumcenter(const Point2& a, const Point2& b, const Point2& c) {
  const Point2 ba = b - a;
  const Point2 ca = c - a;
  const double d = 2.0 * cross(ba, ca);
  const double b2 = dot(ba, ba);
  const double c2 = dot(ca, ca);
  return a + Point2{(ca.y * b2 - ba.y * c2) / d, (ba.x * c2 - ca.x * b2) / d};
}

struct Tri {
  std::array<int, 3> v{};
  std::array<int, 3> nb{kNone, kNone, kNone};  // across the edge opposite v[i]
  bool alive = true;
};

struct Hole {
  std::vector<Point2> polygon;
  Rect box;
};

class Refiner {
 public:
  Refiner(const Pslg& pslg, SizeField size, RefinementOptions options)
      : size_(std::move(size)), opt_(options) {
    for (const auto& h : pslg.holes) {
      Hole hole{h, {}};
      hole.box = {h.front().x, h.front().y, h.front().x, h.front().y};
      for (const auto& p : h) {
        hole.box.x0 = std::min(hole.box.x0, p.x);
        hole.box.x1 = std::max(hole.box.x1, p.x);
        hole.box.y0 = std::min(hole.box.y0, p.y);
        hole.box.y1 = std::max(hole.box.y1, p.y);
      }
      holes_.push_back(std::move(hole));
    }
    build_super_triangle(pslg.points);
    insert_input_points(pslg);
    recover_segments(pslg);
  }

  void refine();
  Mesh extract(const RegionFunction& region) const;

 private:
  // --- basic topology -------------------------------------------------
  void build_super_triangle(const std::vector<Point2>& points);
  int new_triangle(const std::array<int, 3>& v);
  bool is_super(int v) const { return v < 3; }
  int locate(const Point2& p, int hint) const;
  /// Inserts p; returns its vertex index, an existing vertex index if p
  /// duplicates one, or kNone when no valid cavity could be formed.
  int insert(const Point2& p, int hint, std::uint64_t crossable = 0);
  bool find_edge(int a, int b, int& tri, int& slot) const;
  bool has_edge(int a, int b) const {
    int t = 0, s = 0;
    return find_edge(a, b, t, s);
  }

  // --- domain and quality ---------------------------------------------
  bool inside(int t) const;
  bool is_bad(int t) const;
  bool encroached(std::uint64_t key) const;
  void split_segment(std::uint64_t key);
  void recover_segments(const Pslg& pslg);
  void insert_input_points(const Pslg& pslg);
  /// Walks the straight line from the centroid of t to c; returns the key of
  /// the first constrained edge crossed, or 0.
  std::uint64_t blocking_segment(int t, const Point2& c, int& end_tri) const;

  Point2 centroid(int t) const {
    const auto& v = tris_[t].v;
    return (1.0 / 3.0) * (pts_[v[0]] + pts_[v[1]] + pts_[v[2]]);
  }

  SizeField size_;
  RefinementOptions opt_;
  std::vector<Hole> holes_;
  std::vector<Point2> pts_;
  std::vector<Tri> tris_;
  std::vector<int> free_;
  std::vector<int> vert_tri_;
  std::unordered_map<std::uint64_t, int> constrained_;  // key -> tag
  double scale_ = 1.0;

  // scratch buffers reused by insert()
  std::vector<int> cavity_;
  std::vector<int> mark_;
  int stamp_ = 0;
  std::vector<int> created_;
  std::vector<int> input_index_;
  std::vector<int> rim_vertices_;
};

void Refiner::build_super_triangle(const std::vector<Point2>& points) {
  if (points.size() < 3) throw MeshError("triangulate: need at least three input points");
  Rect box{points[0].x, points[0].y, points[0].x, points[0].y};
  for (const auto& p : points) {
    if (!is_finite(p)) throw MeshError("triangulate: non-finite input point");
    box.x0 = std::min(box.x0, p.x);
    box.x1 = std::max(box.x1, p.x);
    box.y0 = std::min(box.y0, p.y);
    box.y1 = std::max(box.y1, p.y);
  }
  scale_ = std::max(box.width(), box.height());
  if (!(scale_ > 0)) throw MeshError("triangulate: degenerate input extents");
  const Point2 c{0.5 * (box.x0 + box.x1), 0.5 * (box.y0 + box.y1)};
  const double r = 20.0 * scale_;
  pts_ = {c + Point2{-r, -r}, c + Point2{r, -r}, c + Point2{0.0, r}};
  vert_tri_ = {0, 0, 0};
  tris_.push_back(Tri{{0, 1, 2}, {kNone, kNone, kNone}, true});
}

int Refiner::new_triangle(const std::array<int, 3>& v) {
  int id;
  if (!free_.empty()) {
    id = free_.back();
    free_.pop_back();
    tris_[id] = Tri{v, {kNone, kNone, kNone}, true};
  } else {
    id = static_cast<int>(tris_.size());
    tris_.push_back(Tri{v, {kNone, kNone, kNone}, true});
  }
  return id;
}

int Refiner::locate(const Point2& p, int hint) const {
  int t = (hint >= 0 && hint < static_cast<int>(tris_.size()) && tris_[hint].alive) ? hint : kNone;
  if (t == kNone) {
    for (std::size_t i = 0; i < tris_.size(); ++i)
      if (tris_[i].alive) {
        t = static_cast<int>(i);
        break;
      }
  }
  std::uint32_t rng = 2463534242u;
  const std::size_t limit = 4 * tris_.size() + 100;
  for (std::size_t step = 0; step < limit; ++step) {
    const auto& tri = tris_[t];
    rng ^= rng << 13;
    rng ^= rng >> 17;
    rng ^= rng << 5;
    const int start = static_cast<int>(rng % 3);
    int next = kNone;
    bool outside = false;
    for (int k = 0; k < 3; ++k) {
      const int i = (start + k) % 3;
      const Point2& a = pts_[tri.v[(i + 1) % 3]];
      const Point2& b = pts_[tri.v[(i + 2) % 3]];
      if (orient2d(a, b, p) < 0.0) {
        next = tri.nb[i];
        outside = true;
        break;
      }
    }
    if (!outside) return t;
    if (next == kNone) return kNone;
    t = next;
  }
  // Fallback: exhaustive search.
  for (std::size_t i = 0; i < tris_.size(); ++i) {
    if (!tris_[i].alive) continue;
    const auto& v = tris_[i].v;
    if (orient2d(pts_[v[0]], pts_[v[1]], p) >= 0 && orient2d(pts_[v[1]], pts_[v[2]], p) >= 0 &&
        orient2d(pts_[v[2]], pts_[v[0]], p) >= 0)
      return static_cast<int>(i);
  }
  return kNone;
}

bool Refiner::find_edge(int a, int b, int& tri, int& slot) const {
  const int start = vert_tri_[a];
  int t = start;
  for (int guard = 0; guard < 10000; ++guard) {
    const auto& T = tris_[t];
    int i = 0;
    while (T.v[i] != a) ++i;
    if (T.v[(i + 1) % 3] == b) {
      tri = t;
      slot = (i + 2) % 3;
      return true;
    }
    if (T.v[(i + 2) % 3] == b) {
      tri = t;
      slot = (i + 1) % 3;
      return true;
    }
    const int next = T.nb[(i + 1) % 3];
    if (next == kNone || next == start) break;
    t = next;
  }
  // Hull vertex: rotate the other way.
  t = start;
  for (int guard = 0; guard < 10000; ++guard) {
    const auto& T = tris_[t];
    int i = 0;
    while (T.v[i] != a) ++i;
    if (T.v[(i + 1) % 3] == b) {
      tri = t;
      slot = (i + 2) % 3;
      return true;
    }
    if (T.v[(i + 2) % 3] == b) {
      tri = t;
      slot = (i + 1) % 3;
      return true;
    }
    const int next = T.nb[(i + 2) % 3];
    if (next == kNone || next == start) break;
    t = next;
  }
  return false;
}

int Refiner::insert(const Point2& p, int hint, std::uint64_t crossable) {
  const int t0 = locate(p, hint);
  if (t0 == kNone) return kNone;
  {
    const auto& v = tris_[t0].v;
    const double tol = 1e-12 * scale_;
    for (int i = 0; i < 3; ++i)
      if (distance(pts_[v[i]], p) <= tol) return v[i];
  }
  if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + 1024, 0);
  ++stamp_;
  cavity_.clear();
  cavity_.push_back(t0);
  mark_[t0] = stamp_;
  for (std::size_t head = 0; head < cavity_.size(); ++head) {
    const Tri& T = tris_[cavity_[head]];
    for (int i = 0; i < 3; ++i) {
      const int n = T.nb[i];
      if (n == kNone || mark_[n] == stamp_) continue;
      const std::uint64_t key = edge_key(T.v[(i + 1) % 3], T.v[(i + 2) % 3]);
      if (key != crossable && constrained_.count(key)) continue;
      const auto& nv = tris_[n].v;
      if (incircle(pts_[nv[0]], pts_[nv[1]], pts_[nv[2]], p) > 0.0) {
        mark_[n] = stamp_;
        cavity_.push_back(n);
      }
    }
  }

  // Repair: every cavity boundary edge must see p strictly on its left, and
  // no vertex may be swallowed by the cavity.
  const int out_stamp = ++stamp_;  // marks triangles removed from the cavity
  auto in_cavity = [&](int t) { return t != kNone && mark_[t] == out_stamp - 1; };
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t c = 0; c < cavity_.size() && !changed; ++c) {
      const int t = cavity_[c];
      const Tri& T = tris_[t];
      for (int i = 0; i < 3; ++i) {
        if (in_cavity(T.nb[i])) continue;
        const Point2& a = pts_[T.v[(i + 1) % 3]];
        const Point2& b = pts_[T.v[(i + 2) % 3]];
        const Point2 ab = b - a;
        if (orient2d(a, b, p) <= 1e-13 * dot(ab, ab)) {
          if (t == t0) return kNone;
          mark_[t] = out_stamp;
          cavity_.erase(cavity_.begin() + static_cast<std::ptrdiff_t>(c));
          changed = true;
          break;
        }
      }
    }
    if (changed) continue;
    // Vertices interior to the cavity: every vertex must lie on a boundary edge.
    rim_vertices_.clear();
    for (int t : cavity_) {
      const Tri& T = tris_[t];
      for (int i = 0; i < 3; ++i) {
        if (!in_cavity(T.nb[i])) {
          rim_vertices_.push_back(T.v[(i + 1) % 3]);
          rim_vertices_.push_back(T.v[(i + 2) % 3]);
        }
      }
    }
    std::sort(rim_vertices_.begin(), rim_vertices_.end());
    auto on_rim = [&](int v) {
      return std::binary_search(rim_vertices_.begin(), rim_vertices_.end(), v);
    };
    for (std::size_t c = 0; c < cavity_.size() && !changed; ++c) {
      const int t = cavity_[c];
      for (int i = 0; i < 3; ++i) {
        if (!on_rim(tris_[t].v[i])) {
          if (t == t0) return kNone;
          mark_[t] = out_stamp;
          cavity_.erase(cavity_.begin() + static_cast<std::ptrdiff_t>(c));
          changed = true;
          break;
        }
      }
    }
  }

  struct BoundaryEdgeRec {
    int a, b, outside;
  };
  std::vector<BoundaryEdgeRec> rim;
  for (int t : cavity_) {
    const Tri& T = tris_[t];
    for (int i = 0; i < 3; ++i)
      if (!in_cavity(T.nb[i])) rim.push_back({T.v[(i + 1) % 3], T.v[(i + 2) % 3], T.nb[i]});
  }
  for (int t : cavity_) {
    tris_[t].alive = false;
    free_.push_back(t);
  }

  const int pv = static_cast<int>(pts_.size());
  pts_.push_back(p);
  vert_tri_.push_back(kNone);

  created_.clear();
  std::unordered_map<int, int> by_start;
  std::unordered_map<int, int> by_end;
  for (const auto& e : rim) {
    const int id = new_triangle({e.a, e.b, pv});
    created_.push_back(id);
    tris_[id].nb[2] = e.outside;
    if (e.outside != kNone) {
      Tri& O = tris_[e.outside];
      for (int j = 0; j < 3; ++j)
        if (O.v[(j + 1) % 3] == e.b && O.v[(j + 2) % 3] == e.a) O.nb[j] = id;
    }
    by_start[e.a] = id;
    by_end[e.b] = id;
  }
  for (int id : created_) {
    Tri& T = tris_[id];
    T.nb[0] = by_start.at(T.v[1]);
    T.nb[1] = by_end.at(T.v[0]);
    vert_tri_[T.v[0]] = id;
    vert_tri_[T.v[1]] = id;
  }
  vert_tri_[pv] = created_.front();
  if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + 1024, 0);
  return pv;
}

void Refiner::insert_input_points(const Pslg& pslg) {
  // Serpentine row order keeps the location walks short.
  const std::size_t n = pslg.points.size();
  const double cell = scale_ / std::max(1.0, std::sqrt(static_cast<double>(n)));
  const Point2 origin = pts_[0];
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  auto row = [&](const Point2& p) { return static_cast<long>((p.y - origin.y) / cell); };
  std::sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) {
    const Point2& a = pslg.points[i];
    const Point2& b = pslg.points[j];
    const long ra = row(a), rb = row(b);
    if (ra != rb) return ra < rb;
    return (ra % 2 == 0) ? a.x < b.x : a.x > b.x;
  });
  input_index_.assign(n, kNone);
  int hint = 0;
  for (std::size_t i : order) {
    const int v = insert(pslg.points[i], hint);
    if (v == kNone) throw MeshError("triangulate: failed to insert input point");
    input_index_[i] = v;
    hint = vert_tri_[v];
  }
}

void Refiner::recover_segments(const Pslg& pslg) {
  struct Pending {
    int a, b, tag;
  };
  std::deque<Pending> queue;
  for (const auto& s : pslg.segments) {
    if (s.a < 0 || s.b < 0 || s.a >= static_cast<int>(pslg.points.size()) ||
        s.b >= static_cast<int>(pslg.points.size()))
      throw MeshError("triangulate: segment index out of range");
    queue.push_back({input_index_[s.a], input_index_[s.b], s.tag});
  }
  while (!queue.empty()) {
    const Pending s = queue.front();
    queue.pop_front();
    if (s.a == s.b) continue;
    if (has_edge(s.a, s.b)) {
      constrained_[edge_key(s.a, s.b)] = s.tag;
      continue;
    }
    const Point2 m = 0.5 * (pts_[s.a] + pts_[s.b]);
    if (distance(pts_[s.a], pts_[s.b]) < 1e-10 * scale_)
      throw MeshError("triangulate: segment recovery collapsed (crossing input segments?)");
    const int mv = insert(m, vert_tri_[s.a]);
    if (mv == kNone || mv == s.a || mv == s.b)
      throw MeshError("triangulate: segment recovery failed");
    queue.push_back({s.a, mv, s.tag});
    queue.push_back({mv, s.b, s.tag});
  }
}

bool Refiner::inside(int t) const {
  const auto& v = tris_[t].v;
  if (is_super(v[0]) || is_super(v[1]) || is_super(v[2])) return false;
  const Point2 c = centroid(t);
  for (const auto& h : holes_)
    if (h.box.contains(c) && point_in_polygon(h.polygon, c)) return false;
  return true;
}

bool Refiner::is_bad(int t) const {
  const auto& v = tris_[t].v;
  const Point2& a = pts_[v[0]];
  const Point2& b = pts_[v[1]];
  const Point2& c = pts_[v[2]];
  const double r = distance(circumcenter(a, b, c), a);
  const double shortest = std::min({distance(a, b), distance(b, c), distance(c, a)});
  const double h = size_(centroid(t));
  if (r > opt_.size_factor * h / std::sqrt(3.0)) return true;
  return r > opt_.max_radius_edge_ratio * shortest && shortest > 0.02 * h;
}

bool Refiner::encroached(std::uint64_t key) const {
  const int a = static_cast<int>(key >> 32);
  const int b = static_cast<int>(key & 0xffffffffu);
  int t = 0, slot = 0;
  if (!find_edge(a, b, t, slot)) return true;
  const Point2& pa = pts_[a];
  const Point2& pb = pts_[b];
  const double eps = 1e-12 * dot(pb - pa, pb - pa);
  auto apex_encroaches = [&](int tri) {
    if (tri == kNone || !inside(tri)) return false;
    for (int w : tris_[tri].v) {
      if (w == a || w == b) continue;
      return dot(pa - pts_[w], pb - pts_[w]) < -eps;
    }
    return false;
  };
  return apex_encroaches(t) || apex_encroaches(tris_[t].nb[slot]);
}

std::uint64_t Refiner::blocking_segment(int t, const Point2& c, int& end_tri) const {
  const Point2 q = centroid(t);
  int cur = t;
  const std::size_t limit = tris_.size() + 10;
  for (std::size_t step = 0; step < limit; ++step) {
    const Tri& T = tris_[cur];
    int exit = kNone;
    int fallback = kNone;
    for (int i = 0; i < 3; ++i) {
      const Point2& a = pts_[T.v[(i + 1) % 3]];
      const Point2& b = pts_[T.v[(i + 2) % 3]];
      if (orient2d(a, b, c) >= 0.0) continue;
      if (fallback == kNone) fallback = i;
      const double oa = orient2d(q, c, a);
      const double ob = orient2d(q, c, b);
      if ((oa <= 0.0 && ob >= 0.0) || (oa >= 0.0 && ob <= 0.0)) {
        exit = i;
        break;
      }
    }
    if (exit == kNone) exit = fallback;
    if (exit == kNone) {
      end_tri = cur;
      return 0;
    }
    const std::uint64_t key = edge_key(T.v[(exit + 1) % 3], T.v[(exit + 2) % 3]);
    if (constrained_.count(key)) return key;
    cur = T.nb[exit];
    if (cur == kNone) break;
  }
  end_tri = kNone;
  return 0;
}

Mesh Refiner::extract(const RegionFunction& region) const {
  std::vector<int> map(pts_.size(), kNone);
  std::vector<Point2> vertices;
  std::vector<Triangle> triangles;
  std::vector<double> targets;
  for (std::size_t t = 0; t < tris_.size(); ++t) {
    if (!tris_[t].alive || !inside(static_cast<int>(t))) continue;
    Triangle out;
    for (int i = 0; i < 3; ++i) {
      const int v = tris_[t].v[i];
      if (map[v] == kNone) {
        map[v] = static_cast<int>(vertices.size());
        vertices.push_back(pts_[v]);
      }
      out.v[i] = map[v];
    }
    const Point2 c = centroid(static_cast<int>(t));
    out.region = region(c);
    triangles.push_back(out);
    targets.push_back(size_(c));
  }
  std::vector<BoundaryEdge> edges;
  for (const auto& [key, tag] : constrained_) {
    if (tag <= 0) continue;
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    int t = 0, slot = 0;
    if (!find_edge(a, b, t, slot)) throw MeshError("triangulate: lost a boundary segment");
    int side = kNone;
    if (inside(t)) side = t;
    const int n = tris_[t].nb[slot];
    if (n != kNone && inside(n)) {
      if (side != kNone) continue;  // both sides meshed: not a boundary edge
      side = n;
    }
    if (side == kNone) continue;
    const auto& v = tris_[side].v;
    for (int i = 0; i < 3; ++i) {
      const int x = v[i], y = v[(i + 1) % 3];
      if ((x == a && y == b) || (x == b && y == a)) edges.push_back({{map[x], map[y]}, tag});
    }
  }
  std::sort(edges.begin(), edges.end(), [](const BoundaryEdge& l, const BoundaryEdge& r) {
    return l.v < r.v;
  });
  return Mesh(std::move(vertices), std::move(triangles), std::move(edges), std::move(targets));
}

void Refiner::refine() {
  struct QueuedTri {
    int id;
    std::array<int, 3> v;
  };
  std::deque<QueuedTri> tri_queue;
  std::deque<std::uint64_t> seg_queue;
  std::unordered_map<std::uint64_t, int> failed_splits;

  auto segment_length = [&](std::uint64_t key) {
    return distance(pts_[static_cast<int>(key >> 32)], pts_[static_cast<int>(key & 0xffffffffu)]);
  };
  auto segment_mid = [&](std::uint64_t key) {
    return 0.5 * (pts_[static_cast<int>(key >> 32)] + pts_[static_cast<int>(key & 0xffffffffu)]);
  };
  auto enqueue_new = [&](int pv) {
    for (int id : created_) {
      if (inside(id) && is_bad(id)) tri_queue.push_back({id, tris_[id].v});
      const std::uint64_t key = edge_key(tris_[id].v[0], tris_[id].v[1]);
      if (constrained_.count(key) && encroached(key)) seg_queue.push_back(key);
    }
    (void)pv;
  };
  auto split = [&](std::uint64_t key) {
    const auto it = constrained_.find(key);
    if (it == constrained_.end()) return false;
    if (segment_length(key) < 0.01 * size_(segment_mid(key))) return false;
    if (failed_splits.count(key)) return false;
    const int tag = it->second;
    const int a = static_cast<int>(key >> 32);
    const int b = static_cast<int>(key & 0xffffffffu);
    int t = 0, slot = 0;
    if (!find_edge(a, b, t, slot)) return false;
    const int mv = insert(0.5 * (pts_[a] + pts_[b]), t, key);
    if (mv == kNone || mv == a || mv == b || mv < static_cast<int>(pts_.size()) - 1) {
      failed_splits[key] = 1;
      return false;
    }
    constrained_.erase(key);
    const std::uint64_t k1 = edge_key(a, mv);
    const std::uint64_t k2 = edge_key(mv, b);
    constrained_[k1] = tag;
    constrained_[k2] = tag;
    enqueue_new(mv);
    if (encroached(k1)) seg_queue.push_back(k1);
    if (encroached(k2)) seg_queue.push_back(k2);
    return true;
  };

  for (std::size_t t = 0; t < tris_.size(); ++t)
    if (tris_[t].alive && inside(static_cast<int>(t)) && is_bad(static_cast<int>(t)))
      tri_queue.push_back({static_cast<int>(t), tris_[t].v});
  for (const auto& [key, tag] : constrained_)
    if (encroached(key)) seg_queue.push_back(key);
  std::sort(seg_queue.begin(), seg_queue.end());

  std::vector<std::uint64_t> hits;
  while (true) {
    while (!seg_queue.empty()) {
      const std::uint64_t key = seg_queue.front();
      seg_queue.pop_front();
      if (constrained_.count(key) && encroached(key)) split(key);
    }
    if (tri_queue.empty()) break;
    if (pts_.size() > opt_.max_vertices)
      throw MeshError("triangulate: vertex budget exceeded (" + std::to_string(pts_.size()) + ")");
    const QueuedTri q = tri_queue.front();
    tri_queue.pop_front();
    if (!tris_[q.id].alive || tris_[q.id].v != q.v) continue;
    if (!inside(q.id) || !is_bad(q.id)) continue;
    const auto& v = tris_[q.id].v;
    const Point2 c = circumcenter(pts_[v[0]], pts_[v[1]], pts_[v[2]]);
    if (!is_finite(c)) continue;

    int end = kNone;
    const std::uint64_t blocker = blocking_segment(q.id, c, end);
    if (blocker != 0) {
      if (split(blocker)) tri_queue.push_back(q);
      continue;
    }
    if (end == kNone || !inside(end)) continue;

    // Segments on the rim of c's cavity that c would encroach.
    hits.clear();
    if (mark_.size() < tris_.size()) mark_.resize(tris_.size() + 1024, 0);
    ++stamp_;
    cavity_.clear();
    cavity_.push_back(end);
    mark_[end] = stamp_;
    for (std::size_t head = 0; head < cavity_.size(); ++head) {
      const Tri& T = tris_[cavity_[head]];
      for (int i = 0; i < 3; ++i) {
        const int a = T.v[(i + 1) % 3];
        const int b = T.v[(i + 2) % 3];
        const std::uint64_t key = edge_key(a, b);
        if (constrained_.count(key)) {
          const double eps = 1e-12 * dot(pts_[b] - pts_[a], pts_[b] - pts_[a]);
          if (dot(pts_[a] - c, pts_[b] - c) < -eps) hits.push_back(key);
          continue;
        }
        const int n = T.nb[i];
        if (n == kNone || mark_[n] == stamp_) continue;
        const auto& nv = tris_[n].v;
        if (incircle(pts_[nv[0]], pts_[nv[1]], pts_[nv[2]], c) > 0.0) {
          mark_[n] = stamp_;
          cavity_.push_back(n);
        }
      }
    }
    if (!hits.empty()) {
      bool any = false;
      for (auto key : hits) any = split(key) || any;
      if (any) tri_queue.push_back(q);
      continue;
    }
    const std::size_t before = pts_.size();
    const int pv = insert(c, end);
    if (pv == kNone || pts_.size() == before) continue;
    enqueue_new(pv);
  }
}

}  // namespace

Mesh triangulate(const Pslg& pslg, const SizeField& size, const RegionFunction& region,
                 const RefinementOptions& options) {
  Refiner refiner(pslg, size, options);
  refiner.refine();
  return refiner.extract(region);
}

}  // namespace helmfem
