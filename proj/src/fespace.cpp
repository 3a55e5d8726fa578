#include "helmfem/fespace.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include <Eigen/LU>

namespace helmfem {

ReferenceElement::ReferenceElement(int degree) : degree_(degree) {
  if (degree < 1 || degree > 4)
    throw std::invalid_argument("Lagrange degree must be in 1..4, got " + std::to_string(degree));
  const int p = degree;
  const double vx[3] = {0.0, 1.0, 0.0};
  const double vy[3] = {0.0, 0.0, 1.0};
  for (int i = 0; i < 3; ++i) {
    node_xi_.push_back(vx[i]);
    node_eta_.push_back(vy[i]);
  }
  for (int e = 0; e < 3; ++e) {
    const int a = e, b = (e + 1) % 3;
    for (int j = 1; j < p; ++j) {
      const double s = static_cast<double>(j) / p;
      node_xi_.push_back(vx[a] + s * (vx[b] - vx[a]));
      node_eta_.push_back(vy[a] + s * (vy[b] - vy[a]));
    }
  }
  for (int j = 1; j < p; ++j)
    for (int i = 1; i + j < p; ++i) {
      node_xi_.push_back(static_cast<double>(i) / p);
      node_eta_.push_back(static_cast<double>(j) / p);
    }
  for (int total = 0; total <= p; ++total)
    for (int b = 0; b <= total; ++b) exponents_.push_back({total - b, b});

  const int n = num_basis();
  Eigen::MatrixXd vandermonde(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      vandermonde(j, k) =
          std::pow(node_xi_[j], exponents_[k][0]) * std::pow(node_eta_[j], exponents_[k][1]);
  coeffs_ = vandermonde.transpose().inverse();
}

void ReferenceElement::evaluate(double xi, double eta, double* values, double* grads) const {
  const int n = num_basis();
  double px[5], py[5];
  px[0] = py[0] = 1.0;
  for (int i = 1; i <= degree_; ++i) {
    px[i] = px[i - 1] * xi;
    py[i] = py[i - 1] * eta;
  }
  double m[15], mx[15], my[15];
  for (int k = 0; k < n; ++k) {
    const int a = exponents_[k][0], b = exponents_[k][1];
    m[k] = px[a] * py[b];
    mx[k] = a > 0 ? a * px[a - 1] * py[b] : 0.0;
    my[k] = b > 0 ? b * px[a] * py[b - 1] : 0.0;
  }
  for (int i = 0; i < n; ++i) {
    double v = 0.0, gx = 0.0, gy = 0.0;
    for (int k = 0; k < n; ++k) {
      const double c = coeffs_(i, k);
      v += c * m[k];
      gx += c * mx[k];
      gy += c * my[k];
    }
    values[i] = v;
    if (grads) {
      grads[2 * i] = gx;
      grads[2 * i + 1] = gy;
    }
  }
}

Tabulation tabulate(const ReferenceElement& ref, const QuadratureRule& rule) {
  Tabulation t;
  t.nq = static_cast<int>(rule.size());
  t.nb = ref.num_basis();
  t.phi.resize(t.nq * t.nb);
  t.dxi.resize(t.nq * t.nb);
  t.deta.resize(t.nq * t.nb);
  std::vector<double> g(2 * t.nb);
  for (int q = 0; q < t.nq; ++q) {
    ref.evaluate(rule.xi[q], rule.eta[q], &t.phi[q * t.nb], g.data());
    for (int i = 0; i < t.nb; ++i) {
      t.dxi[q * t.nb + i] = g[2 * i];
      t.deta[q * t.nb + i] = g[2 * i + 1];
    }
  }
  return t;
}

void edge_basis(int degree, double s, double* values) {
  double nodes[5];
  nodes[0] = 0.0;
  nodes[1] = 1.0;
  for (int j = 1; j < degree; ++j) nodes[j + 1] = static_cast<double>(j) / degree;
  for (int i = 0; i <= degree; ++i) {
    double v = 1.0;
    for (int j = 0; j <= degree; ++j)
      if (j != i) v *= (s - nodes[j]) / (nodes[i] - nodes[j]);
    values[i] = v;
  }
}

ElementMap::ElementMap(const std::array<Point2, 3>& c) : v0(c[0]) {
  j00 = c[1].x - c[0].x;
  j01 = c[2].x - c[0].x;
  j10 = c[1].y - c[0].y;
  j11 = c[2].y - c[0].y;
  det = j00 * j11 - j01 * j10;
  i00 = j11 / det;
  i01 = -j01 / det;
  i10 = -j10 / det;
  i11 = j00 / det;
}

PointLocator::PointLocator(const Mesh& mesh) : mesh_(&mesh) {
  const auto& verts = mesh.vertices();
  if (verts.empty()) return;
  double x1 = verts[0].x, y1 = verts[0].y;
  x0_ = x1;
  y0_ = y1;
  for (const auto& v : verts) {
    x0_ = std::min(x0_, v.x);
    y0_ = std::min(y0_, v.y);
    x1 = std::max(x1, v.x);
    y1 = std::max(y1, v.y);
  }
  const std::size_t nt = mesh.num_triangles();
  const double w = std::max(x1 - x0_, 1e-300), h = std::max(y1 - y0_, 1e-300);
  cell_ = std::max(std::sqrt(w * h / std::max<std::size_t>(nt, 1)) * 1.5, 1e-300);
  nx_ = std::max(1, static_cast<int>(std::ceil(w / cell_)));
  ny_ = std::max(1, static_cast<int>(std::ceil(h / cell_)));
  std::vector<std::array<int, 4>> boxes(nt);
  std::vector<int> counts(static_cast<std::size_t>(nx_) * ny_ + 1, 0);
  auto clampx = [&](double x) {
    return std::clamp(static_cast<int>(std::floor((x - x0_) / cell_)), 0, nx_ - 1);
  };
  auto clampy = [&](double y) {
    return std::clamp(static_cast<int>(std::floor((y - y0_) / cell_)), 0, ny_ - 1);
  };
  for (std::size_t t = 0; t < nt; ++t) {
    const auto c = mesh.corners(t);
    const double bx0 = std::min({c[0].x, c[1].x, c[2].x}), bx1 = std::max({c[0].x, c[1].x, c[2].x});
    const double by0 = std::min({c[0].y, c[1].y, c[2].y}), by1 = std::max({c[0].y, c[1].y, c[2].y});
    boxes[t] = {clampx(bx0), clampx(bx1), clampy(by0), clampy(by1)};
    for (int j = boxes[t][2]; j <= boxes[t][3]; ++j)
      for (int i = boxes[t][0]; i <= boxes[t][1]; ++i) ++counts[j * nx_ + i + 1];
  }
  for (std::size_t i = 1; i < counts.size(); ++i) counts[i] += counts[i - 1];
  start_ = counts;
  items_.resize(counts.back());
  for (std::size_t t = 0; t < nt; ++t)
    for (int j = boxes[t][2]; j <= boxes[t][3]; ++j)
      for (int i = boxes[t][0]; i <= boxes[t][1]; ++i) items_[counts[j * nx_ + i]++] = t;
}

Location PointLocator::locate(const Point2& p) const {
  Location loc;
  if (!mesh_ || !is_finite(p)) return loc;
  const int i = static_cast<int>(std::floor((p.x - x0_) / cell_));
  const int j = static_cast<int>(std::floor((p.y - y0_) / cell_));
  // Points exactly on the far bounding-box side land in the last cell.
  const int ci = std::clamp(i, 0, nx_ - 1), cj = std::clamp(j, 0, ny_ - 1);
  if (std::abs(ci - i) > 1 || std::abs(cj - j) > 1) return loc;
  const int cell = cj * nx_ + ci;
  constexpr double tol = 1e-12;
  for (int s = start_[cell]; s < start_[cell + 1]; ++s) {
    const int t = items_[s];
    const ElementMap map(mesh_->corners(t));
    const Point2 d = p - map.v0;
    const double xi = map.i00 * d.x + map.i01 * d.y;
    const double eta = map.i10 * d.x + map.i11 * d.y;
    if (xi >= -tol && eta >= -tol && xi + eta <= 1.0 + tol) {
      loc.triangle = t;
      loc.xi = xi;
      loc.eta = eta;
      return loc;
    }
  }
  return loc;
}

FemSpace::FemSpace(std::shared_ptr<const Mesh> mesh, int degree)
    : mesh_(std::move(mesh)), ref_(degree) {
  if (!mesh_ || mesh_->empty()) throw std::invalid_argument("FemSpace: empty mesh");
  const Mesh& m = *mesh_;
  topo_ = build_topology(m);
  const int p = degree;
  const int nb = ref_.num_basis();
  const int nv = static_cast<int>(m.num_vertices());
  const int ne = static_cast<int>(topo_.edges.size());
  const int nt = static_cast<int>(m.num_triangles());
  const int n_edge = p - 1;
  const int n_int = (p - 1) * (p - 2) / 2;
  const int ndofs = nv + n_edge * ne + n_int * nt;
  coords_.assign(ndofs, Point2{});
  elem_dofs_.assign(static_cast<std::size_t>(nt) * nb, -1);

  for (int t = 0; t < nt; ++t) {
    const auto& v = m.triangles()[t].v;
    int* dofs = &elem_dofs_[static_cast<std::size_t>(t) * nb];
    for (int i = 0; i < 3; ++i) dofs[i] = v[i];
    for (int e = 0; e < 3; ++e) {
      const int g = topo_.triangle_edges[t][e];
      const bool forward = v[e] < v[(e + 1) % 3];
      for (int j = 0; j < n_edge; ++j)
        dofs[3 + e * n_edge + j] = nv + g * n_edge + (forward ? j : n_edge - 1 - j);
    }
    for (int j = 0; j < n_int; ++j) dofs[3 + 3 * n_edge + j] = nv + n_edge * ne + t * n_int + j;
    const ElementMap map(m.corners(t));
    for (int i = 0; i < nb; ++i) coords_[dofs[i]] = map.to_physical(ref_.node_xi()[i], ref_.node_eta()[i]);
  }
  for (int i = 0; i < nv; ++i) coords_[i] = m.vertices()[i];

  std::unordered_map<long long, std::array<int, 2>> directed;
  directed.reserve(3 * static_cast<std::size_t>(nt));
  for (int t = 0; t < nt; ++t) {
    const auto& v = m.triangles()[t].v;
    for (int e = 0; e < 3; ++e)
      directed[static_cast<long long>(v[e]) * nv + v[(e + 1) % 3]] = {t, e};
  }
  bedge_owner_.reserve(m.boundary_edges().size());
  for (const auto& be : m.boundary_edges()) {
    auto it = directed.find(static_cast<long long>(be.v[0]) * nv + be.v[1]);
    if (it == directed.end()) it = directed.find(static_cast<long long>(be.v[1]) * nv + be.v[0]);
    if (it == directed.end()) throw MeshError("FemSpace: boundary edge not on any triangle");
    bedge_owner_.push_back(it->second);
  }
  locator_ = PointLocator(m);
}

std::vector<int> FemSpace::boundary_edge_dofs(std::size_t e) const {
  const auto& be = mesh_->boundary_edges()[e];
  const auto [t, le] = bedge_owner_[e];
  const int nb = ref_.num_basis();
  const int n_edge = degree() - 1;
  const int* dofs = &elem_dofs_[static_cast<std::size_t>(t) * nb];
  const bool same = mesh_->triangles()[t].v[le] == be.v[0];
  std::vector<int> out = {be.v[0], be.v[1]};
  for (int j = 0; j < n_edge; ++j)
    out.push_back(dofs[3 + le * n_edge + (same ? j : n_edge - 1 - j)]);
  return out;
}

std::vector<int> FemSpace::boundary_dofs(int tag) const {
  std::vector<int> out;
  for (std::size_t e = 0; e < mesh_->boundary_edges().size(); ++e)
    if (mesh_->boundary_edges()[e].tag == tag) {
      const auto d = boundary_edge_dofs(e);
      out.insert(out.end(), d.begin(), d.end());
    }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::shared_ptr<const FemSpace> build_fem_space(std::shared_ptr<const Mesh> mesh, int degree) {
  return std::make_shared<const FemSpace>(std::move(mesh), degree);
}

std::shared_ptr<const FemSpace> build_fem_space(Mesh mesh, int degree) {
  return build_fem_space(std::make_shared<const Mesh>(std::move(mesh)), degree);
}

FemField::FemField(std::shared_ptr<const FemSpace> s, ComplexVector c)
    : space(std::move(s)), coeffs(std::move(c)) {
  if (!space) throw std::invalid_argument("FemField: null space");
  if (coeffs.size() != space->num_dofs())
    throw std::invalid_argument("FemField: coefficient length does not match the space");
}

FemField interpolate(std::shared_ptr<const FemSpace> space, const ComplexFunction& f) {
  ComplexVector c(space->num_dofs());
  const auto& x = space->dof_coordinates();
  for (int i = 0; i < space->num_dofs(); ++i) c[i] = f(x[i]);
  return FemField(std::move(space), std::move(c));
}

ValueGradient evaluate_in_element(const FemField& field, int triangle, double xi, double eta) {
  const FemSpace& s = *field.space;
  const int nb = s.dofs_per_element();
  double phi[15], g[30];
  s.reference().evaluate(xi, eta, phi, g);
  const ElementMap map(s.mesh().corners(triangle));
  const int* dofs = s.element_dofs(triangle);
  ValueGradient out{0.0, {0.0, 0.0}};
  for (int i = 0; i < nb; ++i) {
    const cplx c = field.coeffs[dofs[i]];
    const Point2 gp = map.gradient(g[2 * i], g[2 * i + 1]);
    out.value += c * phi[i];
    out.grad[0] += c * gp.x;
    out.grad[1] += c * gp.y;
  }
  return out;
}

namespace {

Location locate_or_throw(const FemSpace& s, const Point2& pt) {
  const Location loc = s.locator().locate(pt);
  if (loc.triangle < 0) {
    std::ostringstream msg;
    msg << std::setprecision(17) << "point (" << pt.x << ", " << pt.y << ") is outside the mesh";
    throw OutOfDomainError(msg.str());
  }
  return loc;
}

}  // namespace

cplx evaluate_field(const FemField& field, const Point2& pt) {
  return evaluate_field_gradient(field, pt).value;
}

ValueGradient evaluate_field_gradient(const FemField& field, const Point2& pt) {
  const Location loc = locate_or_throw(*field.space, pt);
  return evaluate_in_element(field, loc.triangle, loc.xi, loc.eta);
}

void write_field_csv(std::ostream& out, const FemField& field) {
  out << "x,y,re,im\n" << std::setprecision(17);
  const auto& x = field.space->dof_coordinates();
  for (int i = 0; i < field.space->num_dofs(); ++i)
    out << x[i].x << ',' << x[i].y << ',' << field.coeffs[i].real() << ',' << field.coeffs[i].imag()
        << '\n';
}

void write_field_csv_file(const std::string& path, const FemField& field) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_field_csv(out, field);
}

FemField read_field_csv(std::istream& in, std::shared_ptr<const FemSpace> space) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,re,im", 0) != 0)
    throw std::runtime_error("field csv: missing header");
  const auto& x = space->dof_coordinates();
  ComplexVector c(space->num_dofs());
  int i = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (i >= space->num_dofs()) throw std::runtime_error("field csv: more rows than DOFs");
    double v[4];
    std::istringstream ss(line);
    for (double& d : v) {
      std::string tok;
      if (!std::getline(ss, tok, ',')) throw std::runtime_error("field csv: short row " + line);
      d = std::stod(tok);
    }
    if (std::abs(v[0] - x[i].x) > 1e-9 || std::abs(v[1] - x[i].y) > 1e-9)
      throw std::runtime_error("field csv: row " + std::to_string(i) + " does not match the DOF layout");
    c[i++] = {v[2], v[3]};
  }
  if (i != space->num_dofs()) throw std::runtime_error("field csv: fewer rows than DOFs");
  return FemField(std::move(space), std::move(c));
}

FemField read_field_csv_file(const std::string& path, std::shared_ptr<const FemSpace> space) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return read_field_csv(in, std::move(space));
}

}  // namespace helmfem
