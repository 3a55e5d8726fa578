#include "helmfem/assembly.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace helmfem {

namespace {

int volume_degree(const FemSpace& space, int requested) {
  return requested > 0 ? requested : 2 * space.degree() + 2;
}

struct PointCoefficients {
  std::array<cplx, 4> A;
  cplx c_inv2;
};

PointCoefficients coefficients_at(const FormSpec& form, const Point2& x) {
  PointCoefficients out{{1.0, 0.0, 0.0, 1.0}, 1.0};
  if (form.truncation == Truncation::pml && norm(x) > form.pml.r_inner) {
    const PmlCoefficients pc = pml_tensor_2d(form.pml, x);
    out.A = pc.A;
    out.c_inv2 = pc.c_inv2;
  } else {
    if (form.A) {
      const auto a = form.A(x);
      for (int i = 0; i < 4; ++i) out.A[i] = a[i];
    }
    if (form.c) {
      const double c = form.c(x);
      out.c_inv2 = 1.0 / (c * c);
    }
  }
  bool ok = std::isfinite(std::abs(out.c_inv2));
  for (const auto& v : out.A) ok = ok && std::isfinite(std::abs(v));
  if (!ok) throw std::runtime_error("assembly: non-finite coefficient");
  return out;
}

bool has_outer_boundary(const Mesh& mesh) {
  for (const auto& be : mesh.boundary_edges())
    if (be.tag == boundary::outer) return true;
  return false;
}

// Compressed column pattern from groups of mutually coupled DOFs.
ComplexSparseMatrix build_pattern(const FemSpace& space, const std::vector<int>& extra_group) {
  const int n = space.num_dofs();
  const int nb = space.dofs_per_element();
  const int nt = static_cast<int>(space.mesh().num_triangles());
  const int ng = nt + (extra_group.empty() ? 0 : 1);
  auto group = [&](int g, int& size) -> const int* {
    if (g < nt) {
      size = nb;
      return space.element_dofs(g);
    }
    size = static_cast<int>(extra_group.size());
    return extra_group.data();
  };
  std::vector<int> start(n + 1, 0);
  for (int g = 0; g < ng; ++g) {
    int size;
    const int* d = group(g, size);
    for (int i = 0; i < size; ++i) ++start[d[i] + 1];
  }
  for (int i = 0; i < n; ++i) start[i + 1] += start[i];
  std::vector<int> incid(start[n]);
  {
    std::vector<int> fill(start.begin(), start.end() - 1);
    for (int g = 0; g < ng; ++g) {
      int size;
      const int* d = group(g, size);
      for (int i = 0; i < size; ++i) incid[fill[d[i]]++] = g;
    }
  }
  std::vector<int> outer(n + 1, 0);
  std::vector<int> inner;
  std::vector<int> mark(n, -1);
  std::vector<int> rows;
  for (int j = 0; j < n; ++j) {
    rows.clear();
    for (int s = start[j]; s < start[j + 1]; ++s) {
      int size;
      const int* d = group(incid[s], size);
      for (int i = 0; i < size; ++i)
        if (mark[d[i]] != j) {
          mark[d[i]] = j;
          rows.push_back(d[i]);
        }
    }
    std::sort(rows.begin(), rows.end());
    inner.insert(inner.end(), rows.begin(), rows.end());
    outer[j + 1] = static_cast<int>(inner.size());
  }
  ComplexSparseMatrix m(n, n);
  m.resizeNonZeros(static_cast<Eigen::Index>(inner.size()));
  std::copy(outer.begin(), outer.end(), m.outerIndexPtr());
  std::copy(inner.begin(), inner.end(), m.innerIndexPtr());
  std::fill(m.valuePtr(), m.valuePtr() + inner.size(), cplx(0.0));
  return m;
}

cplx& entry(ComplexSparseMatrix& m, int row, int col) {
  const int* begin = m.innerIndexPtr() + m.outerIndexPtr()[col];
  const int* end = m.innerIndexPtr() + m.outerIndexPtr()[col + 1];
  const int* it = std::lower_bound(begin, end, row);
  if (it == end || *it != row) throw std::logic_error("assembly: entry outside the pattern");
  return m.valuePtr()[it - m.innerIndexPtr()];
}

Point2 outward_normal(const Point2& a, const Point2& b) {
  const Point2 d = b - a;
  return (1.0 / norm(d)) * Point2{d.y, -d.x};
}

}  // namespace

RhsFunctional RhsFunctional::volume_source(ComplexFunction g) {
  RhsFunctional r;
  r.kind = Kind::volume_source;
  r.volume = std::move(g);
  return r;
}

RhsFunctional RhsFunctional::impedance_trace(BoundaryFunction g) {
  RhsFunctional r;
  r.kind = Kind::impedance_trace;
  r.boundary = std::move(g);
  return r;
}

ComplexSparseMatrix assemble_form(const FemSpace& space, const FormSpec& form) {
  if (!(form.k > 0.0)) throw std::invalid_argument("assembly: k must be positive");
  const Mesh& mesh = space.mesh();
  if ((form.truncation == Truncation::impedance || form.truncation == Truncation::dtn) &&
      !has_outer_boundary(mesh))
    throw MeshError("assembly: truncation needs boundary edges tagged outer");
  if (form.truncation == Truncation::pml) validate(form.pml);

  DtnBlock dtn;
  if (form.truncation == Truncation::dtn) {
    DtnSpec spec = form.dtn;
    spec.k = form.k;
    dtn = assemble_dtn_boundary(space, spec);
  }
  ComplexSparseMatrix m = build_pattern(space, dtn.dofs);

  const QuadratureRule rule = triangle_rule(volume_degree(space, form.quadrature_degree));
  const Tabulation tab = tabulate(space.reference(), rule);
  const int nb = tab.nb;
  const double k2 = 1.0 / (form.k * form.k);
  std::vector<cplx> ke(nb * nb);
  std::vector<double> gx(nb), gy(nb);
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map(mesh.corners(t));
    const double jac = std::abs(map.det);
    std::fill(ke.begin(), ke.end(), cplx(0.0));
    for (int q = 0; q < tab.nq; ++q) {
      const PointCoefficients pc = coefficients_at(form, map.to_physical(rule.xi[q], rule.eta[q]));
      const double w = rule.weights[q] * jac;
      const double* phi = &tab.phi[q * nb];
      for (int i = 0; i < nb; ++i) {
        const Point2 g = map.gradient(tab.dxi[q * nb + i], tab.deta[q * nb + i]);
        gx[i] = g.x;
        gy[i] = g.y;
      }
      const cplx a00 = w * k2 * pc.A[0], a01 = w * k2 * pc.A[1];
      const cplx a10 = w * k2 * pc.A[2], a11 = w * k2 * pc.A[3];
      const cplx mc = w * pc.c_inv2;
      for (int j = 0; j < nb; ++j) {
        // A grad(phi_j)
        const cplx ax = a00 * gx[j] + a01 * gy[j];
        const cplx ay = a10 * gx[j] + a11 * gy[j];
        const cplx mj = mc * phi[j];
        for (int i = 0; i < nb; ++i) ke[j * nb + i] += ax * gx[i] + ay * gy[i] - mj * phi[i];
      }
    }
    const int* dofs = space.element_dofs(t);
    for (int j = 0; j < nb; ++j)
      for (int i = 0; i < nb; ++i) entry(m, dofs[i], dofs[j]) += ke[j * nb + i];
  }

  if (form.truncation == Truncation::impedance) {
    const int p = space.degree();
    const LineRule g = gauss_legendre(p + 2);
    std::vector<double> phi(p + 1);
    const cplx factor(0.0, -1.0 / form.k);
    for (std::size_t b = 0; b < mesh.boundary_edges().size(); ++b) {
      const auto& be = mesh.boundary_edges()[b];
      if (be.tag != boundary::outer) continue;
      const double len = distance(mesh.vertices()[be.v[0]], mesh.vertices()[be.v[1]]);
      const std::vector<int> ed = space.boundary_edge_dofs(b);
      for (std::size_t q = 0; q < g.points.size(); ++q) {
        edge_basis(p, g.points[q], phi.data());
        const cplx w = factor * (g.weights[q] * len);
        for (int j = 0; j <= p; ++j)
          for (int i = 0; i <= p; ++i) entry(m, ed[i], ed[j]) += w * (phi[i] * phi[j]);
      }
    }
  }

  if (form.truncation == Truncation::dtn) {
    const int nd = static_cast<int>(dtn.dofs.size());
    for (int b = 0; b < nd; ++b)
      for (int a = 0; a < nd; ++a) entry(m, dtn.dofs[a], dtn.dofs[b]) += dtn.matrix(a, b);
  }
  return m;
}

ComplexVector assemble_rhs(const FemSpace& space, const RhsFunctional& rhs, double k,
                           int quadrature_degree) {
  const Mesh& mesh = space.mesh();
  ComplexVector b = ComplexVector::Zero(space.num_dofs());
  const int deg = volume_degree(space, quadrature_degree);
  if (rhs.kind == RhsFunctional::Kind::volume_source) {
    if (!rhs.volume) return b;
    const QuadratureRule rule = triangle_rule(deg);
    const Tabulation tab = tabulate(space.reference(), rule);
    const int nb = tab.nb;
    for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
      const ElementMap map(mesh.corners(t));
      const double jac = std::abs(map.det);
      const int* dofs = space.element_dofs(t);
      for (int q = 0; q < tab.nq; ++q) {
        const cplx g = rhs.volume(map.to_physical(rule.xi[q], rule.eta[q]));
        if (g == cplx(0.0)) continue;
        const cplx w = g * (rule.weights[q] * jac);
        for (int i = 0; i < nb; ++i) b[dofs[i]] += w * tab.phi[q * nb + i];
      }
    }
    return b;
  }
  if (!rhs.boundary) return b;
  const int p = space.degree();
  const LineRule g = gauss_legendre(deg / 2 + 1);
  std::vector<double> phi(p + 1);
  for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
    const auto& be = mesh.boundary_edges()[e];
    if (be.tag != boundary::outer) continue;
    const Point2 a = mesh.vertices()[be.v[0]];
    const Point2 c = mesh.vertices()[be.v[1]];
    const Point2 n = outward_normal(a, c);
    const double len = distance(a, c);
    const std::vector<int> ed = space.boundary_edge_dofs(e);
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      const cplx val = rhs.boundary(a + g.points[q] * (c - a), n);
      edge_basis(p, g.points[q], phi.data());
      const cplx w = val * (g.weights[q] * len / k);
      for (int i = 0; i <= p; ++i) b[ed[i]] += w * phi[i];
    }
  }
  return b;
}

ComplexVector form_against_basis(const FemSpace& space, const FormSpec& form,
                                 const ExactFunction& u, int quadrature_degree) {
  const Mesh& mesh = space.mesh();
  const QuadratureRule rule = triangle_rule(quadrature_degree);
  const Tabulation tab = tabulate(space.reference(), rule);
  const int nb = tab.nb;
  const double k2 = 1.0 / (form.k * form.k);
  ComplexVector r = ComplexVector::Zero(space.num_dofs());
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t) {
    const ElementMap map(mesh.corners(t));
    const double jac = std::abs(map.det);
    const int* dofs = space.element_dofs(t);
    for (int q = 0; q < tab.nq; ++q) {
      const Point2 x = map.to_physical(rule.xi[q], rule.eta[q]);
      const PointCoefficients pc = coefficients_at(form, x);
      const cplx val = u.value(x);
      const auto grad = u.gradient(x);
      const double w = rule.weights[q] * jac;
      const cplx ax = w * k2 * (pc.A[0] * grad[0] + pc.A[1] * grad[1]);
      const cplx ay = w * k2 * (pc.A[2] * grad[0] + pc.A[3] * grad[1]);
      const cplx mv = w * pc.c_inv2 * val;
      for (int i = 0; i < nb; ++i) {
        const Point2 g = map.gradient(tab.dxi[q * nb + i], tab.deta[q * nb + i]);
        r[dofs[i]] += ax * g.x + ay * g.y - mv * tab.phi[q * nb + i];
      }
    }
  }
  const int p = space.degree();
  const LineRule g = gauss_legendre(quadrature_degree / 2 + 1);
  std::vector<double> phi(p + 1);
  if (form.truncation == Truncation::impedance) {
    const cplx factor(0.0, -1.0 / form.k);
    for (std::size_t e = 0; e < mesh.boundary_edges().size(); ++e) {
      const auto& be = mesh.boundary_edges()[e];
      if (be.tag != boundary::outer) continue;
      const Point2 a = mesh.vertices()[be.v[0]];
      const Point2 c = mesh.vertices()[be.v[1]];
      const double len = distance(a, c);
      const std::vector<int> ed = space.boundary_edge_dofs(e);
      for (std::size_t q = 0; q < g.points.size(); ++q) {
        const cplx val = u.value(a + g.points[q] * (c - a));
        edge_basis(p, g.points[q], phi.data());
        const cplx w = factor * val * (g.weights[q] * len);
        for (int i = 0; i <= p; ++i) r[ed[i]] += w * phi[i];
      }
    }
  } else if (form.truncation == Truncation::dtn) {
    DtnSpec spec = form.dtn;
    spec.k = form.k;
    const int n_max = resolved_n_max(spec);
    std::vector<int> dofs;
    const Eigen::MatrixXcd c = boundary_fourier_coefficients(space, n_max, dofs);
    Eigen::VectorXcd cu = Eigen::VectorXcd::Zero(2 * n_max + 1);
    const LineRule gd = gauss_legendre(p + 2);
    for (const auto& be : mesh.boundary_edges()) {
      if (be.tag != boundary::outer) continue;
      const Point2 a = mesh.vertices()[be.v[0]];
      const Point2 d = mesh.vertices()[be.v[1]] - a;
      const double len = norm(d);
      for (std::size_t q = 0; q < gd.points.size(); ++q) {
        const Point2 x = a + gd.points[q] * d;
        const double theta = std::atan2(x.y, x.x);
        const cplx w = u.value(x) * (gd.weights[q] * len);
        for (int n = -n_max; n <= n_max; ++n) cu[n + n_max] += w * std::polar(1.0, -n * theta);
      }
    }
    const auto symbols = hankel_log_derivatives(n_max, form.k * spec.radius);
    const double scale = -1.0 / (form.k * 2.0 * std::numbers::pi * spec.radius);
    for (int n = -n_max; n <= n_max; ++n) cu[n + n_max] *= scale * symbols[std::abs(n)];
    const Eigen::VectorXcd contrib = c.conjugate() * cu;
    for (std::size_t i = 0; i < dofs.size(); ++i) r[dofs[i]] += contrib[i];
  }
  return r;
}

void apply_dirichlet(ComplexSparseMatrix& matrix, ComplexVector& rhs, const std::vector<int>& dofs) {
  if (dofs.empty()) return;
  std::vector<char> fixed(matrix.rows(), 0);
  for (int d : dofs) {
    if (d < 0 || d >= matrix.rows()) throw std::out_of_range("apply_dirichlet: DOF out of range");
    fixed[d] = 1;
  }
  for (int j = 0; j < matrix.outerSize(); ++j)
    for (ComplexSparseMatrix::InnerIterator it(matrix, j); it; ++it)
      if (fixed[it.row()] || fixed[j]) it.valueRef() = it.row() == j ? cplx(1.0) : cplx(0.0);
  for (int d : dofs) {
    rhs[d] = 0.0;
    matrix.coeffRef(d, d) = 1.0;
  }
}

void write_matrix_coo(std::ostream& out, const ComplexSparseMatrix& matrix) {
  out << std::setprecision(17);
  for (int j = 0; j < matrix.outerSize(); ++j)
    for (ComplexSparseMatrix::InnerIterator it(matrix, j); it; ++it)
      out << it.row() << ' ' << j << ' ' << it.value().real() << ' ' << it.value().imag() << '\n';
}

}  // namespace helmfem
