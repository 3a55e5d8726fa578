#include "helmfem/norms.hpp"

#include <cmath>
#include <stdexcept>

namespace helmfem {

namespace {

template <class Pred>
SubdomainSelector select(const Mesh& mesh, Pred pred) {
  SubdomainSelector s;
  for (std::size_t t = 0; t < mesh.num_triangles(); ++t)
    if (pred(t)) s.elements.push_back(static_cast<int>(t));
  return s;
}

void require_nonempty(const SubdomainSelector& sel) {
  if (sel.elements.empty()) throw std::invalid_argument("norms: empty subdomain selector");
}

int default_degree(const FemSpace& space, int requested) {
  return requested > 0 ? requested : 2 * space.degree() + 4;
}

// Accumulates |a|^2 and |g|^2 with optional exact reference subtracted.
NormParts integrate(const FemField* field, const ExactFunction* exact, const Mesh& mesh,
                    const SubdomainSelector& sel, int degree) {
  require_nonempty(sel);
  const QuadratureRule rule = triangle_rule(degree);
  Tabulation tab;
  if (field) tab = tabulate(field->space->reference(), rule);
  NormParts out;
  for (int t : sel.elements) {
    const ElementMap map(mesh.corners(t));
    const double jac = std::abs(map.det);
    const int* dofs = field ? field->space->element_dofs(t) : nullptr;
    double l2 = 0.0, g2 = 0.0;
    for (std::size_t q = 0; q < rule.size(); ++q) {
      cplx v = 0.0, gx = 0.0, gy = 0.0;
      if (field) {
        for (int i = 0; i < tab.nb; ++i) {
          const cplx c = field->coeffs[dofs[i]];
          const Point2 g = map.gradient(tab.dxi[q * tab.nb + i], tab.deta[q * tab.nb + i]);
          v += c * tab.phi[q * tab.nb + i];
          gx += c * g.x;
          gy += c * g.y;
        }
      }
      if (exact) {
        const Point2 x = map.to_physical(rule.xi[q], rule.eta[q]);
        const auto g = exact->gradient(x);
        v -= exact->value(x);
        gx -= g[0];
        gy -= g[1];
      }
      l2 += rule.weights[q] * std::norm(v);
      g2 += rule.weights[q] * (std::norm(gx) + std::norm(gy));
    }
    out.l2_sq += l2 * jac;
    out.grad_sq += g2 * jac;
  }
  return out;
}

}  // namespace

SubdomainSelector SubdomainSelector::all(const Mesh& mesh) {
  return select(mesh, [](std::size_t) { return true; });
}

SubdomainSelector SubdomainSelector::region(const Mesh& mesh, int tag) {
  return select(mesh, [&](std::size_t t) { return mesh.triangles()[t].region == tag; });
}

SubdomainSelector SubdomainSelector::box(const Mesh& mesh, const Rect& box) {
  return select(mesh, [&](std::size_t t) { return box.contains(mesh.centroid(t)); });
}

SubdomainSelector SubdomainSelector::ball(const Mesh& mesh, const Point2& center, double radius) {
  return select(mesh, [&](std::size_t t) { return distance(mesh.centroid(t), center) <= radius; });
}

SubdomainSelector SubdomainSelector::inside_ball(const Mesh& mesh, const Point2& center,
                                                 double radius) {
  return select(mesh, [&](std::size_t t) {
    for (const auto& c : mesh.corners(t))
      if (!(distance(c, center) < radius)) return false;
    return true;
  });
}

NormParts norm_parts(const FemField& v, const SubdomainSelector& sel, int quadrature_degree) {
  return integrate(&v, nullptr, v.space->mesh(), sel, default_degree(*v.space, quadrature_degree));
}

NormParts norm_parts(const ExactFunction& v, const Mesh& mesh, const SubdomainSelector& sel,
                     int quadrature_degree) {
  // integrate() subtracts the exact function; the sign is irrelevant here.
  return integrate(nullptr, &v, mesh, sel, quadrature_degree);
}

double h1k_norm(const FemField& v, const SubdomainSelector& sel, double k, int quadrature_degree) {
  return std::sqrt(norm_parts(v, sel, quadrature_degree).h1k_sq(k));
}

double h1k_norm(const ExactFunction& v, const Mesh& mesh, const SubdomainSelector& sel, double k,
                int quadrature_degree) {
  return std::sqrt(norm_parts(v, mesh, sel, quadrature_degree).h1k_sq(k));
}

double l2_norm(const FemField& v, const SubdomainSelector& sel, int quadrature_degree) {
  return std::sqrt(norm_parts(v, sel, quadrature_degree).l2_sq);
}

double l2_norm(const ExactFunction& v, const Mesh& mesh, const SubdomainSelector& sel,
               int quadrature_degree) {
  return std::sqrt(norm_parts(v, mesh, sel, quadrature_degree).l2_sq);
}

ErrorNorms error_norms(const FemField& uh, const ExactFunction& u_exact, const SubdomainSelector& sel,
                       double k, int quadrature_degree) {
  const Mesh& mesh = uh.space->mesh();
  const int deg = default_degree(*uh.space, quadrature_degree);
  const NormParts err = integrate(&uh, &u_exact, mesh, sel, deg);
  const NormParts ref = integrate(nullptr, &u_exact, mesh, sel, deg);
  ErrorNorms out;
  out.l2_err = std::sqrt(err.l2_sq);
  out.h1k_err = std::sqrt(err.h1k_sq(k));
  const double l2 = std::sqrt(ref.l2_sq), h1 = std::sqrt(ref.h1k_sq(k));
  if (l2 > 0.0 && h1 > 0.0) {
    out.l2_rel = out.l2_err / l2;
    out.h1k_rel = out.h1k_err / h1;
  } else {
    out.relative_valid = false;
    out.l2_rel = out.l2_err;
    out.h1k_rel = out.h1k_err;
  }
  return out;
}

}  // namespace helmfem
