#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "helmfem/fespace.hpp"
#include "helmfem/quadrature.hpp"

using namespace helmfem;

namespace {

std::shared_ptr<const Mesh> unit_triangle() {
  return std::make_shared<const Mesh>(Mesh({{0, 0}, {1, 0}, {0, 1}}, {Triangle{{0, 1, 2}, 0}},
                                           {BoundaryEdge{{0, 1}}, BoundaryEdge{{1, 2}}, BoundaryEdge{{2, 0}}}));
}

std::shared_ptr<const Mesh> unit_square(double h) {
  return std::make_shared<const Mesh>(build_uniform_rect_mesh({0, 0, 1, 1}, h));
}

// Element-wise L2 error of the interpolant by a high-order rule.
double interpolation_l2_error(const FemField& f, const ComplexFunction& g) {
  const QuadratureRule rule = triangle_rule(12);
  const Mesh& m = f.space->mesh();
  double s = 0.0;
  for (std::size_t t = 0; t < m.num_triangles(); ++t) {
    const ElementMap map(m.corners(t));
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const cplx e = evaluate_in_element(f, static_cast<int>(t), rule.xi[q], rule.eta[q]).value -
                     g(map.to_physical(rule.xi[q], rule.eta[q]));
      s += rule.weights[q] * std::abs(map.det) * std::norm(e);
    }
  }
  return std::sqrt(s);
}

}  // namespace

TEST(ReferenceElement, NodalPartitionOfUnityAndZeroGradientSum) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int p = 1; p <= 4; ++p) {
    const ReferenceElement ref(p);
    const int nb = ref.num_basis();
    EXPECT_EQ(nb, (p + 1) * (p + 2) / 2);
    std::vector<double> v(nb), g(2 * nb);
    for (int j = 0; j < nb; ++j) {
      ref.evaluate(ref.node_xi()[j], ref.node_eta()[j], v.data());
      for (int i = 0; i < nb; ++i) EXPECT_NEAR(v[i], i == j ? 1.0 : 0.0, 1e-12) << "p=" << p;
    }
    for (int trial = 0; trial < 20; ++trial) {
      double xi = u(rng), eta = u(rng);
      if (xi + eta > 1) xi = 1 - xi, eta = 1 - eta;
      ref.evaluate(xi, eta, v.data(), g.data());
      double s = 0, gx = 0, gy = 0;
      for (int i = 0; i < nb; ++i) s += v[i], gx += g[2 * i], gy += g[2 * i + 1];
      EXPECT_NEAR(s, 1.0, 1e-12);
      EXPECT_NEAR(gx, 0.0, 1e-10);
      EXPECT_NEAR(gy, 0.0, 1e-10);
    }
  }
}

TEST(ReferenceElement, GradientsMatchFiniteDifferences) {
  const double eps = 1e-6;
  for (int p = 1; p <= 4; ++p) {
    const ReferenceElement ref(p);
    const int nb = ref.num_basis();
    std::vector<double> v(nb), g(2 * nb), vp(nb), vm(nb);
    const double xi = 0.23, eta = 0.41;
    ref.evaluate(xi, eta, v.data(), g.data());
    ref.evaluate(xi + eps, eta, vp.data());
    ref.evaluate(xi - eps, eta, vm.data());
    for (int i = 0; i < nb; ++i) EXPECT_NEAR(g[2 * i], (vp[i] - vm[i]) / (2 * eps), 1e-7);
    ref.evaluate(xi, eta + eps, vp.data());
    ref.evaluate(xi, eta - eps, vm.data());
    for (int i = 0; i < nb; ++i) EXPECT_NEAR(g[2 * i + 1], (vp[i] - vm[i]) / (2 * eps), 1e-7);
  }
}

TEST(ReferenceElement, RejectsUnsupportedDegree) {
  EXPECT_ANY_THROW(ReferenceElement(0));
  EXPECT_ANY_THROW(ReferenceElement(5));
  EXPECT_THROW(build_fem_space(unit_triangle(), 5), std::invalid_argument);
}

TEST(EdgeBasis, MatchesTraceOfReferenceBasis) {
  // Edge 0 of the reference triangle runs from (0,0) to (1,0).
  for (int p = 1; p <= 4; ++p) {
    const ReferenceElement ref(p);
    const int nb = ref.num_basis();
    std::vector<double> v(nb), e(p + 1);
    for (double s : {0.1, 0.37, 0.8}) {
      ref.evaluate(s, 0.0, v.data());
      edge_basis(p, s, e.data());
      EXPECT_NEAR(e[0], v[0], 1e-12);
      EXPECT_NEAR(e[1], v[1], 1e-12);
      for (int j = 0; j < p - 1; ++j) EXPECT_NEAR(e[2 + j], v[3 + j], 1e-12);
    }
  }
}

TEST(FemSpace, DofCounts) {
  EXPECT_EQ(build_fem_space(unit_triangle(), 1)->num_dofs(), 3);
  EXPECT_EQ(build_fem_space(unit_triangle(), 4)->num_dofs(), 15);
  auto two = std::make_shared<const Mesh>(
      Mesh({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {Triangle{{0, 1, 2}, 0}, Triangle{{0, 2, 3}, 0}},
           {BoundaryEdge{{0, 1}}, BoundaryEdge{{1, 2}}, BoundaryEdge{{2, 3}}, BoundaryEdge{{3, 0}}}));
  EXPECT_EQ(build_fem_space(two, 2)->num_dofs(), 9);
}

TEST(FemSpace, DofCountEqualsContinuousSpaceDimension) {
  auto mesh = std::make_shared<const Mesh>(build_rect_two_region_mesh(0.2, 0.1));
  const MeshTopology topo = build_topology(*mesh);
  for (int p = 1; p <= 4; ++p) {
    const auto s = build_fem_space(mesh, p);
    const long expected = static_cast<long>(mesh->num_vertices()) + static_cast<long>(topo.edges.size()) * (p - 1) +
                          static_cast<long>(mesh->num_triangles()) * (p - 1) * (p - 2) / 2;
    EXPECT_EQ(s->num_dofs(), expected);
  }
}

TEST(FemSpace, SharedDofsCoincide) {
  auto mesh = unit_square(0.25);
  const auto s = build_fem_space(mesh, 3);
  const ReferenceElement& ref = s->reference();
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t) {
    const ElementMap map(mesh->corners(t));
    const int* dofs = s->element_dofs(t);
    for (int i = 0; i < ref.num_basis(); ++i) {
      const Point2 x = map.to_physical(ref.node_xi()[i], ref.node_eta()[i]);
      EXPECT_NEAR(distance(x, s->dof_coordinates()[dofs[i]]), 0.0, 1e-14);
    }
  }
}

TEST(Interpolation, ConstantGivesUnitCoefficients) {
  const auto s = build_fem_space(unit_square(0.2), 3);
  const FemField f = interpolate(s, [](const Point2&) { return cplx(1.0); });
  for (int i = 0; i < s->num_dofs(); ++i) EXPECT_EQ(f.coeffs[i], cplx(1.0));
  EXPECT_NEAR(std::abs(evaluate_field(f, {0.3141, 0.2718}) - 1.0), 0.0, 1e-14);
}

TEST(Interpolation, QuadraticReproducedByP2) {
  const auto s = build_fem_space(unit_square(0.1), 2);
  const FemField f = interpolate(s, [](const Point2& x) { return cplx(x.x * x.x); });
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> u(0.001, 0.999);
  for (int i = 0; i < 50; ++i) {
    const Point2 x{u(rng), u(rng)};
    EXPECT_NEAR(std::abs(evaluate_field(f, x) - x.x * x.x), 0.0, 1e-12);
  }
  const ValueGradient vg = evaluate_field_gradient(f, {0.3, 0.4});
  EXPECT_NEAR(std::abs(vg.grad[0] - 0.6), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(vg.grad[1]), 0.0, 1e-12);
}

TEST(Interpolation, NodalDuality) {
  const auto s = build_fem_space(unit_square(0.125), 4);
  std::mt19937 rng(11);
  std::normal_distribution<double> n;
  ComplexVector c(s->num_dofs());
  for (int i = 0; i < c.size(); ++i) c[i] = cplx(n(rng), n(rng));
  const FemField f(s, c);
  for (int i = 0; i < s->num_dofs(); i += 7)
    EXPECT_NEAR(std::abs(evaluate_field(f, s->dof_coordinates()[i]) - c[i]), 0.0, 1e-12);
  const FemField g = interpolate(s, [&](const Point2& x) { return evaluate_field(f, x); });
  EXPECT_NEAR((g.coeffs - c).norm(), 0.0, 1e-10 * c.norm());
}

TEST(Interpolation, P2PlaneWaveErrorIsThirdOrder) {
  const double k = 10.0;
  const ComplexFunction g = [k](const Point2& x) { return std::exp(cplx(0, k * x.x)); };
  std::vector<double> hs{1.0 / (2 * k), 1.0 / (4 * k), 1.0 / (8 * k)}, errs;
  for (double h : hs) errs.push_back(interpolation_l2_error(interpolate(build_fem_space(unit_square(h), 2), g), g));
  const double slope = std::log(errs.front() / errs.back()) / std::log(hs.front() / hs.back());
  EXPECT_NEAR(slope, 3.0, 0.2);
}

TEST(Evaluation, BarycenterOfVertexHat) {
  const auto s = build_fem_space(unit_triangle(), 1);
  ComplexVector c(3);
  c << 0.0, 1.0, 0.0;
  EXPECT_NEAR(std::abs(evaluate_field(FemField(s, c), {1.0 / 3, 1.0 / 3}) - 1.0 / 3), 0.0, 1e-15);
}

TEST(Evaluation, ContinuousAcrossSharedEdges) {
  auto mesh = unit_square(0.2);
  const auto s = build_fem_space(mesh, 3);
  std::mt19937 rng(5);
  std::normal_distribution<double> n;
  ComplexVector c(s->num_dofs());
  for (int i = 0; i < c.size(); ++i) c[i] = cplx(n(rng), n(rng));
  const FemField f(s, c);
  const MeshTopology& topo = s->topology();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (std::size_t e = 0; e < topo.edges.size() && checked < 40; ++e) {
    const auto tri = topo.edge_triangles[e];
    if (tri[1] < 0) continue;
    const Point2 a = mesh->vertices()[topo.edges[e][0]], b = mesh->vertices()[topo.edges[e][1]];
    for (int r = 0; r < 5; ++r) {
      const Point2 x = a + u(rng) * (b - a);
      cplx vals[2];
      for (int side = 0; side < 2; ++side) {
        const ElementMap map(mesh->corners(tri[side]));
        const Point2 d = x - map.v0;
        const double xi = map.i00 * d.x + map.i01 * d.y, eta = map.i10 * d.x + map.i11 * d.y;
        vals[side] = evaluate_in_element(f, tri[side], xi, eta).value;
      }
      EXPECT_NEAR(std::abs(vals[0] - vals[1]), 0.0, 1e-10);
    }
    ++checked;
  }
  EXPECT_EQ(checked, 40);
}

TEST(Evaluation, OutsideMeshThrows) {
  const auto s = build_fem_space(unit_square(0.25), 1);
  const FemField f = interpolate(s, [](const Point2&) { return cplx(1.0); });
  EXPECT_THROW(evaluate_field(f, {1.5, 0.5}), OutOfDomainError);
}

TEST(PointLocator, FindsContainingTriangle) {
  auto mesh = std::make_shared<const Mesh>(build_rect_two_region_mesh(0.1, 0.05));
  const PointLocator loc(*mesh);
  std::mt19937 rng(9);
  std::uniform_real_distribution<double> ux(0.0, 2.1), uy(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const Point2 x{ux(rng), uy(rng)};
    const Location l = loc.locate(x);
    ASSERT_GE(l.triangle, 0);
    EXPECT_GE(l.xi, -1e-12);
    EXPECT_GE(l.eta, -1e-12);
    EXPECT_LE(l.xi + l.eta, 1 + 1e-12);
    const Point2 back = ElementMap(mesh->corners(l.triangle)).to_physical(l.xi, l.eta);
    EXPECT_NEAR(distance(back, x), 0.0, 1e-12);
  }
  EXPECT_EQ(loc.locate({3.0, 0.5}).triangle, -1);
}

TEST(PointLocator, SharedVertexResolvesToLowestIndex) {
  auto mesh = unit_square(0.5);
  const PointLocator loc(*mesh);
  const Point2 centre{0.5, 0.5};
  int lowest = -1;
  for (std::size_t t = 0; t < mesh->num_triangles(); ++t)
    for (int v : mesh->triangles()[t].v)
      if (mesh->vertices()[v] == centre && lowest < 0) lowest = static_cast<int>(t);
  EXPECT_EQ(loc.locate(centre).triangle, lowest);
}

TEST(FemSpace, BoundaryDofsOnTaggedEdges) {
  auto mesh = unit_square(0.25);
  const auto s = build_fem_space(mesh, 2);
  const auto dofs = s->boundary_dofs(boundary::outer);
  EXPECT_EQ(dofs.size(), 32u);  // 16 edges, 16 vertices + 16 midpoints
  for (int d : dofs) {
    const Point2 x = s->dof_coordinates()[d];
    EXPECT_TRUE(x.x == 0 || x.x == 1 || x.y == 0 || x.y == 1);
  }
  EXPECT_TRUE(s->dirichlet_dofs().empty());
  for (std::size_t e = 0; e < mesh->boundary_edges().size(); ++e) {
    const auto ed = s->boundary_edge_dofs(e);
    ASSERT_EQ(ed.size(), 3u);
    const auto& be = mesh->boundary_edges()[e];
    EXPECT_EQ(s->dof_coordinates()[ed[0]], mesh->vertices()[be.v[0]]);
    EXPECT_EQ(s->dof_coordinates()[ed[1]], mesh->vertices()[be.v[1]]);
  }
}

TEST(FieldCsv, RoundTrip) {
  const auto s = build_fem_space(unit_square(0.25), 3);
  const FemField f = interpolate(s, [](const Point2& x) { return std::exp(cplx(x.y, 3 * x.x)); });
  std::stringstream out;
  write_field_csv(out, f);
  const FemField g = read_field_csv(out, s);
  EXPECT_NEAR((g.coeffs - f.coeffs).norm(), 0.0, 1e-12 * f.coeffs.norm());
}

TEST(FieldCsv, MismatchedSpaceRejected) {
  const auto s = build_fem_space(unit_square(0.25), 2);
  const FemField f = interpolate(s, [](const Point2&) { return cplx(1.0); });
  std::stringstream out;
  write_field_csv(out, f);
  EXPECT_ANY_THROW(read_field_csv(out, build_fem_space(unit_square(0.25), 3)));
  std::stringstream bad("a,b,c\n");
  EXPECT_ANY_THROW(read_field_csv(bad, s));
}

TEST(FemField, CoefficientLengthChecked) {
  const auto s = build_fem_space(unit_triangle(), 2);
  EXPECT_ANY_THROW(FemField(s, ComplexVector::Zero(3)));
}
