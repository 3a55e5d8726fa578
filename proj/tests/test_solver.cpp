#include <cmath>
#include <random>

#include <Eigen/Dense>
#include <gtest/gtest.h>

#include "helmfem/experiments.hpp"
#include "helmfem/solver.hpp"

using namespace helmfem;

namespace {

using C = std::complex<double>;

ComplexSparseMatrix from_dense(const Eigen::MatrixXcd& d) {
  ComplexSparseMatrix m = d.sparseView();
  m.makeCompressed();
  return m;
}

}  // namespace

TEST(Solver, IdentityReturnsRhs) {
  ComplexSparseMatrix id(5, 5);
  id.setIdentity();
  ComplexVector b(5);
  b << C(1, 2), C(-3, 0), C(0, 0.5), C(7, 7), C(-1, -1);
  const SolveResult r = solve(id, b);
  EXPECT_LE((r.x - b).norm(), 1e-15);
  EXPECT_LE(r.report.residual_norm_rel, 1e-15);
}

TEST(Solver, TwoByTwoClosedForm) {
  Eigen::Matrix2cd d;
  d << C(2, 0), C(0, 1), C(0, 1), C(1, 0);
  ComplexVector b(2);
  b << 1.0, 0.0;
  // det = 2 + 1 = 3, inverse = [[1, -i], [-i, 2]] / 3
  const SolveResult r = solve(from_dense(d), b);
  EXPECT_NEAR(std::abs(r.x[0] - 1.0 / 3), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r.x[1] - C(0, -1.0 / 3)), 0.0, 1e-15);
}

TEST(Solver, RandomSystemsAgreeWithDenseLu) {
  std::mt19937 rng(21);
  std::normal_distribution<double> n;
  const int size = 40;
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(size, size);
  for (int i = 0; i < size; ++i)
    for (int j = 0; j < size; ++j)
      if (i == j || (i * 7 + j * 3) % 5 == 0) d(i, j) = C(n(rng), n(rng));
  d.diagonal().array() += 4.0;
  ComplexVector b(size);
  for (int i = 0; i < size; ++i) b[i] = C(n(rng), n(rng));
  const ComplexVector ref = d.fullPivLu().solve(b);
  for (Ordering o : {Ordering::amd, Ordering::metis}) {
    SolverOptions opt;
    opt.ordering = o;
    EXPECT_LE((solve(from_dense(d), b, opt).x - ref).norm(), 1e-12 * ref.norm());
  }
}

TEST(Solver, SingularMatrixThrows) {
  ComplexSparseMatrix z(3, 3);
  z.insert(0, 0) = 1.0;
  z.makeCompressed();
  EXPECT_THROW(SparseLU lu(z), SolverError);
  EXPECT_THROW(solve(z, ComplexVector::Ones(3)), SolverError);
}

TEST(Solver, NonSquareRejected) {
  ComplexSparseMatrix m(2, 3);
  m.insert(0, 0) = 1.0;
  EXPECT_THROW(SparseLU lu(m), SolverError);
}

TEST(Solver, PlaneWaveImpedanceResidual) {
  auto mesh = std::make_shared<const Mesh>(build_uniform_rect_mesh({0, 0, 1, 1}, 1.0 / 40));
  const DiscreteSolution s = solve_plane_wave_impedance(mesh, 1, PlaneWave{10.0, 0.0});
  EXPECT_LE(s.report.residual_norm_rel, 1e-10);
  EXPECT_GT(s.report.factor_nnz, 0);
  EXPECT_GT(s.report.rcond, 0.0);
  EXPECT_GE(s.report.solve_time, 0.0);
}

TEST(Solver, DeterministicSolution) {
  auto mesh = std::make_shared<const Mesh>(build_uniform_rect_mesh({0, 0, 1, 1}, 1.0 / 20));
  const DiscreteSolution a = solve_plane_wave_impedance(mesh, 2, PlaneWave{10.0, 0.3});
  const DiscreteSolution b = solve_plane_wave_impedance(mesh, 2, PlaneWave{10.0, 0.3});
  EXPECT_EQ((a.uh.coeffs - b.uh.coeffs).norm(), 0.0);
}

TEST(Solver, FactorReusableForSeveralRightHandSides) {
  Eigen::Matrix3cd d;
  d << 4, 1, 0, 1, 3, C(0, 1), 0, C(0, 1), 2;
  const ComplexSparseMatrix m = from_dense(d);
  const SparseLU lu(m);
  for (int i = 0; i < 3; ++i) {
    ComplexVector b = ComplexVector::Zero(3);
    b[i] = 1.0;
    EXPECT_LE((m * lu.solve(b) - b).norm(), 1e-14);
  }
}
