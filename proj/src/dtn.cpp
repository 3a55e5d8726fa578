#include "helmfem/dtn.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <unordered_map>

namespace helmfem {

int resolved_n_max(const DtnSpec& spec) {
  if (!(spec.radius > 0.0 && spec.k > 0.0))
    throw std::invalid_argument("dtn: radius and k must be positive");
  const double kr = spec.k * spec.radius;
  const int n = spec.n_max > 0 ? spec.n_max : static_cast<int>(std::ceil(2.0 * kr)) + 32;
  if (n < static_cast<int>(std::ceil(kr)))
    throw std::invalid_argument("dtn: n_max must be at least ceil(kR)");
  return n;
}

namespace {

// J_0..J_top(z) by Miller's algorithm normalised with J_0 + 2 sum J_2m = 1.
std::vector<double> bessel_j_miller(int top, double z) {
  const int m0 = std::max(top, static_cast<int>(std::ceil(z)));
  int start = m0 + 20 + static_cast<int>(std::sqrt(40.0 * m0));
  if (start % 2) ++start;
  std::vector<double> j(top + 1, 0.0);
  double next = 0.0, cur = 1e-300, sum = 0.0;
  for (int n = start; n > 0; --n) {
    const double prev = 2.0 * n / z * cur - next;  // J_{n-1}
    next = cur;
    cur = prev;
    if (n - 1 <= top) j[n - 1] = cur;
    if ((n - 1) % 2 == 0 && n - 1 > 0) sum += 2.0 * cur;
    if (std::abs(cur) > 1e250) {
      for (auto& v : j) v *= 1e-250;
      next *= 1e-250;
      cur *= 1e-250;
      sum *= 1e-250;
    }
  }
  sum += cur;
  for (auto& v : j) v /= sum;
  return j;
}

}  // namespace

std::vector<std::complex<double>> hankel_log_derivatives(int n_top, double z) {
  if (!(z > 0.0)) throw std::invalid_argument("hankel_log_derivatives: z must be positive");
  if (n_top < 0) throw std::invalid_argument("hankel_log_derivatives: negative order");
  const std::vector<double> j = bessel_j_miller(std::max(n_top, 1), z);
  const std::complex<double> I(0.0, 1.0);
  std::vector<std::complex<double>> out(n_top + 1);
  double y_prev = std::cyl_neumann(0.0, z);
  double y_cur = std::cyl_neumann(1.0, z);
  out[0] = -(j[1] + I * y_cur) / (j[0] + I * y_prev);
  // Y_n is stored as y * 1e280^scale; rho_n = J_n / Y_n.
  int scale = 0;
  auto rho = [&](double jn, double yn) {
    const double r = jn / yn;
    return scale == 0 ? r : r * std::pow(1e-280, scale);
  };
  double rho_prev = rho(j[0], y_prev);
  for (int n = 1; n <= n_top; ++n) {
    if (n > 1) {
      const double y_next = 2.0 * (n - 1) / z * y_cur - y_prev;
      y_prev = y_cur;
      y_cur = y_next;
      if (std::abs(y_cur) > 1e280) {
        y_prev *= 1e-280;
        y_cur *= 1e-280;
        ++scale;
      }
    }
    const double s = y_cur / y_prev;
    const double jn = n < static_cast<int>(j.size()) ? j[n] : 0.0;
    const double rho_n = rho(jn, y_cur);
    // H_{n-1}/H_n = (rho_{n-1} + i) / (s (rho_n + i)); H_n' = H_{n-1} - (n/z) H_n.
    out[n] = (rho_prev + I) / (s * (rho_n + I)) - static_cast<double>(n) / z;
    rho_prev = rho_n;
  }
  return out;
}

std::complex<double> dtn_symbol(const DtnSpec& spec, int n) {
  const int a = std::abs(n);
  return hankel_log_derivatives(a, spec.k * spec.radius)[a];
}

Eigen::MatrixXcd boundary_fourier_coefficients(const FemSpace& space, int n_max,
                                               std::vector<int>& dofs) {
  const Mesh& mesh = space.mesh();
  const int p = space.degree();
  dofs = space.boundary_dofs(boundary::outer);
  if (dofs.empty()) throw MeshError("dtn: mesh has no outer boundary edges");
  std::unordered_map<int, int> row;
  for (std::size_t i = 0; i < dofs.size(); ++i) row[dofs[i]] = static_cast<int>(i);
  const int nm = 2 * n_max + 1;
  Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(dofs.size()), nm);
  const LineRule g = gauss_legendre(p + 2);
  std::vector<double> phi(p + 1);
  std::vector<std::complex<double>> e(nm);
  for (std::size_t b = 0; b < mesh.boundary_edges().size(); ++b) {
    const auto& be = mesh.boundary_edges()[b];
    if (be.tag != boundary::outer) continue;
    const Point2 a = mesh.vertices()[be.v[0]];
    const Point2 d = mesh.vertices()[be.v[1]] - a;
    const double len = norm(d);
    const std::vector<int> ed = space.boundary_edge_dofs(b);
    for (std::size_t q = 0; q < g.points.size(); ++q) {
      const Point2 x = a + g.points[q] * d;
      const double theta = std::atan2(x.y, x.x);
      const std::complex<double> step = std::polar(1.0, -theta);
      // e[n + n_max] = exp(-i n theta)
      e[n_max] = 1.0;
      for (int n = 1; n <= n_max; ++n) {
        e[n_max + n] = e[n_max + n - 1] * step;
        e[n_max - n] = std::conj(e[n_max + n]);
      }
      edge_basis(p, g.points[q], phi.data());
      const double w = g.weights[q] * len;
      for (int i = 0; i <= p; ++i) {
        const int r = row.at(ed[i]);
        const double wi = w * phi[i];
        for (int m = 0; m < nm; ++m) c(r, m) += wi * e[m];
      }
    }
  }
  return c;
}

DtnBlock assemble_dtn_boundary(const FemSpace& space, const DtnSpec& spec) {
  const int n_max = resolved_n_max(spec);
  DtnBlock block;
  const Eigen::MatrixXcd c = boundary_fourier_coefficients(space, n_max, block.dofs);
  const auto symbols = hankel_log_derivatives(n_max, spec.k * spec.radius);
  const double scale = -1.0 / (spec.k * 2.0 * std::numbers::pi * spec.radius);
  // B = scale * conj(C) S C^T, so that B(a, b) pairs c_n(phi_b) with conj(c_n(phi_a)).
  Eigen::MatrixXcd cs = c.conjugate();
  for (int m = 0; m < c.cols(); ++m) cs.col(m) *= scale * symbols[std::abs(m - n_max)];
  block.matrix = cs * c.transpose();
  return block;
}

}  // namespace helmfem
