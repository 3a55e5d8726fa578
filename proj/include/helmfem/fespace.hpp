#pragma once

#include <array>
#include <complex>
#include <functional>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "helmfem/mesh.hpp"
#include "helmfem/point.hpp"
#include "helmfem/quadrature.hpp"

namespace helmfem {

using cplx = std::complex<double>;
using ComplexVector = Eigen::VectorXcd;

class OutOfDomainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Lagrange element of degree 1..4 on the reference triangle with
/// equispaced nodes. Local order: the three vertices, then p-1 nodes on each
/// edge (edge i runs from vertex i to vertex (i+1)%3), then interior nodes.
class ReferenceElement {
 public:
  explicit ReferenceElement(int degree);

  int degree() const { return degree_; }
  int num_basis() const { return static_cast<int>(node_xi_.size()); }
  const std::vector<double>& node_xi() const { return node_xi_; }
  const std::vector<double>& node_eta() const { return node_eta_; }

  /// values[i] = phi_i(xi, eta); grads (optional) holds d/dxi, d/deta pairs.
  void evaluate(double xi, double eta, double* values, double* grads = nullptr) const;

 private:
  int degree_;
  std::vector<double> node_xi_;
  std::vector<double> node_eta_;
  std::vector<std::array<int, 2>> exponents_;
  Eigen::MatrixXd coeffs_;  // row i: monomial coefficients of phi_i
};

/// Basis values and reference gradients tabulated at the points of a rule.
struct Tabulation {
  int nq = 0;
  int nb = 0;
  std::vector<double> phi;   // phi[q * nb + i]
  std::vector<double> dxi;   // same layout
  std::vector<double> deta;
};

Tabulation tabulate(const ReferenceElement& ref, const QuadratureRule& rule);

/// Trace of the degree-p basis on an edge parameterised by s in [0, 1] from
/// endpoint a to endpoint b, in FemSpace::boundary_edge_dofs order.
void edge_basis(int degree, double s, double* values);

/// Affine map x = v0 + J (xi, eta) of one triangle.
struct ElementMap {
  Point2 v0;
  double j00, j01, j10, j11;  // columns v1 - v0 and v2 - v0
  double det;
  double i00, i01, i10, i11;  // inverse of J

  explicit ElementMap(const std::array<Point2, 3>& c);
  Point2 to_physical(double xi, double eta) const {
    return {v0.x + j00 * xi + j01 * eta, v0.y + j10 * xi + j11 * eta};
  }
  /// Physical gradient from reference gradient (J^{-T} g).
  Point2 gradient(double gxi, double geta) const {
    return {i00 * gxi + i10 * geta, i01 * gxi + i11 * geta};
  }
};

struct Location {
  int triangle = -1;
  double xi = 0.0;
  double eta = 0.0;
};

/// Bucket grid over triangle bounding boxes.
class PointLocator {
 public:
  PointLocator() = default;
  explicit PointLocator(const Mesh& mesh);
  /// Returns triangle -1 when the point is outside the mesh. Points on
  /// shared edges resolve to the lowest triangle index.
  Location locate(const Point2& p) const;

 private:
  const Mesh* mesh_ = nullptr;
  double x0_ = 0.0, y0_ = 0.0, cell_ = 1.0;
  int nx_ = 0, ny_ = 0;
  std::vector<int> start_;
  std::vector<int> items_;
};

/// Continuous Lagrange space of degree p over a mesh.
///
/// Global numbering: vertices first, then p-1 nodes per mesh edge (edge
/// nodes ordered from the lower to the higher vertex index), then the
/// interior nodes of each triangle.
class FemSpace {
 public:
  FemSpace(std::shared_ptr<const Mesh> mesh, int degree);

  const Mesh& mesh() const { return *mesh_; }
  std::shared_ptr<const Mesh> mesh_ptr() const { return mesh_; }
  int degree() const { return ref_.degree(); }
  const ReferenceElement& reference() const { return ref_; }
  const MeshTopology& topology() const { return topo_; }
  int num_dofs() const { return static_cast<int>(coords_.size()); }
  int dofs_per_element() const { return ref_.num_basis(); }
  const std::vector<Point2>& dof_coordinates() const { return coords_; }

  /// Global indices of the local basis functions of triangle t.
  const int* element_dofs(std::size_t t) const { return &elem_dofs_[t * ref_.num_basis()]; }
  /// Global DOFs of boundary edge e in the order: endpoints a, b, then the
  /// edge nodes running from a to b.
  std::vector<int> boundary_edge_dofs(std::size_t e) const;
  /// For boundary edge e: incident triangle and local edge index.
  std::array<int, 2> boundary_edge_owner(std::size_t e) const { return bedge_owner_[e]; }
  /// Sorted DOFs lying on boundary edges with the given tag.
  std::vector<int> boundary_dofs(int tag) const;
  /// DOFs on edges tagged boundary::dirichlet.
  std::vector<int> dirichlet_dofs() const { return boundary_dofs(boundary::dirichlet); }

  const PointLocator& locator() const { return locator_; }

 private:
  std::shared_ptr<const Mesh> mesh_;
  ReferenceElement ref_;
  MeshTopology topo_;
  std::vector<int> elem_dofs_;
  std::vector<Point2> coords_;
  std::vector<std::array<int, 2>> bedge_owner_;
  PointLocator locator_;
};

/// Throws std::invalid_argument for p outside 1..4.
std::shared_ptr<const FemSpace> build_fem_space(std::shared_ptr<const Mesh> mesh, int degree);
std::shared_ptr<const FemSpace> build_fem_space(Mesh mesh, int degree);

struct FemField {
  std::shared_ptr<const FemSpace> space;
  ComplexVector coeffs;

  FemField() = default;
  FemField(std::shared_ptr<const FemSpace> s, ComplexVector c);
};

using ComplexFunction = std::function<cplx(const Point2&)>;

struct ValueGradient {
  cplx value;
  std::array<cplx, 2> grad;
};

FemField interpolate(std::shared_ptr<const FemSpace> space, const ComplexFunction& f);

/// Throws OutOfDomainError when pt is not covered by the mesh.
cplx evaluate_field(const FemField& field, const Point2& pt);
ValueGradient evaluate_field_gradient(const FemField& field, const Point2& pt);
/// Evaluation restricted to a known triangle and reference point.
ValueGradient evaluate_in_element(const FemField& field, int triangle, double xi, double eta);

/// One row per DOF: "x,y,re,im" with a header line.
void write_field_csv(std::ostream& out, const FemField& field);
void write_field_csv_file(const std::string& path, const FemField& field);
/// Reads a write_field_csv dump back onto `space`; rows must match the DOF
/// coordinates to 1e-9.
FemField read_field_csv(std::istream& in, std::shared_ptr<const FemSpace> space);
FemField read_field_csv_file(const std::string& path, std::shared_ptr<const FemSpace> space);

}  // namespace helmfem
