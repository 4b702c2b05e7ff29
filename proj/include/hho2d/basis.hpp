// Scaled monomial polynomial bases on cells and faces, with the linear
// algebra built on top of them: mass matrices, L2 projections, exact
// differentiation and face-trace re-expansion in coefficient space, and the
// reduction of a smooth field onto the hybrid unknowns.
//
// Conventions:
//  - Cell basis: ((x-x_T)/h_T)^a ((y-y_T)/h_T)^b ordered by total degree,
//    within a degree by decreasing x-power; the degree-m basis is a prefix
//    of every higher-degree basis on the same element.
//  - Face basis: (s/h_F)^j with s the signed arc length from the midpoint
//    along the face tangent.
//  - Vector-valued bases are component-major: all x-component members first.

#ifndef HHO2D_BASIS_HPP
#define HHO2D_BASIS_HPP

#include <functional>

#include <Eigen/Dense>

#include "hho2d/mesh.hpp"
#include "hho2d/quadrature.hpp"

namespace hho2d {

/// dim P^m on a 2D cell, one component.
inline int cell_poly_dim(int degree) { return (degree + 1) * (degree + 2) / 2; }
/// dim P^m on a face (segment), one component.
inline int face_poly_dim(int degree) { return degree + 1; }

/// Scaled monomials on an element, centered at the centroid and scaled by
/// the diameter.
class ScalarCellBasis {
public:
  ScalarCellBasis(const Point &centroid, double diameter, int degree);
  ScalarCellBasis(const Mesh &mesh, int element, int degree);

  int degree() const { return m_degree; }
  int size() const { return cell_poly_dim(m_degree); }
  int power_x(int i) const { return m_powers[i][0]; }
  int power_y(int i) const { return m_powers[i][1]; }

  /// Values of all members at a point.
  Eigen::VectorXd values(const Point &p) const;
  /// Gradients of all members at a point, one row per member.
  Eigen::MatrixXd gradients(const Point &p) const;

  /// Exact differentiation in coefficient space: maps degree-m coefficients
  /// to the degree-(m-1) coefficients of d/dx (axis 0) or d/dy (axis 1).
  Eigen::MatrixXd derivative_matrix(int axis) const;

  /// Exact face-basis coefficients of the trace of each member: the result
  /// maps cell coefficients to coefficients on a degree-`degree()` face
  /// basis sharing the face's midpoint/tangent/length.
  Eigen::MatrixXd trace_matrix(const Face &face) const;

private:
  Point m_center;
  double m_scale;
  int m_degree;
  std::vector<std::array<int, 2>> m_powers;
};

/// Scaled monomials of the arc-length coordinate on a face.
class ScalarFaceBasis {
public:
  ScalarFaceBasis(const Face &face, int degree);

  int degree() const { return m_degree; }
  int size() const { return m_degree + 1; }
  const Face &face() const { return m_face; }

  Eigen::VectorXd values(const Point &p) const;

private:
  Face m_face;
  int m_degree;
};

// Vector-valued view of a scalar cell basis (component-major), as tables at
// a point. Jacobian convention: (grad v)_{ij} = d v_i / d x_j.
std::vector<Vector2> vector_values(const ScalarCellBasis &basis, const Point &p);
std::vector<Eigen::Matrix2d> vector_jacobians(const ScalarCellBasis &basis, const Point &p);
/// Symmetric parts (grad + grad^T)/2 of the Jacobians.
std::vector<Eigen::Matrix2d> vector_symgrads(const ScalarCellBasis &basis, const Point &p);
/// Skew parts (grad - grad^T)/2 of the Jacobians.
std::vector<Eigen::Matrix2d> vector_skews(const ScalarCellBasis &basis, const Point &p);
std::vector<double> vector_divergences(const ScalarCellBasis &basis, const Point &p);

/// Gram matrix of a basis under a quadrature rule.
template <typename Basis>
Eigen::MatrixXd mass_matrix(const Basis &basis, const QuadratureRule &rule) {
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(basis.size(), basis.size());
  for (const auto &qp : rule.points) {
    const Eigen::VectorXd phi = basis.values(qp.point);
    M.selfadjointView<Eigen::Lower>().rankUpdate(phi, qp.weight);
  }
  return M.selfadjointView<Eigen::Lower>();
}

/// L2 projection of a scalar function onto a basis: solves the mass system
/// for the moment vector. Throws when the mass matrix is not SPD.
Eigen::VectorXd l2_project(const std::function<double(const Point &)> &f,
                           const ScalarCellBasis &basis, const QuadratureRule &rule);
Eigen::VectorXd l2_project(const std::function<double(const Point &)> &f,
                           const ScalarFaceBasis &basis, const QuadratureRule &rule);

/// Layout of the hybrid unknowns of one element: one vector polynomial of
/// degree k on the cell and one per face, stored cell block first.
struct LocalDofLayout {
  int k = 1;
  int n_faces = 0;

  int cell_scalar_dim() const { return cell_poly_dim(k); }
  int face_scalar_dim() const { return k + 1; }
  int cell_block_size() const { return 2 * cell_scalar_dim(); }
  int face_block_size() const { return 2 * face_scalar_dim(); }
  int face_offset(int lf) const { return cell_block_size() + lf * face_block_size(); }
  int size() const { return cell_block_size() + n_faces * face_block_size(); }
};

using VectorField = std::function<Vector2(const Point &)>;

/// Reduction of a smooth field onto the hybrid unknowns of one element:
/// component-wise L2 projections on the cell and on each face. Quadrature
/// exactness defaults to 2(k+1) when `exactness` < 0.
Eigen::VectorXd reduce(const Mesh &mesh, int element, int k, const VectorField &u,
                       int exactness = -1);

}  // namespace hho2d

#endif
