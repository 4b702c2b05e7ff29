// Element-local operators of the hybrid discretization of linear elasticity:
// the degree-(k+1) displacement reconstruction with rigid-body closure, the
// degree-k divergence reconstruction, the two stabilizations (projected
// high-order correction vs plain cell-face jumps), and the local bilinear
// forms assembled from them. Everything is a dense matrix acting on the
// element's hybrid unknowns (see LocalDofLayout).

#ifndef HHO2D_LOCAL_OPERATORS_HPP
#define HHO2D_LOCAL_OPERATORS_HPP

#include <vector>

#include <Eigen/Dense>

#include "hho2d/basis.hpp"
#include "hho2d/mesh.hpp"
#include "hho2d/quadrature.hpp"

namespace hho2d {

class ElementOperators {
public:
  /// Builds every operator of element `el` for degree k >= 1 and Lame
  /// coefficients mu > 0, lambda >= 0. Quadrature is exact to degree 2(k+1)
  /// on the cell and on each face. Throws std::runtime_error when a local
  /// solve degenerates.
  ElementOperators(const Mesh &mesh, int el, int k, double mu, double lambda);

  int element = 0;
  int k = 1;
  double mu = 1.;
  double lambda = 1.;
  LocalDofLayout layout;
  double h = 0.;  // element diameter
  double area = 0.;
  Point centroid;

  // Cached bases, rules, and geometry. The degree-(k+1) cell basis contains
  // the degree-k basis as a prefix; likewise for faces.
  ScalarCellBasis cell_basis;               // degree k+1
  std::vector<ScalarFaceBasis> face_bases;  // degree k+1
  QuadratureRule cell_rule;
  std::vector<QuadratureRule> face_rules;
  std::vector<Vector2> face_normals;  // outward n_TF per local face
  std::vector<double> face_lengths;

  // Scalar mass matrices, moments, and exact coefficient-space calculus.
  Eigen::MatrixXd cell_mass;                // n1 x n1
  std::vector<Eigen::MatrixXd> face_mass;   // (k+2) x (k+2) per face
  Eigen::VectorXd cell_moments;             // integrals of cell members
  std::vector<Eigen::VectorXd> face_moments;
  Eigen::MatrixXd dx, dy;                   // n0 x n1, derivative of degree-(k+1) coefficients
  std::vector<Eigen::MatrixXd> face_trace;  // (k+2) x n1 per face, exact trace re-expansion

  // Operators on the hybrid unknowns (N = layout.size()).
  Eigen::MatrixXd reconstruction;  // 2*n1 x N: coefficients of the reconstructed displacement
  Eigen::MatrixXd second_recon;    // 2*n1 x N: cell unknown plus high-order correction
  Eigen::MatrixXd divergence;      // n0 x N: coefficients of the reconstructed divergence
  Eigen::MatrixXd stab;            // N x N Gram of the projected-correction stabilization
  Eigen::MatrixXd jump;            // N x N Gram of the plain cell-face jump penalty
  // Factors with stab = stab_factor^T stab_factor (same for jump): quadratic
  // forms evaluated through them are sums of squares and keep the exact
  // zeros of the construction.
  Eigen::MatrixXd stab_factor;  // (2(k+1) * n_faces) x N
  Eigen::MatrixXd jump_factor;
  Eigen::MatrixXd recon_gram;      // N x N Gram of symmetric gradients of reconstructions
  Eigen::MatrixXd div_gram;        // N x N Gram of divergence reconstructions
  Eigen::MatrixXd cell_gram;       // N x N Gram of symmetric gradients of the cell unknown
  Eigen::MatrixXd local_form;      // 2mu(recon_gram + stab) + lambda div_gram
  Eigen::MatrixXd local_form_jump; // 2mu(recon_gram + jump) + lambda div_gram

  // Rigid-body machinery: the three closure functionals (componentwise cell
  // mean and boundary skew moment, rows scaled to O(1)) applied to a DOF
  // vector, and the hybrid unknowns of the rigid-body motions themselves.
  Eigen::MatrixXd closure_dofs;  // 3 x N
  Eigen::MatrixXd rigid_dofs;    // N x 3

  int n0() const { return cell_poly_dim(k); }
  int n1() const { return cell_poly_dim(k + 1); }

  /// Hybrid unknowns of a + b*(-(y-y_T), x-x_T), exact by construction.
  Eigen::VectorXd rigid_dof_vector(const Vector2 &a, double b) const;

  /// Energy of a DOF vector in the local form, ||v||_{a,T}^2.
  double energy(const Eigen::VectorXd &v) const { return v.dot(local_form * v); }

  /// Stabilization quadratic forms as sums of squares.
  double stab_form(const Eigen::VectorXd &v) const { return (stab_factor * v).squaredNorm(); }
  double jump_form(const Eigen::VectorXd &v) const { return (jump_factor * v).squaredNorm(); }
};

ElementOperators build_element_operators(const Mesh &mesh, int el, int k, double mu,
                                         double lambda);

/// Extended-precision dense solve for the small symmetric saddle-point
/// systems of the local operators. Throws on singular systems.
Eigen::MatrixXd solve_saddle_extended(const Eigen::MatrixXd &aug, const Eigen::MatrixXd &rhs,
                                      const char *what);

/// Parallel map over all elements; result order is by element id regardless
/// of the thread count.
std::vector<ElementOperators> build_all_element_operators(const Mesh &mesh, int k, double mu,
                                                          double lambda, unsigned n_threads = 1);

}  // namespace hho2d

#endif
