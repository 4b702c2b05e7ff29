// Element-local post-processing that exposes the equilibrium structure of
// the discretization: a DOF transfer map into the jump-stabilized inner
// product, a degree-k stress reconstruction, and per-face tractions that
// balance across interfaces and satisfy the discrete local equilibrium
// relation. Verification routines check both identities on a solved state.

#ifndef HHO2D_EQUILIBRIUM_HPP
#define HHO2D_EQUILIBRIUM_HPP

#include <iosfwd>
#include <vector>

#include <Eigen/Dense>

#include "hho2d/assembly.hpp"
#include "hho2d/local_operators.hpp"

namespace hho2d {

struct PostprocessOperators {
  // Invertible transfer of the hybrid unknowns; acts as the identity on
  // rigid-body DOF vectors and on reductions of degree-(k+1) displacements.
  Eigen::MatrixXd transfer;  // N x N

  // Coefficients of the symmetric stress field in the degree-k cell basis.
  Eigen::MatrixXd stress_xx, stress_xy, stress_yy;  // n0 x N

  // Per-face traction coefficients in the face basis (x block then y block).
  std::vector<Eigen::MatrixXd> traction;  // 2(k+1) x N
};

/// Builds the transfer map (saddle-point solve with the rigid-body closure
/// pinned to the input), the stress expansion, and the face tractions.
PostprocessOperators build_postprocess(const ElementOperators &ops);

std::vector<PostprocessOperators> build_all_postprocess(
    const std::vector<ElementOperators> &ops, unsigned n_threads = 1);

/// Evaluate the stress of a local DOF vector at a point.
Eigen::Matrix2d evaluate_stress(const ElementOperators &ops, const PostprocessOperators &post,
                                const Eigen::VectorXd &dofs, const Point &p);

/// Evaluate the traction of local face lf at a point of that face.
Vector2 evaluate_traction(const ElementOperators &ops, const PostprocessOperators &post, int lf,
                          const Eigen::VectorXd &dofs, const Point &p);

struct ElementResidual {
  int element = 0;
  double raw = 0.;
  double normalized = 0.;
};

struct FaceDefect {
  int face = 0;
  double raw = 0.;
  double normalized = 0.;
};

/// Residual of the discrete local equilibrium relation on every element:
/// the stress of the solution tested against an orthonormalized degree-k
/// basis must reproduce the load moments, with the boundary term carried by
/// the tractions. `f` must be the load used in the solve.
std::vector<ElementResidual> verify_local_equilibrium(
    const Mesh &mesh, const std::vector<ElementOperators> &ops,
    const std::vector<PostprocessOperators> &post, const Solution &sol, const VectorField &f,
    unsigned n_threads = 1);

/// L2 defect of the two-sided traction sum on every interior face,
/// normalized by the larger single-sided traction norm.
std::vector<FaceDefect> verify_traction_balance(const Mesh &mesh,
                                                const std::vector<ElementOperators> &ops,
                                                const std::vector<PostprocessOperators> &post,
                                                const Solution &sol, unsigned n_threads = 1);

/// Combined report: one row per element residual, one per interior-face
/// defect.
void write_verification_csv(const std::vector<ElementResidual> &elements,
                            const std::vector<FaceDefect> &faces, std::ostream &out);

}  // namespace hho2d

#endif
