// Global problem: face-based DOF numbering with Dirichlet data folded in,
// static condensation of the cell unknowns via per-element Schur
// complements, the sparse SPD solve, and solution (de)serialization.

#ifndef HHO2D_ASSEMBLY_HPP
#define HHO2D_ASSEMBLY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "hho2d/local_operators.hpp"

namespace hho2d {

/// Global numbering of face unknowns: interior faces are free, boundary
/// faces are constrained. Faces are numbered by (midpoint y, midpoint x) so
/// the assembled matrix is reproducible.
struct DofMap {
  DofMap(const Mesh &mesh, int k);

  int k = 1;
  int face_block = 0;          // 2(k+1) unknowns per face
  std::vector<int> order;      // face ids in global numbering order
  std::vector<int> offset;     // per face id: start of its free unknowns, -1 when constrained
  int n_free = 0;
};

/// Condensed system on the free face unknowns plus everything needed to
/// recover the cell unknowns element by element.
struct GlobalSystem {
  DofMap dofs;
  Eigen::SparseMatrix<double> matrix;
  Eigen::VectorXd rhs;
  std::vector<Eigen::VectorXd> dirichlet;  // per face id; empty for free faces

  // Cell recovery: u_cell = recover_rhs - recover_faces * (stacked local face DOFs).
  struct CellRecovery {
    Eigen::VectorXd recover_rhs;
    Eigen::MatrixXd recover_faces;
  };
  std::vector<CellRecovery> recovery;
};

/// Discrete solution: per-element cell coefficients and per-face
/// coefficients, with the parameters they were computed for.
struct Solution {
  int k = 1;
  double mu = 1.;
  double lambda = 0.;
  std::vector<Eigen::VectorXd> cell;  // 2*dim P^k(T) each
  std::vector<Eigen::VectorXd> face;  // 2*(k+1) each

  /// Stack of the element's cell block and face blocks, in the local layout.
  Eigen::VectorXd local_dofs(const Mesh &mesh, int el) const;
};

/// Assemble the condensed system for load f and Dirichlet datum g. The cell
/// block of every local matrix must be SPD; a failed factorization aborts.
GlobalSystem assemble(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                      const VectorField &f, const VectorField &g, unsigned n_threads = 1);

/// Solve the condensed system (relative residual <= 1e-12, enforced with
/// iterative refinement) and recover the cell unknowns.
Solution solve(const Mesh &mesh, const std::vector<ElementOperators> &ops,
               const GlobalSystem &system);

/// Reference path without condensation: one sparse SPD solve on cell plus
/// face unknowns together.
Solution solve_uncondensed(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                           const VectorField &f, const VectorField &g, unsigned n_threads = 1);

/// Load moments (f, v_T)_T of one element against the vector cell basis,
/// with the same rule the assembly uses.
Eigen::VectorXd load_moments(const ElementOperators &ops, const VectorField &f);

void save_solution(const Solution &sol, std::ostream &out);
Solution load_solution(std::istream &in);
void save_solution_file(const Solution &sol, const std::string &path);
Solution load_solution_file(const std::string &path);

/// Throws when the solution's shape does not match the mesh/degree.
void check_compatible(const Mesh &mesh, const Solution &sol);

}  // namespace hho2d

#endif
