// Error norms against an exact solution, refinement sweeps with
// least-squares convergence slopes, and deterministic CSV output.

#ifndef HHO2D_CONVERGENCE_HPP
#define HHO2D_CONVERGENCE_HPP

#include <array>
#include <iosfwd>
#include <vector>

#include "hho2d/assembly.hpp"
#include "hho2d/cases.hpp"
#include "hho2d/equilibrium.hpp"

namespace hho2d {

/// Error bundle of one solve. Energy errors measure the DOF mismatch with
/// the reduced exact solution in the local form; L2 errors compare cell
/// coefficients; the reconstruction error integrates against the exact
/// field directly. Reductions use quadrature exact to degree 2(k+2).
struct ErrorBundle {
  double h = 0.;
  double en_uh = 0.;    // energy error of the solution DOFs
  double en_tuh = 0.;   // energy error of the transferred DOFs
  double l2_uh = 0.;    // cell L2 error of the solution
  double l2_tuh = 0.;   // cell L2 error of the transferred solution
  double pl2 = 0.;      // L2 error of the reconstructed displacement

  std::array<double, 5> columns() const { return {en_uh, en_tuh, l2_uh, l2_tuh, pl2}; }
};

ErrorBundle compute_errors(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                           const std::vector<PostprocessOperators> &post, const Solution &sol,
                           const ProblemCase &problem, unsigned n_threads = 1);

/// Energy error of the solution DOFs, or of the transferred DOFs when
/// `postprocessed` is set.
double energy_error(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                    const std::vector<PostprocessOperators> &post, const Solution &sol,
                    const ProblemCase &problem, bool postprocessed, unsigned n_threads = 1);

struct L2Errors {
  double cell;         // solution cell unknowns vs the reduced field
  double cell_transferred;
  double reconstruction;  // reconstructed displacement vs the exact field
};

L2Errors l2_errors(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                   const std::vector<PostprocessOperators> &post, const Solution &sol,
                   const ProblemCase &problem, unsigned n_threads = 1);

/// Least-squares slope of log(err) against log(h); needs >= 2 points.
double regression_slope(const std::vector<double> &h, const std::vector<double> &err);

struct SweepTable {
  int k = 1;
  std::vector<ErrorBundle> rows;        // one per mesh, h strictly decreasing
  std::array<double, 5> slopes{};       // regression slope per error column

  static constexpr std::array<const char *, 5> column_names = {
      "err_en_uh", "err_en_tuh", "err_L2_uh", "err_L2_tuh", "err_pL2"};
};

/// Solve the problem on structured meshes n in `ns` (at least 3 for the
/// slopes) and regress every error column.
SweepTable convergence_sweep(int k, const std::vector<int> &ns, const ProblemCase &problem,
                             unsigned n_threads = 1, bool condense = true);

/// CSV: header, one row per mesh, then a 'slope' footer row.
void write_sweep_csv(const SweepTable &table, std::ostream &out);

/// Parse a file produced by write_sweep_csv (used for round-trip checks).
SweepTable read_sweep_csv(std::istream &in);

}  // namespace hho2d

#endif
