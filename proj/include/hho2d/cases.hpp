// Test problems on the unit square: the trigonometric benchmark with unit
// divergence, random polynomial displacement fields with exactly derived
// loads, and the trivial zero problem.

#ifndef HHO2D_CASES_HPP
#define HHO2D_CASES_HPP

#include <functional>
#include <string>

#include "hho2d/basis.hpp"
#include "hho2d/mesh.hpp"

namespace hho2d {

using MatrixField = std::function<Eigen::Matrix2d(const Point &)>;

/// A pure-displacement problem: Dirichlet datum equals the exact solution
/// on the whole boundary.
struct ProblemCase {
  std::string name;
  double mu = 1.;
  double lambda = 1.;
  VectorField u;        // exact displacement
  MatrixField grad_u;   // its Jacobian, (grad u)_{ij} = d u_i / d x_j
  VectorField f;        // load
  bool has_exact = true;

  /// Stress 2mu grad_s u + lambda (div u) I at a point.
  Eigen::Matrix2d sigma(const Point &p) const {
    const Eigen::Matrix2d g = grad_u(p);
    return mu * (g + g.transpose()) +
           lambda * g.trace() * Eigen::Matrix2d::Identity();
  }
};

/// u = (sin(pi x) sin(pi y) + x/2, cos(pi x) cos(pi y) + y/2). Its
/// divergence is identically 1, so the load does not depend on lambda.
ProblemCase manufactured_case(double mu = 1., double lambda = 1.);

/// Random displacement with components in P^{k+1}, coefficients in [-1,1]
/// drawn from the seed; the load is derived by exact differentiation.
ProblemCase polynomial_case(int k, unsigned seed, double mu = 1., double lambda = 1.);

/// f = 0, g = 0, solution identically zero.
ProblemCase zero_case(double mu = 1., double lambda = 1.);

ProblemCase case_by_name(const std::string &name, int k, double mu, double lambda,
                         unsigned seed = 42);

}  // namespace hho2d

#endif
