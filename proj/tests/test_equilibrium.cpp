#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "hho2d/cases.hpp"
#include "hho2d/equilibrium.hpp"
#include "hho2d/polynomial2d.hpp"
#include "oracles.hpp"

using namespace hho2d;

namespace {

Solution interpolate_solution(const Mesh &mesh, int k, const ProblemCase &problem) {
  Solution sol;
  sol.k = k;
  sol.mu = problem.mu;
  sol.lambda = problem.lambda;
  sol.cell.resize(mesh.n_elements());
  sol.face.resize(mesh.n_faces());
  for (int el = 0; el < mesh.n_elements(); el++) {
    const Eigen::VectorXd dofs = reduce(mesh, el, k, problem.u, 2 * (k + 2));
    sol.cell[el] = dofs.head(2 * cell_poly_dim(k));
    const Element &T = mesh.element(el);
    const LocalDofLayout layout{k, T.n_faces()};
    for (int lf = 0; lf < T.n_faces(); lf++)
      sol.face[T.faces[lf]] = dofs.segment(layout.face_offset(lf), 2 * (k + 1));
  }
  return sol;
}

}  // namespace

TEST_CASE("transfer map is invertible and fixes rigid-body unknowns") {
  const Mesh mesh = testing::perturbed_triangular(2, 0.2, 71);
  for (int k : {1, 2, 3}) {
    const ElementOperators ops(mesh, 4, k, 1.4, 0.6);
    const PostprocessOperators post = build_postprocess(ops);
    const int N = ops.layout.size();

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(post.transfer);
    CHECK(qr.rank() == N);

    // Exact up to roundoff of the (analytically zero) right-hand side,
    // whose entries scale with the form magnitude.
    const double form_scale =
        std::max(1., (ops.local_form + 2. * ops.mu * ops.jump).cwiseAbs().maxCoeff());
    CHECK((post.transfer * ops.rigid_dofs - ops.rigid_dofs).cwiseAbs().maxCoeff() <=
          1e-12 * form_scale);
  }
}

TEST_CASE("transfer map fixes reductions of degree-(k+1) displacements") {
  const Mesh mesh = build_structured_triangular(2);
  std::mt19937 rng(73);
  std::uniform_real_distribution<double> dist(-1., 1.);
  for (int k : {1, 2, 3}) {
    const ElementOperators ops(mesh, 1, k, 1., 1.);
    const PostprocessOperators post = build_postprocess(ops);
    Poly2 px, py;
    for (int a = 0; a <= k + 1; a++)
      for (int b = 0; a + b <= k + 1; b++) {
        px = px + Poly2::monomial(a, b, dist(rng));
        py = py + Poly2::monomial(a, b, dist(rng));
      }
    auto u = [&](const Point &p) { return Vector2(px(p), py(p)); };
    const Eigen::VectorXd dofs = reduce(mesh, 1, k, u);
    CHECK((post.transfer * dofs - dofs).cwiseAbs().maxCoeff() <=
          1e-10 * dofs.cwiseAbs().maxCoeff());
  }
}

TEST_CASE("transfer map satisfies its defining equation") {
  const Mesh mesh = testing::perturbed_triangular(2, 0.15, 79);
  std::mt19937 rng(83);
  for (int k : {1, 2}) {
    for (int el : {0, 5}) {
      const ElementOperators ops(mesh, el, k, 1.2, 2.5);
      const PostprocessOperators post = build_postprocess(ops);

      // Matrix identity against the assembled forms.
      const Eigen::MatrixXd lhs = ops.local_form_jump * post.transfer;
      const Eigen::MatrixXd rhs = ops.local_form + 2. * ops.mu * ops.jump;
      CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-12 * rhs.cwiseAbs().maxCoeff());

      // Direct evaluation of both forms for random pairs.
      for (int trial = 0; trial < 20; trial++) {
        const Eigen::VectorXd w = testing::random_dofs(ops.layout.size(), rng);
        const Eigen::VectorXd v = testing::random_dofs(ops.layout.size(), rng);
        const double lhs_form = testing::evaluate_local_form(ops, post.transfer * w, v, true);
        const double rhs_form = testing::evaluate_local_form(ops, w, v, false) +
                                2. * ops.mu * (ops.jump_factor * w).dot(ops.jump_factor * v);
        const double scale =
            std::sqrt(testing::evaluate_local_form(ops, w, w, false) *
                      testing::evaluate_local_form(ops, v, v, false)) +
            1e-30;
        CHECK(std::abs(lhs_form - rhs_form) <= 1e-12 * scale + 1e-14);
      }
    }
  }
}

TEST_CASE("stress reconstruction: constant stress, rigid kernel, symmetry") {
  const Mesh mesh = build_structured_triangular(2);
  for (int k : {1, 2}) {
    for (double lambda : {0., 1.5}) {
      const double mu = 1.1;
      const ElementOperators ops(mesh, 3, k, mu, lambda);
      const PostprocessOperators post = build_postprocess(ops);

      // Linear displacement: sigma = 2 mu sym(A) + lambda tr(A) I constant.
      Eigen::Matrix2d A;
      A << 0.7, -0.3, 0.5, 0.2;
      auto u = [&A](const Point &p) { return Vector2(A.row(0).dot(Vector2(p.x, p.y)),
                                                     A.row(1).dot(Vector2(p.x, p.y))); };
      const Eigen::VectorXd dofs = reduce(mesh, 3, k, u);
      const Eigen::Matrix2d expected =
          mu * (A + A.transpose()) + lambda * A.trace() * Eigen::Matrix2d::Identity();
      for (const auto &qp : ops.cell_rule.points) {
        const Eigen::Matrix2d s = evaluate_stress(ops, post, dofs, qp.point);
        CHECK((s - expected).norm() <= 1e-11);
        CHECK(s(0, 1) == s(1, 0));
      }

      const Eigen::VectorXd r = ops.rigid_dof_vector(Vector2(1., -2.), 0.8);
      CHECK(evaluate_stress(ops, post, r, mesh.element(3).centroid).norm() <= 1e-11);
    }
  }
}

TEST_CASE("tractions of reduced degree-(k+1) fields equal the exact normal stress") {
  const Mesh mesh = build_structured_triangular(2);
  for (int k : {1, 2, 3}) {
    const ProblemCase problem = polynomial_case(k, 555 + k, 1., 2.0);
    const int el = 5;
    const ElementOperators ops(mesh, el, k, problem.mu, problem.lambda);
    const PostprocessOperators post = build_postprocess(ops);
    const Eigen::VectorXd dofs = reduce(mesh, el, k, problem.u);
    for (int lf = 0; lf < ops.layout.n_faces; lf++) {
      const Vector2 n = ops.face_normals[lf];
      for (const auto &qp : ops.face_rules[lf].points) {
        const Vector2 got = evaluate_traction(ops, post, lf, dofs, qp.point);
        const Vector2 expected = problem.sigma(qp.point) * n;
        CHECK((got - expected).norm() <= 1e-10 * (1. + expected.norm()));
      }
    }

    const Eigen::VectorXd r = ops.rigid_dof_vector(Vector2(0.5, 0.5), -1.);
    for (int lf = 0; lf < ops.layout.n_faces; lf++) {
      const Eigen::VectorXd coeff = post.traction[lf] * r;
      CHECK(coeff.cwiseAbs().maxCoeff() <= 1e-11);
    }
  }
}

TEST_CASE("equilibrium representation identity on random pairs") {
  // The master oracle: the local form evaluated through the stress and
  // traction reconstructions, both sides computed independently.
  const Mesh mesh = testing::perturbed_triangular(2, 0.2, 91);
  std::mt19937 rng(97);
  for (int k : {1, 2}) {
    for (double lambda : {0., 1., 1e3}) {
      const auto ops = build_all_element_operators(mesh, k, 1., lambda, 2);
      const auto post = build_all_postprocess(ops, 2);
      for (int el = 0; el < mesh.n_elements(); el++) {
        for (int trial = 0; trial < 10; trial++) {
          const Eigen::VectorXd w = testing::random_dofs(ops[el].layout.size(), rng);
          const Eigen::VectorXd v = testing::random_dofs(ops[el].layout.size(), rng);
          const double lhs = w.dot(ops[el].local_form * v);
          const double rhs = testing::evaluate_equilibrium_form(ops[el], post[el], w, v);
          const double scale = std::sqrt(std::max(w.dot(ops[el].local_form * w), 0.) *
                                         std::max(v.dot(ops[el].local_form * v), 0.)) +
                               1e-30;
          CHECK(std::abs(lhs - rhs) <= 1e-12 * scale + 1e-14);
        }
      }
    }
  }
}

TEST_CASE("local equilibrium residuals vanish on solved states") {
  // Zero data: all residuals identically zero.
  {
    const Mesh mesh = build_structured_triangular(2);
    const ProblemCase problem = zero_case();
    const auto ops = build_all_element_operators(mesh, 1, problem.mu, problem.lambda);
    const auto post = build_all_postprocess(ops);
    const Solution sol = solve(mesh, ops, assemble(mesh, ops, problem.f, problem.u));
    for (const auto &r : verify_local_equilibrium(mesh, ops, post, sol, problem.f)) {
      CHECK(r.raw == 0.);
      CHECK(r.normalized == 0.);
    }
    for (const auto &d : verify_traction_balance(mesh, ops, post, sol)) {
      CHECK(d.raw == 0.);
    }
  }

  // Polynomial and trigonometric loads: machine-precision identities.
  for (const char *name : {"polynomial", "manufactured"}) {
    for (int k : {1, 2}) {
      const Mesh mesh = build_structured_triangular(4);
      const ProblemCase problem = case_by_name(name, k, 1., 1., 777);
      const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda, 2);
      const auto post = build_all_postprocess(ops, 2);
      const Solution sol = solve(mesh, ops, assemble(mesh, ops, problem.f, problem.u, 2));

      for (const auto &r : verify_local_equilibrium(mesh, ops, post, sol, problem.f, 2))
        CHECK(r.normalized <= 1e-10);
      for (const auto &d : verify_traction_balance(mesh, ops, post, sol, 2))
        CHECK(d.normalized <= 1e-10);
    }
  }
}

TEST_CASE("equilibrium identities hold on quadrilateral and mixed meshes") {
  for (const Mesh &mesh : {testing::quad_mesh(3), testing::mixed_mesh()}) {
    for (const char *name : {"polynomial", "manufactured"}) {
      const int k = 2;
      const ProblemCase problem = case_by_name(name, k, 1., 1., 99);
      const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda);
      const auto post = build_all_postprocess(ops);
      const Solution sol = solve(mesh, ops, assemble(mesh, ops, problem.f, problem.u));
      for (const auto &r : verify_local_equilibrium(mesh, ops, post, sol, problem.f))
        CHECK(r.normalized <= 1e-10);
      for (const auto &d : verify_traction_balance(mesh, ops, post, sol))
        CHECK(d.normalized <= 1e-10);
    }
  }
}

TEST_CASE("interpolated (non-solved) states violate local equilibrium") {
  // The identities are properties of the solved system, not of arbitrary
  // DOF vectors; the reduction of the exact solution must show O(1)
  // normalized residuals on coarse meshes.
  const Mesh mesh = build_structured_triangular(2);
  const ProblemCase problem = manufactured_case();
  const int k = 1;
  const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda);
  const auto post = build_all_postprocess(ops);
  const Solution interp = interpolate_solution(mesh, k, problem);
  double max_norm = 0.;
  for (const auto &r : verify_local_equilibrium(mesh, ops, post, interp, problem.f))
    max_norm = std::max(max_norm, r.normalized);
  CHECK(max_norm > 1e-6);
}

TEST_CASE("verification report serialization") {
  std::vector<ElementResidual> elements{{0, 1e-12, 2e-13}, {1, 0., 0.}};
  std::vector<FaceDefect> faces{{4, 5e-11, 1e-12}};
  std::stringstream out;
  write_verification_csv(elements, faces, out);
  std::string line;
  std::getline(out, line);
  CHECK(line == "entity,id,raw_residual,normalized_residual");
  std::getline(out, line);
  CHECK(line.substr(0, 10) == "element,0,");
  std::getline(out, line);
  std::getline(out, line);
  CHECK(line.substr(0, 7) == "face,4,");
}
