#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include "hho2d/assembly.hpp"
#include "hho2d/cases.hpp"
#include "hho2d/convergence.hpp"
#include "hho2d/equilibrium.hpp"
#include "oracles.hpp"

using namespace hho2d;

TEST_CASE("zero data gives the zero solution") {
  const Mesh mesh = build_structured_triangular(2);
  const ProblemCase problem = zero_case();
  const auto ops = build_all_element_operators(mesh, 2, problem.mu, problem.lambda);
  const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u);
  CHECK(sys.rhs.norm() == 0.);
  const Solution sol = solve(mesh, ops, sys);
  for (const auto &c : sol.cell) CHECK(c.norm() == 0.);
  for (const auto &f : sol.face) CHECK(f.norm() == 0.);
}

TEST_CASE("system dimension counts free face unknowns only") {
  const Mesh mesh = build_structured_triangular(1);
  const auto ops = build_all_element_operators(mesh, 1, 1., 1.);
  const GlobalSystem sys = assemble(mesh, ops, zero_case().f, zero_case().u);
  // One interior face, two components, two basis members each.
  CHECK(sys.dofs.n_free == 4);
  CHECK(sys.matrix.rows() == 4);
}

TEST_CASE("condensed matrix is symmetric and SPD") {
  const ProblemCase problem = manufactured_case();
  for (auto [k, n] : {std::pair{1, 4}, std::pair{4, 4}, std::pair{4, 16}}) {
    const Mesh mesh = build_structured_triangular(n);
    const auto ops = build_all_element_operators(mesh, k, 1., 1., 2);
    const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u, 2);
    const Eigen::SparseMatrix<double> diff =
        Eigen::SparseMatrix<double>(sys.matrix.transpose()) - sys.matrix;
    double scale = 0., asym = 0.;
    for (int c = 0; c < sys.matrix.outerSize(); c++) {
      for (Eigen::SparseMatrix<double>::InnerIterator it(sys.matrix, c); it; ++it)
        scale = std::max(scale, std::abs(it.value()));
      for (Eigen::SparseMatrix<double>::InnerIterator it(diff, c); it; ++it)
        asym = std::max(asym, std::abs(it.value()));
    }
    CHECK(asym <= 1e-13 * scale);
    Eigen::SimplicialLLT<Eigen::SparseMatrix<double>> llt(sys.matrix);
    CHECK(llt.info() == Eigen::Success);
  }
}

TEST_CASE("polynomial solutions are reproduced through the full pipeline") {
  const Mesh mesh = build_structured_triangular(2);
  for (int k : {1, 2}) {
    // k = 1 also exercises the pure shear limit lambda = 0.
    const ProblemCase problem = polynomial_case(k, 1234 + k, 1., k == 1 ? 0. : 0.7);
    const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda);
    const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u);
    const Solution sol = solve(mesh, ops, sys);

    double scale = 0.;
    for (int el = 0; el < mesh.n_elements(); el++)
      scale = std::max(scale, sol.local_dofs(mesh, el).cwiseAbs().maxCoeff());
    for (int el = 0; el < mesh.n_elements(); el++) {
      const Eigen::VectorXd expected = reduce(mesh, el, k, problem.u, 2 * (k + 2));
      const Eigen::VectorXd got = sol.local_dofs(mesh, el);
      CHECK((got - expected).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    }
  }
}

TEST_CASE("polynomial exactness holds on quadrilateral and mixed meshes") {
  for (const Mesh &mesh : {testing::quad_mesh(2), testing::mixed_mesh()}) {
    for (int k : {1, 2}) {
      const ProblemCase problem = polynomial_case(k, 31 + k, 1., 1.5);
      const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda);
      const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u);
      const Solution sol = solve(mesh, ops, sys);
      double scale = 0.;
      for (int el = 0; el < mesh.n_elements(); el++)
        scale = std::max(scale, sol.local_dofs(mesh, el).cwiseAbs().maxCoeff());
      for (int el = 0; el < mesh.n_elements(); el++) {
        const Eigen::VectorXd expected = reduce(mesh, el, k, problem.u, 2 * (k + 2));
        CHECK((sol.local_dofs(mesh, el) - expected).cwiseAbs().maxCoeff() <= 1e-9 * scale);
      }
    }
  }
}

TEST_CASE("an all-Dirichlet single-element mesh solves by direct recovery") {
  const Mesh tri(std::vector<Point>{{0, 0}, {1, 0}, {0, 1}}, {{0, 1, 2}});
  const int k = 2;
  const ProblemCase problem = polynomial_case(k, 7, 1., 1.);
  const auto ops = build_all_element_operators(tri, k, problem.mu, problem.lambda);
  const GlobalSystem sys = assemble(tri, ops, problem.f, problem.u);
  CHECK(sys.dofs.n_free == 0);
  const Solution sol = solve(tri, ops, sys);
  const Eigen::VectorXd expected = reduce(tri, 0, k, problem.u, 2 * (k + 2));
  const double scale = expected.cwiseAbs().maxCoeff();
  CHECK((sol.local_dofs(tri, 0) - expected).cwiseAbs().maxCoeff() <= 1e-9 * scale);
}

TEST_CASE("rigid-body Dirichlet data is reproduced exactly") {
  const Mesh mesh = build_structured_triangular(3);
  const int k = 2;
  auto rigid = [](const Point &p) { return Vector2(0.2 - 0.9 * p.y, -0.4 + 0.9 * p.x); };
  auto zero = [](const Point &) { return Vector2::Zero(); };
  const auto ops = build_all_element_operators(mesh, k, 1., 1.);
  const GlobalSystem sys = assemble(mesh, ops, zero, rigid);
  const Solution sol = solve(mesh, ops, sys);
  for (int el = 0; el < mesh.n_elements(); el++) {
    const Eigen::VectorXd expected = reduce(mesh, el, k, rigid);
    CHECK((sol.local_dofs(mesh, el) - expected).cwiseAbs().maxCoeff() <= 1e-11);
  }
  // The reconstructed stress of a rigid motion vanishes.
  const auto post = build_all_postprocess(ops);
  for (int el : {0, 7}) {
    const Eigen::Matrix2d s =
        evaluate_stress(ops[el], post[el], sol.local_dofs(mesh, el), mesh.element(el).centroid);
    CHECK(s.norm() <= 1e-11);
  }
}

TEST_CASE("condensed and uncondensed solves agree per DOF") {
  const Mesh mesh = build_structured_triangular(4);
  const int k = 2;
  const ProblemCase problem = manufactured_case();
  const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda, 2);
  const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u, 2);
  const Solution condensed = solve(mesh, ops, sys);
  const Solution full = solve_uncondensed(mesh, ops, problem.f, problem.u, 2);

  double scale = 0.;
  for (int el = 0; el < mesh.n_elements(); el++)
    scale = std::max(scale, condensed.local_dofs(mesh, el).cwiseAbs().maxCoeff());
  for (int el = 0; el < mesh.n_elements(); el++) {
    const Eigen::VectorXd a = condensed.local_dofs(mesh, el);
    const Eigen::VectorXd b = full.local_dofs(mesh, el);
    CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-11 * scale);
  }
}

TEST_CASE("energy error shrinks under refinement") {
  const ProblemCase problem = manufactured_case();
  const int k = 1;
  double prev = -1.;
  for (int n : {4, 8}) {
    const Mesh mesh = build_structured_triangular(n);
    const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda, 2);
    const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u, 2);
    const Solution sol = solve(mesh, ops, sys);
    const auto post = build_all_postprocess(ops, 2);
    const ErrorBundle errors = compute_errors(mesh, ops, post, sol, problem, 2);
    if (prev >= 0.) CHECK(errors.en_uh < prev);
    prev = errors.en_uh;
  }
}

TEST_CASE("solution CSV round-trips bit-exactly") {
  const Mesh mesh = build_structured_triangular(2);
  const int k = 2;
  const ProblemCase problem = manufactured_case();
  const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda);
  const Solution sol = solve(mesh, ops, assemble(mesh, ops, problem.f, problem.u));

  std::stringstream buffer;
  save_solution(sol, buffer);
  const std::string first = buffer.str();
  const Solution loaded = load_solution(buffer);
  CHECK(loaded.k == sol.k);
  CHECK(loaded.mu == sol.mu);
  CHECK(loaded.lambda == sol.lambda);
  REQUIRE(loaded.cell.size() == sol.cell.size());
  REQUIRE(loaded.face.size() == sol.face.size());
  for (size_t i = 0; i < sol.cell.size(); i++) CHECK(loaded.cell[i] == sol.cell[i]);
  for (size_t i = 0; i < sol.face.size(); i++) CHECK(loaded.face[i] == sol.face[i]);

  std::stringstream again;
  save_solution(loaded, again);
  CHECK(again.str() == first);

  check_compatible(mesh, loaded);
  const Mesh other = build_structured_triangular(3);
  CHECK_THROWS(check_compatible(other, loaded));
}

TEST_CASE("solution reader rejects damaged files") {
  std::istringstream no_k("entity,id,component,basis_index,coefficient\ncell,0,0,0,1\n");
  CHECK_THROWS(load_solution(no_k));
  std::istringstream bad_header("# k 1\nwrong,header\n");
  CHECK_THROWS(load_solution(bad_header));
  std::istringstream bad_kind("# k 1\nentity,id,component,basis_index,coefficient\nblob,0,0,0,1\n");
  CHECK_THROWS(load_solution(bad_kind));
  std::istringstream bad_idx("# k 1\nentity,id,component,basis_index,coefficient\ncell,0,0,9,1\n");
  CHECK_THROWS(load_solution(bad_idx));
}
