#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <sstream>

#include "hho2d/convergence.hpp"
#include "oracles.hpp"

using namespace hho2d;

TEST_CASE("manufactured case: load matches minus the stress divergence") {
  const ProblemCase c = manufactured_case(1., 1.);
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  const double step = 1e-6;
  for (int trial = 0; trial < 50; trial++) {
    const Point p{dist(rng), dist(rng)};
    // Finite-difference divergence of the stress, row by row.
    Eigen::Vector2d div_sigma;
    for (int i = 0; i < 2; i++) {
      const double ddx = (c.sigma(Point{p.x + step, p.y})(i, 0) -
                          c.sigma(Point{p.x - step, p.y})(i, 0)) /
                         (2. * step);
      const double ddy = (c.sigma(Point{p.x, p.y + step})(i, 1) -
                          c.sigma(Point{p.x, p.y - step})(i, 1)) /
                         (2. * step);
      div_sigma(i) = ddx + ddy;
    }
    CHECK((div_sigma + c.f(p)).norm() <= 1e-5);
    // The divergence of the displacement is identically one.
    CHECK(c.grad_u(p).trace() == doctest::Approx(1.).epsilon(1e-13));
  }
}

TEST_CASE("polynomial case: load matches minus the stress divergence") {
  const ProblemCase c = polynomial_case(2, 99, 1.3, 2.1);
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> dist(0.05, 0.95);
  const double step = 1e-6;
  for (int trial = 0; trial < 20; trial++) {
    const Point p{dist(rng), dist(rng)};
    Eigen::Vector2d div_sigma;
    for (int i = 0; i < 2; i++) {
      const double ddx = (c.sigma(Point{p.x + step, p.y})(i, 0) -
                          c.sigma(Point{p.x - step, p.y})(i, 0)) /
                         (2. * step);
      const double ddy = (c.sigma(Point{p.x, p.y + step})(i, 1) -
                          c.sigma(Point{p.x, p.y - step})(i, 1)) /
                         (2. * step);
      div_sigma(i) = ddx + ddy;
    }
    CHECK((div_sigma + c.f(p)).norm() <= 1e-4 * (1. + c.f(p).norm()));
  }
}

TEST_CASE("error bundle is zero for the zero problem") {
  const Mesh mesh = build_structured_triangular(2);
  const ProblemCase problem = zero_case();
  const auto ops = build_all_element_operators(mesh, 1, problem.mu, problem.lambda);
  const auto post = build_all_postprocess(ops);
  const Solution sol = solve(mesh, ops, assemble(mesh, ops, problem.f, problem.u));
  const ErrorBundle e = compute_errors(mesh, ops, post, sol, problem);
  CHECK(e.en_uh == 0.);
  CHECK(e.en_tuh == 0.);
  CHECK(e.l2_uh == 0.);
  CHECK(e.l2_tuh == 0.);
  CHECK(e.pl2 == 0.);
}

TEST_CASE("energy error of an exactly representable solution is at scale zero") {
  const Mesh mesh = build_structured_triangular(2);
  for (int k : {1, 2}) {
    const ProblemCase problem = polynomial_case(k, 2024 + k, 1., 1.);
    const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda);
    const auto post = build_all_postprocess(ops);
    const Solution sol = solve(mesh, ops, assemble(mesh, ops, problem.f, problem.u));

    // Scale of the solution in the same norm.
    double scale2 = 0.;
    for (int el = 0; el < mesh.n_elements(); el++)
      scale2 += ops[el].energy(sol.local_dofs(mesh, el));
    const double scale = std::sqrt(scale2);

    CHECK(energy_error(mesh, ops, post, sol, problem, false) <= 1e-9 * scale);
    CHECK(energy_error(mesh, ops, post, sol, problem, true) <= 1e-9 * scale);
    const L2Errors l2 = l2_errors(mesh, ops, post, sol, problem);
    CHECK(l2.cell <= 1e-10);
    CHECK(l2.cell_transferred <= 1e-10);
    CHECK(l2.reconstruction <= 1e-10);
  }
}

TEST_CASE("regression slope recovers exact power laws") {
  std::vector<double> h{0.5, 0.25, 0.125, 0.0625};
  for (double p : {1., 2.5, 4.}) {
    std::vector<double> err;
    for (double hi : h) err.push_back(3.7 * std::pow(hi, p));
    CHECK(regression_slope(h, err) == doctest::Approx(p).epsilon(1e-12));
  }
  CHECK_THROWS_AS(regression_slope({1.}, {1.}), std::invalid_argument);
}

TEST_CASE("energy error halves at rate k+1 between consecutive meshes") {
  const ProblemCase problem = manufactured_case();
  const int k = 1;
  std::array<double, 2> en{}, pl2{};
  int idx = 0;
  for (int n : {16, 32}) {
    const Mesh mesh = build_structured_triangular(n);
    const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda, 2);
    const Solution sol = solve(mesh, ops, assemble(mesh, ops, problem.f, problem.u, 2));
    const auto post = build_all_postprocess(ops, 2);
    const ErrorBundle e = compute_errors(mesh, ops, post, sol, problem, 2);
    en[idx] = e.en_uh;
    pl2[idx] = e.pl2;
    idx++;
  }
  CHECK(en[0] / en[1] == doctest::Approx(std::pow(2., k + 1)).epsilon(0.25));
  CHECK(pl2[0] / pl2[1] == doctest::Approx(std::pow(2., k + 2)).epsilon(0.25));
}

TEST_CASE("sweep runs, slopes land near theory, csv round-trips") {
  const ProblemCase problem = manufactured_case();
  const SweepTable table = convergence_sweep(1, {2, 4, 8}, problem, 2);
  REQUIRE(table.rows.size() == 3);
  for (size_t i = 1; i < table.rows.size(); i++) {
    CHECK(table.rows[i].h < table.rows[i - 1].h);
    for (int c = 0; c < 5; c++)
      CHECK(table.rows[i].columns()[c] < table.rows[i - 1].columns()[c]);
  }

  std::stringstream buffer;
  write_sweep_csv(table, buffer);
  std::string header;
  {
    std::stringstream copy(buffer.str());
    std::getline(copy, header);
  }
  CHECK(header == "meshsize,err_en_uh,err_en_tuh,err_L2_uh,err_L2_tuh,err_pL2");

  const std::string first = buffer.str();
  const SweepTable parsed = read_sweep_csv(buffer);
  REQUIRE(parsed.rows.size() == table.rows.size());
  for (size_t i = 0; i < parsed.rows.size(); i++) {
    CHECK(parsed.rows[i].h == table.rows[i].h);
    CHECK(parsed.rows[i].columns() == table.rows[i].columns());
  }
  CHECK(parsed.slopes == table.slopes);

  std::stringstream again;
  write_sweep_csv(parsed, again);
  CHECK(again.str() == first);

  CHECK_THROWS_AS(convergence_sweep(1, {2, 4}, problem), std::invalid_argument);
  CHECK_THROWS_AS(convergence_sweep(1, {4, 4, 8}, problem), std::invalid_argument);
}

TEST_CASE("empty sweep emits a header-only file") {
  SweepTable empty;
  std::stringstream out;
  write_sweep_csv(empty, out);
  CHECK(out.str() == "meshsize,err_en_uh,err_en_tuh,err_L2_uh,err_L2_tuh,err_pL2\n");
}
