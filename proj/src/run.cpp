#include "hho2d/run.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <stdexcept>

#include "hho2d/convergence.hpp"
#include "hho2d/equilibrium.hpp"
#include "hho2d/parallel.hpp"

namespace hho2d {

namespace {

std::string validate(const RunConfig &c) {
  if (c.command != "solve" && c.command != "converge" && c.command != "verify")
    return "command must be one of: solve, converge, verify";
  if (c.k < 1) return "the polynomial degree k must be >= 1";
  if (c.k > 4 && !c.allow_high_degree)
    return "k > 4 is outside the validated range; pass --unsafe-k to override";
  if (!(c.mu > 0.)) return "mu must be > 0";
  if (c.lambda < 0.) return "lambda must be >= 0";
  if (c.case_name != "manufactured" && c.case_name != "polynomial" && c.case_name != "zero")
    return "case must be one of: manufactured, polynomial, zero";
  if (c.mesh_path.empty() && c.n < 1) return "the subdivision count n must be >= 1";
  if (c.command == "converge") {
    if (c.meshes.size() < 3) return "converge needs at least 3 meshes for the slopes";
    for (size_t i = 0; i < c.meshes.size(); i++) {
      if (c.meshes[i] < 1) return "mesh subdivisions must be >= 1";
      if (i > 0 && c.meshes[i] <= c.meshes[i - 1]) return "mesh list must be increasing";
    }
    if (!c.mesh_path.empty()) return "converge uses structured meshes; --mesh is not supported";
  }
  if (!c.solution_path.empty() && c.command != "verify")
    return "--solution only applies to the verify command";
  return {};
}

Mesh make_mesh(const RunConfig &c) {
  if (!c.mesh_path.empty()) return load_mesh_file(c.mesh_path);
  return build_structured_triangular(c.n);
}

std::ofstream open_output(const std::string &path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open output file: " + path);
  return out;
}

void print_errors(const ErrorBundle &e) {
  std::printf("h            %.6e\n", e.h);
  std::printf("err_en_uh    %.6e\n", e.en_uh);
  std::printf("err_en_tuh   %.6e\n", e.en_tuh);
  std::printf("err_L2_uh    %.6e\n", e.l2_uh);
  std::printf("err_L2_tuh   %.6e\n", e.l2_tuh);
  std::printf("err_pL2      %.6e\n", e.pl2);
}

int run_solve(const RunConfig &c, unsigned threads) {
  const Mesh mesh = make_mesh(c);
  const ProblemCase problem = case_by_name(c.case_name, c.k, c.mu, c.lambda, c.seed);
  const auto ops = build_all_element_operators(mesh, c.k, c.mu, c.lambda, threads);

  Solution sol;
  if (c.condense) {
    const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u, threads);
    sol = solve(mesh, ops, sys);
  } else {
    sol = solve_uncondensed(mesh, ops, problem.f, problem.u, threads);
  }

  const std::string out_path = c.out.empty() ? "solution.csv" : c.out;
  auto out = open_output(out_path);
  save_solution(sol, out);
  std::printf("solution written to %s (%d elements, %d faces)\n", out_path.c_str(),
              mesh.n_elements(), mesh.n_faces());

  if (problem.has_exact) {
    const auto post = build_all_postprocess(ops, threads);
    print_errors(compute_errors(mesh, ops, post, sol, problem, threads));
  }
  return exit_ok;
}

int run_converge(const RunConfig &c, unsigned threads) {
  const ProblemCase problem = case_by_name(c.case_name, c.k, c.mu, c.lambda, c.seed);
  const SweepTable table = convergence_sweep(c.k, c.meshes, problem, threads, c.condense);

  const std::string out_path = c.out.empty() ? "convergence.csv" : c.out;
  auto out = open_output(out_path);
  write_sweep_csv(table, out);

  std::printf("sweep written to %s\n", out_path.c_str());
  for (int col = 0; col < 5; col++)
    std::printf("slope %-11s %.3f\n", SweepTable::column_names[col], table.slopes[col]);
  return exit_ok;
}

int run_verify(const RunConfig &c, unsigned threads) {
  const Mesh mesh = make_mesh(c);
  const ProblemCase problem = case_by_name(c.case_name, c.k, c.mu, c.lambda, c.seed);
  const auto ops = build_all_element_operators(mesh, c.k, c.mu, c.lambda, threads);

  Solution sol;
  if (!c.solution_path.empty()) {
    sol = load_solution_file(c.solution_path);
    check_compatible(mesh, sol);
    if (sol.k != c.k) throw std::runtime_error("solution degree does not match --k");
  } else if (c.condense) {
    const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u, threads);
    sol = solve(mesh, ops, sys);
  } else {
    sol = solve_uncondensed(mesh, ops, problem.f, problem.u, threads);
  }

  const auto post = build_all_postprocess(ops, threads);
  const auto element_rows = verify_local_equilibrium(mesh, ops, post, sol, problem.f, threads);
  const auto face_rows = verify_traction_balance(mesh, ops, post, sol, threads);

  const std::string out_path = c.out.empty() ? "verification.csv" : c.out;
  auto out = open_output(out_path);
  write_verification_csv(element_rows, face_rows, out);

  double max_element = 0., max_face = 0.;
  for (const auto &r : element_rows) max_element = std::max(max_element, r.normalized);
  for (const auto &r : face_rows) max_face = std::max(max_face, r.normalized);
  std::printf("report written to %s\n", out_path.c_str());
  std::printf("max normalized equilibrium residual  %.3e\n", max_element);
  std::printf("max normalized traction defect       %.3e\n", max_face);

  if (max_element > 1e-8 || max_face > 1e-8) {
    std::fprintf(stderr, "verification failed: residuals above 1e-8\n");
    return exit_numerical;
  }
  return exit_ok;
}

}  // namespace

int run(const RunConfig &config) {
  const std::string problem = validate(config);
  if (!problem.empty()) {
    std::fprintf(stderr, "error: %s\n", problem.c_str());
    return exit_usage;
  }

  const unsigned threads = resolve_threads(config.threads);
  try {
    if (config.command == "solve") return run_solve(config, threads);
    if (config.command == "converge") return run_converge(config, threads);
    return run_verify(config, threads);
  } catch (const std::exception &e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_numerical;
  }
}

}  // namespace hho2d
