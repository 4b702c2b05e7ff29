// Command-line front end: solve one problem, run a refinement sweep, or
// verify the equilibrium identities of a solution.

#include <CLI11.hpp>

#include "hho2d/run.hpp"

int main(int argc, char **argv) {
  hho2d::RunConfig config;

  CLI::App app{"Hybrid high-order solver for 2D linear elasticity with "
               "equilibrated face tractions"};
  app.add_option("cmd", config.command, "solve | converge | verify")->option_text("COMMAND");
  app.add_option("--command", config.command, "same as the positional command");
  app.add_option("--k", config.k, "polynomial degree (1..4)");
  app.add_option("--n", config.n, "structured mesh subdivisions per side");
  app.add_option("--mesh", config.mesh_path, "mesh file (overrides --n)");
  app.add_option("--meshes", config.meshes, "sweep subdivision list for converge")
      ->delimiter(',');
  app.add_option("--mu", config.mu, "shear modulus (> 0)");
  app.add_option("--lambda", config.lambda, "volumetric Lame coefficient (>= 0)");
  app.add_option("--case", config.case_name, "manufactured | polynomial | zero");
  app.add_option("--out", config.out, "output file (per-command default)");
  app.add_option("--solution", config.solution_path, "verify a saved solution file");
  app.add_flag("--no-condense", [&config](size_t) { config.condense = false; },
               "solve the full cell+face system instead of the condensed one");
  app.add_option("--threads", config.threads, "worker threads (0 = all cores)");
  app.add_option("--seed", config.seed, "seed of the polynomial case");
  app.add_flag("--unsafe-k", config.allow_high_degree,
               "allow k > 4 (conditioning of the scaled monomials degrades)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp &e) {
    return app.exit(e);
  } catch (const CLI::ParseError &e) {
    app.exit(e);
    return hho2d::exit_usage;
  }

  return hho2d::run(config);
}
