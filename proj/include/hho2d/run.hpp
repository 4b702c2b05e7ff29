// Front-end logic behind the command-line tool: configuration validation
// and the solve / converge / verify workflows. Kept out of main() so tests
// can drive it in-process.

#ifndef HHO2D_RUN_HPP
#define HHO2D_RUN_HPP

#include <string>
#include <vector>

namespace hho2d {

struct RunConfig {
  std::string command;  // solve | converge | verify
  int k = 1;
  int n = 8;                   // structured mesh subdivisions (ignored with mesh_path)
  std::string mesh_path;       // load a mesh file instead of the generator
  std::vector<int> meshes = {4, 8, 16, 32};  // converge sweep
  double mu = 1.;
  double lambda = 1.;
  std::string case_name = "manufactured";
  std::string out;            // output file; per-command default when empty
  std::string solution_path;  // verify a previously saved solution
  bool condense = true;
  unsigned threads = 1;  // 0 = hardware concurrency
  unsigned seed = 42;    // polynomial case
  bool allow_high_degree = false;
};

inline constexpr int exit_ok = 0;
inline constexpr int exit_numerical = 1;
inline constexpr int exit_usage = 2;

/// Runs the configured command. Returns exit_usage on invalid
/// configuration, exit_numerical on solver/IO failures or verification
/// residuals above 1e-8, exit_ok otherwise.
int run(const RunConfig &config);

}  // namespace hho2d

#endif
