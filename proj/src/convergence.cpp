#include "hho2d/convergence.hpp"

#include <cmath>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hho2d/parallel.hpp"

namespace hho2d {

ErrorBundle compute_errors(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                           const std::vector<PostprocessOperators> &post, const Solution &sol,
                           const ProblemCase &problem, unsigned n_threads) {
  check_compatible(mesh, sol);
  const int k = sol.k;
  const int q_ref = 2 * (k + 2);  // the error integrands are not polynomial

  struct Acc {
    double en_uh = 0., en_tuh = 0., l2_uh = 0., l2_tuh = 0., pl2 = 0.;
  };
  std::vector<Acc> acc(mesh.n_elements());

  parallel_for(mesh.n_elements(), n_threads, [&](int el) {
    const ElementOperators &op = ops[el];
    const int nc0 = op.n0();
    const int nc1 = op.n1();
    const Eigen::VectorXd dofs = sol.local_dofs(mesh, el);
    const Eigen::VectorXd reduced = reduce(mesh, el, k, problem.u, q_ref);
    const Eigen::VectorXd transferred = post[el].transfer * dofs;

    const Eigen::VectorXd e = dofs - reduced;
    const Eigen::VectorXd et = transferred - reduced;
    Acc a;
    a.en_uh = e.dot(op.local_form * e);
    a.en_tuh = et.dot(op.local_form * et);

    const Eigen::MatrixXd mass0 = op.cell_mass.topLeftCorner(nc0, nc0);
    auto cell_l2 = [&](const Eigen::VectorXd &d) {
      return d.head(nc0).dot(mass0 * d.head(nc0)) + d.tail(nc0).dot(mass0 * d.tail(nc0));
    };
    a.l2_uh = cell_l2(e.head(2 * nc0));
    a.l2_tuh = cell_l2(et.head(2 * nc0));

    const Eigen::VectorXd rec = op.reconstruction * dofs;
    const QuadratureRule rule = element_rule(mesh, el, q_ref);
    for (const auto &qp : rule.points) {
      const Eigen::VectorXd phi = op.cell_basis.values(qp.point);
      const Vector2 diff = problem.u(qp.point) -
                           Vector2(phi.dot(rec.head(nc1)), phi.dot(rec.tail(nc1)));
      a.pl2 += qp.weight * diff.squaredNorm();
    }
    acc[el] = a;
  });

  ErrorBundle out;
  out.h = mesh.mesh_size();
  for (const Acc &a : acc) {
    out.en_uh += a.en_uh;
    out.en_tuh += a.en_tuh;
    out.l2_uh += a.l2_uh;
    out.l2_tuh += a.l2_tuh;
    out.pl2 += a.pl2;
  }
  out.en_uh = std::sqrt(std::max(out.en_uh, 0.));
  out.en_tuh = std::sqrt(std::max(out.en_tuh, 0.));
  out.l2_uh = std::sqrt(std::max(out.l2_uh, 0.));
  out.l2_tuh = std::sqrt(std::max(out.l2_tuh, 0.));
  out.pl2 = std::sqrt(std::max(out.pl2, 0.));
  return out;
}

double energy_error(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                    const std::vector<PostprocessOperators> &post, const Solution &sol,
                    const ProblemCase &problem, bool postprocessed, unsigned n_threads) {
  const ErrorBundle e = compute_errors(mesh, ops, post, sol, problem, n_threads);
  return postprocessed ? e.en_tuh : e.en_uh;
}

L2Errors l2_errors(const Mesh &mesh, const std::vector<ElementOperators> &ops,
                   const std::vector<PostprocessOperators> &post, const Solution &sol,
                   const ProblemCase &problem, unsigned n_threads) {
  const ErrorBundle e = compute_errors(mesh, ops, post, sol, problem, n_threads);
  return {e.l2_uh, e.l2_tuh, e.pl2};
}

double regression_slope(const std::vector<double> &h, const std::vector<double> &err) {
  if (h.size() != err.size() || h.size() < 2)
    throw std::invalid_argument("regression_slope: need matching lists of >= 2 points");
  const int n = static_cast<int>(h.size());
  double sx = 0., sy = 0., sxx = 0., sxy = 0.;
  for (int i = 0; i < n; i++) {
    const double x = std::log(h[i]);
    const double y = std::log(err[i]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

SweepTable convergence_sweep(int k, const std::vector<int> &ns, const ProblemCase &problem,
                             unsigned n_threads, bool condense) {
  if (ns.size() < 3)
    throw std::invalid_argument("convergence_sweep: need at least 3 meshes for slopes");
  for (size_t i = 1; i < ns.size(); i++)
    if (ns[i] <= ns[i - 1])
      throw std::invalid_argument("convergence_sweep: mesh list must be increasing");

  SweepTable table;
  table.k = k;
  for (int n : ns) {
    const Mesh mesh = build_structured_triangular(n);
    const auto ops = build_all_element_operators(mesh, k, problem.mu, problem.lambda, n_threads);
    Solution sol;
    if (condense) {
      const GlobalSystem sys = assemble(mesh, ops, problem.f, problem.u, n_threads);
      sol = solve(mesh, ops, sys);
    } else {
      sol = solve_uncondensed(mesh, ops, problem.f, problem.u, n_threads);
    }
    const auto post = build_all_postprocess(ops, n_threads);
    table.rows.push_back(compute_errors(mesh, ops, post, sol, problem, n_threads));
  }

  std::vector<double> hs;
  for (const auto &row : table.rows) hs.push_back(row.h);
  for (int c = 0; c < 5; c++) {
    std::vector<double> errs;
    for (const auto &row : table.rows) errs.push_back(row.columns()[c]);
    table.slopes[c] = regression_slope(hs, errs);
  }
  return table;
}

void write_sweep_csv(const SweepTable &table, std::ostream &out) {
  out << "meshsize";
  for (const char *name : SweepTable::column_names) out << ',' << name;
  out << "\n";
  if (table.rows.empty()) return;
  char buf[40];
  auto emit = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out << buf;
  };
  for (const ErrorBundle &row : table.rows) {
    emit(row.h);
    for (double v : row.columns()) {
      out << ',';
      emit(v);
    }
    out << "\n";
  }
  out << "slope";
  for (double s : table.slopes) {
    out << ',';
    emit(s);
  }
  out << "\n";
}

SweepTable read_sweep_csv(std::istream &in) {
  SweepTable table;
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("sweep csv: empty file");
  std::string expected = "meshsize";
  for (const char *name : SweepTable::column_names) expected += std::string(",") + name;
  if (line != expected) throw std::runtime_error("sweep csv: unexpected header");

  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string first;
    std::getline(ls, first, ',');
    std::array<double, 6> vals{};
    int got = 0;
    std::string tok;
    while (got < 5 && std::getline(ls, tok, ',')) vals[got++] = std::stod(tok);
    if (got != 5) throw std::runtime_error("sweep csv: short row");
    if (first == "slope") {
      for (int c = 0; c < 5; c++) table.slopes[c] = vals[c];
    } else {
      ErrorBundle row;
      row.h = std::stod(first);
      row.en_uh = vals[0];
      row.en_tuh = vals[1];
      row.l2_uh = vals[2];
      row.l2_tuh = vals[3];
      row.pl2 = vals[4];
      table.rows.push_back(row);
    }
  }
  return table;
}

}  // namespace hho2d
