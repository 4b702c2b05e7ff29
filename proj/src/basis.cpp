#include "hho2d/basis.hpp"

#include <stdexcept>

namespace hho2d {

ScalarCellBasis::ScalarCellBasis(const Point &centroid, double diameter, int degree)
    : m_center(centroid), m_scale(diameter), m_degree(degree) {
  if (degree < 0) throw std::invalid_argument("ScalarCellBasis: negative degree");
  if (!(diameter > 0.)) throw std::invalid_argument("ScalarCellBasis: non-positive diameter");
  m_powers.reserve(size());
  for (int l = 0; l <= degree; l++)
    for (int a = l; a >= 0; a--) m_powers.push_back({a, l - a});
}

ScalarCellBasis::ScalarCellBasis(const Mesh &mesh, int element, int degree)
    : ScalarCellBasis(mesh.element(element).centroid, mesh.element(element).diameter, degree) {}

Eigen::VectorXd ScalarCellBasis::values(const Point &p) const {
  const double xi = (p.x - m_center.x) / m_scale;
  const double eta = (p.y - m_center.y) / m_scale;
  // Powers up front, then a table lookup per member.
  std::vector<double> px(m_degree + 1, 1.), py(m_degree + 1, 1.);
  for (int i = 1; i <= m_degree; i++) {
    px[i] = px[i - 1] * xi;
    py[i] = py[i - 1] * eta;
  }
  Eigen::VectorXd v(size());
  for (int i = 0; i < size(); i++) v(i) = px[m_powers[i][0]] * py[m_powers[i][1]];
  return v;
}

Eigen::MatrixXd ScalarCellBasis::gradients(const Point &p) const {
  const double xi = (p.x - m_center.x) / m_scale;
  const double eta = (p.y - m_center.y) / m_scale;
  std::vector<double> px(m_degree + 1, 1.), py(m_degree + 1, 1.);
  for (int i = 1; i <= m_degree; i++) {
    px[i] = px[i - 1] * xi;
    py[i] = py[i - 1] * eta;
  }
  Eigen::MatrixXd g(size(), 2);
  for (int i = 0; i < size(); i++) {
    const int a = m_powers[i][0], b = m_powers[i][1];
    g(i, 0) = (a == 0) ? 0. : a * px[a - 1] * py[b] / m_scale;
    g(i, 1) = (b == 0) ? 0. : b * px[a] * py[b - 1] / m_scale;
  }
  return g;
}

namespace {

int monomial_index(int a, int b) {
  const int l = a + b;
  return l * (l + 1) / 2 + (l - a);
}

}  // namespace

Eigen::MatrixXd ScalarCellBasis::derivative_matrix(int axis) const {
  if (m_degree == 0) return Eigen::MatrixXd::Zero(1, 1);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(cell_poly_dim(m_degree - 1), size());
  for (int i = 0; i < size(); i++) {
    const int a = m_powers[i][0], b = m_powers[i][1];
    if (axis == 0) {
      if (a > 0) D(monomial_index(a - 1, b), i) = a / m_scale;
    } else {
      if (b > 0) D(monomial_index(a, b - 1), i) = b / m_scale;
    }
  }
  return D;
}

Eigen::MatrixXd ScalarCellBasis::trace_matrix(const Face &face) const {
  // On the face, the scaled cell coordinates are affine in the arc-length
  // parameter s: (x - x_T)/h_T = alpha + beta s, (y - y_T)/h_T = gamma +
  // delta s. Each monomial trace expands into powers of s by convolution.
  const double alpha = (face.midpoint.x - m_center.x) / m_scale;
  const double beta = face.tangent.x() / m_scale;
  const double gamma = (face.midpoint.y - m_center.y) / m_scale;
  const double delta = face.tangent.y() / m_scale;

  const int n = m_degree + 1;
  Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, size());

  // Binomial rows of (alpha + beta s)^a and (gamma + delta s)^b, reused
  // across members by incremental multiplication.
  std::vector<std::vector<double>> pow_x(n), pow_y(n);
  pow_x[0] = {1.};
  pow_y[0] = {1.};
  for (int a = 1; a <= m_degree; a++) {
    pow_x[a].assign(a + 1, 0.);
    pow_y[a].assign(a + 1, 0.);
    for (int i = 0; i < a; i++) {
      pow_x[a][i] += alpha * pow_x[a - 1][i];
      pow_x[a][i + 1] += beta * pow_x[a - 1][i];
      pow_y[a][i] += gamma * pow_y[a - 1][i];
      pow_y[a][i + 1] += delta * pow_y[a - 1][i];
    }
  }

  std::vector<double> prod(n);
  for (int col = 0; col < size(); col++) {
    const int a = m_powers[col][0], b = m_powers[col][1];
    std::fill(prod.begin(), prod.end(), 0.);
    for (int i = 0; i <= a; i++)
      for (int j = 0; j <= b; j++) prod[i + j] += pow_x[a][i] * pow_y[b][j];
    // Face basis member r is (s/h_F)^r.
    double hpow = 1.;
    for (int r = 0; r <= a + b; r++) {
      T(r, col) = prod[r] * hpow;
      hpow *= face.length;
    }
  }
  return T;
}

std::vector<Vector2> vector_values(const ScalarCellBasis &basis, const Point &p) {
  const Eigen::VectorXd phi = basis.values(p);
  std::vector<Vector2> out(2 * basis.size());
  for (int i = 0; i < basis.size(); i++) {
    out[i] = Vector2(phi(i), 0.);
    out[basis.size() + i] = Vector2(0., phi(i));
  }
  return out;
}

std::vector<Eigen::Matrix2d> vector_jacobians(const ScalarCellBasis &basis, const Point &p) {
  const Eigen::MatrixXd g = basis.gradients(p);
  std::vector<Eigen::Matrix2d> out(2 * basis.size(), Eigen::Matrix2d::Zero());
  for (int i = 0; i < basis.size(); i++) {
    out[i].row(0) = g.row(i);
    out[basis.size() + i].row(1) = g.row(i);
  }
  return out;
}

std::vector<Eigen::Matrix2d> vector_symgrads(const ScalarCellBasis &basis, const Point &p) {
  std::vector<Eigen::Matrix2d> out = vector_jacobians(basis, p);
  for (auto &J : out) J = 0.5 * (J + J.transpose()).eval();
  return out;
}

std::vector<Eigen::Matrix2d> vector_skews(const ScalarCellBasis &basis, const Point &p) {
  std::vector<Eigen::Matrix2d> out = vector_jacobians(basis, p);
  for (auto &J : out) J = 0.5 * (J - J.transpose()).eval();
  return out;
}

std::vector<double> vector_divergences(const ScalarCellBasis &basis, const Point &p) {
  const Eigen::MatrixXd g = basis.gradients(p);
  std::vector<double> out(2 * basis.size());
  for (int i = 0; i < basis.size(); i++) {
    out[i] = g(i, 0);
    out[basis.size() + i] = g(i, 1);
  }
  return out;
}

ScalarFaceBasis::ScalarFaceBasis(const Face &face, int degree) : m_face(face), m_degree(degree) {
  if (degree < 0) throw std::invalid_argument("ScalarFaceBasis: negative degree");
}

Eigen::VectorXd ScalarFaceBasis::values(const Point &p) const {
  const double s =
      m_face.tangent.dot(Vector2(p.x - m_face.midpoint.x, p.y - m_face.midpoint.y)) /
      m_face.length;
  Eigen::VectorXd v(size());
  double pw = 1.;
  for (int j = 0; j < size(); j++) {
    v(j) = pw;
    pw *= s;
  }
  return v;
}

namespace {

template <typename Basis>
Eigen::VectorXd project_impl(const std::function<double(const Point &)> &f, const Basis &basis,
                             const QuadratureRule &rule) {
  using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const int n = basis.size();

  // Mass and moments accumulate with identical operation order, so that the
  // moment vector of a basis member is bitwise a mass-matrix column and the
  // projection reproduces coordinate vectors to solver precision.
  Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
  for (const auto &qp : rule.points) {
    const Eigen::VectorXd phi = basis.values(qp.point);
    for (int i = 0; i < n; i++) M.col(i) += (qp.weight * phi(i)) * phi;
    b += (qp.weight * f(qp.point)) * phi;
  }

  // LU in extended precision: elimination applies the same row operations
  // to the right-hand side as to the matrix columns, so moment vectors of
  // basis members (bitwise mass columns) project back to coordinate vectors
  // essentially exactly, and one refinement pass covers generic data. The
  // SPD check guards against degenerate geometry.
  if (Eigen::LLT<Eigen::MatrixXd>(M).info() != Eigen::Success)
    throw std::runtime_error("l2_project: mass matrix not SPD (degenerate geometry)");
  const LongMatrix Ml = M.cast<long double>();
  const LongVector bl = b.cast<long double>();
  const Eigen::PartialPivLU<LongMatrix> lu(Ml);
  LongVector c = lu.solve(bl);
  c += lu.solve(bl - Ml * c);
  return c.cast<double>();
}

}  // namespace

Eigen::VectorXd l2_project(const std::function<double(const Point &)> &f,
                           const ScalarCellBasis &basis, const QuadratureRule &rule) {
  return project_impl(f, basis, rule);
}

Eigen::VectorXd l2_project(const std::function<double(const Point &)> &f,
                           const ScalarFaceBasis &basis, const QuadratureRule &rule) {
  return project_impl(f, basis, rule);
}

Eigen::VectorXd reduce(const Mesh &mesh, int element, int k, const VectorField &u, int exactness) {
  if (k < 0) throw std::invalid_argument("reduce: negative degree");
  const Element &T = mesh.element(element);
  const LocalDofLayout layout{k, T.n_faces()};
  const int q = exactness >= 0 ? exactness : 2 * (k + 1);

  Eigen::VectorXd dofs(layout.size());

  const ScalarCellBasis cb(mesh, element, k);
  const QuadratureRule crule = element_rule(mesh, element, q);
  auto ux = [&u](const Point &p) { return u(p).x(); };
  auto uy = [&u](const Point &p) { return u(p).y(); };
  dofs.segment(0, cb.size()) = l2_project(ux, cb, crule);
  dofs.segment(cb.size(), cb.size()) = l2_project(uy, cb, crule);

  for (int lf = 0; lf < T.n_faces(); lf++) {
    const ScalarFaceBasis fb(mesh.face(T.faces[lf]), k);
    const QuadratureRule frule = segment_rule(mesh, T.faces[lf], q);
    const int off = layout.face_offset(lf);
    dofs.segment(off, fb.size()) = l2_project(ux, fb, frule);
    dofs.segment(off + fb.size(), fb.size()) = l2_project(uy, fb, frule);
  }
  return dofs;
}

}  // namespace hho2d
