#include "hho2d/local_operators.hpp"

#include <optional>
#include <stdexcept>

#include "hho2d/parallel.hpp"

namespace hho2d {

namespace {

// Extended-precision solve of a small SPD system against a block of
// right-hand sides. The monomial mass matrices reach condition ~1e8 at
// degree 4; double-precision solves would leak ~1e-8 into quantities that
// must cancel exactly (stabilization of reduced polynomial fields).
Eigen::MatrixXd solve_spd_extended(const Eigen::MatrixXd &M, const Eigen::MatrixXd &rhs) {
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LongMatrix Ml = M.cast<long double>();
  const Eigen::PartialPivLU<LongMatrix> lu(Ml);
  LongMatrix x = lu.solve(rhs.cast<long double>());
  x += lu.solve(rhs.cast<long double>() - Ml * x);
  return x.cast<double>();
}

}  // namespace

// Shared by the reconstruction and the equilibrium transfer: both are
// symmetric saddle-point systems whose fixed points (rigid-body unknowns,
// reduced polynomial fields) must survive at the 1e-12 level.
Eigen::MatrixXd solve_saddle_extended(const Eigen::MatrixXd &aug, const Eigen::MatrixXd &rhs,
                                      const char *what) {
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  const LongMatrix Al = aug.cast<long double>();
  const Eigen::FullPivLU<LongMatrix> lu(Al);
  if (!lu.isInvertible())
    throw std::runtime_error(std::string(what) + ": singular local system");
  LongMatrix x = lu.solve(rhs.cast<long double>());
  x += lu.solve(rhs.cast<long double>() - Al * x);
  return x.cast<double>();
}

ElementOperators::ElementOperators(const Mesh &mesh, int el, int kk, double mu_, double lambda_)
    : element(el),
      k(kk),
      mu(mu_),
      lambda(lambda_),
      cell_basis(mesh, el, kk + 1),
      cell_rule(element_rule(mesh, el, 2 * (kk + 1))) {
  if (k < 1) throw std::invalid_argument("ElementOperators: degree must be >= 1");
  if (!(mu > 0.)) throw std::invalid_argument("ElementOperators: mu must be > 0");
  if (lambda < 0.) throw std::invalid_argument("ElementOperators: lambda must be >= 0");

  const Element &T = mesh.element(el);
  h = T.diameter;
  area = T.area;
  centroid = T.centroid;
  const int nfaces = T.n_faces();
  layout = LocalDofLayout{k, nfaces};
  const int N = layout.size();
  const int nc0 = n0(), nc1 = n1();
  const int nfc = k + 1;  // scalar face dim at degree k
  const int nf1 = k + 2;  // scalar face dim at degree k+1

  face_bases.reserve(nfaces);
  face_rules.reserve(nfaces);
  for (int lf = 0; lf < nfaces; lf++) {
    const Face &F = mesh.face(T.faces[lf]);
    face_bases.emplace_back(F, k + 1);
    face_rules.push_back(segment_rule(mesh, T.faces[lf], 2 * (k + 1)));
    face_normals.push_back(mesh.outward_normal(el, lf));
    face_lengths.push_back(F.length);
  }

  // --------------------------------------------------------------------
  // Mass matrices, moments, coefficient-space calculus
  // --------------------------------------------------------------------
  cell_mass = mass_matrix(cell_basis, cell_rule);
  cell_moments = Eigen::VectorXd::Zero(nc1);
  for (const auto &qp : cell_rule.points) cell_moments += qp.weight * cell_basis.values(qp.point);

  dx = cell_basis.derivative_matrix(0);
  dy = cell_basis.derivative_matrix(1);

  face_mass.reserve(nfaces);
  face_moments.reserve(nfaces);
  face_trace.reserve(nfaces);
  for (int lf = 0; lf < nfaces; lf++) {
    face_mass.push_back(mass_matrix(face_bases[lf], face_rules[lf]));
    Eigen::VectorXd fm = Eigen::VectorXd::Zero(nf1);
    for (const auto &qp : face_rules[lf].points)
      fm += qp.weight * face_bases[lf].values(qp.point);
    face_moments.push_back(std::move(fm));
    face_trace.push_back(cell_basis.trace_matrix(face_bases[lf].face()));
  }

  const Eigen::MatrixXd mass0 = cell_mass.topLeftCorner(nc0, nc0);
  const Eigen::LLT<Eigen::MatrixXd> mass0_llt(mass0);
  if (mass0_llt.info() != Eigen::Success)
    throw std::runtime_error("ElementOperators: cell mass matrix not SPD");

  // --------------------------------------------------------------------
  // Symmetric-gradient stiffness of the degree-(k+1) vector basis
  // --------------------------------------------------------------------
  Eigen::MatrixXd sxx = Eigen::MatrixXd::Zero(nc1, nc1);
  Eigen::MatrixXd syy = Eigen::MatrixXd::Zero(nc1, nc1);
  Eigen::MatrixXd sxy = Eigen::MatrixXd::Zero(nc1, nc1);
  for (const auto &qp : cell_rule.points) {
    const Eigen::MatrixXd g = cell_basis.gradients(qp.point);
    sxx.noalias() += qp.weight * g.col(0) * g.col(0).transpose();
    syy.noalias() += qp.weight * g.col(1) * g.col(1).transpose();
    sxy.noalias() += qp.weight * g.col(0) * g.col(1).transpose();
  }
  Eigen::MatrixXd stiff(2 * nc1, 2 * nc1);
  stiff.topLeftCorner(nc1, nc1) = sxx + 0.5 * syy;
  stiff.bottomRightCorner(nc1, nc1) = syy + 0.5 * sxx;
  stiff.topRightCorner(nc1, nc1) = 0.5 * sxy.transpose();
  stiff.bottomLeftCorner(nc1, nc1) = 0.5 * sxy;

  // --------------------------------------------------------------------
  // Reconstruction right-hand side: (grad_s v_T, grad_s w)_T plus the
  // face terms (v_F - v_T, grad_s w n_TF)_F
  // --------------------------------------------------------------------
  Eigen::MatrixXd brec = Eigen::MatrixXd::Zero(2 * nc1, N);
  brec.block(0, 0, 2 * nc1, nc0) = stiff.block(0, 0, 2 * nc1, nc0);
  brec.block(0, nc0, 2 * nc1, nc0) = stiff.block(0, nc1, 2 * nc1, nc0);

  for (int lf = 0; lf < nfaces; lf++) {
    const Vector2 n = face_normals[lf];
    const int foff = layout.face_offset(lf);
    for (const auto &qp : face_rules[lf].points) {
      const Eigen::MatrixXd g = cell_basis.gradients(qp.point);
      const Eigen::VectorXd phi = cell_basis.values(qp.point);
      const Eigen::VectorXd psi = face_bases[lf].values(qp.point);
      // grad_s w  n for w in the x / y blocks of the vector basis.
      Eigen::MatrixXd tx(nc1, 2), ty(nc1, 2);
      tx.col(0) = g.col(0) * n.x() + 0.5 * g.col(1) * n.y();
      tx.col(1) = 0.5 * g.col(1) * n.x();
      ty.col(0) = 0.5 * g.col(0) * n.y();
      ty.col(1) = 0.5 * g.col(0) * n.x() + g.col(1) * n.y();
      for (int c = 0; c < 2; c++) {
        // Face unknowns pair positively, the cell trace negatively.
        const Eigen::VectorXd wx = qp.weight * tx.col(c);
        const Eigen::VectorXd wy = qp.weight * ty.col(c);
        brec.block(0, foff + c * nfc, nc1, nfc).noalias() += wx * psi.head(nfc).transpose();
        brec.block(nc1, foff + c * nfc, nc1, nfc).noalias() += wy * psi.head(nfc).transpose();
        brec.block(0, c * nc0, nc1, nc0).noalias() -= wx * phi.head(nc0).transpose();
        brec.block(nc1, c * nc0, nc1, nc0).noalias() -= wy * phi.head(nc0).transpose();
      }
    }
  }

  // --------------------------------------------------------------------
  // Rigid-body closure functionals. Row scaling keeps the augmented
  // systems well conditioned under refinement.
  // --------------------------------------------------------------------
  const double s_mean = 1. / area;
  const double s_skew = h / area;

  // On degree-(k+1) coefficient vectors: componentwise mean and the moment
  // of the rotation part of the gradient.
  Eigen::MatrixXd closure_poly = Eigen::MatrixXd::Zero(3, 2 * nc1);
  closure_poly.block(0, 0, 1, nc1) = s_mean * cell_moments.transpose();
  closure_poly.block(1, nc1, 1, nc1) = s_mean * cell_moments.transpose();
  const Eigen::VectorXd m0 = cell_moments.head(nc0);
  closure_poly.block(2, 0, 1, nc1) = -0.5 * s_skew * (m0.transpose() * dy);
  closure_poly.block(2, nc1, 1, nc1) = 0.5 * s_skew * (m0.transpose() * dx);

  // Matching functionals of a DOF vector: cell means and the boundary skew
  // moment carried by the face unknowns.
  closure_dofs = Eigen::MatrixXd::Zero(3, N);
  closure_dofs.block(0, 0, 1, nc0) = s_mean * m0.transpose();
  closure_dofs.block(1, nc0, 1, nc0) = s_mean * m0.transpose();
  for (int lf = 0; lf < nfaces; lf++) {
    const Vector2 n = face_normals[lf];
    const Eigen::VectorXd fm = face_moments[lf].head(nfc);
    const int foff = layout.face_offset(lf);
    closure_dofs.block(2, foff, 1, nfc) = -0.5 * s_skew * n.y() * fm.transpose();
    closure_dofs.block(2, foff + nfc, 1, nfc) = 0.5 * s_skew * n.x() * fm.transpose();
  }

  // --------------------------------------------------------------------
  // Reconstruction: saddle-point solve of the symmetric-gradient problem
  // with the three closure constraints
  // --------------------------------------------------------------------
  const int na = 2 * nc1 + 3;
  Eigen::MatrixXd aug = Eigen::MatrixXd::Zero(na, na);
  aug.topLeftCorner(2 * nc1, 2 * nc1) = stiff;
  aug.block(2 * nc1, 0, 3, 2 * nc1) = closure_poly;
  aug.block(0, 2 * nc1, 2 * nc1, 3) = closure_poly.transpose();

  Eigen::MatrixXd rhs(na, N);
  rhs.topRows(2 * nc1) = brec;
  rhs.bottomRows(3) = closure_dofs;

  reconstruction =
      solve_saddle_extended(aug, rhs, "ElementOperators reconstruction").topRows(2 * nc1);

  // --------------------------------------------------------------------
  // Divergence reconstruction: one mass solve against degree-k tests
  // --------------------------------------------------------------------
  Eigen::MatrixXd bdiv = Eigen::MatrixXd::Zero(nc0, N);
  for (const auto &qp : cell_rule.points) {
    const Eigen::MatrixXd g = cell_basis.gradients(qp.point);
    const Eigen::VectorXd phi = qp.weight * cell_basis.values(qp.point);
    bdiv.block(0, 0, nc0, nc0).noalias() += phi.head(nc0) * g.col(0).head(nc0).transpose();
    bdiv.block(0, nc0, nc0, nc0).noalias() += phi.head(nc0) * g.col(1).head(nc0).transpose();
  }
  for (int lf = 0; lf < nfaces; lf++) {
    const Vector2 n = face_normals[lf];
    const int foff = layout.face_offset(lf);
    for (const auto &qp : face_rules[lf].points) {
      const Eigen::VectorXd phi = cell_basis.values(qp.point).head(nc0);
      const Eigen::VectorXd psi = face_bases[lf].values(qp.point).head(nfc);
      const Eigen::VectorXd wphi = qp.weight * phi;
      for (int c = 0; c < 2; c++) {
        const double nc = (c == 0) ? n.x() : n.y();
        bdiv.block(0, foff + c * nfc, nc0, nfc).noalias() += nc * wphi * psi.transpose();
        bdiv.block(0, c * nc0, nc0, nc0).noalias() -= nc * wphi * phi.transpose();
      }
    }
  }
  divergence = solve_spd_extended(mass0, bdiv);

  // --------------------------------------------------------------------
  // Gram matrices of the reconstructions and of the cell unknown
  // --------------------------------------------------------------------
  recon_gram = reconstruction.transpose() * stiff * reconstruction;
  div_gram = divergence.transpose() * mass0 * divergence;

  cell_gram = Eigen::MatrixXd::Zero(N, N);
  {
    Eigen::MatrixXd cc(2 * nc0, 2 * nc0);
    cc.topLeftCorner(nc0, nc0) = stiff.topLeftCorner(nc0, nc0);
    cc.topRightCorner(nc0, nc0) = stiff.block(0, nc1, nc0, nc0);
    cc.bottomLeftCorner(nc0, nc0) = stiff.block(nc1, 0, nc0, nc0);
    cc.bottomRightCorner(nc0, nc0) = stiff.block(nc1, nc1, nc0, nc0);
    cell_gram.topLeftCorner(2 * nc0, 2 * nc0) = cc;
  }

  // --------------------------------------------------------------------
  // Plain jump penalty: exact cell traces against face unknowns
  // --------------------------------------------------------------------
  jump_factor = Eigen::MatrixXd::Zero(2 * nfc * nfaces, N);
  for (int lf = 0; lf < nfaces; lf++) {
    const Eigen::MatrixXd tk = face_trace[lf].topLeftCorner(nfc, nc0);
    const Eigen::MatrixXd mf0 = face_mass[lf].topLeftCorner(nfc, nfc);
    const Eigen::MatrixXd lt = Eigen::MatrixXd(Eigen::LLT<Eigen::MatrixXd>(mf0)
                                                    .matrixL()
                                                    .transpose()) /
                               std::sqrt(face_lengths[lf]);
    const int foff = layout.face_offset(lf);
    Eigen::MatrixXd gamma = Eigen::MatrixXd::Zero(2 * nfc, N);
    gamma.block(0, 0, nfc, nc0) = tk;
    gamma.block(nfc, nc0, nfc, nc0) = tk;
    gamma.block(0, foff, nfc, nfc) -= Eigen::MatrixXd::Identity(nfc, nfc);
    gamma.block(nfc, foff + nfc, nfc, nfc) -= Eigen::MatrixXd::Identity(nfc, nfc);
    jump_factor.middleRows(2 * nfc * lf, nfc) = lt * gamma.topRows(nfc);
    jump_factor.middleRows(2 * nfc * lf + nfc, nfc) = lt * gamma.bottomRows(nfc);
  }
  jump = jump_factor.transpose() * jump_factor;

  // --------------------------------------------------------------------
  // Projected-correction stabilization via the second reconstruction
  // --------------------------------------------------------------------
  const Eigen::MatrixXd proj_low =
      solve_spd_extended(mass0, cell_mass.topRows(nc0));  // degree k+1 -> degree k
  second_recon = reconstruction;
  second_recon.topRows(nc0) -= proj_low * reconstruction.topRows(nc1);
  second_recon.middleRows(nc1, nc0) -= proj_low * reconstruction.bottomRows(nc1);
  second_recon.block(0, 0, nc0, nc0) += Eigen::MatrixXd::Identity(nc0, nc0);
  second_recon.block(nc1, nc0, nc0, nc0) += Eigen::MatrixXd::Identity(nc0, nc0);

  stab_factor = Eigen::MatrixXd::Zero(2 * nfc * nfaces, N);
  for (int lf = 0; lf < nfaces; lf++) {
    const Eigen::MatrixXd mf0 = face_mass[lf].topLeftCorner(nfc, nfc);
    const Eigen::MatrixXd proj_face =
        solve_spd_extended(mf0, face_mass[lf].topRows(nfc));  // degree k+1 -> k on the face
    const Eigen::MatrixXd tr_proj = proj_face * face_trace[lf];  // nfc x nc1
    const Eigen::MatrixXd lt = Eigen::MatrixXd(Eigen::LLT<Eigen::MatrixXd>(mf0)
                                                    .matrixL()
                                                    .transpose()) /
                               std::sqrt(face_lengths[lf]);
    const int foff = layout.face_offset(lf);
    Eigen::MatrixXd delta(2 * nfc, N);
    delta.topRows(nfc) = tr_proj * second_recon.topRows(nc1);
    delta.bottomRows(nfc) = tr_proj * second_recon.bottomRows(nc1);
    delta.block(0, foff, nfc, nfc) -= Eigen::MatrixXd::Identity(nfc, nfc);
    delta.block(nfc, foff + nfc, nfc, nfc) -= Eigen::MatrixXd::Identity(nfc, nfc);
    stab_factor.middleRows(2 * nfc * lf, nfc) = lt * delta.topRows(nfc);
    stab_factor.middleRows(2 * nfc * lf + nfc, nfc) = lt * delta.bottomRows(nfc);
  }
  stab = stab_factor.transpose() * stab_factor;

  local_form = 2. * mu * (recon_gram + stab) + lambda * div_gram;
  local_form_jump = 2. * mu * (recon_gram + jump) + lambda * div_gram;

  // --------------------------------------------------------------------
  // Rigid-body DOF vectors (exact coefficients)
  // --------------------------------------------------------------------
  rigid_dofs = Eigen::MatrixXd::Zero(N, 3);
  rigid_dofs.col(0) = rigid_dof_vector(Vector2(1., 0.), 0.);
  rigid_dofs.col(1) = rigid_dof_vector(Vector2(0., 1.), 0.);
  rigid_dofs.col(2) = rigid_dof_vector(Vector2(0., 0.), 1.);
}

Eigen::VectorXd ElementOperators::rigid_dof_vector(const Vector2 &a, double b) const {
  const int nc0 = n0();
  const int nfc = k + 1;
  Eigen::VectorXd v = Eigen::VectorXd::Zero(layout.size());
  // Cell part: a + b*(-(y-y_T), x-x_T) in scaled monomials; members 1 and 2
  // are (x-x_T)/h_T and (y-y_T)/h_T.
  v(0) = a.x();
  v(2) = -b * h;
  v(nc0) = a.y();
  v(nc0 + 1) = b * h;
  for (int lf = 0; lf < layout.n_faces; lf++) {
    const Face &F = face_bases[lf].face();
    const int foff = layout.face_offset(lf);
    // Value at the face midpoint plus the arc-length slope.
    const double rx = -(F.midpoint.y - centroid.y);
    const double ry = F.midpoint.x - centroid.x;
    v(foff + 0) = a.x() + b * rx;
    v(foff + 1) = -b * F.tangent.y() * F.length;
    v(foff + nfc + 0) = a.y() + b * ry;
    v(foff + nfc + 1) = b * F.tangent.x() * F.length;
  }
  return v;
}

ElementOperators build_element_operators(const Mesh &mesh, int el, int k, double mu,
                                         double lambda) {
  return ElementOperators(mesh, el, k, mu, lambda);
}

std::vector<ElementOperators> build_all_element_operators(const Mesh &mesh, int k, double mu,
                                                          double lambda, unsigned n_threads) {
  const int n = mesh.n_elements();
  std::vector<std::optional<ElementOperators>> slots(n);
  parallel_for(n, n_threads,
               [&](int i) { slots[i].emplace(mesh, i, k, mu, lambda); });
  std::vector<ElementOperators> out;
  out.reserve(n);
  for (auto &s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace hho2d
