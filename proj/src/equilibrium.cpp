#include "hho2d/equilibrium.hpp"

#include <cmath>
#include <ostream>
#include <stdexcept>

#include "hho2d/parallel.hpp"

namespace hho2d {

PostprocessOperators build_postprocess(const ElementOperators &ops) {
  // The interface traction balance inherits every rounding error of this
  // pipeline amplified by 1/h_F, so the whole map is assembled in extended
  // precision and cast to double at the end.
  using LongMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LongVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

  const int N = ops.layout.size();
  const int nc0 = ops.n0();
  const int nc1 = ops.n1();
  const int nfc = ops.k + 1;

  PostprocessOperators post;

  // Transfer map: the jump-stabilized form reproduces the action of the
  // local form plus the jump penalty, with the rigid-body part pinned to
  // the input. The pinning functionals act on the cell unknown alone
  // (componentwise mean and rotation moment), so the rigid moments of the
  // cell correction vanish and rigid-body or reduced polynomial DOF
  // vectors are exact fixed points.
  LongMatrix closure = LongMatrix::Zero(3, N);
  {
    const LongVector m0 = ops.cell_moments.head(nc0).cast<long double>();
    closure.block(0, 0, 1, nc0) = m0.transpose() / static_cast<long double>(ops.area);
    closure.block(1, nc0, 1, nc0) = m0.transpose() / static_cast<long double>(ops.area);
    // Rotation moment of the cell unknown, (1/2) int_T (dx v_y - dy v_x),
    // through the exact derivative matrices; rows scaled to O(1).
    const int n_low = cell_poly_dim(ops.k - 1);
    const LongVector m_low = ops.cell_moments.head(n_low).cast<long double>();
    const long double row_scale = 0.5L * ops.h / ops.area;
    closure.block(2, 0, 1, nc0) =
        -row_scale * (m_low.transpose() * ops.dy.topLeftCorner(n_low, nc0).cast<long double>());
    closure.block(2, nc0, 1, nc0) =
        row_scale * (m_low.transpose() * ops.dx.topLeftCorner(n_low, nc0).cast<long double>());
  }

  const int na = N + 3;
  LongMatrix aug = LongMatrix::Zero(na, na);
  aug.topLeftCorner(N, N) = ops.local_form_jump.cast<long double>();
  aug.block(N, 0, 3, N) = closure;
  aug.block(0, N, N, 3) = closure.transpose();

  // Solved in shift form: the defining equation is equivalent to
  // (jump form)(transfer - identity) = 2 mu (projected stabilization),
  // whose right-hand side is small on near-solution data. This keeps the
  // traction identities at working precision where the transfer itself
  // barely moves the unknowns.
  LongMatrix rhs = LongMatrix::Zero(na, N);
  rhs.topRows(N) = 2.0L * ops.mu * ops.stab.cast<long double>();
  const Eigen::FullPivLU<LongMatrix> lu(aug);
  if (!lu.isInvertible())
    throw std::runtime_error("build_postprocess: singular transfer system");
  const LongMatrix shift = lu.solve(rhs).topRows(N);
  post.transfer = (shift + LongMatrix::Identity(N, N)).cast<double>();

  // Stress: symmetric gradient of the reconstructed transfer plus the
  // volumetric part, expanded exactly in the degree-k cell basis.
  const LongMatrix transfer_l = shift + LongMatrix::Identity(N, N);
  const LongMatrix recon_x =
      ops.reconstruction.topRows(nc1).cast<long double>() * transfer_l;
  const LongMatrix recon_y =
      ops.reconstruction.bottomRows(nc1).cast<long double>() * transfer_l;
  const LongMatrix vol = ops.divergence.cast<long double>() * transfer_l;
  const LongMatrix dx_l = ops.dx.cast<long double>();
  const LongMatrix dy_l = ops.dy.cast<long double>();
  const LongMatrix sxx = 2.0L * ops.mu * (dx_l * recon_x) + ops.lambda * vol;
  const LongMatrix syy = 2.0L * ops.mu * (dy_l * recon_y) + ops.lambda * vol;
  const LongMatrix sxy = ops.mu * (dy_l * recon_x + dx_l * recon_y);
  post.stress_xx = sxx.cast<double>();
  post.stress_yy = syy.cast<double>();
  post.stress_xy = sxy.cast<double>();

  // Tractions: normal stress plus the scaled difference of the transfer
  // residuals on the face and on the cell trace, all in exact face-basis
  // coefficients.
  post.traction.reserve(ops.layout.n_faces);
  for (int lf = 0; lf < ops.layout.n_faces; lf++) {
    const Vector2 n = ops.face_normals[lf];
    const LongMatrix tk = ops.face_trace[lf].topLeftCorner(nfc, nc0).cast<long double>();
    const int foff = ops.layout.face_offset(lf);

    LongMatrix phi(2 * nfc, N);
    phi.topRows(nfc) = tk * (n.x() * sxx + n.y() * sxy);
    phi.bottomRows(nfc) = tk * (n.x() * sxy + n.y() * syy);

    const long double penalty = 2.0L * ops.mu / ops.face_lengths[lf];
    phi.topRows(nfc) += penalty * (shift.middleRows(foff, nfc) - tk * shift.topRows(nc0));
    phi.bottomRows(nfc) +=
        penalty * (shift.middleRows(foff + nfc, nfc) - tk * shift.middleRows(nc0, nc0));
    post.traction.push_back(phi.cast<double>());
  }
  return post;
}

std::vector<PostprocessOperators> build_all_postprocess(const std::vector<ElementOperators> &ops,
                                                        unsigned n_threads) {
  std::vector<PostprocessOperators> out(ops.size());
  parallel_for(static_cast<int>(ops.size()), n_threads,
               [&](int i) { out[i] = build_postprocess(ops[i]); });
  return out;
}

Eigen::Matrix2d evaluate_stress(const ElementOperators &ops, const PostprocessOperators &post,
                                const Eigen::VectorXd &dofs, const Point &p) {
  const Eigen::VectorXd phi = ops.cell_basis.values(p).head(ops.n0());
  Eigen::Matrix2d s;
  s(0, 0) = phi.dot(post.stress_xx * dofs);
  s(1, 1) = phi.dot(post.stress_yy * dofs);
  s(0, 1) = s(1, 0) = phi.dot(post.stress_xy * dofs);
  return s;
}

Vector2 evaluate_traction(const ElementOperators &ops, const PostprocessOperators &post, int lf,
                          const Eigen::VectorXd &dofs, const Point &p) {
  const int nfc = ops.k + 1;
  const Eigen::VectorXd psi = ops.face_bases[lf].values(p).head(nfc);
  const Eigen::VectorXd coeff = post.traction[lf] * dofs;
  return Vector2(psi.dot(coeff.head(nfc)), psi.dot(coeff.tail(nfc)));
}

std::vector<ElementResidual> verify_local_equilibrium(
    const Mesh &mesh, const std::vector<ElementOperators> &ops,
    const std::vector<PostprocessOperators> &post, const Solution &sol, const VectorField &f,
    unsigned n_threads) {
  check_compatible(mesh, sol);
  if (ops.size() != post.size() || static_cast<int>(ops.size()) != mesh.n_elements())
    throw std::invalid_argument("verify_local_equilibrium: mismatched operator lists");

  std::vector<ElementResidual> out(mesh.n_elements());
  parallel_for(mesh.n_elements(), n_threads, [&](int el) {
    const ElementOperators &op = ops[el];
    const int nc0 = op.n0();
    const int nfc = op.k + 1;
    const Eigen::VectorXd dofs = sol.local_dofs(mesh, el);

    const Eigen::VectorXd sxx = post[el].stress_xx * dofs;
    const Eigen::VectorXd syy = post[el].stress_yy * dofs;
    const Eigen::VectorXd sxy = post[el].stress_xy * dofs;

    // (stress, grad_s v)_T for every vector basis member, by quadrature.
    Eigen::VectorXd residual = Eigen::VectorXd::Zero(2 * nc0);
    double stress_norm2 = 0.;
    for (const auto &qp : op.cell_rule.points) {
      const Eigen::VectorXd phi = op.cell_basis.values(qp.point);
      const Eigen::MatrixXd g = op.cell_basis.gradients(qp.point);
      const double vxx = phi.head(nc0).dot(sxx);
      const double vyy = phi.head(nc0).dot(syy);
      const double vxy = phi.head(nc0).dot(sxy);
      // x-block members: grad_s v = [[gx, gy/2],[gy/2, 0]].
      residual.head(nc0) +=
          qp.weight * (vxx * g.col(0).head(nc0) + vxy * g.col(1).head(nc0));
      residual.tail(nc0) +=
          qp.weight * (vyy * g.col(1).head(nc0) + vxy * g.col(0).head(nc0));
      stress_norm2 += qp.weight * (vxx * vxx + 2. * vxy * vxy + vyy * vyy);
    }

    // Minus the traction term over the boundary.
    for (int lf = 0; lf < op.layout.n_faces; lf++) {
      const Eigen::VectorXd coeff = post[el].traction[lf] * dofs;
      for (const auto &qp : op.face_rules[lf].points) {
        const Eigen::VectorXd psi = op.face_bases[lf].values(qp.point).head(nfc);
        const Eigen::VectorXd phi = op.cell_basis.values(qp.point).head(nc0);
        const double tx = psi.dot(coeff.head(nfc));
        const double ty = psi.dot(coeff.tail(nfc));
        residual.head(nc0) -= (qp.weight * tx) * phi;
        residual.tail(nc0) -= (qp.weight * ty) * phi;
      }
    }

    // Minus the load moments, with the assembly's rule.
    residual -= load_moments(op, f);

    // Report against an L2-orthonormalized test basis.
    const Eigen::MatrixXd mass0 = op.cell_mass.topLeftCorner(nc0, nc0);
    const Eigen::LLT<Eigen::MatrixXd> llt(mass0);
    residual.head(nc0) = llt.matrixL().solve(residual.head(nc0));
    residual.tail(nc0) = llt.matrixL().solve(residual.tail(nc0));

    double f_norm2 = 0.;
    for (const auto &qp : op.cell_rule.points) f_norm2 += qp.weight * f(qp.point).squaredNorm();

    ElementResidual r;
    r.element = el;
    r.raw = residual.cwiseAbs().maxCoeff();
    const double scale = std::sqrt(f_norm2) + std::sqrt(stress_norm2) / op.h;
    r.normalized = r.raw / std::max(scale, 1e-300);
    out[el] = r;
  });
  return out;
}

std::vector<FaceDefect> verify_traction_balance(const Mesh &mesh,
                                                const std::vector<ElementOperators> &ops,
                                                const std::vector<PostprocessOperators> &post,
                                                const Solution &sol, unsigned n_threads) {
  check_compatible(mesh, sol);
  std::vector<int> interior;
  interior.reserve(mesh.n_faces());
  for (int fid = 0; fid < mesh.n_faces(); fid++)
    if (!mesh.face(fid).on_boundary()) interior.push_back(fid);

  std::vector<FaceDefect> out(interior.size());
  parallel_for(static_cast<int>(interior.size()), n_threads, [&](int i) {
    const int fid = interior[i];
    const Face &F = mesh.face(fid);
    const int nfc = sol.k + 1;

    auto traction_coeffs = [&](int el) {
      const Element &T = mesh.element(el);
      int lf = -1;
      for (int j = 0; j < T.n_faces(); j++)
        if (T.faces[j] == fid) lf = j;
      return Eigen::VectorXd(post[el].traction[lf] * sol.local_dofs(mesh, el));
    };
    const Eigen::VectorXd phi1 = traction_coeffs(F.owner);
    const Eigen::VectorXd phi2 = traction_coeffs(F.neighbor);

    // All three are degree-k face polynomials; their L2 norms come from the
    // shared face mass matrix.
    const ElementOperators &op = ops[F.owner];
    int lf_owner = -1;
    for (int j = 0; j < mesh.element(F.owner).n_faces(); j++)
      if (mesh.element(F.owner).faces[j] == fid) lf_owner = j;
    const Eigen::MatrixXd mf = op.face_mass[lf_owner].topLeftCorner(nfc, nfc);
    auto face_norm = [&](const Eigen::VectorXd &c) {
      return std::sqrt(c.head(nfc).dot(mf * c.head(nfc)) + c.tail(nfc).dot(mf * c.tail(nfc)));
    };

    FaceDefect d;
    d.face = fid;
    d.raw = face_norm(phi1 + phi2);
    d.normalized = d.raw / std::max({face_norm(phi1), face_norm(phi2), 1e-300});
    out[i] = d;
  });
  return out;
}

void write_verification_csv(const std::vector<ElementResidual> &elements,
                            const std::vector<FaceDefect> &faces, std::ostream &out) {
  out << "entity,id,raw_residual,normalized_residual\n";
  char buf[96];
  for (const auto &r : elements) {
    std::snprintf(buf, sizeof(buf), "element,%d,%.17g,%.17g\n", r.element, r.raw, r.normalized);
    out << buf;
  }
  for (const auto &r : faces) {
    std::snprintf(buf, sizeof(buf), "face,%d,%.17g,%.17g\n", r.face, r.raw, r.normalized);
    out << buf;
  }
}

}  // namespace hho2d
