#include "hho2d/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace hho2d {

void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights) {
  if (n < 1) throw std::invalid_argument("gauss_legendre: need at least one node");
  nodes.assign(n, 0.);
  weights.assign(n, 0.);

  // Newton iteration on the Legendre polynomial, one root per half interval;
  // the other half follows by symmetry.
  const int half = (n + 1) / 2;
  for (int i = 0; i < half; i++) {
    double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
    double dp = 0.;
    for (int it = 0; it < 100; it++) {
      // Three-term recurrence for P_n and its derivative at x.
      double p0 = 1., p1 = x;
      for (int j = 2; j <= n; j++) {
        const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    // One extra recurrence pass at the converged node for the weight.
    double p0 = 1., p1 = x;
    for (int j = 2; j <= n; j++) {
      const double p2 = ((2 * j - 1) * x * p1 - (j - 1) * p0) / j;
      p0 = p1;
      p1 = p2;
    }
    dp = n * (x * p1 - p0) / (x * x - 1.);
    nodes[i] = -x;
    nodes[n - 1 - i] = x;
    weights[i] = weights[n - 1 - i] = 2. / ((1. - x * x) * dp * dp);
  }
  if (n % 2 == 1) nodes[n / 2] = 0.;
}

QuadratureRule segment_rule(const Point &a, const Point &b, int exactness) {
  if (exactness < 0) throw std::invalid_argument("segment_rule: negative exactness");
  const int n = exactness / 2 + 1;  // 2n-1 >= exactness
  std::vector<double> xs, ws;
  gauss_legendre(n, xs, ws);

  const double len = distance(a, b);
  QuadratureRule rule;
  rule.exactness = exactness;
  rule.points.reserve(n);
  for (int i = 0; i < n; i++) {
    const double t = 0.5 * (1. + xs[i]);
    rule.points.push_back({Point{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)},
                           0.5 * len * ws[i]});
  }
  return rule;
}

QuadratureRule segment_rule(const Mesh &mesh, int face, int exactness) {
  const Face &F = mesh.face(face);
  return segment_rule(mesh.vertex(F.vertices[0]), mesh.vertex(F.vertices[1]), exactness);
}

QuadratureRule triangle_rule(const Point &a, const Point &b, const Point &c, int exactness) {
  if (exactness < 0) throw std::invalid_argument("triangle_rule: negative exactness");
  const double jac = (b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y);  // 2*area
  if (!(jac > 0.) || !std::isfinite(jac))
    throw std::runtime_error("triangle_rule: degenerate triangle");

  // Collapsed coordinates: (u,v) in [0,1]^2 -> (x,y) = (u(1-v), v) on the
  // reference triangle, with Jacobian (1-v). A degree-q monomial x^i y^j
  // becomes degree <= q in u and <= q+1 in v (Jacobian included).
  const int nu = exactness / 2 + 1;
  const int nv = (exactness + 1) / 2 + 1;
  std::vector<double> xu, wu, xv, wv;
  gauss_legendre(nu, xu, wu);
  gauss_legendre(nv, xv, wv);

  QuadratureRule rule;
  rule.exactness = exactness;
  rule.points.reserve(static_cast<size_t>(nu) * nv);
  for (int iv = 0; iv < nv; iv++) {
    const double v = 0.5 * (1. + xv[iv]);
    for (int iu = 0; iu < nu; iu++) {
      const double u = 0.5 * (1. + xu[iu]);
      const double xr = u * (1. - v);
      const double yr = v;
      const double w = 0.25 * wu[iu] * wv[iv] * (1. - v);
      rule.points.push_back(
          {Point{a.x + xr * (b.x - a.x) + yr * (c.x - a.x),
                 a.y + xr * (b.y - a.y) + yr * (c.y - a.y)},
           w * jac});
    }
  }
  return rule;
}

QuadratureRule element_rule(const Mesh &mesh, int element, int exactness) {
  const Element &T = mesh.element(element);
  const int p = static_cast<int>(T.vertices.size());
  if (p == 3) {
    return triangle_rule(mesh.vertex(T.vertices[0]), mesh.vertex(T.vertices[1]),
                         mesh.vertex(T.vertices[2]), exactness);
  }

  // Convexity: all turns of the CCW loop must be left turns (collinear
  // vertices allowed).
  for (int i = 0; i < p; i++) {
    const Point &v0 = mesh.vertex(T.vertices[i]);
    const Point &v1 = mesh.vertex(T.vertices[(i + 1) % p]);
    const Point &v2 = mesh.vertex(T.vertices[(i + 2) % p]);
    const double cross = (v1.x - v0.x) * (v2.y - v1.y) - (v1.y - v0.y) * (v2.x - v1.x);
    if (cross < -1e-14 * T.diameter * T.diameter)
      throw std::runtime_error("element_rule: non-convex element");
  }

  QuadratureRule rule;
  rule.exactness = exactness;
  for (int i = 0; i < p; i++) {
    const Point &v0 = mesh.vertex(T.vertices[i]);
    const Point &v1 = mesh.vertex(T.vertices[(i + 1) % p]);
    QuadratureRule tri = triangle_rule(T.centroid, v0, v1, exactness);
    rule.points.insert(rule.points.end(), tri.points.begin(), tri.points.end());
  }
  return rule;
}

}  // namespace hho2d
