// Quadrature rules with prescribed polynomial exactness on segments,
// triangles, and convex polygons (fan split from the centroid).

#ifndef HHO2D_QUADRATURE_HPP
#define HHO2D_QUADRATURE_HPP

#include <vector>

#include "hho2d/mesh.hpp"

namespace hho2d {

struct QuadraturePoint {
  Point point;
  double weight;
};

struct QuadratureRule {
  std::vector<QuadraturePoint> points;
  int exactness = 0;  // declared polynomial degree of exactness

  double weight_sum() const {
    double s = 0.;
    for (const auto &qp : points) s += qp.weight;
    return s;
  }
};

/// Gauss-Legendre nodes and weights on [-1,1], exact to degree 2n-1.
void gauss_legendre(int n, std::vector<double> &nodes, std::vector<double> &weights);

/// Gauss points mapped to the segment [a,b]; exact to degree `exactness` in
/// the arc-length parameter.
QuadratureRule segment_rule(const Point &a, const Point &b, int exactness);
QuadratureRule segment_rule(const Mesh &mesh, int face, int exactness);

/// Tensor Gauss rule on the collapsed-coordinate square, pushed forward to
/// the physical triangle. Throws on degenerate (non-positively oriented or
/// flat) triangles.
QuadratureRule triangle_rule(const Point &a, const Point &b, const Point &c, int exactness);

/// Union of triangle rules over the fan split from the centroid. Triangles
/// use triangle_rule directly; non-convex polygons are rejected.
QuadratureRule element_rule(const Mesh &mesh, int element, int exactness);

}  // namespace hho2d

#endif
