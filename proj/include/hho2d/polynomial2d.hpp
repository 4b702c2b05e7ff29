// Dense bivariate polynomials in global coordinates, with the little
// calculus needed to derive loads and stresses of polynomial displacement
// fields exactly.

#ifndef HHO2D_POLYNOMIAL2D_HPP
#define HHO2D_POLYNOMIAL2D_HPP

#include <Eigen/Dense>

#include "hho2d/mesh.hpp"

namespace hho2d {

class Poly2 {
public:
  Poly2() : m_coeff(Eigen::MatrixXd::Zero(1, 1)) {}
  explicit Poly2(Eigen::MatrixXd coeff) : m_coeff(std::move(coeff)) {}

  static Poly2 monomial(int px, int py, double c) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(px + 1, py + 1);
    m(px, py) = c;
    return Poly2(std::move(m));
  }

  /// coefficient of x^a y^b
  double coeff(int a, int b) const {
    if (a >= m_coeff.rows() || b >= m_coeff.cols()) return 0.;
    return m_coeff(a, b);
  }

  int degree() const {
    int d = 0;
    for (int a = 0; a < m_coeff.rows(); a++)
      for (int b = 0; b < m_coeff.cols(); b++)
        if (m_coeff(a, b) != 0.) d = std::max(d, a + b);
    return d;
  }

  double operator()(const Point &p) const {
    // Horner in y inside Horner in x.
    double acc = 0.;
    for (int a = static_cast<int>(m_coeff.rows()) - 1; a >= 0; a--) {
      double row = 0.;
      for (int b = static_cast<int>(m_coeff.cols()) - 1; b >= 0; b--)
        row = row * p.y + m_coeff(a, b);
      acc = acc * p.x + row;
    }
    return acc;
  }

  Poly2 derivative(int axis) const {
    const int r = static_cast<int>(m_coeff.rows());
    const int c = static_cast<int>(m_coeff.cols());
    if (axis == 0) {
      if (r == 1) return Poly2();
      Eigen::MatrixXd d = Eigen::MatrixXd::Zero(r - 1, c);
      for (int a = 1; a < r; a++) d.row(a - 1) = a * m_coeff.row(a);
      return Poly2(std::move(d));
    }
    if (c == 1) return Poly2();
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(r, c - 1);
    for (int b = 1; b < c; b++) d.col(b - 1) = b * m_coeff.col(b);
    return Poly2(std::move(d));
  }

  Poly2 operator+(const Poly2 &other) const {
    const int r = std::max(m_coeff.rows(), other.m_coeff.rows());
    const int c = std::max(m_coeff.cols(), other.m_coeff.cols());
    Eigen::MatrixXd s = Eigen::MatrixXd::Zero(r, c);
    s.topLeftCorner(m_coeff.rows(), m_coeff.cols()) = m_coeff;
    s.topLeftCorner(other.m_coeff.rows(), other.m_coeff.cols()) += other.m_coeff;
    return Poly2(std::move(s));
  }

  Poly2 operator-(const Poly2 &other) const { return *this + (-1. * other); }

  friend Poly2 operator*(double s, const Poly2 &p) { return Poly2(s * p.m_coeff); }

private:
  Eigen::MatrixXd m_coeff;  // coeff(a,b) multiplies x^a y^b
};

}  // namespace hho2d

#endif
