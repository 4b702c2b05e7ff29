#include "hho2d/cases.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include "hho2d/polynomial2d.hpp"

namespace hho2d {

ProblemCase manufactured_case(double mu, double lambda) {
  ProblemCase c;
  c.name = "manufactured";
  c.mu = mu;
  c.lambda = lambda;
  c.u = [](const Point &p) {
    return Vector2(std::sin(M_PI * p.x) * std::sin(M_PI * p.y) + 0.5 * p.x,
                   std::cos(M_PI * p.x) * std::cos(M_PI * p.y) + 0.5 * p.y);
  };
  c.grad_u = [](const Point &p) {
    Eigen::Matrix2d g;
    g(0, 0) = M_PI * std::cos(M_PI * p.x) * std::sin(M_PI * p.y) + 0.5;
    g(0, 1) = M_PI * std::sin(M_PI * p.x) * std::cos(M_PI * p.y);
    g(1, 0) = -M_PI * std::sin(M_PI * p.x) * std::cos(M_PI * p.y);
    g(1, 1) = -M_PI * std::cos(M_PI * p.x) * std::sin(M_PI * p.y) + 0.5;
    return g;
  };
  // div u = 1, so the volumetric term drops out of the load.
  c.f = [mu](const Point &p) {
    const double s = 2. * mu * M_PI * M_PI;
    return Vector2(s * std::sin(M_PI * p.x) * std::sin(M_PI * p.y),
                   s * std::cos(M_PI * p.x) * std::cos(M_PI * p.y));
  };
  return c;
}

ProblemCase polynomial_case(int k, unsigned seed, double mu, double lambda) {
  if (k < 1) throw std::invalid_argument("polynomial_case: degree must be >= 1");
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-1., 1.);

  auto random_component = [&]() {
    Poly2 p;
    for (int a = 0; a <= k + 1; a++)
      for (int b = 0; a + b <= k + 1; b++) p = p + Poly2::monomial(a, b, dist(rng));
    return p;
  };
  const Poly2 ux = random_component();
  const Poly2 uy = random_component();

  const Poly2 ux_x = ux.derivative(0), ux_y = ux.derivative(1);
  const Poly2 uy_x = uy.derivative(0), uy_y = uy.derivative(1);
  const Poly2 div_u = ux_x + uy_y;

  const Poly2 sxx = 2. * mu * ux_x + lambda * div_u;
  const Poly2 syy = 2. * mu * uy_y + lambda * div_u;
  const Poly2 sxy = mu * (ux_y + uy_x);

  const Poly2 fx = -1. * (sxx.derivative(0) + sxy.derivative(1));
  const Poly2 fy = -1. * (sxy.derivative(0) + syy.derivative(1));

  ProblemCase c;
  c.name = "polynomial";
  c.mu = mu;
  c.lambda = lambda;
  c.u = [ux, uy](const Point &p) { return Vector2(ux(p), uy(p)); };
  c.grad_u = [ux_x, ux_y, uy_x, uy_y](const Point &p) {
    Eigen::Matrix2d g;
    g(0, 0) = ux_x(p);
    g(0, 1) = ux_y(p);
    g(1, 0) = uy_x(p);
    g(1, 1) = uy_y(p);
    return g;
  };
  c.f = [fx, fy](const Point &p) { return Vector2(fx(p), fy(p)); };
  return c;
}

ProblemCase zero_case(double mu, double lambda) {
  ProblemCase c;
  c.name = "zero";
  c.mu = mu;
  c.lambda = lambda;
  c.u = [](const Point &) { return Vector2::Zero(); };
  c.grad_u = [](const Point &) { return Eigen::Matrix2d::Zero(); };
  c.f = [](const Point &) { return Vector2::Zero(); };
  return c;
}

ProblemCase case_by_name(const std::string &name, int k, double mu, double lambda,
                         unsigned seed) {
  if (name == "manufactured") return manufactured_case(mu, lambda);
  if (name == "polynomial") return polynomial_case(k, seed, mu, lambda);
  if (name == "zero") return zero_case(mu, lambda);
  throw std::invalid_argument("unknown case '" + name +
                              "' (expected manufactured, polynomial, or zero)");
}

}  // namespace hho2d
