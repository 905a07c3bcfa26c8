#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <functional>

#include "hdgstokes/mesh.hpp"

namespace hdgstokes {

/// Benchmark data: loads, target, and (when known) the exact optimality
/// system solution with its gradients. The control on the boundary is
/// u(x) = y(x) . tau(x).
struct Problem {
  double side = 1.0;
  Vec2 origin = Vec2::Zero();
  double gamma = 1.0;
  bool has_exact = false;

  std::function<Vec2(const Vec2&)> f;
  std::function<Vec2(const Vec2&)> y_d;
  std::function<Vec2(const Vec2&)> y, z;
  std::function<double(const Vec2&)> p, q;
  std::function<Eigen::Matrix2d(const Vec2&)> grad_y, grad_z;  // (r,c) = d_c y_r
};

/// Example with the closed-form optimality-system solution on the unit
/// square (gamma = 1):
///   y1 = -2 pi^2 sin^2(pi x1) cos(pi x2) - 2 pi^2 sin(pi x1) sin(2 pi x2)
///   y2 =  2 pi^2 cos(pi x1) sin^2(pi x2) + 2 pi^2 sin(pi x2) sin(2 pi x1)
///   z1 =  pi sin^2(pi x1) sin(2 pi x2),  z2 = -pi sin^2(pi x2) sin(2 pi x1)
///   p  =  q = cos(pi x1)
/// with f = -Lap y + grad p and y_d = y + Lap z + grad q.
inline Problem example1() {
  const double pi = M_PI;
  Problem pr;
  pr.side = 1.0;
  pr.has_exact = true;
  pr.y = [pi](const Vec2& x) {
    const double s1 = std::sin(pi * x.x()), c1 = std::cos(pi * x.x());
    const double s2 = std::sin(pi * x.y()), c2 = std::cos(pi * x.y());
    const double S1 = std::sin(2 * pi * x.x()), S2 = std::sin(2 * pi * x.y());
    return Vec2(-2 * pi * pi * s1 * s1 * c2 - 2 * pi * pi * s1 * S2,
                2 * pi * pi * c1 * s2 * s2 + 2 * pi * pi * s2 * S1);
  };
  pr.z = [pi](const Vec2& x) {
    const double s1 = std::sin(pi * x.x()), s2 = std::sin(pi * x.y());
    const double S1 = std::sin(2 * pi * x.x()), S2 = std::sin(2 * pi * x.y());
    return Vec2(pi * s1 * s1 * S2, -pi * s2 * s2 * S1);
  };
  pr.p = [pi](const Vec2& x) { return std::cos(pi * x.x()); };
  pr.q = pr.p;
  pr.grad_y = [pi](const Vec2& x) {
    const double s1 = std::sin(pi * x.x()), c1 = std::cos(pi * x.x());
    const double s2 = std::sin(pi * x.y()), c2 = std::cos(pi * x.y());
    const double S1 = std::sin(2 * pi * x.x()), C1 = std::cos(2 * pi * x.x());
    const double S2 = std::sin(2 * pi * x.y()), C2 = std::cos(2 * pi * x.y());
    const double p3 = pi * pi * pi;
    Eigen::Matrix2d gy;
    gy(0, 0) = -2 * p3 * (S1 * c2 + c1 * S2);
    gy(0, 1) = 2 * p3 * s1 * s1 * s2 - 4 * p3 * s1 * C2;
    gy(1, 0) = -2 * p3 * s1 * s2 * s2 + 4 * p3 * s2 * C1;
    gy(1, 1) = 2 * p3 * (c1 * S2 + c2 * S1);
    return gy;
  };
  pr.grad_z = [pi](const Vec2& x) {
    const double s1 = std::sin(pi * x.x()), s2 = std::sin(pi * x.y());
    const double S1 = std::sin(2 * pi * x.x()), C1 = std::cos(2 * pi * x.x());
    const double S2 = std::sin(2 * pi * x.y()), C2 = std::cos(2 * pi * x.y());
    Eigen::Matrix2d gz;
    gz(0, 0) = pi * pi * S1 * S2;
    gz(0, 1) = 2 * pi * pi * s1 * s1 * C2;
    gz(1, 0) = -2 * pi * pi * s2 * s2 * C1;
    gz(1, 1) = -pi * pi * S2 * S1;
    return gz;
  };
  pr.f = [pi](const Vec2& x) {
    const double s1 = std::sin(pi * x.x()), c1 = std::cos(pi * x.x());
    const double s2 = std::sin(pi * x.y()), c2 = std::cos(pi * x.y());
    const double S1 = std::sin(2 * pi * x.x()), C1 = std::cos(2 * pi * x.x());
    const double S2 = std::sin(2 * pi * x.y()), C2 = std::cos(2 * pi * x.y());
    const double p4 = pi * pi * pi * pi;
    const double lap_y1 = -4 * p4 * C1 * c2 + 2 * p4 * s1 * s1 * c2 + 10 * p4 * s1 * S2;
    const double lap_y2 = -2 * p4 * c1 * s2 * s2 + 4 * p4 * c1 * C2 - 10 * p4 * s2 * S1;
    return Vec2(-lap_y1 - pi * s1, -lap_y2);
  };
  pr.y_d = [pi, pr](const Vec2& x) {
    const double s1 = std::sin(pi * x.x());
    const double s2 = std::sin(pi * x.y());
    const double S1 = std::sin(2 * pi * x.x()), C1 = std::cos(2 * pi * x.x());
    const double S2 = std::sin(2 * pi * x.y()), C2 = std::cos(2 * pi * x.y());
    const double p3 = pi * pi * pi;
    const Vec2 yv = pr.y(x);
    const double lap_z1 = 2 * p3 * C1 * S2 - 4 * p3 * s1 * s1 * S2;
    const double lap_z2 = 4 * p3 * s2 * s2 * S1 - 2 * p3 * C2 * S1;
    return Vec2(yv.x() + lap_z1 - pi * s1, yv.y() + lap_z2);
  };
  return pr;
}

/// Vortex target on [0,1/8]^2 with f = 0 (no closed-form solution):
///   y_d = 200*8^3 [ x1^2(1-8x1)^2 x2(1-8x2)(1-16x2) ;
///                  -x1(1-8x1)(1-16x1) x2^2(1-8x2)^2 ].
inline Problem example2() {
  Problem pr;
  pr.side = 0.125;
  pr.has_exact = false;
  pr.f = [](const Vec2&) { return Vec2::Zero(); };
  pr.y_d = [](const Vec2& x) {
    const double c = 200.0 * 512.0;
    const double x1 = x.x(), x2 = x.y();
    const double a1 = 1 - 8 * x1, a2 = 1 - 8 * x2;
    return Vec2(c * x1 * x1 * a1 * a1 * x2 * a2 * (1 - 16 * x2),
                -c * x1 * a1 * (1 - 16 * x1) * x2 * x2 * a2 * a2);
  };
  return pr;
}

}  // namespace hdgstokes
