#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hdgstokes {

namespace detail {

/// Newton iteration for g(lam) = sin(lam w) +- lam sin(w) = 0 in the complex
/// plane, from a grid of initial guesses. Roots with |lam - 1| small are the
/// spurious factor excluded by the singular-exponent equation.
inline std::vector<std::complex<double>> corner_roots(double omega, double re_lo, double re_hi,
                                                      double im_hi, double re_step,
                                                      double im_step) {
  std::vector<std::complex<double>> roots;
  const double sw = std::sin(omega);
  for (int sgn = -1; sgn <= 1; sgn += 2) {
    auto g = [&](std::complex<double> lam) { return std::sin(lam * omega) + double(sgn) * lam * sw; };
    auto dg = [&](std::complex<double> lam) {
      return omega * std::cos(lam * omega) + std::complex<double>(double(sgn) * sw);
    };
    for (double re0 = re_lo; re0 <= re_hi + 1e-12; re0 += re_step) {
      for (double im0 = 0.0; im0 <= im_hi + 1e-12; im0 += im_step) {
        std::complex<double> lam(re0, im0);
        bool ok = false;
        for (int it = 0; it < 60; ++it) {
          const std::complex<double> gv = g(lam);
          const std::complex<double> dv = dg(lam);
          if (std::abs(dv) < 1e-14) break;
          const std::complex<double> step = gv / dv;
          lam -= step;
          if (std::abs(step) < 1e-13) {
            ok = std::abs(g(lam)) < 1e-10;
            break;
          }
        }
        if (!ok) continue;
        lam = std::complex<double>(lam.real(), std::abs(lam.imag()));
        if (lam.real() <= re_lo || lam.real() > re_hi) continue;
        if (std::abs(lam - std::complex<double>(1.0, 0.0)) < 1e-6) continue;
        if (std::abs(lam) < 1e-6) continue;
        bool dup = false;
        for (const auto& r : roots)
          if (std::abs(r - lam) < 1e-8) { dup = true; break; }
        if (!dup) roots.push_back(lam);
      }
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const auto& a, const auto& b) { return a.real() < b.real(); });
  return roots;
}

}  // namespace detail

/// The singular exponent xi(omega): smallest real part of the roots of
/// sin^2(lam*omega) = lam^2 sin^2(omega) with Re(lam) in (0.5, 4], lam != 1,
/// capped at 4 (for small angles the smallest root leaves the strip and the
/// attainable regularity saturates).
inline double singular_exponent(double omega, double grid_refine = 1.0) {
  if (!(omega > 0.0 && omega < 2.0 * M_PI))
    throw std::invalid_argument("singular_exponent: omega in (0, 2*pi) required");
  const auto roots = detail::corner_roots(omega, 0.5, 4.75, 12.0, 0.125 / grid_refine,
                                          0.25 / grid_refine);
  if (roots.empty()) {
    // no root below the cap: regularity saturates
    const auto wide = detail::corner_roots(omega, 0.5, 16.0, 25.0, 0.25, 0.5);
    if (wide.empty()) throw std::runtime_error("singular_exponent: no root found in search strip");
    return 4.0;
  }
  return std::min(roots.front().real(), 4.0);
}

/// Guaranteed convergence orders on a convex polygon with largest interior
/// angle omega (EO columns of the experiment tables). NaN marks quantities
/// with no proved rate ("--").
struct RegularityProfile {
  double omega = 0.0;
  double xi = 0.0;
  bool admissible = false;  // xi > 3/2
  double r_omega = 0.0;     // min{3/2, xi - 1/2}
  double eo_L = 0.0, eo_G = 0.0, eo_y = 0.0, eo_z = 0.0, eo_p = 0.0, eo_q = 0.0, eo_u = 0.0;
};

inline RegularityProfile expected_orders(int k, double omega) {
  RegularityProfile r;
  r.omega = omega;
  r.xi = singular_exponent(omega);
  r.admissible = r.xi > 1.5;
  r.r_omega = std::min(1.5, r.xi - 0.5);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  if (!r.admissible) {
    r.eo_L = r.eo_G = r.eo_y = r.eo_z = r.eo_p = r.eo_q = r.eo_u = nan;
    return r;
  }
  if (k == 0) {
    // the velocity bound saturates at h^{1/2} epsilon(h) with the adjoint
    // projection term of order min{0, xi-2}
    const double base = std::min(0.5, r.xi - 1.5);
    r.eo_L = nan;
    r.eo_p = nan;
    r.eo_G = r.eo_y = r.eo_z = r.eo_q = r.eo_u = base;
  } else {
    r.eo_u = r.eo_y = r.eo_z = r.eo_G = r.eo_q = r.r_omega;
    r.eo_L = r.eo_p = r.r_omega - 0.5;
  }
  return r;
}

}  // namespace hdgstokes
