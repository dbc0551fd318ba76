#pragma once

#include <cmath>
#include <complex>

#include "liouville/errors.hpp"
#include "liouville/sphere.hpp"

namespace liouville {

// Validity of the comparison constant below was checked empirically against
// the small-|z| asymptotics of the hyperbolic density of the twice-punctured
// plane; 0.9 holds with margin for |z - 1| < 0.5.
inline constexpr double kDensityComparisonConstant = 0.9;
inline constexpr double kDensityComparisonRadius = 0.5;
inline constexpr int kDefaultDeckRange = 8;
inline constexpr double kDefaultDecayEps = 0.1;

// Upper half plane distance 2 asinh(|z1 - z2| / (2 sqrt(y1 y2))).
inline double dist_h(cplx z1, cplx z2) {
  double y1 = z1.imag(), y2 = z2.imag();
  if (y1 <= 0.0 || y2 <= 0.0)
    throw OutOfDomain("dist_h: point not in upper half plane");
  return 2.0 * std::asinh(std::abs(z1 - z2) / (2.0 * std::sqrt(y1 * y2)));
}

// Principal lift of a punctured-disk point through the covering
// tau(z) = e^{iz}: z = arg b + i log(1/|b|), Im z > 0.
inline cplx punctured_disk_lift(cplx b) {
  double r = std::abs(b);
  if (r <= 0.0 || r >= 1.0)
    throw OutOfDomain("punctured disk point must satisfy 0 < |b| < 1");
  return cplx{std::arg(b), std::log(1.0 / r)};
}

// Hyperbolic distance in the punctured disk, computed from lifts minimized
// over deck translates z -> z + 2 pi k, |k| <= k_range.
inline double dist_punctured_disk(cplx b1, cplx b2,
                                  int k_range = kDefaultDeckRange) {
  cplx z1 = punctured_disk_lift(b1);
  cplx z2 = punctured_disk_lift(b2);
  double best = dist_h(z1, z2);
  for (int k = 1; k <= k_range; ++k) {
    best = std::min(best, dist_h(z1 + 2.0 * kPi * k, z2));
    best = std::min(best, dist_h(z1 - 2.0 * kPi * k, z2));
  }
  return best;
}

// r(beta) = asinh(pi / (2 log(1/beta))), the radius below which the modulus
// bound check_punctured_disk_bound applies. Increasing in beta.
inline double radius_r_beta(double beta) {
  if (beta <= 0.0 || beta >= 1.0)
    throw OutOfDomain("radius_r_beta: need 0 < beta < 1");
  return std::asinh(kPi / (2.0 * std::log(1.0 / beta)));
}

struct DiskBoundCheck {
  double rho;     // hyperbolic distance between the two points
  double radius;  // r(beta)
  double lhs;     // |b1|
  double rhs;     // beta^{exp(-rho)}
  bool holds;
};

// For |b1| within hyperbolic distance rho < r(beta) of the point beta on the
// positive radius: |b1| <= beta^{exp(-rho)}. Throws RadiusExceeded when the
// precondition rho < r(beta) fails (the estimate is silent there).
inline DiskBoundCheck check_punctured_disk_bound(double beta, cplx b1,
                                                 int k_range = kDefaultDeckRange) {
  if (beta <= 0.0 || beta >= 1.0)
    throw OutOfDomain("check_punctured_disk_bound: need 0 < beta < 1");
  double rho = dist_punctured_disk(cplx{beta, 0.0}, b1, k_range);
  double radius = radius_r_beta(beta);
  if (rho >= radius)
    throw RadiusExceeded("check_punctured_disk_bound: rho >= r(beta)");
  double lhs = std::abs(b1);
  double rhs = std::exp(std::log(beta) * std::exp(-rho));
  bool holds = lhs <= rhs * (1.0 + 1e-12) + 1e-300;
  return {rho, radius, lhs, rhs, holds};
}

// Density of the punctured disk |dz| / (|z| log(1/|z|)) at z.
inline double punctured_disk_density(cplx z) {
  double r = std::abs(z);
  if (r <= 0.0 || r >= 1.0)
    throw OutOfDomain("punctured_disk_density: need 0 < |z| < 1");
  return 1.0 / (r * std::log(1.0 / r));
}

// Comparison lower bound c1 / (|z-1| log(1/|z-1|)) for the density of the
// plane punctured at 0 and 1, valid near z = 1 (0 < |z-1| < 1).
inline double lower_bound_density_01(cplx z,
                                     double c1 = kDensityComparisonConstant) {
  double r = std::abs(z - 1.0);
  if (r <= 0.0 || r >= 1.0)
    throw OutOfDomain("lower_bound_density_01: need 0 < |z-1| < 1");
  return c1 / (r * std::log(1.0 / r));
}

// Modulus-of-continuity bound x^{1/(K+eps)} used for cross-ratio decay under
// K-quasiconformal boundary maps.
inline double decay_bound(double x, double k_dilatation, double eps = kDefaultDecayEps) {
  if (x < 0.0 || x >= 1.0) throw OutOfDomain("decay_bound: need 0 <= x < 1");
  if (k_dilatation < 1.0 || eps <= 0.0)
    throw ParameterOutOfRange("decay_bound: need K >= 1, eps > 0");
  return std::pow(x, 1.0 / (k_dilatation + eps));
}

}  // namespace liouville
