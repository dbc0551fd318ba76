#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "liouville/errors.hpp"

namespace liouville {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;

// Point of the Riemann sphere in homogeneous coordinates (z : w), never both
// zero. Infinity is (1 : 0). Equality is projective: cross-multiplication.
struct SpherePoint {
  cplx z{0.0, 0.0};
  cplx w{1.0, 0.0};

  static SpherePoint infinity() { return {cplx{1.0}, cplx{0.0}}; }
  static SpherePoint from_real(double x) { return {cplx{x}, cplx{1.0}}; }
  static SpherePoint from_complex(cplx v) { return {v, cplx{1.0}}; }

  // Scales the representative so the larger component has modulus one.
  SpherePoint normalized() const {
    double s = std::max(std::abs(z), std::abs(w));
    if (s == 0.0) throw OutOfDomain("sphere point has zero representative");
    return {z / s, w / s};
  }

  bool is_infinity(double tol = 1e-14) const {
    return std::abs(w) <= tol * std::abs(z);
  }

  // Affine coordinate z/w; only valid away from infinity.
  cplx affine() const {
    if (is_infinity()) throw OutOfDomain("affine coordinate of infinity");
    return z / w;
  }
};

// Determinant bracket [p,q] = p.z q.w - q.z p.w; vanishes iff p == q
// projectively.
inline cplx bracket(const SpherePoint& p, const SpherePoint& q) {
  return p.z * q.w - q.z * p.w;
}

inline double sphere_norm(const SpherePoint& p) {
  return std::hypot(std::abs(p.z), std::abs(p.w));
}

// Chordal distance |[p,q]| / (|p| |q|), a scale-free separation in [0,1].
inline double chordal_distance(const SpherePoint& p, const SpherePoint& q) {
  return std::abs(bracket(p, q)) / (sphere_norm(p) * sphere_norm(q));
}

inline bool projectively_equal(const SpherePoint& p, const SpherePoint& q,
                               double tol = 1e-13) {
  return chordal_distance(p, q) <= tol;
}

struct Quadruple {
  SpherePoint a, b, c, d;
};

inline Quadruple quadruple_of_reals(double a, double b, double c, double d) {
  return {SpherePoint::from_real(a), SpherePoint::from_real(b),
          SpherePoint::from_real(c), SpherePoint::from_real(d)};
}

// cr(a,b,c,d) = ((a-c)(b-d)) / ((a-d)(b-c)) in homogeneous form.
inline cplx cross_ratio(const SpherePoint& a, const SpherePoint& b,
                        const SpherePoint& c, const SpherePoint& d,
                        double tol = 1e-13) {
  const SpherePoint* pts[4] = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i)
    for (int j = i + 1; j < 4; ++j)
      if (projectively_equal(*pts[i], *pts[j], tol))
        throw DegenerateQuadruple("cross_ratio: coincident points");
  return (bracket(a, c) * bracket(b, d)) / (bracket(a, d) * bracket(b, c));
}

inline cplx cross_ratio(const Quadruple& q, double tol = 1e-13) {
  return cross_ratio(q.a, q.b, q.c, q.d, tol);
}

// cr - 1 = ([a,b][c,d]) / ([a,d][b,c]) by the Pluecker identity
// [a,c][b,d] - [a,d][b,c] = [a,b][c,d]. Exact in the small-|cr-1| regime
// where the subtraction cr - 1 would cancel. No distinctness check.
inline cplx cross_ratio_minus_one(const SpherePoint& a, const SpherePoint& b,
                                  const SpherePoint& c, const SpherePoint& d) {
  return (bracket(a, b) * bracket(c, d)) / (bracket(a, d) * bracket(b, c));
}

inline cplx cross_ratio_minus_one(const Quadruple& q) {
  return cross_ratio_minus_one(q.a, q.b, q.c, q.d);
}

// Fractional linear transformation stored as a 2x2 complex matrix with
// determinant normalized to 1 (principal square root).
class MobiusTransform {
 public:
  MobiusTransform() : a_{1.0}, b_{0.0}, c_{0.0}, d_{1.0} {}

  MobiusTransform(cplx a, cplx b, cplx c, cplx d) : a_(a), b_(b), c_(c), d_(d) {
    cplx det = a_ * d_ - b_ * c_;
    double scale = std::max({std::abs(a_), std::abs(b_), std::abs(c_), std::abs(d_)});
    if (scale == 0.0 || std::abs(det) <= 1e-14 * scale * scale)
      throw ParameterOutOfRange("mobius: singular matrix");
    cplx r = std::sqrt(det);
    a_ /= r; b_ /= r; c_ /= r; d_ /= r;
  }

  cplx a() const { return a_; }
  cplx b() const { return b_; }
  cplx c() const { return c_; }
  cplx d() const { return d_; }

  cplx det() const { return a_ * d_ - b_ * c_; }

  MobiusTransform inverse() const {
    MobiusTransform m;
    m.a_ = d_; m.b_ = -b_; m.c_ = -c_; m.d_ = a_;
    return m;
  }

  MobiusTransform operator*(const MobiusTransform& rhs) const {
    return MobiusTransform(a_ * rhs.a_ + b_ * rhs.c_, a_ * rhs.b_ + b_ * rhs.d_,
                           c_ * rhs.a_ + d_ * rhs.c_, c_ * rhs.b_ + d_ * rhs.d_);
  }

  SpherePoint operator()(const SpherePoint& p) const {
    return SpherePoint{a_ * p.z + b_ * p.w, c_ * p.z + d_ * p.w}.normalized();
  }

  cplx operator()(cplx x) const {
    return (a_ * x + b_) / (c_ * x + d_);
  }

  Quadruple operator()(const Quadruple& q) const {
    return {(*this)(q.a), (*this)(q.b), (*this)(q.c), (*this)(q.d)};
  }

  // True when the matrix is real up to a unimodular factor, i.e. the map
  // preserves the extended real line.
  bool is_real(double tol = 1e-9) const {
    cplx e = a_;
    for (cplx v : {b_, c_, d_})
      if (std::abs(v) > std::abs(e)) e = v;
    cplx phase = e / std::abs(e);
    for (cplx v : {a_, b_, c_, d_})
      if (std::abs(std::imag(v / phase)) > tol) return false;
    return true;
  }

 private:
  cplx a_, b_, c_, d_;
};

namespace detail {

// Matrix sending (z1, z2, z3) to (0, 1, infinity).
inline MobiusTransform to_standard_triple(const SpherePoint& z1,
                                          const SpherePoint& z2,
                                          const SpherePoint& z3) {
  const SpherePoint* pts[3] = {&z1, &z2, &z3};
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (projectively_equal(*pts[i], *pts[j]))
        throw DegenerateTriple("mobius_through: coincident points");
  cplx b23 = bracket(z2, z3);
  cplx b21 = bracket(z2, z1);
  return MobiusTransform(b23 * z1.w, -b23 * z1.z, b21 * z3.w, -b21 * z3.z);
}

}  // namespace detail

// Unique transform mapping (p, q, r) to (p2, q2, r2). Verifies its own
// output on the three defining points.
inline MobiusTransform mobius_through(const SpherePoint& p, const SpherePoint& q,
                                      const SpherePoint& r, const SpherePoint& p2,
                                      const SpherePoint& q2, const SpherePoint& r2) {
  MobiusTransform m = detail::to_standard_triple(p2, q2, r2).inverse() *
                      detail::to_standard_triple(p, q, r);
  const SpherePoint* src[3] = {&p, &q, &r};
  const SpherePoint* dst[3] = {&p2, &q2, &r2};
  for (int i = 0; i < 3; ++i)
    if (chordal_distance(m(*src[i]), *dst[i]) > 1e-10)
      throw DegenerateTriple("mobius_through: verification failed");
  return m;
}

struct NormalizedQuadruple {
  MobiusTransform gamma;  // sends (a, c, d) to (1, infinity, 0)
  cplx cross;             // = gamma(b) = cr(a,b,c,d)
};

inline NormalizedQuadruple normalize_quadruple(const Quadruple& q) {
  MobiusTransform gamma =
      mobius_through(q.a, q.c, q.d, SpherePoint::from_real(1.0),
                     SpherePoint::infinity(), SpherePoint::from_real(0.0));
  return {gamma, cross_ratio(q)};
}

// Boundary angle coordinate seen from z0: the argument of the image of x
// under z -> (z - z0)/(z - conj z0), which maps the reference point to the
// disk center. Real boundary points land on the unit circle.
inline double angle_coordinate(const SpherePoint& x, cplx z0 = cplx{0.0, 1.0}) {
  cplx num = x.z - z0 * x.w;
  cplx den = x.z - std::conj(z0) * x.w;
  return std::arg(num * std::conj(den));
}

// Angle metric on the boundary circle: the smaller angle at z0 between the
// geodesic rays toward x and y. Values in [0, pi].
inline double angle_distance(const SpherePoint& x, const SpherePoint& y,
                             cplx z0 = cplx{0.0, 1.0}) {
  if (std::imag(z0) <= 0.0)
    throw OutOfDomain("angle_distance: reference point not in upper half plane");
  cplx wx = (x.z - z0 * x.w) * std::conj(x.z - std::conj(z0) * x.w);
  cplx wy = (y.z - z0 * y.w) * std::conj(y.z - std::conj(z0) * y.w);
  double d = std::abs(std::arg(wx * std::conj(wy)));
  return std::min(d, kPi);
}

// Distance between geodesics (x1,y1), (x2,y2): the larger of the endpoint
// angle distances.
inline double geodesic_distance(const SpherePoint& x1, const SpherePoint& y1,
                                const SpherePoint& x2, const SpherePoint& y2,
                                cplx z0 = cplx{0.0, 1.0}) {
  return std::max(angle_distance(x1, x2, z0), angle_distance(y1, y2, z0));
}

// Boundary point with angle coordinate phi (inverse of angle_coordinate for
// z0 = i): x = i (1 + e^{i phi}) / (1 - e^{i phi}), with phi = 0 mapped to
// infinity.
inline SpherePoint boundary_point_at_angle(double phi) {
  cplx w = std::polar(1.0, phi);
  cplx num = cplx{0.0, 1.0} * (1.0 + w);
  cplx den = 1.0 - w;
  if (std::abs(den) < 1e-12) return SpherePoint::infinity();
  return SpherePoint{cplx{(num / den).real()}, cplx{1.0}};
}

}  // namespace liouville
