#pragma once

#include <cmath>
#include <functional>
#include <utility>
#include <vector>

#include "liouville/errors.hpp"
#include "liouville/numeric.hpp"
#include "liouville/sphere.hpp"

namespace liouville {

inline constexpr int kMaxPartitionLevel = 16;

inline bool is_real_boundary_point(const SpherePoint& p, double tol = 1e-11) {
  return std::abs(std::imag(p.z * std::conj(p.w))) <=
         tol * std::abs(p.z) * std::abs(p.w) + 1e-300;
}

// Box of geodesics [a,b] x [c,d]: geodesics with one endpoint in the boundary
// arc [a,b] and the other in [c,d]. Valid when the four points are distinct
// on the extended real line and cr(a,b,c,d) > 1, which encodes that the two
// arcs are disjoint and consistently oriented.
struct GeodesicBox {
  SpherePoint a, b, c, d;
};

inline GeodesicBox make_box(const SpherePoint& a, const SpherePoint& b,
                            const SpherePoint& c, const SpherePoint& d) {
  const SpherePoint* pts[4] = {&a, &b, &c, &d};
  for (int i = 0; i < 4; ++i) {
    if (!is_real_boundary_point(*pts[i]))
      throw DegenerateBox("make_box: corner not on the boundary circle");
    for (int j = i + 1; j < 4; ++j)
      if (projectively_equal(*pts[i], *pts[j]))
        throw DegenerateBox("make_box: coincident corners");
  }
  cplx cr = cross_ratio(a, b, c, d);
  if (std::abs(cr.imag()) > 1e-9 * (1.0 + std::abs(cr)))
    throw DegenerateBox("make_box: cross-ratio not real");
  if (cr.real() <= 1.0)
    throw NonPositiveMass("make_box: cross-ratio <= 1, arcs not disjoint");
  return {a, b, c, d};
}

inline GeodesicBox make_box(double a, double b, double c, double d) {
  return make_box(SpherePoint::from_real(a), SpherePoint::from_real(b),
                  SpherePoint::from_real(c), SpherePoint::from_real(d));
}

// log cr(a,b,c,d), the Liouville mass of the box. Always positive.
inline double liouville_box_measure(const GeodesicBox& box) {
  cplx cr = cross_ratio(box.a, box.b, box.c, box.d);
  return std::log(cr.real());
}

// gamma maps (a,b,d) to (-1,0,1); the fourth corner then lands on
// c* = 1/(2 e^L - 1) automatically, L being the box measure.
struct BoxNormalization {
  MobiusTransform gamma;
  double c_star;
  double measure;
};

inline BoxNormalization normalize_box(const GeodesicBox& box) {
  MobiusTransform gamma =
      mobius_through(box.a, box.b, box.d, SpherePoint::from_real(-1.0),
                     SpherePoint::from_real(0.0), SpherePoint::from_real(1.0));
  SpherePoint img = gamma(box.c);
  double c_star = img.affine().real();
  if (!(c_star > 0.0 && c_star < 1.0))
    throw DegenerateBox("normalize_box: normalized corner outside (0,1)");
  double measure = std::log((1.0 + c_star) / (2.0 * c_star));
  return {gamma, c_star, measure};
}

// Per-cell mass bound constant: cells of the level-n dyadic partition have
// mass at most C(L) 4^{-n} with C(L) = (1 - c*) / c*^2.
inline double partition_cell_bound_constant(double c_star) {
  return (1.0 - c_star) / (c_star * c_star);
}

enum class PartitionScheme {
  normalized_euclidean,  // dyadic in the (-1,0) x (c*,1) coordinates
  angle_equal            // dyadic in the angle coordinate along each arc
};

// Level-n partition of a box: 2^n + 1 points per arc, endpoints exact.
// Refining to level n+1 keeps every point and inserts one per interval.
struct BoxPartition {
  GeodesicBox box;
  int level = 0;
  PartitionScheme scheme = PartitionScheme::normalized_euclidean;
  MobiusTransform gamma;  // box normalizer
  double c_star = 0.0;
  double measure = 0.0;
  std::vector<SpherePoint> xs;  // arc [a,b]
  std::vector<SpherePoint> ys;  // arc [c,d]
  std::vector<double> us;       // normalized parameters of xs in [-1,0]
  std::vector<double> vs;       // normalized parameters of ys in [c*,1]
};

namespace detail {

inline double wrap_angle(double t) {
  while (t <= -kPi) t += 2.0 * kPi;
  while (t > kPi) t -= 2.0 * kPi;
  return t;
}

// Signed sweep from the angle of p to the angle of q along the arc that
// avoids the angles in `avoid`.
inline std::pair<double, double> arc_sweep(const SpherePoint& p,
                                           const SpherePoint& q, double avoid) {
  double tp = angle_coordinate(p);
  double tq = angle_coordinate(q);
  double ccw = tq - tp;
  if (ccw <= 0.0) ccw += 2.0 * kPi;  // counterclockwise sweep in (0, 2pi)
  double rel = avoid - tp;
  if (rel <= 0.0) rel += 2.0 * kPi;
  bool avoid_inside_ccw = rel < ccw;
  double sweep = avoid_inside_ccw ? ccw - 2.0 * kPi : ccw;
  return {tp, sweep};
}

}  // namespace detail

inline BoxPartition partition_box(const GeodesicBox& box, int level,
                                  PartitionScheme scheme =
                                      PartitionScheme::normalized_euclidean) {
  if (level < 0) throw ParameterOutOfRange("partition_box: negative level");
  if (level > kMaxPartitionLevel)
    throw LevelTooDeep("partition_box: level > 16");
  BoxNormalization norm = normalize_box(box);
  BoxPartition part;
  part.box = box;
  part.level = level;
  part.scheme = scheme;
  part.gamma = norm.gamma;
  part.c_star = norm.c_star;
  part.measure = norm.measure;
  std::size_t m = std::size_t{1} << level;
  part.xs.resize(m + 1);
  part.ys.resize(m + 1);
  part.us.resize(m + 1);
  part.vs.resize(m + 1);
  MobiusTransform inv = norm.gamma.inverse();
  double cs = norm.c_star;
  if (scheme == PartitionScheme::normalized_euclidean) {
    for (std::size_t i = 0; i <= m; ++i) {
      double s = static_cast<double>(i) / static_cast<double>(m);
      part.us[i] = -1.0 + s;
      part.vs[i] = cs + (1.0 - cs) * s;
      part.xs[i] = inv(SpherePoint::from_real(part.us[i]));
      part.ys[i] = inv(SpherePoint::from_real(part.vs[i]));
    }
  } else {
    double avoid_x = angle_coordinate(box.c);
    double avoid_y = angle_coordinate(box.a);
    auto [tx0, sweep_x] = detail::arc_sweep(box.a, box.b, avoid_x);
    auto [ty0, sweep_y] = detail::arc_sweep(box.c, box.d, avoid_y);
    for (std::size_t i = 0; i <= m; ++i) {
      double s = static_cast<double>(i) / static_cast<double>(m);
      part.xs[i] = boundary_point_at_angle(detail::wrap_angle(tx0 + s * sweep_x));
      part.ys[i] = boundary_point_at_angle(detail::wrap_angle(ty0 + s * sweep_y));
      part.us[i] = norm.gamma(part.xs[i]).affine().real();
      part.vs[i] = norm.gamma(part.ys[i]).affine().real();
    }
  }
  // Endpoints are the original corners exactly.
  part.xs.front() = box.a;
  part.xs.back() = box.b;
  part.ys.front() = box.c;
  part.ys.back() = box.d;
  part.us.front() = -1.0;
  part.us.back() = 0.0;
  part.vs.front() = cs;
  part.vs.back() = 1.0;
  return part;
}

// A partition level counts as "deep" once the identity-map cell masses are
// provably below this threshold (C(L) 4^-n <= threshold). Only deep levels
// can witness a branch violation: coarse cells of a long box legitimately
// have cr far from 1 even before any deformation.
inline constexpr double kBranchGuardMassThreshold = 0.02;

inline bool partition_level_is_deep(double c_star, int level) {
  return partition_cell_bound_constant(c_star) * std::pow(4.0, -level) <=
         kBranchGuardMassThreshold;
}

// Streams log cr of the images of the partition cells under `map` in row
// major (i, then j) order. `map` takes and returns a SpherePoint; pass the
// identity to measure the cells themselves. Throws BranchViolation when a
// cell leaves the principal-branch safety region at a deep level.
template <typename Map, typename Fn>
void for_each_cell_measure(const BoxPartition& part, Map&& map, Fn&& fn) {
  std::size_t m = part.xs.size() - 1;
  bool deep = partition_level_is_deep(part.c_star, part.level);
  std::vector<SpherePoint> px(m + 1), qy(m + 1);
  for (std::size_t i = 0; i <= m; ++i) px[i] = map(part.xs[i]);
  for (std::size_t j = 0; j <= m; ++j) qy[j] = map(part.ys[j]);
  for (std::size_t i = 1; i <= m; ++i) {
    cplx row = bracket(px[i - 1], px[i]);
    for (std::size_t j = 1; j <= m; ++j) {
      cplx col = bracket(qy[j - 1], qy[j]);
      cplx x = (row * col) /
               (bracket(px[i - 1], qy[j]) * bracket(px[i], qy[j - 1]));
      if (std::abs(x) < 1e-14) {
        fn(i, j, cplx{0.0, 0.0});
        continue;
      }
      if (deep && (std::abs(x) >= 1.0 || (cplx{1.0} + x).real() <= 0.0))
        throw BranchViolation("cell cross-ratio outside principal branch region");
      if (std::abs(cplx{1.0} + x) < 1e-100)
        throw BranchViolation("cell cross-ratio degenerated to zero");
      fn(i, j, log1p_c(x));
    }
  }
}

struct Identity {
  SpherePoint operator()(const SpherePoint& p) const { return p; }
};

template <typename Map>
cplx sum_cell_measures(const BoxPartition& part, Map&& map) {
  cplx total{0.0, 0.0};
  for_each_cell_measure(part, std::forward<Map>(map),
                        [&](std::size_t, std::size_t, cplx v) { total += v; });
  return total;
}

inline cplx sum_cell_measures(const BoxPartition& part) {
  return sum_cell_measures(part, Identity{});
}

}  // namespace liouville
