#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "liouville/boxes.hpp"
#include "liouville/engine.hpp"
#include "liouville/families.hpp"
#include "liouville/holder.hpp"
#include "liouville/hyperbolic.hpp"
#include "liouville/numeric.hpp"
#include "liouville/sphere.hpp"

namespace liouville {

// ---------------------------------------------------------------------------
// Random geometry generators. Separation floors keep the homogeneous bracket
// arithmetic far from cancellation so that comparisons at 1e-11 measure the
// property under test and not the generator.
// ---------------------------------------------------------------------------

inline SpherePoint random_sphere_point(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double pick = unit(rng);
  if (pick < 0.05) return SpherePoint::infinity();
  double re = 4.0 * unit(rng) - 2.0;
  double im = 4.0 * unit(rng) - 2.0;
  return SpherePoint::from_complex(cplx{re, im});
}

inline Quadruple random_separated_quadruple(std::mt19937_64& rng,
                                            double min_sep = 1e-2) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    Quadruple q{random_sphere_point(rng), random_sphere_point(rng),
                random_sphere_point(rng), random_sphere_point(rng)};
    const SpherePoint* pts[4] = {&q.a, &q.b, &q.c, &q.d};
    bool ok = true;
    for (int i = 0; i < 4 && ok; ++i)
      for (int j = i + 1; j < 4 && ok; ++j)
        if (chordal_distance(*pts[i], *pts[j]) < min_sep) ok = false;
    if (ok) return q;
  }
  throw NonConvergence("random quadruple: separation rejection stalled");
}

inline MobiusTransform random_complex_mobius(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    cplx a{unit(rng), unit(rng)}, b{unit(rng), unit(rng)};
    cplx c{unit(rng), unit(rng)}, d{unit(rng), unit(rng)};
    double scale = std::max({std::abs(a), std::abs(b), std::abs(c), std::abs(d)});
    if (scale < 0.1) continue;
    if (std::abs(a * d - b * c) < 0.1 * scale * scale) continue;
    return MobiusTransform(a, b, c, d);
  }
  throw NonConvergence("random mobius: determinant rejection stalled");
}

// Real transform through three separated boundary points, positively
// oriented (a genuine isometry of the upper half plane).
inline MobiusTransform random_real_mobius(std::mt19937_64& rng,
                                          double min_sep = 1e-2) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double t1 = 2.0 * kPi * unit(rng);
    double t2 = t1 + min_sep + (2.0 * kPi - 3.0 * min_sep) * unit(rng);
    double t3 = t2 + min_sep +
                (2.0 * kPi - (t2 - t1) - 2.0 * min_sep) * unit(rng);
    SpherePoint p1 = boundary_point_at_angle(t1);
    SpherePoint p2 = boundary_point_at_angle(t2);
    SpherePoint p3 = boundary_point_at_angle(t3);
    if (chordal_distance(p1, p2) < min_sep ||
        chordal_distance(p2, p3) < min_sep ||
        chordal_distance(p1, p3) < min_sep)
      continue;
    return mobius_through(SpherePoint::from_real(0.0),
                          SpherePoint::from_real(1.0), SpherePoint::infinity(),
                          p1, p2, p3);
  }
  throw NonConvergence("random real mobius: rejection stalled");
}

// ---------------------------------------------------------------------------
// Quadruples with cross-ratio prescribed close to 1: real-Mobius translates
// of (1, 1+s, inf, 0), whose cross-ratio is exactly 1+s.
// ---------------------------------------------------------------------------

struct QuadrupleSource {
  double s_min = 1e-6;
  double s_max = 1e-3;
  double min_separation = 1e-2;  // chordal floor for the base translate
};

struct SmallCrQuadruple {
  Quadruple q;
  double x;  // |cr - 1| of the undeformed quadruple
};

inline SmallCrQuadruple random_small_cr_quadruple(std::mt19937_64& rng,
                                                  const QuadrupleSource& src) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double s = src.s_min * std::pow(src.s_max / src.s_min, unit(rng));
  MobiusTransform g = random_real_mobius(rng, src.min_separation);
  Quadruple base{SpherePoint::from_real(1.0), SpherePoint::from_real(1.0 + s),
                 SpherePoint::infinity(), SpherePoint::from_real(0.0)};
  Quadruple moved = g(base);
  // x is the exact bracket-form value of the stored points: translating by g
  // preserves s only up to roundoff amplified by 1/s, so recompute.
  return {moved, std::abs(cross_ratio_minus_one(moved))};
}

// ---------------------------------------------------------------------------
// Cross-ratio decay of a single deformation map.
// ---------------------------------------------------------------------------

struct DecaySample {
  double x = 0.0;    // |cr - 1| before the map
  double lhs = 0.0;  // |cr - 1| after the map
  double rhs = 0.0;  // decay_bound(x, K, eps)
  bool ok = false;
};

struct DecayReport {
  cplx t{0.0, 0.0};
  double dilatation = 1.0;
  double eps = kDefaultDecayEps;
  int samples = 0;
  int violations = 0;
  double worst_margin = 0.0;  // min over samples of rhs - lhs
  double fitted_exponent = 0.0;
  double required_exponent = 0.0;
  bool pass = false;
  std::vector<DecaySample> rows;
};

inline DecayReport verify_decay(const HolomorphicQCFamily& fam, cplx t,
                                int count, const QuadrupleSource& src = {},
                                double eps = kDefaultDecayEps,
                                std::uint64_t seed = 0x5eedULL) {
  if (count < 2) throw ParameterOutOfRange("verify_decay: count < 2");
  DecayReport rep;
  rep.t = t;
  double n = fam.mu_norm(t);
  if (n >= 1.0) throw NormOverflow("verify_decay: map degenerates");
  rep.dilatation = (1.0 + n) / (1.0 - n);
  rep.eps = eps;
  rep.required_exponent = 1.0 / (rep.dilatation + eps);
  std::mt19937_64 rng(seed);
  std::vector<double> lx, ly;
  rep.rows.reserve(count);
  for (int i = 0; i < count; ++i) {
    SmallCrQuadruple sq = random_small_cr_quadruple(rng, src);
    Quadruple img{fam.sphere_image(t, sq.q.a), fam.sphere_image(t, sq.q.b),
                  fam.sphere_image(t, sq.q.c), fam.sphere_image(t, sq.q.d)};
    DecaySample row;
    row.x = sq.x;
    row.lhs = std::abs(cross_ratio_minus_one(img));
    row.rhs = decay_bound(sq.x, rep.dilatation, eps);
    row.ok = row.lhs <= row.rhs;
    if (!row.ok) ++rep.violations;
    double margin = row.rhs - row.lhs;
    if (rep.rows.empty() || margin < rep.worst_margin)
      rep.worst_margin = margin;
    if (row.lhs > 0.0) {
      lx.push_back(std::log(row.x));
      ly.push_back(std::log(row.lhs));
    }
    rep.rows.push_back(row);
  }
  rep.samples = count;
  rep.fitted_exponent = lx.size() >= 2 ? fit_line(lx, ly).slope : 1.0;
  rep.pass =
      rep.violations == 0 && rep.fitted_exponent >= rep.required_exponent;
  return rep;
}

// ---------------------------------------------------------------------------
// Infinitesimal decay: |d/dt cr(f^t(q))| against C x^{1/(K_r+eps)} log(1/x),
// with the constant fitted on a calibration half and frozen before the
// held-out half is scored.
// ---------------------------------------------------------------------------

namespace detail {

inline std::pair<cplx, cplx> cross_ratio_minus_one_with_derivative(
    const MovingPoint& a, const MovingPoint& b, const MovingPoint& c,
    const MovingPoint& d) {
  cplx r = bracket(a.point, b.point);
  cplx s = bracket(c.point, d.point);
  cplx b1 = bracket(a.point, d.point);
  cplx b2 = bracket(b.point, c.point);
  cplx x = (r * s) / (b1 * b2);
  cplx dx = x * (bracket_dot(a, b) / r + bracket_dot(c, d) / s -
                 bracket_dot(a, d) / b1 - bracket_dot(b, c) / b2);
  return {x, dx};
}

}  // namespace detail

struct DerivativeSample {
  cplx t{0.0, 0.0};
  double x = 0.0;         // |cr - 1| of the undeformed quadruple
  double x_t = 0.0;       // |cr - 1| of the image quadruple at parameter t
  double lhs = 0.0;       // |d/dt cr|
  double rhs_unit = 0.0;  // x^{1/(K_r+eps)} log(1/x), before the constant
  double schwarz_q = 0.0;  // lhs normalized by the Schwarz-lemma bound, <= 1
  bool calibration = false;
  bool ok = false;
};

struct DerivativeBoundReport {
  double radius = 0.0;
  double dilatation = 1.0;  // K_r over the closed parameter disk
  double eps = kDefaultDecayEps;
  double c_fit = 0.0;
  double safety = 1.25;
  double schwarz_max = 0.0;  // largest sampled Schwarz quotient, theory <= 1
  int calibration_samples = 0;
  int holdout_samples = 0;
  int violations = 0;  // on the held-out half only
  double worst_margin = 0.0;
  bool pass = false;
  std::vector<DerivativeSample> rows;
};

inline DerivativeBoundReport verify_derivative_bound(
    const HolomorphicQCFamily& fam, double r, int count,
    const QuadrupleSource& src = {}, double eps = kDefaultDecayEps,
    std::uint64_t seed = 0x5eedULL, double safety = 1.25) {
  if (count < 8)
    throw ParameterOutOfRange("verify_derivative_bound: count < 8");
  if (!(r > 0.0) || r >= fam.radius())
    throw ParameterOutOfRange(
        "verify_derivative_bound: need 0 < r < family radius");
  DerivativeBoundReport rep;
  rep.radius = r;
  rep.dilatation = max_dilatation(fam, r);
  rep.eps = eps;
  rep.safety = safety;
  double expo = 1.0 / (rep.dilatation + eps);
  // t -> cr(f^t(quadruple)) is holomorphic from the parameter disk into
  // C \ {0, 1}, whose hyperbolic metric dominates the punctured-disk metric
  // 1/(|w-1| log 1/|w-1|). The Schwarz lemma then bounds the derivative by
  //   |d/dt cr| <= lam(t) x_t log(1/x_t),   lam(t) = 2 r0 / (r0^2 - |t|^2),
  // with x_t = |cr(f^t(..)) - 1|, uniformly over quadruples. The sampled
  // quotient against this bound is stable, so the frozen constant is fitted
  // on it and floored at the a-priori value 1; the cross-ratio decay bound
  // x_t <= x^{1/(K_r+eps)} converts the result to the reported rhs_unit form.
  double r0 = fam.radius();
  double lam_max = 2.0 * r0 / (r0 * r0 - r * r);
  // Parameter grid: center, half radius, full radius.
  std::vector<cplx> ts{cplx{0.0, 0.0}};
  for (int k = 0; k < 8; ++k) {
    ts.push_back(std::polar(r, 2.0 * kPi * k / 8.0));
    ts.push_back(std::polar(0.5 * r, 2.0 * kPi * (k + 0.5) / 8.0));
  }
  std::mt19937_64 rng(seed);
  rep.rows.reserve(count);
  for (int i = 0; i < count; ++i) {
    SmallCrQuadruple sq = random_small_cr_quadruple(rng, src);
    cplx t = ts[static_cast<std::size_t>(i) % ts.size()];
    auto [x, dx] = detail::cross_ratio_minus_one_with_derivative(
        fam.sphere_image_velocity(t, sq.q.a),
        fam.sphere_image_velocity(t, sq.q.b),
        fam.sphere_image_velocity(t, sq.q.c),
        fam.sphere_image_velocity(t, sq.q.d));
    DerivativeSample row;
    row.t = t;
    row.x = sq.x;
    row.x_t = std::abs(x);
    row.lhs = std::abs(dx);
    row.rhs_unit = std::pow(sq.x, expo) * std::log(1.0 / sq.x);
    if (row.x_t > 0.0 && row.x_t < 1.0) {
      double lam = 2.0 * r0 / (r0 * r0 - std::norm(t));
      row.schwarz_q =
          row.lhs / (lam * row.x_t * std::log(1.0 / row.x_t));
    } else {
      row.schwarz_q = row.lhs == 0.0
                          ? 0.0
                          : std::numeric_limits<double>::infinity();
    }
    row.calibration = i < count / 2;
    rep.rows.push_back(row);
  }
  double c_cal = 0.0;
  for (const auto& row : rep.rows) {
    rep.schwarz_max = std::max(rep.schwarz_max, row.schwarz_q);
    if (row.calibration) c_cal = std::max(c_cal, row.schwarz_q);
  }
  rep.c_fit = lam_max * std::max(safety * c_cal, 1.0);
  bool first = true;
  for (auto& row : rep.rows) {
    double bound = rep.c_fit * row.rhs_unit;
    row.ok = row.lhs <= bound;
    if (row.calibration) continue;
    ++rep.holdout_samples;
    if (!row.ok) ++rep.violations;
    double margin = bound - row.lhs;
    if (first || margin < rep.worst_margin) rep.worst_margin = margin;
    first = false;
  }
  rep.calibration_samples = count - rep.holdout_samples;
  rep.pass = rep.violations == 0 && rep.schwarz_max <= 1.0 + 1e-9;
  return rep;
}

// ---------------------------------------------------------------------------
// Holomorphy of t -> W_t(xi): mean-value property over a parameter circle
// and a centered estimate of the conjugate derivative; also compares the
// termwise derivative series against the finite-difference derivative.
// ---------------------------------------------------------------------------

struct HolomorphyReport {
  cplx center{0.0, 0.0};
  double sup_f = 0.0;
  double mean_value_residual = 0.0;
  double dbar_residual = 0.0;
  double threshold = 0.0;  // 1e-6 (1 + sup |F|)
  cplx derivative_series{0.0, 0.0};
  cplx derivative_fd{0.0, 0.0};
  double derivative_rel_err = 0.0;
  bool pass = false;
  std::vector<std::pair<cplx, cplx>> circle;  // (t, F(t))
};

inline HolomorphyReport verify_holomorphy(const HolderFunction& xi,
                                          const HolomorphicQCFamily& fam,
                                          cplx t0, double radius,
                                          int m_points = 16,
                                          const EvalParams& params = {}) {
  if (m_points < 4)
    throw ParameterOutOfRange("verify_holomorphy: need at least 4 points");
  if (radius <= 0.0)
    throw ParameterOutOfRange("verify_holomorphy: radius must be positive");
  MobiusTransform id;
  auto F = [&](cplx t) { return eval_extension(xi, id, fam, t, params).value; };
  HolomorphyReport rep;
  rep.center = F(t0);
  rep.sup_f = std::abs(rep.center);
  cplx avg{0.0, 0.0};
  for (int k = 0; k < m_points; ++k) {
    cplx t = t0 + std::polar(radius, 2.0 * kPi * k / m_points);
    cplx v = F(t);
    rep.circle.emplace_back(t, v);
    avg += v;
    rep.sup_f = std::max(rep.sup_f, std::abs(v));
  }
  avg /= static_cast<double>(m_points);
  rep.mean_value_residual = std::abs(avg - rep.center);
  double h = std::min(1e-3, 0.1 * radius);
  cplx fxp = F(t0 + h), fxm = F(t0 - h);
  cplx fyp = F(t0 + cplx{0.0, h}), fym = F(t0 - cplx{0.0, h});
  cplx fx = (fxp - fxm) / (2.0 * h);
  cplx fy = (fyp - fym) / (2.0 * h);
  rep.dbar_residual = std::abs(0.5 * (fx + cplx{0.0, 1.0} * fy));
  rep.derivative_fd = 0.5 * (fx - cplx{0.0, 1.0} * fy);
  rep.derivative_series = eval_derivative(xi, id, fam, t0, params).value;
  double dscale = std::max(std::abs(rep.derivative_series), 1e-30);
  rep.derivative_rel_err =
      std::abs(rep.derivative_series - rep.derivative_fd) / dscale;
  rep.threshold = 1e-6 * (1.0 + rep.sup_f);
  rep.pass = rep.mean_value_residual <= rep.threshold &&
             rep.dbar_residual <= rep.threshold;
  return rep;
}

// ---------------------------------------------------------------------------
// Level-sum decay rate: log4 regression of |I_{n+1} - I_n| against n must
// stay below (1 - lambda/2 - omega) plus slack. Exact evaluations (deltas
// hitting zero) pass by definition.
// ---------------------------------------------------------------------------

struct RateReport {
  double lambda = 1.0;
  double omega = 1.0;
  double slope = 0.0;
  double bound = 0.0;
  double slack = 0.15;
  bool exact = false;
  bool pass = false;
  EvaluationTrace trace;
};

inline RateReport verify_rate(const HolderFunction& xi, const SphereMap& map,
                              double omega, EvalParams params = {},
                              int n_lo = 2, int n_hi = 8, double slack = 0.15) {
  params.tolerance = 0.0;  // run the full ladder
  params.max_level = std::max(params.max_level, n_hi);
  RateReport rep;
  rep.lambda = xi.lambda();
  rep.omega = omega;
  rep.slack = slack;
  rep.bound = 1.0 - 0.5 * rep.lambda - omega + slack;
  rep.trace = eval_current(xi, MobiusTransform(), map, params);
  if (rep.trace.reason == Termination::exact) {
    rep.exact = true;
    rep.pass = true;
    return rep;
  }
  if (static_cast<int>(rep.trace.levels.size()) <= n_hi)
    throw InsufficientLevels("verify_rate: trace shallower than the fit range");
  std::vector<double> xs, ys;
  for (int n = n_lo; n <= n_hi; ++n) {
    double d = rep.trace.levels[static_cast<std::size_t>(n)].delta;
    if (d <= 0.0) {
      rep.exact = true;
      rep.pass = true;
      return rep;
    }
    xs.push_back(static_cast<double>(n));
    ys.push_back(std::log(d) / std::log(4.0));
  }
  rep.slope = fit_line(xs, ys).slope;
  rep.pass = rep.slope <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Invariance under the covering group: W_t(xi o A) = W_t(xi) for the cyclic
// generator A, owing to the intertwining f^t o A = A_t o f^t.
// ---------------------------------------------------------------------------

struct InvarianceReport {
  cplx base{0.0, 0.0};
  cplx conjugated{0.0, 0.0};
  double difference = 0.0;
  double bound = 0.0;
  cplx multiplier{0.0, 0.0};  // multiplier of the conjugated generator
  bool pass = false;
};

inline InvarianceReport verify_group_invariance(const HolomorphicQCFamily& fam,
                                                cplx t,
                                                const CyclicFuchsianGroup& group,
                                                const HolderFunction& xi,
                                                const EvalParams& params = {}) {
  InvarianceReport rep;
  SphereMap map = family_sphere_map(fam, t);
  MobiusTransform id;
  rep.base = eval_current(xi, id, map, params).value;
  rep.conjugated =
      eval_current(xi.precompose(group.generator()), id, map, params).value;
  rep.difference = std::abs(rep.base - rep.conjugated);
  rep.bound = 2.0 * params.tolerance;
  rep.multiplier = conjugated_group(fam, t, group).multiplier;
  rep.pass = rep.difference <= rep.bound;
  return rep;
}

// ---------------------------------------------------------------------------
// Punctured-disk modulus bound over a beta grid.
// ---------------------------------------------------------------------------

struct DiskSample {
  double beta = 0.0;
  cplx b1{0.0, 0.0};
  DiskBoundCheck check{};
};

struct PuncturedDiskReport {
  int samples = 0;
  int violations = 0;
  double worst_margin = 0.0;  // min of rhs - lhs
  bool pass = false;
  std::vector<DiskSample> rows;
};

inline PuncturedDiskReport verify_punctured_disk(
    int per_beta = 200, double beta_lo = 0.05, double beta_hi = 0.95,
    double beta_step = 0.05, std::uint64_t seed = 0x5eedULL) {
  if (per_beta < 1)
    throw ParameterOutOfRange("verify_punctured_disk: per_beta < 1");
  PuncturedDiskReport rep;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  bool first = true;
  for (double beta = beta_lo; beta <= beta_hi + 1e-12; beta += beta_step) {
    cplx lift{0.0, std::log(1.0 / beta)};  // principal lift of beta
    double rb = radius_r_beta(beta);
    for (int i = 0; i < per_beta; ++i) {
      // Point at hyperbolic distance d < r(beta) from the lift: after
      // projection the punctured-disk distance can only shrink, so the
      // sample stays admissible.
      double d = 0.999 * rb * unit(rng);
      double theta = 2.0 * kPi * unit(rng);
      cplx w = std::polar(std::tanh(0.5 * d), theta);
      cplx z1 = (lift - std::conj(lift) * w) / (1.0 - w);
      cplx b1 = std::exp(cplx{0.0, 1.0} * z1);
      DiskSample row;
      row.beta = beta;
      row.b1 = b1;
      row.check = check_punctured_disk_bound(beta, b1);
      if (!row.check.holds) ++rep.violations;
      double margin = row.check.rhs - row.check.lhs;
      if (first || margin < rep.worst_margin) rep.worst_margin = margin;
      first = false;
      rep.rows.push_back(row);
      ++rep.samples;
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

// ---------------------------------------------------------------------------
// Partition additivity and the per-cell mass bound C(L) 4^{-n}.
// ---------------------------------------------------------------------------

inline GeodesicBox random_box(std::mt19937_64& rng, bool allow_infinity = true) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 1000; ++attempt) {
    double v[4];
    for (double& x : v) x = -3.0 + 6.0 * unit(rng);
    std::sort(v, v + 4);
    if (v[1] - v[0] < 0.05 || v[2] - v[1] < 0.05 || v[3] - v[2] < 0.05)
      continue;
    if (allow_infinity && unit(rng) < 0.1)
      return make_box(SpherePoint::from_real(v[0]),
                      SpherePoint::from_real(v[1]),
                      SpherePoint::from_real(v[2]), SpherePoint::infinity());
    return make_box(v[0], v[1], v[2], v[3]);
  }
  throw NonConvergence("random_box: rejection stalled");
}

struct PartitionSample {
  int level = 0;
  double measure = 0.0;
  double additivity_error = 0.0;
  double max_cell = 0.0;
  double cell_bound = 0.0;
  bool ok = false;
};

struct PartitionReport {
  int samples = 0;
  int violations = 0;
  double worst_additivity = 0.0;
  bool pass = false;
  std::vector<PartitionSample> rows;
};

inline PartitionReport verify_partition(
    int box_count = 100, int max_level = 6, double additivity_tol = 1e-10,
    PartitionScheme scheme = PartitionScheme::normalized_euclidean,
    std::uint64_t seed = 0x5eedULL) {
  PartitionReport rep;
  std::mt19937_64 rng(seed);
  for (int b = 0; b < box_count; ++b) {
    GeodesicBox box = random_box(rng);
    double measure = liouville_box_measure(box);
    for (int n = 0; n <= max_level; ++n) {
      BoxPartition part = partition_box(box, n, scheme);
      double bound = partition_cell_bound_constant(part.c_star) *
                     std::pow(4.0, -n);
      PartitionSample row;
      row.level = n;
      row.measure = measure;
      row.cell_bound = bound;
      cplx total{0.0, 0.0};
      for_each_cell_measure(part, Identity{},
                            [&](std::size_t, std::size_t, cplx v) {
                              total += v;
                              row.max_cell = std::max(row.max_cell,
                                                      std::abs(v));
                            });
      row.additivity_error = std::abs(total - cplx{measure, 0.0});
      row.ok = row.additivity_error <= additivity_tol &&
               row.max_cell <= bound * (1.0 + 1e-12);
      if (!row.ok) ++rep.violations;
      rep.worst_additivity = std::max(rep.worst_additivity,
                                      row.additivity_error);
      rep.rows.push_back(row);
      ++rep.samples;
    }
  }
  rep.pass = rep.violations == 0;
  return rep;
}

}  // namespace liouville
