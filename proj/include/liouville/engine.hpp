#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "liouville/boxes.hpp"
#include "liouville/families.hpp"
#include "liouville/holder.hpp"
#include "liouville/numeric.hpp"

namespace liouville {

struct EvalParams {
  double tolerance = 1e-6;
  int max_level = 12;
  int min_level = 1;
  PartitionScheme scheme = PartitionScheme::normalized_euclidean;
  bool branch_guard = true;  // require |cr - 1| < 1/2 on cells at deep levels
  bool extrapolate = true;   // geometric tail acceleration of the level sums
};

enum class Termination { tolerance, exact, exhausted_levels };

struct LevelRecord {
  int level;
  cplx partial;  // the level sum I_n exactly as summed
  double delta;  // |I_n - I_{n-1}|, zero on the first record
};

struct EvaluationTrace {
  std::vector<LevelRecord> levels;
  Termination reason = Termination::exhausted_levels;
  double fitted_ratio = std::numeric_limits<double>::quiet_NaN();
  cplx raw_value{0.0, 0.0};  // last level sum
  cplx value{0.0, 0.0};      // series estimate (tail-corrected when stable)
  std::uint64_t cells = 0;

  bool converged() const { return reason != Termination::exhausted_levels; }
};

// Boundary action with parameter velocity; velocity is zero for frozen maps.
using SphereMap = std::function<MovingPoint(const SpherePoint&)>;

inline SphereMap identity_sphere_map() {
  return [](const SpherePoint& p) { return MovingPoint{p, {}}; };
}

inline SphereMap family_sphere_map(const HolomorphicQCFamily& fam, cplx t) {
  return [fam, t](const SpherePoint& p) {
    return fam.sphere_image_velocity(t, p);
  };
}

namespace detail {

inline cplx bracket_dot(const MovingPoint& p, const MovingPoint& q) {
  return p.velocity.z * q.point.w - q.point.z * p.velocity.w +
         p.point.z * q.velocity.w - q.velocity.z * p.point.w;
}

inline std::vector<cplx> aitken(const std::vector<cplx>& s) {
  std::vector<cplx> out;
  if (s.size() < 3) return out;
  for (std::size_t i = 0; i + 2 < s.size(); ++i) {
    cplx d1 = s[i + 1] - s[i];
    cplx d2 = s[i + 2] - s[i + 1];
    cplx den = d2 - d1;
    if (std::abs(den) < 1e-300)
      out.push_back(s[i + 2]);
    else
      out.push_back(s[i + 2] - d2 * d2 / den);
  }
  return out;
}

// One dyadic level of the corner sum: partitions the support box of xi at
// the given level, pushes the cell corners through gamma^{-1} then the
// boundary map, and sums xi(corner) * log cr(image cell). In derivative mode
// the log cr factor is replaced by its parameter derivative.
template <bool Derivative>
cplx level_sum(const HolderFunction& xi, const MobiusTransform& gamma_inv,
               const SphereMap& map, const BoxPartition& part,
               const EvalParams& params) {
  std::size_t m = part.xs.size() - 1;
  std::vector<MovingPoint> px(m + 1), qy(m + 1);
  for (std::size_t i = 0; i <= m; ++i) px[i] = map(gamma_inv(part.xs[i]));
  for (std::size_t j = 0; j <= m; ++j) qy[j] = map(gamma_inv(part.ys[j]));

  // Corner weights of xi in its own normalized coordinates.
  std::vector<double> wu, wv;
  std::vector<cplx> wtab;
  if (xi.separable()) {
    wu.resize(m + 1);
    wv.resize(m + 1);
    for (std::size_t i = 0; i <= m; ++i) {
      wu[i] = xi.scale() * xi.profile_u(part.us[i]);
      wv[i] = xi.profile_v(part.vs[i]);
    }
  } else {
    wtab.resize((m + 1) * (m + 1));
    for (std::size_t i = 0; i <= m; ++i)
      for (std::size_t j = 0; j <= m; ++j)
        wtab[i * (m + 1) + j] = xi.eval_normalized(part.us[i], part.vs[j]);
  }

  std::vector<cplx> col(m + 1), col_dot(m + 1);
  for (std::size_t j = 1; j <= m; ++j) {
    col[j] = bracket(qy[j - 1].point, qy[j].point);
    if constexpr (Derivative) col_dot[j] = bracket_dot(qy[j - 1], qy[j]);
  }

  bool guard = params.branch_guard && part.level >= 2 &&
               partition_level_is_deep(part.c_star, part.level);
  std::vector<cplx> row_sums(m);
  std::vector<std::string> row_errors(m);
  parallel_for(m, [&](std::size_t r) {
    std::size_t i = r + 1;
    cplx acc{0.0, 0.0};
    cplx row = bracket(px[i - 1].point, px[i].point);
    cplx row_dot;
    if constexpr (Derivative) row_dot = bracket_dot(px[i - 1], px[i]);
    for (std::size_t j = 1; j <= m; ++j) {
      bool skip_x = false, skip_w = false;
      if (xi.separable()) {
        if (wu[i] == 0.0 || wv[j] == 0.0) skip_w = true;
      } else if (wtab[i * (m + 1) + j] == cplx{0.0, 0.0}) {
        skip_w = true;
      }
      cplx b1 = bracket(px[i - 1].point, qy[j].point);
      cplx b2 = bracket(px[i].point, qy[j - 1].point);
      cplx x = (row * col[j]) / (b1 * b2);
      if (std::abs(x) < 1e-14) skip_x = true;
      if (!skip_x && (std::abs(x) >= 1.0 || (cplx{1.0} + x).real() <= 0.0)) {
        if (guard || std::abs(cplx{1.0} + x) < 1e-100) {
          if (row_errors[r].empty())
            row_errors[r] = "cell (" + std::to_string(i) + "," +
                            std::to_string(j) + ") level " +
                            std::to_string(part.level) +
                            " left the principal branch region";
          break;
        }
      }
      if (guard && !skip_x &&
          (!std::isfinite(std::abs(x)) || std::abs(x) >= 0.5)) {
        if (row_errors[r].empty())
          row_errors[r] = "cell (" + std::to_string(i) + "," +
                          std::to_string(j) + ") level " +
                          std::to_string(part.level) + " has |cr-1| >= 1/2";
        break;
      }
      if (skip_w || skip_x) continue;
      cplx weight = xi.separable() ? cplx{wu[i] * wv[j], 0.0}
                                   : wtab[i * (m + 1) + j];
      if constexpr (Derivative) {
        cplx ratio = row_dot / row + col_dot[j] / col[j] -
                     bracket_dot(px[i - 1], qy[j]) / b1 -
                     bracket_dot(px[i], qy[j - 1]) / b2;
        acc += weight * (x * ratio / (1.0 + x));
      } else {
        acc += weight * log1p_c(x);
      }
    }
    row_sums[r] = acc;
  });
  for (const auto& err : row_errors)
    if (!err.empty()) throw OutsideNeighborhood(err);
  cplx total{0.0, 0.0};
  for (cplx v : row_sums) total += v;
  return total;
}

template <bool Derivative>
EvaluationTrace dyadic_eval(const HolderFunction& xi,
                            const MobiusTransform& gamma, const SphereMap& map,
                            const EvalParams& params) {
  if (params.max_level < 1 || params.max_level > kMaxPartitionLevel)
    throw ParameterOutOfRange("eval: max_level outside [1,16]");
  MobiusTransform gamma_inv = gamma.inverse();
  EvaluationTrace trace;
  std::vector<cplx> sums;
  cplx prev_estimate{0.0, 0.0};
  bool have_prev = false;
  int check_from = std::max(2, params.min_level);
  for (int n = 0; n <= params.max_level; ++n) {
    BoxPartition part = partition_box(xi.support(), n, params.scheme);
    cplx s = level_sum<Derivative>(xi, gamma_inv, map, part, params);
    trace.cells += static_cast<std::uint64_t>(1) << (2 * n);
    double delta = sums.empty() ? 0.0 : std::abs(s - sums.back());
    sums.push_back(s);
    trace.levels.push_back({n, s, delta});
    trace.raw_value = s;
    double scale = 1.0 + std::abs(s);
    if (n >= 1 && delta <= 1e-14 * scale) {
      trace.reason = Termination::exact;
      trace.value = s;
      return trace;
    }
    // Decay ratio over the last few deltas.
    if (n >= 2) {
      int back = std::min(3, n - 1);
      double d_new = std::abs(sums[n] - sums[n - 1]);
      double d_old = std::abs(sums[n - back] - sums[n - back - 1]);
      if (d_old > 0.0)
        trace.fitted_ratio = std::pow(d_new / d_old, 1.0 / back);
    }
    // Best available estimate: iterated Aitken when the decay looks settled.
    cplx estimate = s;
    if (params.extrapolate && n >= 3 && trace.fitted_ratio > 0.0 &&
        trace.fitted_ratio <= 0.9) {
      std::vector<cplx> a = aitken(sums);
      std::vector<cplx> b = aitken(a);
      estimate = !b.empty() ? b.back() : (!a.empty() ? a.back() : s);
    }
    if (n >= check_from && have_prev) {
      double err = std::abs(estimate - prev_estimate);
      if (delta < params.tolerance || err < params.tolerance) {
        trace.reason = Termination::tolerance;
        trace.value = estimate;
        return trace;
      }
    }
    prev_estimate = estimate;
    have_prev = true;
    trace.value = estimate;
  }
  trace.reason = Termination::exhausted_levels;
  return trace;
}

}  // namespace detail

inline void require_fixes_standard_triple(const SphereMap& map) {
  const SpherePoint pts[3] = {SpherePoint::from_real(0.0),
                              SpherePoint::from_real(1.0),
                              SpherePoint::infinity()};
  for (const auto& p : pts)
    if (chordal_distance(map(p).point, p) > 1e-10)
      throw ParameterOutOfRange("boundary map must fix 0, 1, infinity");
}

// Pairing of the deformed Liouville current with xi composed with gamma:
// the limit over dyadic levels of
//   sum_{i,j} xi(a_i, c_j) log cr(f(gamma^{-1}(cell corners))).
inline EvaluationTrace eval_current(const HolderFunction& xi,
                                    const MobiusTransform& gamma,
                                    const SphereMap& map,
                                    const EvalParams& params = {}) {
  require_fixes_standard_triple(map);
  return detail::dyadic_eval<false>(xi, gamma, map, params);
}

// Same pairing along a holomorphic family at parameter t (complex allowed).
inline EvaluationTrace eval_extension(const HolderFunction& xi,
                                      const MobiusTransform& gamma,
                                      const HolomorphicQCFamily& fam, cplx t,
                                      const EvalParams& params = {}) {
  return detail::dyadic_eval<false>(xi, gamma, family_sphere_map(fam, t),
                                    params);
}

// d/dt of eval_extension at t, summed as the termwise-differentiated series.
inline EvaluationTrace eval_derivative(const HolderFunction& xi,
                                       const MobiusTransform& gamma,
                                       const HolomorphicQCFamily& fam, cplx t,
                                       const EvalParams& params = {}) {
  return detail::dyadic_eval<true>(xi, gamma, family_sphere_map(fam, t),
                                   params);
}

// Deterministic enumeration of real Mobius transforms: images of (0,1,inf)
// under positively oriented triples of a uniform angular grid on the
// boundary circle. The identity is always the first entry; doubling the
// resolution keeps every transform.
struct SampledGamma {
  double p, q, r;  // affine coordinates of the defining triple (inf allowed)
  MobiusTransform g;
};

struct GammaSampler {
  int resolution = 8;
  std::vector<SampledGamma> transforms;

  static GammaSampler uniform(int m) {
    if (m < 3) throw ParameterOutOfRange("gamma sampler: need m >= 3");
    GammaSampler s;
    s.resolution = m;
    const double inf = std::numeric_limits<double>::infinity();
    s.transforms.push_back({0.0, 1.0, inf, MobiusTransform()});
    std::vector<SpherePoint> pts(m);
    std::vector<double> vals(m), angs(m);
    for (int k = 0; k < m; ++k) {
      double phi = 2.0 * kPi * k / m;
      // Cardinal angles snap to their exact Cayley images so the identity
      // triple deduplicates and grids at nested resolutions share points.
      if (k == 0)
        pts[k] = SpherePoint::infinity();
      else if (4 * k == m)
        pts[k] = SpherePoint::from_real(-1.0);
      else if (2 * k == m)
        pts[k] = SpherePoint::from_real(0.0);
      else if (4 * k == 3 * m)
        pts[k] = SpherePoint::from_real(1.0);
      else
        pts[k] = boundary_point_at_angle(phi);
      angs[k] = phi;
      vals[k] = pts[k].is_infinity() ? inf : pts[k].affine().real();
    }
    const SpherePoint z0 = SpherePoint::from_real(0.0);
    const SpherePoint z1 = SpherePoint::from_real(1.0);
    const SpherePoint zi = SpherePoint::infinity();
    auto ccw = [&](int a, int b) {
      double d = angs[b] - angs[a];
      if (d <= 0.0) d += 2.0 * kPi;
      return d;
    };
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        for (int k = 0; k < m; ++k) {
          if (k == i || k == j) continue;
          if (ccw(i, j) >= ccw(i, k)) continue;  // wrong orientation
          if (vals[i] == 0.0 && vals[j] == 1.0 && std::isinf(vals[k]))
            continue;  // identity already present
          s.transforms.push_back(
              {vals[i], vals[j], vals[k],
               mobius_through(z0, z1, zi, pts[i], pts[j], pts[k])});
        }
      }
    return s;
  }
};

struct SeminormRow {
  SampledGamma gamma;
  cplx value{0.0, 0.0};
  int levels = 0;
  double last_delta = 0.0;
  bool ok = false;
  std::string error;
};

struct SeminormResult {
  double value = 0.0;
  std::size_t argmax = 0;  // index into rows
  std::vector<SeminormRow> rows;
};

// sup over the sampled transforms of |W(xi o gamma)|.
inline SeminormResult seminorm(const HolderFunction& xi, const SphereMap& map,
                               const GammaSampler& sampler,
                               const EvalParams& params = {}) {
  require_fixes_standard_triple(map);
  SeminormResult result;
  result.rows.resize(sampler.transforms.size());
  for (std::size_t idx = 0; idx < sampler.transforms.size(); ++idx) {
    SeminormRow& row = result.rows[idx];
    row.gamma = sampler.transforms[idx];
    try {
      EvaluationTrace tr =
          detail::dyadic_eval<false>(xi, sampler.transforms[idx].g, map, params);
      row.value = tr.value;
      row.levels = static_cast<int>(tr.levels.size());
      row.last_delta = tr.levels.back().delta;
      row.ok = true;
    } catch (const Error& e) {
      row.error = e.what();
    }
  }
  bool any = false;
  for (std::size_t idx = 0; idx < result.rows.size(); ++idx) {
    if (!result.rows[idx].ok) continue;
    double v = std::abs(result.rows[idx].value);
    if (!any || v > result.value) {
      result.value = v;
      result.argmax = idx;
      any = true;
    }
  }
  if (!any) throw NonConvergence("seminorm: every sampled gamma failed");
  return result;
}

// Independent check value: integrates xi against dx dy / (x-y)^2 by adaptive
// tensor Gauss-Legendre quadrature in the normalized coordinates of the
// support box.
struct QuadratureParams {
  double abs_tol = 1e-8;
  std::uint64_t max_evals = 40'000'000;
};

namespace detail {

inline const double* gl7_nodes() {
  static const double nodes[7] = {
      -0.9491079123427585, -0.7415311855993945, -0.4058451513773972,
      0.0,
      0.4058451513773972,  0.7415311855993945,  0.9491079123427585};
  return nodes;
}

inline const double* gl7_weights() {
  static const double weights[7] = {
      0.1294849661688697, 0.2797053914892766, 0.3818300505051189,
      0.4179591836734694,
      0.3818300505051189, 0.2797053914892766, 0.1294849661688697};
  return weights;
}

template <typename F>
double gl7_2d(const F& f, double u0, double u1, double v0, double v1) {
  const double* xs = gl7_nodes();
  const double* ws = gl7_weights();
  double hu = 0.5 * (u1 - u0), cu = 0.5 * (u0 + u1);
  double hv = 0.5 * (v1 - v0), cv = 0.5 * (v0 + v1);
  double acc = 0.0;
  for (int i = 0; i < 7; ++i) {
    double row = 0.0;
    for (int j = 0; j < 7; ++j) row += ws[j] * f(cu + hu * xs[i], cv + hv * xs[j]);
    acc += ws[i] * row;
  }
  return acc * hu * hv;
}

template <typename F>
double adaptive_2d(const F& f, double u0, double u1, double v0, double v1,
                   double tol, int depth, std::uint64_t& evals,
                   std::uint64_t budget) {
  evals += 49 * 5;
  if (evals > budget)
    throw QuadratureBudgetExceeded("quadrature budget exhausted");
  double whole = gl7_2d(f, u0, u1, v0, v1);
  double um = 0.5 * (u0 + u1), vm = 0.5 * (v0 + v1);
  double parts = gl7_2d(f, u0, um, v0, vm) + gl7_2d(f, um, u1, v0, vm) +
                 gl7_2d(f, u0, um, vm, v1) + gl7_2d(f, um, u1, vm, v1);
  if (std::abs(parts - whole) <= tol || depth >= 30) return parts;
  double quarter = 0.25 * tol;
  return adaptive_2d(f, u0, um, v0, vm, quarter, depth + 1, evals, budget) +
         adaptive_2d(f, um, u1, v0, vm, quarter, depth + 1, evals, budget) +
         adaptive_2d(f, u0, um, vm, v1, quarter, depth + 1, evals, budget) +
         adaptive_2d(f, um, u1, vm, v1, quarter, depth + 1, evals, budget);
}

}  // namespace detail

inline double quadrature_oracle(const HolderFunction& xi,
                                const QuadratureParams& params = {}) {
  double cs = xi.c_star();
  auto integrand = [&xi](double u, double v) {
    double s = u - v;
    return xi.eval_normalized(u, v).real() / (s * s);
  };
  std::uint64_t evals = 0;
  return detail::adaptive_2d(integrand, -1.0, 0.0, cs, 1.0, params.abs_tol, 0,
                             evals, params.max_evals);
}

// A deformed current with its evaluation parameters fixed.
struct DistributionHandle {
  std::optional<HolomorphicQCFamily> family;
  cplx t{0.0, 0.0};
  std::optional<CyclicFuchsianGroup> group;
  EvalParams params;

  SphereMap map() const {
    if (!family) return identity_sphere_map();
    return family_sphere_map(*family, t);
  }

  EvaluationTrace evaluate(const HolderFunction& xi,
                           const MobiusTransform& gamma = {}) const {
    return detail::dyadic_eval<false>(xi, gamma, map(), params);
  }
};

}  // namespace liouville
