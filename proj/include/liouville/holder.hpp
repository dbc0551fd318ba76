#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <utility>
#include <vector>

#include "liouville/boxes.hpp"
#include "liouville/errors.hpp"
#include "liouville/sphere.hpp"

namespace liouville {

namespace detail {

// |d/dtheta of gamma(x(theta))| where x(theta) is the boundary point at angle
// theta and gamma = [[a,b],[c,d]] has det 1. Equals 2 / |C w + D|^2 with
// w = e^{i theta}, C = c i - d, D = c i + d.
inline double boundary_param_speed(const MobiusTransform& g, double theta) {
  cplx i{0.0, 1.0};
  cplx c = g.c() * i - g.d();
  cplx d = g.c() * i + g.d();
  double q = std::abs(c * std::polar(1.0, theta) + d);
  return 2.0 / (q * q);
}

// Max of boundary_param_speed over theta in the closed sweep
// [t0, t0 + sweep] (sweep may be negative). Exact: |C w + D| is minimized at
// the angle of -D/C if it lies inside the sweep, else at an endpoint.
inline double max_param_speed_on_arc(const MobiusTransform& g, double t0,
                                     double sweep) {
  cplx i{0.0, 1.0};
  cplx c = g.c() * i - g.d();
  cplx d = g.c() * i + g.d();
  double lo = std::min(t0, t0 + sweep), hi = std::max(t0, t0 + sweep);
  double best_q = std::min(std::abs(c * std::polar(1.0, lo) + d),
                           std::abs(c * std::polar(1.0, hi) + d));
  if (std::abs(c) > 1e-300) {
    double tc = std::arg(-d / c);
    for (double t : {tc, tc - 2.0 * kPi, tc + 2.0 * kPi})
      if (t >= lo && t <= hi) {
        double q = std::abs(std::abs(d / c) - 1.0) * std::abs(c);
        best_q = std::min(best_q, q);
      }
  }
  if (best_q < 1e-150) return 4.0e300;
  return 2.0 / (best_q * best_q);
}

}  // namespace detail

// One-dimensional profile on a normalized arc interval [lo, hi]: a ramp of
// width (hi-lo)/4 at each end raised to the power lambda, plateau value 1,
// zero outside. The indicator variant is the constant 1 on [lo, hi].
struct ArcProfile {
  double lo = 0.0;
  double hi = 1.0;
  double lambda = 1.0;
  bool indicator = false;

  double slope() const { return 4.0 / (hi - lo); }

  double value(double u) const {
    if (indicator) return (u >= lo && u <= hi) ? 1.0 : 0.0;
    double t = slope() * std::min(u - lo, hi - u);
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return lambda == 1.0 ? t : std::pow(t, lambda);
  }
};

// Holder test function on the geodesics of a box, of tensor form
// xi(x, y) = scale * h_u(u(x)) * h_v(v(y)) in the normalized coordinates of
// its support box, or a bilinear table in those coordinates. The declared
// Holder data (exponent, constant) refers to the angle metric with
// reference point i.
class HolderFunction {
 public:
  enum class Kind { bump, product, table, indicator };

  Kind kind() const { return kind_; }
  const GeodesicBox& support() const { return support_; }
  double lambda() const { return lambda_; }
  double holder_constant() const { return constant_; }
  double sup_norm() const { return std::abs(scale_) * peak_; }
  double scale() const { return scale_; }
  const MobiusTransform& normalizer() const { return gamma_; }
  double c_star() const { return c_star_; }
  bool separable() const { return kind_ != Kind::table; }

  double profile_u(double u) const { return pu_.value(u); }
  double profile_v(double v) const { return pv_.value(v); }

  cplx eval_normalized(double u, double v) const {
    if (kind_ != Kind::table)
      return cplx{scale_ * pu_.value(u) * pv_.value(v), 0.0};
    return scale_ * table_value(u, v);
  }

  cplx operator()(const SpherePoint& x, const SpherePoint& y) const {
    SpherePoint gx = gamma_(x), gy = gamma_(y);
    if (gx.is_infinity() || gy.is_infinity()) return cplx{0.0, 0.0};
    return eval_normalized(gx.affine().real(), gy.affine().real());
  }

  HolderFunction scaled(double factor) const {
    HolderFunction f = *this;
    f.scale_ *= factor;
    f.constant_ *= std::abs(factor);
    return f;
  }

  // xi composed with the boundary action of `a`: support moves to a^{-1}(box)
  // and the normalized-coordinate evaluation is unchanged (the normalizer
  // composes exactly). The Holder constant is recomputed because the angle
  // metric is not Mobius invariant.
  HolderFunction precompose(const MobiusTransform& a) const {
    HolderFunction f = *this;
    MobiusTransform inv = a.inverse();
    f.support_ = GeodesicBox{inv(support_.a), inv(support_.b),
                             inv(support_.c), inv(support_.d)};
    f.gamma_ = gamma_ * a;
    f.recompute_constant();
    return f;
  }

  static HolderFunction bump(const GeodesicBox& box, double lambda) {
    return make_separable(Kind::bump, box, lambda, lambda);
  }

  static HolderFunction product(const GeodesicBox& box, double lambda_u,
                                double lambda_v) {
    return make_separable(Kind::product, box, lambda_u, lambda_v);
  }

  static HolderFunction indicator(const GeodesicBox& box) {
    HolderFunction f;
    f.kind_ = Kind::indicator;
    f.init_box(box);
    f.lambda_ = 1.0;
    f.pu_ = ArcProfile{-1.0, 0.0, 1.0, true};
    f.pv_ = ArcProfile{f.c_star_, 1.0, 1.0, true};
    f.constant_ = std::numeric_limits<double>::infinity();
    f.peak_ = 1.0;
    return f;
  }

  // Bilinear interpolation of `values` (row major, rows x cols, rows along
  // the u axis) over the normalized box, zero outside.
  static HolderFunction table(const GeodesicBox& box, std::size_t rows,
                              std::size_t cols, std::vector<double> values,
                              double lambda) {
    if (rows < 2 || cols < 2 || values.size() != rows * cols)
      throw ParameterOutOfRange("table function: bad dimensions");
    if (lambda <= 0.0 || lambda > 1.0)
      throw ParameterOutOfRange("table function: lambda outside (0,1]");
    HolderFunction f;
    f.kind_ = Kind::table;
    f.init_box(box);
    f.lambda_ = lambda;
    f.rows_ = rows;
    f.cols_ = cols;
    f.values_ = std::move(values);
    f.peak_ = 0.0;
    for (double v : f.values_) f.peak_ = std::max(f.peak_, std::abs(v));
    f.recompute_constant();
    return f;
  }

 private:
  static HolderFunction make_separable(Kind kind, const GeodesicBox& box,
                                       double lambda_u, double lambda_v) {
    for (double l : {lambda_u, lambda_v})
      if (l <= 0.0 || l > 1.0)
        throw ParameterOutOfRange("holder function: lambda outside (0,1]");
    HolderFunction f;
    f.kind_ = kind;
    f.init_box(box);
    f.lambda_ = std::min(lambda_u, lambda_v);
    f.pu_ = ArcProfile{-1.0, 0.0, lambda_u, false};
    f.pv_ = ArcProfile{f.c_star_, 1.0, lambda_v, false};
    f.peak_ = 1.0;
    f.recompute_constant();
    return f;
  }

  void init_box(const GeodesicBox& box) {
    support_ = box;
    BoxNormalization norm = normalize_box(box);
    gamma_ = norm.gamma;
    c_star_ = norm.c_star;
  }

  double table_value(double u, double v) const {
    double su = u + 1.0;                          // [0,1]
    double sv = (v - c_star_) / (1.0 - c_star_);  // [0,1]
    if (su < 0.0 || su > 1.0 || sv < 0.0 || sv > 1.0) return 0.0;
    double gu = su * static_cast<double>(rows_ - 1);
    double gv = sv * static_cast<double>(cols_ - 1);
    std::size_t i = std::min(rows_ - 2, static_cast<std::size_t>(gu));
    std::size_t j = std::min(cols_ - 2, static_cast<std::size_t>(gv));
    double fu = gu - static_cast<double>(i);
    double fv = gv - static_cast<double>(j);
    auto at = [&](std::size_t r, std::size_t c) { return values_[r * cols_ + c]; };
    return (1.0 - fu) * ((1.0 - fv) * at(i, j) + fv * at(i, j + 1)) +
           fu * ((1.0 - fv) * at(i + 1, j) + fv * at(i + 1, j + 1));
  }

  // Arc sweeps of the support arcs in the angle coordinate.
  void arc_sweeps(double& tu0, double& su, double& tv0, double& sv) const {
    auto a = detail::arc_sweep(support_.a, support_.b,
                               angle_coordinate(support_.c));
    auto b = detail::arc_sweep(support_.c, support_.d,
                               angle_coordinate(support_.a));
    tu0 = a.first;
    su = a.second;
    tv0 = b.first;
    sv = b.second;
  }

  void recompute_constant() {
    double tu0, swu, tv0, swv;
    arc_sweeps(tu0, swu, tv0, swv);
    double lip_u = detail::max_param_speed_on_arc(gamma_, tu0, swu);
    double lip_v = detail::max_param_speed_on_arc(gamma_, tv0, swv);
    if (kind_ == Kind::indicator) {
      constant_ = std::numeric_limits<double>::infinity();
      return;
    }
    if (kind_ != Kind::table) {
      double cu = std::pow(pu_.slope() * lip_u, pu_.lambda);
      double cv = std::pow(pv_.slope() * lip_v, pv_.lambda);
      // Mixed exponents: bound dtheta^{lambda_axis} by
      // pi^{lambda_axis - lambda} dtheta^{lambda}.
      constant_ = std::abs(scale_) * (cu * std::pow(kPi, pu_.lambda - lambda_) +
                                      cv * std::pow(kPi, pv_.lambda - lambda_));
      return;
    }
    // Table: largest normalized-coordinate slope times parameter speeds,
    // with a safety factor over the sampled grid slopes. A table that does
    // not vanish on the edge of its support jumps to zero across the
    // boundary, so no finite constant applies there.
    double du_max = 0.0, dv_max = 0.0;
    auto at = [&](std::size_t r, std::size_t c) { return values_[r * cols_ + c]; };
    bool edge_zero = true;
    for (std::size_t c = 0; c < cols_; ++c)
      if (at(0, c) != 0.0 || at(rows_ - 1, c) != 0.0) edge_zero = false;
    for (std::size_t r = 0; r < rows_; ++r)
      if (at(r, 0) != 0.0 || at(r, cols_ - 1) != 0.0) edge_zero = false;
    if (!edge_zero) {
      constant_ = std::numeric_limits<double>::infinity();
      return;
    }
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c + 1 < cols_; ++c)
        dv_max = std::max(dv_max, std::abs(at(r, c + 1) - at(r, c)) *
                                      static_cast<double>(cols_ - 1) /
                                      (1.0 - c_star_));
    for (std::size_t c = 0; c < cols_; ++c)
      for (std::size_t r = 0; r + 1 < rows_; ++r)
        du_max = std::max(du_max, std::abs(at(r + 1, c) - at(r, c)) *
                                      static_cast<double>(rows_ - 1));
    double lip = du_max * lip_u + dv_max * lip_v;  // Lipschitz in angle metric
    // Lipschitz implies lambda-Holder on bounded sets:
    // |df| <= L d <= L pi^{1-lambda} d^lambda.
    constant_ = std::abs(scale_) * 1.0001 * lip * std::pow(kPi, 1.0 - lambda_);
  }

  Kind kind_ = Kind::bump;
  GeodesicBox support_;
  MobiusTransform gamma_;
  double c_star_ = 0.5;
  double lambda_ = 1.0;
  double constant_ = 0.0;
  double scale_ = 1.0;
  double peak_ = 1.0;
  ArcProfile pu_, pv_;
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> values_;
};

// Step approximation at level n: constant on each partition cell with the
// value of the source at the cell's upper corner (a_i, c_j).
struct StepApproximation {
  BoxPartition partition;
  std::vector<cplx> values;  // (i-1) * 2^n + (j-1), row major

  cplx value_at_cell(std::size_t i, std::size_t j) const {
    std::size_t m = partition.xs.size() - 1;
    return values[(i - 1) * m + (j - 1)];
  }

  // Locates the cell containing the normalized coordinates of (x, y);
  // cells own their upper parameter edge.
  cplx operator()(const SpherePoint& x, const SpherePoint& y) const {
    SpherePoint gx = partition.gamma(x), gy = partition.gamma(y);
    if (gx.is_infinity() || gy.is_infinity()) return cplx{0.0, 0.0};
    double u = gx.affine().real(), v = gy.affine().real();
    const auto& us = partition.us;
    const auto& vs = partition.vs;
    if (u < us.front() || u > us.back() || v < vs.front() || v > vs.back())
      return cplx{0.0, 0.0};
    std::size_t i = static_cast<std::size_t>(
        std::lower_bound(us.begin() + 1, us.end(), u) - us.begin());
    std::size_t j = static_cast<std::size_t>(
        std::lower_bound(vs.begin() + 1, vs.end(), v) - vs.begin());
    std::size_t m = us.size() - 1;
    i = std::min(i, m);
    j = std::min(j, m);
    return value_at_cell(i, j);
  }
};

inline StepApproximation step_approximation(
    const HolderFunction& f, int level,
    PartitionScheme scheme = PartitionScheme::normalized_euclidean) {
  if (level > 12) throw LevelTooDeep("step_approximation: level > 12");
  StepApproximation s;
  s.partition = partition_box(f.support(), level, scheme);
  std::size_t m = s.partition.xs.size() - 1;
  s.values.resize(m * m);
  for (std::size_t i = 1; i <= m; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      s.values[(i - 1) * m + (j - 1)] =
          f.eval_normalized(s.partition.us[i], s.partition.vs[j]);
  return s;
}

// Sampled lower bound for the Holder constant of `f` (angle metric,
// reference i): max quotient |f(g1)-f(g2)| / d(g1,g2)^lambda over random
// pairs, structured near-diagonal pairs included at several separations.
template <typename F>
double holder_constant_estimate(const F& f, const GeodesicBox& box,
                                double lambda, int samples,
                                std::uint64_t seed = 0x5eedULL) {
  BoxNormalization norm = normalize_box(box);
  MobiusTransform inv = norm.gamma.inverse();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto point_u = [&](double u) { return inv(SpherePoint::from_real(u)); };
  auto point_v = [&](double v) { return inv(SpherePoint::from_real(v)); };
  double best = 0.0;
  auto consider = [&](const SpherePoint& x1, const SpherePoint& y1,
                      const SpherePoint& x2, const SpherePoint& y2) {
    double d = geodesic_distance(x1, y1, x2, y2);
    if (d < 1e-12 || d > kPi) return;
    double num = std::abs(f(x1, y1) - f(x2, y2));
    if (num == 0.0) return;
    best = std::max(best, num / std::pow(d, lambda));
  };
  int base_count = std::max(1, samples / 16);
  const double dirs[4][2] = {{1, 0}, {0, 1}, {1, 1}, {1, -1}};
  for (int s = 0; s < base_count; ++s) {
    double u = -1.05 + 1.1 * unit(rng);
    double v = norm.c_star + (1.0 - norm.c_star) * (-0.05 + 1.1 * unit(rng));
    SpherePoint x1 = point_u(u), y1 = point_v(v);
    double tx = angle_coordinate(x1), ty = angle_coordinate(y1);
    // Independent random partner.
    double u2 = -1.05 + 1.1 * unit(rng);
    double v2 = norm.c_star + (1.0 - norm.c_star) * (-0.05 + 1.1 * unit(rng));
    consider(x1, y1, point_u(u2), point_v(v2));
    // Near pairs along structured directions at several separations.
    for (int e = 0; e < 3; ++e) {
      double r = std::pow(10.0, -1.0 - 1.7 * e) * (0.5 + unit(rng));
      for (auto& dir : dirs) {
        SpherePoint x2 = boundary_point_at_angle(tx + r * dir[0]);
        SpherePoint y2 = boundary_point_at_angle(ty + r * dir[1]);
        consider(x1, y1, x2, y2);
      }
    }
  }
  return best;
}

}  // namespace liouville
