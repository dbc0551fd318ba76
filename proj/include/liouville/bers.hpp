#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <vector>

#include "liouville/errors.hpp"
#include "liouville/families.hpp"
#include "liouville/sphere.hpp"

namespace liouville {

// ---------------------------------------------------------------------------
// Schwarzian derivative S(f) = f'''/f' - (3/2) (f''/f')^2.
//
// Derivatives are recovered from equally spaced samples on a small circle
// around z: the j-th Fourier coefficient of theta -> f(z + h e^{i theta})
// equals f^(j)(z) h^j / j! up to an aliasing error of order h^m. With m = 16
// nodes the truncation error is negligible and the roundoff floor for f'''
// scales like eps/h^3, so a radius near 1e-2 (1+|z|) keeps Mobius inputs at
// |S| below 1e-9. Line stencils of 4th order would need h ~ 1e-3 and lose
// three more digits to cancellation.
// ---------------------------------------------------------------------------

namespace detail {

struct CircleJet {
  cplx c1, c2, c3;  // f^(j)(z) h^j / j!
  double sample_scale;
};

template <typename F>
CircleJet circle_jet(const F& f, cplx z, double h, int m = 16) {
  CircleJet jet{{0.0, 0.0}, {0.0, 0.0}, {0.0, 0.0}, 0.0};
  for (int k = 0; k < m; ++k) {
    double theta = 2.0 * kPi * k / m;
    cplx w = std::polar(1.0, theta);
    cplx v = f(z + h * w);
    double av = std::abs(v);
    if (av > jet.sample_scale) jet.sample_scale = av;
    cplx e1 = std::polar(1.0, -theta);
    cplx e2 = std::polar(1.0, -2.0 * theta);
    cplx e3 = std::polar(1.0, -3.0 * theta);
    jet.c1 += v * e1;
    jet.c2 += v * e2;
    jet.c3 += v * e3;
  }
  double inv = 1.0 / m;
  jet.c1 *= inv;
  jet.c2 *= inv;
  jet.c3 *= inv;
  return jet;
}

}  // namespace detail

// Step h <= 0 selects the default radius 1e-2 (1 + |z|).
template <typename F>
cplx schwarzian(const F& f, cplx z, double h = 0.0) {
  if (h <= 0.0) h = 1e-2 * (1.0 + std::abs(z));
  detail::CircleJet jet = detail::circle_jet(f, z, h);
  if (std::abs(jet.c1) <= 1e-13 * std::max(1.0, jet.sample_scale))
    throw DerivativeVanishes("schwarzian: f' vanishes at the sample point");
  // f' = c1/h, f'' = 2 c2/h^2, f''' = 6 c3/h^3.
  cplx r2 = 2.0 * jet.c2 / jet.c1;  // h f''/f'
  cplx r3 = 6.0 * jet.c3 / jet.c1;  // h^2 f'''/f'
  return (r3 - 1.5 * r2 * r2) / (h * h);
}

// Closed form from derivative values, for evaluators that carry derivatives.
inline cplx schwarzian_from_derivatives(cplx f1, cplx f2, cplx f3) {
  if (std::abs(f1) == 0.0)
    throw DerivativeVanishes("schwarzian: f' vanishes");
  cplx q = f2 / f1;
  return f3 / f1 - 1.5 * q * q;
}

// Mean-value holomorphy residual: |circle average - center value| relative
// to the sample scale. Near zero for functions holomorphic on the disk.
template <typename F>
double mean_value_residual(const F& f, cplx z, double h, int m = 16) {
  cplx avg{0.0, 0.0};
  double scale = 0.0;
  for (int k = 0; k < m; ++k) {
    cplx v = f(z + h * std::polar(1.0, 2.0 * kPi * k / m));
    avg += v;
    scale = std::max(scale, std::abs(v));
  }
  avg /= static_cast<double>(m);
  return std::abs(avg - f(z)) / std::max(1.0, scale);
}

// ---------------------------------------------------------------------------
// Cusped forms: holomorphic phi on a half-plane with sup |y^2 phi| finite.
// ---------------------------------------------------------------------------

enum class HalfPlane { upper, lower };

struct NormGrid {
  double y_min = 1e-3;
  double y_max = 1e3;
  double x_max = 1e3;
  int per_decade = 8;
};

struct CuspedForm {
  std::function<cplx(cplx)> phi;
  HalfPlane domain = HalfPlane::lower;
  double b_norm = 0.0;

  cplx operator()(cplx z) const { return phi(z); }
};

// Sampled sup of |y^2 phi| over a logarithmic grid: y spans
// [y_min, y_max] (signed per the domain), x spans {0} and +-[y_min, x_max].
template <typename F>
double cusped_norm_of(const F& phi, HalfPlane domain,
                      const NormGrid& grid = {}) {
  std::vector<double> xs{0.0};
  int nx = static_cast<int>(std::ceil(
      grid.per_decade * std::log10(grid.x_max / grid.y_min)));
  for (int i = 0; i <= nx; ++i) {
    double x = grid.y_min * std::pow(grid.x_max / grid.y_min,
                                     static_cast<double>(i) / nx);
    xs.push_back(x);
    xs.push_back(-x);
  }
  int ny = static_cast<int>(std::ceil(
      grid.per_decade * std::log10(grid.y_max / grid.y_min)));
  double sign = domain == HalfPlane::upper ? 1.0 : -1.0;
  double sup = 0.0;
  for (int j = 0; j <= ny; ++j) {
    double y = sign * grid.y_min *
               std::pow(grid.y_max / grid.y_min, static_cast<double>(j) / ny);
    for (double x : xs) {
      double v = y * y * std::abs(phi(cplx{x, y}));
      if (v > sup) sup = v;
    }
  }
  return sup;
}

inline double cusped_norm(const CuspedForm& form, const NormGrid& grid = {}) {
  return cusped_norm_of(form.phi, form.domain, grid);
}

template <typename F>
CuspedForm make_cusped_form(F phi, HalfPlane domain, const NormGrid& grid = {}) {
  CuspedForm form;
  form.phi = std::move(phi);
  form.domain = domain;
  form.b_norm = cusped_norm(form, grid);
  return form;
}

// Averaging a seed form over the cyclic group <z -> lambda z>:
//   phi(z) = sum_k phi0(lambda^k z) lambda^{2k},   k = -k_range .. k_range.
// The result satisfies phi(lambda z) lambda^2 = phi(z) up to the truncation
// tail, which decays geometrically when phi0 does.
template <typename F>
CuspedForm poincare_series(F phi0, double multiplier, int k_range,
                           HalfPlane domain = HalfPlane::lower,
                           const NormGrid& grid = {}) {
  if (multiplier <= 1.0)
    throw ParameterOutOfRange("poincare_series: multiplier must exceed 1");
  if (k_range < 0 || k_range > 200)
    throw ParameterOutOfRange("poincare_series: k_range outside [0,200]");
  auto fn = [phi0 = std::move(phi0), multiplier, k_range](cplx z) {
    cplx acc{0.0, 0.0};
    for (int k = -k_range; k <= k_range; ++k) {
      double lk = std::pow(multiplier, k);
      acc += phi0(lk * z) * (lk * lk);
    }
    return acc;
  };
  return make_cusped_form(fn, domain, grid);
}

// ---------------------------------------------------------------------------
// Ahlfors-Weill section: eta(z) = -2 y^2 phi(conj z) on the half-plane
// opposite to the domain of phi. Valid for ||phi||_b < 1/2, where
// ||eta||_inf = 2 ||phi||_b < 1.
// ---------------------------------------------------------------------------

struct HarmonicBeltrami {
  CuspedForm form;
  double sup_norm = 0.0;

  HalfPlane domain() const {
    return form.domain == HalfPlane::lower ? HalfPlane::upper
                                           : HalfPlane::lower;
  }

  cplx operator()(cplx z) const {
    double y = z.imag();
    return -2.0 * y * y * form.phi(std::conj(z));
  }

  BeltramiCoefficient as_beltrami() const {
    auto self = *this;
    return BeltramiCoefficient{[self](cplx z) { return self(z); }, sup_norm};
  }
};

inline HarmonicBeltrami ahlfors_weill(const CuspedForm& phi) {
  if (!(phi.b_norm < 0.5))
    throw NormTooLarge("ahlfors_weill: ||phi||_b must be below 1/2");
  return HarmonicBeltrami{phi, 2.0 * phi.b_norm};
}

// Chart-geometry constants (documented bounds, not enforced): the chart is
// injective on the Teichmuller ball of radius (1/2) log 2, and its image
// contains the ball of radius 2/3 and is contained in the ball of radius 2.
inline constexpr double kChartBallRadius = 0.34657359027997264;  // (log 2)/2
inline constexpr double kChartImageInnerRadius = 2.0 / 3.0;
inline constexpr double kChartImageOuterRadius = 2.0;
// Working bound used by this library when building charts; strictly inside
// the Ahlfors-Weill validity threshold 1/2.
inline constexpr double kChartNormBound = 0.45;

}  // namespace liouville
