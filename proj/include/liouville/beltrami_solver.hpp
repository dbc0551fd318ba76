#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>
#include <string>
#include <vector>

#include <fftw3.h>

#include "liouville/errors.hpp"
#include "liouville/families.hpp"
#include "liouville/numeric.hpp"
#include "liouville/sphere.hpp"

namespace liouville {

// ---------------------------------------------------------------------------
// Windowed grid solver for the Beltrami equation f_zbar = mu f_z.
//
// Neumann construction on a periodic window: iterate h <- mu (1 + S h) with
// the Beurling transform S applied as the Fourier multiplier conj(k)/k, then
// recover f = z + C h with the Cauchy multiplier 1/((i/2) k). Contraction
// rate equals ||mu||_inf, so ||mu|| <= 1/2 gains a digit every ~3.3 rounds.
// The coefficient must be compactly supported inside the window; the wrap
// error is harmonic near the support and is absorbed by the affine
// normalization f(0) = 0, f(1) = 1.
// ---------------------------------------------------------------------------

struct GridMap {
  double half_width = 0.0;
  int n = 0;
  std::vector<cplx> f;   // row-major, f[iy*n + ix] at z = (-hw + ix s, -hw + iy s)
  std::vector<cplx> mu;  // coefficient sampled on the same nodes
  double residual = 0.0;
  std::vector<double> residual_history;
  cplx farfield_slope{1.0, 0.0};   // linear fit of the raw map on a far ring
  cplx farfield_offset{0.0, 0.0};

  double step() const { return 2.0 * half_width / n; }

  cplx node(int ix, int iy) const {
    return cplx{-half_width + ix * step(), -half_width + iy * step()};
  }

  // Bilinear interpolation of the map at z.
  cplx value(cplx z) const {
    double s = step();
    double gx = (z.real() + half_width) / s;
    double gy = (z.imag() + half_width) / s;
    int ix = static_cast<int>(std::floor(gx));
    int iy = static_cast<int>(std::floor(gy));
    if (ix < 0 || iy < 0 || ix + 1 >= n || iy + 1 >= n)
      throw OutOfDomain("grid map: point outside the window");
    double ax = gx - ix, ay = gy - iy;
    const cplx& f00 = f[static_cast<std::size_t>(iy) * n + ix];
    const cplx& f10 = f[static_cast<std::size_t>(iy) * n + ix + 1];
    const cplx& f01 = f[(static_cast<std::size_t>(iy) + 1) * n + ix];
    const cplx& f11 = f[(static_cast<std::size_t>(iy) + 1) * n + ix + 1];
    return f00 * ((1 - ax) * (1 - ay)) + f10 * (ax * (1 - ay)) +
           f01 * ((1 - ax) * ay) + f11 * (ax * ay);
  }
};

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftPlan {
  int n;
  fftw_plan forward, backward;
  std::vector<cplx> buf;

  explicit FftPlan(int n_) : n(n_), buf(static_cast<std::size_t>(n_) * n_) {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    auto* p = reinterpret_cast<fftw_complex*>(buf.data());
    forward = fftw_plan_dft_2d(n, n, p, p, FFTW_FORWARD, FFTW_ESTIMATE);
    backward = fftw_plan_dft_2d(n, n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE);
  }

  ~FftPlan() {
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    fftw_destroy_plan(forward);
    fftw_destroy_plan(backward);
  }

  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
};

// Interior sup of |f_zbar - mu f_z| with 4th-order centered differences,
// skipping a margin where the non-periodic z part of f wraps.
inline double grid_residual(const std::vector<cplx>& f,
                            const std::vector<cplx>& mu, int n, double step) {
  auto at = [&](int iy, int ix) -> const cplx& {
    return f[static_cast<std::size_t>(iy) * n + ix];
  };
  double inv12h = 1.0 / (12.0 * step);
  double sup = 0.0;
  int margin = 4;
  for (int iy = margin; iy < n - margin; ++iy) {
    for (int ix = margin; ix < n - margin; ++ix) {
      cplx fx = (at(iy, ix - 2) - 8.0 * at(iy, ix - 1) + 8.0 * at(iy, ix + 1) -
                 at(iy, ix + 2)) * inv12h;
      cplx fy = (at(iy - 2, ix) - 8.0 * at(iy - 1, ix) + 8.0 * at(iy + 1, ix) -
                 at(iy + 2, ix)) * inv12h;
      cplx fz = 0.5 * (fx - cplx{0.0, 1.0} * fy);
      cplx fzb = 0.5 * (fx + cplx{0.0, 1.0} * fy);
      double r = std::abs(fzb - mu[static_cast<std::size_t>(iy) * n + ix] * fz);
      if (r > sup) sup = r;
    }
  }
  return sup;
}

}  // namespace detail

inline GridMap solve_beltrami_grid(const BeltramiCoefficient& mu,
                                   double half_width, int n,
                                   int iterations = 20) {
  if (n < 16 || (n & (n - 1)) != 0)
    throw ParameterOutOfRange("grid solver: n must be a power of two >= 16");
  if (half_width <= 0.0)
    throw ParameterOutOfRange("grid solver: window half-width must be positive");
  if (iterations < 1 || iterations > 500)
    throw ParameterOutOfRange("grid solver: iterations outside [1,500]");

  GridMap out;
  out.half_width = half_width;
  out.n = n;
  std::size_t total = static_cast<std::size_t>(n) * n;
  out.mu.resize(total);
  double step = 2.0 * half_width / n;
  double sup_mu = 0.0;
  double support_radius = 0.0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      cplx z{-half_width + ix * step, -half_width + iy * step};
      cplx v = mu.value(z);
      out.mu[static_cast<std::size_t>(iy) * n + ix] = v;
      double av = std::abs(v);
      if (av > sup_mu) sup_mu = av;
      if (av > 1e-14 && std::abs(z) > support_radius)
        support_radius = std::abs(z);
    }
  if (sup_mu > 0.5 + 1e-12)
    throw NormOverflow("grid solver: ||mu|| must not exceed 1/2");
  if (support_radius > 0.9 * half_width)
    throw OutOfDomain("grid solver: coefficient support reaches the window edge");

  // Fourier multipliers. Frequency index m maps to wavenumber 2 pi m / (2 hw).
  detail::FftPlan plan(n);
  std::vector<cplx> zeta(total);
  double base = kPi / half_width;
  for (int iy = 0; iy < n; ++iy) {
    int my = iy <= n / 2 ? iy : iy - n;
    for (int ix = 0; ix < n; ++ix) {
      int mx = ix <= n / 2 ? ix : ix - n;
      zeta[static_cast<std::size_t>(iy) * n + ix] =
          cplx{base * mx, base * my};
    }
  }

  std::vector<cplx> h(out.mu);
  std::vector<cplx> sh(total), ch(total);
  double norm = 1.0 / static_cast<double>(total);
  int rises = 0;
  double prev_residual = std::numeric_limits<double>::infinity();
  double best_residual = std::numeric_limits<double>::infinity();
  for (int iter = 0; iter < iterations; ++iter) {
    std::copy(h.begin(), h.end(), plan.buf.begin());
    fftw_execute(plan.forward);
    std::vector<cplx> hhat(plan.buf);
    // Beurling transform.
    for (std::size_t i = 0; i < total; ++i) {
      cplx k = zeta[i];
      plan.buf[i] = (k == cplx{0.0, 0.0}) ? cplx{0.0, 0.0}
                                          : hhat[i] * std::conj(k) / k;
    }
    fftw_execute(plan.backward);
    for (std::size_t i = 0; i < total; ++i) sh[i] = plan.buf[i] * norm;
    for (std::size_t i = 0; i < total; ++i)
      h[i] = out.mu[i] * (1.0 + sh[i]);
    // Cauchy transform of the updated h and the resulting map. The zero mode
    // of h cannot live in a periodic antiderivative; it contributes the exact
    // term mean(h) * conj(z), which keeps f_zbar = h at the mean level.
    std::copy(h.begin(), h.end(), plan.buf.begin());
    fftw_execute(plan.forward);
    cplx mean_h = plan.buf[0] * norm;
    for (std::size_t i = 0; i < total; ++i) {
      cplx k = zeta[i];
      plan.buf[i] = (k == cplx{0.0, 0.0})
                        ? cplx{0.0, 0.0}
                        : plan.buf[i] / (cplx{0.0, 0.5} * k);
    }
    fftw_execute(plan.backward);
    for (std::size_t i = 0; i < total; ++i) ch[i] = plan.buf[i] * norm;
    out.f.resize(total);
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        std::size_t i = static_cast<std::size_t>(iy) * n + ix;
        cplx z{-half_width + ix * step, -half_width + iy * step};
        out.f[i] = z + mean_h * std::conj(z) + ch[i];
      }
    double res = detail::grid_residual(out.f, out.mu, n, step);
    out.residual_history.push_back(res);
    // The residual oscillates at the discretization floor once the Neumann
    // series has converged; only sustained growth well above the best value
    // achieved so far signals divergence.
    if (res > prev_residual && res > 1.5 * best_residual) {
      if (++rises >= 3)
        throw NonConvergence("grid solver: residual increased three times");
    } else {
      rises = 0;
    }
    prev_residual = res;
    best_residual = std::min(best_residual, res);
  }
  out.residual = out.residual_history.back();

  // Far-field linear fit of the raw map on a ring outside the support, then
  // exact affine normalization f(0) = 0, f(1) = 1.
  double ring_lo = std::max(1.05 * support_radius, 0.6 * half_width);
  double ring_hi = 0.8 * half_width;
  cplx sum_f{0, 0}, sum_z{0, 0}, sum_zf{0, 0};
  double sum_zz = 0.0;
  std::size_t count = 0;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      cplx z{-half_width + ix * step, -half_width + iy * step};
      double r = std::abs(z);
      if (r < ring_lo || r > ring_hi) continue;
      cplx v = out.f[static_cast<std::size_t>(iy) * n + ix];
      sum_f += v;
      sum_z += z;
      sum_zf += std::conj(z) * v;
      sum_zz += std::norm(z);
      ++count;
    }
  if (count >= 16) {
    double cn = static_cast<double>(count);
    cplx slope = (sum_zf - std::conj(sum_z) * sum_f / cn) /
                 (sum_zz - std::norm(sum_z) / cn);
    out.farfield_slope = slope;
    out.farfield_offset = sum_f / cn - slope * sum_z / cn;
  }
  cplx f0 = out.value(cplx{0.0, 0.0});
  cplx f1 = out.value(cplx{1.0, 0.0});
  cplx den = f1 - f0;
  if (std::abs(den) < 1e-12)
    throw NonConvergence("grid solver: degenerate normalization f(1) = f(0)");
  for (auto& v : out.f) v = (v - f0) / den;
  out.farfield_offset = (out.farfield_offset - f0) / den;
  out.farfield_slope /= den;
  out.residual = detail::grid_residual(out.f, out.mu, n, step);
  return out;
}

// Compactly supported coefficients used by the solver examples.

// Constant c on |z| <= r_inner, quintic ramp to zero at r_outer.
inline BeltramiCoefficient smoothed_disk_bump(double c, double r_inner = 0.6,
                                              double r_outer = 1.0) {
  if (!(0.0 < r_inner && r_inner < r_outer))
    throw ParameterOutOfRange("smoothed_disk_bump: need 0 < r_inner < r_outer");
  auto fn = [c, r_inner, r_outer](cplx z) -> cplx {
    double r = std::abs(z);
    if (r >= r_outer) return {0.0, 0.0};
    if (r <= r_inner) return {c, 0.0};
    double u = (r - r_inner) / (r_outer - r_inner);
    return cplx{c * (1.0 - smoothstep(u)), 0.0};
  };
  return BeltramiCoefficient{fn, std::abs(c)};
}

// The power-stretch coefficient (t/(t+2)) z/conj(z), ramped to zero inside
// [r0, r1] and outside [r2, r3]; exact on the annulus [r1, r2].
inline BeltramiCoefficient truncated_power_stretch(double t, double r0 = 0.15,
                                                   double r1 = 0.45,
                                                   double r2 = 6.0,
                                                   double r3 = 9.5) {
  if (!(0.0 < r0 && r0 < r1 && r1 < r2 && r2 < r3))
    throw ParameterOutOfRange("truncated_power_stretch: bad ramp radii");
  double a = t / (t + 2.0);
  auto fn = [a, r0, r1, r2, r3](cplx z) -> cplx {
    double r = std::abs(z);
    if (r <= r0 || r >= r3) return {0.0, 0.0};
    double w = 1.0;
    if (r < r1) w = smoothstep((r - r0) / (r1 - r0));
    else if (r > r2) w = 1.0 - smoothstep((r - r2) / (r3 - r2));
    return a * w * z / std::conj(z);
  };
  return BeltramiCoefficient{fn, std::abs(a)};
}

// ---------------------------------------------------------------------------
// Grid import/export: 16-byte header (magic "BELGRID1", u32 n, u32 reserved)
// followed by n*n complex nodes, row-major, little-endian 8-byte floats.
// ---------------------------------------------------------------------------

inline void write_grid(const std::string& path, const std::vector<cplx>& data,
                       std::uint32_t n) {
  static_assert(std::endian::native == std::endian::little,
                "grid files assume a little-endian host");
  if (data.size() != static_cast<std::size_t>(n) * n)
    throw IoError("write_grid: data size does not match n*n");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("write_grid: cannot open " + path);
  const char magic[8] = {'B', 'E', 'L', 'G', 'R', 'I', 'D', '1'};
  std::uint32_t reserved = 0;
  out.write(magic, 8);
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&reserved), 4);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size() * sizeof(cplx)));
  if (!out) throw IoError("write_grid: short write to " + path);
}

inline std::vector<cplx> read_grid(const std::string& path, std::uint32_t& n) {
  static_assert(std::endian::native == std::endian::little,
                "grid files assume a little-endian host");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("read_grid: cannot open " + path);
  char magic[8];
  in.read(magic, 8);
  if (!in || std::memcmp(magic, "BELGRID1", 8) != 0)
    throw IoError("read_grid: bad magic in " + path);
  std::uint32_t reserved = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&reserved), 4);
  if (!in || n == 0 || n > 1u << 15)
    throw IoError("read_grid: bad grid size in " + path);
  std::vector<cplx> data(static_cast<std::size_t>(n) * n);
  in.read(reinterpret_cast<char*>(data.data()),
          static_cast<std::streamsize>(data.size() * sizeof(cplx)));
  if (!in) throw IoError("read_grid: truncated file " + path);
  return data;
}

}  // namespace liouville
