#pragma once

#include <cmath>
#include <functional>
#include <memory>
#include <utility>

#include "liouville/errors.hpp"
#include "liouville/sphere.hpp"

namespace liouville {

// Measurable conformal distortion datum mu with ||mu||_inf < 1, defined
// almost everywhere.
struct BeltramiCoefficient {
  std::function<cplx(cplx)> value;
  double sup_norm = 0.0;
};

// Smooth planar map together with its Wirtinger derivatives, for use where a
// composition needs d f / dz.
struct PlanarMapData {
  std::function<cplx(cplx)> value;
  std::function<cplx(cplx)> dz;
  std::function<cplx(cplx)> dzbar;
};

// d/dt of a homogeneous representative of a moving sphere point.
struct HomogeneousVelocity {
  cplx z{0.0, 0.0};
  cplx w{0.0, 0.0};
};

struct MovingPoint {
  SpherePoint point;
  HomogeneousVelocity velocity;
};

// Cyclic subgroup of PSL(2,R) generated by z -> multiplier * z.
struct CyclicFuchsianGroup {
  double multiplier;

  explicit CyclicFuchsianGroup(double m) : multiplier(m) {
    if (!(m > 1.0))
      throw ParameterOutOfRange("cyclic group: multiplier must exceed 1");
  }

  MobiusTransform generator() const {
    double s = std::sqrt(multiplier);
    return MobiusTransform(cplx{s}, cplx{0.0}, cplx{0.0}, cplx{1.0 / s});
  }

  MobiusTransform element(int k) const {
    double s = std::pow(multiplier, 0.5 * k);
    return MobiusTransform(cplx{s}, cplx{0.0}, cplx{0.0}, cplx{1.0 / s});
  }
};

// Holomorphic family t -> f^t of quasiconformal self-maps of the sphere
// fixing 0, 1, infinity, parameterized on |t| < radius. Closed forms:
//   power_stretch:    f^t(z) = z |z|^t,    mu(t) = (t/(t+2)) z / conj(z)
//   vertical_stretch: f^t(x+iy) = x + (1+t) i y on the upper half plane,
//                     identity below; boundary action trivial for every t.
class HolomorphicQCFamily {
 public:
  enum class Kind { power_stretch, vertical_stretch, composed };

  Kind kind() const { return kind_; }
  double radius() const { return radius_; }

  // Action on the plane.
  cplx plane_image(cplx t, cplx z) const {
    check_t(t);
    switch (kind_) {
      case Kind::power_stretch: {
        if (z == cplx{0.0, 0.0}) return z;
        return z * std::exp(t * std::log(std::abs(z)));
      }
      case Kind::vertical_stretch: {
        if (z.imag() <= 0.0) return z;
        return z + cplx{0.0, 1.0} * t * z.imag();
      }
      case Kind::composed:
        return outer_->plane_image(t, inner_->plane_image(t, z));
    }
    return z;
  }

  // Action on sphere points (in particular the boundary circle).
  SpherePoint sphere_image(cplx t, const SpherePoint& p) const {
    check_t(t);
    switch (kind_) {
      case Kind::power_stretch: {
        SpherePoint q = p.normalized();
        if (q.is_infinity()) return SpherePoint::infinity();
        cplx x = q.affine();
        if (x == cplx{0.0, 0.0}) return SpherePoint::from_real(0.0);
        return SpherePoint::from_complex(x * std::exp(t * std::log(std::abs(x))));
      }
      case Kind::vertical_stretch:
        return p;  // boundary restriction is the identity for every t
      case Kind::composed:
        return outer_->sphere_image(t, inner_->sphere_image(t, p));
    }
    return p;
  }

  // Image and d/dt of the image, as a homogeneous pair. Closed form for the
  // base kinds; a fourth-order central difference in t for compositions.
  MovingPoint sphere_image_velocity(cplx t, const SpherePoint& p) const {
    check_t(t);
    switch (kind_) {
      case Kind::power_stretch: {
        SpherePoint q = p.normalized();
        if (q.is_infinity()) return {SpherePoint::infinity(), {}};
        cplx x = q.affine();
        if (x == cplx{0.0, 0.0}) return {SpherePoint::from_real(0.0), {}};
        double lg = std::log(std::abs(x));
        cplx img = x * std::exp(t * lg);
        return {SpherePoint::from_complex(img), {img * lg, cplx{0.0}}};
      }
      case Kind::vertical_stretch:
        return {p, {}};
      case Kind::composed: {
        SpherePoint img = sphere_image(t, p);
        if (img.is_infinity()) return {img, {}};
        double h = 1e-4 * (1.0 + std::abs(t));
        auto at = [&](cplx s) { return sphere_image(s, p).affine(); };
        cplx d = (-at(t + 2.0 * h) + 8.0 * at(t + h) - 8.0 * at(t - h) +
                  at(t - 2.0 * h)) /
                 (12.0 * h);
        return {img, {d, cplx{0.0}}};
      }
    }
    return {p, {}};
  }

  BeltramiCoefficient beltrami(cplx t) const;

  // ||mu(t)||_inf. Closed form |t / (t+2)| for the base kinds.
  double mu_norm(cplx t) const {
    check_t(t);
    switch (kind_) {
      case Kind::power_stretch:
      case Kind::vertical_stretch:
        return std::abs(t / (t + 2.0));
      case Kind::composed: {
        double a = inner_->mu_norm(t), b = outer_->mu_norm(t);
        return (a + b) / (1.0 + a * b);
      }
    }
    return 0.0;
  }

  PlanarMapData planar_map(cplx t) const {
    check_t(t);
    switch (kind_) {
      case Kind::power_stretch:
        return {
            [t](cplx z) {
              return z == cplx{0.0, 0.0}
                         ? z
                         : z * std::exp(t * std::log(std::abs(z)));
            },
            [t](cplx z) {
              return std::exp(t * std::log(std::abs(z))) * (1.0 + 0.5 * t);
            },
            [t](cplx z) {
              return std::exp(t * std::log(std::abs(z))) * (0.5 * t) * z /
                     std::conj(z);
            }};
      case Kind::vertical_stretch:
        return {[t](cplx z) {
                  return z.imag() <= 0.0 ? z : z + cplx{0.0, 1.0} * t * z.imag();
                },
                [t](cplx z) { return z.imag() <= 0.0 ? cplx{1.0} : 1.0 + 0.5 * t; },
                [t](cplx z) { return z.imag() <= 0.0 ? cplx{0.0} : -0.5 * t; }};
      case Kind::composed:
        throw UnsupportedFamily("planar_map: not available for compositions");
    }
    throw UnsupportedFamily("planar_map");
  }

  static HolomorphicQCFamily power_stretch(double radius) {
    return HolomorphicQCFamily(Kind::power_stretch, radius);
  }

  static HolomorphicQCFamily vertical_stretch(double radius) {
    return HolomorphicQCFamily(Kind::vertical_stretch, radius);
  }

  static HolomorphicQCFamily compose(HolomorphicQCFamily outer,
                                     HolomorphicQCFamily inner) {
    HolomorphicQCFamily f(Kind::composed,
                          std::min(outer.radius(), inner.radius()));
    f.outer_ = std::make_shared<HolomorphicQCFamily>(std::move(outer));
    f.inner_ = std::make_shared<HolomorphicQCFamily>(std::move(inner));
    return f;
  }

 private:
  HolomorphicQCFamily(Kind kind, double radius) : kind_(kind), radius_(radius) {
    if (!(radius > 0.0 && radius < 2.0))
      throw ParameterOutOfRange("family radius must lie in (0, 2)");
  }

  void check_t(cplx t) const {
    if (std::abs(t) >= radius_)
      throw ParameterOutOfRange("family parameter outside the disk");
  }

  Kind kind_;
  double radius_;
  std::shared_ptr<const HolomorphicQCFamily> outer_, inner_;
};

inline HolomorphicQCFamily power_stretch_family(double radius = 1.0) {
  return HolomorphicQCFamily::power_stretch(radius);
}

inline HolomorphicQCFamily vertical_stretch_family(double radius = 1.0) {
  return HolomorphicQCFamily::vertical_stretch(radius);
}

// Coefficient of g after f, with f given with its Wirtinger data:
//   mu_{g o f} = (nu(f) tau + mu) / (1 + nu(f) tau conj(mu)),
//   tau = conj(f_z) / f_z.
inline BeltramiCoefficient compose_beltrami(const BeltramiCoefficient& mu,
                                            const BeltramiCoefficient& nu,
                                            const PlanarMapData& f) {
  double bound =
      (mu.sup_norm + nu.sup_norm) / (1.0 + mu.sup_norm * nu.sup_norm);
  if (bound >= 1.0)
    throw NormOverflow("compose_beltrami: combined norm reaches 1");
  auto mu_v = mu.value;
  auto nu_v = nu.value;
  auto fv = f.value;
  auto fdz = f.dz;
  BeltramiCoefficient out;
  out.value = [mu_v, nu_v, fv, fdz](cplx z) {
    cplx fz = fdz(z);
    cplx tau = std::conj(fz) / fz;
    cplx e = nu_v(fv(z)) * tau;
    cplx m = mu_v(z);
    return (e + m) / (1.0 + e * std::conj(m));
  };
  out.sup_norm = bound;
  return out;
}

// mu on the upper half plane extended to the lower by mu(z) = conj(mu(conj z)).
inline BeltramiCoefficient reflect_extension(const BeltramiCoefficient& mu) {
  auto v = mu.value;
  BeltramiCoefficient out;
  out.value = [v](cplx z) {
    if (z.imag() >= 0.0) return v(z);
    return std::conj(v(std::conj(z)));
  };
  out.sup_norm = mu.sup_norm;
  return out;
}

inline BeltramiCoefficient HolomorphicQCFamily::beltrami(cplx t) const {
  check_t(t);
  switch (kind_) {
    case Kind::power_stretch: {
      cplx factor = t / (t + 2.0);
      BeltramiCoefficient out;
      out.value = [factor](cplx z) {
        if (z == cplx{0.0, 0.0}) return cplx{0.0, 0.0};
        return factor * z / std::conj(z);
      };
      out.sup_norm = std::abs(factor);
      return out;
    }
    case Kind::vertical_stretch: {
      cplx factor = -t / (t + 2.0);
      BeltramiCoefficient out;
      out.value = [factor](cplx z) {
        return z.imag() > 0.0 ? factor : cplx{0.0, 0.0};
      };
      out.sup_norm = std::abs(factor);
      return out;
    }
    case Kind::composed:
      return compose_beltrami(inner_->beltrami(t), outer_->beltrami(t),
                              inner_->planar_map(t));
  }
  throw UnsupportedFamily("beltrami");
}

// Largest dilatation (1 + ||mu||) / (1 - ||mu||) over the closed disk
// |t| <= r. The norm is sampled on the boundary circle (maximum principle)
// together with the real extremes, where the base-kind suprema are attained.
inline double max_dilatation(const HolomorphicQCFamily& fam, double r,
                             int angle_samples = 720) {
  if (!(r > 0.0 && r < fam.radius()))
    throw ParameterOutOfRange("max_dilatation: need 0 < r < family radius");
  double sup = std::max(fam.mu_norm(cplx{r}), fam.mu_norm(cplx{-r}));
  for (int k = 0; k < angle_samples; ++k) {
    double a = 2.0 * kPi * k / angle_samples;
    sup = std::max(sup, fam.mu_norm(std::polar(r, a)));
  }
  if (sup >= 1.0)
    throw NormOverflow("max_dilatation: family degenerates inside the disk");
  return (1.0 + sup) / (1.0 - sup);
}

struct ConjugatedGroup {
  cplx multiplier;            // lambda^{1+t} for the power stretch
  MobiusTransform generator;  // z -> multiplier * z
};

// The deformation intertwines z -> lambda z with z -> multiplier * z:
// f^t(lambda z) = multiplier f^t(z). Closed form for power stretches
// (multiplier m -> m |m|^t) and vertical stretches (unchanged).
inline ConjugatedGroup conjugated_group(const HolomorphicQCFamily& fam, cplx t,
                                        const CyclicFuchsianGroup& group);

namespace detail {
inline cplx conjugated_multiplier(const HolomorphicQCFamily& fam, cplx t,
                                  cplx m) {
  switch (fam.kind()) {
    case HolomorphicQCFamily::Kind::power_stretch:
      return m * std::exp(t * std::log(std::abs(m)));
    case HolomorphicQCFamily::Kind::vertical_stretch:
      if (std::abs(m.imag()) > 1e-15 * std::abs(m) || m.real() <= 0.0)
        throw UnsupportedFamily(
            "conjugated_group: vertical stretch needs a positive multiplier");
      return m;
    case HolomorphicQCFamily::Kind::composed:
      throw UnsupportedFamily("conjugated_group: composition not supported");
  }
  throw UnsupportedFamily("conjugated_group");
}
}  // namespace detail

inline ConjugatedGroup conjugated_group(const HolomorphicQCFamily& fam, cplx t,
                                        const CyclicFuchsianGroup& group) {
  cplx m = detail::conjugated_multiplier(fam, t, cplx{group.multiplier});
  cplx s = std::sqrt(m);
  return {m, MobiusTransform(s, cplx{0.0}, cplx{0.0}, 1.0 / s)};
}

}  // namespace liouville
