#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "liouville/families.hpp"

using namespace liouville;
using Catch::Approx;

namespace {

// Wirtinger derivatives by 4th-order central differences of a planar map.
struct WirtingerFD {
  cplx dz, dzbar;
};

template <typename F>
WirtingerFD wirtinger_fd(F&& f, cplx z, double h = 1e-5) {
  auto d4 = [&](cplx dir) {
    return (-f(z + 2.0 * h * dir) + 8.0 * f(z + h * dir) - 8.0 * f(z - h * dir) +
            f(z - 2.0 * h * dir)) /
           (12.0 * h);
  };
  cplx fx = d4(cplx{1.0, 0.0});
  cplx fy = d4(cplx{0.0, 1.0});
  return {0.5 * (fx - cplx{0.0, 1.0} * fy), 0.5 * (fx + cplx{0.0, 1.0} * fy)};
}

}  // namespace

TEST_CASE("power stretch closed forms") {
  HolomorphicQCFamily fam = power_stretch_family();
  // f^1(z) = z |z|
  CHECK(fam.plane_image(cplx{0.99, 0.0}, cplx{2.0, 0.0}).real() ==
        Approx(2.0 * std::pow(2.0, 0.99)).epsilon(1e-13));
  CHECK(fam.plane_image(cplx{0.5, 0.0}, cplx{0.0, 0.0}) == cplx{0.0, 0.0});
  // boundary fixed points
  for (cplx t : {cplx{0.3, 0.0}, cplx{0.1, 0.2}}) {
    CHECK(chordal_distance(fam.sphere_image(t, SpherePoint::from_real(0.0)),
                           SpherePoint::from_real(0.0)) < 1e-14);
    CHECK(chordal_distance(fam.sphere_image(t, SpherePoint::from_real(1.0)),
                           SpherePoint::from_real(1.0)) < 1e-14);
    CHECK(fam.sphere_image(t, SpherePoint::infinity()).is_infinity());
  }
  // coefficient norm |t/(t+2)|: 1/3 at t=1 (via a radius-1.2 family)
  HolomorphicQCFamily wide = power_stretch_family(1.2);
  CHECK(wide.mu_norm(cplx{1.0, 0.0}) == Approx(1.0 / 3.0).epsilon(1e-14));
  double k1 = (1.0 + 1.0 / 3.0) / (1.0 - 1.0 / 3.0);
  CHECK(k1 == Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS(fam.plane_image(cplx{1.1, 0.0}, cplx{1.0, 0.0}),
                  ParameterOutOfRange);
}

TEST_CASE("beltrami coefficient matches wirtinger quotient") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> ur(-2.0, 2.0);
  for (auto kind : {0, 1}) {
    HolomorphicQCFamily fam =
        kind == 0 ? power_stretch_family() : vertical_stretch_family();
    for (cplx t : {cplx{0.4, 0.0}, cplx{0.1, 0.15}}) {
      PlanarMapData pm = fam.planar_map(t);
      BeltramiCoefficient mu = fam.beltrami(t);
      for (int k = 0; k < 40; ++k) {
        cplx z{ur(rng), ur(rng)};
        if (std::abs(z) < 0.3 || std::abs(z.imag()) < 0.1) continue;
        WirtingerFD fd = wirtinger_fd(pm.value, z);
        // closed-form derivatives agree with finite differences
        CHECK(std::abs(pm.dz(z) - fd.dz) < 1e-8 * (1.0 + std::abs(fd.dz)));
        CHECK(std::abs(pm.dzbar(z) - fd.dzbar) <
              1e-8 * (1.0 + std::abs(fd.dzbar)));
        // and the quotient is the coefficient
        cplx q = pm.dzbar(z) / pm.dz(z);
        CHECK(std::abs(q - mu.value(z)) < 1e-7);
        CHECK(std::abs(mu.value(z)) <= mu.sup_norm + 1e-12);
      }
    }
  }
}

TEST_CASE("vertical stretch fixes the boundary pointwise") {
  HolomorphicQCFamily fam = vertical_stretch_family();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ur(-5.0, 5.0);
  for (cplx t : {cplx{0.7, 0.0}, cplx{0.2, 0.3}, cplx{0.0, 0.9}}) {
    for (int k = 0; k < 50; ++k) {
      SpherePoint p = SpherePoint::from_real(ur(rng));
      SpherePoint q = fam.sphere_image(t, p);
      CHECK(projectively_equal(p, q));
    }
    CHECK(fam.sphere_image(t, SpherePoint::infinity()).is_infinity());
    // interior points do move
    CHECK(std::abs(fam.plane_image(t, cplx{0.0, 1.0}) - cplx{0.0, 1.0}) >
          0.01 * std::abs(t));
  }
}

TEST_CASE("composition multiplies stretch exponents") {
  HolomorphicQCFamily two = HolomorphicQCFamily::compose(
      power_stretch_family(0.9), power_stretch_family(0.9));
  cplx t{0.35, 0.0};
  // power o power: z |z|^t |z|^{t(1+t)} = z |z|^{2t + t^2}
  double expo = 2.0 * t.real() + t.real() * t.real();
  for (double x : {0.5, 2.0, 3.7}) {
    cplx img = two.sphere_image(t, SpherePoint::from_real(x)).affine();
    CHECK(img.real() == Approx(x * std::pow(x, expo)).epsilon(1e-12));
    CHECK(img.imag() == Approx(0.0).margin(1e-12));
  }
  // composed coefficient norm obeys the Mobius-addition bound
  double a = power_stretch_family(0.9).mu_norm(t);
  CHECK(two.mu_norm(t) == Approx((a + a) / (1.0 + a * a)).epsilon(1e-12));
  // velocity falls back to finite differences and matches the closed form
  // of the equivalent exponent map
  SpherePoint p = SpherePoint::from_real(2.0);
  MovingPoint mp = two.sphere_image_velocity(t, p);
  // d/dt [2 * 2^{2t+t^2}] = 2^{1+2t+t^2} log 2 * (2 + 2t)
  double base = 2.0 * std::pow(2.0, expo);
  double want = base * std::log(2.0) * (2.0 + 2.0 * t.real());
  cplx vel = (mp.velocity.z * mp.point.w - mp.point.z * mp.velocity.w) /
             (mp.point.w * mp.point.w);
  CHECK(vel.real() == Approx(want).epsilon(1e-6));
}

TEST_CASE("velocity of the power stretch matches finite differences") {
  HolomorphicQCFamily fam = power_stretch_family();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> ur(-4.0, 4.0);
  for (cplx t : {cplx{0.0, 0.0}, cplx{0.3, 0.1}}) {
    for (int k = 0; k < 30; ++k) {
      double x = ur(rng);
      if (std::abs(x) < 0.2) continue;
      SpherePoint p = SpherePoint::from_real(x);
      MovingPoint mp = fam.sphere_image_velocity(t, p);
      double h = 1e-5;
      auto at = [&](cplx s) { return fam.sphere_image(s, p).affine(); };
      cplx fd = (at(t + h) - at(t - h)) / (2.0 * h);
      cplx vel = (mp.velocity.z * mp.point.w - mp.point.z * mp.velocity.w) /
                 (mp.point.w * mp.point.w);
      CHECK(std::abs(vel - fd) < 1e-7 * (1.0 + std::abs(fd)));
    }
    // fixed points carry zero velocity
    for (auto p : {SpherePoint::from_real(0.0), SpherePoint::from_real(1.0)}) {
      MovingPoint mp = fam.sphere_image_velocity(t, p);
      cplx vel = mp.velocity.z * mp.point.w - mp.point.z * mp.velocity.w;
      CHECK(std::abs(vel) < 1e-12);
    }
  }
}

TEST_CASE("disk dilatation of the power family") {
  HolomorphicQCFamily fam = power_stretch_family();
  // sup over |t| <= r of |t/(t+2)| is r/(2-r), attained at t = -r, so
  // K(r) = 1/(1-r)
  CHECK(max_dilatation(fam, 0.5) == Approx(2.0).epsilon(1e-9));
  HolomorphicQCFamily wide = power_stretch_family(1.2);
  CHECK(max_dilatation(wide, 2.0 / 3.0) == Approx(3.0).epsilon(1e-9));
  CHECK(max_dilatation(wide, 0.5) == Approx(2.0).epsilon(1e-9));
  // monotone in r
  CHECK(max_dilatation(fam, 0.3) < max_dilatation(fam, 0.6));
  // at r = 1 the coefficient norm reaches 1 and the dilatation diverges
  CHECK_THROWS_AS(max_dilatation(wide, 1.0), NormOverflow);
  CHECK_THROWS_AS(max_dilatation(fam, 1.5), ParameterOutOfRange);
}

TEST_CASE("beltrami reflection and composition guards") {
  HolomorphicQCFamily fam = power_stretch_family();
  BeltramiCoefficient mu = fam.beltrami(cplx{0.6, 0.0});
  BeltramiCoefficient ref = reflect_extension(mu);
  CHECK(ref.sup_norm == mu.sup_norm);
  CHECK(std::abs(ref.value(cplx{1.0, 2.0}) - mu.value(cplx{1.0, 2.0})) == 0.0);
  CHECK(std::abs(ref.value(cplx{1.0, -2.0}) -
                 std::conj(mu.value(cplx{1.0, 2.0}))) == 0.0);
  // norm bound of a composition
  BeltramiCoefficient nu = fam.beltrami(cplx{0.5, 0.0});
  PlanarMapData pm = fam.planar_map(cplx{0.6, 0.0});
  BeltramiCoefficient comp = compose_beltrami(mu, nu, pm);
  double a = mu.sup_norm, b = nu.sup_norm;
  CHECK(comp.sup_norm == Approx((a + b) / (1.0 + a * b)).epsilon(1e-12));
  // degenerate combination rejected
  BeltramiCoefficient big1{[](cplx) { return cplx{0.999, 0.0}; }, 0.999};
  BeltramiCoefficient big2{[](cplx) { return cplx{1.0, 0.0}; }, 1.0};
  CHECK_THROWS_AS(compose_beltrami(big1, big2, pm), NormOverflow);
}

TEST_CASE("group conjugation under the deformation") {
  CyclicFuchsianGroup g(2.0);
  CHECK(std::abs(g.generator()(cplx{1.0, 1.0}) - cplx{2.0, 2.0}) < 1e-14);
  CHECK(std::abs(g.element(-1)(cplx{2.0, 0.0}) - cplx{1.0, 0.0}) < 1e-14);
  CHECK_THROWS_AS(CyclicFuchsianGroup(0.5), ParameterOutOfRange);

  HolomorphicQCFamily fam = power_stretch_family();
  for (cplx t : {cplx{0.4, 0.0}, cplx{0.0, 0.25}}) {
    ConjugatedGroup cg = conjugated_group(fam, t, g);
    // multiplier is lambda |lambda|^t
    cplx want = 2.0 * std::exp(t * std::log(2.0));
    CHECK(std::abs(cg.multiplier - want) < 1e-13);
    // intertwining f^t(lambda x) = m f^t(x) on sample boundary points
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ur(0.1, 3.0);
    for (int k = 0; k < 20; ++k) {
      double x = ur(rng) * (k % 2 == 0 ? 1.0 : -1.0);
      SpherePoint lhs =
          fam.sphere_image(t, g.generator()(SpherePoint::from_real(x)));
      SpherePoint rhs = cg.generator(fam.sphere_image(t, SpherePoint::from_real(x)));
      CHECK(chordal_distance(lhs, rhs) < 1e-12);
    }
  }
  // vertical stretch commutes with the group unchanged
  HolomorphicQCFamily vert = vertical_stretch_family();
  ConjugatedGroup cv = conjugated_group(vert, cplx{0.3, 0.0}, g);
  CHECK(std::abs(cv.multiplier - cplx{2.0, 0.0}) < 1e-14);
}
