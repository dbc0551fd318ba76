#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "liouville/sphere.hpp"
#include "liouville/verify.hpp"

using namespace liouville;
using Catch::Approx;

TEST_CASE("cross ratio on reference quadruples") {
  CHECK(cross_ratio(quadruple_of_reals(0, 1, 2, 3)).real() ==
        Approx(4.0 / 3.0).epsilon(1e-15));
  Quadruple q{SpherePoint::from_real(1), SpherePoint::from_real(1.5),
              SpherePoint::infinity(), SpherePoint::from_real(0)};
  CHECK(cross_ratio(q).real() == Approx(1.5).epsilon(1e-15));
  CHECK(cross_ratio(q).imag() == 0.0);
  // symmetry cr(a,b,c,d) = cr(c,d,a,b) = cr(b,a,d,c)
  auto p = quadruple_of_reals(-0.7, 0.2, 1.1, 2.9);
  cplx v = cross_ratio(p);
  CHECK(std::abs(cross_ratio({p.c, p.d, p.a, p.b}) - v) < 1e-15 * std::abs(v));
  cplx w = cross_ratio({p.b, p.a, p.d, p.c});
  CHECK(std::abs(w - v) < 1e-15 * std::abs(v));
}

TEST_CASE("cross ratio rejects coincident points") {
  CHECK_THROWS_AS(cross_ratio(quadruple_of_reals(0, 0, 1, 2)),
                  DegenerateQuadruple);
  Quadruple q{SpherePoint::infinity(), SpherePoint::infinity(),
              SpherePoint::from_real(0), SpherePoint::from_real(1)};
  CHECK_THROWS_AS(cross_ratio(q), DegenerateQuadruple);
}

TEST_CASE("bracket form of cr - 1 avoids cancellation") {
  std::mt19937_64 rng(11);
  QuadrupleSource src;
  for (int k = 0; k < 200; ++k) {
    auto s = random_small_cr_quadruple(rng, src);
    cplx direct = cross_ratio_minus_one(s.q);
    CHECK(std::abs(direct) == s.x);
    // the sample sits near the nominal magnitude and stays real-positive
    CHECK(s.x >= 0.5 * src.s_min);
    CHECK(s.x <= 2.0 * src.s_max);
    // the subtractive route agrees only to absolute working precision
    cplx subtractive = cross_ratio(s.q) - cplx{1.0, 0.0};
    CHECK(std::abs(subtractive - direct) <= 1e-12);
  }
  // consistency on well-separated quadruples
  for (int k = 0; k < 200; ++k) {
    Quadruple q = random_separated_quadruple(rng);
    cplx a = cross_ratio(q) - cplx{1.0, 0.0};
    cplx b = cross_ratio_minus_one(q);
    CHECK(std::abs(a - b) <= 1e-12 * (1.0 + std::abs(b)));
  }
}

TEST_CASE("moebius maps preserve the cross ratio") {
  std::mt19937_64 rng(5);
  for (int k = 0; k < 500; ++k) {
    Quadruple q = random_separated_quadruple(rng);
    MobiusTransform g = random_complex_mobius(rng);
    cplx before = cross_ratio(q);
    cplx after = cross_ratio(g(q));
    CHECK(std::abs(after - before) <= 1e-11 * (1.0 + std::abs(before)));
  }
}

TEST_CASE("moebius algebra") {
  std::mt19937_64 rng(17);
  MobiusTransform g = random_complex_mobius(rng);
  MobiusTransform h = random_complex_mobius(rng);
  SpherePoint p = SpherePoint::from_complex({0.3, -0.2});
  // composition acts as application order
  CHECK(chordal_distance((g * h)(p), g(h(p))) < 1e-12);
  // inverse undoes
  CHECK(chordal_distance(g.inverse()(g(p)), p) < 1e-12);
  // determinant normalized to 1
  CHECK(std::abs(g.det() - cplx{1.0, 0.0}) < 1e-12);
}

TEST_CASE("mobius_through hits prescribed triples") {
  std::mt19937_64 rng(23);
  for (int k = 0; k < 100; ++k) {
    Quadruple q = random_separated_quadruple(rng);
    Quadruple r = random_separated_quadruple(rng);
    MobiusTransform g = mobius_through(q.a, q.b, q.c, r.a, r.b, r.c);
    CHECK(chordal_distance(g(q.a), r.a) < 1e-9);
    CHECK(chordal_distance(g(q.b), r.b) < 1e-9);
    CHECK(chordal_distance(g(q.c), r.c) < 1e-9);
  }
  SECTION("degenerate triple rejected") {
    CHECK_THROWS_AS(
        mobius_through(SpherePoint::from_real(0), SpherePoint::from_real(0),
                       SpherePoint::from_real(1), SpherePoint::from_real(0),
                       SpherePoint::from_real(1), SpherePoint::infinity()),
        DegenerateTriple);
  }
}

TEST_CASE("real moebius sampler emits orientation-preserving maps") {
  std::mt19937_64 rng(31);
  for (int k = 0; k < 50; ++k) {
    MobiusTransform g = random_real_mobius(rng);
    CHECK(g.is_real());
    // a point in the upper half-plane stays there
    cplx img = g(cplx{0.3, 1.2});
    CHECK(img.imag() > 0.0);
  }
}

TEST_CASE("normalize_quadruple sends (a,c,d) to (1,inf,0)") {
  std::mt19937_64 rng(41);
  for (int k = 0; k < 50; ++k) {
    Quadruple q = random_separated_quadruple(rng);
    auto nq = normalize_quadruple(q);
    CHECK(chordal_distance(nq.gamma(q.a), SpherePoint::from_real(1)) < 1e-9);
    CHECK(nq.gamma(q.c).is_infinity(1e-9));
    CHECK(chordal_distance(nq.gamma(q.d), SpherePoint::from_real(0)) < 1e-9);
    // the normalized b-coordinate is the cross ratio
    cplx want = cross_ratio(q);
    CHECK(std::abs(nq.cross - want) <= 1e-10 * (1.0 + std::abs(want)));
  }
}

TEST_CASE("angle metric on the boundary circle") {
  SpherePoint zero = SpherePoint::from_real(0);
  SpherePoint one = SpherePoint::from_real(1);
  SpherePoint inf = SpherePoint::infinity();
  // 0 and infinity subtend a straight angle at the basepoint i
  CHECK(angle_distance(zero, inf) == Approx(kPi).epsilon(1e-12));
  CHECK(angle_distance(one, inf) == Approx(kPi / 2).epsilon(1e-12));
  CHECK(angle_distance(one, SpherePoint::from_real(-1)) ==
        Approx(kPi).epsilon(1e-12));
  CHECK(angle_distance(zero, zero) == 0.0);
  // triangle inequality on random triples
  std::mt19937_64 rng(53);
  for (int k = 0; k < 200; ++k) {
    SpherePoint a = random_sphere_point(rng);
    SpherePoint b = random_sphere_point(rng);
    SpherePoint c = random_sphere_point(rng);
    CHECK(angle_distance(a, c) <=
          angle_distance(a, b) + angle_distance(b, c) + 1e-12);
  }
}

TEST_CASE("geodesic metric is a max over endpoint angles") {
  SpherePoint a = SpherePoint::from_real(0);
  SpherePoint b = SpherePoint::from_real(1);
  SpherePoint c = SpherePoint::from_real(-1);
  SpherePoint d = SpherePoint::infinity();
  double dab_cd = geodesic_distance(a, b, c, d);
  CHECK(dab_cd == Approx(std::max(angle_distance(a, c), angle_distance(b, d)))
                      .epsilon(1e-12));
  CHECK(geodesic_distance(a, b, a, b) == 0.0);
}

TEST_CASE("boundary angle parametrization round-trips") {
  for (double phi : {0.1, 0.5, 1.0, 2.0, 3.0, 4.0, 5.5}) {
    SpherePoint p = boundary_point_at_angle(phi);
    double back = angle_coordinate(p);
    double diff = std::remainder(back - phi, 2 * kPi);
    CHECK(std::abs(diff) < 1e-10);
  }
  // phi = 0 is the point at infinity
  CHECK(boundary_point_at_angle(0.0).is_infinity());
}
