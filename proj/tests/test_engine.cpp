#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "liouville/engine.hpp"
#include "liouville/verify.hpp"

using namespace liouville;
using Catch::Approx;

namespace {
GeodesicBox unit_box() { return make_box(0.0, 1.0, 2.0, 3.0); }
}  // namespace

TEST_CASE("indicator pairing telescopes to the box mass") {
  HolderFunction xi = HolderFunction::indicator(unit_box());
  EvaluationTrace tr = eval_current(xi, {}, identity_sphere_map());
  CHECK(tr.reason == Termination::exact);
  CHECK(std::abs(tr.value - cplx{std::log(4.0 / 3.0)}) < 1e-12);
  CHECK(tr.converged());
  CHECK(tr.cells > 0);
}

TEST_CASE("indicator pairing along the power family") {
  // t = 1 maps (0,1,2,3) to (0,1,4,9); every level telescopes to the image
  // mass log(32/27)
  HolderFunction xi = HolderFunction::indicator(unit_box());
  HolomorphicQCFamily fam = power_stretch_family(1.2);
  EvaluationTrace tr = eval_extension(xi, {}, fam, cplx{1.0, 0.0});
  CHECK(std::abs(tr.value - cplx{std::log(32.0 / 27.0)}) < 1e-12);
  CHECK(tr.reason == Termination::exact);
}

TEST_CASE("bump pairing matches the quadrature oracle") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  EvalParams params;
  params.tolerance = 1e-7;
  EvaluationTrace tr = eval_current(xi, {}, identity_sphere_map(), params);
  double oracle = quadrature_oracle(xi);
  REQUIRE(tr.converged());
  CHECK(std::abs(tr.value.real() - oracle) < 1e-5 * std::abs(oracle));
  CHECK(std::abs(tr.value.imag()) < 1e-12);
  // geometric tail with ratio near 1/2
  CHECK(tr.fitted_ratio > 0.3);
  CHECK(tr.fitted_ratio < 0.7);
}

TEST_CASE("quadrature oracle on the indicator recovers the mass") {
  HolderFunction xi = HolderFunction::indicator(unit_box());
  CHECK(quadrature_oracle(xi) == Approx(std::log(4.0 / 3.0)).margin(1e-7));
}

TEST_CASE("pairing is homogeneous in the test function") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  EvalParams params;
  params.tolerance = 1e-9;
  cplx one = eval_current(xi, {}, identity_sphere_map(), params).value;
  cplx scaled =
      eval_current(xi.scaled(-2.5), {}, identity_sphere_map(), params).value;
  // both runs stop near their own drift tolerance, so compare absolutely
  CHECK(std::abs(scaled + 2.5 * one) < 1e-7);
}

TEST_CASE("complex parameters extend the pairing holomorphically") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  HolomorphicQCFamily fam = power_stretch_family();
  EvalParams params;
  params.tolerance = 1e-7;
  cplx t{0.05, 0.1};
  EvaluationTrace plus = eval_extension(xi, {}, fam, t, params);
  EvaluationTrace minus = eval_extension(xi, {}, fam, std::conj(t), params);
  REQUIRE(plus.converged());
  CHECK(std::abs(plus.value.imag()) > 1e-6);  // genuinely complex
  // real family evaluated at conjugate parameters gives conjugate values
  CHECK(std::abs(minus.value - std::conj(plus.value)) <
        1e-12 * (1.0 + std::abs(plus.value)));
  // t = 0 reduces to the undeformed pairing
  EvaluationTrace base = eval_extension(xi, {}, fam, cplx{0.0, 0.0}, params);
  EvaluationTrace ident = eval_current(xi, {}, identity_sphere_map(), params);
  CHECK(std::abs(base.value - ident.value) <
        1e-14 * (1.0 + std::abs(ident.value)));
}

TEST_CASE("derivative pairing of the vertical family vanishes") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  HolomorphicQCFamily fam = vertical_stretch_family();
  EvaluationTrace tr = eval_derivative(xi, {}, fam, cplx{0.2, 0.0});
  CHECK(std::abs(tr.value) == 0.0);
  CHECK(tr.reason == Termination::exact);
}

TEST_CASE("derivative pairing of the power family at the origin") {
  // d/dt log cr(t^t applied to (0,1,2,3)) at t = 0 is log(3)/2 - log(2)
  HolderFunction xi = HolderFunction::indicator(unit_box());
  HolomorphicQCFamily fam = power_stretch_family();
  EvaluationTrace tr = eval_derivative(xi, {}, fam, cplx{0.0, 0.0});
  double want = 0.5 * std::log(3.0) - std::log(2.0);
  CHECK(std::abs(tr.value - cplx{want}) < 1e-10);
}

TEST_CASE("derivative pairing agrees with a difference quotient") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  HolomorphicQCFamily fam = power_stretch_family();
  EvalParams params;
  params.tolerance = 1e-9;
  cplx t0{0.1, 0.0};
  cplx deriv = eval_derivative(xi, {}, fam, t0, params).value;
  double h = 3e-3;
  cplx up = eval_extension(xi, {}, fam, t0 + h, params).value;
  cplx dn = eval_extension(xi, {}, fam, t0 - h, params).value;
  cplx fd = (up - dn) / (2.0 * h);
  CHECK(std::abs(deriv - fd) < 1e-4 * std::abs(deriv));
}

TEST_CASE("pairing is invariant under precomposition by the group") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  EvalParams params;
  params.tolerance = 1e-8;
  cplx base = eval_current(xi, {}, identity_sphere_map(), params).value;
  std::mt19937_64 rng(11);
  for (int k = 0; k < 5; ++k) {
    MobiusTransform g = random_real_mobius(rng);
    cplx moved = eval_current(xi, g, identity_sphere_map(), params).value;
    CHECK(std::abs(moved - base) < 1e-10 * (1.0 + std::abs(base)));
  }
  // the same invariance through the precomposed test function
  MobiusTransform g = random_real_mobius(rng);
  cplx pulled =
      eval_current(xi.precompose(g), {}, identity_sphere_map(), params).value;
  CHECK(std::abs(pulled - base) < 1e-10 * (1.0 + std::abs(base)));
}

TEST_CASE("branch guard rejects folded boundary maps") {
  // z -> z^2 fixes 0, 1, inf but folds the box (-1,-1/2,1/2,1) onto itself,
  // sending deep cells outside the branch neighborhood of the logarithm
  SphereMap fold = [](const SpherePoint& p) -> MovingPoint {
    if (p.is_infinity()) return {p, {}};
    cplx z = p.affine();
    return {SpherePoint::from_complex(z * z), {}};
  };
  HolderFunction xi =
      HolderFunction::bump(make_box(-1.0, -0.5, 0.5, 1.0), 1.0);
  REQUIRE_THROWS_AS(eval_current(xi, {}, fold), OutsideNeighborhood);
  // with the guard off the sums stay finite-or-nan but do not throw
  EvalParams params;
  params.branch_guard = false;
  params.max_level = 4;
  CHECK_NOTHROW(eval_current(xi, {}, fold, params));
}

TEST_CASE("maps must fix the standard triple") {
  SphereMap doubling = [](const SpherePoint& p) -> MovingPoint {
    if (p.is_infinity()) return {p, {}};
    return {SpherePoint::from_complex(2.0 * p.affine()), {}};
  };
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  CHECK_THROWS_AS(eval_current(xi, {}, doubling), ParameterOutOfRange);
}

TEST_CASE("gamma sampler enumerates oriented boundary triples") {
  GammaSampler s4 = GammaSampler::uniform(4);
  CHECK(s4.transforms.size() == 12);
  CHECK(s4.transforms[0].p == 0.0);
  CHECK(s4.transforms[0].q == 1.0);
  CHECK(std::isinf(s4.transforms[0].r));
  GammaSampler s8 = GammaSampler::uniform(8);
  // refinement keeps every coarse transform
  for (const auto& t : s4.transforms) {
    bool found = false;
    for (const auto& u : s8.transforms)
      if (t.p == u.p && t.q == u.q && t.r == u.r) found = true;
    CHECK(found);
  }
  CHECK_THROWS_AS(GammaSampler::uniform(2), ParameterOutOfRange);
}

TEST_CASE("seminorm grows with the sampling resolution") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  HolomorphicQCFamily fam = power_stretch_family();
  SphereMap map = family_sphere_map(fam, cplx{0.3, 0.0});
  EvalParams params;
  params.tolerance = 1e-5;
  SeminormResult s4 =
      seminorm(xi, map, GammaSampler::uniform(4), params);
  SeminormResult s6 =
      seminorm(xi, map, GammaSampler::uniform(6), params);
  CHECK(s4.value > 0.0);
  CHECK(s6.value >= s4.value - 1e-12);
  for (const auto& row : s4.rows) CHECK(row.ok);
}

TEST_CASE("quadrature respects its evaluation budget") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 0.5);
  QuadratureParams params;
  params.abs_tol = 1e-13;
  params.max_evals = 200;
  CHECK_THROWS_AS(quadrature_oracle(xi, params), QuadratureBudgetExceeded);
}

TEST_CASE("evaluation is deterministic across thread counts") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 0.7);
  HolomorphicQCFamily fam = power_stretch_family();
  EvalParams params;
  params.tolerance = 1e-8;
  set_thread_count(4);
  EvaluationTrace a = eval_extension(xi, {}, fam, cplx{0.2, 0.1}, params);
  set_thread_count(1);
  EvaluationTrace b = eval_extension(xi, {}, fam, cplx{0.2, 0.1}, params);
  set_thread_count(0);
  REQUIRE(a.levels.size() == b.levels.size());
  CHECK(a.value == b.value);
  for (std::size_t i = 0; i < a.levels.size(); ++i)
    CHECK(a.levels[i].partial == b.levels[i].partial);
}

TEST_CASE("distribution handle packages family and parameters") {
  DistributionHandle h;
  h.family = power_stretch_family();
  h.t = cplx{0.2, 0.0};
  h.params.tolerance = 1e-7;
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  EvaluationTrace via = h.evaluate(xi);
  EvaluationTrace direct =
      eval_extension(xi, {}, *h.family, h.t, h.params);
  CHECK(via.value == direct.value);
  DistributionHandle undeformed;
  EvaluationTrace id = undeformed.evaluate(xi);
  CHECK(std::abs(id.value -
                 eval_current(xi, {}, identity_sphere_map()).value) == 0.0);
}

TEST_CASE("level guards") {
  HolderFunction xi = HolderFunction::bump(unit_box(), 1.0);
  EvalParams params;
  params.max_level = 40;
  CHECK_THROWS_AS(eval_current(xi, {}, identity_sphere_map(), params),
                  ParameterOutOfRange);
  params.max_level = 0;
  CHECK_THROWS_AS(eval_current(xi, {}, identity_sphere_map(), params),
                  ParameterOutOfRange);
}
