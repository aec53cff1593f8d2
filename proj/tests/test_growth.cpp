#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "growth.hpp"
#include "solver.hpp"

using namespace ucprop;

namespace {

Grid square2(int n, double half, double lo_shift = 0.0) {
  return Grid(2, {n, n, 1}, 2.0 * half / (n - 1),
              {-half + lo_shift, -half + lo_shift, 0});
}

SolutionField analytic(const Grid& g, double (*f)(const Point&)) {
  SolutionField u;
  u.grid = g;
  u.u.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) u.u[i] = f(g.position(i));
  return u;
}

}  // namespace

TEST_CASE("sphere max profile closed forms") {
  Grid g = square2(513, 1.0);  // h = 1/256
  double h = g.h();

  SUBCASE("constant field") {
    auto u = analytic(g, [](const Point&) { return -3.0; });
    auto prof = sphere_max_profile(u, {0, 0, 0}, 0.5);
    REQUIRE(prof.radius.size() == 6);  // 0.5 halved down to 4h = 2^-6
    CHECK(prof.radius.front() == doctest::Approx(0.5));
    CHECK(prof.shell_width == doctest::Approx(2 * h));
    for (double m : prof.m) CHECK(m == doctest::Approx(3.0));
  }
  SUBCASE("linear field grows like r") {
    auto u = analytic(g, [](const Point& p) { return p[0]; });
    auto prof = sphere_max_profile(u, {0, 0, 0}, 0.5);
    for (std::size_t i = 0; i < prof.radius.size(); ++i)
      CHECK(std::abs(prof.m[i] - prof.radius[i]) <= 1.5 * h);
  }
  SUBCASE("degree-2 homogeneity") {
    auto u = analytic(g, [](const Point& p) {
      return p[0] * p[0] - p[1] * p[1];
    });
    auto prof = sphere_max_profile(u, {0, 0, 0}, 0.8);
    // m(r)/r^2 constant on the well-resolved radii
    double q0 = prof.m[0] / (prof.radius[0] * prof.radius[0]);
    for (std::size_t i = 1; i < 3; ++i) {
      double q = prof.m[i] / (prof.radius[i] * prof.radius[i]);
      CHECK(q == doctest::Approx(q0).epsilon(0.05));
    }
  }
  SUBCASE("guards") {
    auto u = analytic(g, [](const Point&) { return 1.0; });
    CHECK_THROWS_AS(sphere_max_profile(u, {0, 0, 0}, 3.0 * h),
                    resolution_error);
    CHECK_THROWS_AS(sphere_max_profile(u, {0.9, 0, 0}, 0.2),
                    precondition_error);
  }
}

TEST_CASE("growth claim hypotheses and bound") {
  Grid g = square2(257, 1.0);  // h = 1/128
  const Point xs{0, 0, 0}, ys{0.015625, 0, 0};  // y* on the lattice (2h)
  const double rs = 0.1, eps = 0.01, A = 1.0;
  // tent of height 0.2 and radius 0.03 at y*; zero elsewhere
  auto u = analytic(g, [](const Point& p) {
    double d = std::sqrt(dist2(p, {0.015625, 0, 0}, 2));
    return 0.2 * std::max(0.0, 1.0 - d / 0.03);
  });
  RegionMask f(g);
  for (std::size_t i : ball_mask(g, xs, rs).nodes())
    if (std::sqrt(dist2(g.position(i), ys, 2)) >= 0.031) f.set(i, true);

  SUBCASE("passing instance, gamma sweep") {
    double prev = 0;
    for (double gamma : {0.3, 0.5, 0.7}) {
      auto rec = growth_claim_check(u, f, xs, rs, ys, gamma, 0.1, eps, A);
      CHECK(rec.sup == doctest::Approx(0.2).epsilon(1e-12));
      double d_ref = std::sqrt((0.01 - eps * eps * gamma) / (1 - gamma));
      CHECK(rec.d_bound == doctest::Approx(d_ref).epsilon(1e-12));
      CHECK(rec.beta ==
            doctest::Approx(1 / std::sqrt(2 * (1 - gamma)) - 1).epsilon(1e-12));
      CHECK(rec.d_bound > prev);  // lower bound tightens with density
      prev = rec.d_bound;
      CHECK(rec.pass);
    }
    // at gamma = 0.8 the implied bound exceeds the tent height: reported,
    // not thrown
    auto rec = growth_claim_check(u, f, xs, rs, ys, 0.8, 0.1, eps, A);
    CHECK(rec.d_bound > 0.2);
    CHECK(!rec.pass);
  }
  SUBCASE("each hypothesis throws by name") {
    CHECK_THROWS_WITH_AS(growth_claim_check(u, f, xs, rs, ys, 0.5, 0.015, eps, A),
                         "growth_claim: c > 2 A epsilon violated",
                         precondition_error);
    CHECK_THROWS_WITH_AS(
        growth_claim_check(u, f, {0.7, 0, 0}, rs, ys, 0.5, 0.1, eps, A),
        "growth_claim: |x*| < 1 - 4 r* violated", precondition_error);
    CHECK_THROWS_WITH_AS(
        growth_claim_check(u, f, xs, rs, {0.06, 0, 0}, 0.5, 0.1, eps, A),
        "growth_claim: y* in B_{r*/2}(x*) violated", precondition_error);
    RegionMask bad = ball_mask(g, xs, rs);  // includes the tent support
    CHECK_THROWS_WITH_AS(
        growth_claim_check(u, bad, xs, rs, ys, 0.5, 0.1, eps, A),
        "growth_claim: |u| <= epsilon on F violated", precondition_error);
    RegionMask thin(g);
    for (std::size_t i : f.nodes())
      if (std::sqrt(dist2(g.position(i), xs, 2)) >= 0.09) thin.set(i, true);
    CHECK_THROWS_WITH_AS(
        growth_claim_check(u, thin, xs, rs, ys, 0.5, 0.1, eps, A),
        "growth_claim: density of F in B_{r*}(x*) below gamma",
        precondition_error);
    auto zero = analytic(g, [](const Point&) { return 0.0; });
    CHECK_THROWS_WITH_AS(
        growth_claim_check(zero, f, xs, rs, ys, 0.5, 0.1, eps, A),
        "growth_claim: |u(y*)| > c violated", precondition_error);
    CHECK_THROWS_AS(growth_claim_check(u, f, xs, rs, ys, 1.0, 0.1, eps, A),
                    precondition_error);
  }
}

TEST_CASE("first-crossing radius floor") {
  // |log eps| = 16, exponent (n+1)/(n+2) = 3/4 at n = 2: 16^{3/4} = 8
  double eps = std::exp(-16.0);
  CHECK(r0_lower_bound(eps, 1.0, 2) ==
        doctest::Approx(std::exp(-8.0)).epsilon(1e-12));
  CHECK(r0_lower_bound(0.5, 2.0, 2) ==
        doctest::Approx(std::exp(-2.0 * std::pow(std::log(2.0), 0.75)))
            .epsilon(1e-12));
  CHECK_THROWS_AS(r0_lower_bound(0.6, 1.0, 2), precondition_error);
  CHECK_THROWS_AS(r0_lower_bound(0.0, 1.0, 2), precondition_error);
  CHECK_THROWS_AS(r0_lower_bound(0.1, 0.0, 2), precondition_error);
}

TEST_CASE("first crossing table scan") {
  GrowthTrace tr;
  tr.radius = {0.1, 0.2, 0.3};
  tr.m = {1.0, 2.0, 3.0};
  CHECK(first_crossing(tr, 0.5) == doctest::Approx(0.1));
  CHECK(first_crossing(tr, 2.5) == doctest::Approx(0.3));
  CHECK(std::isinf(first_crossing(tr, 4.0)));
}

TEST_CASE("growth trace on a linear field") {
  Grid g = square2(513, 1.0);  // h = 1/256
  double h = g.h();
  auto u = analytic(g, [](const Point& p) { return p[0]; });
  const double A = 1.0, beta = 0.05, eps = 0.1;  // 2 A eps = 0.2

  // F1 = the single node at the origin: h(r) = r, so the 3 h(r) step bound
  // is slack and the h(r) < r/6 tail must fail
  RegionMask point(g);
  point.set(g.index(256, 256), true);
  auto tr = build_growth_trace(u, point, {0, 0, 0}, 0.9, A, beta, eps);
  CHECK(tr.r0_crossed);
  CHECK(std::abs(tr.r0 - 0.2) <= 2 * h);
  CHECK(tr.M1 == doctest::Approx(0.9).epsilon(0.01));
  CHECK(tr.K >= 29);
  CHECK(tr.K <= 33);
  CHECK(static_cast<int>(tr.r_seq.size()) == tr.K);
  for (std::size_t j = 0; j + 1 < tr.r_seq.size(); ++j)
    CHECK(tr.r_seq[j] <= tr.r_seq[j + 1]);
  CHECK(tr.r_seq.front() == doctest::Approx(tr.r0));

  auto inv = trace_invariants(tr);
  CHECK(inv.checks == static_cast<std::size_t>(tr.K - 1));
  CHECK(inv.violations == 0);
  // no level passes the 2^l h_l < 1/12 test, so l1 lands on the deepest
  // sampled level and the tail audit is vacuous
  CHECK(inv.l1 >= 5);
  CHECK(inv.h_tail_ok);

  SUBCASE("dense F1 flips both invariants") {
    RegionMask disk = ball_mask(g, {0, 0, 0}, 0.95);
    auto tr2 = build_growth_trace(u, disk, {0, 0, 0}, 0.9, A, beta, eps);
    auto inv2 = trace_invariants(tr2);
    CHECK(inv2.h_tail_ok);  // h(r) = 0 inside a filled disk
    CHECK(inv2.violations > 0);  // the sequence advances but h(r) = 0
    CHECK(inv2.l1 == 0);

    auto rep = counting_check(tr2, 2);
    CHECK(rep.K == tr2.K);
    CHECK(rep.block_failures == 0);
    CHECK(rep.interval_failures == 0);
    CHECK(rep.a_fit ==
          doctest::Approx(tr2.K * std::log1p(beta) / std::log(1 / eps)));
    CHECK(rep.k_bound_ok);
  }
  SUBCASE("never-crossing field") {
    auto tiny = analytic(g, [](const Point&) { return 1e-6; });
    auto tr3 = build_growth_trace(tiny, point, {0, 0, 0}, 0.5, A, beta, eps);
    CHECK(!tr3.r0_crossed);
    CHECK(tr3.r0 == doctest::Approx(0.5));
    CHECK(tr3.K == 0);
    auto rep = counting_check(tr3, 2);
    CHECK(rep.k_bound_ok);
    CHECK(rep.a_fit == 0);
  }
}

TEST_CASE("counting check on synthetic tables") {
  GrowthTrace tr;
  tr.A = 1.0;
  tr.beta = 0.5;
  tr.epsilon = 0.1;
  tr.M1 = 1.0;

  SUBCASE("deep good interval requires two crossings") {
    // level 1023: required = floor(0.25 * 1023^{1/3}) = 2 at n = 2
    tr.levels = {1, 1023};
    tr.h_level = {0.0, 0.0};
    tr.r_seq = {std::ldexp(1.0, -1024) * 1.5, 0.5};
    tr.K = 2;
    auto rep = counting_check(tr, 2);
    REQUIRE(rep.intervals.size() == 2);
    CHECK(rep.intervals[0].l == 1);
    CHECK(rep.intervals[0].required == 0);  // sequence stops inside
    CHECK(rep.intervals[1].l == 1023);
    CHECK(rep.intervals[1].required == 2);
    CHECK(rep.intervals[1].found == 1);
    CHECK(rep.interval_failures == 1);
    CHECK(rep.partial);  // level 512 sits in an unresolved dyadic block
    CHECK(rep.block_checks == 0);
  }
  SUBCASE("full bad block is flagged") {
    tr.levels = {3, 4};        // the whole block N = 1
    tr.h_level = {1.0, 1.0};   // nowhere good
    tr.K = 0;
    auto rep = counting_check(tr, 2);
    CHECK(rep.block_checks == 1);
    CHECK(rep.block_failures == 1);
    CHECK(!rep.partial);
    CHECK(rep.intervals.empty());
    CHECK(rep.k_bound_ok);  // vacuous at K = 0
  }
  SUBCASE("k bound failure detected") {
    tr.levels = {1};
    tr.h_level = {1.0};
    tr.r_seq = std::vector<double>(40, 0.5);
    tr.K = 40;  // 0.2 * 1.5^39 far above M1
    auto rep = counting_check(tr, 2);
    CHECK(!rep.k_bound_ok);
  }
}

TEST_CASE("exact lattice rescaling") {
  Grid g(2, {65, 65, 1}, 1.0 / 64, {0, 0, 0});
  auto recipe = CoefficientRecipe::smooth();
  auto coef = build_coefficients(recipe, g);
  std::vector<double> bdry(g.num_nodes(), 0.0);
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    Point p = g.position(i);
    bdry[i] = p[0] * p[0] - p[1] * p[1] + 0.3 * p[0];
  }
  auto u = solve_dirichlet(coef, bdry);

  auto rp = rescale_to_unit(u, coef, {0.5, 0.5, 0}, 0.25);
  const Grid& ng = rp.v.grid;
  REQUIRE(ng.count()[0] == 33);
  CHECK(ng.h() == doctest::Approx(1.0 / 16));
  CHECK(ng.origin()[0] == doctest::Approx(-1.0));
  // values are copied, not interpolated
  CHECK(rp.v.u[ng.index(16, 16)] == u.u[g.index(32, 32)]);
  CHECK(rp.v.u[ng.index(0, 0)] == u.u[g.index(16, 16)]);
  // V scales by r^2 exactly
  CHECK(rp.coef.V[ng.index(16, 16)] == 0.0625 * coef.V[g.index(32, 32)]);
  CHECK(rp.coef.W1[ng.index(16, 16) * 2] ==
        0.25 * coef.W1[g.index(32, 32) * 2]);
  CHECK(rp.coef.Lambda0 == doctest::Approx(0.25 * coef.Lambda0));

  // the rescaled field still solves the rescaled equation: the residual is
  // the original residual times r^2, and r, h are powers of two
  std::vector<double> res(ng.num_nodes());
  apply_operator(rp.coef, rp.v.u, res);
  double worst = 0;
  for (std::size_t i = 0; i < ng.num_nodes(); ++i) {
    auto c = ng.coords(i);
    if (c[0] == 0 || c[0] == 32 || c[1] == 0 || c[1] == 32) continue;
    worst = std::max(worst, std::abs(res[i]));
  }
  CHECK(worst < 1e-9);

  SUBCASE("preconditions") {
    CHECK_THROWS_AS(rescale_to_unit(u, coef, {0.5, 0.5, 0}, 0.3),
                    precondition_error);  // 19.2 cells
    CHECK_THROWS_AS(rescale_to_unit(u, coef, {0.505, 0.5, 0}, 0.25),
                    precondition_error);  // off-node center
    CHECK_THROWS_AS(rescale_to_unit(u, coef, {0.9, 0.5, 0}, 0.25),
                    precondition_error);  // window leaves the box
  }
}

TEST_CASE("sup-norm envelope on the unit square") {
  Grid g = square2(257, 1.0);  // h = 1/128, covers B_1
  ConstantsProfile prof;
  const double eps = 1e-3;
  static double geps;
  geps = eps;
  auto u = analytic(g, [](const Point& p) {
    return geps * (0.5 + 0.25 * std::sin(2 * p[0]) * std::sin(2 * p[1]));
  });
  RegionMask f0 = ball_mask(g, {0, 0, 0}, 0.5);

  auto rec = linf_envelope(u, f0, eps, prof);
  CHECK(rec.r0_bound ==
        doctest::Approx(std::exp(-std::pow(std::log(1 / eps), 0.75))));
  CHECK(rec.measured > 0.5 * eps);
  CHECK(rec.measured < 0.75 * eps);
  CHECK(rec.dominated);
  CHECK(rec.bound >= rec.measured);
  CHECK(rec.bound <= 1.0);
  CHECK(rec.cover_balls > 10);
  CHECK(rec.steps_cover > 0);
  CHECK(rec.marcinkiewicz > 0);

  SUBCASE("deterministic rerun") {
    auto rec2 = linf_envelope(u, f0, eps, prof);
    CHECK(rec2.x0 == rec.x0);
    CHECK(rec2.log_bound == rec.log_bound);
    CHECK(rec2.marcinkiewicz == rec.marcinkiewicz);
    CHECK(rec2.cover_balls == rec.cover_balls);
  }
  SUBCASE("doubling phase engages for small eps") {
    geps = 1e-7;
    auto v = analytic(g, [](const Point& p) {
      return geps * (0.5 + 0.25 * std::sin(2 * p[0]) * std::sin(2 * p[1]));
    });
    auto rec2 = linf_envelope(v, f0, 1e-7, prof);
    CHECK(rec2.steps_grow > 0);
    CHECK(rec2.r0_bound < prof.kappa / 16);
    CHECK(rec2.dominated);
  }
  SUBCASE("preconditions") {
    auto big = analytic(g, [](const Point&) { return 2.0; });
    CHECK_THROWS_WITH_AS(linf_envelope(big, f0, eps, prof),
                         "linf_envelope: sup |u| <= 1 required",
                         precondition_error);
    RegionMask small_f = ball_mask(g, {0, 0, 0}, 0.1);
    CHECK_THROWS_WITH_AS(linf_envelope(u, small_f, eps, prof),
                         "linf_envelope: |F0| > |B_{1/2}|/2 required",
                         precondition_error);
    RegionMask wide_f = ball_mask(g, {0, 0, 0}, 0.6);
    CHECK_THROWS_WITH_AS(linf_envelope(u, wide_f, eps, prof),
                         "linf_envelope: F0 not contained in B_{1/2}",
                         precondition_error);
    SolutionField loud = u;
    for (double& x : loud.u) x *= 3;
    CHECK_THROWS_WITH_AS(linf_envelope(loud, f0, eps, prof),
                         "linf_envelope: |u| <= epsilon on F0 violated",
                         precondition_error);
  }
}
