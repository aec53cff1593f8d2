#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "three_sphere.hpp"

using namespace ucprop;

namespace {

SolutionField analytic(const Grid& g, double (*f)(const Point&)) {
  SolutionField u;
  u.grid = g;
  u.u.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) u.u[i] = f(g.position(i));
  return u;
}

Grid square2(int n, double half) {
  return Grid(2, {n, n, 1}, 2.0 * half / (n - 1), {-half, -half, 0});
}

ConstantsProfile wide_kappa() {
  ConstantsProfile p;
  p.kappa = 0.24;
  return p;
}

}  // namespace

TEST_CASE("alpha exponent spot values") {
  ConstantsProfile prof;  // H0 = 1, b0 = 1
  CHECK(alpha_exponent(0.1, 0.2, 1.6, prof) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
  CHECK(alpha_exponent(0.05, 0.2, 1.6, prof) == doctest::Approx(0.75).epsilon(1e-14));
}

TEST_CASE("alpha exponent monotonicity and limits") {
  ConstantsProfile prof;
  double base = alpha_exponent(0.1, 0.25, 1.6, prof);
  CHECK(alpha_exponent(0.1, 0.26, 1.6, prof) > base);   // increasing in R
  CHECK(alpha_exponent(0.1, 0.25, 1.7, prof) < base);   // decreasing in rho
  // rho down to 2 b0 R pushes alpha to 1
  CHECK(alpha_exponent(0.1, 0.25, 0.5 + 1e-9, prof) > 0.999);

  CHECK_THROWS_WITH_AS(alpha_exponent(0.2, 0.25, 1.6, prof),
                       "alpha_exponent: 2r <= R violated", precondition_error);
  CHECK_THROWS_WITH_AS(alpha_exponent(0.1, 0.25, 0.4, prof),
                       "alpha_exponent: 2 b0 R < rho violated",
                       precondition_error);
}

TEST_CASE("three sphere record on a constant field") {
  // radii kept off exact lattice distances so node counts are stable
  Grid g = square2(801, 1.0);  // h = 1/400
  auto u = analytic(g, [](const Point&) { return 1.0; });
  RegionMask domain(g, true);
  ConstantsProfile prof = wide_kappa();
  double r = 0.021, R = 0.046, rho = 0.201;
  auto rec = verify_three_sphere(u, domain, {0, 0, 0}, r, R, rho, prof);
  // hand arithmetic with continuum areas: norms are sqrt(pi) each
  double expected_norm = std::sqrt(M_PI);
  CHECK(rec.sigma == doctest::Approx(expected_norm).epsilon(0.02));
  CHECK(rec.mid == doctest::Approx(expected_norm).epsilon(0.02));
  CHECK(rec.M == doctest::Approx(expected_norm).epsilon(0.02));
  CHECK(rec.needed_constant == doctest::Approx(1.0).epsilon(0.03));

  SUBCASE("invariant under scaling of u") {
    SolutionField v = u;
    for (double& x : v.u) x *= 12.0;
    auto rec2 = verify_three_sphere(v, domain, {0, 0, 0}, r, R, rho, prof);
    CHECK(rec2.needed_constant ==
          doctest::Approx(rec.needed_constant).epsilon(1e-12));
  }
  SUBCASE("sup norm variant is exactly one") {
    auto rec2 = linf_three_sphere(u, domain, {0, 0, 0}, r, R, rho, prof);
    CHECK(rec2.needed_constant == doctest::Approx(1.0).epsilon(1e-12));
  }
  SUBCASE("preconditions rejected") {
    CHECK_THROWS_AS(
        verify_three_sphere(u, domain, {0, 0, 0}, 0.024, R, rho, prof),
        precondition_error);  // 2r < R
    CHECK_THROWS_AS(
        verify_three_sphere(u, domain, {0, 0, 0}, r, 0.06, rho, prof),
        precondition_error);  // R < kappa rho
    CHECK_THROWS_AS(
        verify_three_sphere(u, domain, {0.95, 0.95, 0}, r, R, rho, prof),
        precondition_error);  // x outside Omega(rho)
    CHECK_THROWS_AS(
        verify_three_sphere(u, domain, {0, 0, 0}, 0.004, 0.046, rho, prof),
        resolution_error);  // inner ball below 4 cells
  }
}

TEST_CASE("homogeneous harmonic obeys log convexity") {
  Grid g = square2(801, 1.0);
  auto u = analytic(g, [](const Point& p) { return p[0] * p[0] - p[1] * p[1]; });
  RegionMask domain(g, true);
  ConstantsProfile prof = wide_kappa();
  double r = 0.021, R = 0.046, rho = 0.201;
  auto rec = verify_three_sphere(u, domain, {0, 0, 0}, r, R, rho, prof);
  // ||u||_{L2(B_t)} = c t^{k + n/2}, so the Hadamard exponent interpolation
  // is an identity for the un-normalized norms
  double alpha_h = std::log(rho / R) / std::log(rho / r);
  double lhs = rec.mid * R;
  double rhs = std::pow(rec.sigma * r, alpha_h) *
               std::pow(rec.M * rho, 1.0 - alpha_h);
  CHECK(lhs <= rhs * 1.05);
  CHECK(lhs >= rhs * 0.95);
  CHECK(rec.needed_constant > 0);
  CHECK(std::isfinite(rec.needed_constant));
}

TEST_CASE("plan_chain point to point") {
  Grid g = square2(101, 0.5);  // unit square, h = 0.01
  RegionMask omega(g, true);
  SUBCASE("start equals target") {
    Point p{0.1, 0.1, 0};
    auto chain = plan_chain(omega, p, &p, 0.1);
    CHECK(chain.centers.size() == 1);
    CHECK(chain.length() == 0);
  }
  SUBCASE("opposite corners at r = 0.1") {
    Point a{-0.4, -0.4, 0}, b{0.4, 0.4, 0};
    auto chain = plan_chain(omega, a, &b, 0.1);
    // BFS distance is the manhattan diagonal 1.6
    int expected = static_cast<int>(std::ceil(1.6 / 0.1));
    CHECK(chain.length() >= expected - 2);
    CHECK(chain.length() <= expected + 2);
    for (std::size_t i = 1; i + 1 < chain.centers.size(); ++i) {
      double d = std::sqrt(dist2(chain.centers[i - 1], chain.centers[i], 2));
      CHECK(d >= 0.09);
      CHECK(d <= 0.11);
    }
  }
  SUBCASE("disconnected mask reports components") {
    RegionMask blobs(g);
    RegionMask left = ball_mask(g, {-0.3, 0, 0}, 0.1);
    RegionMask right = ball_mask(g, {0.3, 0, 0}, 0.1);
    for (std::size_t i = 0; i < g.num_nodes(); ++i)
      blobs.set(i, left.at(i) || right.at(i));
    Point a{-0.3, 0, 0}, b{0.3, 0, 0};
    CHECK_THROWS_WITH_AS(plan_chain(blobs, a, &b, 0.05),
                         doctest::Contains("components"), precondition_error);
  }
}

TEST_CASE("plan_chain cover-all net") {
  Grid g = square2(101, 0.5);
  RegionMask omega(g, true);
  auto chain = plan_chain(omega, {0, 0, 0}, nullptr, 0.3);
  CHECK(chain.cover_all);
  CHECK(chain.centers.size() > 1);
  CHECK(chain.length() >= 1);
  // net property: distinct centers are at least r apart
  for (std::size_t i = 0; i < chain.centers.size(); ++i)
    for (std::size_t j = i + 1; j < chain.centers.size(); ++j)
      CHECK(std::sqrt(dist2(chain.centers[i], chain.centers[j], 2)) >=
            0.3 - 1e-12);
  // every mask node is within 2r of some center
  for (std::size_t idx = 0; idx < g.num_nodes(); ++idx) {
    double best = 1e300;
    for (const auto& c : chain.centers)
      best = std::min(best, std::sqrt(dist2(c, g.position(idx), 2)));
    CHECK(best < 0.6);
  }
}

TEST_CASE("propagate_chain recurrence and closed form") {
  SUBCASE("alpha = 1/2 halves the log three times") {
    auto out = propagate_chain_log(-8.0, 0.0, 3, 0.5, 1.0);
    CHECK(out.log_final == doctest::Approx(-1.0).epsilon(1e-14));
    CHECK(out.final_bound == doctest::Approx(std::exp(-1.0)));
  }
  SUBCASE("b0 = M is a fixed point at C7 = 1") {
    auto out = propagate_chain_log(std::log(0.7), std::log(0.7), 10, 0.4, 1.0);
    for (double lb : out.log_bound)
      CHECK(lb == doctest::Approx(std::log(0.7)).epsilon(1e-13));
  }
  SUBCASE("survives b0 = exp(-1e10)") {
    auto out = propagate_chain_log(-1e10, 0.0, 5, 2.0 / 3.0, 1.0);
    double decay = std::pow(1.0 / 3.0, 5);
    CHECK(out.log_final == doctest::Approx(-1e10 * decay).epsilon(1e-12));
    CHECK(out.final_bound == 0.0);  // underflow is fine, the log is exact
  }
  SUBCASE("wrapper checks bound0 <= M") {
    BallChain chain;
    chain.centers = {{0, 0, 0}, {1, 0, 0}};
    chain.depth = {0, 1};
    chain.parent = {-1, 0};
    CHECK_THROWS_AS(propagate_chain(2.0, 1.0, chain, 0.5, 1.0),
                    precondition_error);
    auto out = propagate_chain(0.5, 1.0, chain, 0.5, 1.0);
    CHECK(out.log_bound.size() == 2);
  }
}
