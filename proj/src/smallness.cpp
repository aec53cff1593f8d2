#include "smallness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace ucprop {

double cube_mass(const SolutionField& u, const DyadicCube& cube) {
  const Grid& g = u.grid;
  Cube geo = cube.geometry();
  if (geo.side < g.h())
    throw resolution_error("cube_mass: resolution exhausted");
  // same half-open node box as filled_ratio, so mass and fill agree on
  // which nodes belong to a cube
  double tol = g.h() * 1e-6;
  std::array<int, 3> ilo{0, 0, 0},
      ihi{g.count()[0] - 1, g.count()[1] - 1, g.count()[2] - 1};
  for (int d = 0; d < g.dim(); ++d) {
    double lo = geo.center[d] - geo.side / 2;
    double hi = geo.center[d] + geo.side / 2;
    ilo[d] = std::max(
        0, static_cast<int>(std::ceil((lo - tol - g.origin()[d]) / g.h())));
    ihi[d] = std::min(
        g.count()[d] - 1,
        static_cast<int>(std::floor((hi - tol - g.origin()[d]) / g.h())));
  }
  if (g.dim() == 2) {
    ilo[2] = 0;
    ihi[2] = 0;
  }
  double s = 0;
  bool any = false;
  for (int k = ilo[2]; k <= ihi[2]; ++k)
    for (int j = ilo[1]; j <= ihi[1]; ++j)
      for (int i = ilo[0]; i <= ihi[0]; ++i) {
        double v = u.u[g.index(i, j, k)];
        s += v * v;
        any = true;
      }
  if (!any) throw resolution_error("cube_mass: cube contains no grid nodes");
  return s * g.cell_volume();
}

bool good_test(const SolutionField& u, const DyadicCube& cube, double delta) {
  if (!(delta >= 0))
    throw precondition_error("good_test: delta >= 0 required");
  return cube_mass(u, cube) <= delta * cube.measure();
}

namespace {

double clamp_doubling(double measured, const ConstantsProfile& profile) {
  // a near-zero field yields an empty or degenerate ratio scan; the
  // constant is floored at C0 so the downstream formulas stay finite
  return std::max(measured, profile.C[0]);
}

}  // namespace

InitialFamilyReport select_initial_family(const SolutionField& u,
                                          const RegionMask& domain,
                                          const RegionMask& E, double rho1,
                                          double epsilon,
                                          const ConstantsProfile& profile) {
  const Grid& g = u.grid;
  const int n = g.dim();
  profile.validate(n);
  if (!(epsilon > 0 && epsilon < 1))
    throw precondition_error("select_initial_family: epsilon in (0,1) required");
  if (!(rho1 > 0))
    throw precondition_error("select_initial_family: rho1 > 0 required");
  if (!(E.grid() == g) || !(domain.grid() == g))
    throw precondition_error("select_initial_family: masks on a different grid");
  if (E.empty())
    throw precondition_error("select_initial_family: E is empty");
  RegionMask omega = inner_region(domain, rho1);
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (E.at(i) && !omega.at(i))
      throw precondition_error(
          "select_initial_family: E not contained in Omega(rho1)");
  double e_mass = 0;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (E.at(i)) e_mass += u.u[i] * u.u[i];
  e_mass *= g.cell_volume();
  if (e_mass > epsilon * epsilon * E.measure() * (1 + 1e-9))
    throw precondition_error(
        "select_initial_family: ||u||^2_{L2(E)} <= eps^2 |E| violated");

  InitialFamilyReport rep;
  rep.e_measure = E.measure();

  // Chebyshev: at least half of E (by nodes) has |u| <= sqrt(2) eps
  RegionMask e1(g);
  const double thresh = std::sqrt(2.0) * epsilon;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (E.at(i) && std::abs(u.u[i]) <= thresh) e1.set(i, true);
  rep.e1_measure = e1.measure();
  if (2 * e1.count() < E.count())
    throw contract_error("select_initial_family: Chebyshev half-mass failed");

  // cube side snapped down to a power of two times h, at most kappa*rho1
  rep.r1 = profile.kappa * rho1;
  int m = static_cast<int>(std::floor(std::log2(rep.r1 / g.h())));
  if (m < 2)
    throw resolution_error(
        "select_initial_family: kappa*rho1 below 4 cells");
  rep.side = g.h() * std::ldexp(1.0, m);

  // lattice cube of maximal E1 node overlap, first-in-scan-order tie break
  const double tol = g.h() * 1e-6;
  std::map<std::array<int, 3>, std::size_t> cells;
  for (std::size_t i : e1.nodes()) {
    Point p = g.position(i);
    std::array<int, 3> c{0, 0, 0};
    for (int d = 0; d < n; ++d)
      c[d] = static_cast<int>(
          std::floor((p[d] - g.origin()[d] + tol) / rep.side));
    ++cells[c];
  }
  std::array<int, 3> best{0, 0, 0};
  std::size_t best_count = 0;
  for (const auto& [c, cnt] : cells)
    if (cnt > best_count) {
      best = c;
      best_count = cnt;
    }
  rep.overlap_measure =
      static_cast<double>(best_count) * g.cell_volume();
  rep.q0.dim = n;
  rep.q0.side = rep.side;
  for (int d = 0; d < n; ++d)
    rep.q0.center[d] = g.origin()[d] + (best[d] + 0.5) * rep.side;

  rep.doubling_C =
      clamp_doubling(doubling_constant(u, domain, rho1, profile).constant,
                     profile);
  rep.D = profile.a_n * std::pow(rep.doubling_C, profile.gamma_n);
  rep.beta = 1.0 - profile.k * std::pow(rep.doubling_C, -n);
  if (rep.beta < 0.5) {
    rep.beta = 0.5;
    rep.beta_clamped = true;
  } else if (rep.beta >= 1.0) {
    rep.beta = std::nextafter(1.0, 0.0);
    rep.beta_clamped = true;
  }

  DyadicCube root(rep.q0, {});
  rep.family = maximal_filled_cubes(root, e1, rep.beta, m - 2);
  if (rep.family.empty()) {
    rep.family = CubeFamily(rep.q0);
    rep.family.add(root);
    rep.family_was_empty = true;
  }
  const double delta = rep.D * epsilon * epsilon;
  for (const auto& c : rep.family.cubes())
    if (!good_test(u, c, delta)) ++rep.calibration_failures;
  return rep;
}

GoodnessPropagation propagate_goodness(const SolutionField& u,
                                       const InitialFamilyReport& sel,
                                       double epsilon) {
  if (!(epsilon > 0))
    throw precondition_error("propagate_goodness: epsilon > 0 required");
  GoodnessPropagation out;
  out.trace = iterate_families(sel.family, sel.beta);
  out.N = out.trace.steps;
  const int n = sel.q0.dim;
  double log_q0 = n * std::log(sel.side);
  out.log_certified = std::max(1, 2 * out.N - 1) * std::log(sel.D) +
                      2.0 * std::log(epsilon) + log_q0;
  out.measured_mass = cube_mass(u, DyadicCube(sel.q0, {}));
  out.dominated = out.measured_mass == 0.0 ||
                  std::log(out.measured_mass) <= out.log_certified + 1e-9;
  return out;
}

SmallBallReport find_small_ball(const SolutionField& u,
                                const RegionMask& domain, const RegionMask& E,
                                double rho1, double epsilon,
                                const ConstantsProfile& profile, double eps0) {
  const Grid& g = u.grid;
  profile.validate(g.dim());
  if (!(epsilon > 0 && epsilon < 1))
    throw precondition_error("find_small_ball: epsilon in (0,1) required");
  if (!(eps0 > 0))
    throw precondition_error("find_small_ball: eps0 > 0 required");

  if (E.empty())
    throw precondition_error("find_small_ball: E is empty");
  RegionMask omega1 = inner_region(domain, rho1);
  double e_mass = 0;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    if (!E.at(i)) continue;
    if (!omega1.at(i))
      throw precondition_error(
          "find_small_ball: E not contained in Omega(rho1)");
    e_mass += u.u[i] * u.u[i];
  }
  e_mass *= g.cell_volume();
  if (e_mass > epsilon * epsilon * E.measure() * (1 + 1e-9))
    throw precondition_error(
        "find_small_ball: ||u||^2_{L2(E)} <= eps^2 |E| violated");
  if (norm_on_region(u, domain, 2.0) > 1 + 1e-9)
    throw precondition_error("find_small_ball: ||u||_{L2(Omega)} <= 1 required");

  SmallBallReport rep;
  DoublingRecord dr = doubling_constant(u, domain, rho1, profile);
  if (dr.max_ratio == 0) {
    // every scanned ball was empty; pin the record to the first valid center
    RegionMask half = inner_region(domain, rho1 / 2);
    dr.argmax_center = g.position(half.nodes().front());
    dr.norm_large = dr.norm_small = 0;
  }
  rep.doubling_C = clamp_doubling(dr.constant, profile);
  const double abs_log_eps = std::max(-std::log(epsilon), 1e-12);
  const double two_sigma_h1 = 2.0 * profile.sigma / profile.H1();
  rep.log_envelope =
      2.0 * std::log(profile.C[9]) - two_sigma_h1 * std::log(abs_log_eps);

  // both doubling branches report the radius kappa*rho1 ball inside the
  // argmax ball of radius 2*kappa*rho1, so the mass bound holds a fortiori
  const double r_ball = profile.kappa * rho1;
  if (epsilon >= eps0) {
    // trivial regime: only the enclosing-ball mass is claimed
    rep.branch = 0;
    rep.ball = {dr.argmax_center, r_ball};
    rep.log_branch_bound = dr.norm_large > 0
                               ? 2.0 * std::log(dr.norm_large)
                               : -std::numeric_limits<double>::infinity();
  } else if (rep.doubling_C >=
             profile.C[0] * std::pow(abs_log_eps, profile.sigma)) {
    // large doubling constant: the functional itself bounds the small ball
    rep.branch = 1;
    rep.ball = {dr.argmax_center, r_ball};
    double lc = (std::log(profile.C[0]) - std::log(rep.doubling_C)) /
                profile.H1();
    rep.log_branch_bound =
        dr.norm_large > 0 ? 2.0 * (std::log(dr.norm_large) + lc)
                          : -std::numeric_limits<double>::infinity();
  } else {
    // bounded doubling: cube-family route, ball inscribed in Q0
    rep.branch = 2;
    rep.selection = select_initial_family(u, domain, E, rho1, epsilon, profile);
    rep.propagation = propagate_goodness(u, rep.selection, epsilon);
    rep.ball = {rep.selection.q0.center, rep.selection.side / 2};
    rep.log_branch_bound = rep.propagation.log_certified;
  }
  rep.measured_mass = std::pow(norm_on_ball(u, rep.ball.center, rep.ball.r, 2.0), 2);
  rep.dominated = rep.measured_mass == 0.0 ||
                  std::log(rep.measured_mass) <= rep.log_branch_bound + 1e-9;
  rep.envelope_ok = rep.log_branch_bound <= rep.log_envelope + 1e-9;
  return rep;
}

PropagationReport phi_estimate(const SolutionField& u, const RegionMask& domain,
                               const RegionMask& E, double rho, double epsilon,
                               const ConstantsProfile& profile, double eps0) {
  const Grid& g = u.grid;
  profile.validate(g.dim());
  if (!(rho > 0 && rho / 2 < profile.rho0))
    throw precondition_error("phi_estimate: rho/2 < rho0 required");
  if (norm_on_region(u, domain, 2.0) > 1 + 1e-9)
    throw precondition_error("phi_estimate: ||u||_{L2(Omega)} <= 1 required");

  PropagationReport rep;
  rep.epsilon = epsilon;
  rep.rho = rho;
  rep.ball = find_small_ball(u, domain, E, rho, epsilon, profile, eps0);

  const double r_step = profile.kappa * rho / 8;
  const double R_step = 0.45 * profile.kappa * rho;
  const double rho_enc = rho / 2;
  rep.alpha = alpha_exponent(r_step, R_step, rho_enc, profile);
  rep.c_step = profile.C[7] * R_step / r_step;

  RegionMask omega_half = inner_region(domain, rho / 2);
  if (omega_half.empty())
    throw precondition_error("phi_estimate: Omega(rho/2) is empty");
  RegionMask omega = inner_region(domain, rho);
  if (omega.empty())
    throw precondition_error("phi_estimate: Omega(rho) is empty");
  auto sc = g.nearest_node(rep.ball.ball.center);
  Point start = {g.origin()[0] + sc[0] * g.h(), g.origin()[1] + sc[1] * g.h(),
                 g.origin()[2] + sc[2] * g.h()};
  if (std::sqrt(dist2(start, rep.ball.ball.center, g.dim())) >
      rep.ball.ball.r - r_step)
    throw precondition_error(
        "phi_estimate: small ball too thin for the chain step radius");

  // two stage chain: a path through Omega(rho/2) from the small ball to the
  // nearest node of Omega(rho), then a net covering Omega(rho) itself; every
  // Omega(rho) node lies in Omega(rho/2), so all centers admit the enclosing
  // ball of radius rho/2
  Point entry{0, 0, 0};
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i : omega.nodes()) {
    double d = dist2(start, g.position(i), g.dim());
    if (d < best) {
      best = d;
      entry = g.position(i);
    }
  }
  BallChain path = plan_chain(omega_half, start, &entry, r_step);
  BallChain cover = plan_chain(omega, entry, nullptr, r_step);
  path.rho = cover.rho = rho_enc;
  double hop = std::max(path.max_hop, cover.max_hop);
  if (hop > R_step - r_step)
    throw resolution_error(
        "phi_estimate: chain hop exceeds R - r, grid too coarse");
  rep.chain_length = path.length() + cover.length();
  rep.chain_balls = path.centers.size() + cover.centers.size();

  // the chain carries the |log eps| envelope, never the measured mass, so
  // the final bound is an explicit function of epsilon alone
  double log_b0 = 0.5 * rep.ball.log_envelope - std::log(r_step);
  double log_M = -std::log(rho_enc);
  if (log_b0 > log_M) {
    rep.m_inflation = log_b0 - log_M;
    log_M = log_b0;
  }
  ChainBounds cb = propagate_chain_log(log_b0, log_M, rep.chain_length,
                                       rep.alpha, rep.c_step);

  // covering sum over the net: every Omega(rho) node is within r_step of a
  // cover center and every center obeys the depth-L bound
  rep.log_phi =
      0.5 * std::log(static_cast<double>(cover.centers.size())) +
      std::log(r_step) + cb.log_final;
  rep.phi = std::exp(rep.log_phi);
  rep.c_exponent = (2.0 * profile.sigma / profile.H1()) *
                   std::pow(1.0 - rep.alpha, rep.chain_length);

  rep.measured = norm_on_region(u, omega, 2.0);
  rep.dominated = rep.measured == 0.0 ||
                  std::log(rep.measured) <= rep.log_phi + 1e-9;
  return rep;
}

}  // namespace ucprop
