#include "growth.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ucprop {

namespace {

void check_ball_in_grid(const Grid& g, const Point& x0, double r,
                        const char* who) {
  for (int d = 0; d < g.dim(); ++d) {
    if (x0[d] - r < g.origin()[d] - 1e-12 ||
        x0[d] + r > g.origin()[d] + g.extent(d) + 1e-12)
      throw precondition_error(std::string(who) +
                               ": ball leaves the grid box");
  }
}

double value_at(const SolutionField& u, const Point& p) {
  auto c = u.grid.nearest_node(p);
  return u.u[u.grid.index(c[0], c[1], c[2])];
}

double shell_max(const SolutionField& u, const Point& x0, double r) {
  const Grid& g = u.grid;
  double m = 0;
  bool any = false;
  for (std::size_t i = 0; i < g.num_nodes(); ++i) {
    double d = std::sqrt(dist2(g.position(i), x0, g.dim()));
    if (std::abs(d - r) <= g.h()) {
      m = std::max(m, std::abs(u.u[i]));
      any = true;
    }
  }
  if (!any)
    throw resolution_error("sphere_max_profile: empty shell");
  return m;
}

}  // namespace

SphereMaxProfile sphere_max_profile(const SolutionField& u, const Point& x0,
                                    double r_max) {
  const Grid& g = u.grid;
  if (r_max < 4.0 * g.h())
    throw resolution_error("sphere_max_profile: r_max below 4 cells");
  check_ball_in_grid(g, x0, r_max, "sphere_max_profile");
  SphereMaxProfile out;
  out.x0 = x0;
  out.shell_width = 2.0 * g.h();
  for (double r = r_max; r >= 4.0 * g.h(); r /= 2) {
    out.radius.push_back(r);
    out.m.push_back(shell_max(u, x0, r));
  }
  return out;
}

ClaimRecord growth_claim_check(const SolutionField& u, const RegionMask& f,
                               const Point& x_star, double r_star,
                               const Point& y_star, double gamma, double c,
                               double epsilon, double A) {
  const Grid& g = u.grid;
  if (!(gamma > 0 && gamma < 1))
    throw precondition_error("growth_claim: gamma in (0,1) required");
  if (!(c > 2.0 * A * epsilon))
    throw precondition_error("growth_claim: c > 2 A epsilon violated");
  double xn = std::sqrt(dist2(x_star, {0, 0, 0}, g.dim()));
  if (!(xn < 1.0 - 4.0 * r_star))
    throw precondition_error("growth_claim: |x*| < 1 - 4 r* violated");
  if (!(std::sqrt(dist2(y_star, x_star, g.dim())) < r_star / 2))
    throw precondition_error("growth_claim: y* in B_{r*/2}(x*) violated");
  double sup_f = 0;
  for (std::size_t i : f.nodes()) sup_f = std::max(sup_f, std::abs(u.u[i]));
  if (sup_f > epsilon * (1 + 1e-9))
    throw precondition_error("growth_claim: |u| <= epsilon on F violated");
  RegionMask ball = ball_mask(g, x_star, r_star);
  std::size_t inside = intersect(ball, f).count();
  if (!(static_cast<double>(inside) > gamma * ball.count()))
    throw precondition_error(
        "growth_claim: density of F in B_{r*}(x*) below gamma");
  if (!(std::abs(value_at(u, y_star)) > c))
    throw precondition_error("growth_claim: |u(y*)| > c violated");

  ClaimRecord rec;
  rec.sup = norm_on_ball(u, x_star, r_star, INFINITY);
  rec.ratio = rec.sup / c;
  rec.d_bound = std::sqrt((c * c - A * A * epsilon * epsilon * gamma) /
                          ((1.0 - gamma) * A * A));
  rec.beta = 1.0 / (A * std::sqrt(2.0 * (1.0 - gamma))) - 1.0;
  rec.pass = rec.sup * (1 + 1e-9) >= rec.d_bound;
  return rec;
}

double r0_lower_bound(double epsilon, double B, int n) {
  if (!(epsilon > 0 && epsilon <= 0.5))
    throw precondition_error("r0_lower_bound: epsilon in (0, 1/2] required");
  if (!(B > 0)) throw precondition_error("r0_lower_bound: B > 0 required");
  double p = static_cast<double>(n + 1) / (n + 2);
  return std::exp(-B * std::pow(-std::log(epsilon), p));
}

double first_crossing(const GrowthTrace& trace, double M) {
  for (std::size_t i = 0; i < trace.radius.size(); ++i)
    if (trace.m[i] >= M) return trace.radius[i];
  return std::numeric_limits<double>::infinity();
}

GrowthTrace build_growth_trace(const SolutionField& u, const RegionMask& f1,
                               const Point& x0, double r_max, double A,
                               double beta, double epsilon) {
  const Grid& g = u.grid;
  if (!(beta > 0))
    throw precondition_error("growth_trace: beta > 0 required");
  if (r_max < 4.0 * g.h())
    throw resolution_error("growth_trace: r_max below 4 cells");
  check_ball_in_grid(g, x0, r_max, "growth_trace");

  GrowthTrace tr;
  tr.x0 = x0;
  tr.A = A;
  tr.beta = beta;
  tr.epsilon = epsilon;
  tr.r_max = r_max;
  for (int k = 4; k * g.h() <= r_max; ++k) {
    double r = k * g.h();
    tr.radius.push_back(r);
    tr.m.push_back(shell_max(u, x0, r));
  }
  tr.M1 = norm_on_ball(u, x0, r_max, INFINITY);

  const double base = 2.0 * A * epsilon;
  tr.r0 = first_crossing(tr, base);
  tr.r0_crossed = std::isfinite(tr.r0);
  if (!tr.r0_crossed) tr.r0 = r_max;
  for (int j = 0;; ++j) {
    double M = base * std::pow(1.0 + beta, j);
    if (M > tr.M1) break;
    double r = first_crossing(tr, M);
    if (!std::isfinite(r)) break;
    tr.r_seq.push_back(r);
  }
  tr.K = static_cast<int>(tr.r_seq.size());

  HProfile hp = h_profile(f1, x0, r_max);
  tr.h_radius = hp.radius;
  tr.h_of_r = hp.h_of_r;
  tr.levels = hp.levels;
  tr.h_level = hp.h_level;
  return tr;
}

namespace {

// h(r) at the sample radius nearest to r; trace radii are dense (step h).
double h_at(const GrowthTrace& tr, double r) {
  double best = std::numeric_limits<double>::infinity();
  double val = 0;
  for (std::size_t i = 0; i < tr.h_radius.size(); ++i) {
    double d = std::abs(tr.h_radius[i] - r);
    if (d < best) {
      best = d;
      val = tr.h_of_r[i];
    }
  }
  return val;
}

}  // namespace

TraceInvariants trace_invariants(const GrowthTrace& tr) {
  TraceInvariants out;
  for (std::size_t j = 0; j + 1 < tr.r_seq.size(); ++j) {
    ++out.checks;
    if (tr.r_seq[j + 1] > tr.r_seq[j] + 3.0 * h_at(tr, tr.r_seq[j]) + 1e-12)
      ++out.violations;
  }
  // l1: beyond it every stored level satisfies h_l 2^l < 1/12
  int max_level = -1;
  for (int l : tr.levels) max_level = std::max(max_level, l);
  out.l1 = max_level + 1;
  for (int cand = 0; cand <= max_level; ++cand) {
    bool ok = true;
    for (std::size_t i = 0; i < tr.levels.size(); ++i)
      if (tr.levels[i] > cand &&
          tr.h_level[i] * std::ldexp(1.0, tr.levels[i]) >= 1.0 / 12)
        ok = false;
    if (ok) {
      out.l1 = cand;
      break;
    }
  }
  // levels strictly beyond l1 start at radius 2^{-l1-1}
  double cutoff = std::ldexp(1.0, -out.l1 - 1);
  for (std::size_t i = 0; i < tr.h_radius.size(); ++i)
    if (tr.h_radius[i] < cutoff &&
        tr.h_of_r[i] >= tr.h_radius[i] / 6.0)
      out.h_tail_ok = false;
  return out;
}

CountingReport counting_check(const GrowthTrace& tr, int n) {
  CountingReport rep;
  rep.K = tr.K;
  GoodScales gs = good_scales(tr.levels, tr.h_level, n);
  rep.blocks = gs.blocks;
  for (const auto& b : rep.blocks) {
    int full = 1 << b[0];  // block {2^N+1 .. 2^{N+1}} has 2^N levels
    if (b[2] < full) {
      rep.partial = true;
      continue;
    }
    ++rep.block_checks;
    if (b[0] >= 1 && b[1] < (1 << (b[0] - 1))) ++rep.block_failures;
  }
  double r_last = tr.r_seq.empty() ? 0 : tr.r_seq.back();
  for (int l : gs.good) {
    double lo = std::ldexp(1.0, -l - 1), hi = std::ldexp(1.0, -l);
    int found = 0;
    for (double r : tr.r_seq)
      if (r > lo && r <= hi) ++found;
    if (found == 0) continue;
    CountingReport::Interval iv;
    iv.l = l;
    iv.found = found;
    // the floor bound only applies when the sequence passes through
    iv.required = r_last > hi
                      ? static_cast<int>(std::floor(
                            0.25 * std::pow(l, 1.0 / (n + 1))))
                      : 0;
    iv.pass = iv.found >= iv.required;
    if (!iv.pass) ++rep.interval_failures;
    rep.intervals.push_back(iv);
  }
  const double base = 2.0 * tr.A * tr.epsilon;
  double abs_log_eps = std::max(-std::log(tr.epsilon), 1e-12);
  rep.a_fit = tr.K * std::log1p(tr.beta) / abs_log_eps;
  rep.k_bound_ok =
      tr.K == 0 ||
      std::log(base) + (tr.K - 1) * std::log1p(tr.beta) <=
          std::log(std::max(1.0, tr.M1)) + 1e-9;
  return rep;
}

RescaledProblem rescale_to_unit(const SolutionField& u,
                                const CoefficientField& cf, const Point& x0,
                                double r) {
  const Grid& g = u.grid;
  if (!(cf.grid == g))
    throw precondition_error("rescale: coefficients on a different grid");
  double cells = r / g.h();
  int m = static_cast<int>(std::lround(cells));
  if (m < 2 || std::abs(cells - m) > 1e-9)
    throw precondition_error(
        "rescale: r must be a whole number of cells (>= 2)");
  auto c0 = g.nearest_node(x0);
  for (int d = 0; d < g.dim(); ++d) {
    double snap = g.origin()[d] + c0[d] * g.h();
    if (std::abs(snap - x0[d]) > 1e-9 * g.h() + 1e-15)
      throw precondition_error("rescale: x0 must be a grid node");
    if (c0[d] - m < 0 || c0[d] + m >= g.count()[d])
      throw precondition_error("rescale: window leaves the grid box");
  }

  RescaledProblem out;
  out.x0 = x0;
  out.r = r;
  std::array<int, 3> cnt{2 * m + 1, 2 * m + 1, g.dim() == 3 ? 2 * m + 1 : 1};
  Grid ng(g.dim(), cnt, 1.0 / m, {-1, -1, g.dim() == 3 ? -1.0 : 0.0});
  out.v.grid = ng;
  out.v.u.resize(ng.num_nodes());
  out.coef.grid = ng;
  out.coef.g_offdiag = cf.g_offdiag;
  out.coef.g_iso.resize(ng.num_nodes());
  if (cf.has_V()) out.coef.V.resize(ng.num_nodes());
  if (cf.has_W1()) out.coef.W1.resize(ng.num_nodes() * g.dim());
  if (cf.has_W2()) out.coef.W2.resize(ng.num_nodes() * g.dim());
  out.coef.lambda = cf.lambda;
  out.coef.Lambda0 = cf.Lambda0 * r;
  out.coef.Lambda1 = cf.Lambda1;
  out.coef.s = cf.s;
  out.coef.cap_radius = cf.cap_radius / r;
  for (std::size_t i = 0; i < ng.num_nodes(); ++i) {
    auto c = ng.coords(i);
    std::size_t src = g.index(c0[0] + c[0] - m, c0[1] + c[1] - m,
                              g.dim() == 3 ? c0[2] + c[2] - m : 0);
    out.v.u[i] = u.u[src];
    out.coef.g_iso[i] = cf.g_iso[src];
    if (cf.has_V()) out.coef.V[i] = r * r * cf.V[src];
    for (int d = 0; d < g.dim(); ++d) {
      if (cf.has_W1()) out.coef.W1[i * g.dim() + d] = r * cf.W1[src * g.dim() + d];
      if (cf.has_W2()) out.coef.W2[i * g.dim() + d] = r * cf.W2[src * g.dim() + d];
    }
  }
  return out;
}

LinfEnvelope linf_envelope(const SolutionField& u, const RegionMask& f0,
                           double epsilon, const ConstantsProfile& profile) {
  const Grid& g = u.grid;
  const int n = g.dim();
  profile.validate(n);
  if (!(epsilon > 0 && epsilon < 0.5))
    throw precondition_error("linf_envelope: epsilon in (0, 1/2) required");
  for (int d = 0; d < n; ++d)
    if (g.origin()[d] > -1 + 1e-9 ||
        g.origin()[d] + g.extent(d) < 1 - 1e-9)
      throw precondition_error("linf_envelope: grid must cover the unit ball");
  double sup_all = 0;
  for (double v : u.u) sup_all = std::max(sup_all, std::abs(v));
  if (sup_all > 1 + 1e-9)
    throw precondition_error("linf_envelope: sup |u| <= 1 required");
  RegionMask half = ball_mask(g, {0, 0, 0}, 0.5);
  if (!(f0.measure() > 0.5 * half.measure()))
    throw precondition_error(
        "linf_envelope: |F0| > |B_{1/2}|/2 required");
  double sup_f0 = 0;
  for (std::size_t i : f0.nodes()) {
    if (!half.at(i))
      throw precondition_error("linf_envelope: F0 not contained in B_{1/2}");
    sup_f0 = std::max(sup_f0, std::abs(u.u[i]));
  }
  if (sup_f0 > epsilon * (1 + 1e-9))
    throw precondition_error("linf_envelope: |u| <= epsilon on F0 violated");

  LinfEnvelope out;
  out.r1_density = 0.125;
  RegionMask f1 = density_subset(f0, profile.gamma, out.r1_density);
  if (f1.empty())
    throw precondition_error(
        "linf_envelope: no density points of F0 at this gamma");
  // cheapest Marcinkiewicz point among a deterministic subsample of F1
  auto f1_nodes = f1.nodes();
  std::size_t stride = std::max<std::size_t>(1, f1_nodes.size() / 32);
  double best = std::numeric_limits<double>::infinity();
  std::size_t best_idx = f1_nodes.front();
  for (std::size_t i = 0; i < f1_nodes.size(); i += stride) {
    double v = marcinkiewicz_integral(f1, g.position(f1_nodes[i]));
    if (v < best) {
      best = v;
      best_idx = f1_nodes[i];
    }
  }
  out.x0 = g.position(best_idx);
  out.marcinkiewicz = best;

  out.r0_bound = r0_lower_bound(epsilon, profile.C[8], n);

  // doubling chain (r, 2r, 5r) around x0 up to kappa/16, sup norms, M = 1
  const double r_top = profile.kappa / 16;
  out.alpha_grow = alpha_exponent(0.01, 0.02, 0.05, profile);
  out.steps_grow =
      out.r0_bound >= r_top
          ? 0
          : static_cast<int>(std::ceil(std::log2(r_top / out.r0_bound)));
  double log_b0 = std::min(std::log(2.0 * profile.A * epsilon), 0.0);
  ChainBounds grow = propagate_chain_log(log_b0, 0.0, out.steps_grow,
                                         out.alpha_grow, profile.C[7]);

  // covering net of B_{1/2}; each center admits the enclosing radius 0.45
  // ball inside B_1, and sup-norm transfer needs no radius conversion
  const double r_c = r_top, R_c = profile.kappa / 4, rho_c = 0.45;
  out.alpha_cover = alpha_exponent(r_c, R_c, rho_c, profile);
  BallChain chain = plan_chain(half, out.x0, nullptr, r_c);
  if (chain.max_hop > R_c - r_c)
    throw resolution_error(
        "linf_envelope: cover hop exceeds R - r, grid too coarse");
  out.steps_cover = chain.length();
  out.cover_balls = chain.centers.size();
  ChainBounds cover = propagate_chain_log(grow.log_final, 0.0,
                                          out.steps_cover, out.alpha_cover,
                                          profile.C[7]);
  out.log_bound = std::min(cover.log_final, 0.0);
  out.bound = std::exp(out.log_bound);
  out.measured = norm_on_region(u, half, INFINITY);
  out.dominated = out.measured <= out.bound * (1 + 1e-9);
  return out;
}

}  // namespace ucprop
