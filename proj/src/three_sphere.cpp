#include "three_sphere.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>

namespace ucprop {

double alpha_exponent(double r, double R, double rho,
                      const ConstantsProfile& profile) {
  if (!(r > 0 && R > 0 && rho > 0))
    throw precondition_error("alpha_exponent: radii must be positive");
  // the formula itself only needs both logs positive; 2r = R is admitted
  // because the reference spot values sit exactly on that edge
  if (!(2.0 * r <= R))
    throw precondition_error("alpha_exponent: 2r <= R violated");
  if (!(2.0 * profile.b0 * R < rho))
    throw precondition_error("alpha_exponent: 2 b0 R < rho violated");
  double l = 2.0 * profile.H0 * std::log(2.0 * R / r);
  double m = std::log(rho / (2.0 * profile.b0 * R));
  return l / (l + m);
}

namespace {

ThreeSphereRecord three_sphere_impl(const SolutionField& u,
                                    const RegionMask& domain, const Point& x,
                                    double r, double R, double rho,
                                    const ConstantsProfile& profile,
                                    bool sup_norm) {
  const Grid& g = u.grid;
  profile.validate(g.dim());
  if (!(2.0 * r < R))
    throw precondition_error("three_sphere: 2r < R violated");
  if (!(R < profile.kappa * rho))
    throw precondition_error("three_sphere: R < kappa*rho violated");
  if (!(rho < profile.rho0))
    throw precondition_error("three_sphere: rho < rho0 violated");
  if (r < 2.0 * g.h())
    throw resolution_error("three_sphere: inner ball thinner than 4 cells");
  RegionMask omega = inner_region(domain, rho);
  auto c = g.nearest_node(x);
  if (!omega.at(g.index(c[0], c[1], c[2])))
    throw precondition_error("three_sphere: x outside Omega(rho)");

  ThreeSphereRecord rec;
  rec.center = x;
  rec.r = r;
  rec.R = R;
  rec.rho = rho;
  rec.alpha = alpha_exponent(r, R, rho, profile);
  if (sup_norm) {
    rec.sigma = norm_on_ball(u, x, r, INFINITY);
    rec.mid = norm_on_ball(u, x, R, INFINITY);
    rec.M = norm_on_ball(u, x, rho, INFINITY);
  } else {
    rec.sigma = norm_on_ball(u, x, r, 2.0) / r;
    rec.mid = norm_on_ball(u, x, R, 2.0) / R;
    rec.M = norm_on_ball(u, x, rho, 2.0) / rho;
  }
  rec.floor_sigma = rec.sigma == 0.0;
  double denom = std::pow(rec.M, rec.alpha) *
                 std::pow(rec.sigma, 1.0 - rec.alpha);
  rec.needed_constant = denom > 0 ? rec.mid / denom
                                  : std::numeric_limits<double>::infinity();
  return rec;
}

}  // namespace

ThreeSphereRecord verify_three_sphere(const SolutionField& u,
                                      const RegionMask& domain, const Point& x,
                                      double r, double R, double rho,
                                      const ConstantsProfile& profile) {
  return three_sphere_impl(u, domain, x, r, R, rho, profile, false);
}

ThreeSphereRecord linf_three_sphere(const SolutionField& u,
                                    const RegionMask& domain, const Point& x,
                                    double r, double R, double rho,
                                    const ConstantsProfile& profile) {
  return three_sphere_impl(u, domain, x, r, R, rho, profile, true);
}

namespace {

// BFS over axis-adjacent mask nodes; returns step distances and parents,
// -1 where unreached.
void mask_bfs(const RegionMask& mask, std::size_t start,
              std::vector<int>& dist, std::vector<std::int64_t>& parent) {
  const Grid& g = mask.grid();
  dist.assign(g.num_nodes(), -1);
  parent.assign(g.num_nodes(), -1);
  std::deque<std::size_t> q{start};
  dist[start] = 0;
  const int di[3] = {1, 0, 0};
  const int dj[3] = {0, 1, 0};
  const int dk[3] = {0, 0, 1};
  while (!q.empty()) {
    std::size_t cur = q.front();
    q.pop_front();
    auto c = g.coords(cur);
    for (int d = 0; d < g.dim(); ++d)
      for (int s : {-1, 1}) {
        std::array<int, 3> nb{c[0] + s * di[d], c[1] + s * dj[d],
                              c[2] + s * dk[d]};
        if (!g.contains(nb)) continue;
        std::size_t ni = g.index(nb[0], nb[1], nb[2]);
        if (!mask.at(ni) || dist[ni] >= 0) continue;
        dist[ni] = dist[cur] + 1;
        parent[ni] = static_cast<std::int64_t>(cur);
        q.push_back(ni);
      }
  }
}

std::size_t snap_to_mask(const RegionMask& mask, const Point& p,
                         const char* what) {
  const Grid& g = mask.grid();
  auto c = g.nearest_node(p);
  std::size_t idx = g.index(c[0], c[1], c[2]);
  if (!mask.at(idx))
    throw precondition_error(std::string("plan_chain: ") + what +
                             " outside Omega(rho)");
  return idx;
}

std::string component_report(const RegionMask& mask) {
  std::vector<int> dist;
  std::vector<std::int64_t> parent;
  std::vector<std::uint8_t> seen(mask.grid().num_nodes(), 0);
  std::vector<std::size_t> sizes;
  for (std::size_t i = 0; i < mask.grid().num_nodes(); ++i) {
    if (!mask.at(i) || seen[i]) continue;
    mask_bfs(mask, i, dist, parent);
    std::size_t sz = 0;
    for (std::size_t j = 0; j < dist.size(); ++j)
      if (dist[j] >= 0 && mask.at(j)) {
        seen[j] = 1;
        ++sz;
      }
    sizes.push_back(sz);
  }
  std::sort(sizes.rbegin(), sizes.rend());
  std::ostringstream os;
  os << sizes.size() << " components with node counts";
  for (std::size_t s : sizes) os << " " << s;
  return os.str();
}

}  // namespace

BallChain plan_chain(const RegionMask& omega_rho, const Point& start,
                     const Point* target, double r) {
  const Grid& g = omega_rho.grid();
  if (r <= 0) throw precondition_error("plan_chain: r > 0 required");
  if (omega_rho.empty())
    throw precondition_error("plan_chain: Omega(rho) is empty");
  std::size_t s = snap_to_mask(omega_rho, start, "start");

  std::vector<int> dist;
  std::vector<std::int64_t> parent;
  mask_bfs(omega_rho, s, dist, parent);

  BallChain chain;
  chain.r = r;
  auto dist_pts = [&](const Point& a, const Point& b) {
    return std::sqrt(dist2(a, b, g.dim()));
  };

  if (target) {
    std::size_t t = snap_to_mask(omega_rho, *target, "target");
    if (dist[t] < 0)
      throw precondition_error(
          "plan_chain: Omega(rho) disconnected at radius " +
          std::to_string(r) + ": " + component_report(omega_rho));
    std::vector<std::size_t> path;
    for (std::int64_t cur = static_cast<std::int64_t>(t); cur >= 0;
         cur = parent[cur])
      path.push_back(static_cast<std::size_t>(cur));
    std::reverse(path.begin(), path.end());
    chain.centers.push_back(g.position(path.front()));
    chain.depth.push_back(0);
    chain.parent.push_back(-1);
    for (std::size_t i = 1; i < path.size(); ++i) {
      Point p = g.position(path[i]);
      bool last = i + 1 == path.size();
      double d = dist_pts(chain.centers.back(), p);
      if (d >= 0.95 * r || (last && d > 0)) {
        chain.max_hop = std::max(chain.max_hop, d);
        chain.parent.push_back(static_cast<int>(chain.centers.size()) - 1);
        chain.depth.push_back(chain.depth.back() + 1);
        chain.centers.push_back(p);
      }
    }
    return chain;
  }

  chain.cover_all = true;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (omega_rho.at(i) && dist[i] < 0)
      throw precondition_error(
          "plan_chain: Omega(rho) disconnected at radius " +
          std::to_string(r) + ": " + component_report(omega_rho));
  // visit nodes by BFS distance so the net grows outward from the start
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < g.num_nodes(); ++i)
    if (omega_rho.at(i) && dist[i] >= 0) order.push_back(i);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) {
                     return dist[a] < dist[b];
                   });
  for (std::size_t idx : order) {
    Point p = g.position(idx);
    double best = 1e300;
    int best_at = -1;
    for (std::size_t c = 0; c < chain.centers.size(); ++c) {
      double d = dist_pts(chain.centers[c], p);
      if (d < best) {
        best = d;
        best_at = static_cast<int>(c);
      }
    }
    if (chain.centers.empty()) {
      chain.centers.push_back(p);
      chain.depth.push_back(0);
      chain.parent.push_back(-1);
    } else if (best >= r) {
      chain.max_hop = std::max(chain.max_hop, best);
      chain.centers.push_back(p);
      chain.depth.push_back(chain.depth[best_at] + 1);
      chain.parent.push_back(best_at);
    }
  }
  return chain;
}

ChainBounds propagate_chain_log(double log_b0, double log_M, int steps,
                                double alpha, double C7) {
  if (!(alpha > 0 && alpha < 1))
    throw precondition_error("propagate_chain: alpha in (0,1) required");
  if (!(C7 > 0))
    throw precondition_error("propagate_chain: C7 > 0 required");
  if (steps < 0)
    throw precondition_error("propagate_chain: steps >= 0 required");
  ChainBounds out;
  out.log_bound.reserve(steps + 1);
  double lb = log_b0;
  const double lc = std::log(C7);
  out.log_bound.push_back(lb);
  for (int j = 0; j < steps; ++j) {
    lb = lc + alpha * log_M + (1.0 - alpha) * lb;
    out.log_bound.push_back(lb);
  }
  out.log_final = lb;
  out.final_bound = std::exp(lb);
  double decay = std::pow(1.0 - alpha, steps);
  out.log_closed_form = ((1.0 - decay) / alpha) * lc +
                        (1.0 - decay) * log_M + decay * log_b0;
  double scale = std::max({std::abs(out.log_final),
                           std::abs(out.log_closed_form), 1.0});
  if (std::abs(out.log_final - out.log_closed_form) > 1e-12 * scale)
    throw contract_error("propagate_chain: closed form disagrees with the recurrence");
  return out;
}

ChainBounds propagate_chain(double bound0, double M, const BallChain& chain,
                            double alpha, double C7) {
  if (!(bound0 > 0 && M > 0))
    throw precondition_error("propagate_chain: bounds must be positive");
  if (bound0 > M)
    throw precondition_error("propagate_chain: bound0 <= M required");
  return propagate_chain_log(std::log(bound0), std::log(M), chain.length(),
                             alpha, C7);
}

}  // namespace ucprop
