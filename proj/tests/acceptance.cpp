// End-to-end acceptance gate: each check prints one pass/fail line and the
// binary exits nonzero if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "experiments.hpp"
#include "growth.hpp"

using namespace ucprop;
namespace fs = std::filesystem;

namespace {

std::string g_root;

std::string outdir(const std::string& leaf) { return g_root + "/" + leaf; }

struct Check {
  bool pass = true;
  std::string note;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!note.empty()) note += "; ";
      note += what;
    }
  }
};

ArtifactBundle run_json(const std::string& json_text, const std::string& dir) {
  ScenarioConfig cfg = parse_config(json_text);
  cfg.out_dir = outdir(dir);
  cfg.quiet = true;
  return run_experiment(cfg);
}

bool assertion_pass(const ArtifactBundle& b, const std::string& name) {
  for (const auto& a : b.assertions)
    if (a.name == name) return a.pass;
  return false;
}

double summary_num(const ArtifactBundle& b, const std::string& key) {
  return b.summary.contains(key) ? b.summary.at(key).get<double>() : -1.0;
}

SolutionField analytic(const Grid& g, std::function<double(const Point&)> f) {
  SolutionField u;
  u.grid = g;
  u.u.resize(g.num_nodes());
  for (std::size_t i = 0; i < g.num_nodes(); ++i) u.u[i] = f(g.position(i));
  return u;
}

double harmonic2d(int k, const Point& p) {  // Re (x + iy)^k
  double re = 1, im = 0;
  for (int j = 0; j < k; ++j) {
    double r2 = re * p[0] - im * p[1];
    im = re * p[1] + im * p[0];
    re = r2;
  }
  return re;
}

double harmonic3d(int k, const Point& p) {
  switch (k) {
    case 0: return 1.0;
    case 1: return p[0];
    case 2: return p[0] * p[0] - p[1] * p[1];
    default: return p[0] * p[0] * p[0] - 3 * p[0] * p[1] * p[1];
  }
}

// ---- criteria -------------------------------------------------------------

Check covering_lemma_oracle() {
  Check c;
  auto b = run_json(R"({"experiment": "dyadic", "dyadic_rank": 3,
                        "dyadic_families": 3334})",
                    "c1");
  c.require(summary_num(b, "families") >= 10000, "fewer than 10^4 families");
  c.require(summary_num(b, "bruteforce_mismatches") == 0,
            "brute-force mismatch");
  c.require(summary_num(b, "dichotomy_failures") == 0, "dichotomy failure");
  return c;
}

Check solver_convergence() {
  Check c;
  auto b = run_json(R"({"experiment": "convergence",
                        "grid": {"dim": 3, "nodes": 17},
                        "coefficients": {"preset": "smooth"},
                        "sweep": {"grids": [17, 33, 65]}})",
                    "c2");
  double order = summary_num(b, "fitted_order");
  c.require(order >= 1.8,
            "observed order " + std::to_string(order) + " < 1.8");
  return c;
}

Check interior_gradient_bound() {
  Check c;
  // closed form: u = x1 on a ball about the origin, a = 1/2, n = 3 gives
  // ratio a^{3/2} sqrt(5) = sqrt(5/8)
  Grid g(3, {129, 129, 129}, 1.0 / 64, {-1, -1, -1});
  auto u = analytic(g, [](const Point& p) { return p[0]; });
  auto rec = caccioppoli_ratio(u, {0, 0, 0}, 0.25, 0.5);
  double expected = std::sqrt(5.0 / 8.0);
  c.require(std::abs(rec.ratio - expected) / expected < 0.03,
            "closed-form ratio " + std::to_string(rec.ratio) + " off sqrt(5/8)");

  auto b = run_json(R"({"experiment": "caccioppoli",
                        "coefficients": {"preset": "singular"},
                        "ensemble": {"count": 50}})",
                    "c3");
  c.require(assertion_pass(b, "caccioppoli_holdout"), "holdout violation");
  c.require(b.member_failures == 0, "ensemble member failed");
  return c;
}

Check ball_mass_doubling() {
  Check c;
  // oracle: degree-k homogeneous harmonics double L2 ball mass by 2^{k+3/2}
  Grid g(3, {129, 129, 129}, 1.0 / 64, {-1, -1, -1});
  for (int k = 0; k <= 3; ++k) {
    auto u = analytic(g, [k](const Point& p) { return harmonic3d(k, p); });
    double ratio = norm_on_ball(u, {0, 0, 0}, 0.4, 2.0) /
                   norm_on_ball(u, {0, 0, 0}, 0.2, 2.0);
    double expected = std::pow(2.0, k + 1.5);
    if (std::abs(ratio - expected) / expected >= 0.05)
      c.require(false, "degree " + std::to_string(k) + " ratio " +
                           std::to_string(ratio) + " off 2^{k+3/2}");
  }

  auto b = run_json(R"({"experiment": "doubling",
                        "coefficients": {"preset": "singular"},
                        "ensemble": {"count": 50}})",
                    "c4");
  c.require(summary_num(b, "total_violations") == 0, "doubling violation");
  c.require(b.member_failures == 0, "ensemble member failed");
  return c;
}

Check three_ball_interpolation() {
  Check c;
  // log-convexity oracle: homogeneous harmonics make log ||u||_{L2(B_r)}
  // exactly linear in log r, so the middle norm is the geometric mean
  Grid g(2, {513, 513, 1}, 2.0 / 512, {-1, -1, 0});
  for (int k = 0; k <= 3; ++k) {
    auto u = analytic(g, [k](const Point& p) { return harmonic2d(k, p); });
    double lo = norm_on_ball(u, {0, 0, 0}, 0.1, 2.0);
    double mid = norm_on_ball(u, {0, 0, 0}, 0.2, 2.0);
    double hi = norm_on_ball(u, {0, 0, 0}, 0.4, 2.0);
    double predicted = std::sqrt(lo * hi);
    if (std::abs(mid - predicted) / predicted >= 0.05)
      c.require(false, "degree " + std::to_string(k) + " not log-convex");
  }

  auto b = run_json(R"({"experiment": "three-sphere",
                        "grid": {"nodes": 301, "lo": -1.0, "hi": 1.0},
                        "coefficients": {"preset": "singular"},
                        "ensemble": {"count": 100},
                        "constants": {"kappa": 0.24},
                        "sweep": {"rho": 0.2, "radii": [0.014, 0.045]}})",
                    "c5");
  c.require(summary_num(b, "holdout_violations") == 0, "holdout violation");
  c.require(b.member_failures == 0, "ensemble member failed");

  ConstantsProfile prof;
  c.require(std::abs(alpha_exponent(0.1, 0.2, 1.6, prof) - 2.0 / 3.0) < 1e-12,
            "alpha spot value 2/3");
  c.require(std::abs(alpha_exponent(0.05, 0.2, 1.6, prof) - 0.75) < 1e-12,
            "alpha spot value 3/4");
  return c;
}

Check weight_nondegeneracy() {
  Check c;
  auto b = run_json(R"({"experiment": "muckenhoupt",
                        "coefficients": {"preset": "singular"},
                        "ensemble": {"count": 50}})",
                    "c6");
  c.require(summary_num(b, "violations") == 0, "mass-capture violation");
  c.require(b.member_failures == 0, "ensemble member failed");
  return c;
}

Check l2_propagation_envelope() {
  Check c;
  auto b = run_json(R"({"experiment": "propagate-l2"})", "c7");
  c.require(summary_num(b, "dominance_violations") == 0,
            "certified bound below measured norm");
  c.require(summary_num(b, "fit_slope") < 0, "envelope slope not negative");
  c.require(summary_num(b, "fit_r2") >= 0.95, "envelope fit R2 < 0.95");
  return c;
}

Check supnorm_growth() {
  Check c;
  // (a) the growth claim holds on hypothesis-satisfying instances
  {
    Grid g(2, {257, 257, 1}, 1.0 / 128, {-1, -1, 0});
    const Point xs{0, 0, 0}, ys{0.015625, 0, 0};
    auto u = analytic(g, [](const Point& p) {
      double d = std::sqrt(dist2(p, {0.015625, 0, 0}, 2));
      return 0.2 * std::max(0.0, 1.0 - d / 0.03);
    });
    RegionMask f(g);
    for (std::size_t i : ball_mask(g, xs, 0.1).nodes())
      if (std::sqrt(dist2(g.position(i), ys, 2)) >= 0.031) f.set(i, true);
    for (double gamma : {0.3, 0.5, 0.7}) {
      auto rec = growth_claim_check(u, f, xs, 0.1, ys, gamma, 0.1, 0.01, 1.0);
      if (!rec.pass)
        c.require(false,
                  "claim failed at gamma " + std::to_string(gamma));
      double d_ref = std::sqrt((0.01 - 1e-4 * gamma) / (1 - gamma));
      if (std::abs(rec.d_bound - d_ref) > 1e-12)
        c.require(false, "d-bound off the closed form");
    }
  }
  // (b) quadrature of the thinning integral against the disc closed form
  {
    Grid g(2, {513, 513, 1}, 2.2 / 512, {-1.1, -1.1, 0});
    RegionMask f1 = ball_mask(g, {0, 0, 0}, 0.5);
    double v = marcinkiewicz_integral(f1, {0, 0, 0});
    double expected = 2 * M_PI * (std::log(2.0) - 0.5);
    c.require(std::abs(v - expected) / expected < 0.02,
              "thinning integral " + std::to_string(v) + " off closed form");
  }
  // (c) scale counting is exact on synthetic tables
  {
    GrowthTrace tr;
    tr.A = 1.0;
    tr.beta = 0.5;
    tr.epsilon = 0.1;
    tr.M1 = 1.0;
    tr.levels = {1, 1023};
    tr.h_level = {0.0, 0.0};
    tr.r_seq = {std::ldexp(1.0, -1024) * 1.5, 0.5};
    tr.K = 2;
    auto rep = counting_check(tr, 2);
    c.require(rep.intervals.size() == 2 && rep.intervals[1].required == 2 &&
                  rep.intervals[1].found == 1 && rep.interval_failures == 1 &&
                  rep.partial,
              "deep-interval census wrong");
    tr.levels = {3, 4};
    tr.h_level = {1.0, 1.0};
    tr.r_seq.clear();
    tr.K = 0;
    auto rep2 = counting_check(tr, 2);
    c.require(rep2.block_checks == 1 && rep2.block_failures == 1 &&
                  !rep2.partial && rep2.k_bound_ok,
              "bad-block census wrong");
    tr.levels = {1};
    tr.h_level = {1.0};
    tr.r_seq = std::vector<double>(40, 0.5);
    tr.K = 40;
    c.require(!counting_check(tr, 2).k_bound_ok, "K bound not enforced");
  }
  // (d) the sup-norm envelope sweep dominates with sublinear exponent
  auto b = run_json(R"({"experiment": "growth-linf",
                        "grid": {"nodes": 257, "lo": -1.0, "hi": 1.0}})",
                    "c8");
  c.require(summary_num(b, "dominance_violations") == 0,
            "envelope below measured sup");
  c.require(summary_num(b, "mu") < 1, "mu >= 1");
  c.require(summary_num(b, "mu_r2") >= 0.9, "mu fit R2 < 0.9");
  return c;
}

std::map<std::string, std::string> dir_bytes(const std::string& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    std::ifstream f(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << f.rdbuf();
    out[e.path().filename().string()] = ss.str();
  }
  return out;
}

Check rerun_determinism() {
  Check c;
  const std::string json = R"({"experiment": "caccioppoli",
                               "ensemble": {"count": 6, "seed": 7}})";
  std::string dir = outdir("c9");
  run_json(json, "c9");
  auto first = dir_bytes(dir);
  fs::remove_all(dir);
  run_json(json, "c9");
  auto second = dir_bytes(dir);
  c.require(first.size() >= 4, "too few artifacts");
  c.require(first.size() == second.size(), "artifact sets differ");
  for (const auto& [name, bytes] : first) {
    auto it = second.find(name);
    if (it == second.end() || it->second != bytes)
      c.require(false, name + " not byte-identical");
  }
  return c;
}

struct Criterion {
  const char* label;
  Check (*fn)();
  double budget_s;  // 0 = untimed
};

const Criterion kCriteria[] = {
    {"covering-lemma oracle equivalence", covering_lemma_oracle, 120},
    {"manufactured-solution convergence", solver_convergence, 300},
    {"interior gradient bound", interior_gradient_bound, 0},
    {"ball-mass doubling", ball_mass_doubling, 0},
    {"three-ball interpolation", three_ball_interpolation, 0},
    {"weight non-degeneracy", weight_nondegeneracy, 0},
    {"L2 propagation envelope", l2_propagation_envelope, 0},
    {"sup-norm growth analysis", supnorm_growth, 0},
    {"re-run determinism", rerun_determinism, 0},
};

}  // namespace

int main() {
  g_root = (fs::temp_directory_path() / "ucprop_acceptance").string();
  fs::remove_all(g_root);
  fs::create_directories(g_root);

  int failures = 0;
  int idx = 0;
  for (const auto& cr : kCriteria) {
    ++idx;
    auto t0 = std::chrono::steady_clock::now();
    Check c;
    try {
      c = cr.fn();
    } catch (const std::exception& e) {
      c.pass = false;
      c.note = std::string("exception: ") + e.what();
    }
    double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    if (cr.budget_s > 0 && secs > cr.budget_s) {
      c.pass = false;
      c.note += (c.note.empty() ? "" : "; ") + std::string("over budget");
    }
    std::printf("[%d/9] %-36s %s (%.1f s)%s%s\n", idx, cr.label,
                c.pass ? "PASS" : "FAIL", secs, c.note.empty() ? "" : " -- ",
                c.note.c_str());
    std::fflush(stdout);
    if (!c.pass) ++failures;
  }
  fs::remove_all(g_root);
  if (failures) std::printf("%d of 9 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
