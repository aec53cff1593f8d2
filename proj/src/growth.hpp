#pragma once

#include "coefficients.hpp"
#include "smallness.hpp"

namespace ucprop {

struct SphereMaxProfile {
  Point x0;
  double shell_width = 0;      // 2h, the shell half-width is h
  std::vector<double> radius;  // dyadic: r_max, r_max/2, ..., >= 4h
  std::vector<double> m;       // max |u| over the shell at radius[i]
};

// m(r) = max over the shell { ||x-x0| - r| <= h } of |u|, dyadic radii.
SphereMaxProfile sphere_max_profile(const SolutionField& u, const Point& x0,
                                    double r_max);

struct ClaimRecord {
  double sup = 0;      // sup over B_{r*}(x*)
  double ratio = 0;    // sup / c
  double d_bound = 0;  // sqrt((c^2 - A^2 eps^2 gamma) / ((1-gamma) A^2))
  double beta = 0;     // implied growth: 1/(A sqrt(2(1-gamma))) - 1
  bool pass = false;   // sup >= d_bound
};

// The (1+beta)-growth claim: under the stated hypotheses the sup on the
// ball must exceed the elliptic-estimate lower bound. Hypothesis failures
// throw precondition_error naming the failed hypothesis; a failed bound is
// returned as pass = false (constants calibration, not a caller error).
ClaimRecord growth_claim_check(const SolutionField& u, const RegionMask& f,
                               const Point& x_star, double r_star,
                               const Point& y_star, double gamma, double c,
                               double epsilon, double A);

// exp(-B |log eps|^{(n+1)/(n+2)}), the first-crossing radius floor.
double r0_lower_bound(double epsilon, double B, int n);

struct GrowthTrace {
  Point x0;
  double A = 1, beta = 0, epsilon = 0;
  double r_max = 0;
  double M1 = 0;  // max |u| over B_{r_max}(x0)
  double r0 = 0;  // r(2 A eps); r_max if never crossed
  bool r0_crossed = false;
  std::vector<double> radius;  // dense shells, step h, from 4h
  std::vector<double> m;
  std::vector<double> r_seq;   // r_j = r((1+beta)^j 2 A eps)
  int K = 0;                   // number of realized r_j
  std::vector<double> h_radius, h_of_r;  // h(r) samples around x0
  std::vector<int> levels;               // dyadic levels with h_l data
  std::vector<double> h_level;
};

// r(M) = min tabulated r with m(r) >= M; +inf if the table never crosses.
double first_crossing(const GrowthTrace& trace, double M);

GrowthTrace build_growth_trace(const SolutionField& u, const RegionMask& f1,
                               const Point& x0, double r_max, double A,
                               double beta, double epsilon);

struct TraceInvariants {
  std::size_t checks = 0;      // consecutive r_j pairs tested
  std::size_t violations = 0;  // r_{j+1} > r_j + 3 h(r_j)
  int l1 = -1;                 // tail level with h_l 2^l < 1/12 beyond it
  bool h_tail_ok = true;       // h(r) < r/6 for r < 2^{-l1}
};

TraceInvariants trace_invariants(const GrowthTrace& trace);

struct CountingReport {
  std::vector<std::array<int, 3>> blocks;  // (N, good count, block size)
  std::size_t block_checks = 0;
  std::size_t block_failures = 0;  // full blocks with < 2^{N-1} good levels
  struct Interval {
    int l;
    int required;  // floor(l^{1/(n+1)} / 4)
    int found;
    bool pass;
  };
  std::vector<Interval> intervals;
  std::size_t interval_failures = 0;
  int K = 0;
  double a_fit = 0;         // K log(1+beta) / |log eps|
  bool k_bound_ok = false;  // 2 A eps (1+beta)^{K-1} <= max(1, M1)
  bool partial = false;     // some dyadic block only partially resolvable
};

CountingReport counting_check(const GrowthTrace& trace, int n);

struct RescaledProblem {
  SolutionField v;        // v(y) = u(x0 + r y) on [-1,1]^n
  CoefficientField coef;  // g copied, V scaled by r^2, W by r
  Point x0;
  double r = 0;
};

// Exact lattice rescaling: r must be a whole number of cells and x0 a node.
RescaledProblem rescale_to_unit(const SolutionField& u,
                                const CoefficientField& cf, const Point& x0,
                                double r);

struct LinfEnvelope {
  Point x0;                   // selected density point
  double r1_density = 0;      // density radius used for F1
  double marcinkiewicz = 0;   // integral at x0
  double r0_bound = 0;        // certified first-crossing floor
  int steps_grow = 0;         // doublings from r0_bound up to kappa/16
  int steps_cover = 0;        // chain depth of the B_{1/2} cover
  std::size_t cover_balls = 0;
  double alpha_grow = 0, alpha_cover = 0;
  double log_bound = 0;       // certified log sup bound on B_{1/2}
  double bound = 0;
  double measured = 0;        // max |u| over B_{1/2} nodes
  bool dominated = false;
};

// Theorem-2 composition on the unit-ball geometry: density subset of F0,
// Marcinkiewicz point, r0 floor, sup-norm three-sphere doubling chain to
// kappa/16, then a covering net of B_{1/2}. Requires sup |u| <= 1, F0 a
// subset of B_{1/2} with more than half its node measure, |u| <= eps on F0.
LinfEnvelope linf_envelope(const SolutionField& u, const RegionMask& f0,
                           double epsilon, const ConstantsProfile& profile);

}  // namespace ucprop
