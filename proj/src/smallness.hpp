#pragma once

#include "dyadic.hpp"
#include "three_sphere.hpp"

namespace ucprop {

// Solution mass over the half-open node box of a dyadic cube.
double cube_mass(const SolutionField& u, const DyadicCube& cube);

// delta-goodness: int_cube u^2 <= delta |cube|.
bool good_test(const SolutionField& u, const DyadicCube& cube, double delta);

struct InitialFamilyReport {
  Cube q0;                 // selected side-r1 lattice cube, dyadic root
  CubeFamily family;       // maximal beta-filled cubes of E1 inside q0
  double e_measure = 0;
  double e1_measure = 0;   // {x in E : |u| <= sqrt(2) eps}
  double overlap_measure = 0;  // |E1 n Q0|
  double doubling_C = 0;
  double D = 0;            // a_n C^{gamma_n}
  double beta = 0;         // 1 - k C^{-n}, clamped into [1/2, 1)
  bool beta_clamped = false;
  double r1 = 0;           // requested side kappa * rho1
  double side = 0;         // snapped side h * 2^m
  std::size_t calibration_failures = 0;  // family cubes failing D eps^2 goodness
  bool family_was_empty = false;         // fell back to the root-only family
};

// Chebyshev selection of E1, lattice cube of maximal overlap, beta-filled
// family, per-cube goodness audit. E must sit inside Omega(rho1) and obey
// the mass precondition ||u||^2_{L2(E)} <= eps^2 |E|.
InitialFamilyReport select_initial_family(const SolutionField& u,
                                          const RegionMask& domain,
                                          const RegionMask& E, double rho1,
                                          double epsilon,
                                          const ConstantsProfile& profile);

struct GoodnessPropagation {
  int N = 0;
  double log_certified = 0;  // log(D^{max(1, 2N-1)} eps^2 |Q0|)
  double measured_mass = 0;  // int_{Q0} u^2
  bool dominated = false;
  IterationTrace trace;
};

GoodnessPropagation propagate_goodness(const SolutionField& u,
                                       const InitialFamilyReport& sel,
                                       double epsilon);

struct SmallBallReport {
  BallSpec ball{};
  int branch = 0;  // 1 = large doubling constant, 2 = cube route, 0 = trivial regime
  double doubling_C = 0;
  double log_branch_bound = 0;  // certified mass bound from the fired branch
  double log_envelope = 0;      // C9^2 |log eps|^{-2 sigma / H1} mass envelope
  double measured_mass = 0;
  bool dominated = false;    // branch bound >= measured
  bool envelope_ok = false;  // envelope >= branch bound
  InitialFamilyReport selection;   // populated on branch 2
  GoodnessPropagation propagation; // populated on branch 2
};

SmallBallReport find_small_ball(const SolutionField& u,
                                const RegionMask& domain, const RegionMask& E,
                                double rho1, double epsilon,
                                const ConstantsProfile& profile,
                                double eps0 = 0.1);

struct PropagationReport {
  double epsilon = 0;
  double rho = 0;
  SmallBallReport ball;
  int chain_length = 0;
  std::size_t chain_balls = 0;
  double alpha = 0;
  double c_step = 0;     // effective per-step constant C7 R / r
  double log_phi = 0;    // certified log bound for ||u||_{L2(Omega(rho))}
  double phi = 0;
  double c_exponent = 0; // (2 sigma / H1)(1 - alpha)^L
  double measured = 0;   // ||u||_{L2(Omega(rho))}
  bool dominated = false;
  double m_inflation = 0;  // excess of b0 over the rho-budget M, in the log
};

// Theorem-1 composition: small ball, chain through Omega(rho/2) to a net
// covering Omega(rho), log-domain propagation, covering sum. Requires
// ||u||_{L2(Omega)} <= 1.
PropagationReport phi_estimate(const SolutionField& u, const RegionMask& domain,
                               const RegionMask& E, double rho, double epsilon,
                               const ConstantsProfile& profile,
                               double eps0 = 0.1);

}  // namespace ucprop
