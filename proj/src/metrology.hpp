#pragma once

#include "constants.hpp"
#include "solver.hpp"

namespace ucprop {

struct BallSpec {
  Point center;
  double r;
};

// L2 (p = 2, midpoint quadrature) or sup norm (p = inf) over a node set.
double norm_on_region(const SolutionField& u, const RegionMask& region,
                      double p);
double norm_on_ball(const SolutionField& u, const Point& center, double r,
                    double p);

// Centered differences inside, one-sided on the grid faces. Layout matches
// CoefficientField: dim components per node.
std::vector<double> gradient_field(const SolutionField& u);

// integral of u^2 over B_r(x) for every node x at once. Direct summation
// for small workloads, FFT convolution with the ball indicator otherwise.
// Both paths clip the ball at the grid box.
std::vector<double> ball_l2_all_centers(const SolutionField& u, double r);

// the two code paths, exposed so tests can cross-check them
std::vector<double> ball_l2_all_centers_direct(const SolutionField& u,
                                               double r);
std::vector<double> ball_l2_all_centers_fft(const SolutionField& u, double r);

struct CaccioppoliRecord {
  Point center;
  double r, a;
  double grad_norm, u_norm;
  double ratio;  // r * grad_norm / u_norm
  bool zero_denominator;
};

CaccioppoliRecord caccioppoli_ratio(const SolutionField& u, const Point& x,
                                    double r, double a);

struct DoublingRecord {
  Point argmax_center;
  double rho, r_small;       // rho and 2*kappa*rho
  double norm_large, norm_small;
  double max_ratio;          // max over scanned centers
  double constant;           // C0 * max_ratio^H1
  int stride;
  std::size_t centers_scanned;
};

// Eq-style global functional: C0 max over Omega(rho/2) of the ball-norm
// ratio at scales rho vs 2*kappa*rho, raised to H1.
DoublingRecord doubling_constant(const SolutionField& u,
                                 const RegionMask& domain, double rho,
                                 const ConstantsProfile& profile);

struct DoublingCheck {
  std::size_t checks = 0;
  std::size_t violations = 0;
  double worst_margin = 1e300;  // min over checks of C*int_small - int_large
};

// Verifies int_{B_2r} u^2 <= C int_{B_r} u^2 for centers in Omega(rho)
// and radii r = 2h, 3h, ... below kappa*rho.
DoublingCheck doubling_check(const SolutionField& u, const RegionMask& domain,
                             double rho, double constant,
                             const ConstantsProfile& profile);

struct MuckenhouptRecord {
  double lhs;  // int_subset u^2
  double rhs;  // (1/2) int_ball u^2
  bool pass;
};

MuckenhouptRecord muckenhoupt_check(const SolutionField& u,
                                    const BallSpec& ball,
                                    const RegionMask& subset,
                                    double alpha_weight);

struct ReverseHolderRecord {
  double p;
  double ratio;  // ||u||_p / ||u||_2 on the ball
  bool zero_denominator;
};

// p defaults to 2n/(n-2) = 6 at n = 3; 2D callers must pass p explicitly.
ReverseHolderRecord reverse_holder_ratio(const SolutionField& u,
                                         const BallSpec& ball, double p = 0);

// Smallest A with max_{B_r}|u|^2 <= A^2/|B_2r| int_{B_2r} u^2 on the sample.
double elliptic_estimate_constant(const std::vector<SolutionField>& ensemble,
                                  const std::vector<BallSpec>& balls);

}  // namespace ucprop
