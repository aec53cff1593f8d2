#pragma once

#include "metrology.hpp"

namespace ucprop {

struct ThreeSphereRecord {
  Point center;
  double r, R, rho;
  double sigma;  // r^{-1} ||u||_{L2(B_r)}
  double M;      // rho^{-1} ||u||_{L2(B_rho)}
  double mid;    // R^{-1} ||u||_{L2(B_R)}
  double alpha;
  double needed_constant;  // mid / (M^alpha sigma^{1-alpha})
  bool floor_sigma = false;  // inner norm at quadrature floor (zero mass)
};

// alpha = 2 H0 log(2R/r) / (2 H0 log(2R/r) + log(rho / (2 b0 R))).
// Throws precondition_error naming whichever of 2r < R, 2 b0 R < rho fails.
double alpha_exponent(double r, double R, double rho,
                      const ConstantsProfile& profile);

// Measures all three normalized ball norms at x and the smallest constant
// making the interpolation inequality hold for this instance.
ThreeSphereRecord verify_three_sphere(const SolutionField& u,
                                      const RegionMask& domain, const Point& x,
                                      double r, double R, double rho,
                                      const ConstantsProfile& profile);

// Same observable with sup norms on the three balls.
ThreeSphereRecord linf_three_sphere(const SolutionField& u,
                                    const RegionMask& domain, const Point& x,
                                    double r, double R, double rho,
                                    const ConstantsProfile& profile);

struct BallChain {
  std::vector<Point> centers;
  std::vector<int> depth;    // tree distance from the start, depth[0] = 0
  std::vector<int> parent;   // parent[0] = -1
  double r = 0;
  double rho = 0;            // enclosing scale recorded by the caller
  bool cover_all = false;
  double max_hop = 0;        // largest consecutive / parent-child distance
  int length() const { return depth.empty() ? 0 : *std::max_element(depth.begin(), depth.end()); }
};

// Chain of ball centers spaced about r apart inside the mask. With a target,
// the chain follows a BFS shortest grid path; target == nullptr covers the
// whole component with a greedy r-net tree. Disconnection raises
// precondition_error listing component sizes.
BallChain plan_chain(const RegionMask& omega_rho, const Point& start,
                     const Point* target, double r);

struct ChainBounds {
  std::vector<double> log_bound;  // log b_j, j = 0..steps
  double log_final;
  double final_bound;             // exp(log_final), may underflow to 0
  double log_closed_form;
};

// b_{j+1} = C7 M^alpha b_j^{1-alpha} carried in the log domain so inputs
// like b0 = exp(-1e10) stay exact. The closed form is re-evaluated and must
// agree to 1e-12 relative in the log.
ChainBounds propagate_chain_log(double log_b0, double log_M, int steps,
                                double alpha, double C7);

// Convenience wrapper over the chain object; requires b0 <= M.
ChainBounds propagate_chain(double bound0, double M, const BallChain& chain,
                            double alpha, double C7);

}  // namespace ucprop
