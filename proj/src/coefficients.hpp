#pragma once

#include <map>
#include <string>
#include <vector>

#include "grid.hpp"

namespace ucprop {

// Recipe for the coefficient model
//   g  = g0 (1 + g_amp sin(g_freq x1)) I  (+ constant off-diagonal g_offdiag)
//   V  = v_smooth_amp cos(pi x1) cos(pi x2) + v_sing |x-x0|^{-v_p}
//   W1 = w1_smooth_amp (sin(pi x2), sin(pi x1), 0) + w1_sing |x-x0|^{-w_q} e1
//   W2 = w2_smooth_amp (0, cos(pi x1), 0)          + w2_sing |x-x0|^{-w_q} e2
// Singular profiles are capped at the grid scale: radii below h evaluate at h.
struct CoefficientRecipe {
  double g0 = 1.0;
  double g_amp = 0.0;
  double g_freq = 1.0;
  double g_offdiag = 0.0;  // constant g_12 entry (and g_13 = 0)
  double v_smooth_amp = 0.0;
  double v_sing = 0.0;
  double v_p = 1.5;  // must be < 2 so V is in L^{n/2+delta}
  double w1_smooth_amp = 0.0;
  double w1_sing = 0.0;
  double w2_smooth_amp = 0.0;
  double w2_sing = 0.0;
  double w_q = 0.5;  // must be < 1 so W is in L^{n+delta}
  Point x0{0.5, 0.5, 0.5};
  double lambda1_budget = 0.0;  // 0 disables the budget check
  double s = 4.0;               // integrability exponent, > n

  static CoefficientRecipe laplacian() { return {}; }
  static CoefficientRecipe smooth(double g_amp = 0.3, double v = 0.5,
                                  double w = 0.3);
  static CoefficientRecipe singular(double v = 1.0, double w = 0.5,
                                    Point x0 = {0.5, 0.5, 0.5});
};

// Discrete coefficient model with verified metadata. W1/W2 empty means zero;
// g_offdiag adds a constant symmetric off-diagonal block.
class CoefficientField {
 public:
  Grid grid;
  std::vector<double> g_iso;  // isotropic factor per node
  double g_offdiag = 0.0;
  std::vector<double> V;            // empty = 0
  std::vector<double> W1, W2;       // dim components per node, empty = 0
  double lambda = 1.0;              // verified ellipticity constant
  double Lambda0 = 0.0;             // measured discrete Lipschitz quotient
  double Lambda1 = 0.0;             // budget (0 = unset)
  double s = 4.0;
  double cap_radius = 0.0;          // singular cap, recorded provenance
  std::map<std::string, double> norms;  // discrete integrability norms

  bool has_V() const { return !V.empty(); }
  bool has_W1() const { return !W1.empty(); }
  bool has_W2() const { return !W2.empty(); }
  double g_at(std::size_t i) const { return g_iso[i]; }
};

// Builds the field, verifies ellipticity / Lipschitz / integrability
// invariants, throws precondition_error naming the offending quantity.
CoefficientField build_coefficients(const CoefficientRecipe& recipe,
                                    const Grid& grid);

// Discrete L^p norm (midpoint quadrature) of a scalar lattice function.
double lattice_lp_norm(const Grid& grid, const std::vector<double>& v,
                       double p);

}  // namespace ucprop
