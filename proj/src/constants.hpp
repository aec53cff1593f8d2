#pragma once

#include "errors.hpp"

namespace ucprop {

// All free constants of the estimates, treated as configuration. The theory
// proves existence of admissible values; the suites fit or validate them.
struct ConstantsProfile {
  double H0 = 1.0;      // Carleman weight slope bound, >= 1
  double b0 = 1.0;      // weight comparison radius factor, >= 1
  double tau0 = 0.0;    // minimal Carleman parameter
  double kappa = 0.125; // doubling radius fraction, in (0, 1/4)
  double rho0 = 1.0;    // admissible scale ceiling
  double a_n = 1.0;     // goodness inflation prefactor
  double gamma_n = 1.0; // goodness inflation exponent
  double k = 1.0;       // filled-fraction formula coefficient (eq-43 shape)
  double sigma = 0.25;  // smallness exponent, in (0, 1/n)
  double C[11] = {1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1};  // C0..C10
  double A = 1.0;       // elliptic estimate constant
  double delta = 0.5;
  double beta = 0.5;
  double gamma = 0.5;

  double H1() const { return 5.0 * H0; }

  void validate(int n) const {
    if (H0 < 1) throw precondition_error("constants: H0 >= 1 required");
    if (b0 < 1) throw precondition_error("constants: b0 >= 1 required");
    if (tau0 < 0) throw precondition_error("constants: tau0 >= 0 required");
    if (!(kappa > 0 && kappa < 0.25))
      throw precondition_error("constants: kappa < 1/4 required");
    if (rho0 <= 0) throw precondition_error("constants: rho0 > 0 required");
    if (!(sigma > 0 && sigma * n < 1))
      throw precondition_error("constants: sigma < 1/n required");
    for (double c : C)
      if (c <= 0) throw precondition_error("constants: C_i > 0 required");
    if (A <= 0) throw precondition_error("constants: A > 0 required");
    for (double v : {delta, beta, gamma})
      if (!(v > 0 && v < 1))
        throw precondition_error("constants: delta, beta, gamma in (0,1)");
  }
};

}  // namespace ucprop
