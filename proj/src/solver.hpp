#pragma once

#include <cstdint>
#include <string>

#include "coefficients.hpp"

namespace ucprop {

// Node values of a discrete solution on its grid.
struct SolutionField {
  Grid grid;
  std::vector<double> u;
};

struct SolveOptions {
  double tol = 1e-10;             // relative residual target
  int max_iter = 400;
  std::size_t direct_limit = 150000;  // node count cutoff for the LU path
  bool force_iterative = false;
};

struct SolveStats {
  std::string method;
  int iterations = 0;
  double rel_residual = 0.0;
};

// y = L x on the full lattice. Interior rows carry the flux-form operator
//   L u = -div(g grad u) + W1 . grad u + div(W2 u) + V u,
// boundary rows are identity. Face coefficients are arithmetic averages,
// first-order terms are centered.
void apply_operator(const CoefficientField& coef, const std::vector<double>& x,
                    std::vector<double>& y);

// Dirichlet solve: boundary entries of `boundary` are the data, `rhs` the
// interior right side (empty = 0). LU for small systems, multigrid
// preconditioned BiCGSTAB otherwise. Throws solver_error with diagnostics
// if the relative residual target is not met.
SolutionField solve_dirichlet(const CoefficientField& coef,
                              const std::vector<double>& boundary,
                              const std::vector<double>& rhs = {},
                              const SolveOptions& opts = {},
                              SolveStats* stats = nullptr);

struct ConvergenceReport {
  std::vector<int> sizes;
  std::vector<double> l2_error;
  std::vector<double> order;  // pairwise observed orders
  double fitted_order = 0.0;  // least squares slope of log err vs log h
};

// Grid refinement study against the closed-form solution
// u = prod_d sin(pi x_d) on the unit box. Smooth recipes only.
ConvergenceReport manufactured_convergence(const CoefficientRecipe& recipe,
                                           const std::vector<int>& sizes,
                                           int dim = 2,
                                           const SolveOptions& opts = {});

// Homogeneous solutions driven by random low-frequency boundary data,
// normalized to unit L2 norm over the box. Member k depends only on
// (seed, k), not on count.
std::vector<SolutionField> random_solution_ensemble(
    const CoefficientField& coef, int count, std::uint64_t seed,
    int freq_cap = 6, const SolveOptions& opts = {});

}  // namespace ucprop
