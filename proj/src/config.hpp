#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coefficients.hpp"
#include "constants.hpp"

namespace ucprop {

// Parse or validation failure; `violations` lists every problem found, the
// what() string joins them.
struct config_error : std::runtime_error {
  std::vector<std::string> violations;
  explicit config_error(std::vector<std::string> v);
};

struct GridSpec {
  int dim = 2;
  int nodes = 257;  // per axis
  double lo = 0.0, hi = 1.0;

  Grid make() const;
};

struct EnsembleSpec {
  int count = 8;
  std::uint64_t seed = 1;
  int freq_cap = 6;
  // "random" (boundary-driven solves) or "harmonic:<k>" (exact homogeneous
  // harmonic polynomial of degree k, Laplacian oracle)
  std::string boundary = "random";
};

struct SweepSpec {
  std::vector<double> epsilons{1e-2, 1e-4, 1e-6, 1e-8, 1e-10};
  std::vector<double> radii;  // experiment-specific; validated at dispatch
  double rho = 0.1;
  double rho1 = 0.05;
  double gamma = 0.5;
  double beta = 0.05;
  double A = 1.0;
  double eps0 = 0.1;
  std::vector<int> grids{17, 33, 65};  // convergence study sizes
};

struct ScenarioConfig {
  std::string experiment = "solve";
  std::string out_dir = "out";
  bool quiet = false;
  GridSpec grid;
  std::string coefficient_preset = "laplacian";
  CoefficientRecipe recipe;
  EnsembleSpec ensemble;
  ConstantsProfile constants;
  SweepSpec sweep;
  double attrition = 0.05;
  int dyadic_rank = 3;        // dyadic experiment: max cube rank
  int dyadic_families = 200;  // families sampled per rank class
};

// Strict JSON parse: unknown keys are errors, every violation is reported
// (not just the first), paths name the offending key.
ScenarioConfig parse_config(const std::string& text);

// Canonical serialization: fixed key order, 17 significant digits. Parsing
// the output reproduces the config exactly.
std::string serialize_config(const ScenarioConfig& config);

ScenarioConfig load_config(const std::string& path);

}  // namespace ucprop
