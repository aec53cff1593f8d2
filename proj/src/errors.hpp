#pragma once

#include <stdexcept>
#include <string>

namespace ucprop {

// Input violates a documented precondition of an operation.
struct precondition_error : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// The grid cannot resolve the requested geometric scale.
struct resolution_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Iterative solver failed to reach the requested tolerance.
struct solver_error : std::runtime_error {
  std::string diagnostics;
  solver_error(const std::string& msg, std::string diag)
      : std::runtime_error(msg), diagnostics(std::move(diag)) {}
};

// Internal contract broken (combinatorial bug, budget exceeded).
struct contract_error : std::logic_error {
  using std::logic_error::logic_error;
};

}  // namespace ucprop
