#pragma once

#include <functional>

#include "fraflow/flow.hpp"

namespace fraflow::detail {

/// Perturbation hooks for the implicit stepper. `eta(j, x)` returns eta_j given
/// the argument x (u_{j-1} in semi-implicit mode, the current iterate when
/// coupled). `envelope(u)` feeds the diagnostics column.
struct StepperHooks {
  std::function<Vector(std::size_t, const Vector&)> eta;
  std::function<double(const Vector&)> envelope;
  bool coupled = false;
};

FlowResult run_stepper(const FlowProblem& problem, const SolverConfig& config, const StepperHooks& hooks);

void validate_problem(const FlowProblem& problem);

}  // namespace fraflow::detail
