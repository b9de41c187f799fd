#pragma once

#include <string>
#include <vector>

#include "fraflow/flow.hpp"
#include "fraflow/plaplace.hpp"
#include "fraflow/regime.hpp"

namespace fraflow {

enum class ProfileKind { zero, sine, plateau };

ProfileKind profile_from_string(const std::string& name);
std::string to_string(ProfileKind k);

/// amplitude * shape(x); `ramp` multiplies by t (forcing only).
struct Profile {
  ProfileKind kind = ProfileKind::zero;
  double amplitude = 0.0;
  bool ramp = false;
};

/// sin(pi x) (product over axes) or a plateau equal to 1 on [1/4, 3/4]^d with linear ramps.
Vector profile_shape(const Grid& grid, ProfileKind kind);

struct PdeExperiment {
  double p = 2.0;
  double q = 4.0;
  double alpha = 0.5;
  Grid grid{1, 32};
  Profile initial{ProfileKind::sine, 1.0, false};
  Profile forcing{};
  double horizon = 1.0;
  std::size_t steps = 512;
  int space_dimension = 0;  // for the exponent arithmetic; 0 means grid.dim
};

struct ExperimentResult {
  RegimeReport regime;
  Termination status = Termination::completed;
  double blowup_time = 0.0;  // t* when status == blew_up
  double time_uncertainty = 0.0;
  double sup_energy = 0.0;    // sup_j phi1(u_j)
  double energy_bound = 0.0;  // E_T = phi1(u0) + sup_j (ell * |f|^2)(t_j)
  double energy_ratio = 0.0;  // sup_energy / E_T
  std::size_t accepted = 0;
  FlowResult flow;
};

FlowProblem build_problem(const PdeExperiment& pde);
ExperimentResult run_experiment(const PdeExperiment& pde, const SolverConfig& config);

/// phi1(u0) + sup_j (ell * |f|^2)(t_j), ell-convolution by product integration.
double energy_budget(const FlowProblem& problem);

struct BisectionResult {
  bool ok = false;
  std::string message;
  double lower = 0.0;  // completes
  double upper = 0.0;  // blows up
  int runs = 0;
  std::vector<std::pair<double, Termination>> log;
};

/// Shrinks [A_lo, A_hi] (A_lo completes, A_hi blows up) until A_hi/A_lo <= ratio.
BisectionResult amplitude_bisection(const PdeExperiment& pde, double a_lo, double a_hi, const SolverConfig& config,
                                    int budget = 40, double ratio = 1.1);

}  // namespace fraflow
