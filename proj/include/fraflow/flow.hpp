#pragma once

#include <Eigen/Dense>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "fraflow/functional.hpp"
#include "fraflow/kernel.hpp"
#include "fraflow/time_grid.hpp"

namespace fraflow {

enum class Coupling { semi_implicit, coupled };

struct SolverConfig {
  double yosida_lambda = 1e-3;  // regularization of phi2
  double viscosity = 0.0;
  Coupling coupling = Coupling::semi_implicit;
  ProxOptions inner{};
  int max_coupling_iterations = 50;
  double coupling_tolerance = 1e-10;
  double blowup_norm = 1e6;
  double blowup_energy = 1e12;
  // An inner failure counts as blow-up once the last sup-norm exceeds this fraction of blowup_norm.
  double blowup_fraction = 1e-3;
};

/// k-kernel B(u - u0) + d phi1(u) - A_lambda phi2(u) + viscosity u' = f on a uniform grid.
struct FlowProblem {
  std::shared_ptr<const Functional> phi1;
  std::shared_ptr<const Functional> phi2;  // null: no perturbation
  SoninePair pair = rl_pair(0.5);
  TimeGrid grid{1.0, 1};
  Vector u0;
  Eigen::MatrixXd forcing;  // dim x (N+1); empty means f = 0
};

struct NodeDiagnostics {
  double energy = 0.0;    // phi1(u_j)
  double envelope = 0.0;  // phi2_lambda(u_j)
  double norm = 0.0;      // metric norm
  double sup_norm = 0.0;
  double residual = 0.0;  // prox optimality residual
  int inner_iterations = 0;
};

struct KernelTag {
  KernelKind kind = KernelKind::riemann_liouville;
  double parameter = 0.0;
};

struct Trajectory {
  TimeGrid grid{1.0, 1};
  KernelTag kernel;
  Metric metric;
  Eigen::MatrixXd states;     // dim x accepted nodes; column 0 is u0
  Eigen::MatrixXd selection;  // xi_j in d phi1(u_j), column 0 unused (zero)
  Eigen::MatrixXd perturbation;
  std::vector<NodeDiagnostics> diagnostics;

  std::size_t accepted() const { return static_cast<std::size_t>(states.cols()); }
  Eigen::VectorXd energies() const;
};

enum class Termination { completed, blew_up, inner_nonconvergence };
std::string to_string(Termination t);

struct BlowUpReport {
  std::size_t last_node = 0;  // last finite accepted node
  double time_estimate = 0.0;
  double time_uncertainty = 0.0;
  std::string trigger;
  std::vector<double> growth_history;  // sup-norms of the last accepted nodes
};

struct FlowResult {
  Termination status = Termination::completed;
  Trajectory trajectory;
  std::optional<BlowUpReport> blow_up;
  std::string message;
};

FlowResult solve_dc_flow(const FlowProblem& problem, const SolverConfig& config);

/// Same scheme; rejects viscosity <= 0.
FlowResult solve_viscous_flow(const FlowProblem& problem, const SolverConfig& config);

/// Globally Lipschitz B with |B(x) - B(y)| <= lipschitz |x - y|; the equation
/// reads B(u - u0) + d phi1(u) + B(u) = f.
struct LipschitzPerturbation {
  std::function<Vector(const Vector&)> apply;
  double lipschitz = 0.0;
  double omega = 1.0;  // weight exp(-omega t) of the Picard norm
  int max_iterations = 200;
  double tolerance = 1e-12;
};

struct PicardLog {
  std::vector<double> distances;  // weighted sup distance between consecutive iterates
  std::vector<double> ratios;
  double kappa = std::numeric_limits<double>::infinity();
  double kappa_discrete = std::numeric_limits<double>::infinity();
  int iterations = 0;
  bool converged = false;
};

struct PerturbedResult {
  FlowResult flow;
  PicardLog picard;
};

class ContractionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// viscosity > 0: whole-trajectory Picard iteration, rejected up front unless the
/// contraction constant (and its discrete version) is below one.
/// viscosity = 0: one semi-implicit sweep with B evaluated at the previous node.
PerturbedResult solve_lipschitz_perturbed(const FlowProblem& problem, const SolverConfig& config,
                                          const LipschitzPerturbation& b);

/// kappa * 2 w tau e^{2 w tau} / (e^{2 w tau} - 1) with kappa = L / (w viscosity).
double discrete_contraction_constant(double lipschitz, double omega, double viscosity, double tau);

}  // namespace fraflow
