#include <cmath>
#include <stdexcept>

#include "flow_engine.hpp"
#include "fraflow/flow.hpp"

namespace fraflow {

double discrete_contraction_constant(double lipschitz, double omega, double viscosity, double tau) {
  const double kappa = lipschitz / (omega * viscosity);
  const double x = 2.0 * omega * tau;
  return kappa * x * std::exp(x) / std::expm1(x);
}

PerturbedResult solve_lipschitz_perturbed(const FlowProblem& problem, const SolverConfig& config,
                                          const LipschitzPerturbation& b) {
  if (problem.phi2) throw std::invalid_argument("solve_lipschitz_perturbed: phi2 must be empty");
  if (!b.apply) throw std::invalid_argument("solve_lipschitz_perturbed: missing operator");
  if (!(b.lipschitz >= 0.0)) throw std::invalid_argument("solve_lipschitz_perturbed: negative Lipschitz constant");
  detail::validate_problem(problem);

  PerturbedResult out;
  const double lv = config.viscosity;
  if (!(lv > 0.0)) {
    detail::StepperHooks hooks;
    hooks.eta = [&b](std::size_t, const Vector& x) -> Vector { return -b.apply(x); };
    out.flow = detail::run_stepper(problem, config, hooks);
    out.picard.iterations = 1;
    out.picard.converged = out.flow.status == Termination::completed;
    return out;
  }

  if (!(b.omega > 0.0)) throw std::invalid_argument("solve_lipschitz_perturbed: omega must be positive");
  PicardLog& log = out.picard;
  log.kappa = b.lipschitz / (b.omega * lv);
  log.kappa_discrete = discrete_contraction_constant(b.lipschitz, b.omega, lv, problem.grid.tau());
  if (!(log.kappa < 1.0) || !(log.kappa_discrete < 1.0))
    throw ContractionError("solve_lipschitz_perturbed: contraction constant " + std::to_string(log.kappa_discrete) +
                           " is not below 1");

  const auto nodes = static_cast<Eigen::Index>(problem.grid.nodes());
  const Metric& metric = problem.phi1->metric();
  Eigen::MatrixXd v = problem.u0.replicate(1, nodes);
  Eigen::MatrixXd bv(problem.u0.size(), nodes);
  double prev = -1.0;
  for (int k = 0; k < b.max_iterations; ++k) {
    for (Eigen::Index j = 0; j < nodes; ++j) bv.col(j) = b.apply(v.col(j));
    detail::StepperHooks hooks;
    hooks.eta = [&bv](std::size_t j, const Vector&) -> Vector { return -bv.col(static_cast<Eigen::Index>(j)); };
    out.flow = detail::run_stepper(problem, config, hooks);
    log.iterations = k + 1;
    if (out.flow.status != Termination::completed) return out;
    const Eigen::MatrixXd& u = out.flow.trajectory.states;

    double dist = 0.0, scale = 0.0;
    for (Eigen::Index j = 0; j < nodes; ++j) {
      const double w = std::exp(-b.omega * problem.grid.time(static_cast<std::size_t>(j)));
      dist = std::max(dist, w * metric.norm(u.col(j) - v.col(j)));
      scale = std::max(scale, metric.norm(u.col(j)));
    }
    log.distances.push_back(dist);
    const double floor = b.tolerance * (1.0 + scale);
    if (prev > 1e3 * floor) log.ratios.push_back(dist / prev);
    prev = dist;
    v = u;
    if (dist <= floor) {
      log.converged = true;
      return out;
    }
  }
  return out;
}

}  // namespace fraflow
