#include "fraflow/flow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "flow_engine.hpp"
#include "fraflow/convolution.hpp"

namespace fraflow {

std::string to_string(Termination t) {
  switch (t) {
    case Termination::completed: return "completed";
    case Termination::blew_up: return "blew_up";
    case Termination::inner_nonconvergence: return "inner_nonconvergence";
  }
  return "unknown";
}

Eigen::VectorXd Trajectory::energies() const {
  Eigen::VectorXd e(static_cast<Eigen::Index>(diagnostics.size()));
  for (std::size_t j = 0; j < diagnostics.size(); ++j) e(static_cast<Eigen::Index>(j)) = diagnostics[j].energy;
  return e;
}

namespace detail {

void validate_problem(const FlowProblem& p) {
  if (!p.phi1) throw std::invalid_argument("flow: phi1 is required");
  if (p.u0.size() == 0) throw std::invalid_argument("flow: empty initial state");
  if (!p.u0.allFinite()) throw std::invalid_argument("flow: initial state is not finite");
  if (p.forcing.size() != 0 &&
      (p.forcing.rows() != p.u0.size() || p.forcing.cols() != static_cast<Eigen::Index>(p.grid.nodes())))
    throw std::invalid_argument("flow: forcing must be dim x (N+1)");
  if (!p.phi1->in_domain(p.u0)) throw std::invalid_argument("flow: u0 lies outside the domain of phi1");
}

namespace {

BlowUpReport make_report(const Trajectory& tr, std::size_t trigger_node, const std::string& trigger) {
  BlowUpReport r;
  r.last_node = tr.accepted() - 1;
  // Last node below the threshold; the crossing lies within one step after it.
  r.time_estimate = tr.grid.time(trigger_node > 0 ? trigger_node - 1 : 0);
  r.time_uncertainty = tr.grid.tau();
  r.trigger = trigger;
  const std::size_t n = tr.diagnostics.size();
  for (std::size_t i = n > 16 ? n - 16 : 0; i < n; ++i) r.growth_history.push_back(tr.diagnostics[i].sup_norm);
  return r;
}

}  // namespace

FlowResult run_stepper(const FlowProblem& problem, const SolverConfig& config, const StepperHooks& hooks) {
  validate_problem(problem);
  const TimeGrid& grid = problem.grid;
  const ConvWeights kw(problem.pair.k, grid);
  const double tau = grid.tau();
  const double c = kw.lag(0) / tau;
  const double lv = config.viscosity;
  if (!(lv >= 0.0)) throw std::invalid_argument("flow: viscosity must be nonnegative");
  if (!(c + lv / tau > 0.0)) throw std::invalid_argument("flow: the implicit diagonal vanishes (k = 0 needs viscosity)");
  const double mu = 1.0 / (c + lv / tau);
  const Functional& phi = *problem.phi1;
  const Metric& metric = phi.metric();

  const auto dim = problem.u0.size();
  const auto nodes = static_cast<Eigen::Index>(grid.nodes());

  FlowResult result;
  Trajectory& tr = result.trajectory;
  tr.grid = grid;
  tr.kernel = KernelTag{problem.pair.k.kind(), problem.pair.k.parameter()};
  tr.metric = metric;

  Eigen::MatrixXd u(dim, nodes), xi = Eigen::MatrixXd::Zero(dim, nodes), eta = Eigen::MatrixXd::Zero(dim, nodes);
  u.col(0) = problem.u0;
  std::vector<NodeDiagnostics> diag;
  diag.reserve(grid.nodes());

  auto diagnostics_for = [&](const Vector& x, double residual, int its) {
    NodeDiagnostics d;
    d.energy = phi.value(x);
    d.envelope = hooks.envelope ? hooks.envelope(x) : 0.0;
    d.norm = metric.norm(x);
    d.sup_norm = x.lpNorm<Eigen::Infinity>();
    d.residual = residual;
    d.inner_iterations = its;
    return d;
  };
  diag.push_back(diagnostics_for(problem.u0, 0.0, 0));

  auto finish = [&](Eigen::Index accepted) {
    tr.states = u.leftCols(accepted);
    tr.selection = xi.leftCols(accepted);
    tr.perturbation = eta.leftCols(accepted);
    tr.diagnostics = std::move(diag);
  };

  auto fail_inner = [&](Eigen::Index j, const std::string& what) {
    finish(j);
    const double last_sup = tr.diagnostics.back().sup_norm;
    if (last_sup > config.blowup_fraction * config.blowup_norm) {
      result.status = Termination::blew_up;
      result.blow_up = make_report(tr, static_cast<std::size_t>(j), "inner failure near blow-up: " + what);
    } else {
      result.status = Termination::inner_nonconvergence;
    }
    result.message = what;
    return result;
  };

  Vector hist(dim);
  for (Eigen::Index j = 1; j < nodes; ++j) {
    // History part of B_j: (1/tau) sum_{i<j} (b_{j-i} - b_{j-1-i}) (u_i - u0).
    hist.setZero();
    for (Eigen::Index i = 1; i < j; ++i) {
      const double wgt = kw.lag(static_cast<std::size_t>(j - i)) - kw.lag(static_cast<std::size_t>(j - 1 - i));
      if (wgt != 0.0) hist.noalias() += wgt * (u.col(i) - problem.u0);
    }
    hist /= tau;
    Vector base = c * problem.u0 - hist;
    if (lv > 0.0) base += (lv / tau) * u.col(j - 1);
    if (problem.forcing.size() != 0) base += problem.forcing.col(j);

    Vector x = u.col(j - 1);
    Vector eta_j = Vector::Zero(dim);
    ProxResult pr;
    int total_its = 0;
    try {
      if (!hooks.eta) {
        pr = phi.prox(mu, mu * base, config.inner);
        total_its = pr.iterations;
      } else if (!hooks.coupled) {
        eta_j = hooks.eta(static_cast<std::size_t>(j), x);
        pr = phi.prox(mu, mu * (base + eta_j), config.inner);
        total_its = pr.iterations;
      } else {
        double prev_inc = std::numeric_limits<double>::infinity();
        int growing = 0;
        bool converged = false;
        for (int it = 0; it < config.max_coupling_iterations; ++it) {
          eta_j = hooks.eta(static_cast<std::size_t>(j), x);
          pr = phi.prox(mu, mu * (base + eta_j), config.inner);
          total_its += pr.iterations;
          const double inc = metric.norm(pr.point - x);
          x = pr.point;
          if (!std::isfinite(inc)) break;
          if (inc <= config.coupling_tolerance * (1.0 + metric.norm(x))) {
            converged = true;
            break;
          }
          growing = inc > prev_inc ? growing + 1 : 0;
          if (growing >= 3) break;
          prev_inc = inc;
        }
        if (!converged) return fail_inner(j, "coupling iteration did not converge at node " + std::to_string(j));
      }
    } catch (const ProxError& e) {
      return fail_inner(j, e.what());
    }

    const Vector& uj = pr.point;
    if (!uj.allFinite()) {
      finish(j);
      result.status = Termination::blew_up;
      result.blow_up = make_report(tr, static_cast<std::size_t>(j), "non-finite state");
      result.message = "non-finite state at node " + std::to_string(j);
      return result;
    }
    u.col(j) = uj;
    xi.col(j) = base + eta_j - uj / mu;
    eta.col(j) = eta_j;
    diag.push_back(diagnostics_for(uj, pr.residual, total_its));

    const NodeDiagnostics& d = diag.back();
    std::string trigger;
    if (!std::isfinite(d.energy) || !std::isfinite(d.envelope)) trigger = "non-finite energy";
    else if (d.sup_norm > config.blowup_norm) trigger = "sup-norm threshold";
    else if (d.energy > config.blowup_energy) trigger = "energy threshold";
    if (!trigger.empty()) {
      finish(j + 1);
      result.status = Termination::blew_up;
      result.blow_up = make_report(tr, static_cast<std::size_t>(j), trigger);
      result.message = trigger + " at node " + std::to_string(j);
      return result;
    }
  }
  finish(nodes);
  result.status = Termination::completed;
  return result;
}

}  // namespace detail

FlowResult solve_dc_flow(const FlowProblem& problem, const SolverConfig& config) {
  detail::StepperHooks hooks;
  if (problem.phi2) {
    if (!(config.yosida_lambda > 0.0)) throw std::invalid_argument("solve_dc_flow: yosida_lambda must be positive");
    const Functional& phi2 = *problem.phi2;
    const double lam = config.yosida_lambda;
    const ProxOptions inner = config.inner;
    hooks.eta = [&phi2, lam, inner](std::size_t, const Vector& x) { return yosida(phi2, lam, x, inner).yosida; };
    hooks.envelope = [&phi2, lam, inner](const Vector& x) { return yosida(phi2, lam, x, inner).envelope; };
    hooks.coupled = config.coupling == Coupling::coupled;
  }
  return detail::run_stepper(problem, config, hooks);
}

FlowResult solve_viscous_flow(const FlowProblem& problem, const SolverConfig& config) {
  if (!(config.viscosity > 0.0)) throw std::invalid_argument("solve_viscous_flow: viscosity must be positive");
  return solve_dc_flow(problem, config);
}

}  // namespace fraflow
