#include "fraflow/experiment.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "fraflow/convolution.hpp"

namespace fraflow {

ProfileKind profile_from_string(const std::string& name) {
  if (name == "zero") return ProfileKind::zero;
  if (name == "sine") return ProfileKind::sine;
  if (name == "plateau") return ProfileKind::plateau;
  throw std::invalid_argument("unknown profile '" + name + "'");
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::zero: return "zero";
    case ProfileKind::sine: return "sine";
    case ProfileKind::plateau: return "plateau";
  }
  return "unknown";
}

Vector profile_shape(const Grid& grid, ProfileKind kind) {
  auto axis = [&](double x) {
    switch (kind) {
      case ProfileKind::zero: return 0.0;
      case ProfileKind::sine: return std::sin(std::numbers::pi * x);
      case ProfileKind::plateau: return std::min(1.0, 4.0 * std::min(x, 1.0 - x));
    }
    return 0.0;
  };
  Vector v(grid.size());
  const int m = grid.points;
  for (Eigen::Index k = 0; k < v.size(); ++k) {
    const int i = static_cast<int>(k % m);
    double val = axis(grid.coordinate(i));
    if (grid.dim == 2) val *= axis(grid.coordinate(static_cast<int>(k / m)));
    v(k) = val;
  }
  return v;
}

FlowProblem build_problem(const PdeExperiment& pde) {
  const TimeGrid tg(pde.horizon, pde.steps);
  FlowProblem prob{dirichlet_p_energy(pde.grid, pde.p), q_potential(pde.grid, pde.q), rl_pair(pde.alpha), tg,
                   pde.initial.amplitude * profile_shape(pde.grid, pde.initial.kind), Eigen::MatrixXd()};
  if (pde.forcing.kind != ProfileKind::zero && pde.forcing.amplitude != 0.0) {
    const Vector shape = pde.forcing.amplitude * profile_shape(pde.grid, pde.forcing.kind);
    prob.forcing.resize(shape.size(), static_cast<Eigen::Index>(tg.nodes()));
    for (std::size_t j = 0; j < tg.nodes(); ++j)
      prob.forcing.col(static_cast<Eigen::Index>(j)) = pde.forcing.ramp ? Vector(tg.time(j) * shape) : shape;
  }
  return prob;
}

double energy_budget(const FlowProblem& problem) {
  double e = problem.phi1->value(problem.u0);
  if (problem.forcing.size() == 0) return e;
  const Metric& metric = problem.phi1->metric();
  Eigen::VectorXd sq(problem.forcing.cols());
  for (Eigen::Index j = 0; j < sq.size(); ++j) sq(j) = metric.dot(problem.forcing.col(j), problem.forcing.col(j));
  const Eigen::VectorXd conv = convolve(ConvWeights(problem.pair.ell, problem.grid), sq, Sampling::right);
  return e + conv.maxCoeff();
}

ExperimentResult run_experiment(const PdeExperiment& pde, const SolverConfig& config) {
  ExperimentResult res;
  res.regime = classify_regime(pde.p, pde.q, pde.space_dimension > 0 ? pde.space_dimension : pde.grid.dim);
  const FlowProblem prob = build_problem(pde);
  res.flow = solve_dc_flow(prob, config);
  res.status = res.flow.status;
  if (res.flow.blow_up) {
    res.blowup_time = res.flow.blow_up->time_estimate;
    res.time_uncertainty = res.flow.blow_up->time_uncertainty;
  }
  res.accepted = res.flow.trajectory.accepted();
  for (const auto& d : res.flow.trajectory.diagnostics) res.sup_energy = std::max(res.sup_energy, d.energy);
  res.energy_bound = energy_budget(prob);
  if (res.energy_bound > 0.0) res.energy_ratio = res.sup_energy / res.energy_bound;
  else res.energy_ratio = res.sup_energy > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  return res;
}

BisectionResult amplitude_bisection(const PdeExperiment& pde, double a_lo, double a_hi, const SolverConfig& config,
                                    int budget, double ratio) {
  BisectionResult out;
  if (!(a_lo >= 0.0) || !(a_hi >= a_lo) || !(ratio > 1.0)) {
    out.message = "need 0 <= A_lo <= A_hi and ratio > 1";
    return out;
  }
  auto run = [&](double a) {
    PdeExperiment e = pde;
    e.initial.amplitude = a;
    const Termination t = run_experiment(e, config).status;
    out.log.emplace_back(a, t);
    ++out.runs;
    return t;
  };
  const Termination lo = run(a_lo);
  const Termination hi = a_hi == a_lo ? lo : run(a_hi);
  if (lo != Termination::completed) {
    out.message = "premise failed: A_lo = " + std::to_string(a_lo) + " does not complete (" + to_string(lo) + ")";
    return out;
  }
  if (hi != Termination::blew_up) {
    out.message = "premise failed: A_hi = " + std::to_string(a_hi) + " does not blow up (" + to_string(hi) + ")";
    return out;
  }
  out.lower = a_lo;
  out.upper = a_hi;
  while (out.lower == 0.0 || out.upper / out.lower > ratio) {
    if (out.runs >= budget) {
      out.message = "budget exhausted before the bracket ratio was reached";
      return out;
    }
    const double mid = out.lower > 0.0 ? std::sqrt(out.lower * out.upper) : 0.5 * out.upper;
    const Termination t = run(mid);
    if (t == Termination::completed) out.lower = mid;
    else if (t == Termination::blew_up) out.upper = mid;
    else {
      out.message = "inner nonconvergence at A = " + std::to_string(mid);
      return out;
    }
  }
  out.ok = true;
  return out;
}

}  // namespace fraflow
