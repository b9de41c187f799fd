#include "fraflow/functional.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

namespace fraflow {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct NewtonState {
  Vector z;
  Vector residual;  // (z - w)/lambda + grad phi(z)
  Vector grad;
  double objective = 0.0;
};

NewtonState evaluate(const SmoothFunctional& phi, double lambda, const Vector& w, Vector z) {
  NewtonState s;
  s.grad = phi.gradient(z);
  s.residual = (z - w) / lambda + s.grad;
  const Vector d = z - w;
  s.objective = phi.metric().dot(d, d) / (2.0 * lambda) + phi.value(z);
  s.z = std::move(z);
  return s;
}

}  // namespace

ProxResult SmoothFunctional::prox(double lambda, const Vector& w, const ProxOptions& opts) const {
  return newton_prox(lambda, w, w, opts);
}

ProxResult SmoothFunctional::newton_prox(double lambda, const Vector& w, Vector start, const ProxOptions& opts) const {
  if (!(lambda > 0.0)) throw std::invalid_argument("prox: lambda must be positive");
  const Metric& g = metric();
  const double w_scale = g.norm(w) / lambda;
  NewtonState cur = evaluate(*this, lambda, w, std::move(start));

  // Below 64 eps (|w|/lambda + |grad|) the residual is rounding noise.
  auto target = [&](const NewtonState& s) {
    return std::max(opts.tolerance, 64.0 * kEps * (w_scale + 1.0 + g.norm(s.grad)));
  };

  const auto n = w.size();
  SparseMatrix eye(n, n);
  eye.setIdentity();
  Eigen::SimplicialLDLT<SparseMatrix> solver;

  for (int it = 0; it < opts.max_iterations; ++it) {
    const double rnorm = g.norm(cur.residual);
    if (rnorm <= target(cur)) return ProxResult{cur.z, rnorm, it};

    SparseMatrix jac = eye / lambda + hessian(cur.z);
    solver.compute(jac);
    Vector dir;
    bool newton = solver.info() == Eigen::Success;
    if (newton) {
      dir = -solver.solve(cur.residual);
      newton = solver.info() == Eigen::Success && dir.allFinite();
    }

    auto line_search = [&](const Vector& d, NewtonState& out) {
      const double slope = g.dot(cur.residual, d);
      if (!(slope < 0.0)) return false;
      double t = 1.0;
      for (int k = 0; k < 60; ++k, t *= 0.5) {
        NewtonState trial = evaluate(*this, lambda, w, cur.z + t * d);
        if (!std::isfinite(trial.objective)) continue;
        const bool armijo = trial.objective <= cur.objective + 1e-4 * t * slope;
        const bool smaller = g.norm(trial.residual) <= 0.9 * rnorm;
        if (armijo || smaller) {
          out = std::move(trial);
          return true;
        }
      }
      return false;
    };

    NewtonState next;
    bool moved = newton && line_search(dir, next);
    if (!moved) {
      // Steepest descent on the prox objective.
      moved = line_search(-lambda * cur.residual, next);
    }
    if (!moved) throw ProxError(name() + ": prox line search failed", rnorm, it);
    cur = std::move(next);
  }
  const double rnorm = g.norm(cur.residual);
  if (rnorm <= target(cur)) return ProxResult{cur.z, rnorm, opts.max_iterations};
  throw ProxError(name() + ": prox did not converge", rnorm, opts.max_iterations);
}

ProxResult resolvent(const Functional& phi, double lambda, const Vector& w, const ProxOptions& opts) {
  if (!(lambda > 0.0)) throw std::invalid_argument("resolvent: lambda must be positive");
  return phi.prox(lambda, w, opts);
}

YosidaEval yosida(const Functional& phi, double lambda, const Vector& w, const ProxOptions& opts) {
  YosidaEval e;
  e.lambda = lambda;
  e.resolvent = resolvent(phi, lambda, w, opts);
  e.yosida = (w - e.resolvent.point) / lambda;
  const Vector d = w - e.resolvent.point;
  e.envelope = phi.metric().dot(d, d) / (2.0 * lambda) + phi.value(e.resolvent.point);
  return e;
}

std::vector<double> default_lambda_sequence() {
  std::vector<double> out;
  for (int k = 1; k <= 12; ++k) out.push_back(std::pow(10.0, -k));
  return out;
}

MinimalSection minimal_section(const Functional& phi, const Vector& w, const std::vector<double>& lambdas, double tol,
                               const ProxOptions& opts) {
  if (lambdas.empty()) throw std::invalid_argument("minimal_section: empty lambda sequence");
  for (std::size_t i = 1; i < lambdas.size(); ++i)
    if (!(lambdas[i] < lambdas[i - 1])) throw std::invalid_argument("minimal_section: lambdas must decrease");
  MinimalSection out;
  Vector prev;
  for (double lambda : lambdas) {
    Vector cur = yosida(phi, lambda, w, opts).yosida;
    out.lambdas.push_back(lambda);
    if (prev.size() > 0) {
      const double inc = phi.metric().norm(cur - prev);
      out.increments.push_back(inc);
      if (inc <= tol * (1.0 + phi.metric().norm(cur))) {
        out.value = cur;
        out.converged = true;
        return out;
      }
    }
    prev = std::move(cur);
  }
  out.value = prev;
  out.converged = false;
  return out;
}

}  // namespace fraflow
