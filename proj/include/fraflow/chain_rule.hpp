#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "fraflow/certificate.hpp"
#include "fraflow/flow.hpp"
#include "fraflow/functional.hpp"
#include "fraflow/kernel.hpp"
#include "fraflow/time_grid.hpp"

namespace fraflow {

/// Rebuilds the pair recorded in a trajectory (Riemann-Liouville and constant kernels).
SoninePair pair_from_tag(const KernelTag& tag);

/// Integral chain-rule forms on a sampled path with selections xi_j in d phi(u_j):
///   (i)  sum_{i<=j} tau <B(u-u0)_i, xi_i>  >=  [k * (phi(u) - phi(u0))](t_j)
///   (ii) [ell * <B(u-u0), xi>](t_j)          >=  phi(u_j) - phi(u0)
/// ell-convolutions use the discrete conjugate of the k-weights; the
/// product-integration value of (ii) is reported alongside.
/// Margins are normalized by 1 + the largest magnitude of either side before the
/// slack test. The grid cannot tell "a.e. t" from "every node".
struct ChainRuleReport {
  double tau = 0.0;
  SlackModel slack;
  std::vector<double> lhs_i, rhs_i, margin_i;
  std::vector<double> lhs_ii, rhs_ii, margin_ii;
  double scale_i = 1.0, scale_ii = 1.0;
  double min_margin_i = 0.0, min_margin_ii = 0.0;  // raw
  std::size_t worst_node_i = 0, worst_node_ii = 0;
  double min_margin_ii_product = 0.0;
  Outcome outcome = Outcome::reject;
  std::string diagnostic;

  double normalized_min_i() const { return min_margin_i / scale_i; }
  double normalized_min_ii() const { return min_margin_ii / scale_ii; }
  Certificate certificate() const;
};

ChainRuleReport check_chain_rule(const Eigen::MatrixXd& states, const Eigen::MatrixXd& selection,
                                 const Eigen::VectorXd& energies, const SoninePair& pair, const TimeGrid& grid,
                                 const Metric& metric, const SlackModel& slack = {});

/// Energies from `phi`.
ChainRuleReport check_chain_rule(const Trajectory& tr, const Functional& phi, const SoninePair& pair,
                                 const SlackModel& slack = {});

/// Energies stored in the trajectory (e.g. read from a dump).
ChainRuleReport check_chain_rule(const Trajectory& tr, const SoninePair& pair, const SlackModel& slack = {});

/// sum_{i<=j} <u_i - u_{i-1}, B_i>  >=  (1/2) [ell * |B|^2](t_j), B = B(u - u0).
struct ABReport {
  double tau = 0.0;
  SlackModel slack;
  std::vector<double> lhs, rhs, margin;
  double scale = 1.0;
  double min_margin = 0.0;
  std::size_t worst_node = 0;
  Outcome outcome = Outcome::reject;
  std::string diagnostic;

  Certificate certificate() const;
};

ABReport check_ab_inequality(const Trajectory& tr, const SoninePair& pair, const SlackModel& slack = {});

struct ModulusRow {
  std::size_t lag_steps = 0;
  double lag = 0.0;
  double observed = 0.0;    // max_j |u_{j+lag} - u_j|
  double ell_mass = 0.0;    // discrete |ell|_{L1(0, lag)}
  double ell_mass_exact = 0.0;
  double bound = 0.0;       // 2 sqrt(ell_mass) sqrt(sup ell * |G|^2)
  double initial_observed = 0.0;  // |u_lag - u0|
  double initial_bound = 0.0;     // sqrt(ell_mass) sqrt(sup ell * |G|^2)
  bool holds = false;
};

struct ModulusTable {
  double sup_energy = 0.0;  // sup_j (ell * |G|^2)(t_j), G = B(u - u0)
  std::vector<ModulusRow> rows;
  Outcome outcome = Outcome::reject;

  Certificate certificate() const;
};

/// Lags tau, 2 tau, 4 tau, ... up to half the accepted horizon.
ModulusTable continuity_modulus(const Trajectory& tr, const SoninePair& pair, double slack = 1e-12);

}  // namespace fraflow
