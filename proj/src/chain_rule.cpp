#include "fraflow/chain_rule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "fraflow/convolution.hpp"

namespace fraflow {

SoninePair pair_from_tag(const KernelTag& tag) {
  switch (tag.kind) {
    case KernelKind::riemann_liouville: return rl_pair(tag.parameter);
    case KernelKind::constant: return constant_pair(tag.parameter);
    default: throw std::invalid_argument("pair_from_tag: kernel " + to_string(tag.kind) + " cannot be rebuilt from a tag");
  }
}

namespace {

// out_j = sum_{i=1}^j lags[j-i] x_i for j < n.
std::vector<double> conv_right(const std::vector<double>& lags, const std::vector<double>& x, std::size_t n) {
  std::vector<double> out(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    double acc = 0.0;
    for (std::size_t i = 1; i <= j; ++i) acc += lags[j - i] * x[i];
    out[j] = acc;
  }
  return out;
}

// Columns 0..n-1 of B(u - u0).
Eigen::MatrixXd derivative(const std::vector<double>& b, double tau, const Eigen::MatrixXd& u) {
  const Eigen::Index n = u.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(u.rows(), n);
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 1; i <= j; ++i)
      out.col(j) += b[static_cast<std::size_t>(j - i)] * (u.col(i) - u.col(i - 1));
    out.col(j) /= tau;
  }
  return out;
}

struct MarginStats {
  double scale = 1.0;
  double min = 0.0;
  std::size_t worst = 0;
};

MarginStats margins(const std::vector<double>& lhs, const std::vector<double>& rhs, std::vector<double>& margin) {
  MarginStats s;
  margin.assign(lhs.size(), 0.0);
  double big = 0.0;
  double worst = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < lhs.size(); ++j) {
    margin[j] = lhs[j] - rhs[j];
    big = std::max({big, std::abs(lhs[j]), std::abs(rhs[j])});
    if (j > 0 && margin[j] < worst) {
      worst = margin[j];
      s.worst = j;
    }
  }
  s.scale = 1.0 + big;
  s.min = lhs.size() > 1 ? worst : 0.0;
  return s;
}

nlohmann::json witness(const std::vector<double>& lhs, const std::vector<double>& rhs, std::size_t j, double tau) {
  if (lhs.empty()) return nullptr;
  return {{"node", j}, {"t", static_cast<double>(j) * tau}, {"lhs", lhs[j]}, {"rhs", rhs[j]}};
}

}  // namespace

ChainRuleReport check_chain_rule(const Eigen::MatrixXd& states, const Eigen::MatrixXd& selection,
                                 const Eigen::VectorXd& energies, const SoninePair& pair, const TimeGrid& grid,
                                 const Metric& metric, const SlackModel& slack) {
  ChainRuleReport r;
  r.tau = grid.tau();
  r.slack = slack;
  const auto n = static_cast<std::size_t>(states.cols());
  if (selection.cols() != states.cols() || selection.rows() != states.rows() ||
      energies.size() != states.cols() || n > grid.nodes() || n == 0) {
    r.diagnostic = "inconsistent trajectory arrays";
    return r;
  }
  if (!states.allFinite() || !selection.allFinite() || !energies.allFinite()) {
    r.diagnostic = "non-finite states, selections or energies";
    return r;
  }
  const ConvWeights kw(pair.k, grid);
  if (!(kw.lag(0) > 0.0)) {
    r.diagnostic = "kernel k vanishes; no discrete conjugate";
    return r;
  }
  const ConvWeights cw = discrete_conjugate(kw);
  const ConvWeights lw(pair.ell, grid);
  const double tau = grid.tau();

  const Eigen::MatrixXd bder = derivative(kw.lags(), tau, states);
  std::vector<double> pairing(n, 0.0), dphi(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    if (j > 0) pairing[j] = metric.dot(bder.col(jj), selection.col(jj));
    dphi[j] = energies(jj) - energies(0);
  }

  r.lhs_i.assign(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) r.lhs_i[j] = r.lhs_i[j - 1] + tau * pairing[j];
  r.rhs_i = conv_right(kw.lags(), dphi, n);
  r.lhs_ii = conv_right(cw.lags(), pairing, n);
  r.rhs_ii = dphi;
  const auto product = conv_right(lw.lags(), pairing, n);

  const MarginStats s1 = margins(r.lhs_i, r.rhs_i, r.margin_i);
  const MarginStats s2 = margins(r.lhs_ii, r.rhs_ii, r.margin_ii);
  r.scale_i = s1.scale;
  r.scale_ii = s2.scale;
  r.min_margin_i = s1.min;
  r.min_margin_ii = s2.min;
  r.worst_node_i = s1.worst;
  r.worst_node_ii = s2.worst;
  r.min_margin_ii_product = 0.0;
  for (std::size_t j = 1; j < n; ++j) r.min_margin_ii_product = std::min(r.min_margin_ii_product, product[j] - dphi[j]);

  const double allowed = slack(tau);
  const bool ok_i = r.normalized_min_i() >= -allowed;
  const bool ok_ii = r.normalized_min_ii() >= -allowed;
  r.outcome = ok_i && ok_ii ? Outcome::pass : Outcome::fail;
  if (!ok_i) r.diagnostic += "form (i) violated at node " + std::to_string(r.worst_node_i) + "; ";
  if (!ok_ii) r.diagnostic += "form (ii) violated at node " + std::to_string(r.worst_node_ii) + "; ";
  return r;
}

ChainRuleReport check_chain_rule(const Trajectory& tr, const Functional& phi, const SoninePair& pair,
                                 const SlackModel& slack) {
  Eigen::VectorXd e(tr.states.cols());
  for (Eigen::Index j = 0; j < tr.states.cols(); ++j) e(j) = phi.value(tr.states.col(j));
  return check_chain_rule(tr.states, tr.selection, e, pair, tr.grid, phi.metric(), slack);
}

ChainRuleReport check_chain_rule(const Trajectory& tr, const SoninePair& pair, const SlackModel& slack) {
  return check_chain_rule(tr.states, tr.selection, tr.energies(), pair, tr.grid, tr.metric, slack);
}

Certificate ChainRuleReport::certificate() const {
  Certificate c;
  c.lemma = "chain_rule";
  c.outcome = outcome;
  c.diagnostic = diagnostic;
  c.slack = to_json(slack);
  c.slack["tau"] = tau;
  c.witnesses = {{"min_margin_i", min_margin_i},
                 {"min_margin_ii", min_margin_ii},
                 {"normalized_min_i", normalized_min_i()},
                 {"normalized_min_ii", normalized_min_ii()},
                 {"min_margin_ii_product_integration", min_margin_ii_product},
                 {"worst_i", witness(lhs_i, rhs_i, worst_node_i, tau)},
                 {"worst_ii", witness(lhs_ii, rhs_ii, worst_node_ii, tau)},
                 {"note", "node values stand in for a.e. t"}};
  return c;
}

ABReport check_ab_inequality(const Trajectory& tr, const SoninePair& pair, const SlackModel& slack) {
  ABReport r;
  r.tau = tr.grid.tau();
  r.slack = slack;
  const auto n = static_cast<std::size_t>(tr.states.cols());
  if (n == 0 || !tr.states.allFinite()) {
    r.diagnostic = "empty or non-finite trajectory";
    return r;
  }
  const ConvWeights kw(pair.k, tr.grid);
  if (!(kw.lag(0) > 0.0)) {
    r.diagnostic = "kernel k vanishes; no discrete conjugate";
    return r;
  }
  const ConvWeights cw = discrete_conjugate(kw);
  const Eigen::MatrixXd bder = derivative(kw.lags(), r.tau, tr.states);
  std::vector<double> sq(n, 0.0);
  r.lhs.assign(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    sq[j] = tr.metric.dot(bder.col(jj), bder.col(jj));
    r.lhs[j] = r.lhs[j - 1] + tr.metric.dot(tr.states.col(jj) - tr.states.col(jj - 1), bder.col(jj));
  }
  r.rhs = conv_right(cw.lags(), sq, n);
  for (double& x : r.rhs) x *= 0.5;
  const MarginStats s = margins(r.lhs, r.rhs, r.margin);
  r.scale = s.scale;
  r.min_margin = s.min;
  r.worst_node = s.worst;
  r.outcome = r.min_margin / r.scale >= -slack(r.tau) ? Outcome::pass : Outcome::fail;
  if (r.outcome == Outcome::fail) r.diagnostic = "violated at node " + std::to_string(r.worst_node);
  return r;
}

Certificate ABReport::certificate() const {
  Certificate c;
  c.lemma = "ab_inequality";
  c.outcome = outcome;
  c.diagnostic = diagnostic;
  c.slack = to_json(slack);
  c.slack["tau"] = tau;
  c.witnesses = {{"min_margin", min_margin}, {"normalized_min", min_margin / scale},
                 {"worst", witness(lhs, rhs, worst_node, tau)}};
  return c;
}

ModulusTable continuity_modulus(const Trajectory& tr, const SoninePair& pair, double slack) {
  ModulusTable table;
  const auto n = static_cast<std::size_t>(tr.states.cols());
  if (n < 2) {
    table.outcome = Outcome::pass;
    return table;
  }
  const double tau = tr.grid.tau();
  const ConvWeights kw(pair.k, tr.grid);
  if (!(kw.lag(0) > 0.0)) return table;
  const ConvWeights cw = discrete_conjugate(kw);
  const Eigen::MatrixXd g = derivative(kw.lags(), tau, tr.states);
  std::vector<double> sq(n, 0.0);
  for (std::size_t j = 1; j < n; ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    sq[j] = tr.metric.dot(g.col(jj), g.col(jj));
  }
  const auto energy = conv_right(cw.lags(), sq, n);
  table.sup_energy = *std::max_element(energy.begin(), energy.end());

  bool ok = true;
  double mass = 0.0;
  std::size_t summed = 0;
  for (std::size_t m = 1; m <= (n - 1) / 2 || m == 1; m *= 2) {
    if (m > n - 1) break;
    while (summed < m) mass += cw.lag(summed++);
    ModulusRow row;
    row.lag_steps = m;
    row.lag = static_cast<double>(m) * tau;
    row.ell_mass = mass;
    row.ell_mass_exact = pair.ell.antiderivative(row.lag);
    for (std::size_t j = 0; j + m < n; ++j) {
      const auto a = static_cast<Eigen::Index>(j);
      const auto b = static_cast<Eigen::Index>(j + m);
      row.observed = std::max(row.observed, tr.metric.norm(tr.states.col(b) - tr.states.col(a)));
    }
    row.initial_observed = tr.metric.norm(tr.states.col(static_cast<Eigen::Index>(m)) - tr.states.col(0));
    row.initial_bound = std::sqrt(mass * table.sup_energy);
    row.bound = 2.0 * row.initial_bound;
    row.holds = row.observed <= row.bound + slack * (1.0 + row.bound) &&
                row.initial_observed <= row.initial_bound + slack * (1.0 + row.initial_bound);
    ok = ok && row.holds;
    table.rows.push_back(row);
  }
  table.outcome = ok ? Outcome::pass : Outcome::fail;
  return table;
}

Certificate ModulusTable::certificate() const {
  Certificate c;
  c.lemma = "continuity_modulus";
  c.outcome = outcome;
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows)
    rows_json.push_back({{"lag", r.lag},
                         {"observed", r.observed},
                         {"bound", r.bound},
                         {"initial_observed", r.initial_observed},
                         {"initial_bound", r.initial_bound},
                         {"ell_mass", r.ell_mass},
                         {"ell_mass_exact", r.ell_mass_exact},
                         {"holds", r.holds}});
  c.witnesses = {{"sup_energy", sup_energy}, {"rows", rows_json}};
  return c;
}

}  // namespace fraflow
