#include <doctest.h>

#include <cmath>

#include "fraflow/chain_rule.hpp"
#include "fraflow/gronwall.hpp"
#include "fraflow/mittag_leffler.hpp"
#include "fraflow/plaplace.hpp"

using namespace fraflow;

namespace {

Trajectory ml_run(double alpha, std::size_t n, double visc = 0.0) {
  FlowProblem p;
  p.phi1 = std::make_shared<QuadraticEnergy>();
  p.pair = rl_pair(alpha);
  p.grid = TimeGrid(1.0, n);
  p.u0 = Vector::Constant(1, 1.0);
  SolverConfig cfg;
  cfg.viscosity = visc;
  FlowResult r = solve_dc_flow(p, cfg);
  REQUIRE(r.status == Termination::completed);
  return r.trajectory;
}

FlowProblem dirichlet_run(double p_exp, int m, std::size_t n) {
  const Grid g(1, m);
  FlowProblem q;
  q.phi1 = dirichlet_p_energy(g, p_exp);
  q.pair = rl_pair(0.5);
  q.grid = TimeGrid(0.1, n);
  q.u0 = Vector(m);
  for (int i = 0; i < m; ++i) q.u0[i] = std::sin(M_PI * g.coordinate(i));
  return q;
}

// (1 - e^{-M}) / M = 1/2
double continuous_m() {
  double lo = 0.1, hi = 10.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    ((1 - std::exp(-mid)) / mid > 0.5 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("Mittag-Leffler values") {
  for (double a : {0.1, 0.5, 0.9, 1.0}) CHECK(mittag_leffler(a, 0.0) == 1.0);
  CHECK(mittag_leffler(1.0, -1.0) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
  CHECK(mittag_leffler(1.0, -7.5) == doctest::Approx(std::exp(-7.5)).epsilon(1e-14));
  CHECK(mittag_leffler(0.5, -1.0) == doctest::Approx(0.4275835761558070).epsilon(1e-14));
  // E_{1/2}(-x) = e^{x^2} erfc(x)
  for (double x : {0.3, 1.0, 2.0, 3.0, 6.0})
    CHECK(mittag_leffler(0.5, -x) == doctest::Approx(std::exp(x * x) * std::erfc(x)).epsilon(1e-10));
}

TEST_CASE("Mittag-Leffler is continuous across the method switch") {
  for (double a : {0.05, 0.3, 0.5, 0.7, 0.95, 0.999}) {
    const double left = mittag_leffler(a, -1.0 + 1e-12);
    const double right = mittag_leffler(a, -1.0 - 1e-12);
    INFO("alpha " << a);
    CHECK(std::abs(left - right) <= 1e-8);
  }
}

TEST_CASE("Mittag-Leffler is completely monotone on the branch") {
  for (double a : {0.2, 0.5, 0.8}) {
    double prev = 1.0;
    for (double x = 0.05; x < 60; x *= 1.3) {
      const double v = mittag_leffler(a, -x);
      CHECK(v < prev);
      CHECK(v > 0.0);
      prev = v;
    }
    for (double t : {0.0, 0.1, 1.0, 10.0, 100.0}) {
      const double v = mittag_leffler_relaxation(a, t);
      CHECK(v > 0.0);
      CHECK(v <= 1.0);
    }
    // algebraic tail -1/(z Gamma(1 - alpha))
    const double z = -1e4;
    CHECK(mittag_leffler(a, z) == doctest::Approx(-1.0 / (z * std::tgamma(1 - a))).epsilon(1e-3));
  }
  CHECK_THROWS_AS(mittag_leffler(0.0, -1.0), std::domain_error);
  CHECK_THROWS_AS(mittag_leffler(1.5, -1.0), std::domain_error);
  CHECK_THROWS_AS(mittag_leffler(0.5, 0.5), std::domain_error);
}

TEST_CASE("slack model and certificate JSON") {
  SlackModel s{1e-8, 2.0, 0.5};
  CHECK(s(0.25) == doctest::Approx(1e-8 + 1.0));
  Certificate c;
  c.lemma = "demo";
  c.outcome = Outcome::fail;
  c.diagnostic = "worst node 3";
  c.witnesses["node"] = 3;
  c.slack = to_json(s);
  const nlohmann::json j = to_json(c);
  CHECK(j.at("lemma") == "demo");
  CHECK(j.at("outcome") == "fail");
  CHECK(j.at("witnesses").at("node") == 3);
  CHECK(j.at("slack").at("coefficient") == 2.0);
  CHECK(to_string(Outcome::reject) == "reject");
}

TEST_CASE("chain rule margins vanish on stationary trajectories") {
  const TimeGrid grid(1.0, 64);
  std::vector<std::pair<std::shared_ptr<const Functional>, Vector>> cases;
  cases.emplace_back(std::make_shared<QuadraticEnergy>(Metric{}, Vector::Constant(3, 0.4)), Vector::Constant(3, 0.4));
  cases.emplace_back(std::make_shared<PowerPotential>(Metric{}, 3.0), Vector::Zero(3));
  cases.emplace_back(std::make_shared<L1Norm>(Metric{}, 1.0), Vector::Zero(3));
  cases.emplace_back(std::make_shared<BoxIndicator>(Metric{}, -1.0, 1.0), Vector::Constant(3, 0.5));
  cases.emplace_back(dirichlet_p_energy(Grid(1, 8), 3.0), Vector::Zero(8));
  for (const auto& [phi, u0] : cases) {
    FlowProblem p;
    p.phi1 = phi;
    p.pair = rl_pair(0.4);
    p.grid = grid;
    p.u0 = u0;
    const FlowResult r = solve_dc_flow(p, SolverConfig{});
    REQUIRE(r.status == Termination::completed);
    const ChainRuleReport rep = check_chain_rule(r.trajectory, *phi, p.pair);
    INFO(phi->name());
    CHECK(rep.outcome == Outcome::pass);
    for (double m : rep.margin_i) CHECK(std::abs(m) <= 1e-10);
    for (double m : rep.margin_ii) CHECK(std::abs(m) <= 1e-10);
  }
}

TEST_CASE("chain rule on the scalar relaxation and a p-Dirichlet run") {
  const Trajectory tr = ml_run(0.5, 1024);
  QuadraticEnergy quad;
  const ChainRuleReport rep = check_chain_rule(tr, quad, rl_pair(0.5));
  CHECK(rep.outcome == Outcome::pass);
  CHECK(rep.min_margin_i >= -1e-3);
  CHECK(rep.min_margin_ii >= -1e-3);
  CHECK(rep.lhs_i.size() == tr.accepted());
  // stored energies give the same report
  const ChainRuleReport stored = check_chain_rule(tr, pair_from_tag(tr.kernel));
  CHECK(stored.min_margin_ii == doctest::Approx(rep.min_margin_ii));

  const FlowProblem q = dirichlet_run(3.0, 32, 256);
  const FlowResult rq = solve_dc_flow(q, SolverConfig{});
  REQUIRE(rq.status == Termination::completed);
  const ChainRuleReport rd = check_chain_rule(rq.trajectory, *q.phi1, q.pair);
  CHECK(rd.outcome == Outcome::pass);
  CHECK(rd.normalized_min_i() >= -rd.slack(rd.tau));
  CHECK(rd.normalized_min_ii() >= -rd.slack(rd.tau));
  const nlohmann::json j = to_json(rd.certificate());
  CHECK(j.at("outcome") == "pass");
}

TEST_CASE("chain rule fails on a wrong selection") {
  const Trajectory tr = ml_run(0.5, 128);
  // 3u is the gradient of 3/2 u^2, not of the stored energy 1/2 u^2
  const Eigen::VectorXd energies = tr.energies();
  const ChainRuleReport rep =
      check_chain_rule(tr.states, 3.0 * tr.selection, energies, rl_pair(0.5), tr.grid, tr.metric);
  CHECK(rep.outcome == Outcome::fail);
  CHECK(rep.worst_node_ii > 0);
  CHECK_FALSE(rep.diagnostic.empty());
}

TEST_CASE("pair reconstruction from a kernel tag") {
  const SoninePair rl = pair_from_tag(KernelTag{KernelKind::riemann_liouville, 0.7});
  CHECK(rl.k(0.5) == doctest::Approx(rl_pair(0.7).k(0.5)));
  CHECK(rl.ell(0.5) == doctest::Approx(rl_pair(0.7).ell(0.5)));
  const SoninePair c = pair_from_tag(KernelTag{KernelKind::constant, 2.0});
  CHECK(c.k(1.0) == doctest::Approx(2.0));
  CHECK_THROWS(pair_from_tag(KernelTag{KernelKind::sampled, 0.0}));
}

TEST_CASE("A-B inequality on viscous trajectories") {
  for (double visc : {1.0, 0.1, 0.01}) {
    const Trajectory tr = ml_run(0.5, 256, visc);
    const ABReport ab = check_ab_inequality(tr, rl_pair(0.5));
    INFO("viscosity " << visc);
    CHECK(ab.outcome == Outcome::pass);
    CHECK(ab.min_margin >= -ab.slack(ab.tau));
  }
  FlowProblem q = dirichlet_run(3.0, 16, 128);
  SolverConfig cfg;
  cfg.viscosity = 0.5;
  const FlowResult r = solve_dc_flow(q, cfg);
  CHECK(check_ab_inequality(r.trajectory, q.pair).outcome == Outcome::pass);
}

TEST_CASE("continuity modulus") {
  SUBCASE("stationary path") {
    FlowProblem p;
    p.phi1 = std::make_shared<QuadraticEnergy>();
    p.grid = TimeGrid(1.0, 64);
    p.u0 = Vector::Zero(2);
    const FlowResult r = solve_dc_flow(p, SolverConfig{});
    const ModulusTable t = continuity_modulus(r.trajectory, p.pair);
    CHECK(t.outcome == Outcome::pass);
    for (const auto& row : t.rows) {
      CHECK(row.observed == 0.0);
      CHECK(row.holds);
    }
  }
  SUBCASE("scalar relaxation") {
    const Trajectory tr = ml_run(0.5, 1024);
    const ModulusTable t = continuity_modulus(tr, rl_pair(0.5));
    CHECK(t.outcome == Outcome::pass);
    REQUIRE(t.rows.size() >= 6);
    CHECK(t.rows.front().lag_steps == 1);
    for (const auto& row : t.rows) {
      CHECK(row.holds);
      CHECK(row.observed <= row.bound);
      CHECK(row.initial_observed <= row.initial_bound);
    }
    // |ell|_{L1(0,h)} = h^{1/2} / Gamma(3/2); over small lags the discrete mass follows it
    const auto& a = t.rows[1];
    const auto& b = t.rows[5];
    const double mass_slope = std::log(b.ell_mass / a.ell_mass) / std::log(b.lag / a.lag);
    const double obs_slope = std::log(b.observed / a.observed) / std::log(b.lag / a.lag);
    CHECK(mass_slope == doctest::Approx(0.5).epsilon(0.2));
    // the modulus decays at least as fast as the square-root bound
    CHECK(obs_slope >= 0.5 * mass_slope);
  }
}

TEST_CASE("linear Gronwall examples") {
  const TimeGrid grid(1.0, 1000);
  GronwallLinearInstance inst;
  inst.grid = grid;
  inst.g_weights.assign(1000, 0.0);
  inst.phi = Eigen::VectorXd::Constant(1001, 0.7);
  inst.h = Eigen::VectorXd::Constant(1001, 1.0);
  GronwallLinearCertificate c = gronwall_linear(inst);
  CHECK(c.outcome == Outcome::pass);
  CHECK(c.M == 0.0);
  CHECK(c.C0 == 2.0);

  inst.g_weights = gronwall_weights(constant_kernel(1.0), grid);
  inst.phi.setOnes();
  c = gronwall_linear(inst);
  CHECK(c.outcome == Outcome::pass);
  CHECK(continuous_m() == doctest::Approx(1.5936).epsilon(1e-4));
  CHECK(c.M == doctest::Approx(continuous_m()).epsilon(5e-3));
  CHECK(c.C0 == doctest::Approx(2 * std::exp(c.M)));
  CHECK(c.weighted_mass <= 0.5 + 1e-12);
  CHECK(c.phi_norm <= c.C0 * c.h_norm);

  for (double r : {1.0, 2.0}) {
    inst.r = r;
    CHECK(gronwall_linear(inst).outcome == Outcome::pass);
  }
  inst.phi.setConstant(3.0);  // 3 <= 1 + 3t fails near t = 0
  CHECK(gronwall_linear(inst).outcome == Outcome::reject);
}

TEST_CASE("local Gronwall examples") {
  const TimeGrid grid(1.0, 2000);
  GronwallLocalInstance inst;
  inst.grid = grid;
  inst.a = 0.0;
  inst.M = [](double r) { return r + 1.0; };

  inst.g_weights.assign(2000, 0.0);
  inst.phi = Eigen::VectorXd::Zero(2001);
  GronwallLocalCertificate c = gronwall_local(inst);
  CHECK(c.outcome == Outcome::pass);
  CHECK(std::isinf(c.R));
  CHECK(c.horizon_checked == 1.0);

  inst.g_weights = gronwall_weights(constant_kernel(1.0), grid);
  inst.phi = volterra_forward(inst.g_weights, Eigen::VectorXd::Zero(2001), inst.M);
  c = gronwall_local(inst);
  CHECK(c.outcome == Outcome::pass);
  CHECK(c.R < 0.125);
  CHECK(c.R > 0.12);
  CHECK(c.sup_phi <= 1.0);

  // a step function below the hypothesis
  inst.a = 0.5;
  inst.phi = Eigen::VectorXd::Zero(2001);
  inst.phi.head(101).setConstant(0.5);
  c = gronwall_local(inst);
  CHECK(c.outcome == Outcome::pass);
  CHECK(c.sup_phi == 0.5);

  inst.phi(0) = 2.0;
  CHECK(gronwall_local(inst).outcome == Outcome::reject);
}

TEST_CASE("small-data Gronwall examples") {
  const TimeGrid grid(1.0, 1000);
  GronwallSmallInstance inst;
  inst.grid = grid;
  inst.g_weights = gronwall_weights(constant_kernel(1.0), grid);
  inst.b = 0.1;
  inst.delta = 1.0;

  inst.N = [](double) { return 0.0; };
  inst.phi = Eigen::VectorXd::Constant(1001, 0.1);
  CHECK(gronwall_small(inst).outcome == Outcome::pass);

  inst.N = [](double r) { return r * r - r; };
  inst.phi = volterra_forward(inst.g_weights, Eigen::VectorXd::Constant(1001, 0.1), inst.N);
  GronwallSmallCertificate c = gronwall_small(inst);
  CHECK(c.outcome == Outcome::pass);
  CHECK(c.sup_phi <= 0.1);
  CHECK(c.sampling_gap == doctest::Approx(1e-3));

  inst.b = 1.0;
  c = gronwall_small(inst);
  CHECK(c.outcome == Outcome::reject);
  CHECK_FALSE(c.diagnostic.empty());
}

TEST_CASE("Gronwall suites") {
  const GronwallSuiteResult s = run_gronwall_suite(20240601, 100);
  CHECK(s.linear_pass == 100);
  CHECK(s.local_pass == 100);
  CHECK(s.small_pass == 100);
  CHECK(s.total == 300);
  CHECK(s.violations_total == 10);
  CHECK(s.violations_rejected == 10);
  for (const Certificate& c : gronwall_violation_certificates()) CHECK(c.outcome == Outcome::reject);
  // seeded: reruns agree
  const GronwallSuiteResult again = run_gronwall_suite(20240601, 5);
  const GronwallSuiteResult again2 = run_gronwall_suite(20240601, 5);
  REQUIRE(again.certificates.size() == again2.certificates.size());
  for (std::size_t i = 0; i < again.certificates.size(); ++i)
    CHECK(to_json(again.certificates[i]).dump() == to_json(again2.certificates[i]).dump());
}
