#include "fraflow/gronwall.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "fraflow/convolution.hpp"

namespace fraflow {

namespace {

constexpr double kRelTol = 1e-12;

// (g * psi)_j with psi_{i-1} sampled causally.
Eigen::VectorXd causal_conv(const std::vector<double>& w, const Eigen::VectorXd& psi) {
  const Eigen::Index n = psi.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (Eigen::Index j = 1; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 1; i <= j; ++i) acc += w[static_cast<std::size_t>(j - i)] * psi(i - 1);
    out(j) = acc;
  }
  return out;
}

bool exceeds(double lhs, double rhs) { return lhs > rhs + kRelTol * (1.0 + std::abs(rhs)); }

bool sizes_ok(const TimeGrid& grid, const std::vector<double>& w, const Eigen::VectorXd& phi) {
  return w.size() == grid.steps() && static_cast<std::size_t>(phi.size()) == grid.nodes();
}

bool nonnegative(const std::vector<double>& w) {
  return std::all_of(w.begin(), w.end(), [](double x) { return x >= 0.0 && std::isfinite(x); });
}

bool nonnegative(const Eigen::VectorXd& x) { return x.allFinite() && (x.array() >= 0.0).all(); }

struct Rng {
  std::mt19937_64 eng;
  explicit Rng(std::uint64_t seed) : eng(seed) {}
  double uniform(double a, double b) { return a + (b - a) * static_cast<double>(eng() >> 11) * 0x1.0p-53; }
  int pick(int n) { return static_cast<int>(eng() % static_cast<std::uint64_t>(n)); }
};

Kernel random_kernel(Rng& rng) {
  switch (rng.pick(3)) {
    case 0: return constant_kernel(rng.uniform(0.1, 1.5));
    case 1: {
      const double beta = rng.uniform(0.1, 0.7);
      const double c = rng.uniform(0.2, 1.5);
      const Kernel base = riemann_liouville_kernel(beta);
      return Kernel([base, c](double t) { return c * base(t); }, [base, c](double t) { return c * base.antiderivative(t); },
                    true, KernelKind::custom, beta);
    }
    default: {
      const double c = rng.uniform(0.2, 2.0);
      const double rate = rng.uniform(0.5, 5.0);
      return Kernel([c, rate](double t) { return c * std::exp(-rate * t); },
                    [c, rate](double t) { return -c * std::expm1(-rate * t) / rate; }, false, KernelKind::custom, rate);
    }
  }
}

// Nonnegative perturbation with a jump, so that instances are discontinuous.
Eigen::VectorXd random_drop(Rng& rng, const TimeGrid& grid, double size) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(grid.nodes()));
  if (rng.pick(2) == 0) return s;
  const double t0 = rng.uniform(0.0, grid.horizon());
  const double height = rng.uniform(0.0, size);
  for (std::size_t j = 0; j < grid.nodes(); ++j)
    if (grid.time(j) >= t0) s(static_cast<Eigen::Index>(j)) = height;
  return s;
}

}  // namespace

std::vector<double> gronwall_weights(const Kernel& g, const TimeGrid& grid) { return ConvWeights(g, grid).lags(); }

Eigen::VectorXd volterra_forward(const std::vector<double>& w, const Eigen::VectorXd& base,
                                 const std::function<double(double)>& F) {
  const Eigen::Index n = base.size();
  Eigen::VectorXd psi(n);
  Eigen::VectorXd fpsi(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 1; i <= j; ++i) acc += w[static_cast<std::size_t>(j - i)] * fpsi(i - 1);
    psi(j) = base(j) + acc;
    fpsi(j) = F(psi(j));
  }
  return psi;
}

double discrete_norm(const Eigen::VectorXd& x, double tau, double r) {
  if (std::isinf(r)) return x.cwiseAbs().maxCoeff();
  return std::pow(tau * x.cwiseAbs().array().pow(r).sum(), 1.0 / r);
}

// Linear lemma.

GronwallLinearCertificate gronwall_linear(const GronwallLinearInstance& inst) {
  GronwallLinearCertificate c;
  if (!sizes_ok(inst.grid, inst.g_weights, inst.phi) || inst.h.size() != inst.phi.size()) {
    c.diagnostic = "array sizes do not match the grid";
    return c;
  }
  if (!(inst.r >= 1.0)) {
    c.diagnostic = "exponent r must lie in [1, inf]";
    return c;
  }
  if (!nonnegative(inst.g_weights)) {
    c.diagnostic = "kernel weights must be nonnegative";
    return c;
  }
  if (!nonnegative(inst.phi) || !nonnegative(inst.h)) {
    c.diagnostic = "phi and h must be nonnegative";
    return c;
  }
  const Eigen::VectorXd conv = causal_conv(inst.g_weights, inst.phi);
  for (Eigen::Index j = 0; j < inst.phi.size(); ++j) {
    if (exceeds(inst.phi(j), inst.h(j) + conv(j))) {
      c.worst_hypothesis_node = static_cast<std::size_t>(j);
      c.diagnostic = "hypothesis phi <= h + g*phi fails at node " + std::to_string(j);
      return c;
    }
  }
  const double tau = inst.grid.tau();
  auto mass = [&](double M) {
    double s = 0.0;
    for (std::size_t m = 0; m < inst.g_weights.size(); ++m)
      s += inst.g_weights[m] * std::exp(-M * static_cast<double>(m + 1) * tau);
    return s;
  };
  double M = 0.0;
  if (mass(0.0) > 0.5) {
    double lo = 0.0, hi = 1e4;
    if (mass(hi) > 0.5) {
      c.diagnostic = "no M in [0, 1e4] brings the weighted kernel mass down to 1/2";
      return c;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (mass(mid) > 0.5 ? lo : hi) = mid;
    }
    M = hi;
  }
  c.M = M;
  c.weighted_mass = mass(M);
  c.C0 = 2.0 * std::exp(M * inst.grid.horizon());
  c.phi_norm = discrete_norm(inst.phi, tau, inst.r);
  c.h_norm = discrete_norm(inst.h, tau, inst.r);
  c.outcome = exceeds(c.phi_norm, c.C0 * c.h_norm) ? Outcome::fail : Outcome::pass;
  if (c.outcome == Outcome::fail) c.diagnostic = "L^r bound violated";
  return c;
}

Certificate GronwallLinearCertificate::certificate() const {
  Certificate out;
  out.lemma = "gronwall_linear";
  out.outcome = outcome;
  out.diagnostic = diagnostic;
  out.witnesses = {{"M", M},           {"C0", C0},         {"weighted_mass", weighted_mass},
                   {"phi_norm", phi_norm}, {"h_norm", h_norm}, {"worst_hypothesis_node", worst_hypothesis_node}};
  out.slack = {{"relative", kRelTol}};
  return out;
}

// Local lemma.

GronwallLocalCertificate gronwall_local(const GronwallLocalInstance& inst) {
  GronwallLocalCertificate c;
  if (!sizes_ok(inst.grid, inst.g_weights, inst.phi) || !inst.M) {
    c.diagnostic = "array sizes do not match the grid";
    return c;
  }
  if (!(inst.a >= 0.0)) {
    c.diagnostic = "a must be nonnegative";
    return c;
  }
  if (!nonnegative(inst.g_weights) || !nonnegative(inst.phi)) {
    c.diagnostic = "g and phi must be nonnegative";
    return c;
  }
  const double top = std::max(inst.phi.maxCoeff(), inst.a + 1.0);
  double prev = inst.M(0.0);
  for (int i = 0; i <= 1000; ++i) {
    const double m = inst.M(top * i / 1000.0);
    if (!(m >= 0.0) || m < prev - kRelTol * (1.0 + std::abs(prev))) {
      c.diagnostic = "M must be nonnegative and nondecreasing";
      return c;
    }
    prev = m;
  }
  Eigen::VectorXd mphi = inst.phi.unaryExpr(inst.M);
  const Eigen::VectorXd conv = causal_conv(inst.g_weights, mphi);
  for (Eigen::Index j = 0; j < inst.phi.size(); ++j) {
    if (exceeds(inst.phi(j), inst.a + conv(j))) {
      c.worst_node = static_cast<std::size_t>(j);
      c.diagnostic = "hypothesis phi <= a + g*M(phi) fails at node " + std::to_string(j);
      return c;
    }
  }
  const double m1 = inst.M(inst.a + 1.0);
  const double total = std::accumulate(inst.g_weights.begin(), inst.g_weights.end(), 0.0);
  std::size_t last = inst.grid.steps();
  if (total == 0.0 || m1 == 0.0) {
    c.R = std::numeric_limits<double>::infinity();
  } else {
    const double bound = 1.0 / (4.0 * m1);
    double cum = 0.0;
    last = 0;
    for (std::size_t n = 1; n <= inst.grid.steps(); ++n) {
      cum += inst.g_weights[n - 1];
      if (!(cum < bound)) break;
      last = n;
    }
    c.R = inst.grid.time(last);
  }
  c.horizon_checked = std::min(c.R, inst.grid.horizon());
  c.sup_phi = 0.0;
  for (std::size_t j = 0; j <= last; ++j) {
    const double v = inst.phi(static_cast<Eigen::Index>(j));
    if (v >= c.sup_phi) {
      c.sup_phi = v;
      c.worst_node = j;
    }
  }
  c.outcome = exceeds(c.sup_phi, inst.a + 1.0) ? Outcome::fail : Outcome::pass;
  if (c.outcome == Outcome::fail) c.diagnostic = "sup phi exceeds a + 1 on [0, min(R, S)]";
  return c;
}

Certificate GronwallLocalCertificate::certificate() const {
  Certificate out;
  out.lemma = "gronwall_local";
  out.outcome = outcome;
  out.diagnostic = diagnostic;
  out.witnesses = {{"R", std::isinf(R) ? nlohmann::json("inf") : nlohmann::json(R)},
                   {"horizon_checked", horizon_checked},
                   {"sup_phi", sup_phi},
                   {"worst_node", worst_node}};
  out.slack = {{"relative", kRelTol}};
  return out;
}

// Small-data lemma.

GronwallSmallCertificate gronwall_small(const GronwallSmallInstance& inst) {
  GronwallSmallCertificate c;
  if (!sizes_ok(inst.grid, inst.g_weights, inst.phi) || !inst.N || inst.check_points < 2) {
    c.diagnostic = "array sizes do not match the grid";
    return c;
  }
  if (!(inst.b >= 0.0) || !(inst.delta > inst.b)) {
    c.diagnostic = "need delta > b >= 0";
    return c;
  }
  if (!nonnegative(inst.g_weights) || !nonnegative(inst.phi)) {
    c.diagnostic = "g and phi must be nonnegative";
    return c;
  }
  c.sampling_gap = inst.delta / static_cast<double>(inst.check_points - 1);
  for (std::size_t i = 0; i < inst.check_points; ++i) {
    const double r = inst.delta * static_cast<double>(i) / static_cast<double>(inst.check_points - 1);
    if (!(inst.N(r) <= 0.0)) {
      c.diagnostic = "N > 0 at r = " + std::to_string(r);
      return c;
    }
  }
  const Eigen::VectorXd nphi = inst.phi.unaryExpr(inst.N);
  const Eigen::VectorXd conv = causal_conv(inst.g_weights, nphi);
  for (Eigen::Index j = 0; j < inst.phi.size(); ++j) {
    if (exceeds(inst.phi(j), inst.b + conv(j))) {
      c.worst_node = static_cast<std::size_t>(j);
      c.diagnostic = "hypothesis phi <= b + g*N(phi) fails at node " + std::to_string(j);
      return c;
    }
  }
  Eigen::Index arg = 0;
  c.sup_phi = inst.phi.maxCoeff(&arg);
  c.worst_node = static_cast<std::size_t>(arg);
  c.outcome = exceeds(c.sup_phi, inst.b) ? Outcome::fail : Outcome::pass;
  if (c.outcome == Outcome::fail) c.diagnostic = "sup phi exceeds b";
  return c;
}

Certificate GronwallSmallCertificate::certificate() const {
  Certificate out;
  out.lemma = "gronwall_small";
  out.outcome = outcome;
  out.diagnostic = diagnostic;
  out.witnesses = {{"sup_phi", sup_phi}, {"worst_node", worst_node}, {"N_check_spacing", sampling_gap}};
  out.slack = {{"relative", kRelTol}};
  return out;
}

// Instance families.

GronwallLinearInstance random_linear_instance(std::uint64_t seed) {
  Rng rng(seed);
  const TimeGrid grid(rng.uniform(0.5, 2.0), static_cast<std::size_t>(50 + rng.pick(251)));
  const Kernel g = random_kernel(rng);
  GronwallLinearInstance inst;
  inst.grid = grid;
  inst.g_weights = gronwall_weights(g, grid);
  const double rs[] = {1.0, 1.5, 2.0, 3.0, std::numeric_limits<double>::infinity()};
  inst.r = rs[rng.pick(5)];
  const double a0 = rng.uniform(0.0, 1.0), a1 = rng.uniform(0.0, 2.0), om = rng.uniform(0.5, 8.0);
  inst.h.resize(static_cast<Eigen::Index>(grid.nodes()));
  for (std::size_t j = 0; j < grid.nodes(); ++j) {
    const double s = std::sin(om * grid.time(j));
    inst.h(static_cast<Eigen::Index>(j)) = a0 + a1 * s * s;
  }
  inst.h += random_drop(rng, grid, 1.0).cwiseMin(inst.h);
  const Eigen::VectorXd drop = random_drop(rng, grid, 0.5);
  // Equality minus a nonnegative drop, clipped at zero: the hypothesis holds by construction.
  const Eigen::Index n = inst.h.size();
  inst.phi.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 1; i <= j; ++i) acc += inst.g_weights[static_cast<std::size_t>(j - i)] * inst.phi(i - 1);
    inst.phi(j) = std::max(0.0, inst.h(j) - drop(j) + acc);
  }
  return inst;
}

GronwallLocalInstance random_local_instance(std::uint64_t seed) {
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(seed * 7919 + attempt);
    const TimeGrid grid(rng.uniform(0.2, 1.5), static_cast<std::size_t>(100 + rng.pick(301)));
    const Kernel g = random_kernel(rng);
    GronwallLocalInstance inst;
    inst.grid = grid;
    inst.g_weights = gronwall_weights(g, grid);
    inst.a = rng.uniform(0.0, 2.0);
    const double c0 = rng.uniform(0.0, 1.0), c1 = rng.uniform(0.1, 2.0), gamma = rng.uniform(0.5, 2.5);
    inst.M = [c0, c1, gamma](double r) { return c0 + c1 * std::pow(std::max(r, 0.0), gamma); };
    const Eigen::VectorXd drop = random_drop(rng, grid, 0.5 * inst.a + 0.1);
    const Eigen::Index n = static_cast<Eigen::Index>(grid.nodes());
    inst.phi.resize(n);
    Eigen::VectorXd mphi(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      double acc = 0.0;
      for (Eigen::Index i = 1; i <= j; ++i) acc += inst.g_weights[static_cast<std::size_t>(j - i)] * mphi(i - 1);
      inst.phi(j) = std::max(0.0, inst.a - drop(j) + acc);
      mphi(j) = inst.M(inst.phi(j));
    }
    if (inst.phi.allFinite() && inst.phi.maxCoeff() < 1e100) return inst;
  }
}

GronwallSmallInstance random_small_instance(std::uint64_t seed) {
  Rng rng(seed);
  const TimeGrid grid(rng.uniform(0.5, 2.0), static_cast<std::size_t>(50 + rng.pick(251)));
  const Kernel g = random_kernel(rng);
  GronwallSmallInstance inst;
  inst.grid = grid;
  inst.g_weights = gronwall_weights(g, grid);
  inst.b = rng.uniform(0.0, 1.0);
  inst.delta = inst.b + rng.uniform(0.05, 2.0);
  const double d2 = inst.delta + rng.uniform(0.0, 1.0);
  const double gamma = rng.uniform(0.5, 2.0);
  // Scale N so that b + g*N(phi) cannot go negative: |N| <= b (d2)^{gamma+1} c on [0, b].
  const double total = std::accumulate(inst.g_weights.begin(), inst.g_weights.end(), 0.0);
  const double peak = std::pow(std::max(inst.b, 1e-300), gamma) * d2;
  const double c = rng.uniform(0.1, 0.9) * inst.b / (total * peak + 1e-300);
  inst.N = [c, gamma, d2](double r) { return c * std::pow(std::max(r, 0.0), gamma) * (r - d2); };
  const Eigen::VectorXd drop = random_drop(rng, grid, 0.5 * inst.b);
  const Eigen::Index n = static_cast<Eigen::Index>(grid.nodes());
  inst.phi.resize(n);
  Eigen::VectorXd nphi(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 1; i <= j; ++i) acc += inst.g_weights[static_cast<std::size_t>(j - i)] * nphi(i - 1);
    inst.phi(j) = std::max(0.0, std::min(inst.b + acc, inst.b + acc - drop(j)));
    nphi(j) = inst.N(inst.phi(j));
  }
  return inst;
}

std::vector<Certificate> gronwall_violation_certificates() {
  std::vector<Certificate> out;
  const TimeGrid grid(1.0, 64);
  const std::vector<double> w = gronwall_weights(constant_kernel(1.0), grid);
  const auto n = static_cast<Eigen::Index>(grid.nodes());

  auto linear = [&]() {
    GronwallLinearInstance inst;
    inst.grid = grid;
    inst.g_weights = w;
    inst.h = Eigen::VectorXd::Ones(n);
    inst.phi = volterra_forward(w, inst.h, [](double x) { return x; });
    return inst;
  };
  {  // phi exceeds h + g*phi somewhere
    auto inst = linear();
    inst.phi(10) += 0.5;
    out.push_back(gronwall_linear(inst).certificate());
  }
  {  // negative h
    auto inst = linear();
    inst.h(3) = -1.0;
    out.push_back(gronwall_linear(inst).certificate());
  }
  {  // negative kernel weight
    auto inst = linear();
    inst.g_weights[5] = -0.1;
    out.push_back(gronwall_linear(inst).certificate());
  }
  {  // r < 1
    auto inst = linear();
    inst.r = 0.5;
    out.push_back(gronwall_linear(inst).certificate());
  }

  auto local = [&]() {
    GronwallLocalInstance inst;
    inst.grid = grid;
    inst.g_weights = w;
    inst.a = 0.0;
    inst.M = [](double r) { return r + 1.0; };
    inst.phi = volterra_forward(w, Eigen::VectorXd::Zero(n), inst.M);
    return inst;
  };
  {  // a < 0
    auto inst = local();
    inst.a = -0.5;
    out.push_back(gronwall_local(inst).certificate());
  }
  {  // decreasing M
    auto inst = local();
    inst.M = [](double r) { return 2.0 - r; };
    out.push_back(gronwall_local(inst).certificate());
  }
  {  // hypothesis fails
    auto inst = local();
    inst.phi(0) = 0.75;
    out.push_back(gronwall_local(inst).certificate());
  }

  auto small = [&]() {
    GronwallSmallInstance inst;
    inst.grid = grid;
    inst.g_weights = w;
    inst.b = 0.1;
    inst.delta = 1.0;
    inst.N = [](double r) { return r * r - r; };
    inst.phi = volterra_forward(w, Eigen::VectorXd::Constant(n, 0.1), inst.N);
    return inst;
  };
  {  // b >= delta
    auto inst = small();
    inst.delta = 0.1;
    out.push_back(gronwall_small(inst).certificate());
  }
  {  // N positive inside [0, delta]
    auto inst = small();
    inst.N = [](double r) { return r - 0.5; };
    out.push_back(gronwall_small(inst).certificate());
  }
  {  // negative phi
    auto inst = small();
    inst.phi(7) = -0.01;
    out.push_back(gronwall_small(inst).certificate());
  }
  return out;
}

GronwallSuiteResult run_gronwall_suite(std::uint64_t seed, int per_lemma) {
  GronwallSuiteResult res;
  for (int i = 0; i < per_lemma; ++i) {
    const std::uint64_t s = seed * 1000003ULL + static_cast<std::uint64_t>(i);
    auto c1 = gronwall_linear(random_linear_instance(s)).certificate();
    auto c2 = gronwall_local(random_local_instance(s)).certificate();
    auto c3 = gronwall_small(random_small_instance(s)).certificate();
    res.linear_pass += c1.outcome == Outcome::pass;
    res.local_pass += c2.outcome == Outcome::pass;
    res.small_pass += c3.outcome == Outcome::pass;
    res.total += 3;
    res.certificates.push_back(std::move(c1));
    res.certificates.push_back(std::move(c2));
    res.certificates.push_back(std::move(c3));
  }
  for (auto& c : gronwall_violation_certificates()) {
    res.violations_total += 1;
    res.violations_rejected += c.outcome == Outcome::reject;
    res.certificates.push_back(std::move(c));
  }
  return res;
}

}  // namespace fraflow
