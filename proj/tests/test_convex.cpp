#include <doctest.h>

#include <cmath>
#include <random>

#include "convex_properties.hpp"
#include "fraflow/functional.hpp"
#include "fraflow/plaplace.hpp"

using namespace fraflow;

namespace {

// Real root of z^3 + p z + q = 0 with p > 0 (one real root).
double cardano(double p, double q) {
  const double d = std::sqrt(q * q / 4 + p * p * p / 27);
  return std::cbrt(-q / 2 + d) + std::cbrt(-q / 2 - d);
}

Vector random_vector(Eigen::Index n, std::uint64_t seed, double r = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-r, r);
  Vector w(n);
  for (Eigen::Index i = 0; i < n; ++i) w[i] = u(rng);
  return w;
}

}  // namespace

TEST_CASE("quadratic prox and envelope") {
  QuadraticEnergy phi;
  const Vector w = random_vector(5, 1);
  const YosidaEval e = yosida(phi, 1.0, w);
  CHECK((e.resolvent.point - w / 2).norm() < 1e-15);
  CHECK((e.yosida - w / 2).norm() < 1e-15);
  CHECK(e.envelope == doctest::Approx(w.squaredNorm() / 4).epsilon(1e-14));
  for (double lambda : {0.1, 2.0})
    CHECK(yosida(phi, lambda, w).envelope == doctest::Approx(w.squaredNorm() / (2 * (1 + lambda))).epsilon(1e-14));
}

TEST_CASE("power prox q=2 is w/(1+lambda)") {
  PowerPotential phi(Metric{}, 2.0);
  const Vector w = random_vector(7, 2, 3.0);
  for (double lambda : {0.01, 0.5, 4.0})
    CHECK((resolvent(phi, lambda, w).point - w / (1 + lambda)).norm() < 1e-14);
}

TEST_CASE("power prox q=4 matches the scalar cubic") {
  PowerPotential phi(Metric{}, 4.0);
  Vector w(1);
  w << 2.0;
  const double lambda = 0.5;
  const YosidaEval e = yosida(phi, lambda, w);
  const double z = e.resolvent.point[0];
  // z + lambda z^3 = w
  CHECK(z == doctest::Approx(cardano(1 / lambda, -w[0] / lambda)).epsilon(1e-13));
  CHECK(e.yosida[0] == doctest::Approx(z * z * z).epsilon(1e-12));
  CHECK(power_prox_scalar(2.0, 0.5, 4.0) == doctest::Approx(z).epsilon(1e-14));
}

TEST_CASE("power prox of a non-integer exponent") {
  for (double q : {1.2, 1.5, 3.0, 6.0})
    for (double r : {0.0, 1e-9, 0.3, 5.0, 1e4}) {
      const double s = power_prox_scalar(r, 0.7, q);
      CHECK(s >= 0.0);
      CHECK(s + 0.7 * std::pow(s, q - 1) == doctest::Approx(r).epsilon(1e-12).scale(1e-300));
    }
}

TEST_CASE("l1 and box prox") {
  L1Norm l1(Metric{}, 1.0);
  Vector w(4);
  w << 2.0, -0.3, 0.5, -3.0;
  Vector expect(4);
  expect << 1.5, 0.0, 0.0, -2.5;
  CHECK((resolvent(l1, 0.5, w).point - expect).norm() < 1e-15);
  BoxIndicator box(Metric{}, -1.0, 1.0);
  Vector clip(4);
  clip << 1.0, -0.3, 0.5, -1.0;
  CHECK((resolvent(box, 0.1, w).point - clip).norm() == 0.0);
  CHECK(std::isinf(box.value(w)));
  CHECK_FALSE(box.in_domain(w));
  CHECK(box.value(clip) == 0.0);
}

TEST_CASE("envelope increases toward phi as lambda decreases") {
  const Vector w = random_vector(6, 3, 1.5);
  PowerPotential phi(Metric{}, 4.0);
  auto d = dirichlet_p_energy(Grid(1, 6), 3.0);
  for (const Functional* f : {static_cast<const Functional*>(&phi), static_cast<const Functional*>(d.get())}) {
    double prev = -1.0;
    for (double lambda : {1.0, 0.1, 0.01, 1e-3, 1e-4, 1e-5}) {
      const double env = yosida(*f, lambda, w).envelope;
      CHECK(env >= prev);
      CHECK(env <= f->value(w) + 1e-14);
      prev = env;
    }
    CHECK(prev == doctest::Approx(f->value(w)).epsilon(0.05));
  }
}

TEST_CASE("p=3 Dirichlet prox reaches the residual tolerance") {
  auto d = dirichlet_p_energy(Grid(1, 8), 3.0);
  const Metric g = d->metric();
  for (std::uint64_t seed = 10; seed < 20; ++seed) {
    const Vector w = random_vector(8, seed, 2.0);
    for (double lambda : {0.01, 0.1, 1.0}) {
      const ProxResult r = resolvent(*d, lambda, w);
      const Vector res = (r.point - w) / lambda + d->gradient(r.point);
      CHECK(g.norm(res) <= 1e-8);
      CHECK(r.residual <= 1e-8);
    }
  }
}

TEST_CASE("prox failure is reported with residual and iterations") {
  auto d = dirichlet_p_energy(Grid(1, 8), 4.0);
  const Vector w = random_vector(8, 5, 50.0);
  ProxOptions opts;
  opts.max_iterations = 1;
  opts.tolerance = 1e-14;
  try {
    resolvent(*d, 10.0, w, opts);
    FAIL("expected ProxError");
  } catch (const ProxError& e) {
    CHECK(e.iterations() == 1);
    CHECK(e.residual() > 0.0);
  }
}

TEST_CASE("minimal section of smooth functionals") {
  const Vector w = random_vector(5, 6);
  QuadraticEnergy quad;
  MinimalSection m = minimal_section(quad, w);
  CHECK(m.converged);
  CHECK((m.value - w).norm() < 1e-6);

  PowerPotential pw(Metric{}, 4.0);
  m = minimal_section(pw, w);
  CHECK(m.converged);
  const Vector cube = w.array().abs().square() * w.array();
  CHECK((m.value - cube).norm() < 1e-5);

  // p = 2 Dirichlet on 1D m=16: the section is the tridiagonal second difference.
  const Grid grid(1, 16);
  auto lap = dirichlet_p_energy(grid, 2.0);
  const Vector u = random_vector(16, 7);
  m = minimal_section(*lap, u);
  CHECK(m.converged);
  const double h = grid.h();
  Vector tri(16);
  for (int i = 0; i < 16; ++i) {
    const double left = i > 0 ? u[i - 1] : 0.0;
    const double right = i < 15 ? u[i + 1] : 0.0;
    tri[i] = (2 * u[i] - left - right) / (h * h);
  }
  CHECK((m.value - tri).norm() / tri.norm() < 1e-6);
  CHECK((lap->gradient(u) - tri).norm() / tri.norm() < 1e-12);
}

TEST_CASE("minimal section flags points outside the domain of the subdifferential") {
  BoxIndicator box(Metric{}, -1.0, 1.0);
  Vector w(2);
  w << 2.0, 0.0;
  // outside the box: A_lambda w = (w - P w)/lambda grows like 1/lambda
  const MinimalSection m = minimal_section(box, w);
  CHECK_FALSE(m.converged);
  CHECK(m.increments.size() + 1 == m.lambdas.size());
}

TEST_CASE("Yosida bound against the minimal section") {
  PowerPotential pw(Metric{}, 3.0);
  auto d = dirichlet_p_energy(Grid(1, 8), 3.0);
  for (const Functional* f : {static_cast<const Functional*>(&pw), static_cast<const Functional*>(d.get())}) {
    for (std::uint64_t seed = 30; seed < 40; ++seed) {
      const Vector w = random_vector(f == &pw ? 5 : 8, seed);
      const MinimalSection m = minimal_section(*f, w);
      REQUIRE(m.converged);
      const Metric& g = f->metric();
      for (double lambda : {1.0, 0.1, 0.01})
        CHECK(g.norm(yosida(*f, lambda, w).yosida) <= g.norm(m.value) * (1 + 1e-6) + 1e-8);
    }
  }
}

TEST_CASE("randomized resolvent properties on every built-in") {
  std::uint64_t seed = 2024;
  for (const auto& f : testing::builtin_suite()) {
    const testing::PropertyTally t = testing::check_properties(f, 100, seed++);
    INFO(t.name);
    CHECK(t.samples == 300);
    CHECK(t.nonexpansive <= 1e-8);
    CHECK(t.lipschitz <= 1e-8);
    CHECK(t.monotone <= 1e-8);
    CHECK(t.sandwich <= 1e-8);
    CHECK(t.identity <= 1e-13);
  }
}
