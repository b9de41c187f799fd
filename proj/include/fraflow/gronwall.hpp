#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "fraflow/certificate.hpp"
#include "fraflow/kernel.hpp"
#include "fraflow/time_grid.hpp"

namespace fraflow {

// Discrete Volterra inequalities on a uniform grid: the convolution at node j is
// the causal sum  (g * psi)_j = sum_{i=1}^j w_{j-i} psi_{i-1},  w_m = G((m+1) tau) - G(m tau).
// Sup-norms are node-wise maxima; the gap to an essential sup is not resolved.

struct GronwallLinearInstance {
  TimeGrid grid{1.0, 1};
  std::vector<double> g_weights;  // w_0..w_{N-1}
  Eigen::VectorXd phi;            // nodes 0..N
  Eigen::VectorXd h;
  double r = std::numeric_limits<double>::infinity();  // exponent in [1, inf]
};

struct GronwallLinearCertificate {
  Outcome outcome = Outcome::reject;
  std::string diagnostic;
  double M = 0.0;
  double C0 = 0.0;
  double weighted_mass = 0.0;  // sum_m w_m e^{-M (m+1) tau} <= 1/2
  double phi_norm = 0.0;
  double h_norm = 0.0;
  std::size_t worst_hypothesis_node = 0;

  Certificate certificate() const;
};

/// phi <= h + g * phi  implies  |phi|_r <= 2 e^{MS} |h|_r.
GronwallLinearCertificate gronwall_linear(const GronwallLinearInstance& inst);

/// tau-weighted discrete L^r norm over nodes 0..N (max for r = inf).
double discrete_norm(const Eigen::VectorXd& x, double tau, double r);

struct GronwallLocalInstance {
  TimeGrid grid{1.0, 1};
  std::vector<double> g_weights;
  double a = 0.0;
  std::function<double(double)> M;  // nondecreasing, nonnegative
  Eigen::VectorXd phi;
};

struct GronwallLocalCertificate {
  Outcome outcome = Outcome::reject;
  std::string diagnostic;
  double R = 0.0;  // +inf when g vanishes
  double horizon_checked = 0.0;  // min(R, S)
  double sup_phi = 0.0;          // over nodes in [0, min(R, S)]
  std::size_t worst_node = 0;

  Certificate certificate() const;
};

/// phi <= a + g * M(phi)  implies  sup_{[0, min(R,S)]} phi <= a + 1, with R the
/// largest node where int_0^R g < 1 / (4 M(a+1)).
GronwallLocalCertificate gronwall_local(const GronwallLocalInstance& inst);

struct GronwallSmallInstance {
  TimeGrid grid{1.0, 1};
  std::vector<double> g_weights;
  double b = 0.0;
  double delta = 1.0;
  std::function<double(double)> N;  // <= 0 on [0, delta]
  Eigen::VectorXd phi;
  std::size_t check_points = 1001;  // grid used to verify N <= 0 on [0, delta]
};

struct GronwallSmallCertificate {
  Outcome outcome = Outcome::reject;
  std::string diagnostic;
  double sup_phi = 0.0;
  double sampling_gap = 0.0;  // spacing of the N-check grid, reported not hidden
  std::size_t worst_node = 0;

  Certificate certificate() const;
};

/// phi <= b + g * N(phi), N <= 0 on [0, delta], delta > b  implies  sup phi <= b.
GronwallSmallCertificate gronwall_small(const GronwallSmallInstance& inst);

/// Weights of a kernel on a grid.
std::vector<double> gronwall_weights(const Kernel& g, const TimeGrid& grid);

/// (g * F(psi))_j built causally so that psi_j = base_j + (g * F(psi))_j holds with equality.
Eigen::VectorXd volterra_forward(const std::vector<double>& w, const Eigen::VectorXd& base,
                                 const std::function<double(double)>& F);

// Seeded instance families.

GronwallLinearInstance random_linear_instance(std::uint64_t seed);
GronwallLocalInstance random_local_instance(std::uint64_t seed);
GronwallSmallInstance random_small_instance(std::uint64_t seed);

struct GronwallSuiteResult {
  int linear_pass = 0, local_pass = 0, small_pass = 0;
  int total = 0;
  int violations_rejected = 0;
  int violations_total = 0;
  std::vector<Certificate> certificates;
};

/// `per_lemma` random instances of each lemma from `seed`, plus the handcrafted
/// hypothesis violations.
GronwallSuiteResult run_gronwall_suite(std::uint64_t seed, int per_lemma = 100);

/// Ten instances that break a hypothesis; each must be rejected.
std::vector<Certificate> gronwall_violation_certificates();

}  // namespace fraflow
