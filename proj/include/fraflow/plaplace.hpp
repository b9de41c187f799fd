#pragma once

#include <memory>

#include "fraflow/functional.hpp"

namespace fraflow {

/// Uniform grid on (0,1)^dim with `points` interior nodes per axis, h = 1/(points+1)
/// and zero ghost values on the boundary. Unknowns are ordered x-fastest.
struct Grid {
  int dim = 1;
  int points = 2;

  Grid() = default;
  Grid(int dim, int points);

  double h() const { return 1.0 / (points + 1); }
  Eigen::Index size() const;
  double cell_volume() const;
  Metric metric() const { return Metric{cell_volume()}; }
  /// Interior node coordinates along one axis, index 0..points-1.
  double coordinate(int i) const { return (i + 1) * h(); }
};

/// Regularization used in |grad u|^{p-2} when p < 2.
inline constexpr double kFluxEpsilon = 1e-12;

/// (1/p) sum over cells of h^dim |grad_h w|^p with forward differences; for p < 2
/// |g|^p is replaced by (|g|^2 + eps^2)^{p/2} - eps^p.
class DirichletEnergy : public SmoothFunctional {
 public:
  DirichletEnergy(Grid grid, double p, double epsilon = kFluxEpsilon);

  std::string name() const override { return "dirichlet"; }
  double value(const Vector& w) const override;
  Vector gradient(const Vector& z) const override;
  SparseMatrix hessian(const Vector& z) const override;
  /// For p < 2 the Newton solve is warm-started through a decreasing eps sequence.
  ProxResult prox(double lambda, const Vector& w, const ProxOptions& opts) const override;

  const Grid& grid() const noexcept { return grid_; }
  double exponent() const noexcept { return p_; }

 private:
  Grid grid_;
  double p_;
  double eps_;
  SparseMatrix diff_;
};

/// Divergence of |grad u|^{p-2} grad u (backward differences of forward-difference
/// fluxes). Equals minus the metric gradient of DirichletEnergy.
Vector discrete_p_laplacian(const Grid& grid, const Vector& u, double p, double epsilon = kFluxEpsilon);

std::shared_ptr<const DirichletEnergy> dirichlet_p_energy(const Grid& grid, double p);
std::shared_ptr<const PowerPotential> q_potential(const Grid& grid, double q);

}  // namespace fraflow
