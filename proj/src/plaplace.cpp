#include "fraflow/plaplace.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace fraflow {

Grid::Grid(int dim_, int points_) : dim(dim_), points(points_) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("Grid: dimension must be 1 or 2");
  if (points < 1) throw std::invalid_argument("Grid: need at least one interior point");
}

Eigen::Index Grid::size() const { return dim == 1 ? points : static_cast<Eigen::Index>(points) * points; }

double Grid::cell_volume() const { return std::pow(h(), dim); }

namespace {

// Forward-difference operator: rows comp * cells + cell, columns unknowns.
SparseMatrix difference_matrix(const Grid& g) {
  const int m = g.points;
  const int side = m + 1;
  const Eigen::Index cells = g.dim == 1 ? side : static_cast<Eigen::Index>(side) * side;
  const double inv_h = 1.0 / g.h();
  auto unknown = [&](int a, int b) -> Eigen::Index {  // node coordinates 0..m+1
    if (a < 1 || a > m) return -1;
    if (g.dim == 1) return a - 1;
    if (b < 1 || b > m) return -1;
    return static_cast<Eigen::Index>(a - 1) + static_cast<Eigen::Index>(b - 1) * m;
  };
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index cell = 0; cell < cells; ++cell) {
    const int a = static_cast<int>(cell % side);
    const int b = g.dim == 1 ? 0 : static_cast<int>(cell / side);
    for (int comp = 0; comp < g.dim; ++comp) {
      const Eigen::Index row = comp * cells + cell;
      const Eigen::Index here = unknown(a, b);
      const Eigen::Index next = comp == 0 ? unknown(a + 1, b) : unknown(a, b + 1);
      if (next >= 0) trips.emplace_back(row, next, inv_h);
      if (here >= 0) trips.emplace_back(row, here, -inv_h);
    }
  }
  SparseMatrix d(g.dim * cells, g.size());
  d.setFromTriplets(trips.begin(), trips.end());
  return d;
}

struct CellData {
  Eigen::Index cells;
  Vector grad;     // D w
  Vector squared;  // |g|^2 + eps^2 per cell
};

CellData cell_data(const Grid& g, const SparseMatrix& d, const Vector& w, double eps) {
  CellData c;
  c.cells = d.rows() / g.dim;
  c.grad = d * w;
  c.squared = Vector::Constant(c.cells, eps * eps);
  for (int comp = 0; comp < g.dim; ++comp) c.squared += c.grad.segment(comp * c.cells, c.cells).cwiseAbs2();
  return c;
}

}  // namespace

DirichletEnergy::DirichletEnergy(Grid grid, double p, double epsilon)
    : SmoothFunctional(grid.metric()), grid_(grid), p_(p), eps_(p < 2.0 ? epsilon : 0.0), diff_(difference_matrix(grid)) {
  if (!(p > 1.0)) throw std::invalid_argument("DirichletEnergy: p must exceed 1");
}


double DirichletEnergy::value(const Vector& w) const {
  if (w.size() != grid_.size()) throw std::invalid_argument("DirichletEnergy: dimension mismatch");
  const SparseMatrix& d = diff_;
  const CellData c = cell_data(grid_, d, w, eps_);
  const double offset = eps_ > 0.0 ? std::pow(eps_, p_) : 0.0;
  double sum = 0.0;
  for (Eigen::Index i = 0; i < c.cells; ++i) sum += std::pow(c.squared(i), 0.5 * p_) - offset;
  return grid_.cell_volume() * sum / p_;
}

Vector DirichletEnergy::gradient(const Vector& z) const {
  if (z.size() != grid_.size()) throw std::invalid_argument("DirichletEnergy: dimension mismatch");
  const SparseMatrix& d = diff_;
  const CellData c = cell_data(grid_, d, z, eps_);
  Vector flux = c.grad;
  for (Eigen::Index i = 0; i < c.cells; ++i) {
    const double coef = std::pow(c.squared(i), 0.5 * (p_ - 2.0));
    for (int comp = 0; comp < grid_.dim; ++comp) flux(comp * c.cells + i) *= coef;
  }
  return d.transpose() * flux;
}

SparseMatrix DirichletEnergy::hessian(const Vector& z) const {
  const SparseMatrix& d = diff_;
  const CellData c = cell_data(grid_, d, z, eps_);
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < c.cells; ++i) {
    const double s = c.squared(i);
    const double coef = std::pow(s, 0.5 * (p_ - 2.0));
    const double outer = s > 0.0 ? (p_ - 2.0) * std::pow(s, 0.5 * (p_ - 4.0)) : 0.0;
    for (int a = 0; a < grid_.dim; ++a) {
      for (int b = 0; b < grid_.dim; ++b) {
        double v = outer * c.grad(a * c.cells + i) * c.grad(b * c.cells + i);
        if (a == b) v += coef;
        if (v != 0.0) trips.emplace_back(a * c.cells + i, b * c.cells + i, v);
      }
    }
  }
  SparseMatrix blocks(d.rows(), d.rows());
  blocks.setFromTriplets(trips.begin(), trips.end());
  SparseMatrix h = d.transpose() * blocks * d;
  return h;
}

ProxResult DirichletEnergy::prox(double lambda, const Vector& w, const ProxOptions& opts) const {
  if (p_ >= 2.0) return newton_prox(lambda, w, w, opts);
  ProxOptions loose = opts;
  loose.tolerance = std::max(opts.tolerance, 1e-6);
  Vector z = w;
  int spent = 0;
  for (double e = 1e-1; e > eps_; e *= 1e-3) {
    const DirichletEnergy smoothed(grid_, p_, e);
    try {
      ProxResult r = smoothed.newton_prox(lambda, w, z, loose);
      z = std::move(r.point);
      spent += r.iterations;
    } catch (const ProxError&) {
      // keep the last iterate, the final stage decides
    }
  }
  ProxResult r = newton_prox(lambda, w, z, opts);
  r.iterations += spent;
  return r;
}

Vector discrete_p_laplacian(const Grid& grid, const Vector& u, double p, double epsilon) {
  return -DirichletEnergy(grid, p, epsilon).gradient(u);
}

std::shared_ptr<const DirichletEnergy> dirichlet_p_energy(const Grid& grid, double p) {
  return std::make_shared<const DirichletEnergy>(grid, p);
}

std::shared_ptr<const PowerPotential> q_potential(const Grid& grid, double q) {
  return std::make_shared<const PowerPotential>(grid.metric(), q);
}

}  // namespace fraflow
