#include "fraflow/quadrature.hpp"

#include <array>
#include <cmath>
#include <queue>

namespace fraflow {

namespace {

constexpr std::array<double, 8> kXk = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                       0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                       0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                       0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr std::array<double, 8> kWk = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                       0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                       0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                       0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
// Gauss weights for the odd Kronrod nodes (indices 1, 3, 5, 7).
constexpr std::array<double, 4> kWg = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                                       0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double value;
  double error;
};

Panel gk15(const std::function<double(double)>& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double kron = kWk[7] * fc;
  double gauss = kWg[3] * fc;
  for (int i = 0; i < 7; ++i) {
    const double dx = h * kXk[i];
    const double s = f(c - dx) + f(c + dx);
    kron += kWk[i] * s;
    if (i % 2 == 1) gauss += kWg[i / 2] * s;
  }
  return {kron * h, std::abs((kron - gauss) * h)};
}

struct Piece {
  double a, b;
  Panel panel;
  bool operator<(const Piece& o) const { return panel.error < o.panel.error; }
};

}  // namespace

QuadratureResult integrate(const std::function<double(double)>& f, double a, double b, double abs_tol,
                           double rel_tol, int max_panels) {
  QuadratureResult out;
  if (a == b) return out;
  // Split the panel with the largest error estimate until the total is small enough.
  std::priority_queue<Piece> heap;
  heap.push({a, b, gk15(f, a, b)});
  out.evaluations = 15;
  double value = heap.top().panel.value;
  double error = heap.top().panel.error;
  while (static_cast<int>(heap.size()) < max_panels && error > std::max(abs_tol, rel_tol * std::abs(value))) {
    const Piece worst = heap.top();
    const double m = 0.5 * (worst.a + worst.b);
    if (!(m > worst.a && m < worst.b)) break;
    heap.pop();
    const Piece left{worst.a, m, gk15(f, worst.a, m)};
    const Piece right{m, worst.b, gk15(f, m, worst.b)};
    out.evaluations += 30;
    value += left.panel.value + right.panel.value - worst.panel.value;
    error += left.panel.error + right.panel.error - worst.panel.error;
    heap.push(left);
    heap.push(right);
  }
  // Re-sum to drop the drift of the running updates.
  out.value = 0.0;
  out.error = 0.0;
  while (!heap.empty()) {
    out.value += heap.top().panel.value;
    out.error += heap.top().panel.error;
    heap.pop();
  }
  return out;
}

QuadratureResult integrate_singular_left(const std::function<double(double)>& f, double a, double b,
                                         double abs_tol, double rel_tol) {
  const double len = b - a;
  auto g = [&](double s) {
    const double s2 = s * s;
    return f(a + len * s2 * s2) * 4.0 * len * s2 * s;
  };
  return integrate(g, 0.0, 1.0, abs_tol, rel_tol);
}

}  // namespace fraflow
