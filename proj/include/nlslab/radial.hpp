#pragma once

#include <cstddef>
#include <vector>

#include "nlslab/field.hpp"

// Radial fields live on r_i = (i + 1) h with a ghost zero at r_max + h. The
// Laplacian u'' + (2/r) u' is the central difference of w = r u divided by r;
// the r = 0 neighbour drops out because its weight r_0 is zero, which is the
// regularity condition u'(0) = 0 in discrete form.
namespace nlslab::radial {

/// Dirichlet form 4 pi * sum |w_{i+1} - w_i|^2 / h, the discrete integral of |grad u|^2.
inline double grad_sq(const Field& f) {
  const Grid& g = f.grid;
  const double h = g.spacing();
  double sum = 0.0;
  cplx prev{};  // w at r = 0
  for (std::size_t i = 0; i < g.n; ++i) {
    const cplx w = g.coord(i) * f[i];
    sum += std::norm(w - prev);
    prev = w;
  }
  sum += std::norm(prev);  // ghost w = 0 beyond r_max
  return 4.0 * kPi * sum / h;
}

/// du/dr at the nodes; second order, exact for even quadratics at the first node.
inline std::vector<cplx> derivative(const Field& f) {
  const Grid& g = f.grid;
  const double h = g.spacing();
  const std::size_t n = g.n;
  std::vector<cplx> d(n);
  if (n == 1) return {cplx{}};
  // u ~ a + b r^2 near the origin: u'(h) = 2 (u(2h) - u(h)) / (3h).
  d[0] = 2.0 * (f[1] - f[0]) / (3.0 * h);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  d[n - 1] = (cplx{} - f[n - 2]) / (2.0 * h);
  return d;
}

/// Applies the discrete radial Laplacian.
inline std::vector<cplx> laplacian(const Field& f) {
  const Grid& g = f.grid;
  const double h = g.spacing();
  const std::size_t n = g.n;
  std::vector<cplx> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double r = g.coord(i);
    const cplx wm = i == 0 ? cplx{} : g.coord(i - 1) * f[i - 1];
    const cplx wp = i + 1 == n ? cplx{} : g.coord(i + 1) * f[i + 1];
    out[i] = (wp - 2.0 * r * f[i] + wm) / (r * h * h);
  }
  return out;
}

/// Crank-Nicolson step of i u_t + Laplacian u = 0, solved for w = r u with the
/// Thomas algorithm. Conserves sum |w_i|^2 exactly.
class CrankNicolson {
 public:
  void apply(Field& f, double dt) {
    const Grid& g = f.grid;
    const std::size_t n = g.n;
    const double h = g.spacing();
    const cplx a = cplx(0.0, 0.5 * dt / (h * h));  // i dt / (2 h^2)
    rhs_.resize(n);
    cprime_.resize(n);
    // (I - a D2) w_new = (I + a D2) w_old, D2 = tridiag(1, -2, 1).
    for (std::size_t i = 0; i < n; ++i) {
      const cplx w = g.coord(i) * f[i];
      const cplx wm = i == 0 ? cplx{} : g.coord(i - 1) * f[i - 1];
      const cplx wp = i + 1 == n ? cplx{} : g.coord(i + 1) * f[i + 1];
      rhs_[i] = w + a * (wp - 2.0 * w + wm);
    }
    const cplx diag = 1.0 + 2.0 * a;
    const cplx off = -a;
    cprime_[0] = off / diag;
    rhs_[0] = rhs_[0] / diag;
    for (std::size_t i = 1; i < n; ++i) {
      const cplx m = diag - off * cprime_[i - 1];
      cprime_[i] = off / m;
      rhs_[i] = (rhs_[i] - off * rhs_[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) rhs_[i] -= cprime_[i] * rhs_[i + 1];
    for (std::size_t i = 0; i < n; ++i) f[i] = rhs_[i] / g.coord(i);
  }

 private:
  std::vector<cplx> rhs_;
  std::vector<cplx> cprime_;
};

}  // namespace nlslab::radial
