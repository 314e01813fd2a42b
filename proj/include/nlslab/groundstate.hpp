#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <string>
#include <vector>

#include "nlslab/field.hpp"

namespace nlslab {

/// Residuals of the identities a certified ground state must satisfy.
struct Certificate {
  double grad_over_mass = 0.0;  // |grad_sq / mass_sq - 3|
  double l4_over_mass = 0.0;    // |l4_4 / mass_sq - 4|
  double energy_over_grad = 0.0;  // |E / grad_sq - 1/6|
  bool positive = false;
  bool decreasing = false;

  double worst() const { return std::max({grad_over_mass, l4_over_mass, energy_over_grad}); }
};

/// Radial ground state Q of -Q + Laplacian Q + Q^3 = 0 with its norms.
///
/// The profile is tabulated on r_j = j * r_max / n, j = 0..n. Beyond the
/// matching radius the stored values come from the exact linear tail
/// c e^{-r} / r, which is also used past r_max.
struct GroundState {
  std::vector<double> r;
  std::vector<double> profile;
  double mass_sq = 0.0;
  double grad_sq = 0.0;
  double l4_4 = 0.0;
  double energy = 0.0;
  double c_gn = 0.0;
  double shoot_value = 0.0;
  double tol = 0.0;
  double r_max = 0.0;
  std::size_t n = 0;
  double tail_coeff = 0.0;
  double match_radius = 0.0;
  int iterations = 0;
  Certificate certificate;

  double spacing() const { return r_max / static_cast<double>(n); }

  double tail(double radius) const { return tail_coeff * std::exp(-radius) / radius; }

  /// Q(|radius|) by 4-point Lagrange interpolation, even across the origin.
  double value(double radius) const {
    radius = std::abs(radius);
    if (radius >= r_max) return tail(radius);
    const double h = spacing();
    const double s = radius / h;
    const long j = static_cast<long>(std::floor(s));
    const double t = s - static_cast<double>(j);
    const double a = node(j - 1), b = node(j), c = node(j + 1), d = node(j + 2);
    // Lagrange cubic through (-1, a), (0, b), (1, c), (2, d) evaluated at t.
    const double c1 = -a / 3.0 - 0.5 * b + c - d / 6.0;
    const double c2 = 0.5 * (a + c) - b;
    const double c3 = (d - a) / 6.0 + 0.5 * (b - c);
    return b + t * (c1 + t * (c2 + t * c3));
  }

  /// dQ/dr of the same interpolant.
  double derivative(double radius) const {
    const double sign = radius < 0.0 ? -1.0 : 1.0;
    radius = std::abs(radius);
    if (radius >= r_max) return -sign * tail(radius) * (1.0 + 1.0 / radius);
    const double h = spacing();
    const double s = radius / h;
    const long j = static_cast<long>(std::floor(s));
    const double t = s - static_cast<double>(j);
    const double a = node(j - 1), b = node(j), c = node(j + 1), d = node(j + 2);
    const double c1 = -a / 3.0 - 0.5 * b + c - d / 6.0;
    const double c2 = 0.5 * (a + c) - b;
    const double c3 = (d - a) / 6.0 + 0.5 * (b - c);
    return sign * (c1 + t * (2.0 * c2 + 3.0 * t * c3)) / h;
  }

  double peak() const { return profile.empty() ? 0.0 : profile.front(); }

 private:
  double node(long j) const {
    if (j < 0) j = -j;
    if (j > static_cast<long>(n)) return tail(static_cast<double>(j) * spacing());
    return profile[static_cast<std::size_t>(j)];
  }
};

namespace detail {

enum class ShotOutcome { undershoot, overshoot };

struct Shot {
  ShotOutcome outcome = ShotOutcome::undershoot;
  std::vector<double> q, dq;  // only filled when recording
};

// RK4 for (Q, Q') with Q'' = -(2/r) Q' + Q - Q^3, started from the series
// Q ~ Q0 + (Q0 - Q0^3) r^2 / 6 at r = h.
inline Shot shoot(double q0, double r_max, std::size_t n, bool record) {
  const double h = r_max / static_cast<double>(n);
  Shot shot;
  if (record) {
    shot.q.assign(n + 1, 0.0);
    shot.dq.assign(n + 1, 0.0);
    shot.q[0] = q0;
  }
  const double c = q0 - q0 * q0 * q0;
  double q = q0 + c * h * h / 6.0;
  double p = c * h / 3.0;
  if (record) {
    shot.q[1] = q;
    shot.dq[1] = p;
  }
  auto rhs = [](double r, double y, double dy) { return -2.0 / r * dy + y - y * y * y; };
  bool decided = false;
  for (std::size_t i = 1; i < n; ++i) {
    const double r = static_cast<double>(i) * h;
    const double k1q = p, k1p = rhs(r, q, p);
    const double k2q = p + 0.5 * h * k1p, k2p = rhs(r + 0.5 * h, q + 0.5 * h * k1q, p + 0.5 * h * k1p);
    const double k3q = p + 0.5 * h * k2p, k3p = rhs(r + 0.5 * h, q + 0.5 * h * k2q, p + 0.5 * h * k2p);
    const double k4q = p + h * k3p, k4p = rhs(r + h, q + h * k3q, p + h * k3p);
    q += h / 6.0 * (k1q + 2.0 * k2q + 2.0 * k3q + k4q);
    p += h / 6.0 * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
    if (record) {
      shot.q[i + 1] = q;
      shot.dq[i + 1] = p;
    }
    if (!decided) {
      if (q < 0.0) {
        shot.outcome = ShotOutcome::overshoot;
        decided = true;
      } else if (p > 0.0) {
        shot.outcome = ShotOutcome::undershoot;
        decided = true;
      }
      if (decided && !record) return shot;
    }
    if (!std::isfinite(q) || std::abs(q) > 1e6) break;
  }
  return shot;
}

inline double trapezoid(const std::vector<double>& f, double h) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) s += (i == 0 || i + 1 == f.size() ? 0.5 : 1.0) * f[i];
  return s * h;
}

}  // namespace detail

inline void certify_from_norms(GroundState& q);

/// Fills norms, energy, c_GN and the certificate from `profile`/`r`. The
/// gradient uses `dprofile` when given, otherwise centered differences.
inline void certify(GroundState& q, const std::vector<double>& dprofile) {
  const std::size_t m = q.profile.size();
  const double h = q.spacing();
  std::vector<double> mass(m), grad(m), quart(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double r = q.r[i], v = q.profile[i];
    double d;
    if (!dprofile.empty()) {
      d = dprofile[i];
    } else if (i == 0) {
      d = 0.0;
    } else if (i + 1 == m) {
      d = (q.tail(r + h) - q.profile[i - 1]) / (2.0 * h);
    } else {
      d = (q.profile[i + 1] - q.profile[i - 1]) / (2.0 * h);
    }
    mass[i] = 4.0 * kPi * r * r * v * v;
    grad[i] = 4.0 * kPi * r * r * d * d;
    quart[i] = 4.0 * kPi * r * r * v * v * v * v;
  }
  q.mass_sq = detail::trapezoid(mass, h);
  q.grad_sq = detail::trapezoid(grad, h);
  q.l4_4 = detail::trapezoid(quart, h);
  certify_from_norms(q);
}

/// Energy, c_GN and the certificate from the stored norms and profile.
inline void certify_from_norms(GroundState& q) {
  const std::size_t m = q.profile.size();
  q.energy = 0.5 * q.grad_sq - 0.25 * q.l4_4;
  q.c_gn = 4.0 / (3.0 * std::sqrt(q.mass_sq) * std::sqrt(q.grad_sq));

  Certificate& c = q.certificate;
  c.grad_over_mass = std::abs(q.grad_sq / q.mass_sq - 3.0);
  c.l4_over_mass = std::abs(q.l4_4 / q.mass_sq - 4.0);
  c.energy_over_grad = std::abs(q.energy / q.grad_sq - 1.0 / 6.0);
  c.positive = std::all_of(q.profile.begin(), q.profile.end(), [](double v) { return v > 0.0; });
  c.decreasing = true;
  for (std::size_t i = 1; i < m; ++i)
    if (!(q.profile[i] < q.profile[i - 1])) c.decreasing = false;
}

inline void require_certified(const GroundState& q, double cert_tol) {
  const Certificate& c = q.certificate;
  if (!c.positive || !c.decreasing || !(c.worst() <= cert_tol)) {
    std::ostringstream os;
    os.precision(3);
    os << "ground state residuals |grad/mass-3|=" << c.grad_over_mass
       << " |l4/mass-4|=" << c.l4_over_mass << " |E/grad-1/6|=" << c.energy_over_grad
       << " positive=" << c.positive << " decreasing=" << c.decreasing << " (cert_tol " << cert_tol << ")";
    throw Error(ErrorCode::certification, os.str());
  }
}

/// Shooting on Q(0) between a turning (undershoot) and a sign-crossing
/// (overshoot) solution, starting from the bracket [1, 10].
inline GroundState solve_ground_state(double r_max, std::size_t n, double tol, double cert_tol = 1e-6) {
  if (!(r_max >= 15.0)) throw Error(ErrorCode::invalid_argument, "r_max must be at least 15");
  if (!(tol > 0.0) || tol > 1e-8) throw Error(ErrorCode::invalid_argument, "tol must lie in (0, 1e-8]");
  if (n < 64) throw Error(ErrorCode::invalid_argument, "need at least 64 radial steps");

  double lo = 1.0, hi = 10.0;
  if (detail::shoot(lo, r_max, n, false).outcome != detail::ShotOutcome::undershoot ||
      detail::shoot(hi, r_max, n, false).outcome != detail::ShotOutcome::overshoot)
    throw Error(ErrorCode::solver_failure, "initial bracket [1, 10] does not straddle the ground state");

  int iterations = 0;
  while (hi - lo >= tol) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    (detail::shoot(mid, r_max, n, false).outcome == detail::ShotOutcome::overshoot ? hi : lo) = mid;
    ++iterations;
  }

  const double q0 = 0.5 * (lo + hi);
  const auto mid = detail::shoot(q0, r_max, n, true);
  const auto low = detail::shoot(lo, r_max, n, true);
  const auto high = detail::shoot(hi, r_max, n, true);

  // Trust the shot while the bracket ends agree to 1e-6 relative and the
  // profile is still positive and falling.
  const double h = r_max / static_cast<double>(n);
  std::size_t match = 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const double v = mid.q[i];
    if (!(v > 0.0) || !(mid.dq[i] < 0.0) || std::abs(high.q[i] - low.q[i]) > 1e-6 * v) break;
    match = i;
  }
  if (match < n / 8)
    throw Error(ErrorCode::solver_failure, "shooting diverged before r = " + std::to_string(match * h));

  GroundState q;
  q.n = n;
  q.r_max = r_max;
  q.tol = tol;
  q.shoot_value = q0;
  q.iterations = iterations;
  q.match_radius = static_cast<double>(match) * h;
  q.tail_coeff = mid.q[match] * q.match_radius * std::exp(q.match_radius);
  q.r.resize(n + 1);
  q.profile.resize(n + 1);
  std::vector<double> dq(n + 1);
  for (std::size_t i = 0; i <= n; ++i) {
    const double r = static_cast<double>(i) * h;
    q.r[i] = r;
    if (i <= match) {
      q.profile[i] = mid.q[i];
      dq[i] = i == 0 ? 0.0 : mid.dq[i];
    } else {
      q.profile[i] = q.tail(r);
      dq[i] = -q.tail(r) * (1.0 + 1.0 / r);
    }
  }
  certify(q, dq);
  require_certified(q, cert_tol);
  return q;
}

/// Samples x -> e^{i theta} lambda^{3/2} beta^{-1} Q(lambda (x / beta - x0)).
inline Field sample_soliton(const GroundState& q, const Grid& grid, double scale, const Vec3& x0, double theta,
                            double mass_scale) {
  if (!(scale > 0.0) || !(mass_scale > 0.0))
    throw Error(ErrorCode::invalid_argument, "soliton scale and mass scale must be positive");
  const double lam = scale, beta = mass_scale;
  const Vec3 center{beta * x0[0], beta * x0[1], beta * x0[2]};
  if (!grid.is_periodic() && x0 != Vec3{0.0, 0.0, 0.0})
    throw Error(ErrorCode::mode_mismatch, "radial grids only hold solitons centred at the origin");
  if (q.value(lam * grid.half_width / beta) >= 1e-8 * q.peak())
    throw Error(ErrorCode::domain_too_small, "soliton tail at the box edge exceeds 1e-8 of its peak");

  const cplx amp = std::polar(std::pow(lam, 1.5) / beta, theta);
  if (!grid.is_periodic()) {
    Field f(grid);
    for (std::size_t i = 0; i < grid.n; ++i) f[i] = amp * q.value(lam * grid.coord(i) / beta);
    return f;
  }
  Field f(grid);
  parallel_for(f.size(), [&](std::size_t i) {
    const Vec3 x = grid.position(i);
    const double dx = grid.min_image(x[0] - center[0]), dy = grid.min_image(x[1] - center[1]),
                 dz = grid.min_image(x[2] - center[2]);
    f[i] = amp * q.value(lam / beta * std::sqrt(dx * dx + dy * dy + dz * dz));
  });
  return f;
}

}  // namespace nlslab
