#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "nlslab/cutoff.hpp"
#include "nlslab/invariants.hpp"
#include "nlslab/thresholds.hpp"

namespace nlslab {

namespace detail {

/// Per-sample radius, radial derivative x^.grad u and |grad u|^2. Spectral on
/// the box, finite differences radially.
struct PointwiseGradient {
  std::vector<double> radius;
  std::vector<cplx> radial;
  std::vector<double> grad_sq;
};

/// `hat` may carry the already computed spectrum of a periodic field.
inline PointwiseGradient pointwise_gradient(const Field& f, const Samples* hat = nullptr) {
  PointwiseGradient out;
  const std::size_t size = f.size();
  out.radius.resize(size);
  out.radial.resize(size);
  out.grad_sq.resize(size);
  if (f.grid.is_periodic()) {
    const auto grad = hat ? spectral::gradient_from_spectrum(*hat, f.grid) : spectral::gradient(f);
    parallel_for(size, [&](std::size_t i) {
      const Vec3 x = f.grid.position(i);
      const double r = std::sqrt(x[0] * x[0] + x[1] * x[1] + x[2] * x[2]);
      out.radius[i] = r;
      out.grad_sq[i] = std::norm(grad[0][i]) + std::norm(grad[1][i]) + std::norm(grad[2][i]);
      out.radial[i] = r > 0.0 ? (x[0] * grad[0][i] + x[1] * grad[1][i] + x[2] * grad[2][i]) / r : cplx{};
    });
  } else {
    const auto d = radial::derivative(f);
    for (std::size_t i = 0; i < size; ++i) {
      out.radius[i] = f.grid.coord(i);
      out.radial[i] = d[i];
      out.grad_sq[i] = std::norm(d[i]);
    }
  }
  return out;
}

/// Fraction of the mass with max |x_i| >= 0.9 L.
inline double boundary_mass_fraction(const Field& f) {
  if (!f.grid.is_periodic()) return 0.0;
  const double edge = 0.9 * f.grid.half_width;
  const auto s = reduce_sum<2>(f.size(), [&](std::size_t i) {
    const Vec3 x = f.grid.position(i);
    const double a = std::norm(f[i]);
    const bool shell = std::abs(x[0]) >= edge || std::abs(x[1]) >= edge || std::abs(x[2]) >= edge;
    return std::array<double, 2>{a, shell ? a : 0.0};
  });
  return s[0] > 0.0 ? s[1] / s[0] : 0.0;
}

}  // namespace detail

inline constexpr double kBoundaryMassTol = 1e-6;

struct VarianceRate {
  double variance = 0.0;  // ||x u||^2
  double rate = 0.0;      // Im int (x . grad u) conj(u); d/dt variance = 4 rate
};

/// Variance about the box centre and its rate integrand. On the box the
/// variance only means something when the mass near the faces is negligible.
inline VarianceRate variance_and_rate(const Field& f) {
  f.require_finite("variance_and_rate");
  const double frac = detail::boundary_mass_fraction(f);
  if (frac >= kBoundaryMassTol)
    throw Error(ErrorCode::untrusted_variance,
                "mass fraction " + std::to_string(frac) + " in the outer 10% shell of the box");
  const auto pg = detail::pointwise_gradient(f);
  const auto s = reduce_sum<2>(f.size(), [&](std::size_t i) {
    const double w = f.grid.weight(i);
    const double r = pg.radius[i];
    return std::array<double, 2>{w * r * r * std::norm(f[i]), w * r * std::imag(pg.radial[i] * std::conj(f[i]))};
  });
  return {s[0], s[1]};
}

/// Localized virial quantities for the weight R^2 phi(x / R).
struct LocalVirial {
  double R = 0.0;
  double z_R = 0.0;
  double z_R_prime = 0.0;         // 2 Im int conj(u) grad W . grad u
  double second_derivative = 0.0; // right side of the local virial identity
  double virial_part = 0.0;       // 24 E - 4 ||grad u||^2
  double A_R = 0.0;               // second_derivative - virial_part
  double A_R_bound = 0.0;         // c (R^-2 ||u||^2_ext + ||u||^4_4,ext)
  double gradient_term = 0.0;     // 4 int (d_j d_k phi - 2 delta_jk) d_j u d_k conj(u)
  double gradient_bound = 0.0;    // 4 * gradient_excess * ||grad u||^2_ext
  double mass_ext = 0.0;          // all exterior norms are over |x| >= R
  double grad_sq_ext = 0.0;
  double l4_ext = 0.0;
  double exterior_gn = std::numeric_limits<double>::quiet_NaN();
};

inline LocalVirial z_R_and_second_derivative(const Field& f, const Cutoff& cutoff) {
  f.require_finite("z_R_and_second_derivative");
  const double R = cutoff.R();
  const auto pg = detail::pointwise_gradient(f);
  // z, z', A_R gradient part, A_R Laplacian part, A_R bilaplacian part, exterior M, G, L4
  const auto s = reduce_sum<8>(f.size(), [&](std::size_t i) {
    const double w = f.grid.weight(i);
    const double r = pg.radius[i];
    const double a = std::norm(f[i]);
    std::array<double, 8> t{};
    t[0] = w * cutoff.weight(r) * a;
    t[1] = 2.0 * w * cutoff.weight_slope(r) * std::imag(std::conj(f[i]) * pg.radial[i]);
    if (r >= R) {
      const double sc = r / R;
      const double radial_sq = std::norm(pg.radial[i]);
      t[2] = 4.0 * w * (Cutoff::hessian_form(sc, radial_sq, pg.grad_sq[i]) - 2.0 * pg.grad_sq[i]);
      t[3] = -w * (Cutoff::laplacian(sc) - 6.0) * a * a;
      t[4] = -w * Cutoff::bilaplacian(sc) * a / (R * R);
      t[5] = w * a;
      t[6] = w * pg.grad_sq[i];
      t[7] = w * a * a;
    }
    return t;
  });
  const Norms n = field_norms(f);
  LocalVirial out;
  out.R = R;
  out.z_R = s[0];
  out.z_R_prime = s[1];
  out.gradient_term = s[2];
  out.A_R = s[2] + s[3] + s[4];
  out.virial_part = 8.0 * n.grad_sq - 6.0 * n.l4_4;
  out.second_derivative = out.virial_part + out.A_R;
  out.mass_ext = s[5];
  out.grad_sq_ext = s[6];
  out.l4_ext = s[7];
  out.A_R_bound = Cutoff::bound_constant() * (s[5] / (R * R) + s[7]);
  out.gradient_bound = 4.0 * Cutoff::gradient_excess() * s[6];
  if (s[5] > 0.0 && s[6] > 0.0) out.exterior_gn = s[7] / (std::sqrt(s[5]) * std::pow(s[6], 1.5));
  return out;
}

/// ||u||_{L2(|x|>=R)} ||grad u||_{L2(|x|>=R)} / (||Q||_2 ||grad Q||_2).
inline double eta_geq_R(const Field& f, const GroundState& q, double R) {
  f.require_finite("eta_geq_R");
  const double limit = f.grid.half_width;
  if (!(R >= 0.0) || !(R < limit))
    throw Error(ErrorCode::out_of_range, "exterior radius must lie in [0, " + std::to_string(limit) + ")");
  const auto pg = detail::pointwise_gradient(f);
  const auto s = reduce_sum<2>(f.size(), [&](std::size_t i) {
    if (pg.radius[i] < R) return std::array<double, 2>{};
    const double w = f.grid.weight(i);
    return std::array<double, 2>{w * std::norm(f[i]), w * pg.grad_sq[i]};
  });
  return std::sqrt(s[0] * s[1] / (q.mass_sq * q.grad_sq));
}

enum class BoundMode { finite_variance, localized, radial };

inline std::string to_string(BoundMode m) {
  switch (m) {
    case BoundMode::finite_variance: return "finite-variance";
    case BoundMode::localized: return "local";
    case BoundMode::radial: return "radial";
  }
  return "unknown";
}

inline BoundMode parse_bound_mode(const std::string& s) {
  if (s == "finite-variance" || s == "finite_variance") return BoundMode::finite_variance;
  if (s == "local" || s == "localized") return BoundMode::localized;
  if (s == "radial") return BoundMode::radial;
  throw Error(ErrorCode::invalid_argument, "unknown bound mode '" + s + "'");
}

/// Absolute constants the localized and radial statements leave open.
struct BoundConstants {
  double gamma0 = 0.125;
  double c_R = 2.0;
  double c2 = 10.0;
};

struct BlowupBound {
  BoundMode mode = BoundMode::finite_variance;
  double lambda = 0.0;
  double gamma = 0.0;
  double R = 0.0;
  double t_b = 0.0;
  double r0 = 0.0;
  double rprime0 = 0.0;
  double beta = 1.0;      // M[u] / M[Q] of the data the bound was computed for
  double t_b_unit = 0.0;  // bound for the unit-mass rescaling; t_b = beta^2 t_b_unit
  std::string note;
};

/// Positive root of -t^2/2 + r' t + r.
inline double quadratic_blowup_time(double r0, double rprime0) {
  return rprime0 + std::sqrt(rprime0 * rprime0 + 2.0 * r0);
}

/// Positive root of -t^2/4 + r' t + r.
inline double radial_blowup_time(double r0, double rprime0) {
  return 2.0 * rprime0 + std::sqrt(4.0 * rprime0 * rprime0 + 4.0 * r0);
}

/// Relative slack for M = M[Q]; the field-level bounds meet it exactly by scaling.
inline constexpr double kHypothesisTol = 1e-6;

namespace detail {
// Checks M = M[Q], ME < M[Q]E[Q] and eta >= lambda; returns lambda.
inline double check_blowup_hypotheses(const InvariantReport& r, const GroundState& q) {
  if (std::abs(r.mass / q.mass_sq - 1.0) > kHypothesisTol)
    throw Error(ErrorCode::not_applicable,
                "M[u] = M[Q] fails (M[u]/M[Q] = " + std::to_string(r.mass / q.mass_sq) + "); rescale first");
  const double ratio = me_ratio(r, q);
  if (ratio >= 1.0 - kBoundaryTol)
    throw Error(ErrorCode::not_applicable, "M[u]E[u] < M[Q]E[Q] fails (ratio " + std::to_string(ratio) + ")");
  const double lambda = *solve_lambda(ratio).lambda;
  if (r.eta < lambda - kBoundaryTol)
    throw Error(ErrorCode::not_applicable, "eta(0) >= lambda fails (eta " + std::to_string(r.eta) +
                                               ", lambda " + std::to_string(lambda) + ")");
  return lambda;
}
}  // namespace detail

/// Finite-variance bound; rate_raw is Im int (x . grad u0) conj(u0).
inline BlowupBound bound_finite_variance(const InvariantReport& report, double variance0, double rate_raw,
                                         const GroundState& q) {
  const double lambda = detail::check_blowup_hypotheses(report, q);
  const double scale = q.energy * lambda * lambda * (lambda - 1.0);
  BlowupBound b;
  b.mode = BoundMode::finite_variance;
  b.lambda = lambda;
  b.r0 = variance0 / (48.0 * scale);
  b.rprime0 = rate_raw / (12.0 * scale);
  b.t_b = quadratic_blowup_time(b.r0, b.rprime0);
  b.t_b_unit = b.t_b;
  return b;
}

/// Localized bound; z_prime0 is dz_R/dt at t = 0.
inline BlowupBound bound_localized(const InvariantReport& report, double z0, double z_prime0, double gamma,
                                   double R, const GroundState& q, const BoundConstants& k = {}) {
  const double lambda = detail::check_blowup_hypotheses(report, q);
  if (!(gamma > 0.0) || !(gamma < std::min(lambda - 1.0, k.gamma0)))
    throw Error(ErrorCode::out_of_range, "gamma must lie in (0, min(lambda - 1, gamma0)) = (0, " +
                                             std::to_string(std::min(lambda - 1.0, k.gamma0)) + ")");
  const double r_min = k.c_R / std::sqrt(gamma);
  if (!(R >= r_min))
    throw Error(ErrorCode::out_of_range, "R = " + std::to_string(R) + " is below c_R gamma^-1/2 = " +
                                             std::to_string(r_min));
  const double scale = 48.0 * q.energy * lambda * lambda * (lambda - 1.0 - gamma);
  BlowupBound b;
  b.mode = BoundMode::localized;
  b.lambda = lambda;
  b.gamma = gamma;
  b.R = R;
  b.r0 = z0 / scale;
  b.rprime0 = z_prime0 / scale;
  b.t_b = quadratic_blowup_time(b.r0, b.rprime0);
  b.t_b_unit = b.t_b;
  b.note = "conditional on eta_{>=R}(t) <~ gamma for all t";
  return b;
}

/// Radius used by the radial bound: c2 max(1, (lambda (lambda - 1))^-1/2).
inline double radial_bound_radius(double lambda, const BoundConstants& k = {}) {
  return k.c2 * std::max(1.0, 1.0 / std::sqrt(lambda * (lambda - 1.0)));
}

/// Radial bound from z_R and dz_R/dt at t = 0 with R = radial_bound_radius(lambda).
inline BlowupBound bound_radial(const InvariantReport& report, double z0, double z_prime0, const GroundState& q,
                                const BoundConstants& k = {}) {
  const double lambda = detail::check_blowup_hypotheses(report, q);
  const double scale = 48.0 * q.energy * lambda * lambda * (lambda - 1.0);
  BlowupBound b;
  b.mode = BoundMode::radial;
  b.lambda = lambda;
  b.R = radial_bound_radius(lambda, k);
  b.r0 = z0 / scale;
  b.rprime0 = z_prime0 / scale;
  b.t_b = radial_blowup_time(b.r0, b.rprime0);
  b.t_b_unit = b.t_b;
  return b;
}

/// Invariants of v(x) = beta u(beta x) from those of u.
inline InvariantReport rescaled_report(const InvariantReport& r, double beta) {
  InvariantReport v = r;
  v.mass = r.mass / beta;
  v.grad_sq = beta * r.grad_sq;
  v.l4_4 = beta * r.l4_4;
  v.energy = beta * r.energy;
  return v;
}

/// Parameters of the field-level bound.
struct BoundRequest {
  BoundMode mode = BoundMode::finite_variance;
  double R = 12.0;  // local mode, in unit-mass coordinates
  double gamma = 0.05;
  BoundConstants constants;
};

/// Bound for arbitrary-mass data through v(x) = beta u(beta x), beta = M[u]/M[Q].
/// The unit-mass quantities come from u by exact scaling (variance / beta^3,
/// rate / beta, z_R[v] = z_{beta R}[u] / beta^3, z_R'[v] = z_{beta R}'[u] / beta),
/// so nothing is re-interpolated. t_b is returned in the time of u: beta^2 t_b[v].
inline BlowupBound bound_for_field(const Field& f, const GroundState& q, const BoundRequest& req) {
  const InvariantReport ru = compute_invariants(f, q);
  if (!(ru.mass > 0.0)) throw Error(ErrorCode::zero_mass, "bound of a massless field");
  const double beta = ru.mass / q.mass_sq;
  const InvariantReport rv = rescaled_report(ru, beta);
  const double lambda = detail::check_blowup_hypotheses(rv, q);
  const double b3 = beta * beta * beta;
  auto local = [&](double Rv) {
    const double Ru = beta * Rv;
    if (!(Ru < f.grid.half_width))
      throw Error(ErrorCode::out_of_range, "cutoff radius " + std::to_string(Ru) + " does not fit in the box");
    return z_R_and_second_derivative(f, Cutoff(Ru));
  };
  BlowupBound b;
  switch (req.mode) {
    case BoundMode::finite_variance: {
      const VarianceRate vr = variance_and_rate(f);
      b = bound_finite_variance(rv, vr.variance / b3, vr.rate / beta, q);
      break;
    }
    case BoundMode::localized: {
      const LocalVirial lv = local(req.R);
      b = bound_localized(rv, lv.z_R / b3, lv.z_R_prime / beta, req.gamma, req.R, q, req.constants);
      break;
    }
    case BoundMode::radial: {
      if (f.grid.is_periodic()) throw Error(ErrorCode::mode_mismatch, "radial bound needs a radial field");
      const LocalVirial lv = local(radial_bound_radius(lambda, req.constants));
      b = bound_radial(rv, lv.z_R / b3, lv.z_R_prime / beta, q, req.constants);
      break;
    }
  }
  b.beta = beta;
  b.t_b_unit = b.t_b;
  b.t_b = beta * beta * b.t_b;
  return b;
}

/// Radial bound of a radial field of any mass.
inline BlowupBound bound_radial(const Field& f, const GroundState& q, const BoundConstants& k = {}) {
  BoundRequest req;
  req.mode = BoundMode::radial;
  req.constants = k;
  return bound_for_field(f, q, req);
}

}  // namespace nlslab
