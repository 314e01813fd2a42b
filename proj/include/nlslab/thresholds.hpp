#pragma once

#include <cmath>
#include <optional>
#include <sstream>
#include <string>

#include "nlslab/invariants.hpp"

namespace nlslab {

inline constexpr double kRootTol = 1e-12;

/// 3 l^2 - 2 l^3, the image of eta on the lower GN curve.
inline double threshold_cubic(double l) { return l * l * (3.0 - 2.0 * l); }

struct LambdaRoots {
  std::optional<double> lambda_minus;  // in [0, 1), present when me_ratio >= 0
  std::optional<double> lambda;        // > 1
};

namespace detail {
// Root of threshold_cubic(l) = target on [lo, hi] where the cubic is monotone.
inline double bisect_cubic(double target, double lo, double hi) {
  const double g_lo = threshold_cubic(lo) - target;
  if (g_lo == 0.0) return lo;
  for (int it = 0; it < 200 && hi - lo > kRootTol; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = threshold_cubic(mid) - target;
    if (g == 0.0) return mid;
    ((g > 0.0) == (g_lo > 0.0) ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}
}  // namespace detail

/// Roots of 3 l^2 - 2 l^3 = me_ratio below the threshold. Bisection only: at
/// me_ratio -> 1 the two roots merge into a double root.
inline LambdaRoots solve_lambda(double me_ratio) {
  if (!std::isfinite(me_ratio)) throw Error(ErrorCode::invalid_argument, "mass-energy ratio is not finite");
  if (me_ratio >= 1.0 - kRootTol)
    throw Error(ErrorCode::boundary_excluded, "mass-energy ratio " + std::to_string(me_ratio) + " is not below 1");
  LambdaRoots roots;
  if (me_ratio >= 0.0) roots.lambda_minus = detail::bisect_cubic(me_ratio, 0.0, 1.0);
  double upper = 2.0;
  while (threshold_cubic(upper) > me_ratio) upper *= 2.0;
  roots.lambda = detail::bisect_cubic(me_ratio, 1.0, upper);
  return roots;
}

struct GalileanReduction {
  Field field;
  Vec3 xi0{};
};

/// u -> e^{i x . xi0} u with xi0 = -P/M, which removes the momentum.
inline GalileanReduction galilean_reduce(const Field& f) {
  f.require_finite("galilean_reduce");
  const Norms n = field_norms(f);
  if (!(n.mass > 0.0)) throw Error(ErrorCode::undefined_transform, "Galilean reduction of a massless field");
  GalileanReduction out{f, {-n.momentum[0] / n.mass, -n.momentum[1] / n.mass, -n.momentum[2] / n.mass}};
  if (!f.grid.is_periodic()) return out;  // radial fields carry no momentum
  const Vec3 xi = out.xi0;
  parallel_for(f.size(), [&](std::size_t i) {
    const Vec3 x = f.grid.position(i);
    out.field[i] *= std::polar(1.0, x[0] * xi[0] + x[1] * xi[1] + x[2] * xi[2]);
  });
  return out;
}

enum class DichotomyCase { global_bounded, above_threshold, not_covered };

inline std::string to_string(DichotomyCase c) {
  switch (c) {
    case DichotomyCase::global_bounded: return "global_bounded";
    case DichotomyCase::above_threshold: return "above_threshold";
    case DichotomyCase::not_covered: return "not_covered";
  }
  return "unknown";
}

struct Classification {
  double me_ratio = 0.0;
  std::optional<double> lambda_minus;
  std::optional<double> lambda;
  double eta0 = 0.0;
  DichotomyCase dichotomy = DichotomyCase::not_covered;
  bool galilean_applied = false;
  Vec3 xi0{};
  /// Only set when a reduction was applied to data that was already below
  /// the threshold: whether case 1 and the eta / lambda_minus chain survived.
  std::optional<bool> galilean_consistent;
  std::string diagnostic;
};

/// me_ratio values within this distance of 1 are treated as the threshold
/// line, and eta is compared with the roots up to the same slack. aQ data sits
/// exactly on eta = lambda (or lambda_minus), and sampled Q on the default
/// 128^3 box already carries ~2e-4 relative error in its mass-energy product.
inline constexpr double kBoundaryTol = 1e-3;

namespace detail {
inline Classification classify_report(const InvariantReport& r, const GroundState& q, double boundary_tol) {
  Classification c;
  c.me_ratio = me_ratio(r, q);
  c.eta0 = r.eta;
  if (c.me_ratio >= 1.0 - boundary_tol) {
    std::ostringstream os;
    os.precision(12);
    os << "M E / M[Q] E[Q] = " << c.me_ratio << " is on or above the threshold";
    throw Error(ErrorCode::boundary_excluded, os.str());
  }
  const LambdaRoots roots = solve_lambda(c.me_ratio);
  c.lambda_minus = roots.lambda_minus;
  c.lambda = roots.lambda;
  if (c.lambda_minus && c.eta0 <= *c.lambda_minus + boundary_tol) {
    c.dichotomy = DichotomyCase::global_bounded;
  } else if (c.eta0 >= *c.lambda - boundary_tol) {
    c.dichotomy = DichotomyCase::above_threshold;
  } else {
    c.dichotomy = DichotomyCase::not_covered;
    c.diagnostic = "eta(0) lies strictly between the roots (quadrature error)";
  }
  return c;
}
}  // namespace detail

/// Places initial data in the mass-energy dichotomy, optionally after the
/// Galilean reduction that zeroes the momentum.
inline Classification classify(const Field& f, const GroundState& q, bool apply_galilean,
                               double boundary_tol = kBoundaryTol) {
  f.require_finite("classify");
  const InvariantReport before = compute_invariants(f, q);
  if (!apply_galilean) return detail::classify_report(before, q, boundary_tol);

  const GalileanReduction red = galilean_reduce(f);
  const InvariantReport after = compute_invariants(red.field, q);
  Classification c = detail::classify_report(after, q, boundary_tol);
  c.galilean_applied = true;
  c.xi0 = red.xi0;

  if (me_ratio(before, q) < 1.0 - boundary_tol) {
    const Classification pre = detail::classify_report(before, q, boundary_tol);
    const double p2 = before.momentum_sq();
    const double shift = p2 / (q.mass_sq * q.grad_sq);  // eta^2 - eta~^2
    bool ok = after.eta <= before.eta * (1.0 + 1e-12);
    ok = ok && std::abs(before.eta * before.eta - after.eta * after.eta - shift) <=
                   1e-8 * std::max(1.0, before.eta * before.eta);
    if (pre.dichotomy == DichotomyCase::global_bounded) {
      ok = ok && c.dichotomy == DichotomyCase::global_bounded;
      if (c.lambda_minus && pre.lambda_minus)
        ok = ok && (*c.lambda_minus) * (*c.lambda_minus) + shift <=
                       (*pre.lambda_minus) * (*pre.lambda_minus) + 1e-10;
    }
    c.galilean_consistent = ok;
    if (!ok) c.diagnostic += (c.diagnostic.empty() ? "" : "; ") + std::string("Galilean consistency check failed");
  }
  return c;
}

}  // namespace nlslab
