#pragma once

#include <cmath>

#include "nlslab/field.hpp"
#include "nlslab/groundstate.hpp"
#include "nlslab/radial.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

/// The quadratic and quartic integrals every other quantity is built from.
struct Norms {
  double mass = 0.0;
  double grad_sq = 0.0;
  double l4_4 = 0.0;
  Vec3 momentum{};
};

inline double l4_norm_4(const Field& f) {
  return reduce_sum(f.size(), [&](std::size_t i) {
    const double a = std::norm(f[i]);
    return f.grid.weight(i) * a * a;
  });
}

inline double mass(const Field& f) {
  return reduce_sum(f.size(), [&](std::size_t i) { return f.grid.weight(i) * std::norm(f[i]); });
}

/// Spectral derivatives on the box; the Dirichlet form of r u radially.
inline Norms field_norms(const Field& f) {
  Norms out;
  out.l4_4 = l4_norm_4(f);
  if (f.grid.is_periodic()) {
    const auto m = spectral::moments_from_spectrum(spectral::spectrum(f), f.grid);
    out.mass = m.mass;
    out.grad_sq = m.grad_sq;
    out.momentum = m.momentum;
  } else {
    out.mass = mass(f);
    out.grad_sq = radial::grad_sq(f);
  }
  return out;
}

struct InvariantReport {
  double mass = 0.0;
  double energy = 0.0;
  Vec3 momentum{};
  double grad_sq = 0.0;
  double l4_4 = 0.0;
  double eta = 0.0;

  double momentum_sq() const {
    return momentum[0] * momentum[0] + momentum[1] * momentum[1] + momentum[2] * momentum[2];
  }
};

inline InvariantReport report_from_norms(const Norms& n, const GroundState& q) {
  InvariantReport r;
  r.mass = n.mass;
  r.grad_sq = n.grad_sq;
  r.l4_4 = n.l4_4;
  r.momentum = n.momentum;
  r.energy = 0.5 * n.grad_sq - 0.25 * n.l4_4;
  r.eta = std::sqrt(n.mass * n.grad_sq / (q.mass_sq * q.grad_sq));
  return r;
}

/// Mass, energy, momentum, gradient and L4 norms, and eta measured against Q.
inline InvariantReport compute_invariants(const Field& f, const GroundState& q) {
  f.require_finite("compute_invariants");
  return report_from_norms(field_norms(f), q);
}

/// Mass-energy ratio M E / (M[Q] E[Q]).
inline double me_ratio(const InvariantReport& r, const GroundState& q) {
  return r.mass * r.energy / (q.mass_sq * q.energy);
}

/// Gagliardo-Nirenberg quotient ||f||_4^4 / (||f||_2 ||grad f||_2^3).
inline double gn_functional(const Field& f) {
  f.require_finite("gn_functional");
  const Norms n = field_norms(f);
  if (!(n.mass > 0.0) || !(n.grad_sq > 0.0))
    throw Error(ErrorCode::undefined_ratio, "GN quotient of a field with zero mass or gradient");
  return n.l4_4 / (std::sqrt(n.mass) * std::pow(n.grad_sq, 1.5));
}

}  // namespace nlslab
