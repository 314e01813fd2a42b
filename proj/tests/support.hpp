#pragma once

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "nlslab/nlslab.hpp"

namespace nlslab::testing {

inline const GroundState& ground_state() {
  static const GroundState q = solve_ground_state(20.0, 16384, 1e-12);
  return q;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

/// A exp(-|x - c|^2 / (2 w^2)) e^{i xi . x}
inline Field gaussian(const Grid& g, double A, double w, Vec3 c = {}, Vec3 xi = {}) {
  return sample(g, [=](const Vec3& x) {
    const double dx = x[0] - c[0], dy = x[1] - c[1], dz = x[2] - c[2];
    const double r2 = dx * dx + dy * dy + dz * dz;
    return std::polar(A * std::exp(-r2 / (2.0 * w * w)), xi[0] * x[0] + xi[1] * x[1] + xi[2] * x[2]);
  });
}

/// Sum of a few random complex Gaussians with random linear phases, well inside the box.
inline Field random_smooth(const Grid& g, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double L = g.half_width;
  Field f(g);
  const int bumps = 3;
  for (int b = 0; b < bumps; ++b) {
    const Vec3 c{0.15 * L * u(rng), 0.15 * L * u(rng), 0.15 * L * u(rng)};
    const Vec3 xi{u(rng), u(rng), u(rng)};
    const double w = 0.8 + 0.4 * (u(rng) + 1.0);
    const cplx amp = std::polar(0.5 + 0.5 * (u(rng) + 1.0), kPi * u(rng));
    const Field part = gaussian(g, 1.0, w, g.is_periodic() ? c : Vec3{}, g.is_periodic() ? xi : Vec3{});
    for (std::size_t i = 0; i < f.size(); ++i) f[i] += amp * part[i];
  }
  return f;
}

}  // namespace nlslab::testing
