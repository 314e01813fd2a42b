#pragma once

#include <algorithm>
#include <array>
#include <cmath>

#include "nlslab/error.hpp"

namespace nlslab {

/// Radial weight phi(x) = g(|x|): |x|^2 inside the unit ball, 0 outside radius 2,
/// and on [1, 2] the degree-9 polynomial matching four derivatives at both ends
/// (so phi is C^4). The virial weight is R^2 phi(x / R).
class Cutoff {
 public:
  explicit Cutoff(double R) : R_(R) {
    if (!(R > 0.0) || !std::isfinite(R)) throw Error(ErrorCode::out_of_range, "cutoff radius must be positive");
  }

  double R() const { return R_; }

  /// k-th derivative of g at s >= 0, k = 0..4.
  static double g(double s, int k = 0) {
    if (s <= 1.0) {
      switch (k) {
        case 0: return s * s;
        case 1: return 2.0 * s;
        case 2: return 2.0;
        default: return 0.0;
      }
    }
    if (s >= 2.0) return 0.0;
    // Horner in t = s - 1 on the k-th derivative of the coefficient list.
    const double t = s - 1.0;
    double acc = 0.0;
    for (int i = static_cast<int>(kCoeffs.size()) - 1; i >= k; --i) {
      double c = kCoeffs[static_cast<std::size_t>(i)];
      for (int j = 0; j < k; ++j) c *= static_cast<double>(i - j);
      acc = acc * t + c;
    }
    return acc;
  }

  static double laplacian(double s) {
    if (s <= 1.0) return 6.0;
    return g(s, 2) + 2.0 * g(s, 1) / s;
  }

  static double bilaplacian(double s) {
    if (s <= 1.0 || s >= 2.0) return 0.0;
    return g(s, 4) + 4.0 * g(s, 3) / s;
  }

  /// Hessian contracted with grad u and its conjugate, given |x.grad u|^2 and |grad u|^2.
  static double hessian_form(double s, double radial_sq, double grad_sq) {
    if (s <= 1.0) return 2.0 * grad_sq;
    if (s >= 2.0) return 0.0;
    return g(s, 2) * radial_sq + g(s, 1) / s * (grad_sq - radial_sq);
  }

  /// Hessian entry d_j d_k phi at point y.
  static double hessian(const std::array<double, 3>& y, int j, int k) {
    const double s = std::sqrt(y[0] * y[0] + y[1] * y[1] + y[2] * y[2]);
    const double delta = j == k ? 1.0 : 0.0;
    if (s <= 1.0) return 2.0 * delta;
    if (s >= 2.0) return 0.0;
    const double xj = y[static_cast<std::size_t>(j)] / s, xk = y[static_cast<std::size_t>(k)] / s;
    const double d1 = g(s, 1) / s;
    return g(s, 2) * xj * xk + d1 * (delta - xj * xk);
  }

  /// max(sup |bilaplacian|, sup |laplacian - 6|) over |x| >= 1: the constant c in
  /// |A_R - gradient part| <= c (R^-2 ||u||^2_{L2(|x|>=R)} + ||u||^4_{L4(|x|>=R)}).
  static double bound_constant() {
    static const double c = [] {
      double m = 6.0;  // |laplacian - 6| outside radius 2
      for (int i = 0; i <= kTableSamples; ++i) {
        const double s = 1.0 + static_cast<double>(i) / kTableSamples;
        m = std::max({m, std::abs(bilaplacian(s)), std::abs(laplacian(s) - 6.0)});
      }
      return m;
    }();
    return c;
  }

  /// sup over the annulus of (largest Hessian eigenvalue - 2), the factor by
  /// which the exterior gradient can feed A_R.
  static double gradient_excess() {
    static const double c = [] {
      double m = 0.0;
      for (int i = 0; i <= kTableSamples; ++i) {
        const double s = 1.0 + static_cast<double>(i) / kTableSamples;
        m = std::max({m, g(s, 2) - 2.0, g(s, 1) / s - 2.0});
      }
      return m;
    }();
    return c;
  }

  // Scaled versions on physical radius r: weight R^2 g(r/R) and gradient R g'(r/R).
  double weight(double r) const { return R_ * R_ * g(r / R_); }
  double weight_slope(double r) const { return R_ * g(r / R_, 1); }

 private:
  // g(1 + t) = (1 + t)^2 + t^5 (-301 + 973 t - 1226 t^2 + 705 t^3 - 155 t^4)
  static constexpr std::array<double, 10> kCoeffs{1.0,    2.0,   1.0,     0.0,   0.0,
                                                  -301.0, 973.0, -1226.0, 705.0, -155.0};
  static constexpr int kTableSamples = 200000;
  double R_;
};

}  // namespace nlslab
