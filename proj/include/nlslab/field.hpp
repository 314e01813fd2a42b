#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdlib>
#include <functional>
#include <new>
#include <string>
#include <vector>

#include "nlslab/error.hpp"
#include "nlslab/parallel.hpp"

namespace nlslab {

using cplx = std::complex<double>;
using Vec3 = std::array<double, 3>;

inline constexpr double kPi = 3.14159265358979323846;

/// Allocator with 64-byte alignment so FFT plans can run on any field buffer.
template <class T>
struct AlignedAllocator {
  using value_type = T;
  static constexpr std::align_val_t alignment{64};

  AlignedAllocator() noexcept = default;
  template <class U>
  AlignedAllocator(const AlignedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    return static_cast<T*>(::operator new(n * sizeof(T), alignment));
  }
  void deallocate(T* p, std::size_t) noexcept { ::operator delete(p, alignment); }

  template <class U>
  bool operator==(const AlignedAllocator<U>&) const noexcept { return true; }
};

using Samples = std::vector<cplx, AlignedAllocator<cplx>>;

enum class GridKind : unsigned char { periodic3d = 0, radial1d = 1 };

inline std::string to_string(GridKind kind) {
  return kind == GridKind::periodic3d ? "periodic3d" : "radial1d";
}

/// Uniform grid. Periodic boxes are [-L, L)^3 with n points per axis;
/// radial grids hold r_i = (i + 1) * r_max / n, i = 0..n-1.
struct Grid {
  GridKind kind = GridKind::periodic3d;
  std::size_t n = 0;
  double half_width = 0.0;  // L for the box, r_max for radial

  static Grid periodic(std::size_t n, double L) {
    Grid g{GridKind::periodic3d, n, L};
    g.validate();
    return g;
  }
  static Grid radial(std::size_t n, double r_max) {
    Grid g{GridKind::radial1d, n, r_max};
    g.validate();
    return g;
  }

  void validate() const {
    if (n == 0) throw Error(ErrorCode::invalid_argument, "grid needs n > 0");
    if (!(half_width > 0.0) || !std::isfinite(half_width))
      throw Error(ErrorCode::invalid_argument, "grid extent must be positive");
    if (kind == GridKind::periodic3d && (n & (n - 1)) != 0)
      throw Error(ErrorCode::invalid_argument,
                  "periodic grid size must be a power of two, got " + std::to_string(n));
  }

  bool is_periodic() const { return kind == GridKind::periodic3d; }

  double spacing() const {
    return is_periodic() ? 2.0 * half_width / static_cast<double>(n)
                         : half_width / static_cast<double>(n);
  }

  std::size_t size() const { return is_periodic() ? n * n * n : n; }

  /// Minimum-image representative of a coordinate difference on the torus.
  double min_image(double d) const {
    const double P = 2.0 * half_width;
    return d - P * std::floor((d + half_width) / P);
  }

  /// Axis coordinate (periodic) or radius (radial) of index i.
  double coord(std::size_t i) const {
    return is_periodic() ? -half_width + static_cast<double>(i) * spacing()
                         : static_cast<double>(i + 1) * spacing();
  }

  /// Quadrature weight of sample i (midpoint rule in 3D, trapezoid with 4 pi r^2 radially).
  double weight(std::size_t i) const {
    const double h = spacing();
    if (is_periodic()) return h * h * h;
    const double r = coord(i);
    const double w = (i + 1 == n) ? 0.5 : 1.0;
    return 4.0 * kPi * r * r * h * w;
  }

  /// Position of flat index for periodic grids (x fastest).
  Vec3 position(std::size_t flat) const {
    const std::size_t ix = flat % n;
    const std::size_t iy = (flat / n) % n;
    const std::size_t iz = flat / (n * n);
    return {coord(ix), coord(iy), coord(iz)};
  }

  friend bool operator==(const Grid&, const Grid&) = default;
};

/// Complex samples of a wavefunction on a grid, at time t.
struct Field {
  Grid grid;
  Samples values;
  double time = 0.0;

  Field() = default;
  explicit Field(const Grid& g, double t = 0.0) : grid(g), values(g.size(), cplx{}), time(t) {}

  std::size_t size() const { return values.size(); }
  cplx& operator[](std::size_t i) { return values[i]; }
  const cplx& operator[](std::size_t i) const { return values[i]; }

  std::size_t index(std::size_t ix, std::size_t iy, std::size_t iz) const {
    return ix + grid.n * (iy + grid.n * iz);
  }

  bool all_finite() const {
    const double s = reduce_sum(values.size(), [&](std::size_t i) {
      const cplx v = values[i];
      return (std::isfinite(v.real()) && std::isfinite(v.imag())) ? 0.0 : 1.0;
    });
    return s == 0.0;
  }

  void require_finite(const char* what) const {
    if (values.size() != grid.size())
      throw Error(ErrorCode::degenerate_input, std::string(what) + ": sample count does not match grid");
    if (!all_finite()) throw Error(ErrorCode::degenerate_input, std::string(what) + ": non-finite samples");
  }
};

/// Samples f(x, y, z) (periodic) or f(r, 0, 0) (radial) onto a grid.
inline Field sample(const Grid& grid, const std::function<cplx(const Vec3&)>& f, double t = 0.0) {
  Field out(grid, t);
  if (grid.is_periodic()) {
    parallel_for(out.size(), [&](std::size_t i) { out[i] = f(grid.position(i)); });
  } else {
    for (std::size_t i = 0; i < grid.n; ++i) out[i] = f({grid.coord(i), 0.0, 0.0});
  }
  return out;
}

/// Multiplies every sample by e^{i theta}.
inline Field with_phase(Field f, double theta) {
  const cplx p = std::polar(1.0, theta);
  for (auto& v : f.values) v *= p;
  return f;
}

/// Periodic shift by whole grid cells.
inline Field shifted(const Field& f, long sx, long sy, long sz) {
  if (!f.grid.is_periodic()) throw Error(ErrorCode::mode_mismatch, "grid shift needs a periodic field");
  const long n = static_cast<long>(f.grid.n);
  auto wrap = [n](long i) { return static_cast<std::size_t>(((i % n) + n) % n); };
  Field out(f.grid, f.time);
  for (long iz = 0; iz < n; ++iz)
    for (long iy = 0; iy < n; ++iy)
      for (long ix = 0; ix < n; ++ix)
        out[out.index(wrap(ix + sx), wrap(iy + sy), wrap(iz + sz))] =
            f[f.index(static_cast<std::size_t>(ix), static_cast<std::size_t>(iy), static_cast<std::size_t>(iz))];
  return out;
}

}  // namespace nlslab
