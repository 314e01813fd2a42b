#pragma once

#include <fftw3.h>

#include <array>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "nlslab/field.hpp"

namespace nlslab::spectral {

namespace detail {

class Plan3d {
 public:
  explicit Plan3d(std::size_t n) : n_(n) {
    const int m = static_cast<int>(n);
    const std::size_t total = n * n * n;
    auto* scratch = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * total));
    // FFTW_ESTIMATE keeps plans (and therefore results) reproducible run to run.
    forward_ = fftw_plan_dft_3d(m, m, m, scratch, scratch, FFTW_FORWARD, FFTW_ESTIMATE);
    backward_ = fftw_plan_dft_3d(m, m, m, scratch, scratch, FFTW_BACKWARD, FFTW_ESTIMATE);
    fftw_free(scratch);
  }
  ~Plan3d() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  Plan3d(const Plan3d&) = delete;
  Plan3d& operator=(const Plan3d&) = delete;

  void forward(Samples& data) const { run(forward_, data); }
  void backward(Samples& data) const { run(backward_, data); }

 private:
  void run(fftw_plan plan, Samples& data) const {
    auto* p = reinterpret_cast<fftw_complex*>(data.data());
    fftw_execute_dft(plan, p, p);
  }

  std::size_t n_;
  fftw_plan forward_;
  fftw_plan backward_;
};

inline std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

inline const Plan3d& plan_for(std::size_t n) {
  static std::map<std::size_t, std::unique_ptr<Plan3d>> cache;
  std::lock_guard lock(planner_mutex());
  static const bool threads_ready = [] {
    fftw_init_threads();
    fftw_plan_with_nthreads(thread_count());
    return true;
  }();
  (void)threads_ready;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<Plan3d>(n);
  return *slot;
}

}  // namespace detail

/// Wavenumbers (pi/L) * m for m in {-n/2, ..., n/2-1}, in FFT order.
inline std::vector<double> wavenumbers(std::size_t n, double L) {
  std::vector<double> k(n);
  const double dk = kPi / L;
  for (std::size_t i = 0; i < n; ++i) {
    const long m = i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
    k[i] = dk * static_cast<double>(m);
  }
  return k;
}

/// First-derivative symbol: like `wavenumbers` but with the Nyquist entry zeroed.
inline std::vector<double> derivative_symbol(std::size_t n, double L) {
  auto k = wavenumbers(n, L);
  k[n / 2] = 0.0;
  return k;
}

/// Unnormalized forward transform of a periodic field.
inline Samples spectrum(const Field& f) {
  Samples out = f.values;
  detail::plan_for(f.grid.n).forward(out);
  return out;
}

inline void forward_in_place(Samples& data, std::size_t n) { detail::plan_for(n).forward(data); }

/// Inverse transform including the 1/N normalization.
inline void backward_in_place(Samples& data, std::size_t n) {
  detail::plan_for(n).backward(data);
  const double scale = 1.0 / static_cast<double>(data.size());
  parallel_for(data.size(), [&](std::size_t i) { data[i] *= scale; });
}

/// Spectral gradient of a periodic field, one component per axis.
inline std::array<Samples, 3> gradient_from_spectrum(const Samples& hat, const Grid& grid) {
  const std::size_t n = grid.n;
  const auto k = derivative_symbol(n, grid.half_width);
  std::array<Samples, 3> out{Samples(hat.size()), Samples(hat.size()), Samples(hat.size())};
  parallel_for(hat.size(), [&](std::size_t i) {
    const std::size_t ix = i % n, iy = (i / n) % n, iz = i / (n * n);
    const cplx ih = cplx(0.0, 1.0) * hat[i];
    out[0][i] = k[ix] * ih;
    out[1][i] = k[iy] * ih;
    out[2][i] = k[iz] * ih;
  });
  for (auto& c : out) backward_in_place(c, n);
  return out;
}

inline std::array<Samples, 3> gradient(const Field& f) {
  return gradient_from_spectrum(spectrum(f), f.grid);
}

/// Parseval sums from a spectrum: (integral |grad u|^2, momentum vector).
struct SpectralMoments {
  double mass = 0.0;
  double grad_sq = 0.0;
  Vec3 momentum{};
};

inline SpectralMoments moments_from_spectrum(const Samples& hat, const Grid& grid) {
  const std::size_t n = grid.n;
  const auto k = derivative_symbol(n, grid.half_width);
  const auto sums = reduce_sum<5>(hat.size(), [&](std::size_t i) {
    const std::size_t ix = i % n, iy = (i / n) % n, iz = i / (n * n);
    const double a = std::norm(hat[i]);
    return std::array<double, 5>{a, (k[ix] * k[ix] + k[iy] * k[iy] + k[iz] * k[iz]) * a, k[ix] * a,
                                 k[iy] * a, k[iz] * a};
  });
  const double h = grid.spacing();
  const double norm = h * h * h / static_cast<double>(hat.size());
  return {sums[0] * norm, sums[1] * norm, {sums[2] * norm, sums[3] * norm, sums[4] * norm}};
}

}  // namespace nlslab::spectral
