#pragma once

#include <array>
#include <cmath>
#include <vector>

#include "nlslab/groundstate.hpp"
#include "nlslab/invariants.hpp"
#include "nlslab/spectral.hpp"
#include "nlslab/thresholds.hpp"
#include "nlslab/virial.hpp"

namespace nlslab {

struct ModulationFit {
  double theta = 0.0;  // in [0, 2 pi)
  Vec3 x0{};
  double lambda = 0.0;
  double beta = 0.0;
  double resid_l2 = 0.0;
  double resid_h1dot = 0.0;
  double rho_proxy = 0.0;  // smallest rho for which both closeness hypotheses hold
  bool converged = true;
  int iterations = 0;
};

namespace detail {

// Shape S(x) = lambda^{3/2} / beta * Q(lambda |x - c| / beta), centred at c.
inline Field soliton_shape(const GroundState& q, const Grid& grid, double lambda, double beta, const Vec3& c) {
  const double amp = std::pow(lambda, 1.5) / beta;
  const double k = lambda / beta;
  Field s(grid);
  if (grid.is_periodic()) {
    parallel_for(s.size(), [&](std::size_t i) {
      const Vec3 x = grid.position(i);
      const double dx = grid.min_image(x[0] - c[0]), dy = grid.min_image(x[1] - c[1]), dz = grid.min_image(x[2] - c[2]);
      s[i] = amp * q.value(k * std::sqrt(dx * dx + dy * dy + dz * dz));
    });
  } else {
    for (std::size_t i = 0; i < grid.n; ++i) s[i] = amp * q.value(k * grid.coord(i));
  }
  return s;
}

inline double wrap_angle(double a) {
  a = std::fmod(a, 2.0 * kPi);
  if (a < 0.0) a += 2.0 * kPi;
  return a;
}

// Overlap C(c) = int conj(S(x - c)) f(x) dx = sum_k A_k e^{i k.c} with its
// first and second derivatives in c.
struct Overlap {
  cplx value;
  std::array<cplx, 3> grad;
  std::array<std::array<cplx, 3>, 3> hess;
};

class OverlapModel {
 public:
  OverlapModel(const Field& f, const Field& shape) : n_(f.grid.n) {
    Samples fh = spectral::spectrum(f);
    const Samples sh = spectral::spectrum(shape);
    const double h = f.grid.spacing();
    const double norm = h * h * h / static_cast<double>(fh.size());
    for (std::size_t i = 0; i < fh.size(); ++i) fh[i] = std::conj(sh[i]) * fh[i] * norm;
    a_ = std::move(fh);
    k_ = spectral::derivative_symbol(n_, f.grid.half_width);
  }

  Overlap eval(const Vec3& c) const {
    std::array<std::vector<cplx>, 3> e;
    for (int d = 0; d < 3; ++d) {
      e[static_cast<std::size_t>(d)].resize(n_);
      for (std::size_t i = 0; i < n_; ++i) e[static_cast<std::size_t>(d)][i] = std::polar(1.0, k_[i] * c[static_cast<std::size_t>(d)]);
    }
    // value, 3 gradient, 6 Hessian entries; real and imaginary parts.
    const auto s = reduce_sum<20>(a_.size(), [&](std::size_t i) {
      const std::size_t ix = i % n_, iy = (i / n_) % n_, iz = i / (n_ * n_);
      const cplx t = a_[i] * e[0][ix] * e[1][iy] * e[2][iz];
      const double k[3] = {k_[ix], k_[iy], k_[iz]};
      std::array<double, 20> out{};
      out[0] = t.real();
      out[1] = t.imag();
      for (int j = 0; j < 3; ++j) {
        const cplx g = cplx(0.0, k[j]) * t;
        out[static_cast<std::size_t>(2 + 2 * j)] = g.real();
        out[static_cast<std::size_t>(3 + 2 * j)] = g.imag();
      }
      int m = 0;
      for (int j = 0; j < 3; ++j)
        for (int l = j; l < 3; ++l, ++m) {
          const cplx hh = -k[j] * k[l] * t;
          out[static_cast<std::size_t>(8 + 2 * m)] = hh.real();
          out[static_cast<std::size_t>(9 + 2 * m)] = hh.imag();
        }
      return out;
    });
    Overlap o;
    o.value = {s[0], s[1]};
    for (std::size_t j = 0; j < 3; ++j) o.grad[j] = {s[2 + 2 * j], s[3 + 2 * j]};
    std::size_t m = 0;
    for (std::size_t j = 0; j < 3; ++j)
      for (std::size_t l = j; l < 3; ++l, ++m) o.hess[j][l] = o.hess[l][j] = {s[8 + 2 * m], s[9 + 2 * m]};
    return o;
  }

 private:
  std::size_t n_;
  Samples a_;
  std::vector<double> k_;
};

// Residual of the directly sampled family at centre c with the optimal phase:
// F(c) = ||S_c||^2 - 2 |<S_c, f>| = resid_l2^2 - ||f||^2, and its gradient.
struct SampledFit {
  double F = 0.0;
  std::array<double, 3> grad{};
  cplx overlap;
};

inline SampledFit sampled_fit(const Field& f, const GroundState& q, double lambda, double beta, const Vec3& c) {
  const Grid& g = f.grid;
  const double amp = std::pow(lambda, 1.5) / beta;
  const double k = lambda / beta;
  const double w = g.weight(0);
  // A (re, im), dA_j (re, im), N, dN_j
  const auto s = reduce_sum<12>(f.size(), [&](std::size_t i) {
    const Vec3 x = g.position(i);
    const double d[3] = {g.min_image(x[0] - c[0]), g.min_image(x[1] - c[1]), g.min_image(x[2] - c[2])};
    const double rho = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
    const double v = amp * q.value(k * rho);
    const double dv = rho > 0.0 ? -amp * k * q.derivative(k * rho) / rho : 0.0;
    std::array<double, 12> out{};
    out[0] = w * v * f[i].real();
    out[1] = w * v * f[i].imag();
    out[8] = w * v * v;
    for (int j = 0; j < 3; ++j) {
      const double ds = dv * d[j];  // d S_c / d c_j
      out[static_cast<std::size_t>(2 + 2 * j)] = w * ds * f[i].real();
      out[static_cast<std::size_t>(3 + 2 * j)] = w * ds * f[i].imag();
      out[static_cast<std::size_t>(9 + j)] = 2.0 * w * v * ds;
    }
    return out;
  });
  SampledFit r;
  r.overlap = {s[0], s[1]};
  const double mod = std::abs(r.overlap);
  r.F = s[8] - 2.0 * mod;
  for (std::size_t j = 0; j < 3; ++j) {
    const cplx dA(s[2 + 2 * j], s[3 + 2 * j]);
    r.grad[j] = s[9 + j] - (mod > 0.0 ? 2.0 * std::real(std::conj(r.overlap) * dA) / mod : 0.0);
  }
  return r;
}

// Solves the 3x3 system H x = b; false when H is singular.
inline bool solve3(std::array<std::array<double, 3>, 3> H, std::array<double, 3> b, std::array<double, 3>& x) {
  for (std::size_t c = 0; c < 3; ++c) {
    std::size_t p = c;
    for (std::size_t r = c + 1; r < 3; ++r)
      if (std::abs(H[r][c]) > std::abs(H[p][c])) p = r;
    if (std::abs(H[p][c]) < 1e-300) return false;
    std::swap(H[p], H[c]);
    std::swap(b[p], b[c]);
    for (std::size_t r = c + 1; r < 3; ++r) {
      const double f = H[r][c] / H[c][c];
      for (std::size_t k = c; k < 3; ++k) H[r][k] -= f * H[c][k];
      b[r] -= f * b[c];
    }
  }
  for (std::size_t c = 3; c-- > 0;) {
    double s = b[c];
    for (std::size_t k = c + 1; k < 3; ++k) s -= H[c][k] * x[k];
    x[c] = s / H[c][c];
  }
  return true;
}

}  // namespace detail

/// Fits theta and x0 of e^{i theta} lambda^{3/2} beta^{-1} Q(lambda (x / beta - x0))
/// to f with lambda fixed and beta = M[f] / M[Q]. The phase is solved exactly for
/// each centre; the centre maximizes |overlap| by safeguarded Newton steps on a
/// spectral model, then minimizes the sampled L2 residual directly.
inline ModulationFit fit_modulation(const Field& f, const GroundState& q, double lambda, int max_iter = 100) {
  f.require_finite("fit_modulation");
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_argument, "lambda must be positive");
  const Norms nf = field_norms(f);
  if (!(nf.mass > 0.0)) throw Error(ErrorCode::zero_mass, "modulation fit of a massless field");

  ModulationFit fit;
  fit.lambda = lambda;
  fit.beta = nf.mass / q.mass_sq;
  const double beta = fit.beta;
  Vec3 c{};

  if (f.grid.is_periodic()) {
    // Start from the density centroid.
    const auto s = reduce_sum<3>(f.size(), [&](std::size_t i) {
      const Vec3 x = f.grid.position(i);
      const double a = std::norm(f[i]) * f.grid.weight(i);
      return std::array<double, 3>{a * x[0], a * x[1], a * x[2]};
    });
    for (std::size_t d = 0; d < 3; ++d) c[d] = s[d] / nf.mass;

    const detail::OverlapModel model(f, detail::soliton_shape(q, f.grid, lambda, beta, {0.0, 0.0, 0.0}));
    auto objective = [&](const detail::Overlap& o) { return std::norm(o.value); };
    detail::Overlap cur = model.eval(c);
    fit.converged = false;
    const double step_tol = 1e-12 * f.grid.half_width;
    for (int it = 0; it < max_iter; ++it) {
      fit.iterations = it + 1;
      // F = |C|^2: gradient 2 Re(conj(C) C_j), Hessian 2 Re(conj(C_l) C_j + conj(C) C_jl).
      std::array<double, 3> g{};
      std::array<std::array<double, 3>, 3> H{};
      for (std::size_t j = 0; j < 3; ++j) {
        g[j] = 2.0 * std::real(std::conj(cur.value) * cur.grad[j]);
        for (std::size_t l = 0; l < 3; ++l)
          H[j][l] = 2.0 * std::real(std::conj(cur.grad[l]) * cur.grad[j] + std::conj(cur.value) * cur.hess[j][l]);
      }
      std::array<double, 3> neg_g{-g[0], -g[1], -g[2]}, dir{};
      bool newton = detail::solve3(H, neg_g, dir);
      // Newton is only an ascent direction where H is negative definite.
      if (newton) newton = dir[0] * g[0] + dir[1] * g[1] + dir[2] * g[2] > 0.0 && H[0][0] < 0.0 && H[1][1] < 0.0 &&
                           H[2][2] < 0.0;
      if (!newton) {
        const double scale = std::max({std::abs(H[0][0]), std::abs(H[1][1]), std::abs(H[2][2]), 1e-300});
        dir = {g[0] / scale, g[1] / scale, g[2] / scale};
      }
      const double f0 = objective(cur);
      double t = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
        const Vec3 trial{c[0] + t * dir[0], c[1] + t * dir[1], c[2] + t * dir[2]};
        const detail::Overlap o = model.eval(trial);
        if (objective(o) >= f0) {
          c = trial;
          cur = o;
          improved = true;
          break;
        }
      }
      const double len = t * std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
      if (!improved || len < step_tol) {
        fit.converged = improved || len < step_tol || std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]) <= 1e-12 * f0;
        break;
      }
    }
    // The overlap model shifts a band-limited copy of the shape; finish on the
    // sampled family itself, where an exact soliton has zero residual.
    detail::SampledFit sf = detail::sampled_fit(f, q, lambda, beta, c);
    const double delta = 1e-5 * f.grid.spacing();
    for (int it = 0; it < 30; ++it) {
      std::array<std::array<double, 3>, 3> H{};
      for (std::size_t l = 0; l < 3; ++l) {
        Vec3 cl = c;
        cl[l] += delta;
        const auto gl = detail::sampled_fit(f, q, lambda, beta, cl).grad;
        for (std::size_t j = 0; j < 3; ++j) H[j][l] = (gl[j] - sf.grad[j]) / delta;
      }
      for (std::size_t j = 0; j < 3; ++j)
        for (std::size_t l = 0; l < j; ++l) H[j][l] = H[l][j] = 0.5 * (H[j][l] + H[l][j]);
      std::array<double, 3> neg_g{-sf.grad[0], -sf.grad[1], -sf.grad[2]}, dir{};
      if (!detail::solve3(H, neg_g, dir) || dir[0] * sf.grad[0] + dir[1] * sf.grad[1] + dir[2] * sf.grad[2] >= 0.0)
        break;
      double t = 1.0;
      bool improved = false;
      for (int ls = 0; ls < 30; ++ls, t *= 0.5) {
        const Vec3 trial{c[0] + t * dir[0], c[1] + t * dir[1], c[2] + t * dir[2]};
        const auto o = detail::sampled_fit(f, q, lambda, beta, trial);
        if (o.F <= sf.F) {
          c = trial;
          sf = o;
          improved = true;
          break;
        }
      }
      ++fit.iterations;
      const double len = t * std::sqrt(dir[0] * dir[0] + dir[1] * dir[1] + dir[2] * dir[2]);
      if (!improved || len < step_tol) break;
    }
    fit.theta = detail::wrap_angle(std::arg(sf.overlap));
  } else {
    const Field shape = detail::soliton_shape(q, f.grid, lambda, beta, c);
    cplx overlap{};
    for (std::size_t i = 0; i < f.size(); ++i) overlap += f.grid.weight(i) * std::conj(shape[i]) * f[i];
    fit.theta = detail::wrap_angle(std::arg(overlap));
    fit.iterations = 1;
  }
  fit.x0 = {c[0] / beta, c[1] / beta, c[2] / beta};

  Field resid = detail::soliton_shape(q, f.grid, lambda, beta, c);
  const cplx phase = std::polar(1.0, fit.theta);
  for (std::size_t i = 0; i < resid.size(); ++i) resid[i] = f[i] - phase * resid[i];
  const Norms nr = field_norms(resid);
  fit.resid_l2 = std::sqrt(nr.mass);
  fit.resid_h1dot = std::sqrt(nr.grad_sq);

  const InvariantReport rep = report_from_norms({nf.mass, nf.grad_sq, l4_norm_4(f), nf.momentum}, q);
  const double rho_me = std::abs(me_ratio(rep, q) - threshold_cubic(lambda)) / std::pow(lambda, 3);
  const double rho_eta = std::abs(rep.eta - lambda) / (lambda <= 1.0 ? lambda * lambda : lambda);
  fit.rho_proxy = std::max(rho_me, rho_eta);
  return fit;
}

namespace detail {

// Band-limited interpolation weights from samples on x_m = -L + m h to the point xi.
inline std::vector<double> trig_weights(std::size_t n, double L, double xi) {
  std::vector<double> w(n);
  const double h = 2.0 * L / static_cast<double>(n);
  const double dk = kPi / L;
  const long half = static_cast<long>(n / 2);
  for (std::size_t m = 0; m < n; ++m) {
    const double d = xi - (-L + static_cast<double>(m) * h);
    double s = std::cos(static_cast<double>(half) * dk * d);  // Nyquist mode, split evenly
    for (long j = 1; j < half; ++j) s += 2.0 * std::cos(static_cast<double>(j) * dk * d);
    w[m] = (1.0 + s) / static_cast<double>(n);
  }
  return w;
}

// Cubic Lagrange interpolation of a radial field at radius r (even across 0,
// zero beyond r_max).
inline cplx radial_value(const Field& f, double r) {
  const double h = f.grid.spacing();
  const long n = static_cast<long>(f.grid.n);
  auto node = [&](long j) -> std::pair<double, cplx> {
    // Node j sits at (j + 1) h; negative positions mirror through the origin.
    const double x = static_cast<double>(j + 1) * h;
    if (j >= n) return {x, cplx{}};
    if (j >= 0) return {x, f[static_cast<std::size_t>(j)]};
    return {x, f[static_cast<std::size_t>(-j - 2)]};
  };
  r = std::abs(r);
  if (r >= f.grid.half_width + h) return {};
  // Nodes straddling r: positions h, 2h, ...; mirrored -h, -2h. Skip the origin.
  long j = static_cast<long>(std::floor(r / h)) - 1;  // node at or below r
  std::array<std::pair<double, cplx>, 4> pts;
  if (j < 0) {
    pts = {node(-3), node(-2), node(0), node(1)};  // -2h, -h, h, 2h
  } else {
    pts = {node(j - 1), node(j), node(j + 1), node(j + 2)};
    if (j == 0) pts[0] = node(-2);  // -h instead of the absent origin
  }
  cplx out{};
  for (std::size_t a = 0; a < 4; ++a) {
    double w = 1.0;
    for (std::size_t b = 0; b < 4; ++b)
      if (a != b) w *= (r - pts[b].first) / (pts[a].first - pts[b].first);
    out += w * pts[a].second;
  }
  return out;
}

}  // namespace detail

/// v(x) = beta u(beta x) with beta = M[u] / M[Q], so that M[v] = M[Q].
inline Field rescale_to_unit_mass(const Field& f, const GroundState& q) {
  f.require_finite("rescale_to_unit_mass");
  const double m = field_norms(f).mass;
  if (!(m > 0.0)) throw Error(ErrorCode::zero_mass, "rescaling a massless field");
  const double beta = m / q.mass_sq;
  if (beta == 1.0) return f;
  const Grid& g = f.grid;
  const double L = g.half_width;

  // Mass that the dilation would lose or wrap.
  double lost = 0.0;
  if (beta > 1.0) {
    lost = detail::boundary_mass_fraction(f);
    if (!g.is_periodic()) {
      double shell = 0.0;
      for (std::size_t i = 0; i < g.n; ++i)
        if (g.coord(i) >= 0.9 * L) shell += g.weight(i) * std::norm(f[i]);
      lost = shell / m;
    }
  } else {
    const double edge = beta * L;
    lost = reduce_sum(f.size(), [&](std::size_t i) {
             if (g.is_periodic()) {
               const Vec3 x = g.position(i);
               if (std::abs(x[0]) < edge && std::abs(x[1]) < edge && std::abs(x[2]) < edge) return 0.0;
             } else if (g.coord(i) <= edge) {
               return 0.0;
             }
             return g.weight(i) * std::norm(f[i]);
           }) /
           m;
  }
  if (lost >= kBoundaryMassTol)
    throw Error(ErrorCode::domain_escape,
                "rescaling by beta = " + std::to_string(beta) + " moves a mass fraction " + std::to_string(lost) +
                    " across the domain edge");

  Field v(g, f.time);
  if (!g.is_periodic()) {
    for (std::size_t i = 0; i < g.n; ++i) v[i] = beta * detail::radial_value(f, beta * g.coord(i));
    return v;
  }
  // Separable band-limited interpolation, one axis at a time; targets that
  // fall outside the box are set to zero.
  const std::size_t n = g.n;
  std::vector<std::vector<double>> W(n);
  std::vector<bool> inside(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = beta * g.coord(i);
    inside[i] = xi >= -L && xi < L;
    if (inside[i]) W[i] = detail::trig_weights(n, L, xi);
  }
  Samples a = f.values, b(f.size());
  for (int axis = 0; axis < 3; ++axis) {
    const std::size_t stride = axis == 0 ? 1 : axis == 1 ? n : n * n;
    parallel_for(n * n, [&](std::size_t line) {
      // Lines along `axis`, indexed by the other two coordinates.
      std::size_t base;
      if (axis == 0) base = line * n;
      else if (axis == 1) base = (line % n) + (line / n) * n * n;
      else base = line;
      for (std::size_t i = 0; i < n; ++i) {
        cplx s{};
        if (inside[i])
          for (std::size_t m2 = 0; m2 < n; ++m2) s += W[i][m2] * a[base + m2 * stride];
        b[base + i * stride] = s;
      }
    });
    std::swap(a, b);
  }
  for (std::size_t i = 0; i < a.size(); ++i) v[i] = beta * a[i];
  return v;
}

}  // namespace nlslab
