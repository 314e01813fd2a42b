#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/invariants.hpp"
#include "nlslab/radial.hpp"
#include "nlslab/spectral.hpp"
#include "nlslab/virial.hpp"

namespace nlslab {

struct EvolveConfig {
  double dt0 = 1e-3;
  double t_end = 1.0;
  double cfl_alpha = 0.5;
  double blowup_factor = 20.0;
  std::size_t snapshot_every = 0;  // 0: no snapshots
  std::size_t diag_every = 10;
  bool dealias = true;
  bool adaptive = true;
  double cutoff_R = 0.0;  // radius of the localized diagnostics; 0 picks 0.4 L

  void validate() const {
    if (!(dt0 > 0.0) || !std::isfinite(dt0)) throw Error(ErrorCode::invalid_argument, "dt0 must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw Error(ErrorCode::invalid_argument, "t_end must be >= 0");
    if (!(cfl_alpha > 0.0 && cfl_alpha <= 1.0)) throw Error(ErrorCode::invalid_argument, "cfl_alpha must lie in (0, 1]");
    if (!(blowup_factor > 1.0)) throw Error(ErrorCode::invalid_argument, "blowup_factor must exceed 1");
    if (diag_every == 0) throw Error(ErrorCode::invalid_argument, "diag_every must be positive");
    if (cutoff_R < 0.0) throw Error(ErrorCode::invalid_argument, "cutoff R must be >= 0");
  }
};

/// One diagnostic sample. Variance-type entries are NaN when the boundary
/// mass check fails.
struct DiagnosticRow {
  double t = 0.0;
  double mass = 0.0;
  double energy = 0.0;
  Vec3 momentum{};
  double grad_sq = 0.0;
  double l4_4 = 0.0;
  double eta = 0.0;
  double variance = 0.0;
  double rprime = 0.0;  // d/dt ||x u||^2 = 4 Im int (x . grad u) conj(u)
  double z_R = 0.0;
  double z_R_prime = 0.0;
  double z_R_second = 0.0;  // right side of the local virial identity
  double virial_part = 0.0; // 24 E - 4 ||grad u||^2
  double A_R = 0.0;
  double A_R_bound = 0.0;
  double eta_geq_R = 0.0;
  bool at_detection = false;
};

using VirialSeries = std::vector<DiagnosticRow>;

inline double default_cutoff_radius(const Grid& g) { return 0.4 * g.half_width; }

/// All diagnostics of one field from a single spectrum and gradient.
inline DiagnosticRow measure(const Field& f, const GroundState& q, double R) {
  f.require_finite("measure");
  if (!(R < f.grid.half_width))
    throw Error(ErrorCode::out_of_range, "cutoff radius " + std::to_string(R) + " must lie inside the domain");
  const Cutoff cutoff(R);
  Norms n;
  detail::PointwiseGradient pg;
  if (f.grid.is_periodic()) {
    const Samples hat = spectral::spectrum(f);
    const auto m = spectral::moments_from_spectrum(hat, f.grid);
    n.mass = m.mass;
    n.grad_sq = m.grad_sq;
    n.momentum = m.momentum;
    pg = detail::pointwise_gradient(f, &hat);
  } else {
    n.mass = mass(f);
    n.grad_sq = radial::grad_sq(f);
    pg = detail::pointwise_gradient(f);
  }
  const double edge = 0.9 * f.grid.half_width;
  // L4, variance, rate, z, z', A_R pieces (3), exterior M, G, L4, shell mass
  const auto s = reduce_sum<13>(f.size(), [&](std::size_t i) {
    const double w = f.grid.weight(i);
    const double r = pg.radius[i];
    const double a = std::norm(f[i]);
    std::array<double, 13> t{};
    t[0] = w * a * a;
    t[1] = w * r * r * a;
    t[2] = w * r * std::imag(pg.radial[i] * std::conj(f[i]));
    t[3] = w * cutoff.weight(r) * a;
    t[4] = 2.0 * w * cutoff.weight_slope(r) * std::imag(std::conj(f[i]) * pg.radial[i]);
    if (r >= R) {
      const double sc = r / R;
      t[5] = 4.0 * w * (Cutoff::hessian_form(sc, std::norm(pg.radial[i]), pg.grad_sq[i]) - 2.0 * pg.grad_sq[i]);
      t[6] = -w * (Cutoff::laplacian(sc) - 6.0) * a * a;
      t[7] = -w * Cutoff::bilaplacian(sc) * a / (R * R);
      t[8] = w * a;
      t[9] = w * pg.grad_sq[i];
      t[10] = w * a * a;
    }
    if (f.grid.is_periodic()) {
      const Vec3 x = f.grid.position(i);
      if (std::abs(x[0]) >= edge || std::abs(x[1]) >= edge || std::abs(x[2]) >= edge) t[11] = a;
      t[12] = a;
    }
    return t;
  });
  n.l4_4 = s[0];
  const InvariantReport rep = report_from_norms(n, q);
  DiagnosticRow row;
  row.t = f.time;
  row.mass = rep.mass;
  row.energy = rep.energy;
  row.momentum = rep.momentum;
  row.grad_sq = rep.grad_sq;
  row.l4_4 = rep.l4_4;
  row.eta = rep.eta;
  const bool trusted = !(s[12] > 0.0) || s[11] / s[12] < kBoundaryMassTol;
  row.variance = trusted ? s[1] : std::numeric_limits<double>::quiet_NaN();
  row.rprime = trusted ? 4.0 * s[2] : std::numeric_limits<double>::quiet_NaN();
  row.z_R = s[3];
  row.z_R_prime = s[4];
  row.A_R = s[5] + s[6] + s[7];
  row.virial_part = 8.0 * n.grad_sq - 6.0 * n.l4_4;
  row.z_R_second = row.virial_part + row.A_R;
  row.A_R_bound = Cutoff::bound_constant() * (s[8] / (R * R) + s[10]);
  row.eta_geq_R = std::sqrt(s[8] * s[9] / (q.mass_sq * q.grad_sq));
  return row;
}

/// Strang splitting N(dt/2) L(dt) N(dt/2) with the two half kicks of
/// consecutive steps fused; the field is synchronized only on request.
class Stepper {
 public:
  Stepper(Field f, bool dealias) : f_(std::move(f)), dealias_(dealias) {
    if (f_.grid.is_periodic()) {
      const std::size_t n = f_.grid.n;
      k_ = spectral::derivative_symbol(n, f_.grid.half_width);
      const auto kfull = spectral::wavenumbers(n, f_.grid.half_width);
      ksq_.resize(n);
      keep_.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        ksq_[i] = kfull[i] * kfull[i];
        const long m = i < n / 2 ? static_cast<long>(i) : static_cast<long>(i) - static_cast<long>(n);
        keep_[i] = !dealias_ || 3 * std::abs(m) <= static_cast<long>(n);
      }
      phase_.resize(n);
    }
  }

  double time() const { return f_.time; }
  const Grid& grid() const { return f_.grid; }

  /// Advances by dt and returns ||grad u||^2 of the field between the linear
  /// step and the pending half kick (a cheap proxy for the synchronized value).
  double advance(double dt) {
    kick(pending_ + 0.5 * dt);
    const double g = f_.grid.is_periodic() ? linear_periodic(dt) : linear_radial(dt);
    pending_ = 0.5 * dt;
    f_.time += dt;
    return g;
  }

  /// Field synchronized to time(): applies the pending half kick.
  const Field& field() {
    if (pending_ != 0.0) {
      kick(pending_);
      pending_ = 0.0;
    }
    return f_;
  }

 private:
  void kick(double tau) {
    if (tau == 0.0) return;
    double* p = reinterpret_cast<double*>(f_.values.data());
    parallel_for(f_.size(), [&](std::size_t i) {
      const double re = p[2 * i], im = p[2 * i + 1];
      const double ph = (re * re + im * im) * tau;
      const double c = std::cos(ph), s = std::sin(ph);
      p[2 * i] = re * c - im * s;
      p[2 * i + 1] = re * s + im * c;
    });
  }

  double linear_periodic(double dt) {
    const std::size_t n = f_.grid.n;
    const double inv_total = 1.0 / static_cast<double>(f_.size());
    if (dt != phase_dt_) {
      for (std::size_t i = 0; i < n; ++i) phase_[i] = keep_[i] ? std::polar(1.0, -ksq_[i] * dt) : cplx{};
      phase_dt_ = dt;
    }
    spectral::forward_in_place(f_.values, n);
    double* p = reinterpret_cast<double*>(f_.values.data());
    // One row (fixed iy, iz) per reduction term keeps the sum order fixed.
    const double gsum = reduce_sum(n * n, [&](std::size_t row) {
      const std::size_t iy = row % n, iz = row / n;
      const cplx fyz = phase_[iy] * phase_[iz] * inv_total;
      const double kyz = k_[iy] * k_[iy] + k_[iz] * k_[iz];
      double acc = 0.0;
      double* base = p + 2 * row * n;
      for (std::size_t ix = 0; ix < n; ++ix) {
        const cplx e = fyz * phase_[ix];
        const double er = e.real(), ei = e.imag();
        const double re = base[2 * ix], im = base[2 * ix + 1];
        const double nr = re * er - im * ei, ni = re * ei + im * er;
        base[2 * ix] = nr;
        base[2 * ix + 1] = ni;
        acc += (kyz + k_[ix] * k_[ix]) * (nr * nr + ni * ni);
      }
      return acc;
    });
    spectral::detail::plan_for(n).backward(f_.values);
    const double h = f_.grid.spacing();
    return gsum * h * h * h * static_cast<double>(f_.size());
  }

  double linear_radial(double dt) {
    cn_.apply(f_, dt);
    return radial::grad_sq(f_);
  }

  Field f_;
  bool dealias_;
  double pending_ = 0.0;
  std::vector<double> k_, ksq_;
  std::vector<bool> keep_;
  std::vector<cplx> phase_;
  double phase_dt_ = std::numeric_limits<double>::quiet_NaN();
  radial::CrankNicolson cn_;
};

/// One Strang step.
inline Field step(const Field& f, double dt, bool dealias = true) {
  if (!(dt > 0.0)) throw Error(ErrorCode::invalid_argument, "step needs dt > 0");
  Stepper s(f, dealias);
  s.advance(dt);
  Field out = s.field();
  if (!out.all_finite()) throw Error(ErrorCode::overflow, "step produced non-finite samples");
  return out;
}

enum class Outcome { reached_t_end, blowup_detected, step_underflow };

inline std::string to_string(Outcome o) {
  switch (o) {
    case Outcome::reached_t_end: return "reached_t_end";
    case Outcome::blowup_detected: return "blowup_detected";
    case Outcome::step_underflow: return "step_underflow";
  }
  return "unknown";
}

/// t_blowup_observed is the first time the detection criterion fired. At a
/// fixed resolution this over-estimates the true blow-up time.
struct RunResult {
  Outcome outcome = Outcome::reached_t_end;
  double t_final = 0.0;
  std::optional<double> t_blowup_observed;
  bool non_finite = false;
  double max_grad = 0.0;  // largest ||grad u||_2 seen
  std::size_t steps = 0;
  VirialSeries diagnostics;
  std::vector<Field> snapshots;
};

/// Receives synchronized snapshots; when absent they are kept in RunResult.
using SnapshotSink = std::function<void(const Field&, std::size_t index)>;

inline RunResult evolve(const Field& f0, const EvolveConfig& cfg, const GroundState& q,
                        const SnapshotSink& sink = {}) {
  cfg.validate();
  f0.require_finite("evolve");
  const double R = cfg.cutoff_R > 0.0 ? cfg.cutoff_R : default_cutoff_radius(f0.grid);
  RunResult res;
  Stepper stepper(f0, cfg.dealias);
  std::size_t snap_index = 0;

  auto snapshot = [&](const Field& f) {
    if (sink) sink(f, snap_index);
    else res.snapshots.push_back(f);
    ++snap_index;
  };

  const DiagnosticRow first = measure(f0, q, R);
  res.diagnostics.push_back(first);
  const double g0 = first.grad_sq;
  const double limit_sq = cfg.blowup_factor * cfg.blowup_factor * g0;
  res.max_grad = std::sqrt(g0);
  if (cfg.snapshot_every > 0) snapshot(f0);

  double g = g0;
  double last_diag_t = f0.time;
  const double t_stop = f0.time + cfg.t_end;
  const double underflow = 1e-12 * cfg.dt0;

  while (stepper.time() < t_stop) {
    double dt = cfg.dt0;
    if (cfg.adaptive && g > 0.0) dt = std::min(cfg.dt0, cfg.cfl_alpha * cfg.dt0 * (g0 / g) * (g0 / g));
    if (dt < underflow) {
      res.outcome = Outcome::step_underflow;
      break;
    }
    dt = std::min(dt, t_stop - stepper.time());
    g = stepper.advance(dt);
    ++res.steps;

    if (!std::isfinite(g)) {
      res.non_finite = true;
      res.outcome = Outcome::blowup_detected;
      res.t_blowup_observed = stepper.time();
      break;
    }
    res.max_grad = std::max(res.max_grad, std::sqrt(g));
    if (g >= 0.81 * limit_sq) {
      // Near the threshold: confirm on the synchronized field.
      const Field& f = stepper.field();
      const double exact = f.grid.is_periodic() ? field_norms(f).grad_sq : radial::grad_sq(f);
      g = exact;
      res.max_grad = std::max(res.max_grad, std::sqrt(exact));
      if (!std::isfinite(exact) || exact >= limit_sq) {
        res.outcome = Outcome::blowup_detected;
        res.t_blowup_observed = stepper.time();
        if (f.all_finite()) {
          DiagnosticRow row = measure(f, q, R);
          row.at_detection = true;
          res.diagnostics.push_back(row);
        } else {
          res.non_finite = true;
        }
        break;
      }
    }
    const bool diag_due = res.steps % cfg.diag_every == 0;
    const bool snap_due = cfg.snapshot_every > 0 && res.steps % cfg.snapshot_every == 0;
    if (diag_due || snap_due) {
      const Field& f = stepper.field();
      if (diag_due) {
        res.diagnostics.push_back(measure(f, q, R));
        last_diag_t = f.time;
      }
      if (snap_due) snapshot(f);
    }
  }

  const Field& last = stepper.field();
  res.t_final = last.time;
  if (res.outcome != Outcome::blowup_detected && last.time != last_diag_t) res.diagnostics.push_back(measure(last, q, R));
  return res;
}

struct ConservationReport {
  double mass_drift = 0.0;      // max relative
  double energy_drift = 0.0;    // max relative (absolute when E(0) = 0)
  double momentum_drift = 0.0;  // max absolute, Euclidean
  std::size_t rows = 0;
};

/// Drift over the series, ignoring the row recorded at blow-up detection.
inline ConservationReport conservation_audit(const VirialSeries& diag) {
  std::vector<const DiagnosticRow*> rows;
  for (const auto& r : diag)
    if (!r.at_detection) rows.push_back(&r);
  if (rows.size() < 2) throw Error(ErrorCode::invalid_argument, "conservation audit needs at least two rows");
  const DiagnosticRow& r0 = *rows.front();
  auto rel = [](double v, double ref) { return ref != 0.0 ? std::abs(v - ref) / std::abs(ref) : std::abs(v - ref); };
  ConservationReport out;
  out.rows = rows.size();
  for (const auto* r : rows) {
    out.mass_drift = std::max(out.mass_drift, rel(r->mass, r0.mass));
    out.energy_drift = std::max(out.energy_drift, rel(r->energy, r0.energy));
    const double dp = std::hypot(r->momentum[0] - r0.momentum[0], r->momentum[1] - r0.momentum[1],
                                 r->momentum[2] - r0.momentum[2]);
    out.momentum_drift = std::max(out.momentum_drift, dp);
  }
  return out;
}

struct RateFit {
  double p = std::numeric_limits<double>::quiet_NaN();
  double t_star = std::numeric_limits<double>::quiet_NaN();
  double log_c = std::numeric_limits<double>::quiet_NaN();
  double rms = std::numeric_limits<double>::quiet_NaN();
  std::size_t rows = 0;
};

/// Least-squares fit of ||grad u(t)||_2 = c (T* - t)^-p over the last decade
/// of gradient growth, with T* scanned on a log grid beyond the last sample.
inline RateFit fit_blowup_rate(const VirialSeries& diag) {
  RateFit fit;
  if (diag.empty()) return fit;
  double gmax = 0.0;
  for (const auto& r : diag) gmax = std::max(gmax, std::sqrt(r.grad_sq));
  std::vector<std::pair<double, double>> pts;  // (t, log ||grad u||)
  for (const auto& r : diag)
    if (std::isfinite(r.grad_sq) && std::sqrt(r.grad_sq) >= 0.1 * gmax) pts.emplace_back(r.t, 0.5 * std::log(r.grad_sq));
  // Only the monotone growth phase: drop samples before the last minimum.
  std::size_t start = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].second <= pts[start].second) start = i;
  pts.erase(pts.begin(), pts.begin() + static_cast<long>(start));
  fit.rows = pts.size();
  if (pts.size() < 4) return fit;
  const double t_last = pts.back().first;
  const double span = t_last - pts.front().first;
  if (!(span > 0.0)) return fit;
  double best = std::numeric_limits<double>::infinity();
  for (int j = 0; j <= 600; ++j) {
    const double delta = span * std::pow(10.0, -6.0 + 7.0 * j / 600.0);
    const double ts = t_last + delta;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double m = static_cast<double>(pts.size());
    for (const auto& [t, y] : pts) {
      const double x = -std::log(ts - t);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    const double den = m * sxx - sx * sx;
    if (!(den > 0.0)) continue;
    const double p = (m * sxy - sx * sy) / den;
    const double c = (sy - p * sx) / m;
    double ss = 0.0;
    for (const auto& [t, y] : pts) {
      const double e = y - (c - p * std::log(ts - t));
      ss += e * e;
    }
    if (ss < best) {
      best = ss;
      fit.p = p;
      fit.t_star = ts;
      fit.log_c = c;
      fit.rms = std::sqrt(ss / m);
    }
  }
  return fit;
}

}  // namespace nlslab
