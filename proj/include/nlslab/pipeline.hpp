#pragma once

#include <cstdio>
#include <filesystem>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nlslab/config.hpp"
#include "nlslab/evolution.hpp"
#include "nlslab/io.hpp"
#include "nlslab/thresholds.hpp"
#include "nlslab/virial.hpp"

namespace nlslab {

enum class Verdict { bound_respected, no_blowup_within_horizon, bound_not_applicable, bound_violated };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::bound_respected: return "bound_respected";
    case Verdict::no_blowup_within_horizon: return "no_blowup_within_horizon";
    case Verdict::bound_not_applicable: return "bound_not_applicable";
    case Verdict::bound_violated: return "bound_violated";
  }
  return "unknown";
}

/// Bound evaluated for the evolved data, in its own time units.
struct ModeBound {
  BoundMode mode = BoundMode::finite_variance;
  std::optional<BlowupBound> bound;  // unset when not applicable
  double t_b = std::numeric_limits<double>::infinity();
  std::string reason;
};

struct PipelineVerdict {
  Verdict verdict = Verdict::bound_not_applicable;
  std::optional<Classification> classification;
  std::string classify_error;
  double beta = 1.0;  // M[u] / M[Q]
  std::vector<ModeBound> bounds;
  bool evolved = false;
  RunResult run;
  std::optional<double> t_obs;
  std::optional<double> t_b;  // smallest applicable bound
  double max_eta_geq_R = 0.0;
  std::string note;

  int exit_code() const { return verdict == Verdict::bound_violated ? 2 : 0; }
};

struct PipelineOutputs {
  std::string diag_csv;   // empty: no CSV
  std::string snap_dir;   // empty: no snapshots written
};

/// Every configured bound mode for one field, with t_b in the field's time.
inline std::vector<ModeBound> evaluate_bounds(const Field& f, const GroundState& q, const RunConfig& cfg,
                                              double* beta_out = nullptr) {
  std::vector<ModeBound> out;
  if (beta_out) *beta_out = field_norms(f).mass / q.mass_sq;
  for (BoundMode mode : cfg.modes) {
    ModeBound mb;
    mb.mode = mode;
    try {
      BoundRequest req;
      req.mode = mode;
      req.R = cfg.local_R;
      req.gamma = cfg.gamma;
      req.constants = cfg.constants;
      mb.bound = bound_for_field(f, q, req);
      mb.t_b = mb.bound->t_b;
    } catch (const Error& e) {
      mb.reason = e.what();
    }
    out.push_back(mb);
  }
  return out;
}

/// classify -> bounds -> evolve -> verdict.
inline PipelineVerdict run_pipeline(const RunConfig& cfg, const GroundState& q, const PipelineOutputs& outputs = {}) {
  PipelineVerdict pv;
  Field u = make_initial(cfg, q);

  try {
    pv.classification = classify(u, q, cfg.galilean);
  } catch (const Error& e) {
    pv.classify_error = e.what();
    pv.verdict = Verdict::bound_not_applicable;
    pv.note = "classification failed: " + pv.classify_error;
    return pv;
  }
  const Classification& c = *pv.classification;
  if (c.galilean_applied) u = galilean_reduce(u).field;

  EvolveConfig ecfg = cfg.evolve;
  if (c.dichotomy == DichotomyCase::above_threshold) {
    pv.bounds = evaluate_bounds(u, q, cfg, &pv.beta);
    for (const auto& mb : pv.bounds)
      if (mb.bound) pv.t_b = std::min(pv.t_b.value_or(mb.t_b), mb.t_b);
    // eta_{>=R}[v] = eta_{>=beta R}[u], so monitor the local hypothesis in u.
    if (ecfg.cutoff_R == 0.0)
      for (const auto& mb : pv.bounds)
        if (mb.bound && mb.mode == BoundMode::localized && pv.beta * cfg.local_R < u.grid.half_width)
          ecfg.cutoff_R = pv.beta * cfg.local_R;
  }

  SnapshotSink sink;
  if (!outputs.snap_dir.empty()) {
    std::filesystem::create_directories(outputs.snap_dir);
    sink = [&](const Field& f, std::size_t index) {
      char name[32];
      std::snprintf(name, sizeof name, "snap_%05zu.nlsf", index);
      io::write_field((std::filesystem::path(outputs.snap_dir) / name).string(), f);
    };
  } else {
    ecfg.snapshot_every = 0;
  }
  pv.run = evolve(u, ecfg, q, sink);
  pv.evolved = true;
  if (!outputs.diag_csv.empty()) io::write_csv(outputs.diag_csv, pv.run.diagnostics);
  pv.t_obs = pv.run.t_blowup_observed;
  for (const auto& row : pv.run.diagnostics) pv.max_eta_geq_R = std::max(pv.max_eta_geq_R, row.eta_geq_R);

  const double horizon = pv.run.t_final;
  if (c.dichotomy != DichotomyCase::above_threshold) {
    if (c.dichotomy == DichotomyCase::global_bounded) {
      pv.verdict = pv.t_obs ? Verdict::bound_violated : Verdict::no_blowup_within_horizon;
      pv.note = pv.t_obs ? "data with eta(0) <= lambda_minus below the threshold was detected as blowing up"
                         : "data with eta(0) <= lambda_minus below the threshold stays bounded";
    } else {
      pv.verdict = Verdict::bound_not_applicable;
      pv.note = "data is " + to_string(c.dichotomy) + "; no blow-up bound applies";
    }
    return pv;
  }
  if (!pv.t_b) {
    pv.verdict = Verdict::bound_not_applicable;
    pv.note = "no bound mode applies";
    return pv;
  }
  if (pv.t_obs) {
    bool ok = true;
    for (const auto& mb : pv.bounds)
      if (mb.bound && *pv.t_obs > mb.t_b) ok = false;
    pv.verdict = ok ? Verdict::bound_respected : Verdict::bound_violated;
    if (!ok) pv.note = "observed blow-up time exceeds a bound";
  } else if (pv.run.outcome == Outcome::step_underflow) {
    pv.verdict = Verdict::bound_not_applicable;
    pv.note = "time step underflow before detection at t = " + io::fmt(horizon);
  } else if (horizon >= *pv.t_b) {
    pv.verdict = Verdict::bound_violated;
    pv.note = "no blow-up detected by t = " + io::fmt(horizon) + " although t_b = " + io::fmt(*pv.t_b);
  } else {
    pv.verdict = Verdict::no_blowup_within_horizon;
    pv.note = "horizon " + io::fmt(horizon) + " ends before t_b = " + io::fmt(*pv.t_b);
  }
  return pv;
}

}  // namespace nlslab
