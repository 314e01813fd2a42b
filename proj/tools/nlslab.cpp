// nlslab command-line front end.
#include <fftw3.h>

#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "nlslab/nlslab.hpp"

using namespace nlslab;
using io::fmt;

namespace {

struct QOptions {
  std::string path;
  double r_max = 20.0;
  std::size_t n = 16384;
  double tol = 1e-12;

  void attach(CLI::App* app) {
    app->add_option("--q", path, "Ground-state profile (NLSQ); solved on demand when omitted");
    app->add_option("--q-rmax", r_max, "Shooting radius when solving for Q")->capture_default_str();
    app->add_option("--q-n", n, "Shooting grid intervals when solving for Q")->capture_default_str();
    app->add_option("--q-tol", tol, "Shooting tolerance when solving for Q")->capture_default_str();
  }

  GroundState load() const {
    if (!path.empty()) return io::read_profile(path);
    return solve_ground_state(r_max, n, tol);
  }
};

struct InputOptions {
  std::string input;
  std::string config;

  void attach(CLI::App* app) {
    auto* in = app->add_option("--input", input, "Field snapshot (NLSF)");
    auto* cf = app->add_option("--config", config, "Run config; its init line supplies the field");
    in->excludes(cf);
  }

  Field load(const GroundState& q) const {
    if (!input.empty()) return io::read_field(input);
    if (!config.empty()) return make_initial(read_config(config), q);
    throw Error(ErrorCode::invalid_argument, "one of --input or --config is required");
  }
};

std::string opt(const std::optional<double>& v) { return v ? fmt(*v) : "none"; }

std::string vec(const Vec3& v) { return "(" + fmt(v[0]) + "," + fmt(v[1]) + "," + fmt(v[2]) + ")"; }

void print_classification(const Classification& c) {
  std::cout << "me_ratio=" << fmt(c.me_ratio) << " lambda_minus=" << opt(c.lambda_minus) << " lambda=" << opt(c.lambda)
            << " eta0=" << fmt(c.eta0) << " case=" << to_string(c.dichotomy);
  if (c.galilean_applied) {
    std::cout << " xi0=" << vec(c.xi0);
    if (c.galilean_consistent) std::cout << " galilean_consistent=" << (*c.galilean_consistent ? "true" : "false");
  }
  std::cout << "\n";
}

void print_bound(const ModeBound& mb, double beta) {
  if (!mb.bound) {
    std::cout << "mode=" << to_string(mb.mode) << " not_applicable: " << mb.reason << "\n";
    return;
  }
  const BlowupBound& b = *mb.bound;
  std::cout << "t_b=" << fmt(mb.t_b) << " lambda=" << fmt(b.lambda) << " mode=" << to_string(b.mode)
            << " r0=" << fmt(b.r0) << " rprime0=" << fmt(b.rprime0) << " beta=" << fmt(beta);
  if (b.mode != BoundMode::finite_variance) std::cout << " R=" << fmt(b.R);
  if (b.mode == BoundMode::localized) std::cout << " gamma=" << fmt(b.gamma);
  std::cout << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical lab for the 3D focusing cubic NLS"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);

  // groundstate
  auto* gs = app.add_subcommand("groundstate", "Solve for the radial ground state Q and certify it");
  double gs_rmax = 20.0, gs_tol = 1e-12;
  std::size_t gs_n = 16384;
  std::string gs_out;
  gs->add_option("--r-max", gs_rmax, "Outer radius of the shooting grid")->capture_default_str();
  gs->add_option("--n", gs_n, "Number of grid intervals")->capture_default_str();
  gs->add_option("--tol", gs_tol, "Bisection tolerance on Q(0)")->capture_default_str();
  gs->add_option("--out", gs_out, "Write the profile as NLSQ");

  // classify
  auto* cl = app.add_subcommand("classify", "Mass-energy ratio, threshold roots and dichotomy case");
  QOptions cl_q;
  InputOptions cl_in;
  bool cl_gal = false;
  cl_q.attach(cl);
  cl_in.attach(cl);
  cl->add_flag("--galilean", cl_gal, "Apply the zero-momentum Galilean reduction first");

  // evolve
  auto* ev = app.add_subcommand("evolve", "Run the split-step integrator from a config");
  std::string ev_cfg, ev_diag, ev_snap;
  ev->add_option("--config", ev_cfg, "Run config (key = value lines)")->required();
  ev->add_option("--out-diag", ev_diag, "Diagnostics CSV");
  ev->add_option("--out-snap", ev_snap, "Directory for NLSF snapshots");

  // virial
  auto* vi = app.add_subcommand("virial", "Variance and localized virial diagnostics of one field");
  QOptions vi_q;
  InputOptions vi_in;
  double vi_R = 0.0;
  vi_q.attach(vi);
  vi_in.attach(vi);
  vi->add_option("--R", vi_R, "Cutoff radius (default 0.4 L)");

  // bound
  auto* bo = app.add_subcommand("bound", "Blow-up time upper bound for above-threshold data");
  QOptions bo_q;
  InputOptions bo_in;
  std::string bo_mode = "finite-variance";
  double bo_R = 12.0, bo_gamma = 0.05;
  BoundConstants bo_k;
  bo_q.attach(bo);
  bo_in.attach(bo);
  bo->add_option("--mode", bo_mode, "finite-variance, local or radial")
      ->check(CLI::IsMember({"finite-variance", "local", "radial"}))
      ->capture_default_str();
  bo->add_option("--R", bo_R, "Cutoff radius for the local mode")->capture_default_str();
  bo->add_option("--gamma", bo_gamma, "Exterior smallness gamma for the local mode")->capture_default_str();
  bo->add_option("--gamma0", bo_k.gamma0, "Upper limit on gamma")->capture_default_str();
  bo->add_option("--c-R", bo_k.c_R, "Local mode requires R >= c_R / sqrt(gamma)")->capture_default_str();
  bo->add_option("--c2", bo_k.c2, "Radial mode radius constant")->capture_default_str();

  // modulate
  auto* mo = app.add_subcommand("modulate", "Fit phase and centre of the nearest rescaled soliton");
  QOptions mo_q;
  std::string mo_input;
  double mo_lambda = 1.0;
  mo_q.attach(mo);
  mo->add_option("--input", mo_input, "Field snapshot (NLSF)")->required();
  mo->add_option("--lambda", mo_lambda, "Soliton scale")->required();

  // pipeline
  auto* pi = app.add_subcommand("pipeline", "Classify, bound, evolve and render a verdict");
  std::string pi_cfg, pi_diag, pi_snap;
  pi->add_option("--config", pi_cfg, "Run config (key = value lines)")->required();
  pi->add_option("--out-diag", pi_diag, "Diagnostics CSV");
  pi->add_option("--out-snap", pi_snap, "Directory for NLSF snapshots");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gs) {
      const GroundState q = solve_ground_state(gs_rmax, gs_n, gs_tol);
      const Certificate& c = q.certificate;
      std::cout << "Q0=" << fmt(q.peak()) << " mass=" << fmt(q.mass_sq) << " grad_sq=" << fmt(q.grad_sq)
                << " l4_4=" << fmt(q.l4_4) << " energy=" << fmt(q.energy) << " c_gn=" << fmt(q.c_gn) << "\n"
                << "cert grad/mass=" << fmt(c.grad_over_mass) << " l4/mass=" << fmt(c.l4_over_mass)
                << " energy/grad=" << fmt(c.energy_over_grad) << "\n";
      if (!gs_out.empty()) io::write_profile(gs_out, q);
      return 0;
    }
    if (*cl) {
      const GroundState q = cl_q.load();
      print_classification(classify(cl_in.load(q), q, cl_gal));
      return 0;
    }
    if (*ev) {
      RunConfig cfg = read_config(ev_cfg);
      const GroundState q = load_ground_state(cfg);
      const Field f0 = make_initial(cfg, q);
      SnapshotSink sink;
      if (!ev_snap.empty()) {
        std::filesystem::create_directories(ev_snap);
        sink = [&](const Field& f, std::size_t index) {
          char name[32];
          std::snprintf(name, sizeof name, "snap_%05zu.nlsf", index);
          io::write_field((std::filesystem::path(ev_snap) / name).string(), f);
        };
      } else {
        cfg.evolve.snapshot_every = 0;
      }
      const RunResult r = evolve(f0, cfg.evolve, q, sink);
      if (!ev_diag.empty()) io::write_csv(ev_diag, r.diagnostics);
      std::cout << "outcome=" << to_string(r.outcome) << " t_final=" << fmt(r.t_final)
                << " t_obs=" << opt(r.t_blowup_observed) << " steps=" << r.steps << " max_grad=" << fmt(r.max_grad)
                << "\n";
      return 0;
    }
    if (*vi) {
      const GroundState q = vi_q.load();
      const Field f = vi_in.load(q);
      const double R = vi_R > 0.0 ? vi_R : default_cutoff_radius(f.grid);
      const DiagnosticRow d = measure(f, q, R);
      std::cout << "variance=" << fmt(d.variance) << " rprime=" << fmt(d.rprime) << " R=" << fmt(R)
                << " z_R=" << fmt(d.z_R) << " z_R_prime=" << fmt(d.z_R_prime) << " z_R_second=" << fmt(d.z_R_second)
                << " virial=" << fmt(d.virial_part) << " A_R=" << fmt(d.A_R) << " A_R_bound=" << fmt(d.A_R_bound)
                << " eta_geq_R=" << fmt(d.eta_geq_R) << "\n";
      return 0;
    }
    if (*bo) {
      const GroundState q = bo_q.load();
      const Field f = bo_in.load(q);
      RunConfig cfg;
      cfg.modes = {parse_bound_mode(bo_mode)};
      cfg.local_R = bo_R;
      cfg.gamma = bo_gamma;
      cfg.constants = bo_k;
      double beta = 1.0;
      const auto bounds = evaluate_bounds(f, q, cfg, &beta);
      print_bound(bounds.front(), beta);
      return bounds.front().bound ? 0 : 1;
    }
    if (*mo) {
      const GroundState q = mo_q.load();
      const ModulationFit m = fit_modulation(io::read_field(mo_input), q, mo_lambda);
      std::cout << "theta=" << fmt(m.theta) << " x0=" << vec(m.x0) << " beta=" << fmt(m.beta)
                << " resid_l2=" << fmt(m.resid_l2) << " resid_h1=" << fmt(m.resid_h1dot)
                << " rho_proxy=" << fmt(m.rho_proxy) << " converged=" << (m.converged ? "true" : "false") << "\n";
      return 0;
    }
    if (*pi) {
      const RunConfig cfg = read_config(pi_cfg);
      const GroundState q = load_ground_state(cfg);
      std::cout << "# nlslab " << kVersion << " fftw " << fftw_version << "\n";
      for (const auto& [k, v] : cfg.echo) std::cout << "# " << k << " = " << v << "\n";
      const PipelineVerdict pv = run_pipeline(cfg, q, {pi_diag, pi_snap});
      if (pv.classification) print_classification(*pv.classification);
      for (const auto& mb : pv.bounds) print_bound(mb, pv.beta);
      if (pv.evolved)
        std::cout << "outcome=" << to_string(pv.run.outcome) << " t_final=" << fmt(pv.run.t_final)
                  << " steps=" << pv.run.steps << " max_eta_geq_R=" << fmt(pv.max_eta_geq_R) << "\n";
      std::cout << "verdict=" << to_string(pv.verdict) << " t_obs=" << opt(pv.t_obs) << " t_b=" << opt(pv.t_b) << "\n";
      if (!pv.note.empty()) std::cout << "note: " << pv.note << "\n";
      return pv.exit_code();
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
