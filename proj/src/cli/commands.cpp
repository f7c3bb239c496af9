#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>

#include <CLI11.hpp>

#include "catfield/cli.hpp"

namespace catfield::cli {

using nlohmann::json;

namespace {

const std::vector<std::string> kCommands = {"engineer", "evolve", "decohere", "optimize", "sweep", "wigner"};

// Runs f(0..count-1) on up to `threads` workers; the lowest failing index is rethrown.
template <class F>
void parallel_for(int count, int threads, const F& f) {
  const int workers = std::max(1, std::min(threads, count));
  if (workers == 1) {
    for (int i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::mutex m;
  int failed_at = count;
  std::exception_ptr failure;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard lock(m);
          if (i < failed_at) {
            failed_at = i;
            failure = std::current_exception();
          }
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

OdeOptions ode_options(const RunConfig& cfg) {
  OdeOptions o;
  o.abs_tol = o.rel_tol = cfg.numerics.ode_tol;
  return o;
}

PrepareOptions prepare_options(const RunConfig& cfg) {
  PrepareOptions p;
  p.n_max = cfg.numerics.n_max;
  p.tail_tol = cfg.numerics.tail_tol;
  p.ode = ode_options(cfg);
  return p;
}

const char* time_unit(const RunConfig& cfg) { return cfg.mode == "SI" ? "s" : "1"; }

json complex_json(cplx z) { return {{"re", number(z.real())}, {"im", number(z.imag())}}; }

json moments_json(const Moments& m) {
  return {{"a", complex_json(m.a)}, {"n", number(m.n)}, {"a2", complex_json(m.a2)}};
}

struct Engineered {
  DriveConfig drive;
  ProtocolConfig protocol;
  CatResult cat;
  json search = nullptr;
};

Engineered engineer(const RunConfig& cfg, std::ostream& log) {
  DriveConfig drive = cfg.drive;
  ProtocolConfig protocol = cfg.protocol;
  json search = nullptr;
  if (cfg.search.enabled) {
    SearchOptions so;
    so.tau_max = cfg.search.tau_max;
    so.scan_points = cfg.search.scan_points;
    so.prepare = prepare_options(cfg);
    const SearchResult sr = protocol_search(cfg.drive, cfg.protocol, {cfg.search.theta, cfg.search.mean_n}, so);
    drive = sr.drive;
    protocol = sr.protocol;
    search = {{"theta_target", cfg.search.theta},
              {"theta_achieved", number(sr.theta_achieved)},
              {"mean_n_target", cfg.search.mean_n},
              {"mean_n_achieved", number(sr.mean_n_achieved)},
              {"theta_envelope", {number(sr.theta_envelope_lo), number(sr.theta_envelope_hi)}},
              {"t2", number(sr.drive.t2)},
              {"t_end", number(sr.drive.t_end)}};
  }
  Engineered e{drive, protocol, prepare_cat(drive, protocol, prepare_options(cfg)), search};
  if (e.cat.degenerate_branches) log << "warning: degenerate branches, the output is a single branch state\n";
  return e;
}

// Input state for decohere, optimize and wigner, with the parameters the closed forms need.
struct InputState {
  FockState state = FockState::vacuum(16);
  std::optional<double> alpha, r, phi;
  json info;
};

InputState input_state(const RunConfig& cfg, std::ostream& log) {
  const StateConfig& s = cfg.state;
  InputState in;
  in.info = {{"kind", s.kind}};
  if (s.kind == "engineered") {
    const Engineered e = engineer(cfg, log);
    in.state = e.cat.state;
    in.alpha = std::abs(e.protocol.alpha);
    in.r = 0.5 * (e.cat.at_end[0].r + e.cat.at_end[1].r);
    in.phi = e.cat.at_end[0].phi;
    in.info["theta_angle"] = number(e.cat.theta_angle);
    in.info["r"] = number(*in.r);
  } else if (s.kind == "squeezed_cat") {
    const int n = cfg.numerics.n_max > 0 ? cfg.numerics.n_max : auto_n_max(std::abs(s.alpha), s.r);
    in.state = squeezed_cat(s.alpha, s.r, s.phi1, s.phi2, s.sign, n, cfg.numerics.tail_tol);
    in.alpha = std::abs(s.alpha);
    in.r = s.r;
    in.phi = s.phi1;
  } else if (s.kind == "coherent") {
    const int n = cfg.numerics.n_max > 0 ? cfg.numerics.n_max : auto_n_max(std::abs(s.alpha), 0.0);
    in.state = coherent_state(s.alpha, n, cfg.numerics.tail_tol);
    in.alpha = std::abs(s.alpha);
    in.r = 0.0;
    in.phi = 0.0;
  } else {
    std::filesystem::path p(s.path);
    if (p.is_relative()) p = std::filesystem::path(cfg.base_dir) / p;
    in.state = read_state_file(p.string(), cfg.numerics.tail_tol);
  }
  in.info["n_max"] = in.state.dim();
  return in;
}

ReservoirCase reservoir_case(const RunConfig& cfg, const InputState& in) {
  if (cfg.reservoir.which == "A") return ReservoirCase::A;
  if (cfg.reservoir.which == "B") return ReservoirCase::B;
  return case_for_squeeze_phase(in.phi.value_or(0.0));
}

json reservoir_json(const ReservoirParams& r) {
  return {{"tau_R", number(r.tau_R)},     {"N", number(r.N)},       {"M", complex_json(r.M)},
          {"r_tilde", number(r.r_tilde)}, {"phi_tilde", number(r.phi_tilde)}, {"minimal", r.minimal}};
}

ReservoirParams reservoir(const RunConfig& cfg, const InputState& in) {
  const ReservoirConfig& rc = cfg.reservoir;
  try {
    if (rc.kind == "squeeze") return ReservoirParams::from_squeeze(rc.tau_R, rc.r_tilde, rc.phi_tilde);
    if (rc.kind == "general") return ReservoirParams::from_general(rc.tau_R, rc.N, rc.M);
  } catch (const InvalidReservoir& e) {
    throw ConfigError(e.what());
  }
  if (rc.kind == "closed_form") {
    if (!in.alpha || !in.r) throw ConfigError("closed_form reservoir needs a state with known alpha and r");
    const auto c = optimal_reservoir_closed_form(*in.alpha, *in.r, reservoir_case(cfg, in));
    return ReservoirParams::from_squeeze(rc.tau_R, c.r_tilde, c.phi_tilde);
  }
  const OptimizationResult best = maximize_tau(moments(in.state), rc.tau_R, cfg.optimize);
  return ReservoirParams::from_squeeze(rc.tau_R, best.r_tilde_opt, best.phi_tilde_opt);
}

json branch_json(const BranchSample& s, const CouplingRegime& regime) {
  return {{"r", number(s.r)},
          {"phi", number(s.phi)},
          {"delta", number(s.delta)},
          {"theta", complex_json(s.theta)},
          {"beta", number(s.beta)},
          {"regime", regime_name(regime.regime)},
          {"p_ell", number(regime.p_ell)}};
}

std::vector<OutputFile> cmd_engineer(const RunConfig& cfg, std::ostream& log) {
  const Engineered e = engineer(cfg, log);
  const CatResult& c = e.cat;
  json summary = {{"provenance", provenance(cfg, "engineer")},
                  {"time_unit", time_unit(cfg)},
                  {"branch_1_at_t2", branch_json(c.at_t2[0], classify_regime(e.drive, Branch::one))},
                  {"branch_2_at_t2", branch_json(c.at_t2[1], classify_regime(e.drive, Branch::two))},
                  {"branch_1_at_end", branch_json(c.at_end[0], classify_regime(e.drive, Branch::one))},
                  {"branch_2_at_end", branch_json(c.at_end[1], classify_regime(e.drive, Branch::two))},
                  {"theta_angle", number(c.theta_angle)},
                  {"mean_n", number(c.mean_n)},
                  {"distance", number(c.distance)},
                  {"normalization", number(c.normalization)},
                  {"n_max", c.n_max},
                  {"degenerate_branches", c.degenerate_branches},
                  {"t2", number(e.drive.t2)},
                  {"t_end", number(e.drive.t_end)},
                  {"search", e.search}};
  if (c.degenerate_branches) summary["warning"] = "degenerate branches";
  log << "r(t2) = " << format_double(c.at_t2[0].r) << ", " << format_double(c.at_t2[1].r)
      << "  Theta = " << format_double(c.theta_angle) << "  <n> = " << format_double(c.mean_n)
      << "  D = " << format_double(c.distance) << "\n";
  return {{"state.csv", state_file_text(cfg, "engineer", c.state)}, {"summary.json", summary.dump(2) + "\n"}};
}

std::vector<OutputFile> cmd_evolve(const RunConfig& cfg, std::ostream&) {
  const DriveConfig& d = cfg.drive;
  std::vector<double> times(cfg.evolve_samples + 1);
  for (int k = 0; k <= cfg.evolve_samples; ++k) times[k] = d.t0 + (d.t_end - d.t0) * k / cfg.evolve_samples;
  CsvWriter w(cfg, "evolve", {"t", "branch", "r", "phi", "delta", "theta_re", "theta_im", "beta", "global_phase",
                              "r_closed_form", "phi_closed_form"});
  w.comment(std::string("time unit ") + time_unit(cfg));
  for (Branch b : {Branch::one, Branch::two}) {
    const BranchEvolution ev = evolve_branch(d, b, times, ode_options(cfg));
    for (const BranchSample& s : ev.samples) {
      double rc = std::nan(""), pc = std::nan("");
      try {
        const SqueezeSample a = analytic_trajectory_point(d, b, s.t);
        rc = a.r;
        pc = a.phi;
      } catch (const Error&) {
      }
      w.row({s.t, double(static_cast<int>(b)), s.r, s.phi, s.delta, s.theta.real(), s.theta.imag(), s.beta,
             s.global_phase, rc, pc});
    }
  }
  return {{"trajectory.csv", w.str()}};
}

std::vector<OutputFile> cmd_decohere(const RunConfig& cfg, std::ostream& log) {
  const InputState in = input_state(cfg, log);
  const ReservoirParams res = reservoir(cfg, in);
  const DecoherenceReport rep = decoherence_report(in.state, res);

  CsvWriter w(cfg, "decohere", {"t", "purity", "trace", "min_eigenvalue"});
  w.comment(std::string("time unit ") + time_unit(cfg));
  json trajectory;
  const double tau = rep.analytic.pointer_state ? res.tau_R : rep.analytic.tau;
  const double horizon = cfg.numerics.master_horizon > 0.0 ? cfg.numerics.master_horizon : 2.0 * tau;
  const int samples = cfg.numerics.master_step > 0.0
                          ? std::max(1, static_cast<int>(std::lround(horizon / cfg.numerics.master_step)))
                          : 50;
  MasterOptions mo;
  mo.tail_tol = cfg.numerics.tail_tol;
  std::optional<MasterResult> traj;
  std::string frame = "lab";
  if (res.minimal) {
    traj = evolve_master_rotated(in.state, res, horizon, samples, mo);
    frame = "reservoir";
  } else {
    const CVector& c = in.state.amplitudes();
    int top = in.state.dim();
    double dropped = 0.0;
    while (top > 1 && dropped + std::norm(c[top - 1]) <= 1e-14) dropped += std::norm(c[--top]);
    const int dim = top + kTailLevels + 16 + 8 * static_cast<int>(std::ceil(res.N));
    if (dim > cfg.numerics.master_max_dim) {
      const std::string why = "master equation skipped: needs dimension " + std::to_string(dim) +
                              " > numerics.master_max_dim " + std::to_string(cfg.numerics.master_max_dim);
      w.comment(why);
      log << "warning: " << why << "\n";
      trajectory = why;
    } else {
      CVector padded = CVector::Zero(dim);
      const int keep = std::min(dim, in.state.dim());
      padded.head(keep) = c.head(keep);
      traj = evolve_master(DensityMatrix::pure(FockState(padded, 1.0)), res, horizon, samples, mo);
    }
  }
  if (traj) {
    for (std::size_t k = 0; k < traj->times.size(); ++k) {
      w.row({traj->times[k], traj->purity[k], traj->trace[k], traj->min_eigenvalue[k]});
    }
    trajectory = {{"frame", frame},
                  {"dimension", traj->final_state.dim()},
                  {"horizon", number(horizon)},
                  {"samples", samples}};
  }

  json report = {{"provenance", provenance(cfg, "decohere")},
                 {"time_unit", time_unit(cfg)},
                 {"state", in.info},
                 {"reservoir", reservoir_json(res)},
                 {"moments", moments_json(rep.moments)},
                 {"tau_analytic", number(rep.analytic.tau)},
                 {"tau_numeric", number(rep.numeric.tau)},
                 {"relative_deviation", number(rep.relative_deviation)},
                 {"pointer_state", rep.analytic.pointer_state},
                 {"purity_rate_analytic", number(rep.analytic.rate)},
                 {"purity_rate_numeric", number(rep.numeric.rate)},
                 {"purity_trajectory", trajectory}};
  if (in.alpha && *in.alpha > 0.0) report["tau_R_over_alpha"] = number(res.tau_R / *in.alpha);
  log << "tau_analytic = " << format_double(rep.analytic.tau) << "  tau_numeric = " << format_double(rep.numeric.tau)
      << "\n";
  return {{"purity.csv", w.str()}, {"decoherence.json", report.dump(2) + "\n"}};
}

std::vector<OutputFile> cmd_optimize(const RunConfig& cfg, std::ostream& log) {
  const InputState in = input_state(cfg, log);
  const Moments m = moments(in.state);
  OptimizationResult best = maximize_tau(m, cfg.reservoir.tau_R, cfg.optimize);
  json closed = nullptr;
  if (in.alpha && in.r) {
    const auto c = optimal_reservoir_closed_form(*in.alpha, *in.r, reservoir_case(cfg, in));
    compare_with_closed_form(best, c);
    closed = {{"case", c.which == ReservoirCase::A ? "A" : "B"},
              {"r_tilde", number(c.r_tilde)},
              {"phi_tilde", number(c.phi_tilde)},
              {"clamped_infeasible", c.clamped_infeasible},
              {"tau", number(tau_objective(m, cfg.reservoir.tau_R, c.r_tilde, c.phi_tilde))},
              {"r_residual", number(best.closed_form_r_residual)},
              {"phi_residual", number(best.closed_form_phi_residual)}};
  }
  json out = {{"provenance", provenance(cfg, "optimize")},
              {"time_unit", time_unit(cfg)},
              {"state", in.info},
              {"moments", moments_json(m)},
              {"tau_R", number(cfg.reservoir.tau_R)},
              {"method", method_name(best.method)},
              {"r_tilde_opt", number(best.r_tilde_opt)},
              {"phi_tilde_opt", number(best.phi_tilde_opt)},
              {"tau_opt", number(best.tau_opt)},
              {"grid", {{"r_tilde", number(best.grid_r_tilde)},
                        {"phi_tilde", number(best.grid_phi_tilde)},
                        {"tau", number(best.grid_tau)}}},
              {"plateau", best.plateau},
              {"iterations", best.iterations},
              {"closed_form", closed}};
  log << "tau_opt = " << format_double(best.tau_opt) << " at r_tilde = " << format_double(best.r_tilde_opt)
      << ", phi_tilde = " << format_double(best.phi_tilde_opt) << "\n";
  return {{"optimize.json", out.dump(2) + "\n"}};
}

std::vector<OutputFile> cmd_sweep(const RunConfig& cfg, int threads, std::ostream&) {
  const SweepConfig& s = cfg.sweep;
  if (s.alpha.empty() || s.r.empty()) throw ConfigError("sweep ranges must not be empty");
  const int count = static_cast<int>(s.alpha.size() * s.r.size());
  std::vector<AsymptoticReport> cells(count);
  parallel_for(count, threads, [&](int i) {
    AsymptoticInputs in;
    in.alpha = s.alpha[i / s.r.size()];
    in.r = s.r[i % s.r.size()];
    in.phi = s.phi;
    in.tau_R = s.tau_R;
    in.n_max = cfg.numerics.n_max;
    cells[i] = asymptotic_report(in);
  });
  CsvWriter w(cfg, "sweep", {"alpha", "r", "tau_R", "tau", "tau_formula", "r_tilde", "phi_tilde", "tau_i", "tau_ii",
                             "mean_n", "mean_n_formula", "mean_n_ns", "distance", "distance_formula", "distance_ns",
                             "ratio_mean_n", "ratio_distance", "ratio_tau_ii", "ratio_tau_i"});
  w.comment(std::string("time unit ") + time_unit(cfg));
  for (int i = 0; i < count; ++i) {
    const AsymptoticReport& a = cells[i];
    w.row({s.alpha[i / s.r.size()], s.r[i % s.r.size()], s.tau_R, a.tau, a.tau_formula, a.r_tilde, a.phi_tilde,
           a.tau_i, a.tau_ii, a.mean_n, a.mean_n_formula, a.mean_n_ns, a.distance, a.distance_formula, a.distance_ns,
           a.ratio_mean_n, a.ratio_distance, a.ratio_tau_ii, a.ratio_tau_i});
  }
  return {{"sweep.csv", w.str()}};
}

std::vector<OutputFile> cmd_wigner(const RunConfig& cfg, int threads, std::ostream& log) {
  const InputState in = input_state(cfg, log);
  const WignerGrid& g = cfg.wigner;
  WignerValues values{g, std::vector<double>(static_cast<std::size_t>(g.nx) * g.ny)};
  parallel_for(g.ny, threads, [&](int j) {
    for (int i = 0; i < g.nx; ++i) {
      values.values[static_cast<std::size_t>(j) * g.nx + i] = wigner_point(in.state, cplx(g.x(i), g.y(j)));
    }
  });
  CsvWriter w(cfg, "wigner", {"x", "y", "W"});
  w.comment("integral " + format_double(values.integral()));
  for (int j = 0; j < g.ny; ++j)
    for (int i = 0; i < g.nx; ++i) w.row({g.x(i), g.y(j), values.at(i, j)});
  return {{"wigner.csv", w.str()}};
}

}  // namespace

std::vector<OutputFile> run_command(const std::string& command, const RunConfig& cfg, int threads,
                                    std::ostream& log) {
  std::vector<OutputFile> files;
  if (command == "engineer") files = cmd_engineer(cfg, log);
  else if (command == "evolve") files = cmd_evolve(cfg, log);
  else if (command == "decohere") files = cmd_decohere(cfg, log);
  else if (command == "optimize") files = cmd_optimize(cfg, log);
  else if (command == "sweep") files = cmd_sweep(cfg, threads, log);
  else if (command == "wigner") files = cmd_wigner(cfg, threads, log);
  else throw ConfigError("unknown command " + command);
  return finalize_outputs(cfg, command, std::move(files));
}

int run_cli(int argc, char** argv) {
  CLI::App app{"catfield: squeezed Schroedinger-cat states of a driven cavity"};
  std::string command, config_path, out_dir;
  int threads = 1;
  app.add_option("command", command, "Pipeline to run")->required()->check(CLI::IsMember(kCommands));
  app.add_option("--config", config_path, "JSON run configuration")->required();
  app.add_option("--out", out_dir, "Output directory (default $CATFIELD_OUT_DIR or ./catfield_out)");
  app.add_option("--threads", threads, "Worker threads for sweep and wigner")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }
  if (out_dir.empty()) {
    const char* env = std::getenv("CATFIELD_OUT_DIR");
    out_dir = env && *env ? env : "catfield_out";
  }

  try {
    const RunConfig cfg = load_config(config_path);
    const auto files = run_command(command, cfg, threads, std::cerr);
    write_outputs(out_dir, files);
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InfeasibleTarget& e) {
    std::cerr << "infeasible: " << e.what() << " (reachable range [" << format_double(e.envelope_lo()) << ", "
              << format_double(e.envelope_hi()) << "])\n";
    return kInfeasible;
  } catch (const PreconditionError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const InvalidReservoir& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const TruncationError& e) {
    std::cerr << "numerical failure: " << e.what() << " (tail " << format_double(e.tail_mass())
              << "); raise numerics.n_max\n";
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace catfield::cli
