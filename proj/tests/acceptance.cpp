// One PASS/FAIL line per acceptance criterion; nonzero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

#include <unistd.h>

#include "catfield/cli.hpp"

using namespace catfield;
using std::numbers::pi;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

double angle_gap(double a, double b) { return std::abs(wrap_angle(a - b)); }

DriveConfig resonant_cfg(double kappa, double t_end) {
  DriveConfig c;
  c.omega = 1.3;
  c.eta_slope = -2.0 * c.omega;
  c.eta_offset = 0.25;
  c.kappa = kappa;
  c.t1 = c.t2 = c.t_end = t_end;
  return c;
}

DriveConfig small_cfg() {
  DriveConfig c;
  c.omega = 1.0;
  c.omega0 = 0.8;
  c.chi = 1.0;
  c.kappa = 0.05;
  c.eta_slope = -2.0;
  c.eta_offset = pi / 2;
  c.varkappa = 0.03;
  c.varpi_slope = -1.0;
  c.varpi_offset = 0.3;
  c.t1 = 5.0;
  c.t2 = 5.0 + 13.0 * pi / 4.0;
  c.t_end = c.t2 + 5.0;
  return c;
}

Outcome characteristic_equivalence() {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> k(0.01, 0.2), r0(0.0, 1.5), d0(-pi, pi), uu(0.1, 8.0);
  double worst_x = 0.0, worst_c = 0.0;
  for (int n = 0; n < 50; ++n) {
    const double kappa = k(rng), ri = r0(rng), di = d0(rng), u = uu(rng);
    const DriveConfig c = resonant_cfg(kappa, 1e4);
    const double phi_i = di + c.eta_at(0.0);
    std::vector<double> times;
    for (int j = 1; j <= 8; ++j) times.push_back(u / (4.0 * kappa) * j / 8.0);
    const auto traj = integrate_characteristic(c, Branch::one, {0.0, ri, phi_i}, times);
    const double ci = resonant_constant(ri, di);
    for (const auto& s : traj.samples) {
      const SqueezeSample a = resonant_solution(c, ri, phi_i, 0.0, s.t);
      worst_x = std::max(worst_x, std::abs(std::cosh(2 * a.r) / std::cosh(2 * s.r) - 1.0));
      worst_c = std::max(worst_c, std::abs(resonant_constant(s.r, s.delta) - ci) / std::max(1.0, std::abs(ci)));
    }
  }
  Outcome o;
  o.require(worst_x < 1e-8, "cosh 2r rel. error " + fmt(worst_x) + " < 1e-8");
  o.require(worst_c < 1e-9, "C_i drift " + fmt(worst_c) + " < 1e-9");
  return o;
}

Outcome weak_coupling() {
  double worst_x = 0.0, worst_c = 0.0, worst_d = 0.0;
  for (double p : {0.05, 0.1, 0.5}) {
    for (Branch b : {Branch::one, Branch::two}) {
      const double chi = 1.0, kappa = 0.5 * p * chi;
      DriveConfig c = resonant_cfg(kappa, 1e4);
      c.chi = chi;
      c.t1 = 0.0;
      for (double d1 : {-pi / 2, 0.4, 2.5}) {
        const double phi1 = d1 + c.eta_at(0.0);
        const WeakCouplingSolution w(c, b, 0.5, phi1, 0.0);
        std::vector<double> times;
        for (int j = 1; j <= 60; ++j) times.push_back(1.2 * w.period() * j / 60.0);
        const auto traj = integrate_characteristic(c, b, {0.0, 0.5, phi1}, times);
        for (const auto& s : traj.samples) {
          const SqueezeSample a = w.at(s.t);
          worst_x = std::max(worst_x, std::abs(std::cosh(2 * a.r) / std::cosh(2 * s.r) - 1.0));
          worst_d = std::max(worst_d, angle_gap(a.delta, s.delta));
          worst_c = std::max(worst_c, std::abs(dispersive_constant(w.p_ell(), s.r, s.delta) / w.constant() - 1.0));
        }
      }
    }
  }
  Outcome o;
  o.require(worst_x < 1e-6, "cosh 2r rel. error " + fmt(worst_x) + " < 1e-6");
  o.require(worst_c < 1e-9, "C_1 drift " + fmt(worst_c) + " < 1e-9");
  o.require(worst_d < 1e-6, "phase error " + fmt(worst_d) + " rad < 1e-6");
  return o;
}

Outcome pipeline_vs_oracle() {
  const DriveConfig c = small_cfg();
  const int n = 128;
  ProtocolConfig p;
  p.alpha = std::numbers::sqrt2;
  const FockState start = coherent_state(p.alpha, n);
  double worst = 1.0, r_t2 = 0.0;
  for (Branch b : {Branch::one, Branch::two}) {
    const auto ev = evolve_branch(c, b, {c.t0, c.t2, c.t_end});
    r_t2 = std::max(r_t2, ev.at(c.t2).r);
    const auto oracle = schrodinger_oracle(c, b, start, c.t0, {c.t2, c.t_end});
    worst = std::min(worst, compose_evolution(ev, c.t0, c.t2).apply(start).fidelity(oracle[0]));
    worst = std::min(worst, compose_evolution(ev, c.t0, c.t_end).apply(start).fidelity(oracle[1]));
  }
  for (int det : {1, 2}) {
    p.detected_state = det;
    PrepareOptions o;
    o.n_max = n;
    worst = std::min(worst, prepare_cat(c, p, o).state.fidelity(atom_field_oracle(c, p, n)));
  }
  Outcome o;
  o.require(r_t2 <= 1.2, "r(t2) = " + fmt(r_t2) + " <= 1.2");
  o.require(worst >= 1 - 1e-6, "worst fidelity 1 - " + fmt(1 - worst) + " >= 1 - 1e-6");
  return o;
}

Outcome decoherence_consistency() {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> ua(0.5, 1.5), ur(0.0, 0.8), uphi(0.0, 2 * pi), utau(0.5, 2.0),
      urt(0.0, 1.5), coin(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10; ++k) {
    const double alpha = ua(rng), r = ur(rng), phi1 = uphi(rng), phi2 = uphi(rng);
    const double sign = coin(rng) < 0.5 ? 1.0 : -1.0;
    const FockState s = squeezed_cat(std::polar(alpha, uphi(rng)), r, phi1, phi2, sign, 128);
    const double tau_R = utau(rng);
    ReservoirParams res;
    if (k % 3 == 2) {
      const double N = urt(rng);
      res = ReservoirParams::from_general(tau_R, N, std::polar(0.9 * std::sqrt(N * (N + 1)), uphi(rng)));
    } else {
      res = ReservoirParams::from_squeeze(tau_R, urt(rng), uphi(rng));
    }
    const auto a = decoherence_time_analytic(moments(s), res);
    const auto n = decoherence_time_numeric(DensityMatrix::pure(s), res);
    worst = std::max(worst, std::abs(n.tau - a.tau) / a.tau);
  }
  Outcome o;
  o.require(worst < 1e-4, "worst relative deviation " + fmt(worst) + " < 1e-4");
  return o;
}

Outcome reservoir_optimum() {
  Outcome o;
  for (auto [alpha, r] : {std::pair{std::numbers::sqrt2, 1.5}, std::pair{2.0, 1.0}, std::pair{2.0, 2.0}}) {
    const int n = auto_n_max(alpha, r);
    const Moments aligned = moments(squeezed_cat(alpha, r, 0.0, 0.0, 1.0, n));
    auto best = maximize_tau(aligned, 1.0);
    const auto closed = optimal_reservoir_closed_form(alpha, r, ReservoirCase::A);
    compare_with_closed_form(best, closed);
    const double rel = std::abs(best.closed_form_r_residual) / closed.r_tilde;
    const std::string tag = "(alpha " + fmt(alpha) + ", r " + fmt(r) + ")";
    o.require(rel < 0.01, tag + " r_tilde " + fmt(best.r_tilde_opt) + " vs " + fmt(closed.r_tilde) + " rel " +
                              fmt(rel) + " < 1%");
    o.require(std::abs(best.closed_form_phi_residual) < 1e-2,
              tag + " phi_tilde off by " + fmt(std::abs(best.closed_form_phi_residual)) + " < 1e-2");
    const Moments crossed = moments(squeezed_cat(alpha, r, pi / 4, -pi / 4, 1.0, n));
    const double tau_cross = maximize_tau(crossed, 1.0).tau_opt;
    o.require(tau_cross < best.tau_opt, tag + " Theta=pi/2 max tau " + fmt(tau_cross) + " < " + fmt(best.tau_opt));
  }
  return o;
}

Outcome headline() {
  Outcome o;
  const CatResult cat = prepare_cat(headline_drive(), headline_protocol());
  for (int b = 0; b < 2; ++b) {
    const double r = cat.at_t2[b].r;
    o.require(std::abs(r - 2.0) <= 0.2, "branch " + std::to_string(b + 1) + " r = " + fmt(r) + " in 2 +- 10%");
  }
  o.require(cat.mean_n >= 50 && cat.mean_n <= 200, "<n> = " + fmt(cat.mean_n) + " in [50, 200]");
  const double alpha = std::abs(headline_protocol().alpha);
  const double tau = maximize_tau(moments(cat.state), 1.0).tau_opt;
  o.require(std::abs(tau * alpha - 1.0) <= 0.1,
            "optimal-bath tau = " + fmt(tau) + " tau_R vs tau_R/alpha = " + fmt(1.0 / alpha) + " within 10%");
  double lo = INFINITY, hi = 0.0;
  for (double r : {1.0, 1.25, 1.5, 1.75, 2.0}) {
    AsymptoticInputs in;
    in.alpha = alpha;
    in.r = r;
    const double t = maximize_tau(moments(squeezed_cat(alpha, r, 0.0, 0.0, 1.0, auto_n_max(alpha, r))), 1.0).tau_opt;
    lo = std::min(lo, t);
    hi = std::max(hi, t);
  }
  o.require((hi - lo) / lo < 0.1, "tau spread over r in [1, 2] " + fmt((hi - lo) / lo) + " < 10%");
  return o;
}

Outcome baselines() {
  Outcome o;
  for (double alpha : {std::numbers::sqrt2, 2.0}) {
    AsymptoticInputs in;
    in.alpha = alpha;
    in.r = 2.0;
    const AsymptoticReport a = asymptotic_report(in);
    const std::string tag = "alpha " + fmt(alpha) + ", r 2: ";
    o.require(std::abs(a.ratio_tau_ii / alpha - 1.0) <= 0.15,
              tag + "tau/tau_ii = " + fmt(a.ratio_tau_ii) + " vs alpha within 15%");
    const double e2r = std::exp(2 * in.r), er = std::exp(in.r);
    o.require(std::abs(a.ratio_mean_n / e2r - 1.0) <= 1e-3,
              tag + "<n>/<n>_NS = " + fmt(a.ratio_mean_n) + " vs e^2r = " + fmt(e2r) + " within 1e-3");
    o.require(std::abs(a.ratio_distance / er - 1.0) <= 1e-3,
              tag + "D/D_NS = " + fmt(a.ratio_distance) + " vs e^r = " + fmt(er) + " within 1e-3");
  }
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome properties() {
  Outcome o;
  {
    DriveConfig c = small_cfg();
    const auto ev = evolve_branch(c, Branch::two, {c.t0, c.t_end});
    const CMatrix u = compose_evolution(ev, c.t0, c.t_end).matrix(40);
    const double err = (u.adjoint() * u - CMatrix::Identity(40, 40)).cwiseAbs().maxCoeff();
    o.require(err < 1e-9, "unitarity " + fmt(err));
  }
  {
    const FockState cat = squeezed_cat(1.5, 0.3, 0.0, 0.0, 1.0, 48);
    MasterOptions mo;
    mo.keep_snapshots = true;
    const auto traj = evolve_master(DensityMatrix::pure(cat), ReservoirParams::from_squeeze(1.0, 0.4, 0.5), 0.5, 5, mo);
    double tr = 0.0, herm = 0.0, neg = 0.0;
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
      tr = std::max(tr, std::abs(traj.trace[k] - 1.0));
      neg = std::min(neg, traj.min_eigenvalue[k]);
      const CMatrix& r = traj.snapshots[k].elements();
      herm = std::max(herm, (r - r.adjoint()).cwiseAbs().maxCoeff());
    }
    o.require(tr < 1e-9, "trace drift " + fmt(tr));
    o.require(herm < 1e-12, "Hermiticity " + fmt(herm));
    o.require(neg > -1e-8, "min eigenvalue " + fmt(neg));
  }
  {
    WignerGrid g{-7.0, 7.0, 141, -4.0, 4.0, 81};
    const double integral = wigner(squeezed_cat(2.0, 0.3, 0.0, 0.0, 1.0, 96), g).integral();
    o.require(std::abs(integral - 1.0) < 1e-3, "Wigner integral " + fmt(integral));
  }
  {
    DriveConfig c = resonant_cfg(0.1, 10.0);
    c.chi = 1.0;
    c.t1 = 2.0;
    c.t2 = 6.0;
    const auto fwd = integrate_characteristic(c, Branch::one, {0.0, 0.3, 0.9}, {10.0});
    const auto& e = fwd.samples[0];
    const auto back = integrate_characteristic(c, Branch::one, {10.0, e.r, e.phi}, {0.0});
    const double err = std::max(std::abs(back.samples[0].r - 0.3), angle_gap(back.samples[0].phi, 0.9));
    o.require(err < 1e-8, "time reversal " + fmt(err));
  }
  {
    namespace fs = std::filesystem;
    const fs::path dir = fs::temp_directory_path() / ("catfield_acceptance_" + std::to_string(::getpid()));
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::ofstream(dir / "sweep.json")
        << R"({"mode": "dimensionless", "sweep": {"alpha": [1.4142135623730951], "r": [0.5, 1.0]}})";
    std::string hashes[2];
    for (int k = 0; k < 2; ++k) {
      std::string a0 = "catfield", a1 = "sweep", a2 = "--config", a3 = (dir / "sweep.json").string(), a4 = "--out",
                  a5 = (dir / ("run" + std::to_string(k))).string();
      char* argv[] = {a0.data(), a1.data(), a2.data(), a3.data(), a4.data(), a5.data()};
      if (cli::run_cli(6, argv) != cli::kOk) break;
      const auto record = nlohmann::json::parse(slurp(dir / ("run" + std::to_string(k)) / "run_record.json"));
      hashes[k] = record["determinism_hash"].get<std::string>();
    }
    o.require(!hashes[0].empty() && hashes[0] == hashes[1], "determinism hash " + hashes[0] + " == " + hashes[1]);
    fs::remove_all(dir);
  }
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"characteristic-equation equivalence", characteristic_equivalence},
      {"dispersive weak coupling", weak_coupling},
      {"pipeline vs oracle", pipeline_vs_oracle},
      {"decoherence-time consistency", decoherence_consistency},
      {"reservoir optimum", reservoir_optimum},
      {"headline numbers", headline},
      {"baseline ratios", baselines},
      {"property suites", properties},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("threw: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("CRITERION %zu %s: %s [%.1f s] %s\n", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first, secs,
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass) ++failed;
  }
  return failed == 0 ? 0 : 1;
}
