#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "catfield/cli.hpp"

namespace catfield::cli {

using nlohmann::json;

namespace {

class Section {
 public:
  Section(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) throw ConfigError(where_ + " must be an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  double real(const std::string& key, double def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number()) throw ConfigError(path(key) + " must be a number");
    const double x = v->get<double>();
    if (!std::isfinite(x)) throw ConfigError(path(key) + " must be finite");
    return x;
  }

  int integer(const std::string& key, int def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_number_integer()) throw ConfigError(path(key) + " must be an integer");
    return v->get<int>();
  }

  bool flag(const std::string& key, bool def) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(path(key) + " must be true or false");
    return v->get<bool>();
  }

  std::string text(const std::string& key, const std::string& def, const std::set<std::string>& allowed = {}) {
    const json* v = get(key);
    if (!v) return def;
    if (!v->is_string()) throw ConfigError(path(key) + " must be a string");
    std::string s = v->get<std::string>();
    if (!allowed.empty() && !allowed.count(s)) {
      std::string list;
      for (const auto& a : allowed) list += (list.empty() ? "" : ", ") + a;
      throw ConfigError(path(key) + " must be one of: " + list);
    }
    return s;
  }

  // A number or a [re, im] pair.
  cplx complex(const std::string& key, cplx def) {
    const json* v = get(key);
    if (!v) return def;
    if (v->is_number()) return {v->get<double>(), 0.0};
    if (v->is_array() && v->size() == 2 && (*v)[0].is_number() && (*v)[1].is_number()) {
      return {(*v)[0].get<double>(), (*v)[1].get<double>()};
    }
    throw ConfigError(path(key) + " must be a number or a [re, im] pair");
  }

  // A list of numbers or {"start", "stop", "count"}.
  std::vector<double> values(const std::string& key) {
    const json* v = get(key);
    if (!v) return {};
    std::vector<double> out;
    if (v->is_array()) {
      for (const auto& e : *v) {
        if (!e.is_number()) throw ConfigError(path(key) + " entries must be numbers");
        out.push_back(e.get<double>());
      }
      return out;
    }
    if (v->is_object()) {
      Section range(*v, path(key));
      const double start = range.real("start", 0.0);
      const double stop = range.real("stop", start);
      const int count = range.integer("count", 0);
      range.finish();
      if (count < 0) throw ConfigError(path(key) + ".count must be non-negative");
      for (int k = 0; k < count; ++k) out.push_back(count == 1 ? start : start + (stop - start) * k / (count - 1));
      return out;
    }
    throw ConfigError(path(key) + " must be a list or a {start, stop, count} range");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) throw ConfigError("unknown key " + path(it.key()));
    }
  }

 private:
  std::string path(const std::string& key) const { return where_ + "." + key; }

  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json pair(cplx z) { return json::array({z.real(), z.imag()}); }

const json kEmpty = json::object();

const json& section_json(Section& top, const std::string& key) {
  const json* v = top.get(key);
  return v ? *v : kEmpty;
}

void read_drive(const json& j, DriveConfig& d) {
  Section s(j, "drive");
  d.omega = s.real("omega", d.omega);
  d.omega0 = s.real("omega0", d.omega0);
  d.chi = s.real("chi", d.chi);
  d.kappa = s.real("kappa", d.kappa);
  d.eta_slope = s.real("eta_slope", d.eta_slope);
  d.eta_offset = s.real("eta_offset", d.eta_offset);
  d.varkappa = s.real("varkappa", d.varkappa);
  d.varpi_slope = s.real("varpi_slope", d.varpi_slope);
  d.varpi_offset = s.real("varpi_offset", d.varpi_offset);
  d.t0 = s.real("t0", d.t0);
  d.t1 = s.real("t1", d.t1);
  d.t2 = s.real("t2", d.t2);
  d.t_end = s.real("t_end", d.t_end);
  d.frame = s.text("frame", d.frame == Frame::drive ? "drive" : "lab", {"drive", "lab"}) == "drive" ? Frame::drive
                                                                                                   : Frame::lab;
  d.dispersive_valid = s.flag("dispersive_valid", d.dispersive_valid);
  s.finish();
}

void read_protocol(const json& j, ProtocolConfig& p) {
  Section s(j, "protocol");
  p.alpha = s.complex("alpha", p.alpha);
  p.c1 = s.complex("c1", p.c1);
  p.c2 = s.complex("c2", p.c2);
  p.detected_state = s.integer("detected_state", p.detected_state);
  p.target_theta = s.real("target_theta", p.target_theta);
  s.finish();
}

json resolve(const RunConfig& c) {
  const DriveConfig& d = c.drive;
  json out;
  out["mode"] = c.mode;
  out["preset"] = c.preset;
  out["drive"] = {{"omega", d.omega},
                  {"omega0", d.omega0},
                  {"chi", d.chi},
                  {"kappa", d.kappa},
                  {"eta_slope", d.eta_slope},
                  {"eta_offset", d.eta_offset},
                  {"varkappa", d.varkappa},
                  {"varpi_slope", d.varpi_slope},
                  {"varpi_offset", d.varpi_offset},
                  {"t0", d.t0},
                  {"t1", d.t1},
                  {"t2", d.t2},
                  {"t_end", d.t_end},
                  {"frame", d.frame == Frame::drive ? "drive" : "lab"},
                  {"dispersive_valid", d.dispersive_valid}};
  out["protocol"] = {{"alpha", pair(c.protocol.alpha)},
                     {"c1", pair(c.protocol.c1)},
                     {"c2", pair(c.protocol.c2)},
                     {"detected_state", c.protocol.detected_state},
                     {"target_theta", c.protocol.target_theta}};
  out["search"] = {{"enabled", c.search.enabled},
                   {"theta", c.search.theta},
                   {"mean_n", c.search.mean_n},
                   {"tau_max", c.search.tau_max},
                   {"scan_points", c.search.scan_points}};
  out["state"] = {{"kind", c.state.kind}, {"alpha", pair(c.state.alpha)}, {"r", c.state.r},
                  {"phi1", c.state.phi1}, {"phi2", c.state.phi2},         {"sign", c.state.sign},
                  {"path", c.state.path}};
  out["reservoir"] = {{"kind", c.reservoir.kind},     {"tau_R", c.reservoir.tau_R}, {"r_tilde", c.reservoir.r_tilde},
                      {"phi_tilde", c.reservoir.phi_tilde}, {"N", c.reservoir.N},   {"M", pair(c.reservoir.M)},
                      {"case", c.reservoir.which}};
  out["numerics"] = {{"n_max", c.numerics.n_max},
                     {"ode_tol", c.numerics.ode_tol},
                     {"tail_tol", c.numerics.tail_tol},
                     {"master_step", c.numerics.master_step},
                     {"master_horizon", c.numerics.master_horizon},
                     {"master_max_dim", c.numerics.master_max_dim}};
  out["optimize"] = {{"r_max", c.optimize.r_max},
                     {"r_step", c.optimize.r_step},
                     {"phi_points", c.optimize.phi_points},
                     {"rel_tol", c.optimize.rel_tol},
                     {"max_iterations", c.optimize.max_iterations}};
  out["sweep"] = {{"alpha", c.sweep.alpha}, {"r", c.sweep.r}, {"phi", c.sweep.phi}, {"tau_R", c.sweep.tau_R}};
  out["evolve"] = {{"samples", c.evolve_samples}};
  out["wigner"] = {{"x_min", c.wigner.x_min}, {"x_max", c.wigner.x_max}, {"nx", c.wigner.nx},
                   {"y_min", c.wigner.y_min}, {"y_max", c.wigner.y_max}, {"ny", c.wigner.ny}};
  out["outputs"] = {{"prefix", c.prefix}};
  return out;
}

}  // namespace

RunConfig parse_config(const std::string& text, const std::string& base_dir) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  Section top(j, "config");
  c.mode = top.text("mode", c.mode, {"SI", "dimensionless"});
  c.preset = top.text("preset", c.preset, {"none", "headline"});
  if (c.preset == "headline") {
    if (c.mode != "SI") throw ConfigError("the headline preset is given in SI units");
    c.drive = headline_drive();
    c.protocol = headline_protocol();
  }
  read_drive(section_json(top, "drive"), c.drive);
  read_protocol(section_json(top, "protocol"), c.protocol);

  {
    Section s(section_json(top, "search"), "search");
    c.search.enabled = s.flag("enabled", c.search.enabled);
    c.search.theta = s.real("theta", c.search.theta);
    c.search.mean_n = s.real("mean_n", c.search.mean_n);
    c.search.tau_max = s.real("tau_max", c.search.tau_max);
    c.search.scan_points = s.integer("scan_points", c.search.scan_points);
    s.finish();
  }
  {
    Section s(section_json(top, "state"), "state");
    c.state.kind = s.text("kind", c.state.kind, {"engineered", "squeezed_cat", "coherent", "file"});
    c.state.alpha = s.complex("alpha", c.state.alpha);
    c.state.r = s.real("r", c.state.r);
    c.state.phi1 = s.real("phi1", c.state.phi1);
    c.state.phi2 = s.real("phi2", c.state.phi2);
    c.state.sign = s.real("sign", c.state.sign);
    c.state.path = s.text("path", c.state.path);
    s.finish();
    if (c.state.kind == "file" && c.state.path.empty()) throw ConfigError("state.path is required for kind = file");
  }
  {
    Section s(section_json(top, "reservoir"), "reservoir");
    c.reservoir.kind = s.text("kind", c.reservoir.kind, {"squeeze", "general", "optimal", "closed_form"});
    c.reservoir.tau_R = s.real("tau_R", c.reservoir.tau_R);
    c.reservoir.r_tilde = s.real("r_tilde", c.reservoir.r_tilde);
    c.reservoir.phi_tilde = s.real("phi_tilde", c.reservoir.phi_tilde);
    c.reservoir.N = s.real("N", c.reservoir.N);
    c.reservoir.M = s.complex("M", c.reservoir.M);
    c.reservoir.which = s.text("case", c.reservoir.which, {"auto", "A", "B"});
    s.finish();
    if (!(c.reservoir.tau_R > 0.0)) throw ConfigError("reservoir.tau_R must be positive");
  }
  {
    Section s(section_json(top, "numerics"), "numerics");
    c.numerics.n_max = s.integer("n_max", c.numerics.n_max);
    c.numerics.ode_tol = s.real("ode_tol", c.numerics.ode_tol);
    c.numerics.tail_tol = s.real("tail_tol", c.numerics.tail_tol);
    c.numerics.master_step = s.real("master_step", c.numerics.master_step);
    c.numerics.master_horizon = s.real("master_horizon", c.numerics.master_horizon);
    c.numerics.master_max_dim = s.integer("master_max_dim", c.numerics.master_max_dim);
    s.finish();
    if (c.numerics.n_max < 0 || (c.numerics.n_max > 0 && c.numerics.n_max <= kTailLevels)) {
      throw ConfigError("numerics.n_max must be 0 (automatic) or larger than " + std::to_string(kTailLevels));
    }
    if (!(c.numerics.ode_tol > 0.0) || !(c.numerics.tail_tol > 0.0)) {
      throw ConfigError("numerics tolerances must be positive");
    }
    if (c.numerics.master_step < 0.0 || c.numerics.master_horizon < 0.0) {
      throw ConfigError("numerics.master_step and master_horizon must be non-negative");
    }
  }
  {
    Section s(section_json(top, "optimize"), "optimize");
    c.optimize.r_max = s.real("r_max", c.optimize.r_max);
    c.optimize.r_step = s.real("r_step", c.optimize.r_step);
    c.optimize.phi_points = s.integer("phi_points", c.optimize.phi_points);
    c.optimize.rel_tol = s.real("rel_tol", c.optimize.rel_tol);
    c.optimize.max_iterations = s.integer("max_iterations", c.optimize.max_iterations);
    s.finish();
    if (!(c.optimize.r_step > 0.0) || c.optimize.r_max < 0.0 || c.optimize.phi_points < 1) {
      throw ConfigError("optimize grid needs r_step > 0, r_max >= 0, phi_points >= 1");
    }
  }
  const bool has_sweep = top.has("sweep");
  {
    Section s(section_json(top, "sweep"), "sweep");
    c.sweep.alpha = s.values("alpha");
    c.sweep.r = s.values("r");
    c.sweep.phi = s.real("phi", c.sweep.phi);
    c.sweep.tau_R = s.real("tau_R", c.sweep.tau_R);
    s.finish();
    if (has_sweep && (c.sweep.alpha.empty() || c.sweep.r.empty())) throw ConfigError("sweep ranges must not be empty");
  }
  {
    Section s(section_json(top, "evolve"), "evolve");
    c.evolve_samples = s.integer("samples", c.evolve_samples);
    s.finish();
    if (c.evolve_samples < 1) throw ConfigError("evolve.samples must be positive");
  }
  {
    Section s(section_json(top, "wigner"), "wigner");
    c.wigner.x_min = s.real("x_min", c.wigner.x_min);
    c.wigner.x_max = s.real("x_max", c.wigner.x_max);
    c.wigner.nx = s.integer("nx", c.wigner.nx);
    c.wigner.y_min = s.real("y_min", c.wigner.y_min);
    c.wigner.y_max = s.real("y_max", c.wigner.y_max);
    c.wigner.ny = s.integer("ny", c.wigner.ny);
    s.finish();
    if (c.wigner.nx < 1 || c.wigner.ny < 1) throw ConfigError("wigner grid needs nx, ny >= 1");
  }
  {
    Section s(section_json(top, "outputs"), "outputs");
    c.prefix = s.text("prefix", c.prefix);
    s.finish();
    if (c.prefix.find('/') != std::string::npos) throw ConfigError("outputs.prefix must not contain '/'");
  }
  top.finish();

  try {
    c.drive.validate();
    c.protocol.validate();
  } catch (const PreconditionError& e) {
    throw ConfigError(e.what());
  }

  c.resolved = resolve(c);
  c.hash = hex64(fnv1a(c.resolved.dump()));
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  std::string dir = std::filesystem::path(path).parent_path().string();
  return parse_config(ss.str(), dir.empty() ? "." : dir);
}

}  // namespace catfield::cli
