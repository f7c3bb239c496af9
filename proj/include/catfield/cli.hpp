#pragma once

// Command-line front end: run configuration, pipelines and file output.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "catfield/dissipation.hpp"
#include "catfield/reservoir_optimizer.hpp"
#include "catfield/state_engineering.hpp"

namespace catfield::cli {

inline constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kConfigError = 2, kInfeasible = 3, kNumericError = 4 };

struct SearchConfig {
  bool enabled = false;
  double theta = 0.0;
  double mean_n = 0.0;
  double tau_max = 0.0;
  int scan_points = 4000;
};

struct StateConfig {
  std::string kind = "engineered";  // engineered | squeezed_cat | coherent | file
  cplx alpha{std::numbers::sqrt2, 0.0};
  double r = 0.0;
  double phi1 = 0.0;
  double phi2 = 0.0;
  double sign = 1.0;
  std::string path;  // kind = file; relative to the config file
};

struct ReservoirConfig {
  std::string kind = "optimal";  // squeeze | general | optimal | closed_form
  double tau_R = 1.0;
  double r_tilde = 0.0;
  double phi_tilde = 0.0;
  double N = 0.0;
  cplx M;
  std::string which = "auto";  // closed_form case: auto | A | B
};

struct NumericsConfig {
  int n_max = 0;  // 0: automatic
  double ode_tol = 1e-12;
  double tail_tol = kDefaultTailTolerance;
  double master_step = 0.0;     // 0: horizon / 50
  double master_horizon = 0.0;  // 0: derived from the decoherence time
  int master_max_dim = 160;
};

struct SweepConfig {
  std::vector<double> alpha;
  std::vector<double> r;
  double phi = 0.0;
  double tau_R = 1.0;
};

struct RunConfig {
  std::string mode = "SI";  // SI | dimensionless
  std::string preset = "none";
  DriveConfig drive;
  ProtocolConfig protocol;
  SearchConfig search;
  StateConfig state;
  ReservoirConfig reservoir;
  NumericsConfig numerics;
  OptimizeSearch optimize;
  SweepConfig sweep;
  int evolve_samples = 200;
  WignerGrid wigner;
  std::string prefix;
  std::string base_dir = ".";  // directory of the config file

  nlohmann::json resolved;  // every field, defaults included
  std::string hash;         // FNV-1a of the resolved config
};

/// Parse a JSON config; unknown keys and type mismatches throw ConfigError.
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path);

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t v);
/// %.17g, with inf/-inf/nan spelled out.
std::string format_double(double v);

struct OutputFile {
  std::string name;
  std::string content;
};

/// CSV text with provenance comments, a header row and formatted rows.
class CsvWriter {
 public:
  CsvWriter(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& columns);
  void comment(const std::string& line);
  void row(const std::vector<double>& values);
  void raw_row(const std::string& line);
  std::string str() const;

 private:
  std::string head_;
  std::string columns_;
  std::string body_;
};

nlohmann::json provenance(const RunConfig& cfg, const std::string& command);
/// JSON number, or the string "inf"/"-inf"/"nan".
nlohmann::json number(double v);

/// Adds run_record.json and writes all files into `dir` only once everything is ready.
std::vector<OutputFile> finalize_outputs(const RunConfig& cfg, const std::string& command,
                                         std::vector<OutputFile> files);
void write_outputs(const std::string& dir, const std::vector<OutputFile>& files);

/// "n,re,im" lines; '#' lines are skipped.
FockState read_state_file(const std::string& path, double tail_tol = kDefaultTailTolerance);
std::string state_file_text(const RunConfig& cfg, const std::string& command, const FockState& state);

std::vector<OutputFile> run_command(const std::string& command, const RunConfig& cfg, int threads,
                                    std::ostream& log);

/// Full front end; returns the process exit code.
int run_cli(int argc, char** argv);

}  // namespace catfield::cli
