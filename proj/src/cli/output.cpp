#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "catfield/cli.hpp"

namespace catfield::cli {

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t fnv1a(std::string_view data, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char ch : data) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v == 0.0 ? 0.0 : v);
  return buf;
}

json number(double v) {
  if (std::isfinite(v)) return v;
  return format_double(v);
}

json provenance(const RunConfig& cfg, const std::string& command) {
  return {{"tool", "catfield"}, {"version", kVersion}, {"command", command}, {"config_hash", cfg.hash},
          {"mode", cfg.mode}};
}

CsvWriter::CsvWriter(const RunConfig& cfg, const std::string& command, const std::vector<std::string>& columns) {
  head_ = std::string("# catfield ") + kVersion + "\n# command " + command + "\n# config_hash " + cfg.hash +
          "\n# mode " + cfg.mode + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) columns_ += (i ? "," : "") + columns[i];
  if (!columns.empty()) columns_ += "\n";
}

void CsvWriter::comment(const std::string& line) { head_ += "# " + line + "\n"; }

void CsvWriter::row(const std::vector<double>& values) {
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) body_ += ',';
    body_ += format_double(values[i]);
  }
  body_ += '\n';
}

void CsvWriter::raw_row(const std::string& line) { body_ += line + "\n"; }

std::string CsvWriter::str() const { return head_ + columns_ + body_; }

std::vector<OutputFile> finalize_outputs(const RunConfig& cfg, const std::string& command,
                                         std::vector<OutputFile> files) {
  for (auto& f : files) f.name = cfg.prefix + f.name;
  json listing = json::array();
  std::uint64_t h = fnv1a("");
  for (const auto& f : files) {
    listing.push_back({{"name", f.name}, {"fnv1a64", hex64(fnv1a(f.content))}, {"bytes", f.content.size()}});
    h = fnv1a(f.name, h);
    h = fnv1a(f.content, h);
  }
  json record = {{"provenance", provenance(cfg, command)},
                 {"config", cfg.resolved},
                 {"outputs", listing},
                 {"determinism_hash", hex64(h)}};
  files.push_back({cfg.prefix + "run_record.json", record.dump(2) + "\n"});
  return files;
}

void write_outputs(const std::string& dir, const std::vector<OutputFile>& files) {
  fs::create_directories(dir);
  std::vector<fs::path> staged;
  try {
    for (const auto& f : files) {
      const fs::path tmp = fs::path(dir) / (f.name + ".partial");
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << f.content;
      out.close();
      staged.push_back(tmp);
      if (!out) throw Error("cannot write " + tmp.string());
    }
  } catch (...) {
    for (const auto& p : staged) fs::remove(p);
    throw;
  }
  for (std::size_t i = 0; i < files.size(); ++i) fs::rename(staged[i], fs::path(dir) / files[i].name);
}

FockState read_state_file(const std::string& path, double tail_tol) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read state file " + path);
  std::vector<std::pair<int, cplx>> entries;
  int top = -1;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    int n = 0;
    double re = 0.0, im = 0.0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf%c", &n, &re, &im, &tail) != 3 || n < 0) {
      throw ConfigError(path + ":" + std::to_string(line_no) + ": expected n,re,im");
    }
    entries.emplace_back(n, cplx(re, im));
    top = std::max(top, n);
  }
  if (top < 0) throw ConfigError("state file " + path + " has no amplitudes");
  CVector amps = CVector::Zero(top + 1);
  for (const auto& [n, c] : entries) amps[n] = c;
  return FockState(amps, tail_tol);
}

std::string state_file_text(const RunConfig& cfg, const std::string& command, const FockState& state) {
  CsvWriter w(cfg, command, {});
  w.comment("columns n,re,im");
  w.comment("n_max " + std::to_string(state.dim()));
  for (int n = 0; n < state.dim(); ++n) {
    w.raw_row(std::to_string(n) + "," + format_double(state[n].real()) + "," + format_double(state[n].imag()));
  }
  return w.str();
}

}  // namespace catfield::cli
