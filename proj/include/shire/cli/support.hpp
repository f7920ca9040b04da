#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "shire/bench/report.hpp"
#include "shire/checkpoint.hpp"
#include "shire/error.hpp"
#include "shire/intuition/net.hpp"
#include "shire/nn.hpp"

#ifndef SHIRE_CONFIG_DIR
#define SHIRE_CONFIG_DIR "configs"
#endif

namespace shire::cli {

/// Process exit codes.
enum ExitCode : int { kOk = 0, kUsage = 1, kConfig = 2, kNumerical = 3, kIo = 4, kInternal = 5 };

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(cur);
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

/// Directories searched for a bare net file name: SHIRE_NET_PATH entries, then the
/// shipped configs directory.
inline std::vector<std::filesystem::path> net_search_path() {
  std::vector<std::filesystem::path> dirs;
  if (const char* env = std::getenv("SHIRE_NET_PATH")) {
    for (const auto& d : split(env, ':')) {
      if (!d.empty()) dirs.emplace_back(d);
    }
  }
  dirs.emplace_back(SHIRE_CONFIG_DIR);
  return dirs;
}

/// A path that exists is used as given; otherwise the name is looked up in the search path.
inline std::filesystem::path resolve_net(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::is_regular_file(name)) return name;
  const fs::path p(name);
  if (!p.has_parent_path()) {
    for (const auto& dir : net_search_path()) {
      for (const fs::path& candidate : {dir / p, dir / fs::path(name + ".net")}) {
        if (fs::is_regular_file(candidate)) return candidate;
      }
    }
  }
  throw IoError("intuition net '" + name + "' not found (searched SHIRE_NET_PATH and " SHIRE_CONFIG_DIR ")");
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// "a=positive,theta=q2" -> {a: positive, theta: q2}.
inline intuition::AbstractAssignment parse_given(const std::string& text) {
  intuition::AbstractAssignment out;
  for (const auto& item : split(text, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == t.size()) {
      throw UsageError("--given expects node=state pairs, got '" + t + "'");
    }
    const std::string node = trim(t.substr(0, eq));
    if (out.count(node)) throw UsageError("--given assigns '" + node + "' twice");
    out[node] = trim(t.substr(eq + 1));
  }
  return out;
}

/// "1,2,3" -> {1, 2, 3}.
inline std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  for (const auto& item : split(text, ',')) {
    const std::string t = trim(item);
    if (t.empty()) continue;
    std::size_t used = 0;
    unsigned long long v = 0;
    try {
      v = std::stoull(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size() || t.front() == '-') throw UsageError("--seeds expects a comma list of integers, got '" + t + "'");
    seeds.push_back(v);
  }
  if (seeds.empty()) throw UsageError("--seeds is empty");
  return seeds;
}

inline std::string timestamp_utc() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

/// Creates a fresh run directory; an existing one is never reused.
inline std::filesystem::path make_run_dir(const std::filesystem::path& root, const std::string& stem) {
  namespace fs = std::filesystem;
  fs::create_directories(root);
  fs::path dir = root / stem;
  for (int k = 1; fs::exists(dir); ++k) dir = root / (stem + "_" + std::to_string(k));
  if (!fs::create_directory(dir)) throw IoError("cannot create run directory '" + dir.string() + "'");
  return dir;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write '" + path.string() + "'");
}

inline constexpr const char* kManifestFile = "manifest.json";
inline constexpr const char* kCurveFile = "curve.csv";
inline constexpr const char* kCheckpointFile = "checkpoint.bin";

/// Writes manifest, learning-curve CSV and final checkpoint into `dir`.
inline void write_run(const std::filesystem::path& dir, const bench::RunReport& report,
                      const nn::ActorCriticParams& params) {
  nlohmann::json manifest = bench::to_json(report);
  manifest["files"] = {{"curve", kCurveFile}, {"checkpoint", kCheckpointFile}};
  write_text(dir / kManifestFile, manifest.dump(2) + "\n");
  std::ostringstream csv;
  bench::write_curve_csv(csv, report.curve);
  write_text(dir / kCurveFile, csv.str());
  save_checkpoint(params, dir / kCheckpointFile);
}

}  // namespace shire::cli
