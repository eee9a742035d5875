#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gamplab/io.hpp"

namespace gamplab::harness {

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(const std::string& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

struct RunSummary {
  std::string label;
  std::string outcome;
  long iterations = 0;
};

struct RunManifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string version = kVersion;
  std::vector<RunSummary> runs;
  double wall_clock_seconds = 0.0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["command"] = command;
    j["config_hash"] = config_hash;
    j["seed"] = seed;
    j["version"] = version;
    j["wall_clock_seconds"] = wall_clock_seconds;
    auto& arr = j["runs"] = nlohmann::json::array();
    for (const auto& r : runs) arr.push_back({{"label", r.label}, {"outcome", r.outcome}, {"iterations", r.iterations}});
    return j;
  }

  void write(const std::string& path) const {
    std::ofstream os(path);
    if (!os) throw IoError("cannot open '" + path + "' for writing");
    os << to_json().dump(2) << '\n';
  }
};

}  // namespace gamplab::harness
