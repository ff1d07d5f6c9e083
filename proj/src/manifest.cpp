#include "lsctl/manifest.hpp"

#include <chrono>
#include <cstdio>
#include <ctime>
#include <fstream>

namespace lsctl {

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string config_hash(const json& config) { return hex64(fnv1a64(config.dump())); }

json RunManifest::to_json(bool with_timestamp) const {
  json j{{"tool", "lsctl"},
         {"version", kVersion},
         {"command", command},
         {"config", config},
         {"config_hash", config_hash(config)},
         {"config_sources", sources},
         {"precedence", "flags > config file > defaults"},
         {"seeds", seeds},
         {"outputs", outputs},
         {"versions",
          {{"lsctl", kVersion},
           {"compiler", __VERSION__},
           {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                 std::to_string(NLOHMANN_JSON_VERSION_PATCH)}}}};
  if (with_timestamp) {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    j["created"] = buf;
  }
  return j;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << to_json().dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace lsctl
