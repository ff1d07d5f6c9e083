#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lsctl/profiles.hpp"

namespace lsctl {

inline constexpr const char* kVersion = "0.1.0";

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
/// 16 lowercase hex digits.
std::string hex64(std::uint64_t v);

/// Hash of the canonical (sorted-key, compact) JSON dump.
std::string config_hash(const json& config);

struct RunManifest {
  std::string command;
  json config = json::object();   ///< resolved configuration
  json sources = json::object();  ///< where each key came from: flag, config or default
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> outputs;

  /// Everything but the timestamp is a function of the inputs.
  json to_json(bool with_timestamp = true) const;
  void write(const std::string& path) const;
};

}  // namespace lsctl
