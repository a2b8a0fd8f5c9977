#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "regionlift/bow.hpp"
#include "regionlift/config.hpp"
#include "regionlift/svm.hpp"

namespace regionlift {

/// Everything a run needs besides its inputs.
struct ModelBundle {
  RunConfig config;
  std::optional<BowEncoding> encoding;
  std::map<int, LinearScorer> classifiers;
  std::map<int, SvmModel> rescorers;
  /// Categories whose rescorer could not be trained (a single label in the
  /// training set); they fall back to simple fusion.
  std::set<int> rescore_skipped;
};

inline constexpr std::uint32_t kModelVersion = 1;

/// Container layout (little endian):
///   "RGNLIFT\0"  u32 version  u32 section count
///   per section: 4-byte tag, u64 payload length, payload
///   u64 FNV-1a hash of every preceding byte
/// Doubles are stored as their IEEE-754 bit patterns.
std::string serialize_model(const ModelBundle& bundle);

/// Throws std::runtime_error on a bad magic, version, checksum or truncation.
ModelBundle deserialize_model(const std::string& bytes);

void save_model(const ModelBundle& bundle, const std::filesystem::path& path);
ModelBundle load_model(const std::filesystem::path& path);

}  // namespace regionlift
