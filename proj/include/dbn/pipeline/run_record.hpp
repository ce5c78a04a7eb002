#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace dbn::pipeline {

inline constexpr const char* tool_version = "0.1.0";

/// Lowercase hex SHA-256.
std::string sha256_hex(std::span<const unsigned char> bytes);
std::string sha256_file(const std::filesystem::path& path);

/// Plain-text provenance of one command:
///
///   command: train
///   tool_version: 0.1.0
///   config.<key>: <value>            resolved config snapshot
///   duration.<stage>: <seconds>
///   artifact: <relative path> sha256=<hex>
struct RunRecord {
  std::string command;
  std::string config_text;  ///< to_text() of the resolved config
  std::vector<std::pair<std::string, double>> durations;
  std::vector<std::pair<std::string, std::string>> artifacts;  ///< (path relative to base, digest)

  /// Digests `path` and records it relative to `base`.
  void add_artifact(const std::filesystem::path& base, const std::filesystem::path& path);
  std::string text() const;
  /// Writes to a temporary sibling and renames it into place.
  void write_atomic(const std::filesystem::path& path) const;
};

/// Re-digests every artifact of a record file; returns the relative paths
/// whose content no longer matches.
std::vector<std::string> verify_run_record(const std::filesystem::path& record, const std::filesystem::path& base);

}  // namespace dbn::pipeline
