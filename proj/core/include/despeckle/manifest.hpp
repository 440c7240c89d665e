#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace despeckle {

/// FNV-1a 64-bit content hash (manifest bookkeeping, not cryptographic).
uint64_t fnv1a64(const void* data, size_t len);
std::string hash_bytes(const void* data, size_t len);  // "fnv1a64:<16 hex>"
std::string hash_file(const std::string& path);

/// Writes bytes to path via a temp file and rename, so readers never observe
/// partial output.
void write_file_atomic(const std::string& path, const std::string& bytes);

/// One metrics row in a manifest or .jsonl stream: a name plus whatever
/// values the command produced (infinities serialized as the string "inf").
struct MetricsRow {
  std::string name;
  std::vector<std::pair<std::string, double>> values;
};

/// Reproducibility record written by every harness command.
struct RunManifest {
  std::string command;
  std::map<std::string, std::string> config_snapshot;
  std::map<std::string, uint64_t> seeds;
  std::map<std::string, std::string> input_hashes;
  std::string checkpoint_hash;  // empty when not applicable
  std::map<std::string, std::string> output_hashes;
  std::vector<MetricsRow> metrics;

  /// Serializes to JSON (sorted keys) with a UTC ISO-8601 timestamp and
  /// writes atomically.
  void write(const std::string& path) const;
};

std::string metrics_rows_to_jsonl(const std::vector<MetricsRow>& rows);

}  // namespace despeckle
