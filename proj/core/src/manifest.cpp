#include "despeckle/manifest.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "despeckle/error.hpp"

namespace despeckle {

namespace {

using nlohmann::json;

std::string utc_now_iso8601() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

json metric_value(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  return v;
}

json row_to_json(const MetricsRow& row) {
  json j;
  j["name"] = row.name;
  for (const auto& [k, v] : row.values) j[k] = metric_value(v);
  return j;
}

}  // namespace

uint64_t fnv1a64(const void* data, size_t len) {
  const auto* p = static_cast<const unsigned char*>(data);
  uint64_t h = 0xCBF29CE484222325ULL;
  for (size_t i = 0; i < len; ++i) {
    h ^= p[i];
    h *= 0x100000001B3ULL;
  }
  return h;
}

std::string hash_bytes(const void* data, size_t len) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "fnv1a64:%016llx", static_cast<unsigned long long>(fnv1a64(data, len)));
  return buf;
}

std::string hash_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("hash_file: cannot open " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return hash_bytes(bytes.data(), bytes.size());
}

void write_file_atomic(const std::string& path, const std::string& bytes) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("write_file_atomic: cannot open " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write_file_atomic: short write to " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

void RunManifest::write(const std::string& path) const {
  json j;
  j["command"] = command;
  j["config"] = config_snapshot;
  j["seeds"] = seeds;
  j["input_hashes"] = input_hashes;
  if (!checkpoint_hash.empty()) j["checkpoint_hash"] = checkpoint_hash;
  j["outputs"] = output_hashes;
  if (!metrics.empty()) {
    json rows = json::array();
    for (const auto& row : metrics) rows.push_back(row_to_json(row));
    j["metrics"] = rows;
  }
  j["timestamp"] = utc_now_iso8601();
  write_file_atomic(path, j.dump(2) + "\n");
}

std::string metrics_rows_to_jsonl(const std::vector<MetricsRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += row_to_json(row).dump();
    out += '\n';
  }
  return out;
}

}  // namespace despeckle
