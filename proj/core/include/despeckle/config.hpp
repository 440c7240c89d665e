#pragma once

#include <cstdint>
#include <map>
#include <string>

namespace despeckle {

/// Flat key=value configuration with full defaults and strict unknown-key
/// rejection. Values are kept as strings; typed getters parse on demand.
/// dump() emits sorted "key=value" lines that parse back to the same map.
class Config {
public:
  Config();  // all defaults

  static const std::map<std::string, std::string>& defaults();

  /// Parses "key=value" lines ('#' starts a comment, blank lines ignored).
  void parse_text(const std::string& text);
  void load_file(const std::string& path);

  void set(const std::string& key, const std::string& value);

  const std::string& get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  uint64_t get_u64(const std::string& key) const;
  bool get_bool(const std::string& key) const;

  std::string dump() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

private:
  std::map<std::string, std::string> values_;
};

}  // namespace despeckle
