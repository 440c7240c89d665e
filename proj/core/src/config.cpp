#include "despeckle/config.hpp"

#include <fstream>
#include <sstream>

#include "despeckle/error.hpp"

namespace despeckle {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

const std::map<std::string, std::string>& Config::defaults() {
  // Desk-scale profile; configs/paper.cfg switches to the full-scale run.
  static const std::map<std::string, std::string> kDefaults = {
      {"noise_looks", "4"},
      {"noise_seed", "1"},
      {"realizations", "10"},
      {"model_depth", "5"},
      {"model_channels", "64"},
      {"model_tau_train", "0.1"},
      {"model_tied", "0"},
      {"train_epochs", "5"},
      {"train_batch", "16"},
      {"train_patch_size", "40"},
      {"train_patch_count", "200"},
      {"train_lr", "0.001"},
      {"train_lr_drop_epoch", "31"},
      {"train_lr_after", "0.0001"},
      {"train_seed", "1"},
      {"attack_epsilon", "0.01568627450980392"},
      {"attack_alpha", "0.00392156862745098"},
      {"attack_steps", "10"},
      {"attack_seed", "1"},
      {"attack_random_start", "0"},
      {"infer_tau", "-1"},
      {"hfe_cutoff", "1.5707963267948966"},
      {"workers", "1"},
      {"deterministic", "1"},
  };
  return kDefaults;
}

Config::Config() : values_(defaults()) {}

void Config::set(const std::string& key, const std::string& value) {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  it->second = value;
}

void Config::parse_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    size_t eq = s.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
    set(trim(s.substr(0, eq)), trim(s.substr(eq + 1)));
  }
}

void Config::load_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  parse_text(ss.str());
}

const std::string& Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string& v = get(key);
  size_t pos = 0;
  double out;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not a number");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
  return out;
}

int Config::get_int(const std::string& key) const {
  const std::string& v = get(key);
  size_t pos = 0;
  int out;
  try {
    out = std::stoi(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not an integer");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
  return out;
}

uint64_t Config::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  size_t pos = 0;
  unsigned long long out;
  try {
    out = std::stoull(v, &pos);
  } catch (const std::exception&) {
    throw ConfigError("config key '" + key + "': '" + v + "' is not an unsigned integer");
  }
  if (pos != v.size()) throw ConfigError("config key '" + key + "': trailing characters in '" + v + "'");
  return static_cast<uint64_t>(out);
}

bool Config::get_bool(const std::string& key) const {
  const std::string& v = get(key);
  if (v == "1" || v == "true") return true;
  if (v == "0" || v == "false") return false;
  throw ConfigError("config key '" + key + "': expected 0/1/true/false, got '" + v + "'");
}

std::string Config::dump() const {
  std::string out;
  for (const auto& [k, v] : values_) {
    out += k;
    out += '=';
    out += v;
    out += '\n';
  }
  return out;
}

}  // namespace despeckle
