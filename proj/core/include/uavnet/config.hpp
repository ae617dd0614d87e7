#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace uavnet {

// Flat `key = value` text config. Lines starting with '#' (or empty) are
// ignored. Keys are dotted lowercase (channel.tx_power_dbm, env.lane_count,
// train.lr, ...). The same format is used for scenario configs and for run
// manifests, so a manifest can be fed back as a config for exact re-runs.
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load_file(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double get_double(const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& key, std::int64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, std::int64_t value);
  void set_bool(const std::string& key, bool value);
  void set_string(const std::string& key, const std::string& value);

  // Keys present in the file but never read by any get_* call. A non-empty
  // result after loading every section means a typo'd or unknown key.
  std::vector<std::string> unconsumed() const;

  // Sorted `key = value` lines; doubles are written with %.17g so a
  // serialize/parse round trip is value-exact.
  std::string serialize() const;
  void save_file(const std::string& path) const;

 private:
  std::map<std::string, std::string> values_;
  mutable std::set<std::string> consumed_;
};

// %.17g formatting used for all numeric text output (configs, metrics,
// traces); round-trips doubles exactly.
std::string format_double(double v);

}  // namespace uavnet
