#pragma once

// Flat key=value run configuration. One key per line, '#' starts a comment,
// unknown keys are rejected. Every key has a documented default (see
// config_schema()).

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pol/imaging.hpp"
#include "pol/training.hpp"

namespace pol {

inline constexpr const char* kVersion = "0.1.0";

struct ConfigKey {
  std::string key;
  std::string type;  // int, double, bool, string, or alternatives "a|b|c"
  std::string default_value;
  std::string doc;
};

const std::vector<ConfigKey>& config_schema();

class RunConfig {
 public:
  RunConfig();

  static RunConfig parse(const std::string& text, const std::string& origin = "<config>");
  static RunConfig load(const std::filesystem::path& path);

  // Rejects unknown keys and values that do not parse for the key's type.
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool is_set_explicitly(const std::string& key) const { return explicit_.count(key) > 0; }

  // Canonical text: every key in schema order, effective values.
  std::string to_text() const;
  const std::map<std::string, std::string>& values() const { return values_; }
  // FNV-1a 64 of to_text().
  std::uint64_t hash() const;
  std::string hash_hex() const;

  ModelConfig model() const;
  TrainConfig train() const;
  PretrainConfig pretrain() const;
  DegradationSpec degradation() const;
  std::uint64_t seed() const;

  long long get_int(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

std::uint64_t fnv1a64(const std::string& text);

}  // namespace pol
