#pragma once

#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace mfm {

/// A value in a key-value config file: number, string, boolean, or a list of
/// numbers or strings.
using ConfigValue = std::variant<double, std::string, bool, std::vector<double>, std::vector<std::string>>;

/// Flat `dotted.key = value` configuration.
///
/// One assignment per line; `#` starts a comment outside quotes. Strings are
/// double-quoted, lists are bracketed and comma-separated. Every key must be
/// read through one of the typed getters before `check_all_used`, which
/// rejects anything left over as an unknown key.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text, const std::string& source = "<string>");
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  long integer_or(const std::string& key, long fallback) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<std::string> strings(const std::string& key) const;
  /// True when the key holds a string (used for "empirical" vs numeric settings).
  bool is_string(const std::string& key) const;

  void set(const std::string& key, ConfigValue value) { values_[key] = std::move(value); }
  void check_all_used() const;
  const std::string& source() const { return source_; }

 private:
  const ConfigValue& get(const std::string& key) const;

  std::string source_;
  std::map<std::string, ConfigValue> values_;
  std::map<std::string, long> lines_;
  mutable std::set<std::string> used_;
};

}  // namespace mfm
