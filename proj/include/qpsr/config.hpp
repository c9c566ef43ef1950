#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace qpsr {

/// One parsed config value. The grammar is flat `key = value` with numbers,
/// booleans, quoted or bare strings, and bracketed arrays of numbers or
/// strings. `#` starts a comment.
struct ConfigValue {
  enum class Type { number, string, boolean, number_list, string_list };
  Type type = Type::number;
  double num = 0.0;
  bool flag = false;
  std::string str;
  std::vector<double> nums;
  std::vector<std::string> strs;
};

class FlatConfig {
 public:
  static FlatConfig parse_file(const std::string& path);
  static FlatConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  std::vector<std::string> keys() const;

  double number(const std::string& key) const;
  double number_or(const std::string& key, double fallback) const;
  std::int64_t integer(const std::string& key) const;
  std::int64_t integer_or(const std::string& key, std::int64_t fallback) const;
  std::uint64_t uinteger_or(const std::string& key, std::uint64_t fallback) const;
  std::string string(const std::string& key) const;
  std::string string_or(const std::string& key, const std::string& fallback) const;
  bool boolean_or(const std::string& key, bool fallback) const;
  /// A number list; a scalar number is promoted to a single-element list.
  std::vector<double> number_list(const std::string& key) const;
  std::vector<std::string> string_list(const std::string& key) const;

  void set_number(const std::string& key, double v);
  void set_string(const std::string& key, const std::string& v);
  void set_number_list(const std::string& key, const std::vector<double>& v);
  void set_string_list(const std::string& key, const std::vector<std::string>& v);

  /// Sorted `key = value` dump; stable input for hashing and sidecars.
  std::string canonical() const;

 private:
  const ConfigValue& at(const std::string& key) const;
  std::map<std::string, ConfigValue> values_;
};

/// FNV-1a over a string, used for config hashes.
std::uint64_t fnv1a(const std::string& text);

}  // namespace qpsr
