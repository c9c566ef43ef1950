#include "qpsr/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace qpsr {

namespace {

std::string trim(const std::string& s) {
  size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

std::string strip_comment(const std::string& line) {
  bool in_quote = false;
  for (size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') in_quote = !in_quote;
    if (line[i] == '#' && !in_quote) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& token, double& out) {
  try {
    size_t idx = 0;
    out = std::stod(token, &idx);
    return idx == token.size();
  } catch (...) {
    return false;
  }
}

ConfigValue parse_scalar(const std::string& token, int line_no) {
  ConfigValue v;
  if (token.size() >= 2 && token.front() == '"' && token.back() == '"') {
    v.type = ConfigValue::Type::string;
    v.str = token.substr(1, token.size() - 2);
    return v;
  }
  if (token == "true" || token == "false") {
    v.type = ConfigValue::Type::boolean;
    v.flag = token == "true";
    return v;
  }
  double num = 0.0;
  if (parse_number(token, num)) {
    v.type = ConfigValue::Type::number;
    v.num = num;
    return v;
  }
  if (!token.empty() && (std::isalpha(static_cast<unsigned char>(token.front())) || token.front() == '_')) {
    v.type = ConfigValue::Type::string;  // bare word
    v.str = token;
    return v;
  }
  throw std::invalid_argument("config line " + std::to_string(line_no) +
                              ": cannot parse value '" + token + "'");
}

std::vector<std::string> split_array(const std::string& body, int line_no) {
  std::vector<std::string> items;
  std::string current;
  bool in_quote = false;
  for (char c : body) {
    if (c == '"') in_quote = !in_quote;
    if (c == ',' && !in_quote) {
      items.push_back(trim(current));
      current.clear();
    } else {
      current += c;
    }
  }
  const std::string last = trim(current);
  if (!last.empty()) items.push_back(last);
  for (const auto& item : items) {
    if (item.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": empty array element");
    }
  }
  return items;
}

std::string format_number(double v) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

FlatConfig FlatConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str());
}

FlatConfig FlatConfig::parse_string(const std::string& text) {
  FlatConfig config;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line = trim(strip_comment(line));
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
    }
    for (char c : key) {
      if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '.') {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": bad key '" + key + "'");
      }
    }
    if (config.values_.count(key)) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": duplicate key '" + key + "'");
    }
    if (value.empty()) {
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": missing value for '" + key + "'");
    }
    ConfigValue parsed;
    if (value.front() == '[') {
      if (value.back() != ']') {
        throw std::invalid_argument("config line " + std::to_string(line_no) +
                                    ": unterminated array");
      }
      const auto items = split_array(value.substr(1, value.size() - 2), line_no);
      bool numeric = !items.empty();
      std::vector<double> nums;
      for (const auto& item : items) {
        double num = 0.0;
        if (parse_number(item, num)) {
          nums.push_back(num);
        } else {
          numeric = false;
          break;
        }
      }
      if (numeric) {
        parsed.type = ConfigValue::Type::number_list;
        parsed.nums = std::move(nums);
      } else {
        parsed.type = ConfigValue::Type::string_list;
        for (const auto& item : items) {
          const ConfigValue scalar = parse_scalar(item, line_no);
          parsed.strs.push_back(scalar.type == ConfigValue::Type::string
                                    ? scalar.str
                                    : item);
        }
      }
    } else {
      parsed = parse_scalar(value, line_no);
    }
    config.values_.emplace(key, std::move(parsed));
  }
  return config;
}

bool FlatConfig::has(const std::string& key) const { return values_.count(key) > 0; }

std::vector<std::string> FlatConfig::keys() const {
  std::vector<std::string> out;
  out.reserve(values_.size());
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

const ConfigValue& FlatConfig::at(const std::string& key) const {
  const auto it = values_.find(key);
  if (it == values_.end()) {
    throw std::invalid_argument("config field '" + key + "': missing");
  }
  return it->second;
}

double FlatConfig::number(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.type != ConfigValue::Type::number) {
    throw std::invalid_argument("config field '" + key + "': expected a number");
  }
  return v.num;
}

double FlatConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t FlatConfig::integer(const std::string& key) const {
  const double v = number(key);
  const double rounded = std::nearbyint(v);
  if (std::abs(v - rounded) > 1e-9) {
    throw std::invalid_argument("config field '" + key + "': expected an integer");
  }
  return static_cast<std::int64_t>(rounded);
}

std::int64_t FlatConfig::integer_or(const std::string& key, std::int64_t fallback) const {
  return has(key) ? integer(key) : fallback;
}

std::uint64_t FlatConfig::uinteger_or(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::int64_t v = integer(key);
  if (v < 0) {
    throw std::invalid_argument("config field '" + key + "': expected a non-negative integer");
  }
  return static_cast<std::uint64_t>(v);
}

std::string FlatConfig::string(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.type != ConfigValue::Type::string) {
    throw std::invalid_argument("config field '" + key + "': expected a string");
  }
  return v.str;
}

std::string FlatConfig::string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

bool FlatConfig::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const ConfigValue& v = at(key);
  if (v.type != ConfigValue::Type::boolean) {
    throw std::invalid_argument("config field '" + key + "': expected true/false");
  }
  return v.flag;
}

std::vector<double> FlatConfig::number_list(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.type == ConfigValue::Type::number) return {v.num};
  if (v.type != ConfigValue::Type::number_list) {
    throw std::invalid_argument("config field '" + key + "': expected a number list");
  }
  return v.nums;
}

std::vector<std::string> FlatConfig::string_list(const std::string& key) const {
  const ConfigValue& v = at(key);
  if (v.type == ConfigValue::Type::string) return {v.str};
  if (v.type != ConfigValue::Type::string_list) {
    throw std::invalid_argument("config field '" + key + "': expected a string list");
  }
  return v.strs;
}

void FlatConfig::set_number(const std::string& key, double v) {
  ConfigValue cv;
  cv.type = ConfigValue::Type::number;
  cv.num = v;
  values_[key] = std::move(cv);
}

void FlatConfig::set_string(const std::string& key, const std::string& v) {
  ConfigValue cv;
  cv.type = ConfigValue::Type::string;
  cv.str = v;
  values_[key] = std::move(cv);
}

void FlatConfig::set_number_list(const std::string& key, const std::vector<double>& v) {
  ConfigValue cv;
  cv.type = ConfigValue::Type::number_list;
  cv.nums = v;
  values_[key] = std::move(cv);
}

void FlatConfig::set_string_list(const std::string& key, const std::vector<std::string>& v) {
  ConfigValue cv;
  cv.type = ConfigValue::Type::string_list;
  cv.strs = v;
  values_[key] = std::move(cv);
}

std::string FlatConfig::canonical() const {
  std::ostringstream out;
  for (const auto& [key, v] : values_) {
    out << key << " = ";
    switch (v.type) {
      case ConfigValue::Type::number:
        out << format_number(v.num);
        break;
      case ConfigValue::Type::boolean:
        out << (v.flag ? "true" : "false");
        break;
      case ConfigValue::Type::string:
        out << '"' << v.str << '"';
        break;
      case ConfigValue::Type::number_list: {
        out << '[';
        for (size_t i = 0; i < v.nums.size(); ++i) {
          if (i) out << ", ";
          out << format_number(v.nums[i]);
        }
        out << ']';
        break;
      }
      case ConfigValue::Type::string_list: {
        out << '[';
        for (size_t i = 0; i < v.strs.size(); ++i) {
          if (i) out << ", ";
          out << '"' << v.strs[i] << '"';
        }
        out << ']';
        break;
      }
    }
    out << '\n';
  }
  return out.str();
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

}  // namespace qpsr
