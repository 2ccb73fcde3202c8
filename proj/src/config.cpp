#include "mfm/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mfm {
namespace {

std::string trim(std::string_view s) {
  const auto begin = s.find_first_not_of(" \t");
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(" \t");
  return std::string(s.substr(begin, end - begin + 1));
}

std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool parse_number(const std::string& text, double& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  if (first != last && *first == '+') ++first;
  const auto res = std::from_chars(first, last, out);
  return res.ec == std::errc() && res.ptr == last && first != last;
}

bool is_quoted(const std::string& s) { return s.size() >= 2 && s.front() == '"' && s.back() == '"'; }

std::vector<std::string> split_list(const std::string& inner) {
  std::vector<std::string> items;
  std::string current;
  bool quoted = false;
  for (char ch : inner) {
    if (ch == '"') quoted = !quoted;
    if (ch == ',' && !quoted) {
      items.push_back(trim(current));
      current.clear();
    } else {
      current += ch;
    }
  }
  if (!trim(current).empty() || !items.empty()) items.push_back(trim(current));
  return items;
}

}  // namespace

KeyValueConfig KeyValueConfig::parse(const std::string& text, const std::string& source) {
  KeyValueConfig cfg;
  cfg.source_ = source;
  std::istringstream in(text);
  std::string raw;
  long line_no = 0;
  auto fail = [&](const std::string& what) {
    throw std::runtime_error(source + ":" + std::to_string(line_no) + ": " + what);
  };
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    if (key.empty() || key.find_first_of(" \t\"") != std::string::npos) fail("invalid key '" + key + "'");
    if (value.empty()) fail("missing value for '" + key + "'");
    if (cfg.values_.count(key)) fail("duplicate key '" + key + "'");

    ConfigValue parsed;
    double number = 0.0;
    if (is_quoted(value)) {
      parsed = value.substr(1, value.size() - 2);
    } else if (value == "true" || value == "false") {
      parsed = value == "true";
    } else if (parse_number(value, number)) {
      parsed = number;
    } else if (value.front() == '[' && value.back() == ']') {
      const auto items = split_list(value.substr(1, value.size() - 2));
      if (!items.empty() && is_quoted(items.front())) {
        std::vector<std::string> strings;
        for (const auto& item : items) {
          if (!is_quoted(item)) fail("mixed list for '" + key + "'");
          strings.push_back(item.substr(1, item.size() - 2));
        }
        parsed = std::move(strings);
      } else {
        std::vector<double> numbers;
        for (const auto& item : items) {
          if (!parse_number(item, number)) fail("cannot parse list item '" + item + "' for '" + key + "'");
          numbers.push_back(number);
        }
        parsed = std::move(numbers);
      }
    } else {
      fail("cannot parse value '" + value + "' for '" + key + "' (strings must be quoted)");
    }
    cfg.values_[key] = std::move(parsed);
    cfg.lines_[key] = line_no;
  }
  return cfg;
}

KeyValueConfig KeyValueConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str(), path.string());
}

const ConfigValue& KeyValueConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error(source_ + ": missing required key '" + key + "'");
  used_.insert(key);
  return it->second;
}

double KeyValueConfig::number(const std::string& key) const {
  if (auto* v = std::get_if<double>(&get(key))) return *v;
  throw std::runtime_error(source_ + ": key '" + key + "' must be a number");
}

double KeyValueConfig::number_or(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long KeyValueConfig::integer_or(const std::string& key, long fallback) const {
  if (!has(key)) return fallback;
  const double v = number(key);
  if (v != std::floor(v)) throw std::runtime_error(source_ + ": key '" + key + "' must be an integer");
  return static_cast<long>(v);
}

std::string KeyValueConfig::string(const std::string& key) const {
  if (auto* v = std::get_if<std::string>(&get(key))) return *v;
  throw std::runtime_error(source_ + ": key '" + key + "' must be a quoted string");
}

std::string KeyValueConfig::string_or(const std::string& key, const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

bool KeyValueConfig::boolean_or(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  if (auto* v = std::get_if<bool>(&get(key))) return *v;
  throw std::runtime_error(source_ + ": key '" + key + "' must be true or false");
}

std::vector<double> KeyValueConfig::numbers(const std::string& key) const {
  const auto& v = get(key);
  if (auto* list = std::get_if<std::vector<double>>(&v)) return *list;
  if (auto* single = std::get_if<double>(&v)) return {*single};
  throw std::runtime_error(source_ + ": key '" + key + "' must be a list of numbers");
}

std::vector<std::string> KeyValueConfig::strings(const std::string& key) const {
  const auto& v = get(key);
  if (auto* list = std::get_if<std::vector<std::string>>(&v)) return *list;
  if (auto* single = std::get_if<std::string>(&v)) return {*single};
  throw std::runtime_error(source_ + ": key '" + key + "' must be a list of strings");
}

bool KeyValueConfig::is_string(const std::string& key) const {
  auto it = values_.find(key);
  return it != values_.end() && std::holds_alternative<std::string>(it->second);
}

void KeyValueConfig::check_all_used() const {
  for (const auto& [key, value] : values_)
    if (!used_.count(key)) {
      const auto line = lines_.find(key);
      const std::string where = line == lines_.end() ? source_ : source_ + ":" + std::to_string(line->second);
      throw std::runtime_error(where + ": unknown key '" + key + "'");
    }
}

}  // namespace mfm
