#include "shufflebench/toml_lite.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "shufflebench/errors.hpp"

namespace shufflebench {

namespace {

using Value = TomlLite::Value;

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) {
    s.remove_suffix(1);
  }
  return s;
}

// Strips a # comment that is not inside a quoted string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

Value parse_scalar(std::string_view token, int line) {
  token = trim(token);
  if (token.empty()) throw config_error("empty value", line);
  Value v;
  if (token.front() == '"') {
    if (token.size() < 2 || token.back() != '"') {
      throw config_error("unterminated string", line);
    }
    v.type = Value::Type::String;
    v.str = std::string(token.substr(1, token.size() - 2));
    return v;
  }
  if (token == "true" || token == "false") {
    v.type = Value::Type::Boolean;
    v.boolean = token == "true";
    return v;
  }
  double num = 0.0;
  const char* first = token.data();
  const char* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, num);
  if (ec != std::errc() || ptr != last || !std::isfinite(num)) {
    throw config_error("bad value '" + std::string(token) + "'", line);
  }
  v.type = Value::Type::Number;
  v.num = num;
  return v;
}

Value parse_value(std::string_view token, int line) {
  token = trim(token);
  if (token.empty()) throw config_error("empty value", line);
  if (token.front() != '[') return parse_scalar(token, line);
  if (token.back() != ']') throw config_error("unterminated array", line);

  Value arr;
  arr.type = Value::Type::Array;
  std::string_view inner = token.substr(1, token.size() - 2);
  std::size_t start = 0;
  bool quoted = false;
  for (std::size_t i = 0; i <= inner.size(); ++i) {
    if (i < inner.size() && inner[i] == '"') quoted = !quoted;
    if (i == inner.size() || (inner[i] == ',' && !quoted)) {
      const std::string_view piece = trim(inner.substr(start, i - start));
      if (!piece.empty()) arr.items.push_back(parse_scalar(piece, line));
      start = i + 1;
    }
  }
  return arr;
}

}  // namespace

TomlLite TomlLite::parse(const std::string& text) {
  TomlLite result;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) continue;

    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) {
        throw config_error("bad section header", line_no);
      }
      section = std::string(trim(line.substr(1, line.size() - 2)));
      continue;
    }

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw config_error("expected key = value", line_no);
    }
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw config_error("empty key", line_no);
    const std::string full_key = section.empty() ? key : section + "." + key;
    if (result.entries_.count(full_key) > 0) {
      throw config_error("duplicate key '" + full_key + "'", line_no);
    }
    result.entries_[full_key] = parse_value(line.substr(eq + 1), line_no);
  }
  return result;
}

TomlLite TomlLite::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw config_error("cannot open config file " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse(os.str());
}

bool TomlLite::has(const std::string& key) const {
  return entries_.count(key) > 0;
}

const Value& TomlLite::require(const std::string& key,
                               Value::Type type) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw config_error("missing config key '" + key + "'");
  }
  if (it->second.type != type) {
    throw config_error("config key '" + key + "' has the wrong type");
  }
  return it->second;
}

std::string TomlLite::get_string(const std::string& key) const {
  return require(key, Value::Type::String).str;
}

std::string TomlLite::get_string(const std::string& key,
                                 const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

double TomlLite::get_number(const std::string& key) const {
  return require(key, Value::Type::Number).num;
}

double TomlLite::get_number(const std::string& key, double fallback) const {
  return has(key) ? get_number(key) : fallback;
}

long TomlLite::get_integer(const std::string& key) const {
  const double v = get_number(key);
  const long n = static_cast<long>(v);
  if (static_cast<double>(n) != v) {
    throw config_error("config key '" + key + "' must be an integer");
  }
  return n;
}

long TomlLite::get_integer(const std::string& key, long fallback) const {
  return has(key) ? get_integer(key) : fallback;
}

bool TomlLite::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  return require(key, Value::Type::Boolean).boolean;
}

std::vector<double> TomlLite::get_number_array(const std::string& key) const {
  const Value& v = require(key, Value::Type::Array);
  std::vector<double> out;
  out.reserve(v.items.size());
  for (const auto& item : v.items) {
    if (item.type != Value::Type::Number) {
      throw config_error("config key '" + key + "' must hold numbers");
    }
    out.push_back(item.num);
  }
  return out;
}

std::vector<long> TomlLite::get_integer_array(const std::string& key) const {
  std::vector<long> out;
  for (double v : get_number_array(key)) {
    const long n = static_cast<long>(v);
    if (static_cast<double>(n) != v) {
      throw config_error("config key '" + key + "' must hold integers");
    }
    out.push_back(n);
  }
  return out;
}

std::vector<std::string> TomlLite::get_string_array(
    const std::string& key) const {
  const Value& v = require(key, Value::Type::Array);
  std::vector<std::string> out;
  out.reserve(v.items.size());
  for (const auto& item : v.items) {
    if (item.type != Value::Type::String) {
      throw config_error("config key '" + key + "' must hold strings");
    }
    out.push_back(item.str);
  }
  return out;
}

}  // namespace shufflebench
