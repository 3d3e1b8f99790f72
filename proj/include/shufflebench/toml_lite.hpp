#pragma once

#include <map>
#include <string>
#include <vector>

namespace shufflebench {

// Flat TOML-subset reader for experiment configs: [section] headers,
// key = value pairs, values of type string ("..."), number, boolean, or a
// one-level array of those, and # comments. Keys are addressed as
// "section.key" ("key" alone for the top level). No nested tables, dotted
// keys, dates, or multi-line strings.
class TomlLite {
 public:
  struct Value {
    enum class Type { String, Number, Boolean, Array };
    Type type = Type::String;
    std::string str;
    double num = 0.0;
    bool boolean = false;
    std::vector<Value> items;
  };

  static TomlLite parse(const std::string& text);
  static TomlLite parse_file(const std::string& path);

  bool has(const std::string& key) const;

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_number(const std::string& key) const;
  double get_number(const std::string& key, double fallback) const;
  long get_integer(const std::string& key) const;
  long get_integer(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_number_array(const std::string& key) const;
  std::vector<long> get_integer_array(const std::string& key) const;
  std::vector<std::string> get_string_array(const std::string& key) const;

  const std::map<std::string, Value>& entries() const { return entries_; }

 private:
  const Value& require(const std::string& key, Value::Type type) const;

  std::map<std::string, Value> entries_;
};

}  // namespace shufflebench
