#pragma once

#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace helmfem {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Line-oriented `key = value` settings. Keys must be namespaced with one of
/// mesh., pml., dtn., filter., exp.; '#' starts a comment.
class Config {
 public:
  static Config parse(std::istream& in);
  static Config parse_string(const std::string& text);
  static Config parse_file(const std::string& path);

  void set(const std::string& key, const std::string& value);
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;

  const std::map<std::string, std::string>& values() const { return values_; }
  /// Sorted `key = value` lines.
  std::string to_text() const;

 private:
  std::map<std::string, std::string> values_;
};

/// Parses a number with optional "pi" factors, e.g. "0.5", "pi/2", "2*pi/200".
double parse_number(const std::string& text);
/// Shortest text that parses back to exactly v.
std::string format_number(double v);

/// "a:step:b" (inclusive) or a comma-separated list.
std::vector<double> parse_list(const std::string& text);

/// Mesh or sampling rule value = c * k^e, written "c*k^e" or "c,e".
struct PowerRule {
  double c = 1.0;
  double e = -1.0;
  double operator()(double k) const;
  std::string to_string() const;
};

PowerRule parse_power_rule(const std::string& text);

}  // namespace helmfem
