#include "helmfem/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <sstream>

namespace helmfem {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool namespaced(const std::string& key) {
  for (const char* ns : {"mesh.", "pml.", "dtn.", "filter.", "exp."})
    if (key.rfind(ns, 0) == 0 && key.size() > std::string(ns).size()) return true;
  return false;
}

// One factor: a decimal number, "pi" or "sqrt2".
double parse_factor(const std::string& f, const std::string& whole) {
  if (f == "pi") return std::numbers::pi;
  if (f == "sqrt2") return std::numbers::sqrt2;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(f, &used);
  } catch (const std::exception&) {
    throw ConfigError("cannot parse number: " + whole);
  }
  if (used != f.size()) throw ConfigError("cannot parse number: " + whole);
  return v;
}

}  // namespace

double parse_number(const std::string& text) {
  const std::string s = trim(text);
  if (s.empty()) throw ConfigError("empty number");
  // Products and quotients of factors, evaluated left to right.
  double value = 1.0;
  char op = '*';
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    const bool at_op = i < s.size() && (s[i] == '*' || s[i] == '/') && i > start;
    if (i == s.size() || at_op) {
      const double f = parse_factor(trim(s.substr(start, i - start)), s);
      value = op == '*' ? value * f : value / f;
      if (i < s.size()) op = s[i];
      start = i + 1;
    }
  }
  return value;
}

std::vector<double> parse_list(const std::string& text) {
  const std::string s = trim(text);
  std::vector<double> out;
  if (std::count(s.begin(), s.end(), ':') == 2) {
    const auto a = s.find(':'), b = s.rfind(':');
    const double lo = parse_number(s.substr(0, a));
    const double step = parse_number(s.substr(a + 1, b - a - 1));
    const double hi = parse_number(s.substr(b + 1));
    if (!(step > 0.0)) throw ConfigError("list step must be positive: " + s);
    for (int i = 0; lo + i * step <= hi + 1e-9 * std::abs(step); ++i) out.push_back(lo + i * step);
  } else {
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) out.push_back(parse_number(item));
  }
  if (out.empty()) throw ConfigError("empty list: " + s);
  return out;
}

double PowerRule::operator()(double k) const { return c * std::pow(k, e); }

std::string format_number(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string PowerRule::to_string() const { return format_number(c) + "*k^" + format_number(e); }

PowerRule parse_power_rule(const std::string& text) {
  const std::string s = trim(text);
  PowerRule r;
  const auto comma = s.find(',');
  if (comma != std::string::npos) {
    r.c = parse_number(s.substr(0, comma));
    r.e = parse_number(s.substr(comma + 1));
  } else {
    const auto pos = s.find("*k^");
    if (pos == std::string::npos) throw ConfigError("expected c*k^e or c,e: " + s);
    r.c = parse_number(s.substr(0, pos));
    r.e = parse_number(s.substr(pos + 3));
  }
  if (r.e > 0.0) throw ConfigError("mesh exponent must be <= 0: " + s);
  return r;
}

Config Config::parse(std::istream& in) {
  Config cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(lineno) + ": expected key = value");
    cfg.set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

Config Config::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  return parse(in);
}

void Config::set(const std::string& key, const std::string& value) {
  if (!namespaced(key)) throw ConfigError("config key must be namespaced (mesh., pml., dtn., filter., exp.): " + key);
  values_[key] = value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_number(it->second);
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const double v = parse_number(it->second);
  if (v != std::round(v)) throw ConfigError("expected an integer for " + key);
  return static_cast<int>(v);
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = values_.find(key);
  if (it == values_.end()) return fallback;
  const std::string& v = it->second;
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError("expected a boolean for " + key);
}

std::vector<double> Config::get_list(const std::string& key, const std::vector<double>& fallback) const {
  const auto it = values_.find(key);
  return it == values_.end() ? fallback : parse_list(it->second);
}

std::string Config::to_text() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + " = " + v + "\n";
  return out;
}

}  // namespace helmfem
