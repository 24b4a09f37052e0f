#include "starnoma/config.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace starnoma {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return {};
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  if (!std::isfinite(v)) {
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
  }
  // Shortest decimal form that parses back to the exact same double, so
  // exported values survive a read-write cycle bit for bit.
  for (int prec = 12; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

KvConfig KvConfig::parse(std::istream& in) {
  KvConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value, got '" + line + "'");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": empty key");
    cfg.values_[key] = value;
  }
  return cfg;
}

KvConfig KvConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  return parse(in);
}

KvConfig KvConfig::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

bool KvConfig::has(const std::string& key) const {
  return values_.count(key) != 0;
}

void KvConfig::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

void KvConfig::set_double(const std::string& key, double value) {
  values_[key] = format_double(value);
}

void KvConfig::set_int(const std::string& key, long long value) {
  values_[key] = std::to_string(value);
}

std::string KvConfig::get_str(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end())
    throw std::invalid_argument("missing config key: " + key);
  return it->second;
}

std::string KvConfig::get_str(const std::string& key,
                              const std::string& def) const {
  auto it = values_.find(key);
  return it == values_.end() ? def : it->second;
}

double KvConfig::get_double(const std::string& key) const {
  const std::string v = get_str(key);
  try {
    std::size_t pos = 0;
    double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return d;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad number '" + v +
                                "'");
  }
}

double KvConfig::get_double(const std::string& key, double def) const {
  return has(key) ? get_double(key) : def;
}

long long KvConfig::get_int(const std::string& key) const {
  const std::string v = get_str(key);
  try {
    std::size_t pos = 0;
    long long i = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument("trailing characters");
    return i;
  } catch (const std::exception&) {
    throw std::invalid_argument("config key '" + key + "': bad integer '" + v +
                                "'");
  }
}

long long KvConfig::get_int(const std::string& key, long long def) const {
  return has(key) ? get_int(key) : def;
}

bool KvConfig::get_bool(const std::string& key, bool def) const {
  if (!has(key)) return def;
  const std::string v = get_str(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw std::invalid_argument("config key '" + key + "': bad bool '" + v + "'");
}

std::vector<double> KvConfig::get_double_list(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& tok : split(get_str(key), ',')) {
    std::size_t pos = 0;
    double d = std::stod(tok, &pos);
    out.push_back(d);
  }
  return out;
}

std::vector<std::uint64_t> KvConfig::get_u64_list(
    const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (const std::string& tok : split(get_str(key), ','))
    out.push_back(static_cast<std::uint64_t>(std::stoull(tok)));
  return out;
}

std::vector<long long> KvConfig::get_int_list(const std::string& key) const {
  std::vector<long long> out;
  for (const std::string& tok : split(get_str(key), ','))
    out.push_back(std::stoll(tok));
  return out;
}

void KvConfig::write(std::ostream& out) const {
  // std::map iteration is sorted, so output is byte-stable.
  for (const auto& [k, v] : values_) out << k << " = " << v << "\n";
}

}  // namespace starnoma
