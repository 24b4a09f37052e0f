#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace starnoma {

// Plain key=value configuration. One pair per line, '#' starts a comment,
// blank lines ignored. Keys are kept in sorted order so serialization is
// byte-stable.
class KvConfig {
 public:
  KvConfig() = default;

  static KvConfig parse(std::istream& in);
  static KvConfig parse_file(const std::string& path);
  static KvConfig parse_string(const std::string& text);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);
  void set_double(const std::string& key, double value);
  void set_int(const std::string& key, long long value);

  // Getters throw std::invalid_argument on malformed values; the defaulted
  // overloads return the default when the key is absent.
  std::string get_str(const std::string& key) const;
  std::string get_str(const std::string& key, const std::string& def) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double def) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long def) const;
  bool get_bool(const std::string& key, bool def) const;
  // Comma-separated lists.
  std::vector<double> get_double_list(const std::string& key) const;
  std::vector<std::uint64_t> get_u64_list(const std::string& key) const;
  std::vector<long long> get_int_list(const std::string& key) const;

  const std::map<std::string, std::string>& items() const { return values_; }
  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

// %.12g formatting used everywhere numbers are serialized; parsing a printed
// value and printing it again reproduces the same text.
std::string format_double(double v);

std::vector<std::string> split(const std::string& s, char sep);

}  // namespace starnoma
