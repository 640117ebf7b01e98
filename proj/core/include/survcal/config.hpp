#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace survcal {

// Flat key-value tree: one `key = value` pair per line, '#' comments, dotted
// keys for nesting (e.g. hazard.eta). Values keep their raw text; typed
// accessors parse on demand and report the offending key on failure.
class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  // Space- or comma-separated list of numbers.
  std::vector<double> get_doubles(const std::string& key) const;
  std::vector<std::string> get_strings(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return values_; }
  // Canonical "key = value" serialization in sorted key order; hashed into the
  // run manifest so identical resolved configs map to identical digests.
  std::string canonical() const;

 private:
  std::map<std::string, std::string> values_;
  std::string origin_ = "<empty>";
};

std::uint64_t fnv1a_hash(const std::string& text);

}  // namespace survcal
