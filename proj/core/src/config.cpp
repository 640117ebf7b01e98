#include "survcal/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace survcal {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value,
                            const std::string& kind) {
  throw std::runtime_error("config key '" + key + "': expected " + kind + ", got '" +
                           value + "'");
}

}  // namespace

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) +
                               ": expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) {
      throw std::runtime_error(origin + ":" + std::to_string(line_no) + ": empty key");
    }
    cfg.values_[key] = value;
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open config " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_string(buffer.str(), path);
}

bool Config::has(const std::string& key) const { return values_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::string Config::get_string(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw std::runtime_error("config key '" + key + "' is required");
  return it->second;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  auto it = values_.find(key);
  return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key) const {
  const std::string v = get_string(key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

int Config::get_int(const std::string& key) const {
  const std::string v = get_string(key);
  int out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

int Config::get_int(const std::string& key, int fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t Config::get_u64(const std::string& key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || ptr != v.data() + v.size()) {
    bad_value(key, v, "an unsigned integer");
  }
  return out;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  if (!has(key)) return fallback;
  const std::string v = get_string(key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad_value(key, v, "a boolean");
}

std::vector<std::string> Config::get_strings(const std::string& key) const {
  const std::string v = get_string(key);
  std::vector<std::string> out;
  std::string token;
  for (char ch : v + " ") {
    if (ch == ' ' || ch == '\t' || ch == ',') {
      if (!token.empty()) out.push_back(token);
      token.clear();
    } else {
      token.push_back(ch);
    }
  }
  return out;
}

std::vector<double> Config::get_doubles(const std::string& key) const {
  std::vector<double> out;
  for (const std::string& token : get_strings(key)) {
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
    if (ec != std::errc{} || ptr != token.data() + token.size()) {
      bad_value(key, token, "a number list");
    }
    out.push_back(value);
  }
  return out;
}

std::string Config::canonical() const {
  std::ostringstream out;
  for (const auto& [key, value] : values_) out << key << " = " << value << '\n';
  return out.str();
}

std::uint64_t fnv1a_hash(const std::string& text) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace survcal
