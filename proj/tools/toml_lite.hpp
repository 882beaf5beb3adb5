#pragma once

// Flat `key = value` subset of TOML used for experiment manifests: comments,
// blank lines, optional [section] headers (accepted, ignored — keys stay
// flat), quoted or bare scalar values.  Arrays and nested tables are
// rejected so a manifest can never silently mean something the flags
// cannot express.

#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "definf/errors.hpp"

namespace definf {

inline std::string toml_trim(std::string_view s) {
  const char* ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::map<std::string, std::string> load_toml_lite(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    const std::string at = "config line " + std::to_string(ln) + ": ";
    std::string s = toml_trim(line);
    if (s.empty() || s[0] == '#') continue;
    if (s[0] == '[') {
      if (s.back() != ']') throw DataError(at + "unterminated section header");
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw DataError(at + "expected key = value");
    const std::string key = toml_trim(s.substr(0, eq));
    std::string val = toml_trim(s.substr(eq + 1));
    if (key.empty()) throw DataError(at + "empty key");
    if (val.empty()) throw DataError(at + "empty value");
    if (val[0] == '"') {
      const auto close = val.find('"', 1);
      if (close == std::string::npos) throw DataError(at + "unterminated string");
      const std::string rest = toml_trim(val.substr(close + 1));
      if (!rest.empty() && rest[0] != '#') throw DataError(at + "trailing text after string");
      val = val.substr(1, close - 1);
    } else {
      const auto hash = val.find('#');
      if (hash != std::string::npos) val = toml_trim(val.substr(0, hash));
      if (val.empty()) throw DataError(at + "empty value");
      if (val[0] == '[' || val[0] == '{') {
        throw DataError(at + "arrays and tables are not supported");
      }
    }
    if (kv.count(key)) throw DataError(at + "duplicate key " + key);
    kv[key] = val;
  }
  return kv;
}

}  // namespace definf
