#pragma once

#include <fstream>
#include <functional>
#include <string>

#include <json.hpp>

#include "ear/corpus.h"

namespace ear {

// Calls fn(object, line_number) for every nonblank line. Parse failures and
// non-object lines raise InputError naming the line.
inline void for_each_jsonl(const std::string& path,
                           const std::function<void(const nlohmann::json&, size_t)>& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path);
  std::string line;
  size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw InputError(path + ": malformed JSON on line " + std::to_string(lineno), lineno);
    }
    if (!j.is_object())
      throw InputError(path + ": line " + std::to_string(lineno) + " is not a JSON object", lineno);
    fn(j, lineno);
  }
}

inline std::string json_string(const nlohmann::json& j, const char* key, size_t line) {
  if (!j.contains(key) || !j[key].is_string())
    throw InputError("line " + std::to_string(line) + ": missing string field '" + key + "'", line);
  return j[key].get<std::string>();
}

// Ids may be written as strings or integers.
inline std::string json_id(const nlohmann::json& j, const char* key, size_t line) {
  if (j.contains(key) && j[key].is_number_integer()) return std::to_string(j[key].get<long long>());
  std::string id = json_string(j, key, line);
  if (id.empty()) throw InputError("line " + std::to_string(line) + ": empty '" + key + "'", line);
  return id;
}

}  // namespace ear
