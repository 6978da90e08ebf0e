#pragma once

// Shared helpers for the JSON-backed file formats.

#include <algorithm>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"
#include "qnnflow/errors.hpp"

namespace qnnflow::detail {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write '" + path + "'");
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
}

inline nlohmann::json parse_json(std::string_view text) {
  try {
    return nlohmann::json::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    const auto upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ParseError("syntax error at line " + std::to_string(line) + ": " + e.what());
  }
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<std::string_view> allowed,
                           const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ParseError(where + ": unknown field '" + key + "'");
    }
  }
}

template <class T>
T convert(const nlohmann::json& v, const std::string& field) {
  try {
    if constexpr (std::is_same_v<T, int> || std::is_same_v<T, std::int64_t>) {
      if (!v.is_number_integer()) throw ParseError(field + ": expected an integer");
    } else if constexpr (std::is_floating_point_v<T>) {
      if (!v.is_number()) throw ParseError(field + ": expected a number");
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!v.is_string()) throw ParseError(field + ": expected a string");
    } else if constexpr (std::is_same_v<T, bool>) {
      if (!v.is_boolean()) throw ParseError(field + ": expected a boolean");
    }
    return v.get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(field + ": " + e.what());
  }
}

template <class T>
T require(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ParseError(where + ": missing field '" + key + "'");
  return convert<T>(j.at(key), where + "." + key);
}

template <class T>
std::optional<T> optional(const nlohmann::json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) return std::nullopt;
  return convert<T>(j.at(key), where + "." + key);
}

inline const nlohmann::json& require_object(const nlohmann::json& j, const std::string& key,
                                            const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_object()) {
    throw ParseError(where + ": field '" + key + "' must be an object");
  }
  return j.at(key);
}

inline const nlohmann::json& require_array(const nlohmann::json& j, const std::string& key,
                                           const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) {
    throw ParseError(where + ": field '" + key + "' must be an array");
  }
  return j.at(key);
}

}  // namespace qnnflow::detail
