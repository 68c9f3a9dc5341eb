#pragma once

#include <filesystem>
#include <set>
#include <string>

#include <json.hpp>

#include "doateleop/geometry.hpp"

namespace doateleop::detail {

/// Throws std::invalid_argument naming `where` if `j` is not an object or has a key outside `allowed`.
void reject_unknown(const nlohmann::json& j, const std::set<std::string>& allowed, const std::string& where);

Vec2 vec_from(const nlohmann::json& j, const std::string& where);

inline nlohmann::json vec_to(const Vec2& v) { return nlohmann::json::array({v.x(), v.y()}); }

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    out = it->get<T>();
  }
}

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace doateleop::detail
