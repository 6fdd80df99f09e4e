#pragma once

#include "rezone/rational.hpp"

#include <nlohmann/json.hpp>

#include <limits>

namespace rezone {

inline Rat json_to_rat(const nlohmann::json& v) {
  if (v.is_number_integer()) return Rat(BigInt(v.get<long long>()));
  if (v.is_number_unsigned()) return Rat(BigInt(v.get<unsigned long long>()));
  if (v.is_string()) return rat_from_string(v.get<std::string>());
  throw std::invalid_argument("expected an integer or \"p/q\" string");
}

inline nlohmann::ordered_json rat_to_json(const Rat& q) {
  if (rat_den(q) == 1) {
    const BigInt n = rat_num(q);
    if (n >= std::numeric_limits<long long>::min() && n <= std::numeric_limits<long long>::max())
      return nlohmann::ordered_json(n.convert_to<long long>());
  }
  return nlohmann::ordered_json(rat_to_string(q));
}

inline nlohmann::ordered_json vec3_to_json(const Vec3r& v) {
  return nlohmann::ordered_json{rat_to_json(v[0]), rat_to_json(v[1]), rat_to_json(v[2])};
}

inline Vec3r vec3_from_json(const nlohmann::json& v) {
  if (!v.is_array() || v.size() != 3) throw std::invalid_argument("expected [x, y, z]");
  return Vec3r(json_to_rat(v[0]), json_to_rat(v[1]), json_to_rat(v[2]));
}

}  // namespace rezone
