#include "rezone/rational.hpp"

namespace rezone {

Rat rat_from_string(const std::string& s) {
  if (s.empty()) throw std::invalid_argument("empty rational literal");
  auto slash = s.find('/');
  auto check_int = [](const std::string& t) {
    if (t.empty()) throw std::invalid_argument("empty integer literal");
    std::size_t i = (t[0] == '-' || t[0] == '+') ? 1 : 0;
    if (i == t.size()) throw std::invalid_argument("bad integer literal: " + t);
    for (; i < t.size(); ++i)
      if (t[i] < '0' || t[i] > '9') throw std::invalid_argument("bad integer literal: " + t);
  };
  if (slash == std::string::npos) {
    check_int(s);
    return Rat(BigInt(s));
  }
  std::string p = s.substr(0, slash);
  std::string q = s.substr(slash + 1);
  check_int(p);
  check_int(q);
  BigInt den(q);
  if (den == 0) throw std::invalid_argument("zero denominator: " + s);
  return Rat(BigInt(p), den);
}

Vec3i canonical_direction(const Vec3r& v) {
  BigInt l = 1;
  for (int i = 0; i < 3; ++i) l = boost::multiprecision::lcm(l, rat_den(v[i]));
  Vec3i w;
  for (int i = 0; i < 3; ++i) w[i] = rat_num(v[i]) * (l / rat_den(v[i]));
  BigInt g = 0;
  for (int i = 0; i < 3; ++i) g = boost::multiprecision::gcd(g, boost::multiprecision::abs(w[i]));
  if (g == 0) return Vec3i(BigInt(0), BigInt(0), BigInt(0));
  for (int i = 0; i < 3; ++i) w[i] /= g;
  for (int i = 0; i < 3; ++i) {
    if (w[i] != 0) {
      if (w[i] < 0)
        for (int j = 0; j < 3; ++j) w[j] = -w[j];
      break;
    }
  }
  return w;
}

}  // namespace rezone
