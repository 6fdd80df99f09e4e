#pragma once

#include "rezone/rational.hpp"

#include <tuple>

namespace rezone {

// Oriented plane a*x + b*y + c*z = d with canonical integer coefficients:
// gcd(a,b,c,d) == 1 and the first nonzero of (a,b,c) is positive.
// Two planes are the same surface iff their canonical coefficients match.
struct Plane {
  BigInt a, b, c, d;

  static Plane from_point_normal(const Vec3r& normal, const Vec3r& point);
  static Plane from_rational(const Rat& ra, const Rat& rb, const Rat& rc, const Rat& rd);

  Vec3i normal() const { return Vec3i(a, b, c); }
  Vec3r normal_r() const { return Vec3r(Rat(a), Rat(b), Rat(c)); }

  Rat eval(const Vec3r& p) const { return Rat(a) * p[0] + Rat(b) * p[1] + Rat(c) * p[2] - Rat(d); }
  int side(const Vec3r& p) const { return sign(eval(p)); }

  // Direction class: coprime (a,b,c) with positive leading sign, plus the
  // offset so that dir . x == offset. Parallel planes share dir.
  Vec3i dir() const;
  Rat offset() const;

  auto key() const { return std::tie(a, b, c, d); }
  bool operator==(const Plane& o) const { return key() == o.key(); }
  bool operator<(const Plane& o) const { return key() < o.key(); }
};

// Exact in-plane basis (u, w) with u.n == w.n == 0 and u x w a positive
// multiple of n. All planes of one direction class share the same frame.
std::pair<Vec3i, Vec3i> plane_frame(const Vec3i& n);

inline Vec2r project_to_frame(const std::pair<Vec3i, Vec3i>& frame, const Vec3r& p) {
  const Vec3r u = to_rat(frame.first);
  const Vec3r w = to_rat(frame.second);
  return Vec2r(u.dot(p), w.dot(p));
}

}  // namespace rezone
