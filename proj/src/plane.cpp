#include "rezone/plane.hpp"

namespace rezone {

Plane Plane::from_rational(const Rat& ra, const Rat& rb, const Rat& rc, const Rat& rd) {
  BigInt l = 1;
  l = boost::multiprecision::lcm(l, rat_den(ra));
  l = boost::multiprecision::lcm(l, rat_den(rb));
  l = boost::multiprecision::lcm(l, rat_den(rc));
  l = boost::multiprecision::lcm(l, rat_den(rd));
  BigInt a = rat_num(ra) * (l / rat_den(ra));
  BigInt b = rat_num(rb) * (l / rat_den(rb));
  BigInt c = rat_num(rc) * (l / rat_den(rc));
  BigInt d = rat_num(rd) * (l / rat_den(rd));
  BigInt g = 0;
  using boost::multiprecision::abs;
  using boost::multiprecision::gcd;
  g = gcd(g, abs(a));
  g = gcd(g, abs(b));
  g = gcd(g, abs(c));
  g = gcd(g, abs(d));
  if (g == 0) throw std::invalid_argument("degenerate plane (all coefficients zero)");
  a /= g;
  b /= g;
  c /= g;
  d /= g;
  if (a == 0 && b == 0 && c == 0) throw std::invalid_argument("degenerate plane (zero normal)");
  BigInt lead = (a != 0) ? a : (b != 0) ? b : c;
  if (lead < 0) {
    a = -a;
    b = -b;
    c = -c;
    d = -d;
  }
  return Plane{a, b, c, d};
}

Plane Plane::from_point_normal(const Vec3r& normal, const Vec3r& point) {
  return from_rational(normal[0], normal[1], normal[2], normal.dot(point));
}

Vec3i Plane::dir() const {
  BigInt g = 0;
  using boost::multiprecision::abs;
  using boost::multiprecision::gcd;
  g = gcd(g, abs(a));
  g = gcd(g, abs(b));
  g = gcd(g, abs(c));
  return Vec3i(a / g, b / g, c / g);
}

Rat Plane::offset() const {
  BigInt g = 0;
  using boost::multiprecision::abs;
  using boost::multiprecision::gcd;
  g = gcd(g, abs(a));
  g = gcd(g, abs(b));
  g = gcd(g, abs(c));
  return Rat(d, g);
}

std::pair<Vec3i, Vec3i> plane_frame(const Vec3i& n) {
  const BigInt zero(0);
  if (n[0] != 0) {
    // u = (b, -a, 0), w = (c, 0, -a); u x w = a * n when a > 0 (canonical).
    return {Vec3i(n[1], -n[0], zero), Vec3i(n[2], zero, -n[0])};
  }
  if (n[1] != 0) {
    // n = (0, b, c): u = (0, c, -b), w = (-1, 0, 0); u x w = -b * ... checked below.
    Vec3i u(zero, n[2], -n[1]);
    Vec3i w(BigInt(-1), zero, zero);
    // u x w = (c*0 - (-b)*0, (-b)(-1) - 0, 0 - c*(-1)) = (0, b, c) = n.
    return {u, w};
  }
  // n = (0, 0, c), c > 0 canonical: (1,0,0) x (0,1,0) = (0,0,1).
  return {Vec3i(BigInt(1), zero, zero), Vec3i(zero, BigInt(1), zero)};
}

}  // namespace rezone
