#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <boost/multiprecision/eigen.hpp>
#include <Eigen/Dense>

#include <array>
#include <stdexcept>
#include <string>

namespace rezone {

using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

template <class Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;
template <class Scalar>
using Vec2 = Eigen::Matrix<Scalar, 2, 1>;

using Vec3r = Vec3<Rat>;
using Vec3i = Vec3<BigInt>;
using Vec2r = Vec2<Rat>;
using Vec3d = Vec3<double>;

inline int sign(const Rat& q) {
  if (q > 0) return 1;
  if (q < 0) return -1;
  return 0;
}

inline int sign(const BigInt& n) {
  if (n > 0) return 1;
  if (n < 0) return -1;
  return 0;
}

inline double to_double(const Rat& q) { return q.convert_to<double>(); }

inline BigInt rat_num(const Rat& q) { return boost::multiprecision::numerator(q); }
inline BigInt rat_den(const Rat& q) { return boost::multiprecision::denominator(q); }

// Canonical text form: "p" when the denominator is 1, else "p/q" reduced.
inline std::string rat_to_string(const Rat& q) {
  if (rat_den(q) == 1) return rat_num(q).str();
  return rat_num(q).str() + "/" + rat_den(q).str();
}

// Accepts "p" or "p/q" with optional leading '-'. Throws std::invalid_argument.
Rat rat_from_string(const std::string& s);

template <class Scalar>
bool vec_eq(const Vec3<Scalar>& a, const Vec3<Scalar>& b) {
  return a[0] == b[0] && a[1] == b[1] && a[2] == b[2];
}

// Strict lexicographic order, used for deterministic maps over exact points.
struct Vec3rLess {
  bool operator()(const Vec3r& a, const Vec3r& b) const {
    for (int i = 0; i < 3; ++i) {
      if (a[i] < b[i]) return true;
      if (a[i] > b[i]) return false;
    }
    return false;
  }
};

inline int compare_vec3i(const Vec3i& a, const Vec3i& b) {
  for (int i = 0; i < 3; ++i) {
    if (a[i] < b[i]) return -1;
    if (a[i] > b[i]) return 1;
  }
  return 0;
}

// Reduces a rational direction to a coprime integer vector whose first
// nonzero component is positive. Zero vector maps to zero.
Vec3i canonical_direction(const Vec3r& v);

inline Vec3r to_rat(const Vec3i& v) { return Vec3r(Rat(v[0]), Rat(v[1]), Rat(v[2])); }

inline Vec3d to_double(const Vec3r& v) {
  return Vec3d(to_double(v[0]), to_double(v[1]), to_double(v[2]));
}

}  // namespace rezone
