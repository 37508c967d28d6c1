#pragma once

#include <algorithm>
#include <cmath>

namespace spherephd {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  constexpr Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  constexpr Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  constexpr Vec3 operator-() const { return {-x, -y, -z}; }
  constexpr Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  constexpr Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  constexpr bool operator==(const Vec3&) const = default;

  constexpr double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  constexpr Vec3 cross(const Vec3& o) const {
    return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
  }
  double norm() const { return std::sqrt(dot(*this)); }
  Vec3 normalized() const { return *this * (1.0 / norm()); }
};

inline constexpr Vec3 operator*(double s, const Vec3& v) { return v * s; }

inline double triple(const Vec3& a, const Vec3& b, const Vec3& c) { return a.dot(b.cross(c)); }

// A point on the unit sphere. Construction normalizes.
class UnitVec {
 public:
  UnitVec() = default;
  explicit UnitVec(const Vec3& v) : v_(v.normalized()) {}
  UnitVec(double x, double y, double z) : UnitVec(Vec3{x, y, z}) {}

  // Latitude/longitude in radians; x toward (0,0), z toward the north pole.
  static UnitVec from_lat_lon(double lat, double lon) {
    UnitVec u;
    u.v_ = {std::cos(lat) * std::cos(lon), std::cos(lat) * std::sin(lon), std::sin(lat)};
    return u;
  }

  const Vec3& vec() const { return v_; }
  operator const Vec3&() const { return v_; }  // NOLINT(google-explicit-constructor)
  double x() const { return v_.x; }
  double y() const { return v_.y; }
  double z() const { return v_.z; }

  double latitude() const { return std::asin(std::clamp(v_.z, -1.0, 1.0)); }
  double longitude() const { return std::atan2(v_.y, v_.x); }

  UnitVec operator-() const {
    UnitVec u;
    u.v_ = -v_;
    return u;
  }

 private:
  Vec3 v_{0.0, 0.0, 1.0};
};

}  // namespace spherephd
