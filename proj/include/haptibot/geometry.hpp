// Copyright 2026 The Haptibot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cmath>
#include <numbers>

namespace haptibot {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Planar pose in the mat frame. Origin at the mat corner, x right, y up.
struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, (-pi, pi]

  friend bool operator==(const Pose2D&, const Pose2D&) = default;
};

/// World point; z is height above the mat surface.
struct Point3D {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Point3D&, const Point3D&) = default;
};

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Vec2&, const Vec2&) = default;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double s, Vec2 v) { return {s * v.x, s * v.y}; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 v) { return std::hypot(v.x, v.y); }
inline Vec2 rotate(Vec2 v, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * v.x - s * v.y, s * v.x + c * v.y};
}

inline Point3D operator+(Point3D a, Point3D b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
inline Point3D operator-(Point3D a, Point3D b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline Point3D operator*(double s, Point3D p) { return {s * p.x, s * p.y, s * p.z}; }
inline double norm(Point3D p) { return std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z); }
inline double distance(Point3D a, Point3D b) { return norm(a - b); }
inline double lateral_distance(Point3D a, Point3D b) { return std::hypot(a.x - b.x, a.y - b.y); }

/// Rigid planar transform: rotate about the origin, then translate.
struct Transform2D {
  Vec2 translation{};
  double rotation = 0.0;  // radians, (-pi, pi]

  friend bool operator==(const Transform2D&, const Transform2D&) = default;
};

/// Wraps an angle into (-pi, pi]. Throws std::invalid_argument on non-finite input.
double wrap_angle(double angle);

/// Wraps an angle into [0, 2pi).
double wrap_positive(double angle);

Pose2D apply_transform(const Transform2D& t, const Pose2D& p);
Vec2 apply_transform(const Transform2D& t, Vec2 p);

/// compose(a, b) applies b first, then a.
Transform2D compose(const Transform2D& a, const Transform2D& b);
Transform2D inverse(const Transform2D& t);

/// The transform that maps a body frame located at `p` into the mat frame.
Transform2D to_transform(const Pose2D& p);

}  // namespace haptibot
