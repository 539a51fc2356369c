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

#include "haptibot/geometry.hpp"

#include <stdexcept>

namespace haptibot {

double wrap_angle(double angle) {
  if (!std::isfinite(angle)) {
    throw std::invalid_argument("wrap_angle: non-finite angle");
  }
  // std::remainder is exact and lands in [-pi, pi].
  double r = std::remainder(angle, kTwoPi);
  if (r <= -kPi) {
    r += kTwoPi;
  }
  return r;
}

double wrap_positive(double angle) {
  double r = std::fmod(angle, kTwoPi);
  if (r < 0.0) {
    r += kTwoPi;
  }
  // fmod of a tiny negative value can round back up to exactly 2pi.
  if (r >= kTwoPi) {
    r = 0.0;
  }
  return r;
}

Vec2 apply_transform(const Transform2D& t, Vec2 p) {
  return rotate(p, t.rotation) + t.translation;
}

Pose2D apply_transform(const Transform2D& t, const Pose2D& p) {
  const Vec2 q = apply_transform(t, Vec2{p.x, p.y});
  return {q.x, q.y, wrap_angle(p.theta + t.rotation)};
}

Transform2D compose(const Transform2D& a, const Transform2D& b) {
  return {apply_transform(a, b.translation), wrap_angle(a.rotation + b.rotation)};
}

Transform2D inverse(const Transform2D& t) {
  return {rotate(Vec2{-t.translation.x, -t.translation.y}, -t.rotation), wrap_angle(-t.rotation)};
}

Transform2D to_transform(const Pose2D& p) { return {{p.x, p.y}, wrap_angle(p.theta)}; }

}  // namespace haptibot
