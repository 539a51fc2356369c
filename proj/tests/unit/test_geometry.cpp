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

#include <cmath>
#include <random>

#include "doctest.h"
#include "haptibot/geometry.hpp"
#include "oracles.hpp"

using namespace haptibot;

TEST_CASE("wrap_angle examples") {
  CHECK(wrap_angle(0.0) == 0.0);
  CHECK(wrap_angle(3.0 * kPi) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(wrap_angle(kPi) == kPi);
  CHECK(wrap_angle(-kPi) == kPi);
  // -7.5 + 2 pi, frozen from the repeated-subtraction oracle.
  CHECK(wrap_angle(-7.5) == doctest::Approx(-1.2168146928204138).epsilon(1e-15));
  CHECK(oracle::wrap_by_steps(-7.5) == doctest::Approx(-1.2168146928204138).epsilon(1e-15));
}

TEST_CASE("wrap_angle rejects non-finite input") {
  CHECK_THROWS_AS(wrap_angle(std::nan("")), std::invalid_argument);
  CHECK_THROWS_AS(wrap_angle(INFINITY), std::invalid_argument);
}

TEST_CASE("wrap_angle range, congruence and idempotence") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-100.0, 100.0);
  for (int i = 0; i < 5000; ++i) {
    const double a = u(rng);
    const double w = wrap_angle(a);
    CHECK(w > -kPi);
    CHECK(w <= kPi);
    CHECK(wrap_angle(w) == w);
    CHECK(w == doctest::Approx(oracle::wrap_by_steps(a)).epsilon(1e-12));
    const double turns = (a - w) / kTwoPi;
    CHECK(std::abs(turns - std::round(turns)) < 1e-9);
  }
}

TEST_CASE("wrap_positive range") {
  CHECK(wrap_positive(-0.5) == doctest::Approx(kTwoPi - 0.5));
  CHECK(wrap_positive(kTwoPi) == 0.0);
  CHECK(wrap_positive(-1e-18) < kTwoPi);
}

TEST_CASE("apply_transform examples") {
  const Pose2D p{0.3, -0.2, 1.1};
  CHECK(apply_transform(Transform2D{}, p) == Pose2D{0.3, -0.2, 1.1});

  const Pose2D r = apply_transform(Transform2D{{0.0, 0.0}, kPi / 2}, Pose2D{1.0, 0.0, 0.0});
  CHECK(r.x == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r.y == doctest::Approx(1.0));
  CHECK(r.theta == doctest::Approx(kPi / 2));

  // Frozen from the homogeneous-matrix oracle below.
  const Pose2D q = apply_transform(Transform2D{{0.1, 0.2}, kPi / 4}, Pose2D{0.1, 0.0, kPi});
  CHECK(q.x == doctest::Approx(0.17071067811865476).epsilon(1e-15));
  CHECK(q.y == doctest::Approx(0.27071067811865476).epsilon(1e-15));
  CHECK(q.theta == doctest::Approx(-2.356194490192345).epsilon(1e-15));

  const auto h = oracle::multiply(oracle::homogeneous(0.1L, 0.2L, oracle::kPiL / 4), oracle::homogeneous(0.1L, 0.0L, oracle::kPiL));
  const Pose2D o = oracle::pose_of(h);
  CHECK(q.x == doctest::Approx(o.x).epsilon(1e-15));
  CHECK(q.y == doctest::Approx(o.y).epsilon(1e-15));
  CHECK(q.theta == doctest::Approx(o.theta).epsilon(1e-15));
}

TEST_CASE("apply_transform agrees with homogeneous matrices") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int i = 0; i < 500; ++i) {
    const Transform2D t{{u(rng), u(rng)}, a(rng)};
    const Pose2D p{u(rng), u(rng), a(rng)};
    const Pose2D got = apply_transform(t, p);
    const Pose2D want = oracle::pose_of(
        oracle::multiply(oracle::homogeneous(t.translation.x, t.translation.y, t.rotation), oracle::homogeneous(p.x, p.y, p.theta)));
    CHECK(got.x == doctest::Approx(want.x).epsilon(1e-12));
    CHECK(got.y == doctest::Approx(want.y).epsilon(1e-12));
    CHECK(std::abs(wrap_angle(got.theta - want.theta)) < 1e-12);
  }
}

TEST_CASE("inverse round trip over 1000 random transforms") {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int i = 0; i < 1000; ++i) {
    const Transform2D t{{u(rng), u(rng)}, a(rng)};
    const Pose2D p{u(rng), u(rng), a(rng)};
    const Pose2D back = apply_transform(inverse(t), apply_transform(t, p));
    CHECK(std::abs(back.x - p.x) <= 1e-12);
    CHECK(std::abs(back.y - p.y) <= 1e-12);
    CHECK(std::abs(wrap_angle(back.theta - p.theta)) <= 1e-12);
  }
}

TEST_CASE("compose is associative and applies the right operand first") {
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> a(-kPi, kPi);
  for (int i = 0; i < 200; ++i) {
    const Transform2D x{{u(rng), u(rng)}, a(rng)};
    const Transform2D y{{u(rng), u(rng)}, a(rng)};
    const Transform2D z{{u(rng), u(rng)}, a(rng)};
    const Transform2D l = compose(compose(x, y), z);
    const Transform2D r = compose(x, compose(y, z));
    CHECK(l.translation.x == doctest::Approx(r.translation.x).epsilon(1e-12));
    CHECK(l.translation.y == doctest::Approx(r.translation.y).epsilon(1e-12));
    CHECK(std::abs(wrap_angle(l.rotation - r.rotation)) < 1e-12);

    const Pose2D p{u(rng), u(rng), a(rng)};
    const Pose2D seq = apply_transform(x, apply_transform(y, p));
    const Pose2D once = apply_transform(compose(x, y), p);
    CHECK(seq.x == doctest::Approx(once.x).epsilon(1e-12));
    CHECK(seq.y == doctest::Approx(once.y).epsilon(1e-12));
    CHECK(std::abs(wrap_angle(seq.theta - once.theta)) < 1e-12);

    const Transform2D id = compose(x, inverse(x));
    CHECK(std::abs(id.translation.x) < 1e-12);
    CHECK(std::abs(id.translation.y) < 1e-12);
    CHECK(std::abs(id.rotation) < 1e-12);
  }
}

TEST_CASE("to_transform maps the origin pose onto the pose") {
  const Pose2D p{0.2, 0.3, 0.7};
  const Pose2D got = apply_transform(to_transform(p), Pose2D{});
  CHECK(got.x == doctest::Approx(p.x));
  CHECK(got.y == doctest::Approx(p.y));
  CHECK(got.theta == doctest::Approx(p.theta));
}

TEST_CASE("point helpers") {
  const Point3D a{0.0, 0.0, 0.0};
  const Point3D b{0.3, 0.4, 1.2};
  CHECK(distance(a, b) == doctest::Approx(1.3));
  CHECK(lateral_distance(a, b) == doctest::Approx(0.5));
  CHECK(norm(rotate(Vec2{1.0, 0.0}, 1.0)) == doctest::Approx(1.0));
}
