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

#include <random>

#include "haptibot/geometry.hpp"

namespace haptibot {

struct WheelSpeeds {
  double left = 0.0;   // m/s
  double right = 0.0;  // m/s

  friend bool operator==(const WheelSpeeds&, const WheelSpeeds&) = default;
};

/// Two-wheeled tabletop robot.
struct Robot {
  int id = 0;
  Pose2D pose{};
  WheelSpeeds wheels{};
  double max_wheel_speed = 0.30;
  double axle_track = 0.026;
};

/// Advances a robot by dt under constant wheel commands (clamped to +-max) using the
/// exact circular-arc solution. Throws std::invalid_argument when dt <= 0.
Robot step_robot(const Robot& robot, WheelSpeeds command, double dt);

struct MatBounds {
  double width = 0.55;
  double height = 0.55;

  bool contains(double x, double y) const { return x >= 0.0 && x <= width && y >= 0.0 && y <= height; }
};

struct SensorModel {
  double noise_sigma = 0.0;   // m
  double resolution = 0.001;  // m
};

struct MatReading {
  int robot_id = 0;
  Pose2D measured{};
  double timestamp = 0.0;
  bool valid = false;
};

/// Quantizes `value` to the nearest multiple of `resolution`.
double quantize(double value, double resolution);

/// Position fix from the printed mat. Two standard-normal draws are consumed per call
/// regardless of validity so the random stream does not depend on robot placement.
MatReading sense_mat(const Robot& robot, const MatBounds& bounds, const SensorModel& sensor, double timestamp,
                     std::mt19937_64& rng);

}  // namespace haptibot
