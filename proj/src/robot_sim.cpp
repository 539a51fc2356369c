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

#include "haptibot/robot_sim.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace haptibot {

Robot step_robot(const Robot& robot, WheelSpeeds command, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_robot: dt must be > 0");
  Robot next = robot;
  const double vmax = robot.max_wheel_speed;
  next.wheels = {std::clamp(command.left, -vmax, vmax), std::clamp(command.right, -vmax, vmax)};

  const double v = 0.5 * (next.wheels.left + next.wheels.right);
  const double omega = (next.wheels.right - next.wheels.left) / robot.axle_track;
  const double theta = robot.pose.theta;
  // Chord form of the exact arc: the same end point as R (sin(theta + w dt) - sin theta), ...
  // without the cancellation that form suffers when w is small.
  const double half = 0.5 * omega * dt;
  const double chord = std::abs(omega) > 1e-9 ? v * dt * std::sin(half) / half : v * dt;
  next.pose.x += chord * std::cos(theta + half);
  next.pose.y += chord * std::sin(theta + half);
  next.pose.theta = wrap_angle(theta + omega * dt);
  return next;
}

double quantize(double value, double resolution) { return std::round(value / resolution) * resolution; }

MatReading sense_mat(const Robot& robot, const MatBounds& bounds, const SensorModel& sensor, double timestamp,
                     std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  const double nx = gauss(rng);
  const double ny = gauss(rng);

  MatReading reading;
  reading.robot_id = robot.id;
  reading.timestamp = timestamp;
  reading.valid = bounds.contains(robot.pose.x, robot.pose.y);
  if (!reading.valid) return reading;

  const double x = quantize(robot.pose.x + sensor.noise_sigma * nx, sensor.resolution);
  const double y = quantize(robot.pose.y + sensor.noise_sigma * ny, sensor.resolution);
  reading.measured = {std::clamp(x, 0.0, bounds.width), std::clamp(y, 0.0, bounds.height),
                      wrap_angle(robot.pose.theta)};
  return reading;
}

}  // namespace haptibot
