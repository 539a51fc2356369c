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

#include <optional>
#include <span>
#include <vector>

#include "haptibot/config.hpp"
#include "haptibot/geometry.hpp"
#include "haptibot/robot_sim.hpp"

namespace haptibot {

/// Planar rigid-body velocity. (vx, vy) is the platform centre's velocity in the mat frame.
struct Twist2D {
  double vx = 0.0;
  double vy = 0.0;
  double omega = 0.0;

  friend bool operator==(const Twist2D&, const Twist2D&) = default;
};

/// Drive-module limits shared by every robot under a platform.
struct DriveLimits {
  double max_wheel_speed = 0.30;
  double axle_track = 0.026;
  double steering_rate = kTwoPi;  // rad/s
  double actuator_lag = 0.0;      // s, 0 = commands act immediately

  static DriveLimits from_config(const Config& config);
};

/// Rigid transducer platform riding on 2-4 pivot-mounted differential-drive modules.
///
/// Module i sits at `mounts[i]` in the platform frame. Its heading is kept in the mat
/// frame and steered independently of the platform's own orientation.
struct Platform {
  int id = 0;
  Pose2D pose{};
  std::vector<Vec2> mounts;
  std::vector<double> headings;      // mat frame
  std::vector<double> drive_speeds;  // realized forward speed per module, m/s
  double footprint_half_extent = 0.09;
  bool edge_limited = false;
  double last_scale = 1.0;
  Twist2D last_twist{};              // realized twist of the last step
  std::vector<Robot> robots;         // ground truth, derived rigidly from the pose

  /// Mounts rotated into the mat frame (lever arms from the platform centre).
  std::vector<Vec2> lever_arms() const;
};

/// Builds a platform at `pose` with headings at the platform orientation and robots placed.
Platform make_platform(int id, const Pose2D& pose, std::vector<Vec2> mounts, double footprint_half_extent,
                       const DriveLimits& limits, int first_robot_id);

struct ModuleCommand {
  Vec2 required_velocity{};  // scaled rigid-body field at the mount
  double heading = 0.0;      // after this step's steering
  double steer_rate = 0.0;   // rad/s over the step
  double drive_speed = 0.0;  // commanded forward speed, >= 0
  WheelSpeeds wheels{};
};

struct Allocation {
  std::vector<ModuleCommand> modules;
  double scale = 1.0;  // in (0, 1]
};

/// Rigid-body velocity field at each mount, uniformly scaled so no module needs more than
/// the maximum wheel speed, then turned into steer-and-drive commands with projection drive.
Allocation twist_to_module_commands(const Platform& platform, const Twist2D& desired, const DriveLimits& limits,
                                    double dt);

/// Least-squares twist explaining the given module velocities (mat frame).
Twist2D reconstruct_twist(std::span<const Vec2> lever_arms, std::span<const Vec2> module_velocities);

/// Rigid registration (2D Procrustes, no scaling) of mount offsets onto valid readings.
/// `readings[i]` belongs to `mounts[i]`. Returns nullopt with fewer than two valid readings.
std::optional<Pose2D> estimate_platform_pose(std::span<const MatReading> readings, std::span<const Vec2> mounts);

struct ControllerGains {
  double kp = 3.0;
  double ktheta = 4.0;
  double speed_cap = 0.25;
  double omega_cap = 1.5;
  double deadband_position = 0.002;
  double deadband_angle = 2.0 * kPi / 180.0;

  static ControllerGains from_config(const Config& config);
};

/// Proportional go-to law with caps. Position and heading each fall silent inside their deadband.
Twist2D goto_twist(const Pose2D& estimated, const Pose2D& target, const ControllerGains& gains);

/// Axis-aligned region the platform centre may occupy: the mat shrunk by the footprint.
struct PlatformBounds {
  double x_min = 0.0;
  double x_max = 0.0;
  double y_min = 0.0;
  double y_max = 0.0;

  static PlatformBounds for_mat(const MatBounds& mat, double footprint_half_extent);
  bool contains(Vec2 p) const { return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max; }
  Vec2 clamp(Vec2 p) const;
};

/// Exact constant-body-twist (screw) update of a planar pose.
Pose2D integrate_twist(const Pose2D& pose, const Twist2D& twist, double dt);

/// One simulation step: allocate, steer, drive, integrate the realized twist, project onto
/// the bounds (flagging edge_limited) and re-derive robot poses. Throws on dt <= 0.
Platform step_platform(const Platform& platform, const Twist2D& desired, const DriveLimits& limits,
                       const PlatformBounds& bounds, double dt);

}  // namespace haptibot
