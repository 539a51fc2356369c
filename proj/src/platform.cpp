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

#include "haptibot/platform.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace haptibot {

namespace {

void place_robots(Platform& p, const std::vector<WheelSpeeds>* wheels) {
  const auto arms = p.lever_arms();
  for (std::size_t i = 0; i < p.robots.size(); ++i) {
    auto& r = p.robots[i];
    r.pose = {p.pose.x + arms[i].x, p.pose.y + arms[i].y, wrap_angle(p.headings[i])};
    if (wheels != nullptr) r.wheels = (*wheels)[i];
  }
}

}  // namespace

DriveLimits DriveLimits::from_config(const Config& c) {
  return {c.robot.max_wheel_speed, c.robot.axle_track, c.platform.steering_rate, c.robot.actuator_lag};
}

ControllerGains ControllerGains::from_config(const Config& c) {
  return {c.controller.kp,         c.controller.ktheta,
          c.platform.speed_cap,    c.platform.omega_cap,
          c.controller.deadband_position, c.deadband_angle()};
}

std::vector<Vec2> Platform::lever_arms() const {
  std::vector<Vec2> arms;
  arms.reserve(mounts.size());
  for (const auto& m : mounts) arms.push_back(rotate(m, pose.theta));
  return arms;
}

Platform make_platform(int id, const Pose2D& pose, std::vector<Vec2> mounts, double footprint_half_extent,
                       const DriveLimits& limits, int first_robot_id) {
  Platform p;
  p.id = id;
  p.pose = {pose.x, pose.y, wrap_angle(pose.theta)};
  p.mounts = std::move(mounts);
  p.headings.assign(p.mounts.size(), p.pose.theta);
  p.drive_speeds.assign(p.mounts.size(), 0.0);
  p.footprint_half_extent = footprint_half_extent;
  for (std::size_t i = 0; i < p.mounts.size(); ++i) {
    Robot r;
    r.id = first_robot_id + static_cast<int>(i);
    r.max_wheel_speed = limits.max_wheel_speed;
    r.axle_track = limits.axle_track;
    p.robots.push_back(r);
  }
  place_robots(p, nullptr);
  return p;
}

Allocation twist_to_module_commands(const Platform& platform, const Twist2D& desired, const DriveLimits& limits,
                                    double dt) {
  const auto arms = platform.lever_arms();
  std::vector<Vec2> field;
  field.reserve(arms.size());
  double peak = 0.0;
  for (const auto& r : arms) {
    const Vec2 u{desired.vx - desired.omega * r.y, desired.vy + desired.omega * r.x};
    field.push_back(u);
    peak = std::max(peak, norm(u));
  }

  Allocation out;
  out.scale = peak > limits.max_wheel_speed ? limits.max_wheel_speed / peak : 1.0;
  const double max_steer = limits.steering_rate * dt;
  const double half_track = 0.5 * limits.axle_track;
  for (std::size_t i = 0; i < field.size(); ++i) {
    ModuleCommand cmd;
    cmd.required_velocity = out.scale * field[i];
    const double speed = norm(cmd.required_velocity);
    const double current = platform.headings[i];
    const double wanted = speed > 1e-12 ? std::atan2(cmd.required_velocity.y, cmd.required_velocity.x) : current;
    const double steer = std::clamp(wrap_angle(wanted - current), -max_steer, max_steer);
    cmd.heading = wrap_angle(current + steer);
    cmd.steer_rate = steer / dt;

    // Projection drive: only the component along the new heading, never in reverse.
    double drive = speed * std::cos(wrap_angle(wanted - cmd.heading));
    drive = std::max(0.0, drive);
    const double differential = std::abs(cmd.steer_rate) * half_track;
    drive = std::min(drive, std::max(0.0, limits.max_wheel_speed - differential));
    cmd.drive_speed = drive;
    cmd.wheels = {drive - cmd.steer_rate * half_track, drive + cmd.steer_rate * half_track};
    out.modules.push_back(cmd);
  }
  return out;
}

Twist2D reconstruct_twist(std::span<const Vec2> lever_arms, std::span<const Vec2> module_velocities) {
  const std::size_t n = lever_arms.size();
  if (n == 0 || module_velocities.size() != n) throw std::invalid_argument("reconstruct_twist: size mismatch");
  Vec2 c{};
  Vec2 w_mean{};
  for (std::size_t i = 0; i < n; ++i) {
    c = c + lever_arms[i];
    w_mean = w_mean + module_velocities[i];
  }
  c = (1.0 / n) * c;
  w_mean = (1.0 / n) * w_mean;
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = lever_arms[i] - c;
    num += cross(a, module_velocities[i] - w_mean);
    den += dot(a, a);
  }
  const double omega = den > 0.0 ? num / den : 0.0;
  return {w_mean.x + omega * c.y, w_mean.y - omega * c.x, omega};
}

std::optional<Pose2D> estimate_platform_pose(std::span<const MatReading> readings, std::span<const Vec2> mounts) {
  if (readings.size() != mounts.size()) throw std::invalid_argument("estimate_platform_pose: size mismatch");
  Vec2 m_mean{};
  Vec2 p_mean{};
  int valid = 0;
  for (std::size_t i = 0; i < readings.size(); ++i) {
    if (!readings[i].valid) continue;
    m_mean = m_mean + mounts[i];
    p_mean = p_mean + Vec2{readings[i].measured.x, readings[i].measured.y};
    ++valid;
  }
  if (valid < 2) return std::nullopt;
  m_mean = (1.0 / valid) * m_mean;
  p_mean = (1.0 / valid) * p_mean;

  double s_cross = 0.0;
  double s_dot = 0.0;
  for (std::size_t i = 0; i < readings.size(); ++i) {
    if (!readings[i].valid) continue;
    const Vec2 m = mounts[i] - m_mean;
    const Vec2 p = Vec2{readings[i].measured.x, readings[i].measured.y} - p_mean;
    s_cross += cross(m, p);
    s_dot += dot(m, p);
  }
  const double theta = std::atan2(s_cross, s_dot);
  const Vec2 t = p_mean - rotate(m_mean, theta);
  return Pose2D{t.x, t.y, wrap_angle(theta)};
}

Twist2D goto_twist(const Pose2D& estimated, const Pose2D& target, const ControllerGains& gains) {
  Twist2D out;
  const Vec2 error{target.x - estimated.x, target.y - estimated.y};
  if (norm(error) > gains.deadband_position) {
    Vec2 v = gains.kp * error;
    const double speed = norm(v);
    if (speed > gains.speed_cap) v = (gains.speed_cap / speed) * v;
    out.vx = v.x;
    out.vy = v.y;
  }
  const double angle_error = wrap_angle(target.theta - estimated.theta);
  if (std::abs(angle_error) > gains.deadband_angle) {
    out.omega = std::clamp(gains.ktheta * angle_error, -gains.omega_cap, gains.omega_cap);
  }
  return out;
}

PlatformBounds PlatformBounds::for_mat(const MatBounds& mat, double footprint_half_extent) {
  return {footprint_half_extent, mat.width - footprint_half_extent, footprint_half_extent,
          mat.height - footprint_half_extent};
}

Vec2 PlatformBounds::clamp(Vec2 p) const { return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)}; }

Pose2D integrate_twist(const Pose2D& pose, const Twist2D& twist, double dt) {
  const Vec2 body = rotate(Vec2{twist.vx, twist.vy}, -pose.theta);
  const double angle = twist.omega * dt;
  Vec2 delta_body;
  if (std::abs(angle) > 1e-12) {
    const double s = std::sin(angle);
    const double c = std::cos(angle);
    delta_body = {(s * body.x + (c - 1.0) * body.y) / twist.omega, ((1.0 - c) * body.x + s * body.y) / twist.omega};
  } else {
    delta_body = dt * body;
  }
  const Vec2 delta = rotate(delta_body, pose.theta);
  return {pose.x + delta.x, pose.y + delta.y, wrap_angle(pose.theta + angle)};
}

Platform step_platform(const Platform& platform, const Twist2D& desired, const DriveLimits& limits,
                       const PlatformBounds& bounds, double dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_platform: dt must be > 0");
  const Allocation alloc = twist_to_module_commands(platform, desired, limits, dt);

  Platform next = platform;
  const double blend = limits.actuator_lag > 0.0 ? 1.0 - std::exp(-dt / limits.actuator_lag) : 1.0;
  std::vector<Vec2> velocities;
  std::vector<WheelSpeeds> wheels;
  for (std::size_t i = 0; i < alloc.modules.size(); ++i) {
    const auto& cmd = alloc.modules[i];
    next.headings[i] = cmd.heading;
    next.drive_speeds[i] += blend * (cmd.drive_speed - next.drive_speeds[i]);
    velocities.push_back(next.drive_speeds[i] * Vec2{std::cos(cmd.heading), std::sin(cmd.heading)});
    wheels.push_back(cmd.wheels);
  }
  const auto arms = platform.lever_arms();
  next.last_twist = reconstruct_twist(arms, velocities);
  next.last_scale = alloc.scale;
  next.pose = integrate_twist(platform.pose, next.last_twist, dt);

  const Vec2 centre{next.pose.x, next.pose.y};
  const Vec2 clamped = bounds.clamp(centre);
  next.edge_limited = !(clamped == centre);
  next.pose.x = clamped.x;
  next.pose.y = clamped.y;
  place_robots(next, &wheels);
  return next;
}

}  // namespace haptibot
