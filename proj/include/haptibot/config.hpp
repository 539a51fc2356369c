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

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "haptibot/geometry.hpp"

namespace haptibot {

// Every field carries its documented default; docs/config.md lists them.

struct MatParams {
  double width = 0.55;   // m
  double height = 0.55;  // m

  friend bool operator==(const MatParams&, const MatParams&) = default;
};

struct RobotParams {
  double max_wheel_speed = 0.30;    // m/s
  double axle_track = 0.026;        // m
  double payload_capacity = 0.2;    // kg per robot
  double sensor_noise = 0.0;        // m, per-axis standard deviation
  double sensor_resolution = 0.001; // m
  int sensor_delay_ticks = 0;       // control ticks
  double actuator_lag = 0.0;        // s, first-order time constant; 0 disables

  friend bool operator==(const RobotParams&, const RobotParams&) = default;
};

struct PlatformParams {
  int count = 2;
  int robots_per_platform = 2;
  double mass = 0.35;                     // kg, whole platform incl. array
  double mount_radius = 0.06;             // m, used when mount_offsets is empty
  std::vector<Vec2> mount_offsets;        // platform frame; empty = evenly spaced ring
  double footprint_half_extent = 0.09;    // m
  double steering_rate = kTwoPi;          // rad/s, module pivot rate
  double speed_cap = 0.25;                // m/s
  double omega_cap = 1.5;                 // rad/s
  std::vector<Pose2D> initial_poses;      // empty = spread along the mat's mid line

  friend bool operator==(const PlatformParams&, const PlatformParams&) = default;
};

struct ArrayParams {
  int rows = 16;
  int cols = 16;
  double pitch = 0.010;               // m
  double element_radius = 0.0045;     // m
  double frequency = 40000.0;         // Hz
  double reference_amplitude = 1.0;   // Pa*m, on-axis amplitude 1 m from one element
  double mounting_height = 0.03;      // m, array surface above the mat

  friend bool operator==(const ArrayParams&, const ArrayParams&) = default;
};

struct AcousticParams {
  double speed_of_sound = 346.0;   // m/s
  double z_min = 0.05;             // m above array surface, serviceable frustum
  double z_max = 0.40;             // m above array surface
  double lateral_margin = 0.05;    // m beyond the array footprint
  double focus_min_height = 0.02;  // m, hard floor for phase solving
  double quality_scale = 0.1;      // m, miss distance at which quality reaches 0
  double stm_update_rate = 1000.0; // Hz
  double modulation_hz = 200.0;
  double modulation_duty = 0.5;

  friend bool operator==(const AcousticParams&, const AcousticParams&) = default;
};

struct RateParams {
  double sim_hz = 1000.0;
  double control_hz = 50.0;
  double snapshot_hz = 30.0;

  friend bool operator==(const RateParams&, const RateParams&) = default;
};

struct ControllerParams {
  double kp = 3.0;                  // 1/s
  double ktheta = 4.0;              // 1/s
  double deadband_position = 0.002; // m
  double deadband_angle_deg = 2.0;  // degrees

  friend bool operator==(const ControllerParams&, const ControllerParams&) = default;
};

struct TrackingParams {
  double alpha = 0.6;
  double staleness_timeout = 0.5;       // s
  double prediction_horizon_ticks = 1.0;
  double rebalance_period = 0.5;        // s

  friend bool operator==(const TrackingParams&, const TrackingParams&) = default;
};

struct Config {
  MatParams mat;
  RobotParams robot;
  PlatformParams platform;
  ArrayParams array;
  AcousticParams acoustics;
  RateParams rates;
  ControllerParams controller;
  TrackingParams tracking;
  std::uint64_t seed = 1;

  int substeps_per_tick() const;
  double control_period() const { return 1.0 / rates.control_hz; }
  double sim_period() const { return 1.0 / rates.sim_hz; }
  double deadband_angle() const { return controller.deadband_angle_deg * kPi / 180.0; }

  /// Mount offsets with the ring default applied.
  std::vector<Vec2> effective_mounts() const;
  /// Initial platform poses with the mid-line default applied.
  std::vector<Pose2D> effective_initial_poses() const;

  friend bool operator==(const Config&, const Config&) = default;
};

struct ConfigResult {
  std::optional<Config> config;
  std::vector<std::string> errors;  // every violated constraint, in document order

  bool ok() const { return config.has_value(); }
};

/// Parses and checks a configuration document. Missing keys take defaults,
/// unknown keys are errors. All violations are collected.
ConfigResult validate_config(const nlohmann::json& doc);

/// Full effective configuration, every field present.
nlohmann::json config_to_json(const Config& config);

/// Reads and validates a JSON file; throws std::runtime_error listing every error.
Config load_config_file(const std::string& path);

}  // namespace haptibot
