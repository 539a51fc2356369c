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

#include "haptibot/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

namespace haptibot {

using nlohmann::json;

namespace {

std::string fmt_num(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

// Reads one JSON object section, recording type errors and unknown keys.
class SectionReader {
 public:
  SectionReader(const json* obj, std::string path, std::vector<std::string>& errors)
      : obj_(obj), path_(std::move(path)), errors_(errors) {}

  void number(const char* key, double& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (!v->is_number()) {
      type_error(key, "a number");
      return;
    }
    const double d = v->get<double>();
    if (!std::isfinite(d)) {
      errors_.push_back(where(key) + ": must be finite");
      return;
    }
    out = d;
  }

  void integer(const char* key, int& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (!v->is_number_integer()) {
      type_error(key, "an integer");
      return;
    }
    out = v->get<int>();
  }

  void unsigned_integer(const char* key, std::uint64_t& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    const bool ok = v->is_number_unsigned() || (v->is_number_integer() && v->get<std::int64_t>() >= 0);
    if (!ok) {
      type_error(key, "a non-negative integer");
      return;
    }
    out = v->get<std::uint64_t>();
  }

  void vec2_list(const char* key, std::vector<Vec2>& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (!v->is_array()) {
      type_error(key, "an array of [x, y] pairs");
      return;
    }
    std::vector<Vec2> parsed;
    for (const auto& item : *v) {
      if (!item.is_array() || item.size() != 2 || !item[0].is_number() || !item[1].is_number()) {
        type_error(key, "an array of [x, y] pairs");
        return;
      }
      parsed.push_back({item[0].get<double>(), item[1].get<double>()});
    }
    out = std::move(parsed);
  }

  void pose_list(const char* key, std::vector<Pose2D>& out) {
    const json* v = take(key);
    if (v == nullptr) return;
    if (!v->is_array()) {
      type_error(key, "an array of [x, y, theta] triples");
      return;
    }
    std::vector<Pose2D> parsed;
    for (const auto& item : *v) {
      if (!item.is_array() || item.size() != 3 || !item[0].is_number() || !item[1].is_number() ||
          !item[2].is_number()) {
        type_error(key, "an array of [x, y, theta] triples");
        return;
      }
      parsed.push_back({item[0].get<double>(), item[1].get<double>(), item[2].get<double>()});
    }
    out = std::move(parsed);
  }

  /// Returns a reader for a nested object, or a reader over nothing.
  SectionReader section(const char* key) {
    const json* v = take(key);
    if (v != nullptr && !v->is_object()) {
      type_error(key, "an object");
      v = nullptr;
    }
    return SectionReader(v, where(key), errors_);
  }

  void finish() {
    if (obj_ == nullptr) return;
    for (const auto& [key, value] : obj_->items()) {
      if (seen_.count(key) == 0) {
        errors_.push_back(where(key.c_str()) + ": unknown key");
      }
    }
  }

 private:
  const json* take(const char* key) {
    seen_.insert(key);
    if (obj_ == nullptr) return nullptr;
    auto it = obj_->find(key);
    if (it == obj_->end()) return nullptr;
    return &*it;
  }

  std::string where(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  void type_error(const char* key, const char* expected) {
    errors_.push_back(where(key) + ": expected " + expected);
  }

  const json* obj_;
  std::string path_;
  std::vector<std::string>& errors_;
  std::set<std::string> seen_;
};

void require_positive(std::vector<std::string>& errors, const char* name, double v) {
  if (!(v > 0.0)) errors.push_back(std::string(name) + ": must be > 0 (got " + fmt_num(v) + ")");
}

void require_non_negative(std::vector<std::string>& errors, const char* name, double v) {
  if (!(v >= 0.0)) errors.push_back(std::string(name) + ": must be >= 0 (got " + fmt_num(v) + ")");
}

void check_constraints(const Config& c, std::vector<std::string>& errors) {
  require_positive(errors, "mat.width", c.mat.width);
  require_positive(errors, "mat.height", c.mat.height);

  require_positive(errors, "robot.max_wheel_speed", c.robot.max_wheel_speed);
  require_positive(errors, "robot.axle_track", c.robot.axle_track);
  require_positive(errors, "robot.payload_capacity", c.robot.payload_capacity);
  require_non_negative(errors, "robot.sensor_noise", c.robot.sensor_noise);
  require_positive(errors, "robot.sensor_resolution", c.robot.sensor_resolution);
  if (c.robot.sensor_delay_ticks < 0) errors.push_back("robot.sensor_delay_ticks: must be >= 0");
  require_non_negative(errors, "robot.actuator_lag", c.robot.actuator_lag);

  const auto& p = c.platform;
  if (p.count < 1 || p.count > 4) {
    errors.push_back("platform.count: must be within 1-4 (got " + std::to_string(p.count) + ")");
  }
  if (p.robots_per_platform < 2 || p.robots_per_platform > 4) {
    errors.push_back("platform.robots_per_platform: must be within the allowed range 2-4 (got " +
                     std::to_string(p.robots_per_platform) + ")");
  }
  require_positive(errors, "platform.mass", p.mass);
  const double capacity = p.robots_per_platform * c.robot.payload_capacity;
  if (p.mass > capacity) {
    errors.push_back("payload exceeded: platform.mass " + fmt_num(p.mass) + " kg > " +
                     std::to_string(p.robots_per_platform) + " robots x " +
                     fmt_num(c.robot.payload_capacity) + " kg = " + fmt_num(capacity) + " kg");
  }
  require_positive(errors, "platform.mount_radius", p.mount_radius);
  if (!p.mount_offsets.empty()) {
    if (static_cast<int>(p.mount_offsets.size()) != p.robots_per_platform) {
      errors.push_back("platform.mount_offsets: expected " + std::to_string(p.robots_per_platform) +
                       " offsets (one per robot), got " + std::to_string(p.mount_offsets.size()));
    }
    for (std::size_t i = 0; i < p.mount_offsets.size(); ++i) {
      for (std::size_t j = i + 1; j < p.mount_offsets.size(); ++j) {
        if (norm(p.mount_offsets[i] - p.mount_offsets[j]) < 1e-9) {
          errors.push_back("platform.mount_offsets: offsets " + std::to_string(i) + " and " +
                           std::to_string(j) + " coincide");
        }
      }
    }
  }
  require_positive(errors, "platform.footprint_half_extent", p.footprint_half_extent);
  require_positive(errors, "platform.steering_rate", p.steering_rate);
  require_positive(errors, "platform.speed_cap", p.speed_cap);
  require_positive(errors, "platform.omega_cap", p.omega_cap);
  if (2.0 * p.footprint_half_extent >= std::min(c.mat.width, c.mat.height)) {
    errors.push_back("platform.footprint_half_extent: platform does not fit on the mat");
  }
  if (!p.initial_poses.empty()) {
    if (static_cast<int>(p.initial_poses.size()) != p.count) {
      errors.push_back("platform.initial_poses: expected " + std::to_string(p.count) + " poses, got " +
                       std::to_string(p.initial_poses.size()));
    }
    for (const auto& pose : p.initial_poses) {
      if (pose.x < 0.0 || pose.x > c.mat.width || pose.y < 0.0 || pose.y > c.mat.height) {
        errors.push_back("platform.initial_poses: pose outside the mat");
        break;
      }
    }
  }

  const auto& a = c.array;
  if (a.rows < 1) errors.push_back("array.rows: must be >= 1");
  if (a.cols < 1) errors.push_back("array.cols: must be >= 1");
  require_positive(errors, "array.pitch", a.pitch);
  require_positive(errors, "array.element_radius", a.element_radius);
  require_positive(errors, "array.frequency", a.frequency);
  require_positive(errors, "array.reference_amplitude", a.reference_amplitude);
  require_non_negative(errors, "array.mounting_height", a.mounting_height);
  const double half_w = 0.5 * a.cols * a.pitch;
  const double half_h = 0.5 * a.rows * a.pitch;
  if (std::max(half_w, half_h) > p.footprint_half_extent) {
    errors.push_back("array larger than platform footprint: array half extent " +
                     fmt_num(std::max(half_w, half_h)) + " m > footprint half extent " +
                     fmt_num(p.footprint_half_extent) + " m");
  }

  const auto& ac = c.acoustics;
  require_positive(errors, "acoustics.speed_of_sound", ac.speed_of_sound);
  require_positive(errors, "acoustics.z_min", ac.z_min);
  if (!(ac.z_max > ac.z_min)) errors.push_back("acoustics.z_max: must exceed acoustics.z_min");
  require_non_negative(errors, "acoustics.lateral_margin", ac.lateral_margin);
  require_positive(errors, "acoustics.focus_min_height", ac.focus_min_height);
  require_positive(errors, "acoustics.quality_scale", ac.quality_scale);
  require_positive(errors, "acoustics.stm_update_rate", ac.stm_update_rate);
  require_positive(errors, "acoustics.modulation_hz", ac.modulation_hz);
  if (!(ac.modulation_duty > 0.0 && ac.modulation_duty < 1.0)) {
    errors.push_back("acoustics.modulation_duty: must be within (0, 1)");
  }

  const auto& r = c.rates;
  require_positive(errors, "rates.sim_hz", r.sim_hz);
  require_positive(errors, "rates.control_hz", r.control_hz);
  require_positive(errors, "rates.snapshot_hz", r.snapshot_hz);
  if (r.sim_hz > 0.0 && r.control_hz > 0.0) {
    const double ratio = r.sim_hz / r.control_hz;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0) {
      errors.push_back("rates.sim_hz: must be an integer multiple of rates.control_hz");
    }
  }

  require_positive(errors, "controller.kp", c.controller.kp);
  require_positive(errors, "controller.ktheta", c.controller.ktheta);
  require_non_negative(errors, "controller.deadband_position", c.controller.deadband_position);
  require_non_negative(errors, "controller.deadband_angle_deg", c.controller.deadband_angle_deg);

  const auto& t = c.tracking;
  if (!(t.alpha > 0.0 && t.alpha <= 1.0)) errors.push_back("tracking.alpha: must be within (0, 1]");
  require_positive(errors, "tracking.staleness_timeout", t.staleness_timeout);
  require_non_negative(errors, "tracking.prediction_horizon_ticks", t.prediction_horizon_ticks);
  require_positive(errors, "tracking.rebalance_period", t.rebalance_period);
}

}  // namespace

int Config::substeps_per_tick() const {
  return static_cast<int>(std::lround(rates.sim_hz / rates.control_hz));
}

std::vector<Vec2> Config::effective_mounts() const {
  if (!platform.mount_offsets.empty()) return platform.mount_offsets;
  std::vector<Vec2> mounts;
  const int n = platform.robots_per_platform;
  for (int i = 0; i < n; ++i) {
    const double a = kTwoPi * i / n;
    mounts.push_back({platform.mount_radius * std::cos(a), platform.mount_radius * std::sin(a)});
  }
  return mounts;
}

std::vector<Pose2D> Config::effective_initial_poses() const {
  if (!platform.initial_poses.empty()) return platform.initial_poses;
  std::vector<Pose2D> poses;
  for (int i = 0; i < platform.count; ++i) {
    poses.push_back({mat.width * (i + 1) / (platform.count + 1), 0.5 * mat.height, 0.0});
  }
  return poses;
}

ConfigResult validate_config(const json& doc) {
  ConfigResult result;
  auto& errors = result.errors;
  if (!doc.is_object() && !doc.is_null()) {
    errors.push_back("config: top level must be a JSON object");
    return result;
  }
  Config c;
  SectionReader root(doc.is_object() ? &doc : nullptr, "", errors);

  {
    auto s = root.section("mat");
    s.number("width", c.mat.width);
    s.number("height", c.mat.height);
    s.finish();
  }
  {
    auto s = root.section("robot");
    s.number("max_wheel_speed", c.robot.max_wheel_speed);
    s.number("axle_track", c.robot.axle_track);
    s.number("payload_capacity", c.robot.payload_capacity);
    s.number("sensor_noise", c.robot.sensor_noise);
    s.number("sensor_resolution", c.robot.sensor_resolution);
    s.integer("sensor_delay_ticks", c.robot.sensor_delay_ticks);
    s.number("actuator_lag", c.robot.actuator_lag);
    s.finish();
  }
  {
    auto s = root.section("platform");
    s.integer("count", c.platform.count);
    s.integer("robots_per_platform", c.platform.robots_per_platform);
    s.number("mass", c.platform.mass);
    s.number("mount_radius", c.platform.mount_radius);
    s.vec2_list("mount_offsets", c.platform.mount_offsets);
    s.number("footprint_half_extent", c.platform.footprint_half_extent);
    s.number("steering_rate", c.platform.steering_rate);
    s.number("speed_cap", c.platform.speed_cap);
    s.number("omega_cap", c.platform.omega_cap);
    s.pose_list("initial_poses", c.platform.initial_poses);
    s.finish();
  }
  {
    auto s = root.section("array");
    s.integer("rows", c.array.rows);
    s.integer("cols", c.array.cols);
    s.number("pitch", c.array.pitch);
    s.number("element_radius", c.array.element_radius);
    s.number("frequency", c.array.frequency);
    s.number("reference_amplitude", c.array.reference_amplitude);
    s.number("mounting_height", c.array.mounting_height);
    s.finish();
  }
  {
    auto s = root.section("acoustics");
    s.number("speed_of_sound", c.acoustics.speed_of_sound);
    s.number("z_min", c.acoustics.z_min);
    s.number("z_max", c.acoustics.z_max);
    s.number("lateral_margin", c.acoustics.lateral_margin);
    s.number("focus_min_height", c.acoustics.focus_min_height);
    s.number("quality_scale", c.acoustics.quality_scale);
    s.number("stm_update_rate", c.acoustics.stm_update_rate);
    s.number("modulation_hz", c.acoustics.modulation_hz);
    s.number("modulation_duty", c.acoustics.modulation_duty);
    s.finish();
  }
  {
    auto s = root.section("rates");
    s.number("sim_hz", c.rates.sim_hz);
    s.number("control_hz", c.rates.control_hz);
    s.number("snapshot_hz", c.rates.snapshot_hz);
    s.finish();
  }
  {
    auto s = root.section("controller");
    s.number("kp", c.controller.kp);
    s.number("ktheta", c.controller.ktheta);
    s.number("deadband_position", c.controller.deadband_position);
    s.number("deadband_angle_deg", c.controller.deadband_angle_deg);
    s.finish();
  }
  {
    auto s = root.section("tracking");
    s.number("alpha", c.tracking.alpha);
    s.number("staleness_timeout", c.tracking.staleness_timeout);
    s.number("prediction_horizon_ticks", c.tracking.prediction_horizon_ticks);
    s.number("rebalance_period", c.tracking.rebalance_period);
    s.finish();
  }
  root.unsigned_integer("seed", c.seed);
  root.finish();

  check_constraints(c, errors);
  if (errors.empty()) result.config = std::move(c);
  return result;
}

json config_to_json(const Config& c) {
  json mounts = json::array();
  for (const auto& m : c.platform.mount_offsets) mounts.push_back({m.x, m.y});
  json poses = json::array();
  for (const auto& p : c.platform.initial_poses) poses.push_back({p.x, p.y, p.theta});
  return json{
      {"mat", {{"width", c.mat.width}, {"height", c.mat.height}}},
      {"robot",
       {{"max_wheel_speed", c.robot.max_wheel_speed},
        {"axle_track", c.robot.axle_track},
        {"payload_capacity", c.robot.payload_capacity},
        {"sensor_noise", c.robot.sensor_noise},
        {"sensor_resolution", c.robot.sensor_resolution},
        {"sensor_delay_ticks", c.robot.sensor_delay_ticks},
        {"actuator_lag", c.robot.actuator_lag}}},
      {"platform",
       {{"count", c.platform.count},
        {"robots_per_platform", c.platform.robots_per_platform},
        {"mass", c.platform.mass},
        {"mount_radius", c.platform.mount_radius},
        {"mount_offsets", mounts},
        {"footprint_half_extent", c.platform.footprint_half_extent},
        {"steering_rate", c.platform.steering_rate},
        {"speed_cap", c.platform.speed_cap},
        {"omega_cap", c.platform.omega_cap},
        {"initial_poses", poses}}},
      {"array",
       {{"rows", c.array.rows},
        {"cols", c.array.cols},
        {"pitch", c.array.pitch},
        {"element_radius", c.array.element_radius},
        {"frequency", c.array.frequency},
        {"reference_amplitude", c.array.reference_amplitude},
        {"mounting_height", c.array.mounting_height}}},
      {"acoustics",
       {{"speed_of_sound", c.acoustics.speed_of_sound},
        {"z_min", c.acoustics.z_min},
        {"z_max", c.acoustics.z_max},
        {"lateral_margin", c.acoustics.lateral_margin},
        {"focus_min_height", c.acoustics.focus_min_height},
        {"quality_scale", c.acoustics.quality_scale},
        {"stm_update_rate", c.acoustics.stm_update_rate},
        {"modulation_hz", c.acoustics.modulation_hz},
        {"modulation_duty", c.acoustics.modulation_duty}}},
      {"rates",
       {{"sim_hz", c.rates.sim_hz}, {"control_hz", c.rates.control_hz}, {"snapshot_hz", c.rates.snapshot_hz}}},
      {"controller",
       {{"kp", c.controller.kp},
        {"ktheta", c.controller.ktheta},
        {"deadband_position", c.controller.deadband_position},
        {"deadband_angle_deg", c.controller.deadband_angle_deg}}},
      {"tracking",
       {{"alpha", c.tracking.alpha},
        {"staleness_timeout", c.tracking.staleness_timeout},
        {"prediction_horizon_ticks", c.tracking.prediction_horizon_ticks},
        {"rebalance_period", c.tracking.rebalance_period}}},
      {"seed", c.seed},
  };
}

Config load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file: " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error("config " + path + ": " + e.what());
  }
  auto result = validate_config(doc);
  if (!result.ok()) {
    std::string msg = "invalid config " + path + ":";
    for (const auto& e : result.errors) msg += "\n  " + e;
    throw std::runtime_error(msg);
  }
  return *result.config;
}

}  // namespace haptibot
