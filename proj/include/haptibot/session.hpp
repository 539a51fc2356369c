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

#include <array>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "haptibot/acoustics.hpp"
#include "haptibot/config.hpp"
#include "haptibot/platform.hpp"
#include "haptibot/scenarios.hpp"
#include "haptibot/tracking.hpp"

namespace haptibot {

struct RobotView {
  int id = 0;
  Pose2D pose{};

  friend bool operator==(const RobotView&, const RobotView&) = default;
};

struct PlatformView {
  int id = 0;
  Pose2D pose{};
  std::optional<Hand> hand;
  std::optional<Point3D> focus;  // delivered, absent when not emitting for a hand
  double quality = 0.0;
  bool edge_limited = false;
  bool emitting = false;  // AM envelope state at snapshot time

  friend bool operator==(const PlatformView&, const PlatformView&) = default;
};

struct HandView {
  Hand hand = Hand::kLeft;
  std::optional<Point3D> position;  // filtered; absent before the first tracked frame
  bool stale = true;

  friend bool operator==(const HandView&, const HandView&) = default;
};

struct MetricsSummary {
  std::uint64_t rows = 0;
  std::uint64_t churn = 0;
  double served_area_m2 = 0.0;
  std::array<std::optional<double>, kHandCount> mean_error{};  // m

  friend bool operator==(const MetricsSummary&, const MetricsSummary&) = default;
};

/// World state as broadcast to clients.
struct StateSnapshot {
  std::uint64_t tick = 0;
  double t = 0.0;
  std::vector<RobotView> robots;
  std::vector<PlatformView> platforms;
  std::vector<HandView> hands;
  std::vector<ScenarioEvent> events;  // since the previous snapshot
  MetricsSummary metrics;
  std::optional<std::string> scenario;

  friend bool operator==(const StateSnapshot&, const StateSnapshot&) = default;
};

nlohmann::json snapshot_to_json(const StateSnapshot& snapshot);
StateSnapshot snapshot_from_json(const nlohmann::json& j);

/// One control tick of metrics.
struct MetricsRow {
  double t = 0.0;
  std::array<std::optional<double>, kHandCount> error{};  // lateral focus-to-hand, m
  std::vector<std::optional<double>> quality;             // per platform
  std::uint64_t churn = 0;                                // cumulative
  double edge_limited_fraction = 0.0;
  double served_area_m2 = 0.0;                            // cumulative

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

inline constexpr double kBaselineWidth = 0.63;   // m, fixed-array device workspace
inline constexpr double kBaselineDepth = 0.48;   // m
inline constexpr double kServedCell = 0.01;      // m, served-area grid

struct CoverageSummary {
  double mat_area_m2 = 0.0;
  double baseline_area_m2 = 0.0;
  double effective_area_m2 = 0.0;  // mat grown by the lateral focal margin on every side
  double effective_gain = 0.0;     // effective / baseline - 1
};

CoverageSummary coverage_summary(const Config& config);

/// Header, one row per control tick, then a `# coverage ...` comment line.
void write_metrics_csv(const Config& config, const std::vector<MetricsRow>& rows, std::ostream& out);

enum class SubmitStatus { kQueued, kOutOfOrder, kNonFinite };

/// Per-platform control and acoustic output of the latest tick.
struct PlatformOutput {
  std::optional<Hand> hand;
  Pose2D target{};
  bool has_focus = false;
  Point3D requested{};
  PhaseSolution solution;
  bool emitting = false;
};

/// The simulation and control loop. Single-threaded; every mutation goes through
/// submit(), load_scenario(), stop_scenario(), reset() or tick().
class Session {
 public:
  /// `config` must already be validated.
  explicit Session(Config config);

  const Config& config() const { return config_; }

  /// Validates and queues a frame; it is ingested by the first tick whose start time is >= t.
  /// Rejected frames never reach session state.
  SubmitStatus submit(const HandFrame& frame);

  void load_scenario(const Scenario& scenario);
  void stop_scenario();
  /// Back to the initial state with a new seed. The scenario is unloaded.
  void reset(std::uint64_t seed);

  void tick();

  std::uint64_t tick_index() const { return tick_; }
  /// Start time of the next tick.
  double time() const;
  double time_at(std::uint64_t tick) const;

  const std::vector<Platform>& platforms() const { return platforms_; }
  const std::vector<Pose2D>& estimates() const { return estimates_; }
  const std::vector<PlatformOutput>& outputs() const { return outputs_; }
  const HandTracker& tracker() const { return tracker_; }
  const Assignment& assignment() const { return assignment_; }
  std::uint64_t churn() const { return churn_; }
  std::uint64_t assignment_runs() const { return assignment_runs_; }
  const std::vector<MetricsRow>& metrics() const { return metrics_; }
  const std::vector<ScenarioEvent>& event_log() const { return event_log_; }
  const std::optional<ScenarioRuntime>& scenario() const { return scenario_; }
  PlatformBounds bounds() const { return bounds_; }

  std::uint64_t rejected_out_of_order() const { return rejected_out_of_order_; }
  std::uint64_t rejected_non_finite() const { return rejected_non_finite_; }

  /// Current state; events are those accumulated since the last take_snapshot().
  StateSnapshot snapshot() const;
  StateSnapshot take_snapshot();

  /// FNV-1a over all simulation state. Rejection counters are diagnostics and excluded.
  std::uint64_t state_hash() const;

 private:
  struct FocusOverride {
    Point3D focus{};
    double until = 0.0;
    double modulation_hz = 200.0;
    std::vector<Point3D> path;  // swept at update_rate when not empty
    double update_rate = 1000.0;
  };

  void init();
  void sense_and_estimate();
  void maybe_assign(const std::array<std::optional<Point3D>, kHandCount>& predicted, double now);
  /// Pushes targets closer than two footprints apart along the line joining them, pairwise in
  /// ascending id. `serving[i]` marks platforms under a hand or a mole.
  void separate_targets(const std::vector<char>& serving);
  void resolve_outputs(const std::array<std::optional<Point3D>, kHandCount>& predicted, double now);
  void append_metrics(double t_row);

  Config config_;
  MatBounds mat_;
  PlatformBounds bounds_;
  DriveLimits limits_;
  ControllerGains gains_;
  Frustum frustum_;
  SensorModel sensor_;

  std::uint64_t tick_ = 0;
  std::mt19937_64 rng_;
  std::vector<Platform> platforms_;
  std::vector<Pose2D> estimates_;
  std::vector<Pose2D> home_poses_;
  std::vector<Pose2D> hold_targets_;
  std::deque<std::vector<std::vector<MatReading>>> sensor_queue_;
  std::vector<PlatformOutput> outputs_;

  std::deque<HandFrame> pending_;
  std::array<std::optional<double>, kHandCount> last_submitted_{};
  HandTracker tracker_;
  Assignment assignment_;
  std::array<bool, kHandCount> assigned_live_{};  // hand set at the last assignment
  std::optional<double> last_assign_time_;
  std::uint64_t churn_ = 0;
  std::uint64_t assignment_runs_ = 0;

  std::optional<ScenarioRuntime> scenario_;
  std::array<std::optional<FocusOverride>, kHandCount> overrides_{};
  std::vector<ScenarioEvent> event_log_;
  std::vector<ScenarioEvent> unsent_events_;

  std::vector<MetricsRow> metrics_;
  std::vector<std::uint8_t> served_cells_;
  int served_nx_ = 0;
  int served_ny_ = 0;
  std::uint64_t served_count_ = 0;
  std::array<double, kHandCount> error_sum_{};
  std::array<std::uint64_t, kHandCount> error_count_{};

  std::uint64_t rejected_out_of_order_ = 0;
  std::uint64_t rejected_non_finite_ = 0;
};

}  // namespace haptibot
