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
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

#include "haptibot/geometry.hpp"
#include "haptibot/robot_sim.hpp"
#include "haptibot/tracking.hpp"

namespace haptibot {

struct Box3 {
  Point3D min{};
  Point3D max{};

  bool contains(const Point3D& p) const {
    return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y && p.z >= min.z && p.z <= max.z;
  }
  Point3D clamp(const Point3D& p) const;

  friend bool operator==(const Box3&, const Box3&) = default;
};

struct PianoKey {
  std::string name;
  Vec2 min{};
  Vec2 max{};

  bool contains(Vec2 p) const { return p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y; }
  friend bool operator==(const PianoKey&, const PianoKey&) = default;
};

/// Keys on a horizontal plane; also drives the workspace-button scene.
struct PianoRules {
  double plane_height = 0.12;  // m
  double hysteresis = 0.01;    // m
  double burst = 0.150;        // s
  double modulation_hz = 200.0;
  std::vector<PianoKey> keys;

  friend bool operator==(const PianoRules&, const PianoRules&) = default;
};

struct MoleRules {
  double spawn_period = 3.0;  // s
  double hit_radius = 0.03;   // m, lateral
  double hit_height = 0.10;   // m
  double dwell = 0.2;         // s, continuous
  double burst = 0.3;         // s
  double modulation_hz = 200.0;
  double margin = 0.09;       // m from the mat edge
  double mat_width = 0.55;
  double mat_height = 0.55;

  friend bool operator==(const MoleRules&, const MoleRules&) = default;
};

struct Outline {
  std::string name;
  std::vector<Point3D> points;  // closed polyline

  friend bool operator==(const Outline&, const Outline&) = default;
};

/// Shape-tracing scene: while a palm hovers over an outline the focus sweeps along it.
struct OutlineRules {
  std::vector<Outline> outlines;
  double traversal_speed = 2.0;    // m/s
  double update_rate = 1000.0;     // Hz
  double activation_margin = 0.03; // m around the outline's bounding box
  double modulation_hz = 200.0;

  friend bool operator==(const OutlineRules&, const OutlineRules&) = default;
};

enum class ScenarioKind { kPiano, kMole, kOutline };

const char* scenario_kind_name(ScenarioKind kind);

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::kPiano;
  std::uint64_t seed = 1;
  Box3 envelope{{0.0, 0.0, 0.05}, {0.55, 0.55, 0.40}};
  PianoRules piano;
  MoleRules mole;
  OutlineRules outline;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses a scenario document (schema in docs/scenarios.md). Throws ScenarioError listing
/// every problem. Geometry outside the envelope is an error.
Scenario parse_scenario(const nlohmann::json& doc);
Scenario load_scenario_file(const std::string& path);

/// Haptic request produced by a scene.
struct FeedbackCommand {
  Hand hand = Hand::kLeft;
  Point3D focus{};
  double burst = 0.0;  // s
  double modulation_hz = 200.0;
  std::vector<Point3D> shape_path;  // one STM cycle when tracing an outline

  friend bool operator==(const FeedbackCommand&, const FeedbackCommand&) = default;
};

/// press | spawn | hit | trace
struct ScenarioEvent {
  double t = 0.0;
  std::string kind;
  std::optional<Hand> hand;
  std::string label;  // key name, outline name
  Point3D position{};

  friend bool operator==(const ScenarioEvent&, const ScenarioEvent&) = default;
};

nlohmann::json event_to_json(const ScenarioEvent& event);
ScenarioEvent event_from_json(const nlohmann::json& j);

struct StepOutput {
  std::vector<FeedbackCommand> commands;
  std::vector<ScenarioEvent> events;
};

/// Per-hand press automaton state.
struct PianoHandState {
  bool known = false;  // seen since the track last went stale
  bool armed = false;  // may fire on the next downward crossing

  friend bool operator==(const PianoHandState&, const PianoHandState&) = default;
};

struct PianoState {
  std::array<PianoHandState, kHandCount> hands{};
  friend bool operator==(const PianoState&, const PianoState&) = default;
};

/// A press fires when an armed palm drops below the key plane while laterally inside a key;
/// any downward crossing disarms, rising above plane + hysteresis re-arms.
StepOutput piano_step(const PianoRules& rules, PianoState& state, std::span<const HandTrack> tracks, double t);

struct MoleState {
  bool active = false;
  Vec2 position{};
  double spawned_at = 0.0;
  std::array<double, kHandCount> dwell{};
  std::uint64_t spawns = 0;
  std::uint64_t hits = 0;

  friend bool operator==(const MoleState&, const MoleState&) = default;
};

/// Spawns a mole at the start of the step when none is active or the period elapsed, then
/// accumulates per-hand dwell over [t, t + dt]; a hit respawns immediately.
StepOutput mole_step(const MoleRules& rules, MoleState& state, std::span<const HandTrack> tracks, double t,
                     double dt, std::mt19937_64& rng);

struct OutlineState {
  std::array<int, kHandCount> active{-1, -1};  // outline index per hand
  friend bool operator==(const OutlineState&, const OutlineState&) = default;
};

StepOutput outline_step(const OutlineRules& rules, OutlineState& state, std::span<const HandTrack> tracks,
                        double t, double control_period);

/// A loaded scene with its random stream; driven on the session clock.
class ScenarioRuntime {
 public:
  ScenarioRuntime(Scenario scenario, const MatBounds& mat);

  /// Advances over [t, t + dt]. Commands are clamped to the scenario envelope.
  StepOutput step(std::span<const HandTrack> tracks, double t, double dt);

  const Scenario& scenario() const { return scenario_; }
  /// Mole to pre-position a platform under, when the scene has one.
  std::optional<Vec2> active_target() const;

  const PianoState& piano_state() const { return piano_; }
  const MoleState& mole_state() const { return mole_; }
  const OutlineState& outline_state() const { return outline_; }
  const std::mt19937_64& rng() const { return rng_; }

 private:
  Scenario scenario_;
  std::mt19937_64 rng_;
  PianoState piano_;
  MoleState mole_;
  OutlineState outline_;
};

}  // namespace haptibot
