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
#include <string>

#include "doctest.h"
#include "haptibot/acoustics.hpp"
#include "haptibot/scenarios.hpp"
#include "oracles.hpp"

using namespace haptibot;
using nlohmann::json;

namespace {

std::array<HandTrack, kHandCount> hands_at(std::optional<Point3D> left, std::optional<Point3D> right = std::nullopt) {
  std::array<HandTrack, kHandCount> t{};
  t[0].hand = Hand::kLeft;
  t[1].hand = Hand::kRight;
  if (left) {
    t[0].position = t[0].raw = *left;
    t[0].has_data = t[0].has_frames = true;
    t[0].stale = false;
  }
  if (right) {
    t[1].position = t[1].raw = *right;
    t[1].has_data = t[1].has_frames = true;
    t[1].stale = false;
  }
  return t;
}

PianoRules one_key() {
  PianoRules r;
  r.keys.push_back({"C", {0.10, 0.20}, {0.15, 0.35}});
  return r;
}

std::string source(const std::string& rel) { return std::string(HAPTIBOT_SOURCE_DIR) + "/" + rel; }

bool mentions(const ScenarioError& e, const std::string& needle) {
  return std::string(e.what()).find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("shipped scenario files load") {
  const Scenario piano = load_scenario_file(source("scenarios/piano.json"));
  CHECK(piano.kind == ScenarioKind::kPiano);
  CHECK(piano.piano.keys.size() == 7);
  CHECK(piano.piano.plane_height == 0.12);
  const Scenario mole = load_scenario_file(source("scenarios/mole.json"));
  CHECK(mole.kind == ScenarioKind::kMole);
  CHECK(mole.mole.spawn_period == 3.0);
  CHECK(load_scenario_file(source("scenarios/workspace.json")).piano.keys.size() == 3);
  CHECK(load_scenario_file(source("scenarios/outline.json")).outline.outlines.size() == 2);
}

TEST_CASE("defaults for omitted thresholds") {
  const Scenario s = parse_scenario(json{{"name", "p"}, {"type", "piano"},
                                         {"piano", {{"keys", json::array({{{"name", "C"}, {"min", {0.1, 0.2}}, {"max", {0.15, 0.3}}}})}}}});
  CHECK(s.piano.plane_height == 0.12);
  CHECK(s.piano.hysteresis == 0.01);
  CHECK(s.piano.burst == 0.150);
  CHECK(s.piano.modulation_hz == 200.0);
  const Scenario m = parse_scenario(json{{"name", "m"}, {"type", "mole"}, {"seed", 7}});
  CHECK(m.seed == 7);
  CHECK(m.mole.dwell == 0.2);
  CHECK(m.mole.hit_radius == 0.03);
  CHECK(m.mole.hit_height == 0.10);
  CHECK(m.mole.burst == 0.3);
}

TEST_CASE("invalid scenarios list every problem") {
  try {
    (void)parse_scenario(json{{"name", "bad"},
                              {"type", "piano"},
                              {"colour", "red"},
                              {"piano", {{"plane_height", 0.6}, {"keys", json::array({{{"name", "C"}, {"min", {0.1, 0.2}}, {"max", {0.9, 0.3}}}})}}}});
    FAIL("expected ScenarioError");
  } catch (const ScenarioError& e) {
    CHECK(mentions(e, "colour: unknown key"));
    CHECK(mentions(e, "piano key C: outside the scenario envelope"));
  }
  CHECK_THROWS_AS(parse_scenario(json{{"name", "x"}, {"type", "piano"}}), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json{{"name", "x"}, {"type", "dance"}}), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json{{"type", "mole"}}), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json::array()), ScenarioError);
  CHECK_THROWS_AS(parse_scenario(json{{"name", "o"}, {"type", "outline"},
                                      {"outline", {{"outlines", json::array({{{"name", "dot"}, {"points", {{0.2, 0.2, 0.2}, {0.2, 0.2, 0.2}}}}})}}}}),
                  ScenarioError);
  CHECK_THROWS_AS(load_scenario_file("no/such/scene.json"), ScenarioError);
}

TEST_CASE("hovering above a key never fires") {
  const PianoRules rules = one_key();
  PianoState st;
  for (int i = 0; i < 100; ++i) {
    const auto tr = hands_at(Point3D{0.12, 0.25, 0.20 - 0.0005 * i});
    CHECK(piano_step(rules, st, tr, i * 0.02).events.empty());
  }
}

TEST_CASE("one descent through the plane fires one press and one burst") {
  const PianoRules rules = one_key();
  PianoState st;
  int events = 0;
  for (int i = 0; i < 50; ++i) {
    const auto tr = hands_at(Point3D{0.12, 0.25, 0.20 - 0.004 * i});
    const auto out = piano_step(rules, st, tr, i * 0.02);
    events += static_cast<int>(out.events.size());
    if (!out.events.empty()) {
      CHECK(out.events[0].kind == "press");
      CHECK(out.events[0].label == "C");
      CHECK(out.events[0].hand == Hand::kLeft);
      REQUIRE(out.commands.size() == 1);
      CHECK(out.commands[0].burst == 0.150);
      CHECK(out.commands[0].modulation_hz == 200.0);
      CHECK(out.commands[0].focus == tr[0].position);
    }
  }
  CHECK(events == 1);
}

TEST_CASE("oscillation inside the hysteresis band is debounced") {
  const PianoRules rules = one_key();
  std::vector<double> heights{0.15};
  for (int i = 0; i < 40; ++i) heights.push_back(i % 2 == 0 ? 0.115 : 0.128);
  PianoState st;
  int presses = 0;
  for (std::size_t i = 0; i < heights.size(); ++i) {
    presses += static_cast<int>(piano_step(rules, st, hands_at(Point3D{0.12, 0.25, heights[i]}), i * 0.02).events.size());
  }
  CHECK(presses == 1);
  CHECK(oracle::count_presses(heights, 0.12, 0.01) == 1);
}

TEST_CASE("press count matches the hysteresis automaton on random height walks") {
  const PianoRules rules = one_key();
  std::mt19937_64 rng(3);
  std::normal_distribution<double> step(0.0, 0.006);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> heights{0.10 + 0.05 * (trial % 3)};
    for (int i = 0; i < 300; ++i) heights.push_back(std::clamp(heights.back() + step(rng), 0.05, 0.2));
    PianoState st;
    int presses = 0;
    bool rose_since_press = true;
    bool ok = true;
    for (std::size_t i = 0; i < heights.size(); ++i) {
      const auto out = piano_step(rules, st, hands_at(Point3D{0.12, 0.25, heights[i]}), i * 0.02);
      if (!out.events.empty()) {
        ok = ok && rose_since_press;
        rose_since_press = false;
      }
      if (heights[i] > 0.13) rose_since_press = true;
      presses += static_cast<int>(out.events.size());
    }
    CHECK(presses == oracle::count_presses(heights, 0.12, 0.01));
    CHECK(ok);
  }
}

TEST_CASE("a press outside every key disarms without firing") {
  const PianoRules rules = one_key();
  PianoState st;
  CHECK(piano_step(rules, st, hands_at(Point3D{0.40, 0.25, 0.15}), 0.0).events.empty());
  CHECK(piano_step(rules, st, hands_at(Point3D{0.40, 0.25, 0.10}), 0.02).events.empty());
  // Sliding onto the key below the plane does not fire either.
  CHECK(piano_step(rules, st, hands_at(Point3D{0.12, 0.25, 0.10}), 0.04).events.empty());
  CHECK_FALSE(st.hands[0].armed);
}

TEST_CASE("a stale hand resets its press state") {
  const PianoRules rules = one_key();
  PianoState st;
  (void)piano_step(rules, st, hands_at(Point3D{0.12, 0.25, 0.15}), 0.0);
  CHECK(st.hands[0].armed);
  (void)piano_step(rules, st, hands_at(std::nullopt), 0.02);
  CHECK(st.hands[0] == PianoHandState{});
  // Re-appearing below the plane does not count as a press.
  CHECK(piano_step(rules, st, hands_at(Point3D{0.12, 0.25, 0.10}), 0.04).events.empty());
}

TEST_CASE("moles spawn on schedule with no hands") {
  MoleRules rules;
  MoleState st;
  std::mt19937_64 rng(42);
  std::vector<double> spawn_times;
  const double dt = 0.02;
  for (int k = 0; k < 500; ++k) {
    for (const auto& e : mole_step(rules, st, hands_at(std::nullopt), k * dt, dt, rng).events) {
      CHECK(e.kind == "spawn");
      spawn_times.push_back(e.t);
    }
  }
  REQUIRE(spawn_times.size() == 4);  // 0, 3, 6, 9 within 10 s
  for (std::size_t i = 0; i < spawn_times.size(); ++i) CHECK(spawn_times[i] == doctest::Approx(3.0 * i));
  CHECK(st.hits == 0);
}

TEST_CASE("spawn positions replay the seeded generator") {
  MoleRules rules;
  MoleState st;
  std::mt19937_64 rng(42);
  std::mt19937_64 replay(42);
  for (int k = 0; k < 10; ++k) {
    const auto out = mole_step(rules, st, hands_at(std::nullopt), k * 3.0, 0.02, rng);
    REQUIRE(out.events.size() == 1);
    std::uniform_real_distribution<double> ux(0.09, 0.55 - 0.09);
    std::uniform_real_distribution<double> uy(0.09, 0.55 - 0.09);
    const double x = ux(replay);
    const double y = uy(replay);
    CHECK(out.events[0].position.x == x);
    CHECK(out.events[0].position.y == y);
  }
}

TEST_CASE("parking on the mole for 0.25 s gives one hit at the 0.2 s mark") {
  MoleRules rules;
  MoleState st;
  std::mt19937_64 rng(5);
  const double dt = 0.02;
  (void)mole_step(rules, st, hands_at(std::nullopt), 0.0, dt, rng);
  const Vec2 mole = st.position;
  const double start = dt;
  std::vector<ScenarioEvent> hits;
  for (int k = 0; k * dt < 0.25 - 1e-9; ++k) {
    const auto tr = hands_at(Point3D{mole.x + 0.01, mole.y, 0.08});
    for (const auto& e : mole_step(rules, st, tr, start + k * dt, dt, rng).events)
      if (e.kind == "hit") hits.push_back(e);
  }
  REQUIRE(hits.size() == 1);
  CHECK(hits[0].t - start == doctest::Approx(0.2));
  CHECK(hits[0].hand == Hand::kLeft);
  CHECK(st.hits == 1);
  CHECK(st.spawns == 2);
}

TEST_CASE("lifting the palm breaks the dwell") {
  MoleRules rules;
  MoleState st;
  std::mt19937_64 rng(5);
  (void)mole_step(rules, st, hands_at(std::nullopt), 0.0, 0.02, rng);
  const Vec2 mole = st.position;
  int hits = 0;
  for (int k = 1; k < 40; ++k) {
    const double z = (k % 8 == 0) ? 0.15 : 0.05;  // lifted every 8th tick: dwell never reaches 0.2 s
    for (const auto& e : mole_step(rules, st, hands_at(Point3D{mole.x, mole.y, z}), k * 0.02, 0.02, rng).events)
      hits += e.kind == "hit";
  }
  CHECK(hits == 0);
}

TEST_CASE("outline scene sweeps the outline under a hovering hand") {
  const Scenario s = load_scenario_file(source("scenarios/outline.json"));
  OutlineState st;
  const auto far = outline_step(s.outline, st, hands_at(Point3D{0.05, 0.5, 0.2}), 0.0, 0.02);
  CHECK(far.commands.empty());
  const auto near = outline_step(s.outline, st, hands_at(Point3D{0.20, 0.25, 0.2}), 0.02, 0.02);
  REQUIRE(near.events.size() == 1);
  CHECK(near.events[0].kind == "trace");
  CHECK(near.events[0].label == "incision");
  REQUIRE(near.commands.size() == 1);
  CHECK(near.commands[0].shape_path == stm_path(s.outline.outlines[0].points, 2.0, 1000.0));
  // Staying over the same outline does not repeat the event.
  CHECK(outline_step(s.outline, st, hands_at(Point3D{0.21, 0.25, 0.2}), 0.04, 0.02).events.empty());
}

TEST_CASE("commands stay inside the envelope and runs are deterministic") {
  for (const char* file : {"scenarios/piano.json", "scenarios/mole.json", "scenarios/outline.json", "scenarios/workspace.json"}) {
    Scenario s = load_scenario_file(source(file));
    s.envelope = {{0.05, 0.05, 0.08}, {0.5, 0.5, 0.3}};
    ScenarioRuntime a(s, {}), b(s, {});
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-0.1, 0.65);
    std::uniform_real_distribution<double> z(0.0, 0.5);
    json log_a = json::array(), log_b = json::array();
    for (int k = 0; k < 1500; ++k) {
      const auto tr = hands_at(Point3D{u(rng), u(rng), z(rng)}, Point3D{u(rng), u(rng), z(rng)});
      const auto oa = a.step(tr, k * 0.02, 0.02);
      const auto ob = b.step(tr, k * 0.02, 0.02);
      for (const auto& c : oa.commands) {
        CHECK(s.envelope.contains(c.focus));
        for (const auto& p : c.shape_path) CHECK(s.envelope.contains(p));
      }
      for (const auto& e : oa.events) log_a.push_back(event_to_json(e));
      for (const auto& e : ob.events) log_b.push_back(event_to_json(e));
    }
    CHECK(log_a.dump() == log_b.dump());
    CHECK(!log_a.empty());
  }
}

TEST_CASE("runtime exports the active mole") {
  const Scenario s = load_scenario_file(source("scenarios/mole.json"));
  ScenarioRuntime rt(s, {0.8, 0.6});
  CHECK_FALSE(rt.active_target());
  (void)rt.step(hands_at(std::nullopt), 0.0, 0.02);
  REQUIRE(rt.active_target());
  CHECK(*rt.active_target() == rt.mole_state().position);
  CHECK(rt.scenario().mole.mat_width == 0.8);
}

TEST_CASE("event JSON round trip") {
  const ScenarioEvent a{1.25, "press", Hand::kRight, "C", {0.1, 0.2, 0.11}};
  CHECK(event_from_json(event_to_json(a)) == a);
  const ScenarioEvent b{3.0, "spawn", std::nullopt, "mole", {0.3, 0.3, 0.0}};
  CHECK(event_from_json(event_to_json(b)) == b);
  CHECK(event_to_json(b)["hand"].is_null());
}
