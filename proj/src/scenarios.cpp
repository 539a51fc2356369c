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

#include "haptibot/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "haptibot/acoustics.hpp"

namespace haptibot {

using nlohmann::json;

namespace {

constexpr double kTimeEps = 1e-9;

class Errors {
 public:
  void add(std::string msg) { list_.push_back(std::move(msg)); }
  bool empty() const { return list_.empty(); }
  [[noreturn]] void raise() const {
    std::string msg = "invalid scenario:";
    for (const auto& e : list_) msg += "\n  " + e;
    throw ScenarioError(msg);
  }

 private:
  std::vector<std::string> list_;
};

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& path, Errors& errors) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; }) == allowed.end()) {
      errors.add(path + key + ": unknown key");
    }
  }
}

void read_number(const json& obj, const char* key, double& out, const std::string& path, Errors& errors,
                 bool positive = true) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  if (!it->is_number() || !std::isfinite(it->get<double>())) {
    errors.add(path + key + ": expected a finite number");
    return;
  }
  out = it->get<double>();
  if (positive && !(out > 0.0)) errors.add(path + key + ": must be > 0");
}

bool read_point(const json& v, Point3D& out) {
  if (!v.is_array() || v.size() != 3) return false;
  for (const auto& c : v)
    if (!c.is_number()) return false;
  out = {v[0].get<double>(), v[1].get<double>(), v[2].get<double>()};
  return true;
}

bool read_vec2(const json& v, Vec2& out) {
  if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) return false;
  out = {v[0].get<double>(), v[1].get<double>()};
  return true;
}

json point_json(const Point3D& p) { return json::array({p.x, p.y, p.z}); }

std::vector<const HandTrack*> live_tracks(std::span<const HandTrack> tracks) {
  std::vector<const HandTrack*> out;
  for (const auto& t : tracks)
    if (!t.stale && t.has_data) out.push_back(&t);
  std::sort(out.begin(), out.end(), [](const HandTrack* a, const HandTrack* b) { return a->hand < b->hand; });
  return out;
}

}  // namespace

Point3D Box3::clamp(const Point3D& p) const {
  return {std::clamp(p.x, min.x, max.x), std::clamp(p.y, min.y, max.y), std::clamp(p.z, min.z, max.z)};
}

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::kPiano:
      return "piano";
    case ScenarioKind::kMole:
      return "mole";
    case ScenarioKind::kOutline:
      return "outline";
  }
  return "piano";
}

Scenario parse_scenario(const json& doc) {
  Errors errors;
  if (!doc.is_object()) {
    errors.add("top level must be a JSON object");
    errors.raise();
  }
  check_keys(doc, {"name", "type", "seed", "envelope", "piano", "mole", "outline"}, "", errors);

  Scenario s;
  if (auto it = doc.find("name"); it != doc.end() && it->is_string()) {
    s.name = it->get<std::string>();
  } else {
    errors.add("name: required string");
  }
  if (auto it = doc.find("type"); it != doc.end() && it->is_string()) {
    const auto type = it->get<std::string>();
    if (type == "piano") {
      s.kind = ScenarioKind::kPiano;
    } else if (type == "mole") {
      s.kind = ScenarioKind::kMole;
    } else if (type == "outline") {
      s.kind = ScenarioKind::kOutline;
    } else {
      errors.add("type: must be piano, mole or outline");
    }
  } else {
    errors.add("type: required string");
  }
  if (auto it = doc.find("seed"); it != doc.end()) {
    if (it->is_number_unsigned() || (it->is_number_integer() && it->get<std::int64_t>() >= 0)) {
      s.seed = it->get<std::uint64_t>();
    } else {
      errors.add("seed: expected a non-negative integer");
    }
  }
  if (auto it = doc.find("envelope"); it != doc.end()) {
    check_keys(*it, {"min", "max"}, "envelope.", errors);
    if (!it->is_object() || !read_point(it->value("min", json()), s.envelope.min) ||
        !read_point(it->value("max", json()), s.envelope.max)) {
      errors.add("envelope: expected {\"min\": [x,y,z], \"max\": [x,y,z]}");
    } else if (!(s.envelope.min.x < s.envelope.max.x && s.envelope.min.y < s.envelope.max.y &&
                 s.envelope.min.z < s.envelope.max.z)) {
      errors.add("envelope: min must be below max on every axis");
    }
  }
  if (s.envelope.min.z < 0.0) errors.add("envelope: must lie above the mat (min z >= 0)");

  if (auto it = doc.find("piano"); it != doc.end() && it->is_object()) {
    const json& p = *it;
    check_keys(p, {"plane_height", "hysteresis", "burst", "modulation_hz", "keys"}, "piano.", errors);
    read_number(p, "plane_height", s.piano.plane_height, "piano.", errors);
    read_number(p, "hysteresis", s.piano.hysteresis, "piano.", errors, false);
    read_number(p, "burst", s.piano.burst, "piano.", errors, false);
    read_number(p, "modulation_hz", s.piano.modulation_hz, "piano.", errors);
    if (s.piano.hysteresis < 0.0) errors.add("piano.hysteresis: must be >= 0");
    if (s.piano.burst < 0.0) errors.add("piano.burst: must be >= 0");
    if (auto keys = p.find("keys"); keys != p.end()) {
      if (!keys->is_array()) errors.add("piano.keys: expected an array");
      for (const auto& k : keys->is_array() ? *keys : json::array()) {
        PianoKey key;
        if (!k.is_object() || !k.contains("name") || !k["name"].is_string() ||
            !read_vec2(k.value("min", json()), key.min) || !read_vec2(k.value("max", json()), key.max)) {
          errors.add("piano.keys: each key needs name, min [x,y], max [x,y]");
          continue;
        }
        key.name = k["name"].get<std::string>();
        s.piano.keys.push_back(key);
      }
    }
  } else if (it != doc.end()) {
    errors.add("piano: expected an object");
  }

  if (auto it = doc.find("mole"); it != doc.end() && it->is_object()) {
    const json& m = *it;
    check_keys(m, {"spawn_period", "hit_radius", "hit_height", "dwell", "burst", "modulation_hz", "margin"}, "mole.",
               errors);
    read_number(m, "spawn_period", s.mole.spawn_period, "mole.", errors);
    read_number(m, "hit_radius", s.mole.hit_radius, "mole.", errors);
    read_number(m, "hit_height", s.mole.hit_height, "mole.", errors);
    read_number(m, "dwell", s.mole.dwell, "mole.", errors);
    read_number(m, "burst", s.mole.burst, "mole.", errors, false);
    read_number(m, "modulation_hz", s.mole.modulation_hz, "mole.", errors);
    read_number(m, "margin", s.mole.margin, "mole.", errors, false);
  } else if (it != doc.end()) {
    errors.add("mole: expected an object");
  }

  if (auto it = doc.find("outline"); it != doc.end() && it->is_object()) {
    const json& o = *it;
    check_keys(o, {"outlines", "traversal_speed", "update_rate", "activation_margin", "modulation_hz"}, "outline.",
               errors);
    read_number(o, "traversal_speed", s.outline.traversal_speed, "outline.", errors);
    read_number(o, "update_rate", s.outline.update_rate, "outline.", errors);
    read_number(o, "activation_margin", s.outline.activation_margin, "outline.", errors, false);
    read_number(o, "modulation_hz", s.outline.modulation_hz, "outline.", errors);
    if (auto lines = o.find("outlines"); lines != o.end() && lines->is_array()) {
      for (const auto& l : *lines) {
        Outline outline;
        if (!l.is_object() || !l.contains("name") || !l["name"].is_string() || !l.contains("points") ||
            !l["points"].is_array()) {
          errors.add("outline.outlines: each outline needs name and points");
          continue;
        }
        outline.name = l["name"].get<std::string>();
        for (const auto& p : l["points"]) {
          Point3D pt;
          if (!read_point(p, pt)) {
            errors.add("outline.outlines." + outline.name + ": points must be [x,y,z]");
            break;
          }
          outline.points.push_back(pt);
        }
        s.outline.outlines.push_back(std::move(outline));
      }
    } else if (lines != o.end()) {
      errors.add("outline.outlines: expected an array");
    }
  } else if (it != doc.end()) {
    errors.add("outline: expected an object");
  }

  // Geometry must sit inside the declared envelope.
  for (const auto& key : s.piano.keys) {
    if (!(key.min.x < key.max.x && key.min.y < key.max.y)) errors.add("piano key " + key.name + ": empty rectangle");
    if (!s.envelope.contains({key.min.x, key.min.y, s.piano.plane_height}) ||
        !s.envelope.contains({key.max.x, key.max.y, s.piano.plane_height})) {
      errors.add("piano key " + key.name + ": outside the scenario envelope");
    }
  }
  for (const auto& outline : s.outline.outlines) {
    for (const auto& p : outline.points) {
      if (!s.envelope.contains(p)) {
        errors.add("outline " + outline.name + ": point outside the scenario envelope");
        break;
      }
    }
    try {
      (void)stm_path(outline.points, s.outline.traversal_speed, s.outline.update_rate);
    } catch (const std::invalid_argument& e) {
      errors.add("outline " + outline.name + ": " + e.what());
    }
  }
  if (s.kind == ScenarioKind::kPiano && s.piano.keys.empty()) errors.add("piano: at least one key required");
  if (s.kind == ScenarioKind::kOutline && s.outline.outlines.empty()) errors.add("outline: at least one outline required");
  if (s.mole.hit_height > s.envelope.max.z) errors.add("mole.hit_height: above the scenario envelope");

  if (!errors.empty()) errors.raise();
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError("cannot open scenario file: " + path);
  try {
    return parse_scenario(json::parse(in));
  } catch (const json::parse_error& e) {
    throw ScenarioError("scenario " + path + ": " + e.what());
  }
}

json event_to_json(const ScenarioEvent& e) {
  json j{{"t", e.t}, {"kind", e.kind}, {"label", e.label}, {"pos", point_json(e.position)}};
  j["hand"] = e.hand ? json(hand_name(*e.hand)) : json(nullptr);
  return j;
}

ScenarioEvent event_from_json(const json& j) {
  ScenarioEvent e;
  e.t = j.at("t").get<double>();
  e.kind = j.at("kind").get<std::string>();
  e.label = j.at("label").get<std::string>();
  if (!read_point(j.at("pos"), e.position)) throw std::invalid_argument("event: pos must be [x,y,z]");
  const auto& h = j.at("hand");
  if (!h.is_null()) {
    auto hand = parse_hand(h.get<std::string>());
    if (!hand) throw std::invalid_argument("event: bad hand");
    e.hand = *hand;
  }
  return e;
}

StepOutput piano_step(const PianoRules& rules, PianoState& state, std::span<const HandTrack> tracks, double t) {
  StepOutput out;
  for (const auto& track : tracks) {
    auto& hs = state.hands[static_cast<std::size_t>(track.hand)];
    if (track.stale || !track.has_data) {
      hs = {};
      continue;
    }
    const Point3D& palm = track.position;
    if (!hs.known) {
      hs.known = true;
      hs.armed = palm.z >= rules.plane_height;
      continue;
    }
    if (hs.armed && palm.z < rules.plane_height) {
      hs.armed = false;
      const Vec2 lateral{palm.x, palm.y};
      for (const auto& key : rules.keys) {
        if (!key.contains(lateral)) continue;
        out.events.push_back({t, "press", track.hand, key.name, palm});
        out.commands.push_back({track.hand, palm, rules.burst, rules.modulation_hz, {}});
        break;
      }
    } else if (!hs.armed && palm.z > rules.plane_height + rules.hysteresis) {
      hs.armed = true;
    }
  }
  return out;
}

namespace {

void spawn_mole(const MoleRules& rules, MoleState& state, double t, std::mt19937_64& rng, StepOutput& out) {
  std::uniform_real_distribution<double> ux(rules.margin, rules.mat_width - rules.margin);
  std::uniform_real_distribution<double> uy(rules.margin, rules.mat_height - rules.margin);
  const double x = ux(rng);
  const double y = uy(rng);
  state.active = true;
  state.position = {x, y};
  state.spawned_at = t;
  state.dwell = {};
  ++state.spawns;
  out.events.push_back({t, "spawn", std::nullopt, "mole", {x, y, 0.0}});
}

}  // namespace

StepOutput mole_step(const MoleRules& rules, MoleState& state, std::span<const HandTrack> tracks, double t,
                     double dt, std::mt19937_64& rng) {
  StepOutput out;
  if (!state.active || t - state.spawned_at >= rules.spawn_period - kTimeEps) spawn_mole(rules, state, t, rng, out);

  const double t_end = t + dt;
  for (const HandTrack* track : live_tracks(tracks)) {
    auto& dwell = state.dwell[static_cast<std::size_t>(track->hand)];
    const Point3D& palm = track->position;
    const bool over = std::hypot(palm.x - state.position.x, palm.y - state.position.y) <= rules.hit_radius &&
                      palm.z < rules.hit_height;
    dwell = over ? dwell + dt : 0.0;
    if (over && dwell >= rules.dwell - kTimeEps) {
      ++state.hits;
      out.events.push_back({t_end, "hit", track->hand, "mole", {state.position.x, state.position.y, 0.0}});
      out.commands.push_back({track->hand, palm, rules.burst, rules.modulation_hz, {}});
      spawn_mole(rules, state, t_end, rng, out);
      break;
    }
  }
  // Stale hands lose their dwell.
  for (const auto& track : tracks) {
    if (track.stale || !track.has_data) state.dwell[static_cast<std::size_t>(track.hand)] = 0.0;
  }
  return out;
}

StepOutput outline_step(const OutlineRules& rules, OutlineState& state, std::span<const HandTrack> tracks, double t,
                        double control_period) {
  StepOutput out;
  for (const auto& track : tracks) {
    auto& active = state.active[static_cast<std::size_t>(track.hand)];
    if (track.stale || !track.has_data) {
      active = -1;
      continue;
    }
    const Point3D& palm = track.position;
    int found = -1;
    for (std::size_t i = 0; i < rules.outlines.size() && found < 0; ++i) {
      const auto& pts = rules.outlines[i].points;
      double x0 = pts[0].x, x1 = pts[0].x, y0 = pts[0].y, y1 = pts[0].y;
      for (const auto& p : pts) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
      }
      const double m = rules.activation_margin;
      if (palm.x >= x0 - m && palm.x <= x1 + m && palm.y >= y0 - m && palm.y <= y1 + m) found = static_cast<int>(i);
    }
    if (found >= 0 && found != active) {
      out.events.push_back({t, "trace", track.hand, rules.outlines[static_cast<std::size_t>(found)].name, palm});
    }
    active = found;
    if (found >= 0) {
      const auto& outline = rules.outlines[static_cast<std::size_t>(found)];
      FeedbackCommand cmd{track.hand, outline.points.front(), control_period, rules.modulation_hz, {}};
      cmd.shape_path = stm_path(outline.points, rules.traversal_speed, rules.update_rate);
      out.commands.push_back(std::move(cmd));
    }
  }
  return out;
}

ScenarioRuntime::ScenarioRuntime(Scenario scenario, const MatBounds& mat)
    : scenario_(std::move(scenario)), rng_(scenario_.seed) {
  scenario_.mole.mat_width = mat.width;
  scenario_.mole.mat_height = mat.height;
}

StepOutput ScenarioRuntime::step(std::span<const HandTrack> tracks, double t, double dt) {
  StepOutput out;
  switch (scenario_.kind) {
    case ScenarioKind::kPiano:
      out = piano_step(scenario_.piano, piano_, tracks, t + dt);
      break;
    case ScenarioKind::kMole:
      out = mole_step(scenario_.mole, mole_, tracks, t, dt, rng_);
      break;
    case ScenarioKind::kOutline:
      out = outline_step(scenario_.outline, outline_, tracks, t + dt, dt);
      break;
  }
  for (auto& cmd : out.commands) {
    cmd.focus = scenario_.envelope.clamp(cmd.focus);
    for (auto& p : cmd.shape_path) p = scenario_.envelope.clamp(p);
  }
  return out;
}

std::optional<Vec2> ScenarioRuntime::active_target() const {
  if (scenario_.kind == ScenarioKind::kMole && mole_.active) return mole_.position;
  return std::nullopt;
}

}  // namespace haptibot
