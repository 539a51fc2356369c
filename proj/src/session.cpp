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

#include "haptibot/session.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace haptibot {

using nlohmann::json;

namespace {

constexpr double kTimeEps = 1e-9;
constexpr double kFollowBurst = std::numeric_limits<double>::infinity();

class Fnv1a {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      hash_ ^= p[i];
      hash_ *= 1099511628211ULL;
    }
  }
  void u64(std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    bytes(b, 8);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void flag(bool v) { u64(v ? 1 : 0); }
  void str(const std::string& s) {
    u64(s.size());
    bytes(s.data(), s.size());
  }
  void point(const Point3D& p) {
    f64(p.x);
    f64(p.y);
    f64(p.z);
  }
  void pose(const Pose2D& p) {
    f64(p.x);
    f64(p.y);
    f64(p.theta);
  }
  template <typename T>
  void opt(const std::optional<T>& v, void (Fnv1a::*fn)(T)) {
    flag(v.has_value());
    if (v) (this->*fn)(*v);
  }
  std::uint64_t value() const { return hash_; }

 private:
  std::uint64_t hash_ = 14695981039346656037ULL;
};

template <typename Engine>
std::string engine_state(const Engine& e) {
  std::ostringstream os;
  os << e;
  return os.str();
}

json pose_json(const Pose2D& p) { return json::array({p.x, p.y, p.theta}); }
json point_json(const Point3D& p) { return json::array({p.x, p.y, p.z}); }

Pose2D pose_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("pose must be [x, y, theta]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

Point3D point_from(const json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("point must be [x, y, z]");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::optional<double> optional_number_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  return j.get<double>();
}

std::optional<Hand> hand_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  auto h = parse_hand(j.get<std::string>());
  if (!h) throw std::invalid_argument("hand must be \"left\" or \"right\"");
  return h;
}

void append_number(std::string& line, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  line += buf;
}

}  // namespace

json snapshot_to_json(const StateSnapshot& s) {
  json robots = json::array();
  for (const auto& r : s.robots) robots.push_back({{"id", r.id}, {"pose", pose_json(r.pose)}});
  json platforms = json::array();
  for (const auto& p : s.platforms) {
    platforms.push_back({{"id", p.id},
                         {"pose", pose_json(p.pose)},
                         {"hand", p.hand ? json(hand_name(*p.hand)) : json(nullptr)},
                         {"focus", p.focus ? point_json(*p.focus) : json(nullptr)},
                         {"quality", p.quality},
                         {"edge_limited", p.edge_limited},
                         {"emitting", p.emitting}});
  }
  json hands = json::array();
  for (const auto& h : s.hands) {
    hands.push_back({{"hand", hand_name(h.hand)},
                     {"pos", h.position ? point_json(*h.position) : json(nullptr)},
                     {"stale", h.stale}});
  }
  json events = json::array();
  for (const auto& e : s.events) events.push_back(event_to_json(e));
  json metrics{{"rows", s.metrics.rows},
               {"churn", s.metrics.churn},
               {"served_area_m2", s.metrics.served_area_m2},
               {"mean_error_left", optional_number(s.metrics.mean_error[0])},
               {"mean_error_right", optional_number(s.metrics.mean_error[1])}};
  return json{{"type", "snapshot"},
              {"tick", s.tick},
              {"t", s.t},
              {"robots", robots},
              {"platforms", platforms},
              {"hands", hands},
              {"events", events},
              {"metrics", metrics},
              {"scenario", s.scenario ? json(*s.scenario) : json(nullptr)}};
}

StateSnapshot snapshot_from_json(const json& j) {
  StateSnapshot s;
  s.tick = j.at("tick").get<std::uint64_t>();
  s.t = j.at("t").get<double>();
  for (const auto& r : j.at("robots")) s.robots.push_back({r.at("id").get<int>(), pose_from(r.at("pose"))});
  for (const auto& p : j.at("platforms")) {
    PlatformView v;
    v.id = p.at("id").get<int>();
    v.pose = pose_from(p.at("pose"));
    v.hand = hand_from(p.at("hand"));
    if (!p.at("focus").is_null()) v.focus = point_from(p.at("focus"));
    v.quality = p.at("quality").get<double>();
    v.edge_limited = p.at("edge_limited").get<bool>();
    v.emitting = p.at("emitting").get<bool>();
    s.platforms.push_back(v);
  }
  for (const auto& h : j.at("hands")) {
    HandView v;
    auto hand = hand_from(h.at("hand"));
    if (!hand) throw std::invalid_argument("hands[].hand must not be null");
    v.hand = *hand;
    if (!h.at("pos").is_null()) v.position = point_from(h.at("pos"));
    v.stale = h.at("stale").get<bool>();
    s.hands.push_back(v);
  }
  for (const auto& e : j.at("events")) s.events.push_back(event_from_json(e));
  const auto& m = j.at("metrics");
  s.metrics.rows = m.at("rows").get<std::uint64_t>();
  s.metrics.churn = m.at("churn").get<std::uint64_t>();
  s.metrics.served_area_m2 = m.at("served_area_m2").get<double>();
  s.metrics.mean_error[0] = optional_number_from(m.at("mean_error_left"));
  s.metrics.mean_error[1] = optional_number_from(m.at("mean_error_right"));
  if (!j.at("scenario").is_null()) s.scenario = j.at("scenario").get<std::string>();
  return s;
}

CoverageSummary coverage_summary(const Config& config) {
  CoverageSummary c;
  const double m = config.acoustics.lateral_margin;
  c.mat_area_m2 = config.mat.width * config.mat.height;
  c.baseline_area_m2 = kBaselineWidth * kBaselineDepth;
  c.effective_area_m2 = (config.mat.width + 2.0 * m) * (config.mat.height + 2.0 * m);
  c.effective_gain = c.effective_area_m2 / c.baseline_area_m2 - 1.0;
  return c;
}

void write_metrics_csv(const Config& config, const std::vector<MetricsRow>& rows, std::ostream& out) {
  std::string header = "t,err_left,err_right";
  for (int i = 0; i < config.platform.count; ++i) header += ",quality_p" + std::to_string(i);
  header += ",churn,edge_limited_fraction,served_area_m2\n";
  out << header;
  std::string line;
  for (const auto& row : rows) {
    line.clear();
    append_number(line, row.t);
    for (const auto& e : row.error) {
      line += ',';
      if (e) append_number(line, *e);
    }
    for (const auto& q : row.quality) {
      line += ',';
      if (q) append_number(line, *q);
    }
    line += ',' + std::to_string(row.churn) + ',';
    append_number(line, row.edge_limited_fraction);
    line += ',';
    append_number(line, row.served_area_m2);
    line += '\n';
    out << line;
  }
  const auto c = coverage_summary(config);
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "# coverage mat_area_m2=%.9g baseline_area_m2=%.9g effective_area_m2=%.9g effective_gain=%.9g\n",
                c.mat_area_m2, c.baseline_area_m2, c.effective_area_m2, c.effective_gain);
  out << buf;
}

Session::Session(Config config) : config_(std::move(config)) { init(); }

void Session::init() {
  mat_ = {config_.mat.width, config_.mat.height};
  bounds_ = PlatformBounds::for_mat(mat_, config_.platform.footprint_half_extent);
  limits_ = DriveLimits::from_config(config_);
  gains_ = ControllerGains::from_config(config_);
  frustum_ = Frustum::from_config(config_);
  sensor_ = {config_.robot.sensor_noise, config_.robot.sensor_resolution};

  tick_ = 0;
  rng_.seed(config_.seed);
  platforms_.clear();
  const auto mounts = config_.effective_mounts();
  home_poses_ = config_.effective_initial_poses();
  for (int i = 0; i < config_.platform.count; ++i) {
    platforms_.push_back(make_platform(i, home_poses_[static_cast<std::size_t>(i)], mounts,
                                       config_.platform.footprint_half_extent, limits_,
                                       i * config_.platform.robots_per_platform));
  }
  estimates_ = home_poses_;
  hold_targets_ = home_poses_;
  sensor_queue_.clear();
  outputs_.assign(platforms_.size(), PlatformOutput{});
  for (std::size_t i = 0; i < outputs_.size(); ++i) outputs_[i].target = home_poses_[i];

  pending_.clear();
  last_submitted_ = {};
  tracker_ = HandTracker({config_.tracking.alpha, config_.tracking.staleness_timeout});
  assignment_ = {};
  assigned_live_ = {};
  last_assign_time_.reset();
  churn_ = 0;
  assignment_runs_ = 0;

  scenario_.reset();
  overrides_ = {};
  event_log_.clear();
  unsent_events_.clear();

  metrics_.clear();
  served_nx_ = static_cast<int>(std::ceil(mat_.width / kServedCell - kTimeEps));
  served_ny_ = static_cast<int>(std::ceil(mat_.height / kServedCell - kTimeEps));
  served_cells_.assign(static_cast<std::size_t>(served_nx_) * served_ny_, 0);
  served_count_ = 0;
  error_sum_ = {};
  error_count_ = {};
}

double Session::time_at(std::uint64_t tick) const { return static_cast<double>(tick) / config_.rates.control_hz; }

double Session::time() const { return time_at(tick_); }

SubmitStatus Session::submit(const HandFrame& frame) {
  const bool finite = std::isfinite(frame.t) &&
                      (!frame.tracked || (std::isfinite(frame.palm.x) && std::isfinite(frame.palm.y) &&
                                          std::isfinite(frame.palm.z)));
  if (!finite) {
    ++rejected_non_finite_;
    return SubmitStatus::kNonFinite;
  }
  auto& last = last_submitted_[static_cast<std::size_t>(frame.hand)];
  if (last && frame.t <= *last) {
    ++rejected_out_of_order_;
    return SubmitStatus::kOutOfOrder;
  }
  last = frame.t;
  pending_.push_back(frame);
  return SubmitStatus::kQueued;
}

void Session::load_scenario(const Scenario& scenario) {
  scenario_.emplace(scenario, mat_);
  overrides_ = {};
}

void Session::stop_scenario() {
  scenario_.reset();
  overrides_ = {};
}

void Session::reset(std::uint64_t seed) {
  config_.seed = seed;
  init();
}

void Session::sense_and_estimate() {
  const double t = time();
  std::vector<std::vector<MatReading>> readings;
  readings.reserve(platforms_.size());
  for (const auto& p : platforms_) {
    std::vector<MatReading> per_robot;
    per_robot.reserve(p.robots.size());
    for (const auto& r : p.robots) per_robot.push_back(sense_mat(r, mat_, sensor_, t, rng_));
    readings.push_back(std::move(per_robot));
  }
  sensor_queue_.push_back(std::move(readings));
  while (sensor_queue_.size() > static_cast<std::size_t>(config_.robot.sensor_delay_ticks) + 1) {
    sensor_queue_.pop_front();
  }
  const auto& delayed = sensor_queue_.front();
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    // A failed estimate keeps the previous one.
    if (auto est = estimate_platform_pose(delayed[i], platforms_[i].mounts)) estimates_[i] = *est;
  }
}

void Session::maybe_assign(const std::array<std::optional<Point3D>, kHandCount>& predicted, double now) {
  std::array<bool, kHandCount> live{};
  for (int h = 0; h < kHandCount; ++h) live[h] = predicted[h].has_value();
  const bool due = !last_assign_time_ || live != assigned_live_ ||
                   now - *last_assign_time_ >= config_.tracking.rebalance_period - kTimeEps;
  if (!due) return;

  std::vector<AssignSite> ps;
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    ps.push_back({platforms_[i].id, {estimates_[i].x, estimates_[i].y}});
  }
  std::vector<AssignSite> hs;
  for (int h = 0; h < kHandCount; ++h) {
    if (predicted[h]) hs.push_back({h, {predicted[h]->x, predicted[h]->y}});
  }
  Assignment next = assign(ps, hs);

  bool switched = false;
  for (const auto& [pid, hid] : next.platform_to_hand) {
    auto old = assignment_.platform_to_hand.find(pid);
    if (old != assignment_.platform_to_hand.end() && old->second != hid) switched = true;
  }
  if (switched) ++churn_;
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    const int pid = platforms_[i].id;
    const bool was = assignment_.platform_to_hand.count(pid) > 0;
    const bool is = next.platform_to_hand.count(pid) > 0;
    if (was && !is) hold_targets_[i] = {estimates_[i].x, estimates_[i].y, home_poses_[i].theta};
  }
  assignment_ = std::move(next);
  assigned_live_ = live;
  last_assign_time_ = now;
  ++assignment_runs_;
}

void Session::resolve_outputs(const std::array<std::optional<Point3D>, kHandCount>& predicted, double now) {
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    auto& out = outputs_[i];
    out.has_focus = false;
    out.emitting = false;
    out.solution = {};
    if (!out.hand || !predicted[static_cast<std::size_t>(*out.hand)]) continue;
    const auto h = static_cast<std::size_t>(*out.hand);

    ModulationState mod{config_.acoustics.modulation_hz, config_.acoustics.modulation_duty, kFollowBurst};
    Point3D request = *predicted[h];
    if (const auto& ov = overrides_[h]; ov && now < ov->until - kTimeEps) {
      if (ov->path.empty()) {
        request = ov->focus;
      } else {
        const auto idx = static_cast<std::size_t>(std::llround(now * ov->update_rate)) % ov->path.size();
        request = ov->path[idx];
      }
      mod.frequency = ov->modulation_hz;
      mod.burst_remaining = ov->until - now;
    }

    // Phases are solved in the array frame the controller believes in; the field is then
    // emitted from where the array really is.
    const TransducerArray believed = TransducerArray::from_config(config_, to_transform(estimates_[i]));
    const TransducerArray actual = TransducerArray::from_config(config_, to_transform(platforms_[i].pose));
    PhaseSolution sol = resolve_focus(believed, request, frustum_);
    sol.focus = actual.to_world(believed.to_local(sol.focus));
    out.requested = request;
    out.solution = std::move(sol);
    out.has_focus = true;
    out.emitting = am_envelope(mod, now) == 1;
  }
}

void Session::append_metrics(double t_row) {
  MetricsRow row;
  row.t = t_row;
  for (int h = 0; h < kHandCount; ++h) {
    const HandTrack& track = tracker_.track(static_cast<Hand>(h));
    if (track.stale || !track.has_data) continue;
    for (const auto& out : outputs_) {
      if (!out.has_focus || out.hand != static_cast<Hand>(h)) continue;
      const double err = std::hypot(out.solution.focus.x - track.raw.x, out.solution.focus.y - track.raw.y);
      row.error[h] = err;
      error_sum_[h] += err;
      ++error_count_[h];
    }
  }
  std::size_t edge = 0;
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    const auto& out = outputs_[i];
    row.quality.push_back(out.has_focus ? std::optional<double>(out.solution.quality) : std::nullopt);
    if (platforms_[i].edge_limited) ++edge;
    if (out.has_focus && out.solution.quality >= 1.0) {
      const int cx = static_cast<int>(std::floor(out.solution.focus.x / kServedCell));
      const int cy = static_cast<int>(std::floor(out.solution.focus.y / kServedCell));
      if (cx >= 0 && cx < served_nx_ && cy >= 0 && cy < served_ny_) {
        auto& cell = served_cells_[static_cast<std::size_t>(cy) * served_nx_ + cx];
        if (!cell) {
          cell = 1;
          ++served_count_;
        }
      }
    }
  }
  row.churn = churn_;
  row.edge_limited_fraction = platforms_.empty() ? 0.0 : static_cast<double>(edge) / platforms_.size();
  row.served_area_m2 = static_cast<double>(served_count_) * kServedCell * kServedCell;
  metrics_.push_back(std::move(row));
}

void Session::separate_targets(const std::vector<char>& serving) {
  const double min_gap = 2.0 * config_.platform.footprint_half_extent;
  for (std::size_t i = 0; i < outputs_.size(); ++i) {
    for (std::size_t j = i + 1; j < outputs_.size(); ++j) {
      Pose2D& a = outputs_[i].target;
      Pose2D& b = outputs_[j].target;
      Vec2 axis{b.x - a.x, b.y - a.y};
      const double d = norm(axis);
      if (d >= min_gap) continue;
      axis = d > 1e-12 ? Vec2{axis.x / d, axis.y / d} : Vec2{1.0, 0.0};
      // An idle platform gives way to one that is serving; equals split the push.
      double share_a = 0.5;
      if (serving[i] != serving[j]) share_a = serving[i] ? 0.0 : 1.0;
      const double deficit = min_gap - d;
      const Vec2 na = bounds_.clamp({a.x - share_a * deficit * axis.x, a.y - share_a * deficit * axis.y});
      const Vec2 nb = bounds_.clamp({b.x + (1.0 - share_a) * deficit * axis.x, b.y + (1.0 - share_a) * deficit * axis.y});
      a.x = na.x;
      a.y = na.y;
      b.x = nb.x;
      b.y = nb.y;
    }
  }
}

void Session::tick() {
  const double t = time();
  const double period = config_.control_period();

  // Ingest every queued frame that has arrived by the start of this tick.
  std::deque<HandFrame> later;
  for (const auto& f : pending_) {
    if (f.t <= t + kTimeEps) {
      tracker_.ingest(f);
    } else {
      later.push_back(f);
    }
  }
  pending_.swap(later);
  tracker_.update_staleness(t);

  sense_and_estimate();

  const double horizon = config_.tracking.prediction_horizon_ticks * period;
  std::array<std::optional<Point3D>, kHandCount> predicted{};
  for (int h = 0; h < kHandCount; ++h) {
    const HandTrack& track = tracker_.track(static_cast<Hand>(h));
    if (!track.stale && track.has_data) predicted[h] = predict(track, horizon);
  }
  maybe_assign(predicted, t);

  // A pre-positioning target (active mole) goes to the nearest platform without a hand.
  std::optional<std::size_t> prepositioned;
  if (scenario_) {
    if (auto mole = scenario_->active_target()) {
      double best = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < platforms_.size(); ++i) {
        if (assignment_.platform_to_hand.count(platforms_[i].id)) continue;
        const double d = norm(Vec2{estimates_[i].x, estimates_[i].y} - *mole);
        if (d < best) {
          best = d;
          prepositioned = i;
        }
      }
      if (prepositioned) hold_targets_[*prepositioned] = {mole->x, mole->y, home_poses_[*prepositioned].theta};
    }
  }

  std::vector<Twist2D> twists;
  std::vector<char> serving(platforms_.size(), 0);
  if (prepositioned) serving[*prepositioned] = 1;
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    auto& out = outputs_[i];
    out.hand.reset();
    Pose2D target = hold_targets_[i];
    if (auto it = assignment_.platform_to_hand.find(platforms_[i].id); it != assignment_.platform_to_hand.end()) {
      const auto& p = predicted[static_cast<std::size_t>(it->second)];
      if (p) {
        out.hand = static_cast<Hand>(it->second);
        serving[i] = 1;
        target = {p->x, p->y, home_poses_[i].theta};
      }
    }
    const Vec2 clamped = bounds_.clamp({target.x, target.y});
    target.x = clamped.x;
    target.y = clamped.y;
    out.target = target;
  }
  separate_targets(serving);
  for (std::size_t i = 0; i < platforms_.size(); ++i) twists.push_back(goto_twist(estimates_[i], outputs_[i].target, gains_));

  const int substeps = config_.substeps_per_tick();
  const double dt = period / substeps;
  std::vector<char> edge(platforms_.size(), 0);
  for (int s = 0; s < substeps; ++s) {
    for (std::size_t i = 0; i < platforms_.size(); ++i) {
      platforms_[i] = step_platform(platforms_[i], twists[i], limits_, bounds_, dt);
      edge[i] = static_cast<char>(edge[i] || platforms_[i].edge_limited);
    }
  }
  for (std::size_t i = 0; i < platforms_.size(); ++i) platforms_[i].edge_limited = edge[i] != 0;

  ++tick_;
  const double now = time();
  resolve_outputs(predicted, now);

  if (scenario_) {
    StepOutput step = scenario_->step(tracker_.tracks(), t, period);
    for (auto& e : step.events) {
      event_log_.push_back(e);
      unsent_events_.push_back(std::move(e));
    }
    const double rate = scenario_->scenario().outline.update_rate;
    for (auto& cmd : step.commands) {
      overrides_[static_cast<std::size_t>(cmd.hand)] =
          FocusOverride{cmd.focus, now + cmd.burst, cmd.modulation_hz, std::move(cmd.shape_path), rate};
    }
  }

  append_metrics(t);
}

StateSnapshot Session::snapshot() const {
  StateSnapshot s;
  s.tick = tick_;
  s.t = time();
  for (const auto& p : platforms_) {
    for (const auto& r : p.robots) s.robots.push_back({r.id, r.pose});
  }
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    const auto& out = outputs_[i];
    PlatformView v;
    v.id = platforms_[i].id;
    v.pose = platforms_[i].pose;
    v.hand = out.hand;
    if (out.has_focus) {
      v.focus = out.solution.focus;
      v.quality = out.solution.quality;
    }
    v.edge_limited = platforms_[i].edge_limited;
    v.emitting = out.emitting;
    s.platforms.push_back(v);
  }
  for (const auto& track : tracker_.tracks()) {
    HandView v;
    v.hand = track.hand;
    if (track.has_data) v.position = track.position;
    v.stale = track.stale;
    s.hands.push_back(v);
  }
  s.events = unsent_events_;
  s.metrics.rows = metrics_.size();
  s.metrics.churn = churn_;
  s.metrics.served_area_m2 = static_cast<double>(served_count_) * kServedCell * kServedCell;
  for (int h = 0; h < kHandCount; ++h) {
    if (error_count_[h] > 0) s.metrics.mean_error[h] = error_sum_[h] / static_cast<double>(error_count_[h]);
  }
  if (scenario_) s.scenario = scenario_->scenario().name;
  return s;
}

StateSnapshot Session::take_snapshot() {
  StateSnapshot s = snapshot();
  unsent_events_.clear();
  return s;
}

std::uint64_t Session::state_hash() const {
  Fnv1a h;
  h.u64(tick_);
  h.u64(config_.seed);
  h.str(engine_state(rng_));
  for (std::size_t i = 0; i < platforms_.size(); ++i) {
    const auto& p = platforms_[i];
    h.pose(p.pose);
    for (double v : p.headings) h.f64(v);
    for (double v : p.drive_speeds) h.f64(v);
    h.flag(p.edge_limited);
    h.f64(p.last_scale);
    h.f64(p.last_twist.vx);
    h.f64(p.last_twist.vy);
    h.f64(p.last_twist.omega);
    for (const auto& r : p.robots) {
      h.pose(r.pose);
      h.f64(r.wheels.left);
      h.f64(r.wheels.right);
    }
    h.pose(estimates_[i]);
    h.pose(hold_targets_[i]);
    const auto& out = outputs_[i];
    h.flag(out.hand.has_value());
    h.u64(out.hand ? static_cast<std::uint64_t>(*out.hand) : 0);
    h.pose(out.target);
    h.flag(out.has_focus);
    h.point(out.requested);
    h.point(out.solution.focus);
    h.f64(out.solution.quality);
    for (double v : out.solution.phases) h.f64(v);
    h.flag(out.emitting);
  }
  for (const auto& batch : sensor_queue_) {
    for (const auto& per_robot : batch) {
      for (const auto& r : per_robot) {
        h.u64(static_cast<std::uint64_t>(r.robot_id));
        h.pose(r.measured);
        h.f64(r.timestamp);
        h.flag(r.valid);
      }
    }
  }
  h.u64(pending_.size());
  for (const auto& f : pending_) {
    h.f64(f.t);
    h.u64(static_cast<std::uint64_t>(f.hand));
    h.point(f.palm);
    h.flag(f.tracked);
  }
  for (const auto& last : last_submitted_) h.opt<double>(last, &Fnv1a::f64);
  for (const auto& t : tracker_.tracks()) {
    h.point(t.position);
    h.point(t.velocity);
    h.point(t.raw);
    h.f64(t.last_update);
    h.f64(t.last_frame);
    h.flag(t.has_frames);
    h.flag(t.has_data);
    h.flag(t.stale);
  }
  for (const auto& [pid, hid] : assignment_.platform_to_hand) {
    h.u64(static_cast<std::uint64_t>(pid));
    h.u64(static_cast<std::uint64_t>(hid));
  }
  h.f64(assignment_.cost);
  for (bool b : assigned_live_) h.flag(b);
  h.opt<double>(last_assign_time_, &Fnv1a::f64);
  h.u64(churn_);
  h.u64(assignment_runs_);

  h.flag(scenario_.has_value());
  if (scenario_) {
    h.str(scenario_->scenario().name);
    h.str(engine_state(scenario_->rng()));
    for (const auto& hs : scenario_->piano_state().hands) {
      h.flag(hs.known);
      h.flag(hs.armed);
    }
    const auto& m = scenario_->mole_state();
    h.flag(m.active);
    h.f64(m.position.x);
    h.f64(m.position.y);
    h.f64(m.spawned_at);
    for (double d : m.dwell) h.f64(d);
    h.u64(m.spawns);
    h.u64(m.hits);
    for (int a : scenario_->outline_state().active) h.u64(static_cast<std::uint64_t>(a + 1));
  }
  for (const auto& ov : overrides_) {
    h.flag(ov.has_value());
    if (!ov) continue;
    h.point(ov->focus);
    h.f64(ov->until);
    h.f64(ov->modulation_hz);
    for (const auto& p : ov->path) h.point(p);
    h.f64(ov->update_rate);
  }
  h.u64(event_log_.size());
  h.u64(unsent_events_.size());
  for (const auto& e : event_log_) {
    h.f64(e.t);
    h.str(e.kind);
    h.str(e.label);
    h.point(e.position);
  }

  h.u64(metrics_.size());
  if (!metrics_.empty()) {
    const auto& r = metrics_.back();
    h.f64(r.t);
    for (const auto& e : r.error) h.opt<double>(e, &Fnv1a::f64);
    for (const auto& q : r.quality) h.opt<double>(q, &Fnv1a::f64);
    h.f64(r.edge_limited_fraction);
  }
  h.u64(served_count_);
  for (double v : error_sum_) h.f64(v);
  for (auto v : error_count_) h.u64(v);
  return h.value();
}

}  // namespace haptibot
