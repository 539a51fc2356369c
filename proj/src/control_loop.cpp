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

#include "haptibot/control_loop.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

namespace haptibot {

namespace {

constexpr double kArrivalStep = 1e-6;  // s between frames stamped within one tick

std::string error_frame(const std::string& reason) { return encode(ErrorMsg{reason}); }

}  // namespace

ControlLoop::ControlLoop(Config config, std::map<std::string, Scenario> scenarios, TimestampMode mode)
    : session_(std::move(config)), scenarios_(std::move(scenarios)), mode_(mode) {}

InboundResult ControlLoop::handle_text(std::string_view text) {
  DecodeResult decoded = decode(text);
  if (!decoded.ok()) {
    InboundResult out;
    out.replies.push_back(error_frame(decoded.reason));
    out.close = decoded.error == DecodeError::kOversized;
    return out;
  }
  return handle(*decoded.message);
}

InboundResult ControlLoop::handle(const Message& message) {
  InboundResult out;
  if (const auto* hand = std::get_if<HandMsg>(&message)) {
    HandFrame frame = hand->frame;
    if (mode_ == TimestampMode::kArrival) {
      // Stamp into (t_k - period, t_k] so the next tick ingests it.
      const double period = session_.config().control_period();
      const double offset = static_cast<double>(arrivals_this_tick_ + 1) * kArrivalStep;
      if (offset >= period) {
        out.replies.push_back(error_frame("rate limit: too many hand frames in one control tick"));
        return out;
      }
      frame.t = session_.time() - period + offset;
    }
    switch (session_.submit(frame)) {
      case SubmitStatus::kQueued:
        if (mode_ == TimestampMode::kArrival) ++arrivals_this_tick_;
        break;
      case SubmitStatus::kOutOfOrder:
        out.replies.push_back(error_frame("out of order: hand frame t must increase per hand"));
        break;
      case SubmitStatus::kNonFinite:
        out.replies.push_back(error_frame("malformed: non-finite hand frame"));
        break;
    }
    return out;
  }
  if (const auto* sc = std::get_if<ScenarioMsg>(&message)) {
    if (sc->action == ScenarioAction::kStop) {
      session_.stop_scenario();
      return out;
    }
    auto it = scenarios_.find(sc->name);
    if (it == scenarios_.end()) {
      out.replies.push_back(error_frame("unknown scenario: " + sc->name));
      return out;
    }
    session_.load_scenario(it->second);
    return out;
  }
  if (std::holds_alternative<ConfigGetMsg>(message)) {
    out.replies.push_back(encode(ConfigMsg{session_.config()}));
    return out;
  }
  if (const auto* reset = std::get_if<ResetMsg>(&message)) {
    session_.reset(reset->seed);
    arrivals_this_tick_ = 0;
    events_sent_ = 0;
    return out;
  }
  out.replies.push_back(error_frame("unsupported: server-to-client message type sent by a client"));
  return out;
}

bool ControlLoop::snapshot_due(std::uint64_t tick) const {
  if (tick == 1) return true;
  if (tick == 0) return false;
  const double ratio = session_.config().rates.snapshot_hz / session_.config().rates.control_hz;
  const auto now = static_cast<std::uint64_t>(std::floor(static_cast<double>(tick) * ratio + 1e-9));
  const auto before = static_cast<std::uint64_t>(std::floor(static_cast<double>(tick - 1) * ratio + 1e-9));
  return now != before;
}

std::vector<std::string> ControlLoop::tick() {
  session_.tick();
  arrivals_this_tick_ = 0;
  std::vector<std::string> out;
  const auto& log = session_.event_log();
  for (; events_sent_ < log.size(); ++events_sent_) out.push_back(encode(EventMsg{log[events_sent_]}));
  if (snapshot_due(session_.tick_index())) out.push_back(encode(SnapshotMsg{session_.take_snapshot()}));
  return out;
}

std::map<std::string, Scenario> load_scenario_dir(const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  std::map<std::string, Scenario> out;
  for (const auto& f : files) {
    Scenario s = load_scenario_file(f.string());
    if (out.count(s.name)) throw ScenarioError("duplicate scenario name \"" + s.name + "\" in " + f.string());
    out.emplace(s.name, std::move(s));
  }
  return out;
}

}  // namespace haptibot
