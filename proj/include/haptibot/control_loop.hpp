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
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "haptibot/protocol.hpp"
#include "haptibot/session.hpp"

namespace haptibot {

enum class TimestampMode {
  kArrival,  // frames are stamped into sim time when they reach the loop
  kClient,   // the client's "t" is used as-is (replay over the wire)
};

/// Replies for the client that sent a frame.
struct InboundResult {
  std::vector<std::string> replies;
  bool close = false;
};

/// Owns the session on behalf of the network front end. Not thread-safe: the server calls it
/// from a single control thread, tests and replay call it directly.
class ControlLoop {
 public:
  ControlLoop(Config config, std::map<std::string, Scenario> scenarios, TimestampMode mode = TimestampMode::kArrival);

  /// Decodes and applies one inbound text frame. Invalid input yields an "error" reply and
  /// leaves the session untouched; oversized input also asks for the connection to close.
  InboundResult handle_text(std::string_view text);
  InboundResult handle(const Message& message);

  /// Runs one tick and returns the broadcast frames it produced: one "event" per new scenario
  /// event, then a "snapshot" when one is due.
  std::vector<std::string> tick();

  /// Snapshots go out whenever floor(tick * snapshot_hz / control_hz) advances, and after tick 1.
  bool snapshot_due(std::uint64_t tick) const;

  const Session& session() const { return session_; }
  Session& session() { return session_; }
  TimestampMode mode() const { return mode_; }
  const std::map<std::string, Scenario>& scenarios() const { return scenarios_; }

 private:
  Session session_;
  std::map<std::string, Scenario> scenarios_;
  TimestampMode mode_;
  std::uint64_t arrivals_this_tick_ = 0;
  std::size_t events_sent_ = 0;
};

/// Loads every *.json file in `dir` as a scenario, keyed by its "name". Throws ScenarioError on
/// an invalid file or a duplicate name.
std::map<std::string, Scenario> load_scenario_dir(const std::string& dir);

}  // namespace haptibot
