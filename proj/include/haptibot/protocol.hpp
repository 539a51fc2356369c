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

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "haptibot/config.hpp"
#include "haptibot/scenarios.hpp"
#include "haptibot/session.hpp"
#include "haptibot/tracking.hpp"

namespace haptibot {

inline constexpr std::size_t kMaxFrameBytes = 64 * 1024;

// Client -> server.
struct HandMsg {
  HandFrame frame;
  friend bool operator==(const HandMsg&, const HandMsg&) = default;
};

enum class ScenarioAction { kLoad, kStop };

struct ScenarioMsg {
  ScenarioAction action = ScenarioAction::kLoad;
  std::string name;
  friend bool operator==(const ScenarioMsg&, const ScenarioMsg&) = default;
};

struct ConfigGetMsg {
  friend bool operator==(const ConfigGetMsg&, const ConfigGetMsg&) = default;
};

struct ResetMsg {
  std::uint64_t seed = 1;
  friend bool operator==(const ResetMsg&, const ResetMsg&) = default;
};

// Server -> client.
struct SnapshotMsg {
  StateSnapshot snapshot;
  friend bool operator==(const SnapshotMsg&, const SnapshotMsg&) = default;
};

struct EventMsg {
  ScenarioEvent event;
  friend bool operator==(const EventMsg&, const EventMsg&) = default;
};

struct ErrorMsg {
  std::string reason;
  friend bool operator==(const ErrorMsg&, const ErrorMsg&) = default;
};

struct ConfigMsg {
  Config config;
  friend bool operator==(const ConfigMsg&, const ConfigMsg&) = default;
};

using Message = std::variant<HandMsg, ScenarioMsg, ConfigGetMsg, ResetMsg, SnapshotMsg, EventMsg, ErrorMsg, ConfigMsg>;

/// One JSON object, discriminated by "type".
std::string encode(const Message& message);

enum class DecodeError { kNone, kMalformed, kUnknownType, kOversized };

struct DecodeResult {
  std::optional<Message> message;
  DecodeError error = DecodeError::kNone;
  std::string reason;  // "malformed: ...", "unknown type: ...", "oversized: ..."

  bool ok() const { return message.has_value(); }
};

/// Never throws. Oversized input is reported without being parsed.
DecodeResult decode(std::string_view bytes);

/// Replay-file line: the "hand" message body; "type" is optional.
HandFrame parse_replay_line(std::string_view line);

/// Reads a JSON Lines replay file; blank lines are skipped. Throws std::runtime_error with the
/// line number on a malformed line.
std::vector<HandFrame> load_replay_file(const std::string& path);

}  // namespace haptibot
