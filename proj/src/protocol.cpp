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

#include "haptibot/protocol.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace haptibot {

using nlohmann::json;

namespace {

// Raised while decoding a structurally wrong message.
struct Malformed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UnknownType : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Malformed(what);
}

const json& field(const json& obj, const char* key) {
  auto it = obj.find(key);
  require(it != obj.end(), std::string("missing field \"") + key + "\"");
  return *it;
}

double number(const json& obj, const char* key) {
  const json& v = field(obj, key);
  require(v.is_number(), std::string("\"") + key + "\" must be a number");
  return v.get<double>();
}

void only_keys(const json& obj, std::initializer_list<const char*> allowed) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    require(known, "unexpected field \"" + key + "\"");
  }
}

HandFrame hand_from_json(const json& j) {
  only_keys(j, {"type", "t", "hand", "pos", "tracked"});
  HandFrame f;
  f.t = number(j, "t");
  const json& hand = field(j, "hand");
  require(hand.is_string(), "\"hand\" must be \"left\" or \"right\"");
  auto h = parse_hand(hand.get<std::string>());
  require(h.has_value(), "\"hand\" must be \"left\" or \"right\"");
  f.hand = *h;
  const json& tracked = field(j, "tracked");
  require(tracked.is_boolean(), "\"tracked\" must be a boolean");
  f.tracked = tracked.get<bool>();
  auto pos = j.find("pos");
  if (pos == j.end() || pos->is_null()) {
    require(!f.tracked, "missing field \"pos\"");
  } else {
    require(pos->is_array() && pos->size() == 3 && (*pos)[0].is_number() && (*pos)[1].is_number() &&
                (*pos)[2].is_number(),
            "\"pos\" must be [x, y, z]");
    f.palm = {(*pos)[0].get<double>(), (*pos)[1].get<double>(), (*pos)[2].get<double>()};
  }
  return f;
}

json hand_to_json(const HandFrame& f) {
  json j{{"type", "hand"}, {"t", f.t}, {"hand", hand_name(f.hand)}, {"tracked", f.tracked}};
  j["pos"] = json::array({f.palm.x, f.palm.y, f.palm.z});
  return j;
}

Message decode_object(const json& j) {
  require(j.is_object(), "frame must be a JSON object");
  const json& type_field = field(j, "type");
  require(type_field.is_string(), "\"type\" must be a string");
  const std::string type = type_field.get<std::string>();

  if (type == "hand") return HandMsg{hand_from_json(j)};
  if (type == "scenario") {
    only_keys(j, {"type", "action", "name"});
    const json& action = field(j, "action");
    require(action.is_string(), "\"action\" must be \"load\" or \"stop\"");
    ScenarioMsg m;
    if (action == "load") {
      m.action = ScenarioAction::kLoad;
    } else if (action == "stop") {
      m.action = ScenarioAction::kStop;
    } else {
      throw Malformed("\"action\" must be \"load\" or \"stop\"");
    }
    auto name = j.find("name");
    if (name != j.end()) {
      require(name->is_string(), "\"name\" must be a string");
      m.name = name->get<std::string>();
    }
    require(m.action == ScenarioAction::kStop || !m.name.empty(), "missing field \"name\"");
    return m;
  }
  if (type == "config_get") {
    only_keys(j, {"type"});
    return ConfigGetMsg{};
  }
  if (type == "reset") {
    only_keys(j, {"type", "seed"});
    const json& seed = field(j, "seed");
    require(seed.is_number_unsigned(), "\"seed\" must be a non-negative integer");
    return ResetMsg{seed.get<std::uint64_t>()};
  }
  if (type == "snapshot") {
    try {
      return SnapshotMsg{snapshot_from_json(j)};
    } catch (const std::exception& e) {
      throw Malformed(std::string("snapshot: ") + e.what());
    }
  }
  if (type == "event") {
    try {
      return EventMsg{event_from_json(field(j, "event"))};
    } catch (const Malformed&) {
      throw;
    } catch (const std::exception& e) {
      throw Malformed(std::string("event: ") + e.what());
    }
  }
  if (type == "error") {
    only_keys(j, {"type", "reason"});
    const json& reason = field(j, "reason");
    require(reason.is_string(), "\"reason\" must be a string");
    return ErrorMsg{reason.get<std::string>()};
  }
  if (type == "config") {
    auto result = validate_config(field(j, "config"));
    if (!result.ok()) {
      std::string msg = "config:";
      for (const auto& e : result.errors) msg += " " + e + ";";
      throw Malformed(msg);
    }
    return ConfigMsg{*result.config};
  }
  throw UnknownType(type);
}

}  // namespace

std::string encode(const Message& message) {
  json j = std::visit(
      [](const auto& m) -> json {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, HandMsg>) {
          return hand_to_json(m.frame);
        } else if constexpr (std::is_same_v<T, ScenarioMsg>) {
          return json{{"type", "scenario"}, {"action", m.action == ScenarioAction::kLoad ? "load" : "stop"},
                      {"name", m.name}};
        } else if constexpr (std::is_same_v<T, ConfigGetMsg>) {
          return json{{"type", "config_get"}};
        } else if constexpr (std::is_same_v<T, ResetMsg>) {
          return json{{"type", "reset"}, {"seed", m.seed}};
        } else if constexpr (std::is_same_v<T, SnapshotMsg>) {
          return snapshot_to_json(m.snapshot);
        } else if constexpr (std::is_same_v<T, EventMsg>) {
          return json{{"type", "event"}, {"event", event_to_json(m.event)}};
        } else if constexpr (std::is_same_v<T, ErrorMsg>) {
          return json{{"type", "error"}, {"reason", m.reason}};
        } else {
          return json{{"type", "config"}, {"config", config_to_json(m.config)}};
        }
      },
      message);
  // Error reasons may quote client bytes; invalid UTF-8 becomes U+FFFD instead of throwing.
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

DecodeResult decode(std::string_view bytes) {
  DecodeResult out;
  if (bytes.size() > kMaxFrameBytes) {
    out.error = DecodeError::kOversized;
    out.reason = "oversized: " + std::to_string(bytes.size()) + " bytes > " + std::to_string(kMaxFrameBytes);
    return out;
  }
  json j;
  try {
    j = json::parse(bytes);
  } catch (const json::parse_error& e) {
    out.error = DecodeError::kMalformed;
    out.reason = std::string("malformed: invalid JSON (") + e.what() + ")";
    return out;
  }
  try {
    out.message = decode_object(j);
  } catch (const Malformed& e) {
    out.error = DecodeError::kMalformed;
    out.reason = std::string("malformed: ") + e.what();
  } catch (const UnknownType& e) {
    out.error = DecodeError::kUnknownType;
    out.reason = std::string("unknown type: ") + e.what();
  } catch (const std::exception& e) {
    out.error = DecodeError::kMalformed;
    out.reason = std::string("malformed: ") + e.what();
  }
  return out;
}

HandFrame parse_replay_line(std::string_view line) {
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::runtime_error("line must be a JSON object");
  if (auto type = j.find("type"); type != j.end() && *type != "hand") {
    throw std::runtime_error("\"type\" must be \"hand\" when present");
  }
  try {
    return hand_from_json(j);
  } catch (const Malformed& e) {
    throw std::runtime_error(e.what());
  }
}

std::vector<HandFrame> load_replay_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open replay file: " + path);
  std::vector<HandFrame> frames;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      frames.push_back(parse_replay_line(line));
    } catch (const std::exception& e) {
      throw std::runtime_error(path + ":" + std::to_string(number) + ": " + e.what());
    }
  }
  return frames;
}

}  // namespace haptibot
