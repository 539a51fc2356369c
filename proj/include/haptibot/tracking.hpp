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
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "haptibot/geometry.hpp"

namespace haptibot {

enum class Hand : int { kLeft = 0, kRight = 1 };
inline constexpr int kHandCount = 2;

const char* hand_name(Hand hand);
std::optional<Hand> parse_hand(std::string_view name);

/// One tracked-hand observation.
struct HandFrame {
  double t = 0.0;  // s
  Hand hand = Hand::kLeft;
  Point3D palm{};
  bool tracked = true;

  friend bool operator==(const HandFrame&, const HandFrame&) = default;
};

struct FilterParams {
  double alpha = 0.6;             // weight of the new observation
  double staleness_timeout = 0.5; // s
};

/// Filtered state for one hand.
struct HandTrack {
  Hand hand = Hand::kLeft;
  Point3D position{};  // filtered
  Point3D velocity{};  // filtered, m/s
  Point3D raw{};       // last accepted observation
  double last_update = 0.0;  // time of the last accepted tracked frame
  double last_frame = 0.0;   // time of the last frame of any kind
  bool has_frames = false;  // any frame seen, tracked or not
  bool has_data = false;    // at least one tracked frame
  bool stale = true;

  friend bool operator==(const HandTrack&, const HandTrack&) = default;
};

enum class IngestStatus { kAccepted, kUntracked, kOutOfOrder, kNonFinite };

struct IngestResult {
  HandTrack track;
  IngestStatus status = IngestStatus::kAccepted;
};

/// Exponential smoothing on position, smoothed finite difference on velocity.
/// The first frame (or the first after the track went stale) initializes position with zero
/// velocity. Untracked frames only advance staleness; rejected frames leave the track unchanged.
IngestResult ingest(const HandTrack& track, const HandFrame& frame, const FilterParams& params);

/// Re-evaluates staleness at `now`. Stale stays stale until a newer tracked frame arrives.
HandTrack update_staleness(const HandTrack& track, double now, const FilterParams& params);

class StaleTrackError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Constant-velocity extrapolation. Throws StaleTrackError for stale tracks.
Point3D predict(const HandTrack& track, double horizon);

/// Both hands plus rejection counters.
class HandTracker {
 public:
  explicit HandTracker(FilterParams params = {});

  IngestStatus ingest(const HandFrame& frame);
  void update_staleness(double now);

  const HandTrack& track(Hand hand) const { return tracks_[static_cast<std::size_t>(hand)]; }
  std::span<const HandTrack> tracks() const { return tracks_; }
  std::uint64_t dropped_out_of_order() const { return dropped_out_of_order_; }
  std::uint64_t dropped_non_finite() const { return dropped_non_finite_; }

 private:
  FilterParams params_;
  std::array<HandTrack, kHandCount> tracks_;
  std::uint64_t dropped_out_of_order_ = 0;
  std::uint64_t dropped_non_finite_ = 0;
};

struct AssignSite {
  int id = 0;
  Vec2 position{};
};

/// Platform id -> hand id, injective. Platforms absent from the map are unassigned.
struct Assignment {
  std::map<int, int> platform_to_hand;
  double cost = 0.0;  // sum of distances, accumulated in ascending platform id

  friend bool operator==(const Assignment&, const Assignment&) = default;
};

/// Minimum total distance matching of min(P, H) pairs (Hungarian method). Among optimal
/// matchings, platforms are visited in ascending id and each takes the lowest hand id that
/// still admits an optimal completion.
Assignment assign(std::span<const AssignSite> platforms, std::span<const AssignSite> hands);

/// Total distance of a given matching, summed in ascending platform id.
double assignment_cost(std::span<const AssignSite> platforms, std::span<const AssignSite> hands,
                       const std::map<int, int>& platform_to_hand);

/// Solves a square cost matrix (row-major n x n); returns the column of each row.
std::vector<int> hungarian(const std::vector<double>& cost, int n);

}  // namespace haptibot
