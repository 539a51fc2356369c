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

#include "haptibot/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace haptibot {

const char* hand_name(Hand hand) { return hand == Hand::kLeft ? "left" : "right"; }

std::optional<Hand> parse_hand(std::string_view name) {
  if (name == "left") return Hand::kLeft;
  if (name == "right") return Hand::kRight;
  return std::nullopt;
}

namespace {

bool finite(const Point3D& p) { return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.z); }

}  // namespace

IngestResult ingest(const HandTrack& track, const HandFrame& frame, const FilterParams& params) {
  IngestResult out{track, IngestStatus::kAccepted};
  if (!std::isfinite(frame.t) || (frame.tracked && !finite(frame.palm))) {
    out.status = IngestStatus::kNonFinite;
    return out;
  }
  if (track.has_frames && frame.t <= track.last_frame) {
    out.status = IngestStatus::kOutOfOrder;
    return out;
  }

  HandTrack& next = out.track;
  next.hand = frame.hand;
  next.last_frame = frame.t;
  next.has_frames = true;
  if (!frame.tracked) {
    next.stale = next.stale || !next.has_data || (frame.t - next.last_update) > params.staleness_timeout;
    out.status = IngestStatus::kUntracked;
    return out;
  }

  const bool restart = !next.has_data || (frame.t - next.last_update) > params.staleness_timeout;
  if (restart) {
    next.position = frame.palm;
    next.velocity = {};
  } else {
    const double dt = frame.t - next.last_update;
    const Point3D previous = next.position;
    next.position = params.alpha * frame.palm + (1.0 - params.alpha) * previous;
    const Point3D raw_velocity = (1.0 / dt) * (next.position - previous);
    next.velocity = params.alpha * raw_velocity + (1.0 - params.alpha) * next.velocity;
  }
  next.raw = frame.palm;
  next.last_update = frame.t;
  next.has_data = true;
  next.stale = false;
  return out;
}

HandTrack update_staleness(const HandTrack& track, double now, const FilterParams& params) {
  HandTrack next = track;
  if (!next.has_data || (now - next.last_update) > params.staleness_timeout) next.stale = true;
  return next;
}

Point3D predict(const HandTrack& track, double horizon) {
  if (track.stale) throw StaleTrackError(std::string("predict: ") + hand_name(track.hand) + " track is stale");
  return track.position + horizon * track.velocity;
}

HandTracker::HandTracker(FilterParams params) : params_(params) {
  tracks_[0].hand = Hand::kLeft;
  tracks_[1].hand = Hand::kRight;
}

IngestStatus HandTracker::ingest(const HandFrame& frame) {
  auto& slot = tracks_[static_cast<std::size_t>(frame.hand)];
  auto result = haptibot::ingest(slot, frame, params_);
  switch (result.status) {
    case IngestStatus::kOutOfOrder:
      ++dropped_out_of_order_;
      break;
    case IngestStatus::kNonFinite:
      ++dropped_non_finite_;
      break;
    default:
      slot = result.track;
      break;
  }
  return result.status;
}

void HandTracker::update_staleness(double now) {
  for (auto& t : tracks_) t = haptibot::update_staleness(t, now, params_);
}

std::vector<int> hungarian(const std::vector<double>& cost, int n) {
  // Potential-based O(n^3) formulation; rows and columns are 1-based internally.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0);
  std::vector<double> v(n + 1, 0.0);
  std::vector<int> match(n + 1, 0);  // column -> row
  std::vector<int> way(n + 1, 0);
  for (int row = 1; row <= n; ++row) {
    match[0] = row;
    int col0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[col0] = 1;
      const int r = match[col0];
      double delta = inf;
      int col1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[static_cast<std::size_t>(r - 1) * n + (j - 1)] - u[r] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = col0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          col1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      col0 = col1;
    } while (match[col0] != 0);
    do {
      const int col1 = way[col0];
      match[col0] = match[col1];
      col0 = col1;
    } while (col0 != 0);
  }
  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) {
    if (match[j] != 0) row_to_col[match[j] - 1] = j - 1;
  }
  return row_to_col;
}

double assignment_cost(std::span<const AssignSite> platforms, std::span<const AssignSite> hands,
                       const std::map<int, int>& platform_to_hand) {
  double total = 0.0;
  for (const auto& [pid, hid] : platform_to_hand) {
    const auto p = std::find_if(platforms.begin(), platforms.end(), [&](const AssignSite& s) { return s.id == pid; });
    const auto h = std::find_if(hands.begin(), hands.end(), [&](const AssignSite& s) { return s.id == hid; });
    if (p == platforms.end() || h == hands.end()) throw std::invalid_argument("assignment_cost: unknown id");
    total += norm(p->position - h->position);
  }
  return total;
}

namespace {

// Optimal cost of matching the remaining rows/columns, dummies cost 0.
double residual_optimum(const std::vector<std::vector<double>>& dist, const std::vector<char>& row_free,
                        const std::vector<char>& col_free) {
  std::vector<int> rows;
  std::vector<int> cols;
  for (std::size_t i = 0; i < row_free.size(); ++i)
    if (row_free[i]) rows.push_back(static_cast<int>(i));
  for (std::size_t j = 0; j < col_free.size(); ++j)
    if (col_free[j]) cols.push_back(static_cast<int>(j));
  const int n = static_cast<int>(std::max(rows.size(), cols.size()));
  if (n == 0 || rows.empty() || cols.empty()) return 0.0;
  std::vector<double> m(static_cast<std::size_t>(n) * n, 0.0);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (std::size_t b = 0; b < cols.size(); ++b) m[a * n + b] = dist[rows[a]][cols[b]];
  const auto sol = hungarian(m, n);
  double total = 0.0;
  for (std::size_t a = 0; a < rows.size(); ++a) {
    const auto b = static_cast<std::size_t>(sol[a]);
    if (b < cols.size()) total += dist[rows[a]][cols[b]];
  }
  return total;
}

}  // namespace

Assignment assign(std::span<const AssignSite> platforms, std::span<const AssignSite> hands) {
  std::vector<AssignSite> ps(platforms.begin(), platforms.end());
  std::vector<AssignSite> hs(hands.begin(), hands.end());
  auto by_id = [](const AssignSite& a, const AssignSite& b) { return a.id < b.id; };
  std::sort(ps.begin(), ps.end(), by_id);
  std::sort(hs.begin(), hs.end(), by_id);

  Assignment out;
  if (ps.empty() || hs.empty()) return out;

  std::vector<std::vector<double>> dist(ps.size(), std::vector<double>(hs.size()));
  for (std::size_t i = 0; i < ps.size(); ++i)
    for (std::size_t j = 0; j < hs.size(); ++j) dist[i][j] = norm(ps[i].position - hs[j].position);

  std::vector<char> row_free(ps.size(), 1);
  std::vector<char> col_free(hs.size(), 1);
  const double optimum = residual_optimum(dist, row_free, col_free);
  const double tol = 1e-12 * (1.0 + optimum);
  const std::size_t pairs = std::min(ps.size(), hs.size());

  double fixed = 0.0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    row_free[i] = 0;
    bool placed = false;
    for (std::size_t j = 0; j < hs.size() && !placed; ++j) {
      if (!col_free[j]) continue;
      col_free[j] = 0;
      const double total = fixed + dist[i][j] + residual_optimum(dist, row_free, col_free);
      // The remaining rows must still be able to fill the required number of pairs.
      const std::size_t rows_left = ps.size() - i - 1;
      const std::size_t cols_left = hs.size() - matched - 1;
      const bool feasible = std::min(rows_left, cols_left) + matched + 1 == pairs;
      if (feasible && total <= optimum + tol) {
        out.platform_to_hand[ps[i].id] = hs[j].id;
        fixed += dist[i][j];
        ++matched;
        placed = true;
      } else {
        col_free[j] = 1;
      }
    }
    // Leaving this platform unassigned is only possible when platforms outnumber hands.
  }
  out.cost = assignment_cost(ps, hs, out.platform_to_hand);
  return out;
}

}  // namespace haptibot
