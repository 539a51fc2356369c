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

#include <complex>
#include <iosfwd>
#include <span>
#include <vector>

#include "haptibot/config.hpp"
#include "haptibot/geometry.hpp"

namespace haptibot {

/// Rectangular phased array of circular piston transducers lying flat, facing +z.
///
/// Element (r, c) sits at local ((c - (cols-1)/2) * pitch, (r - (rows-1)/2) * pitch, 0);
/// element index is r * cols + c. The local frame is carried by `pose` in the mat plane
/// and lifted to `mounting_height`.
struct TransducerArray {
  int rows = 16;
  int cols = 16;
  double pitch = 0.010;
  double element_radius = 0.0045;
  double frequency = 40000.0;
  double speed_of_sound = 346.0;
  double reference_amplitude = 1.0;
  Transform2D pose{};
  double mounting_height = 0.0;

  static TransducerArray from_config(const Config& config, const Transform2D& pose = {});

  int size() const { return rows * cols; }
  double wavenumber() const { return kTwoPi * frequency / speed_of_sound; }
  double wavelength() const { return speed_of_sound / frequency; }
  /// Half of the array footprint along local x and y.
  Vec2 half_extent() const { return {0.5 * cols * pitch, 0.5 * rows * pitch}; }

  Point3D element_local(int index) const;
  Point3D element_position(int index) const;
  std::vector<Point3D> element_positions() const;

  /// World point to array-local coordinates (z measured from the array surface).
  Point3D to_local(const Point3D& world) const;
  Point3D to_world(const Point3D& local) const;
};

struct PhaseSolution {
  std::vector<double> phases;      // radians, [0, 2pi)
  std::vector<double> amplitudes;  // [0, 1]
  Point3D focus{};                 // delivered focus
  double quality = 1.0;
};

/// Normalized far-field directivity of a circular piston, 2 J1(x) / x with x = k a sin(theta).
double piston_directivity(double x);

/// Single-focus phases: phase_i = wrap_[0,2pi)(-k d_i), unit amplitudes.
/// Throws std::invalid_argument when the focus is less than `min_height` above the array
/// surface (or not above it at all) or coincides with an element centre.
PhaseSolution focus_phases(const TransducerArray& array, const Point3D& focus, double min_height = 0.02);

/// Linear superposition of piston sources with compensated summation.
/// Throws std::invalid_argument if `point` coincides with an element centre.
std::complex<double> pressure_at(const TransducerArray& array, const PhaseSolution& solution,
                                 const Point3D& point);

/// Sum of |term_i| at a point, i.e. the magnitude reached when all terms are in phase.
double in_phase_magnitude(const TransducerArray& array, const PhaseSolution& solution, const Point3D& point);

struct Frustum {
  double z_min = 0.05;
  double z_max = 0.40;
  double lateral_margin = 0.05;
  double quality_scale = 0.1;
  double focus_min_height = 0.02;

  static Frustum from_config(const Config& config);
};

/// Clamps `requested` into the array's serviceable frustum, componentwise in the array frame.
Point3D clamp_to_frustum(const TransducerArray& array, const Point3D& requested, const Frustum& frustum);

/// Clamped focus with quality = max(0, 1 - miss / quality_scale). Never throws.
PhaseSolution resolve_focus(const TransducerArray& array, const Point3D& requested, const Frustum& frustum = {});

enum class PlaneAxis { kX, kY, kZ };

/// Axis-aligned sampling plane. In-plane coordinates (u, v) are (x, y) for a z plane,
/// (y, z) for an x plane and (x, z) for a y plane.
struct SliceSpec {
  PlaneAxis axis = PlaneAxis::kZ;
  double offset = 0.0;
  Vec2 center{};  // (u, v) of the slice centre
  double width = 0.06;
  double height = 0.06;
  double resolution = 0.001;
};

/// Row-major |p| samples at cell centres: u_i = center.u + (i + 0.5 - nu/2) res, with
/// nu = round(width / res) (at least 1); likewise for v.
/// Samples that land on an element centre hold NaN and are counted in `unset`.
struct FieldGrid {
  SliceSpec spec;
  int nu = 0;
  int nv = 0;
  std::vector<double> magnitude;
  int unset = 0;

  double u_at(int iu) const;
  double v_at(int iv) const;
  Point3D position(int iu, int iv) const;
  double at(int iu, int iv) const { return magnitude[static_cast<std::size_t>(iv) * nu + iu]; }
  /// Index (iu, iv) of the largest set sample.
  std::pair<int, int> argmax() const;
  /// True when the closed cell (iu, iv) contains the in-plane point `uv`.
  bool cell_contains(int iu, int iv, Vec2 uv) const;
};

inline constexpr std::size_t kMaxSliceSamples = 1'000'000;

/// Throws std::invalid_argument for a non-positive resolution or more than kMaxSliceSamples samples.
FieldGrid field_slice(const TransducerArray& array, const PhaseSolution& solution, const SliceSpec& spec);

/// Plain P2 graymap; pixel = round(255 * m / max), unset samples are 0. Image row 0 is grid row 0.
void write_pgm(const FieldGrid& grid, std::ostream& out);
/// In-plane coordinates and magnitude with 9 significant digits; the header names the
/// plane axes ("x,y,magnitude" for a z plane). Unset samples print "nan".
void write_field_csv(const FieldGrid& grid, std::ostream& out);

struct ModulationState {
  double frequency = 200.0;      // Hz
  double duty = 0.5;
  double burst_remaining = 0.0;  // s
};

/// Square-wave AM envelope: 1 during the first duty * period of each period while a burst is active.
int am_envelope(const ModulationState& state, double t);

/// One cycle of focal points walking the closed polyline at constant arc-length spacing
/// speed / rate, starting at the first vertex. The cycle holds floor(L / spacing) samples.
/// Throws std::invalid_argument on a zero-length path or non-positive speed/rate.
std::vector<Point3D> stm_path(std::span<const Point3D> shape, double traversal_speed, double update_rate);

}  // namespace haptibot
