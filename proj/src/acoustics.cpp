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

#include "haptibot/acoustics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

namespace haptibot {

namespace {

// Neumaier compensated sum.
class CompensatedSum {
 public:
  void add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

struct Term {
  double magnitude;
  double argument;
};

// One element's contribution; d must be > 0.
Term element_term(const TransducerArray& array, const Point3D& element, double amplitude, double phase,
                  const Point3D& point, double d) {
  const double lateral = std::hypot(point.x - element.x, point.y - element.y);
  const double sin_theta = lateral / d;
  const double k = array.wavenumber();
  const double directivity = piston_directivity(k * array.element_radius * sin_theta);
  return {amplitude * array.reference_amplitude * directivity / d, k * d + phase};
}

void check_solution(const TransducerArray& array, const PhaseSolution& solution) {
  const auto n = static_cast<std::size_t>(array.size());
  if (solution.phases.size() != n || solution.amplitudes.size() != n) {
    throw std::invalid_argument("phase solution size does not match the array");
  }
}

}  // namespace

TransducerArray TransducerArray::from_config(const Config& config, const Transform2D& pose) {
  TransducerArray a;
  a.rows = config.array.rows;
  a.cols = config.array.cols;
  a.pitch = config.array.pitch;
  a.element_radius = config.array.element_radius;
  a.frequency = config.array.frequency;
  a.speed_of_sound = config.acoustics.speed_of_sound;
  a.reference_amplitude = config.array.reference_amplitude;
  a.pose = pose;
  a.mounting_height = config.array.mounting_height;
  return a;
}

Point3D TransducerArray::element_local(int index) const {
  const int r = index / cols;
  const int c = index % cols;
  return {(c - 0.5 * (cols - 1)) * pitch, (r - 0.5 * (rows - 1)) * pitch, 0.0};
}

Point3D TransducerArray::element_position(int index) const { return to_world(element_local(index)); }

std::vector<Point3D> TransducerArray::element_positions() const {
  std::vector<Point3D> out;
  out.reserve(static_cast<std::size_t>(size()));
  for (int i = 0; i < size(); ++i) out.push_back(element_position(i));
  return out;
}

Point3D TransducerArray::to_local(const Point3D& world) const {
  const Vec2 rel = rotate(Vec2{world.x - pose.translation.x, world.y - pose.translation.y}, -pose.rotation);
  return {rel.x, rel.y, world.z - mounting_height};
}

Point3D TransducerArray::to_world(const Point3D& local) const {
  const Vec2 p = apply_transform(pose, Vec2{local.x, local.y});
  return {p.x, p.y, local.z + mounting_height};
}

double piston_directivity(double x) {
  x = std::abs(x);
  if (x < 1e-3) {
    // 2 J1(x)/x = 1 - x^2/8 + x^4/192 - ...; truncation error below 1e-20 here.
    const double x2 = x * x;
    return 1.0 - x2 / 8.0 + x2 * x2 / 192.0;
  }
  return 2.0 * std::cyl_bessel_j(1.0, x) / x;
}

PhaseSolution focus_phases(const TransducerArray& array, const Point3D& focus, double min_height) {
  const double height = array.to_local(focus).z;
  if (!(height > 0.0)) {
    throw std::invalid_argument("degenerate focus: at or below the array plane");
  }
  if (height < min_height) {
    throw std::invalid_argument("degenerate focus: " + std::to_string(height) +
                                " m above the array, minimum is " + std::to_string(min_height) + " m");
  }
  const double k = array.wavenumber();
  PhaseSolution s;
  s.phases.reserve(static_cast<std::size_t>(array.size()));
  s.amplitudes.assign(static_cast<std::size_t>(array.size()), 1.0);
  for (int i = 0; i < array.size(); ++i) {
    const double d = distance(array.element_position(i), focus);
    if (d == 0.0) throw std::invalid_argument("degenerate focus: coincides with an element centre");
    s.phases.push_back(wrap_positive(-k * d));
  }
  s.focus = focus;
  s.quality = 1.0;
  return s;
}

std::complex<double> pressure_at(const TransducerArray& array, const PhaseSolution& solution,
                                 const Point3D& point) {
  check_solution(array, solution);
  CompensatedSum re;
  CompensatedSum im;
  for (int i = 0; i < array.size(); ++i) {
    const Point3D e = array.element_position(i);
    const double d = distance(e, point);
    if (d == 0.0) throw std::invalid_argument("pressure_at: point coincides with an element centre");
    const auto idx = static_cast<std::size_t>(i);
    const Term t = element_term(array, e, solution.amplitudes[idx], solution.phases[idx], point, d);
    re.add(t.magnitude * std::cos(t.argument));
    im.add(t.magnitude * std::sin(t.argument));
  }
  return {re.value(), im.value()};
}

double in_phase_magnitude(const TransducerArray& array, const PhaseSolution& solution, const Point3D& point) {
  check_solution(array, solution);
  CompensatedSum total;
  for (int i = 0; i < array.size(); ++i) {
    const Point3D e = array.element_position(i);
    const double d = distance(e, point);
    if (d == 0.0) throw std::invalid_argument("in_phase_magnitude: point coincides with an element centre");
    const auto idx = static_cast<std::size_t>(i);
    total.add(element_term(array, e, solution.amplitudes[idx], solution.phases[idx], point, d).magnitude);
  }
  return total.value();
}

Frustum Frustum::from_config(const Config& config) {
  return {config.acoustics.z_min, config.acoustics.z_max, config.acoustics.lateral_margin,
          config.acoustics.quality_scale, config.acoustics.focus_min_height};
}

Point3D clamp_to_frustum(const TransducerArray& array, const Point3D& requested, const Frustum& frustum) {
  const Point3D local = array.to_local(requested);
  const Vec2 half = array.half_extent();
  const double lx = half.x + frustum.lateral_margin;
  const double ly = half.y + frustum.lateral_margin;
  const Point3D clamped{std::clamp(local.x, -lx, lx), std::clamp(local.y, -ly, ly),
                        std::clamp(local.z, frustum.z_min, frustum.z_max)};
  if (clamped == local) return requested;
  return array.to_world(clamped);
}

PhaseSolution resolve_focus(const TransducerArray& array, const Point3D& requested, const Frustum& frustum) {
  const Point3D delivered = clamp_to_frustum(array, requested, frustum);
  PhaseSolution s = focus_phases(array, delivered, std::min(frustum.focus_min_height, frustum.z_min));
  const double miss = distance(delivered, requested);
  s.quality = std::max(0.0, 1.0 - miss / frustum.quality_scale);
  return s;
}

double FieldGrid::u_at(int iu) const { return spec.center.x + (iu + 0.5 - 0.5 * nu) * spec.resolution; }

double FieldGrid::v_at(int iv) const { return spec.center.y + (iv + 0.5 - 0.5 * nv) * spec.resolution; }

Point3D FieldGrid::position(int iu, int iv) const {
  const double u = u_at(iu);
  const double v = v_at(iv);
  switch (spec.axis) {
    case PlaneAxis::kX:
      return {spec.offset, u, v};
    case PlaneAxis::kY:
      return {u, spec.offset, v};
    case PlaneAxis::kZ:
      break;
  }
  return {u, v, spec.offset};
}

std::pair<int, int> FieldGrid::argmax() const {
  std::pair<int, int> best{-1, -1};
  double best_value = -std::numeric_limits<double>::infinity();
  for (int iv = 0; iv < nv; ++iv) {
    for (int iu = 0; iu < nu; ++iu) {
      const double m = at(iu, iv);
      if (!std::isnan(m) && m > best_value) {
        best_value = m;
        best = {iu, iv};
      }
    }
  }
  return best;
}

bool FieldGrid::cell_contains(int iu, int iv, Vec2 uv) const {
  const double h = 0.5 * spec.resolution;
  const double tol = 1e-12;
  return std::abs(uv.x - u_at(iu)) <= h + tol && std::abs(uv.y - v_at(iv)) <= h + tol;
}

FieldGrid field_slice(const TransducerArray& array, const PhaseSolution& solution, const SliceSpec& spec) {
  if (!(spec.resolution > 0.0)) throw std::invalid_argument("field_slice: resolution must be > 0");
  if (!(spec.width > 0.0) || !(spec.height > 0.0)) throw std::invalid_argument("field_slice: extent must be > 0");
  check_solution(array, solution);
  const double nu = std::max(1.0, std::round(spec.width / spec.resolution));
  const double nv = std::max(1.0, std::round(spec.height / spec.resolution));
  if (nu * nv > static_cast<double>(kMaxSliceSamples)) {
    throw std::invalid_argument("field_slice: grid of " + std::to_string(static_cast<long long>(nu * nv)) +
                                " samples exceeds the 1e6 limit");
  }
  FieldGrid grid;
  grid.spec = spec;
  grid.nu = static_cast<int>(nu);
  grid.nv = static_cast<int>(nv);
  grid.magnitude.assign(static_cast<std::size_t>(grid.nu) * grid.nv, 0.0);

  const auto elements = array.element_positions();
  for (int iv = 0; iv < grid.nv; ++iv) {
    for (int iu = 0; iu < grid.nu; ++iu) {
      const Point3D p = grid.position(iu, iv);
      CompensatedSum re;
      CompensatedSum im;
      bool unset = false;
      for (std::size_t i = 0; i < elements.size(); ++i) {
        const double d = distance(elements[i], p);
        if (d == 0.0) {
          unset = true;
          break;
        }
        const Term t = element_term(array, elements[i], solution.amplitudes[i], solution.phases[i], p, d);
        re.add(t.magnitude * std::cos(t.argument));
        im.add(t.magnitude * std::sin(t.argument));
      }
      auto& cell = grid.magnitude[static_cast<std::size_t>(iv) * grid.nu + iu];
      if (unset) {
        cell = std::numeric_limits<double>::quiet_NaN();
        ++grid.unset;
      } else {
        cell = std::hypot(re.value(), im.value());
      }
    }
  }
  return grid;
}

void write_pgm(const FieldGrid& grid, std::ostream& out) {
  double max_value = 0.0;
  for (double m : grid.magnitude) {
    if (!std::isnan(m)) max_value = std::max(max_value, m);
  }
  out << "P2\n# |p| linear: 255 = " << max_value << "\n" << grid.nu << ' ' << grid.nv << "\n255\n";
  for (int iv = 0; iv < grid.nv; ++iv) {
    for (int iu = 0; iu < grid.nu; ++iu) {
      const double m = grid.at(iu, iv);
      int pixel = 0;
      if (!std::isnan(m) && max_value > 0.0) pixel = static_cast<int>(std::lround(255.0 * m / max_value));
      out << pixel << (iu + 1 == grid.nu ? '\n' : ' ');
    }
  }
}

void write_field_csv(const FieldGrid& grid, std::ostream& out) {
  switch (grid.spec.axis) {
    case PlaneAxis::kX:
      out << "y,z,magnitude\n";
      break;
    case PlaneAxis::kY:
      out << "x,z,magnitude\n";
      break;
    case PlaneAxis::kZ:
      out << "x,y,magnitude\n";
      break;
  }
  char buf[96];
  for (int iv = 0; iv < grid.nv; ++iv) {
    for (int iu = 0; iu < grid.nu; ++iu) {
      const double m = grid.at(iu, iv);
      if (std::isnan(m)) {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,nan\n", grid.u_at(iu), grid.v_at(iv));
      } else {
        std::snprintf(buf, sizeof buf, "%.9g,%.9g,%.9g\n", grid.u_at(iu), grid.v_at(iv), m);
      }
      out << buf;
    }
  }
}

int am_envelope(const ModulationState& state, double t) {
  if (!(state.burst_remaining > 0.0)) return 0;
  const double cycles = t * state.frequency;
  double frac = cycles - std::floor(cycles);
  // A sample a rounding error short of a period boundary belongs to the next period.
  if (frac > 1.0 - 1e-9) frac = 0.0;
  return frac < state.duty ? 1 : 0;
}

std::vector<Point3D> stm_path(std::span<const Point3D> shape, double traversal_speed, double update_rate) {
  if (!(traversal_speed > 0.0) || !(update_rate > 0.0)) {
    throw std::invalid_argument("stm_path: speed and update rate must be > 0");
  }
  const std::size_t n = shape.size();
  std::vector<double> cumulative{0.0};
  for (std::size_t i = 0; i < n; ++i) {
    cumulative.push_back(cumulative.back() + distance(shape[i], shape[(i + 1) % n]));
  }
  const double length = cumulative.back();
  if (n < 2 || !(length > 0.0)) throw std::invalid_argument("stm_path: zero-length path");

  const double spacing = traversal_speed / update_rate;
  const auto count = static_cast<std::size_t>(std::floor(length / spacing + 1e-9));
  std::vector<Point3D> samples;
  samples.reserve(count);
  std::size_t seg = 0;
  for (std::size_t i = 0; i < count; ++i) {
    const double s = static_cast<double>(i) * spacing;
    while (seg + 1 < n && cumulative[seg + 1] <= s) ++seg;
    const double seg_len = cumulative[seg + 1] - cumulative[seg];
    const Point3D& a = shape[seg];
    const Point3D& b = shape[(seg + 1) % n];
    if (seg_len == 0.0) {
      samples.push_back(a);
      continue;
    }
    const double f = (s - cumulative[seg]) / seg_len;
    samples.push_back(a + f * (b - a));
  }
  return samples;
}

}  // namespace haptibot
