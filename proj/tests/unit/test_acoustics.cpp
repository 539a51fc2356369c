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

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <sstream>

#include "doctest.h"
#include "haptibot/acoustics.hpp"
#include "oracles.hpp"

using namespace haptibot;

namespace {

// J1 by its power series in long double; converges quickly for the arguments used here (< 5).
long double j1_series(long double x) {
  long double term = x / 2;
  long double sum = term;
  for (int m = 1; m < 60; ++m) {
    term *= -(x * x / 4) / (m * (m + 1.0L));
    sum += term;
  }
  return sum;
}

// Term-by-term superposition in long double, independent of the library's summation.
std::complex<long double> pressure_oracle(const TransducerArray& a, const std::vector<double>& phases,
                                          const std::vector<double>& amps, const Point3D& p) {
  const long double k = 2 * oracle::kPiL * a.frequency / a.speed_of_sound;
  std::complex<long double> sum = 0;
  for (int i = 0; i < a.size(); ++i) {
    const Point3D e = a.element_position(i);
    const long double dx = p.x - e.x, dy = p.y - e.y, dz = p.z - e.z;
    const long double d = std::sqrt(dx * dx + dy * dy + dz * dz);
    const long double x = k * a.element_radius * std::sqrt(dx * dx + dy * dy) / d;
    const long double dir = x == 0 ? 1.0L : 2 * j1_series(x) / x;
    sum += std::polar<long double>(amps[i] * a.reference_amplitude * dir / d, k * d + phases[i]);
  }
  return sum;
}

TransducerArray two_elements() {
  TransducerArray a;
  a.rows = 1;
  a.cols = 2;
  a.pitch = 0.010;
  // Shift so element 0 sits at x = 0 and element 1 at x = 0.010.
  a.pose = Transform2D{{0.005, 0.0}, 0.0};
  return a;
}

}  // namespace

TEST_CASE("piston directivity against tabulated J1") {
  // 2 J1(x) / x with J1 from standard tables.
  CHECK(piston_directivity(0.5) == doctest::Approx(2 * 0.2422684577 / 0.5).epsilon(1e-9));
  CHECK(piston_directivity(1.0) == doctest::Approx(2 * 0.4400505857 / 1.0).epsilon(1e-9));
  CHECK(piston_directivity(2.0) == doctest::Approx(2 * 0.5767248078 / 2.0).epsilon(1e-9));
  CHECK(piston_directivity(3.0) == doctest::Approx(2 * 0.3390589585 / 3.0).epsilon(1e-9));
  for (double x = 1e-6; x < 4.0; x *= 1.7) {
    CHECK(std::abs(piston_directivity(x) - static_cast<double>(2 * j1_series(x) / x)) < 1e-12);
  }
}

TEST_CASE("piston directivity limit handling") {
  CHECK(piston_directivity(0.0) == 1.0);
  for (double x : {1e-12, 1e-9, 1e-6, 5e-5, 9.9e-5}) CHECK(std::abs(piston_directivity(x) - 1.0) < 1e-6);
  // Continuous across the series/library switch.
  CHECK(std::abs(piston_directivity(0.999e-3) - piston_directivity(1.001e-3)) < 1e-9);
}

TEST_CASE("two-element phase difference") {
  const TransducerArray a = two_elements();
  CHECK(a.element_position(0).x == doctest::Approx(0.0));
  CHECK(a.element_position(1).x == doctest::Approx(0.010));
  const auto sol = focus_phases(a, {0.0, 0.0, 0.100});

  const long double k = 2 * oracle::kPiL * 40000 / 346;
  const long double dd = std::sqrt(0.100L * 0.100L + 0.010L * 0.010L) - 0.100L;
  CHECK(static_cast<double>(k) == doctest::Approx(726.3798).epsilon(1e-7));
  CHECK(static_cast<double>(dd) == doctest::Approx(4.98756e-4).epsilon(1e-6));
  const double diff = wrap_positive(sol.phases[0] - sol.phases[1]);
  CHECK(std::abs(diff - static_cast<double>(k * dd)) < 1e-9);
  CHECK(std::abs(diff - 0.36228644) < 1e-6);
}

TEST_CASE("focus_phases symmetry, wrap and errors") {
  TransducerArray a;
  const auto sol = focus_phases(a, {0.0, 0.0, 0.15});
  REQUIRE(sol.phases.size() == 256);
  for (double ph : sol.phases) {
    CHECK(ph >= 0.0);
    CHECK(ph < kTwoPi);
  }
  for (int r = 0; r < 16; ++r) {
    for (int c = 0; c < 16; ++c) {
      const double p = sol.phases[r * 16 + c];
      CHECK(p == doctest::Approx(sol.phases[r * 16 + (15 - c)]).epsilon(1e-12));
      CHECK(p == doctest::Approx(sol.phases[(15 - r) * 16 + c]).epsilon(1e-12));
    }
  }
  for (double amp : sol.amplitudes) CHECK(amp == 1.0);
  CHECK(sol.quality == 1.0);
  CHECK_THROWS_AS(focus_phases(a, {0.0, 0.0, 0.0}), std::invalid_argument);
  CHECK_THROWS_AS(focus_phases(a, {0.0, 0.0, -0.1}), std::invalid_argument);
  CHECK_THROWS_AS(focus_phases(a, {0.0, 0.0, 0.01}), std::invalid_argument);  // below the 0.02 m floor
}

TEST_CASE("single element on axis") {
  TransducerArray a;
  a.rows = a.cols = 1;
  PhaseSolution s{{0.7}, {1.0}, {}, 1.0};
  const double d = 0.2;
  const auto p = pressure_at(a, s, {0.0, 0.0, d});
  CHECK(std::abs(p) == doctest::Approx(1.0 / d).epsilon(1e-14));
  CHECK(wrap_positive(std::arg(p)) == doctest::Approx(wrap_positive(a.wavenumber() * d + 0.7)).epsilon(1e-12));
  CHECK_THROWS_AS(pressure_at(a, s, {0.0, 0.0, 0.0}), std::invalid_argument);
}

TEST_CASE("16x16 probe against the extended-precision oracle") {
  TransducerArray a;
  const auto sol = focus_phases(a, {0.0, 0.0, 0.15});
  const auto p = pressure_at(a, sol, {0.005, 0.0, 0.15});
  const auto o = pressure_oracle(a, sol.phases, sol.amplitudes, {0.005, 0.0, 0.15});
  CHECK(std::abs(p.real() - static_cast<double>(o.real())) < 1e-9 * std::abs(p));
  CHECK(std::abs(p.imag() - static_cast<double>(o.imag())) < 1e-9 * std::abs(p));
  // Frozen from a 40-digit evaluation.
  CHECK(p.real() == doctest::Approx(780.57742903532714).epsilon(1e-10));
  CHECK(p.imag() == doctest::Approx(18.48609632415563).epsilon(1e-8));
  CHECK(std::abs(p) == doctest::Approx(780.79629768378586).epsilon(1e-10));

  const auto at_focus = pressure_at(a, sol, {0.0, 0.0, 0.15});
  CHECK(std::abs(at_focus) == doctest::Approx(1288.6042689607954).epsilon(1e-10));
  CHECK(std::abs(at_focus) == doctest::Approx(in_phase_magnitude(a, sol, {0.0, 0.0, 0.15})).epsilon(1e-12));
}

TEST_CASE("in-phase at the focus for random arrays and foci") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  std::uniform_real_distribution<double> h(0.05, 0.3);
  std::uniform_int_distribution<int> n(1, 8);
  for (int trial = 0; trial < 50; ++trial) {
    TransducerArray a;
    a.rows = n(rng);
    a.cols = n(rng);
    a.pose = {{u(rng), u(rng)}, u(rng) * 20};
    a.mounting_height = 0.03;
    const Point3D focus{u(rng), u(rng), a.mounting_height + h(rng)};
    const auto sol = focus_phases(a, focus);
    const double k = a.wavenumber();
    const double ref = k * distance(a.element_position(0), focus) + sol.phases[0];
    for (int i = 1; i < a.size(); ++i) {
      const double arg = k * distance(a.element_position(i), focus) + sol.phases[i];
      CHECK(std::abs(wrap_angle(arg - ref)) < 1e-9);
    }
    const double mag = std::abs(pressure_at(a, sol, focus));
    CHECK(mag == doctest::Approx(in_phase_magnitude(a, sol, focus)).epsilon(1e-12));
  }
}

TEST_CASE("linearity and order independence") {
  TransducerArray a;
  a.rows = a.cols = 6;
  const auto sol = focus_phases(a, {0.01, -0.01, 0.12});
  const Point3D probe{0.02, 0.0, 0.1};
  const auto base = pressure_at(a, sol, probe);
  PhaseSolution scaled = sol;
  for (auto& amp : scaled.amplitudes) amp *= 0.37;
  const auto p = pressure_at(a, scaled, probe);
  CHECK(std::abs(p - 0.37 * base) <= 1e-12 * std::abs(0.37 * base));

  // Reversing element order: mirror the array about both axes and reverse the solution.
  TransducerArray mirrored = a;
  mirrored.pose.rotation = kPi;
  PhaseSolution reversed = sol;
  std::reverse(reversed.phases.begin(), reversed.phases.end());
  std::reverse(reversed.amplitudes.begin(), reversed.amplitudes.end());
  for (int i = 0; i < a.size(); ++i) {
    CHECK(distance(mirrored.element_position(i), a.element_position(a.size() - 1 - i)) < 1e-15);
  }
  const auto q = pressure_at(mirrored, reversed, probe);
  CHECK(std::abs(q - base) <= 1e-12 * std::abs(base));
}

TEST_CASE("field_slice degenerate grid and linearity") {
  TransducerArray a;
  const Point3D focus{0.0, 0.0, 0.15};
  const auto sol = focus_phases(a, focus);
  SliceSpec one{PlaneAxis::kZ, 0.15, {0.0, 0.0}, 0.001, 0.001, 0.001};
  const auto g = field_slice(a, sol, one);
  REQUIRE(g.nu == 1);
  REQUIRE(g.nv == 1);
  CHECK(g.position(0, 0) == focus);
  CHECK(g.at(0, 0) == doctest::Approx(std::abs(pressure_at(a, sol, focus))).epsilon(1e-14));

  SliceSpec spec{PlaneAxis::kZ, 0.15, {0.0, 0.0}, 0.01, 0.01, 0.001};
  const auto g1 = field_slice(a, sol, spec);
  PhaseSolution half = sol;
  for (auto& amp : half.amplitudes) amp *= 0.5;
  const auto g2 = field_slice(a, half, spec);
  for (std::size_t i = 0; i < g1.magnitude.size(); ++i) {
    CHECK(g2.magnitude[i] == doctest::Approx(0.5 * g1.magnitude[i]).epsilon(1e-12));
  }
}

TEST_CASE("field_slice maximum at the focus cell") {
  TransducerArray a;
  const Point3D focus{0.0, 0.0, 0.15};
  const auto sol = focus_phases(a, focus);
  SliceSpec spec{PlaneAxis::kZ, 0.15, {0.0, 0.0}, 0.06, 0.06, 0.001};
  const auto g = field_slice(a, sol, spec);
  CHECK(g.nu == 60);
  CHECK(g.nv == 60);
  CHECK(g.unset == 0);
  // Exhaustive scan.
  int bu = 0, bv = 0;
  for (int v = 0; v < g.nv; ++v)
    for (int u = 0; u < g.nu; ++u)
      if (g.at(u, v) > g.at(bu, bv)) bu = u, bv = v;
  CHECK(g.argmax() == std::make_pair(bu, bv));
  CHECK(g.cell_contains(bu, bv, {0.0, 0.0}));
}

TEST_CASE("field_slice limits and unset samples") {
  TransducerArray a;
  const auto sol = focus_phases(a, {0.0, 0.0, 0.15});
  SliceSpec big{PlaneAxis::kZ, 0.15, {0.0, 0.0}, 2.0, 2.0, 0.001};
  CHECK_THROWS_AS(field_slice(a, sol, big), std::invalid_argument);
  SliceSpec bad{PlaneAxis::kZ, 0.15, {0.0, 0.0}, 0.01, 0.01, 0.0};
  CHECK_THROWS_AS(field_slice(a, sol, bad), std::invalid_argument);

  // The array plane passes through element centres: one 10 mm cell centred on an element.
  SliceSpec plane{PlaneAxis::kZ, 0.0, {0.005, 0.005}, 0.01, 0.01, 0.01};
  const auto g = field_slice(a, sol, plane);
  CHECK(g.unset == 1);
  CHECK(std::isnan(g.at(0, 0)));
}

TEST_CASE("PGM and CSV exports") {
  TransducerArray a;
  const auto sol = focus_phases(a, {0.0, 0.0, 0.15});
  SliceSpec spec{PlaneAxis::kZ, 0.15, {0.0, 0.0}, 0.004, 0.003, 0.001};
  const auto g = field_slice(a, sol, spec);
  std::ostringstream pgm;
  write_pgm(g, pgm);
  std::istringstream in(pgm.str());
  std::string magic, comment_line;
  in >> magic;
  CHECK(magic == "P2");
  std::getline(in, comment_line);
  std::getline(in, comment_line);
  CHECK(comment_line.rfind("#", 0) == 0);
  int w = 0, h = 0, maxval = 0;
  in >> w >> h >> maxval;
  CHECK(w == 4);
  CHECK(h == 3);
  CHECK(maxval == 255);
  int pixel = 0, brightest = 0, count = 0;
  while (in >> pixel) {
    brightest = std::max(brightest, pixel);
    ++count;
  }
  CHECK(count == 12);
  CHECK(brightest == 255);

  std::ostringstream csv;
  write_field_csv(g, csv);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "x,y,magnitude");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 12);
}

TEST_CASE("am_envelope") {
  const ModulationState on{200.0, 0.5, 1.0};
  CHECK(am_envelope(on, 0.001) == 1);
  CHECK(am_envelope(on, 0.003) == 0);
  CHECK(am_envelope({200.0, 0.5, 0.0}, 0.001) == 0);

  // 0.150 s burst sampled at 1 kHz: on-samples counted with exact rational arithmetic
  // (sample n is on when (n mod 5) / 5 < 1/2).
  int expected = 0;
  for (int n = 0; n < 150; ++n) expected += (2 * (n % 5) < 5) ? 1 : 0;
  CHECK(expected == 90);
  int counted = 0;
  for (int n = 0; n < 150; ++n) {
    const double t = n * 0.001;
    counted += am_envelope({200.0, 0.5, 0.150 - t}, t);
  }
  CHECK(counted == expected);
}

TEST_CASE("stm_path examples") {
  const std::vector<Point3D> repeated{{0.1, 0.1, 0.2}, {0.1, 0.1, 0.2}};
  CHECK_THROWS_AS(stm_path(repeated, 1.0, 500.0), std::invalid_argument);

  std::vector<Point3D> circle;
  for (int i = 0; i < 360; ++i) {
    const double a = kTwoPi * i / 360.0;
    circle.push_back({0.02 * std::cos(a), 0.02 * std::sin(a), 0.2});
  }
  CHECK(stm_path(circle, 2.0, 1000.0).size() == 62);

  const std::vector<Point3D> square{{0.0, 0.0, 0.2}, {0.04, 0.0, 0.2}, {0.04, 0.04, 0.2}, {0.0, 0.04, 0.2}};
  const auto path = stm_path(square, 1.0, 500.0);
  REQUIRE(path.size() == 80);
  CHECK(path[0] == square[0]);
  for (int c = 1; c < 4; ++c) {
    CHECK(distance(path[20 * c], square[c]) < 1e-12);
  }
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    CHECK(std::abs(distance(path[i], path[i + 1]) - 0.002) < 1e-12);
  }
}

TEST_CASE("resolve_focus examples") {
  TransducerArray a;
  a.mounting_height = 0.03;
  const Frustum f;
  const auto inside = resolve_focus(a, {0.02, -0.03, 0.18}, f);
  CHECK(inside.focus == Point3D{0.02, -0.03, 0.18});
  CHECK(inside.quality == 1.0);

  // Lateral limit is 0.08 + 0.05 = 0.13; 0.05 beyond it.
  const auto outside = resolve_focus(a, {0.18, 0.0, 0.18}, f);
  CHECK(outside.focus.x == doctest::Approx(0.13));
  CHECK(outside.quality == doctest::Approx(0.5));

  // Componentwise clamp oracle: z limited to 0.40 above the surface, x to 0.13.
  const Point3D req{0.16, 0.01, 0.70};
  const Point3D want{0.13, 0.01, 0.03 + 0.40};
  const double miss = std::sqrt(0.03 * 0.03 + 0.27 * 0.27);
  const auto high = resolve_focus(a, req, f);
  CHECK(distance(high.focus, want) < 1e-12);
  CHECK(high.quality == doctest::Approx(std::max(0.0, 1.0 - miss / 0.1)));
  CHECK(high.quality == 0.0);

  // Rotated, translated array: clamping happens in the array frame.
  TransducerArray r = a;
  r.pose = {{0.3, 0.3}, kPi / 2};
  const auto rot = resolve_focus(r, {0.3, 0.3 + 0.15, 0.2}, f);
  CHECK(rot.focus.y == doctest::Approx(0.3 + 0.13));
  CHECK(rot.quality == doctest::Approx(0.8));
}

TEST_CASE("quality is 1 exactly when nothing is clamped") {
  TransducerArray a;
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-0.25, 0.25);
  std::uniform_real_distribution<double> z(-0.1, 0.6);
  for (int i = 0; i < 500; ++i) {
    const Point3D req{u(rng), u(rng), z(rng)};
    const auto s = resolve_focus(a, req, Frustum{});
    CHECK((s.quality == 1.0) == (s.focus == req));
    CHECK(s.quality >= 0.0);
    CHECK(s.quality <= 1.0);
  }
}
