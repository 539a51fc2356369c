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

// haptibot: serve | replay | field | bench

#include <algorithm>
#include <chrono>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "haptibot/acoustics.hpp"
#include "haptibot/config.hpp"
#include "haptibot/control_loop.hpp"
#include "haptibot/protocol.hpp"
#include "haptibot/server.hpp"
#include "haptibot/session.hpp"

namespace {

using namespace haptibot;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Flag values that parse but do not make sense; reported like any other usage error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("haptibot");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S.%e] [%^%l%$] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("HAPTIBOT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to "off"; only accept the literal "off".
    if (level != spdlog::level::off || std::string(env) == "off") spdlog::set_level(level);
  }
}

Config load_config_or_default(const std::string& path) {
  if (path.empty()) return Config{};
  return load_config_file(path);
}

std::vector<double> parse_csv_numbers(const std::string& text, std::size_t count, const std::string& flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      const double v = std::stod(item, &used);
      if (used != item.size() || !std::isfinite(v)) throw std::invalid_argument(item);
      out.push_back(v);
    } catch (const std::exception&) {
      throw UsageError(flag + ": \"" + item + "\" is not a number");
    }
  }
  if (out.size() != count) throw UsageError(flag + ": expected " + std::to_string(count) + " comma-separated numbers");
  return out;
}

// --- replay -------------------------------------------------------------------------------

struct ReplayOptions {
  std::string config;
  std::string input;
  std::string metrics;
  std::string snapshots;
  std::string hashes;
  std::string scenario;
};

int run_replay(const ReplayOptions& o) {
  Config config = load_config_or_default(o.config);
  const auto frames = load_replay_file(o.input);
  Session session(config);
  if (!o.scenario.empty()) session.load_scenario(load_scenario_file(o.scenario));

  std::optional<double> t_last;
  for (const auto& f : frames) {
    if (session.submit(f) == SubmitStatus::kQueued) t_last = std::max(t_last.value_or(f.t), f.t);
  }
  const double end = std::max(0.0, t_last.value_or(0.0));
  const auto ticks = static_cast<std::uint64_t>(std::floor(end * config.rates.control_hz + 1e-9)) + 1;

  std::ofstream snapshots;
  if (!o.snapshots.empty()) {
    snapshots.open(o.snapshots);
    if (!snapshots) throw std::runtime_error("cannot write " + o.snapshots);
  }
  std::ofstream hashes;
  if (!o.hashes.empty()) {
    hashes.open(o.hashes);
    if (!hashes) throw std::runtime_error("cannot write " + o.hashes);
  }
  ControlLoop pacing(config, {}, TimestampMode::kClient);  // only used for the snapshot cadence
  for (std::uint64_t k = 0; k < ticks; ++k) {
    session.tick();
    if (hashes.is_open()) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(session.state_hash()));
      hashes << session.tick_index() << ' ' << buf << '\n';
    }
    if (snapshots.is_open() && pacing.snapshot_due(session.tick_index())) {
      snapshots << encode(SnapshotMsg{session.take_snapshot()}) << '\n';
    }
  }

  std::ofstream metrics(o.metrics);
  if (!metrics) throw std::runtime_error("cannot write " + o.metrics);
  write_metrics_csv(config, session.metrics(), metrics);
  metrics.close();
  if (!metrics) throw std::runtime_error("failed writing " + o.metrics);

  spdlog::info("replayed {} frames over {} ticks ({} out of order, {} non-finite dropped)", frames.size(), ticks,
               session.rejected_out_of_order(), session.rejected_non_finite());
  std::cout << "ticks " << ticks << "\n"
            << "frames " << frames.size() << "\n"
            << "dropped_out_of_order " << session.rejected_out_of_order() << "\n"
            << "dropped_non_finite " << session.rejected_non_finite() << "\n"
            << "churn " << session.churn() << "\n";
  return kExitOk;
}

// --- field --------------------------------------------------------------------------------

struct FieldOptions {
  std::string config;
  std::string focus;
  std::string plane = "z=0.15";
  double extent = 0.06;
  double resolution = 0.001;
  std::string out;
  std::string csv;
};

int run_field(const FieldOptions& o) {
  const auto f = parse_csv_numbers(o.focus, 3, "--focus");
  const Point3D focus{f[0], f[1], f[2]};

  const auto eq = o.plane.find('=');
  if (eq != 1 || o.plane.size() < 3) throw UsageError("--plane: expected x=V, y=V or z=V");
  SliceSpec spec;
  switch (o.plane[0]) {
    case 'x':
      spec.axis = PlaneAxis::kX;
      spec.center = {focus.y, focus.z};
      break;
    case 'y':
      spec.axis = PlaneAxis::kY;
      spec.center = {focus.x, focus.z};
      break;
    case 'z':
      spec.axis = PlaneAxis::kZ;
      spec.center = {focus.x, focus.y};
      break;
    default:
      throw UsageError("--plane: axis must be x, y or z");
  }
  spec.offset = parse_csv_numbers(o.plane.substr(2), 1, "--plane")[0];
  if (!(o.extent > 0.0)) throw UsageError("--extent: must be > 0");
  if (!(o.resolution > 0.0)) throw UsageError("--res: must be > 0");
  spec.width = o.extent;
  spec.height = o.extent;
  spec.resolution = o.resolution;

  // The slice is taken in the array frame: array centred on the origin, surface at z = 0.
  Config config = load_config_or_default(o.config);
  TransducerArray array = TransducerArray::from_config(config);
  array.mounting_height = 0.0;
  const PhaseSolution solution = resolve_focus(array, focus, Frustum::from_config(config));
  const FieldGrid grid = field_slice(array, solution, spec);

  std::ofstream pgm(o.out);
  if (!pgm) throw std::runtime_error("cannot write " + o.out);
  write_pgm(grid, pgm);
  if (!o.csv.empty()) {
    std::ofstream csv(o.csv);
    if (!csv) throw std::runtime_error("cannot write " + o.csv);
    write_field_csv(grid, csv);
  }
  const auto [iu, iv] = grid.argmax();
  std::printf("grid %dx%d\nfocus %.9g %.9g %.9g\nquality %.9g\nmax_cell %d %d\nmax_position %.9g %.9g %.9g\n", grid.nu,
              grid.nv, solution.focus.x, solution.focus.y, solution.focus.z, solution.quality, iu, iv,
              grid.position(iu, iv).x, grid.position(iu, iv).y, grid.position(iu, iv).z);
  return kExitOk;
}

// --- bench --------------------------------------------------------------------------------

struct BenchOptions {
  std::string config;
  int runs = 5;
  int ticks = 500;
};

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int run_bench(const BenchOptions& o) {
  if (o.runs < 1) throw UsageError("--runs: must be >= 1");
  if (o.ticks < 1) throw UsageError("--ticks: must be >= 1");
  Config config = load_config_or_default(o.config);
  config.seed = 1;
  using clock = std::chrono::steady_clock;

  std::vector<double> tick_rates;
  for (int run = 0; run < o.runs; ++run) {
    Session session(config);
    const double cx = 0.5 * config.mat.width;
    const double cy = 0.5 * config.mat.height;
    for (int k = 0; k < o.ticks; ++k) {
      const double t = k * config.control_period();
      session.submit({t, Hand::kLeft, {cx + 0.15 * std::cos(t), cy + 0.15 * std::sin(t), 0.15}, true});
      session.submit({t, Hand::kRight, {cx - 0.15 * std::cos(t), cy - 0.15 * std::sin(t), 0.15}, true});
    }
    const auto start = clock::now();
    for (int k = 0; k < o.ticks; ++k) session.tick();
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    tick_rates.push_back(o.ticks / secs);
  }

  std::vector<double> eval_rates;
  const TransducerArray array = TransducerArray::from_config(config);
  const Point3D focus{0.0, 0.0, array.mounting_height + 0.15};
  const PhaseSolution solution = resolve_focus(array, focus, Frustum::from_config(config));
  SliceSpec spec;
  spec.offset = focus.z;
  for (int run = 0; run < o.runs; ++run) {
    const auto start = clock::now();
    const FieldGrid grid = field_slice(array, solution, spec);
    const double secs = std::chrono::duration<double>(clock::now() - start).count();
    eval_rates.push_back(static_cast<double>(grid.magnitude.size()) / secs);
  }

  std::printf("runs %d\nticks_per_second %.6g\npressure_evaluations_per_second %.6g\nelements %d\n", o.runs,
              median(tick_rates), median(eval_rates), array.size());
  return kExitOk;
}

// --- serve --------------------------------------------------------------------------------

struct ServeOptions {
  std::string config;
  std::string address = "127.0.0.1";
  int port = 8765;
  std::string scenarios;
  double duration = 0.0;
  std::string timestamps = "arrival";
};

Server* g_server = nullptr;

extern "C" void on_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int run_serve(const ServeOptions& o) {
  if (o.port < 0 || o.port > 65535) throw UsageError("--port: must be within 0-65535");
  if (o.duration < 0.0) throw UsageError("--duration: must be >= 0");
  Config config = load_config_or_default(o.config);
  std::map<std::string, Scenario> scenarios;
  if (!o.scenarios.empty()) scenarios = load_scenario_dir(o.scenarios);
  ControlLoop loop(config, std::move(scenarios),
                   o.timestamps == "client" ? TimestampMode::kClient : TimestampMode::kArrival);
  Server server(loop, {o.address, static_cast<std::uint16_t>(o.port), o.duration});
  g_server = &server;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::printf("listening on ws://%s:%u\n", o.address.c_str(), static_cast<unsigned>(server.port()));
  std::fflush(stdout);
  server.run();
  g_server = nullptr;
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Simulator and control service for robot-carried mid-air ultrasound haptics", "haptibot"};
  app.require_subcommand(1);
  app.footer("Environment: HAPTIBOT_LOG=trace|debug|info|warn|error|off (default warn)");

  ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Run the WebSocket session server");
  serve_cmd->add_option("--config", serve.config, "Configuration JSON (defaults when omitted)")->check(CLI::ExistingFile);
  serve_cmd->add_option("--address", serve.address, "Listen address")->capture_default_str();
  serve_cmd->add_option("--port", serve.port, "Listen port, 0 for any")->capture_default_str();
  serve_cmd->add_option("--scenarios", serve.scenarios, "Directory of scenario JSON files")
      ->check(CLI::ExistingDirectory);
  serve_cmd->add_option("--duration", serve.duration, "Stop after this many seconds (0 = run until signalled)")
      ->capture_default_str();
  serve_cmd->add_option("--timestamps", serve.timestamps, "Hand frame timestamps: arrival or client")
      ->check(CLI::IsMember({"arrival", "client"}))
      ->capture_default_str();

  ReplayOptions replay;
  auto* replay_cmd = app.add_subcommand("replay", "Run headless over a recorded hand stream");
  replay_cmd->add_option("--config", replay.config, "Configuration JSON (defaults when omitted)")
      ->check(CLI::ExistingFile);
  replay_cmd->add_option("--input", replay.input, "Hand frames, JSON Lines")->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--metrics", replay.metrics, "Metrics CSV output")->required();
  replay_cmd->add_option("--snapshots", replay.snapshots, "Snapshot JSON Lines output");
  replay_cmd->add_option("--hashes", replay.hashes, "Per-tick state hash output");
  replay_cmd->add_option("--scenario", replay.scenario, "Scenario JSON to run")->check(CLI::ExistingFile);

  FieldOptions field;
  auto* field_cmd = app.add_subcommand("field", "Render a pressure-magnitude slice around a focus");
  field_cmd->add_option("--config", field.config, "Configuration JSON (array parameters)")->check(CLI::ExistingFile);
  field_cmd->add_option("--focus", field.focus, "Focus x,y,z in the array frame, metres")->required();
  field_cmd->add_option("--plane", field.plane, "Slice plane, e.g. z=0.15")->capture_default_str();
  field_cmd->add_option("--extent", field.extent, "Slice side length, metres")->capture_default_str();
  field_cmd->add_option("--res", field.resolution, "Cell size, metres")->capture_default_str();
  field_cmd->add_option("--out", field.out, "PGM output")->required();
  field_cmd->add_option("--csv", field.csv, "CSV output");

  BenchOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Measure tick and pressure-evaluation throughput");
  bench_cmd->add_option("--config", bench.config, "Configuration JSON")->check(CLI::ExistingFile);
  bench_cmd->add_option("--runs", bench.runs, "Repetitions; the median is reported")->capture_default_str();
  bench_cmd->add_option("--ticks", bench.ticks, "Session ticks per run")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    std::cout << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  try {
    if (*serve_cmd) return run_serve(serve);
    if (*replay_cmd) return run_replay(replay);
    if (*field_cmd) return run_field(field);
    return run_bench(bench);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}
