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

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"

namespace {

const std::string kCli = HAPTIBOT_CLI;
const std::string kSource = HAPTIBOT_SOURCE_DIR;

int run(const std::string& args, const std::string& out = "cli_stdout.txt", const std::string& err = "cli_stderr.txt") {
  const int status = std::system((kCli + " " + args + " >" + out + " 2>" + err).c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

TEST_CASE("replay of the shipped demo") {
  const std::string args = "replay --config " + kSource + "/data/default_config.json --input " + kSource +
                           "/data/demo_two_hands.jsonl";
  REQUIRE(run(args + " --metrics cli_a.csv --hashes cli_a.hash") == 0);
  const auto rows = lines(slurp("cli_a.csv"));
  // The stream spans 0 to 9.984 s: 500 ticks at 50 Hz, plus header and coverage footer.
  REQUIRE(rows.size() == 502);
  CHECK(rows.front().rfind("t,err_left,err_right,quality_p0,quality_p1,churn", 0) == 0);
  CHECK(rows.back().rfind("# coverage mat_area_m2=0.3025 baseline_area_m2=0.3024 effective_area_m2=0.4225", 0) == 0);
  CHECK(lines(slurp("cli_a.hash")).size() == 500);
  CHECK(slurp("cli_stdout.txt").find("ticks 500") != std::string::npos);

  REQUIRE(run(args + " --metrics cli_b.csv --hashes cli_b.hash") == 0);
  CHECK(slurp("cli_a.csv") == slurp("cli_b.csv"));
  CHECK(slurp("cli_a.hash") == slurp("cli_b.hash"));
}

TEST_CASE("field slice has its maximum at the focus cell") {
  REQUIRE(run("field --focus 0,0,0.15 --plane z=0.15 --extent 0.06 --res 0.001 --out cli_field.pgm --csv cli_field.csv") == 0);
  std::istringstream pgm(slurp("cli_field.pgm"));
  std::string magic;
  pgm >> magic;
  REQUIRE(magic == "P2");
  std::string comment;
  std::getline(pgm, comment);
  std::getline(pgm, comment);
  int w = 0, h = 0, maxval = 0;
  pgm >> w >> h >> maxval;
  CHECK(w == 60);
  CHECK(h == 60);
  std::vector<int> px(static_cast<std::size_t>(w * h));
  for (auto& p : px) pgm >> p;
  // Exhaustive scan for the brightest pixel.
  int best = 0;
  for (int i = 1; i < w * h; ++i)
    if (px[static_cast<std::size_t>(i)] > px[static_cast<std::size_t>(best)]) best = i;
  CHECK(px[static_cast<std::size_t>(best)] == 255);
  const int bu = best % w, bv = best / w;
  // Cell (i, j) spans [(i - 30) mm, (i - 29) mm] on each axis; the focus is at the origin.
  CHECK((bu == 29 || bu == 30));
  CHECK((bv == 29 || bv == 30));
  CHECK(lines(slurp("cli_field.csv")).size() == 3601);
}

TEST_CASE("flag errors exit 2 with usage on stderr") {
  CHECK(run("replay --bogus-flag") == 2);
  const std::string err = slurp("cli_stderr.txt");
  CHECK(err.find("Usage") != std::string::npos);
  CHECK(run("field --focus 0,0") == 2);
  CHECK(run("") == 2);
  CHECK(run("--help") == 0);
}

TEST_CASE("runtime failures exit 1") {
  // A missing file is caught while parsing flags.
  CHECK(run("replay --input does_not_exist.jsonl --metrics x.csv") == 2);
  std::ofstream("cli_bad.jsonl") << "{\"t\":0.0,\"hand\":\"left\"}\n";
  CHECK(run("replay --input cli_bad.jsonl --metrics x.csv") == 1);
  CHECK(slurp("cli_stderr.txt").find("cli_bad.jsonl:1:") != std::string::npos);
  std::ofstream("cli_bad_config.json") << R"({"platform":{"mass":9}})";
  CHECK(run("replay --config cli_bad_config.json --input " + kSource + "/data/demo_two_hands.jsonl --metrics x.csv") == 1);
  CHECK(slurp("cli_stderr.txt").find("payload exceeded") != std::string::npos);
}

TEST_CASE("bench reports throughput") {
  REQUIRE(run("bench --runs 1 --ticks 20") == 0);
  const std::string out = slurp("cli_stdout.txt");
  CHECK(out.find("ticks_per_second") != std::string::npos);
  CHECK(out.find("pressure_evaluations_per_second") != std::string::npos);
}
