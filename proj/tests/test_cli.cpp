// Copyright 2026 The KCQF Authors.
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


#include <gtest/gtest.h>

#include <kcqf/bench/cli.hpp>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace kcqf::bench;

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "kcqf_bench");
  std::vector<const char*> argv;
  for (const std::string& a : args) {
    argv.push_back(a.c_str());
  }
  std::ostringstream out;
  std::ostringstream err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("kcqf_test_cli_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

TEST(Cli, RunWritesCsv) {
  const auto path = scratch_dir("run") / "a.csv";
  const Outcome o =
      invoke({"run", "--preset", "example-a", "--filter", "kcqf", "--d", "2", "--seed", "1", "--out", path.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  ASSERT_TRUE(std::filesystem::exists(path));
  const CsvReport csv = parse_csv(path.string());
  ASSERT_EQ(csv.summary.size(), 1U);
  EXPECT_EQ(csv.summary[0].filter, "kcqf");
  EXPECT_EQ(csv.summary[0].d, 2);
  EXPECT_NE(o.out.find("kcqf-2"), std::string::npos);
}

TEST(Cli, NoTimingRunsAreByteIdentical) {
  const auto dir = scratch_dir("repro");
  const std::vector<std::string> common{"run", "--preset", "example-b", "--mc-runs", "2", "--no-timing", "--out"};
  std::vector<std::string> a = common;
  a.push_back((dir / "a.csv").string());
  std::vector<std::string> b = common;
  b.push_back((dir / "b.csv").string());
  ASSERT_EQ(invoke(a).code, 0);
  ASSERT_EQ(invoke(b).code, 0);
  const auto read = [](const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
  };
  EXPECT_EQ(read(dir / "a.csv"), read(dir / "b.csv"));
}

TEST(Cli, UnknownPresetNamesValidOnes) {
  const Outcome o = invoke({"run", "--preset", "nope"});
  EXPECT_NE(o.code, 0);
  EXPECT_NE(o.err.find("example-a, example-b"), std::string::npos) << o.err;
}

TEST(Cli, ListPresets) {
  const Outcome o = invoke({"list-presets"});
  EXPECT_EQ(o.code, 0);
  EXPECT_EQ(o.out, "example-a\nexample-b\n");
}

TEST(Cli, UnknownFlagFails) {
  EXPECT_NE(invoke({"run", "--preset", "example-a", "--bogus"}).code, 0);
  EXPECT_NE(invoke({}).code, 0);
}

TEST(Cli, PresetAndScenarioAreExclusive) {
  EXPECT_NE(invoke({"run", "--preset", "example-a", "--scenario", "x.json"}).code, 0);
  EXPECT_EQ(invoke({"run"}).code, 2);
}

TEST(Cli, UnknownFilterFails) {
  const Outcome o = invoke({"run", "--preset", "example-a", "--filter", "kf", "--mc-runs", "1"});
  EXPECT_EQ(o.code, 1);
  EXPECT_NE(o.err.find("pf-rr"), std::string::npos);
}

TEST(Cli, ScenarioFile) {
  const auto dir = scratch_dir("scenario");
  const auto scenario = dir / "s.json";
  const auto csv = dir / "out.csv";
  std::ofstream(scenario) << R"({"preset": "example-a", "mc_runs": 1, "filters": [{"id": "ekf"}], "output": {"csv": ")"
                          << csv.string() << R"("}})";
  const Outcome o = invoke({"run", "--scenario", scenario.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(std::filesystem::exists(csv));
}

TEST(Cli, FigureWritesPlotData) {
  const auto dir = scratch_dir("figure");
  const Outcome o = invoke({"figure", "--id", "fig1", "--preset", "example-a", "--mc-runs", "1", "--out", dir.string()});
  ASSERT_EQ(o.code, 0) << o.err;
  EXPECT_TRUE(std::filesystem::exists(dir / "fig1.csv"));
  const Outcome sweep =
      invoke({"figure", "--id", "fig4", "--preset", "example-a", "--mc-runs", "1", "--samples", "100", "--out", dir.string()});
  ASSERT_EQ(sweep.code, 0) << sweep.err;
  EXPECT_NE(sweep.out.find("N_s=100"), std::string::npos);
  EXPECT_EQ(sweep.out.find("N_s=200"), std::string::npos);
  EXPECT_NE(invoke({"figure", "--id", "fig9", "--preset", "example-a", "--out", dir.string()}).code, 0);
}

TEST(Overrides, FilterAndDReplaceTheLists) {
  CliOverrides o;
  o.filters = {"kcqf", "ekf"};
  o.d = {3};
  o.samples = 80;
  const ScenarioConfig cfg = apply_overrides(preset_scenarios("example-a"), o);
  ASSERT_EQ(cfg.filters.size(), 2U);
  EXPECT_EQ(cfg.filters[0].d, (std::vector<int>{3}));
  EXPECT_EQ(cfg.sample_count, 80);
  EXPECT_EQ(cfg.particle_count, 80);
}

TEST(Overrides, KcqfKeepsPresetDWithoutFlag) {
  CliOverrides o;
  o.filters = {"kcqf"};
  EXPECT_EQ(apply_overrides(preset_scenarios("example-b"), o).filters[0].d, (std::vector<int>{1, 2, 3, 4, 5, 6, 7}));
}

}  // namespace
