// Copyright 2026 The qalab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "qalab/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "qalab/config.hpp"

namespace qalab {
namespace {

namespace fs = std::filesystem;

// --- config -------------------------------------------------------------------

std::string config_error(const std::string& text) {
  try {
    (void)parse_config(text);
  } catch (const ConfigError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected a ConfigError for " << text;
  return {};
}

const char* const kFullDoc = R"({
  "model": {"preset": "single_qubit", "energy_scale": 2.0},
  "schedule": {"t1": 5, "t3": 4, "h_d": 0.7, "t2_grid": [0, 10, 20], "h_d_grid": [0.6, 0.7], "t2": 3,
               "initial_state": [-1]},
  "noise": {"preset": "davies_default", "gamma": 0.02, "spectral": {"tls_amplitude": 6.75, "temperature": 0.1}},
  "experiment": {"shots": 5000, "seed": 42, "dt": 0.005, "max_norm_step": 0.2, "record_stride": 3,
                 "fast_hold": false, "lambda_grid": {"start": 0.001, "stop": 0.1, "num": 5, "log": true},
                 "entropy_points": 11},
  "backend": {"sampler": "remote", "endpoint": "http://127.0.0.1:9/api", "poll_timeout_s": 5,
              "max_in_flight": 2}
})";

TEST(Config, EmptyDocumentGivesDefaults) {
  const AppConfig c = parse_config("{}");
  EXPECT_EQ(c.experiment.params.n_qubits, 4U);
  EXPECT_EQ(c.experiment.noise.mode, NoiseMode::none);
  EXPECT_TRUE(c.hd_grid.empty());
  EXPECT_EQ(c.lambda_grid, log_grid(1e-3, 1e-1));
  EXPECT_EQ(c.experiment.sampler, SamplerKind::simulated);
}

TEST(Config, ReadsEverySection) {
  const AppConfig c = parse_config(kFullDoc);
  const ExperimentConfig& e = c.experiment;
  EXPECT_EQ(e.params.n_qubits, 1U);
  EXPECT_EQ(e.params.coupling, 0.0);
  EXPECT_EQ(e.params.energy_scale, 2.0);
  EXPECT_EQ(e.t1, 5.0);
  EXPECT_EQ(e.t3, 4.0);
  EXPECT_EQ(e.h_d, 0.7);
  EXPECT_EQ(e.t2_grid, (std::vector<double>{0, 10, 20}));
  EXPECT_EQ(c.hd_grid, (std::vector<double>{0.6, 0.7}));
  EXPECT_EQ(c.sweep_t2, 3.0);
  ASSERT_TRUE(e.initial.has_value());
  EXPECT_EQ(e.initial->spins(), std::vector<int>{-1});
  // preset first, then overrides
  EXPECT_EQ(e.noise.mode, NoiseMode::eigenbasis_davies);
  EXPECT_EQ(e.noise.gamma, 0.02);
  EXPECT_EQ(e.noise.spectral.dephasing, NoiseSpec::davies_default().spectral.dephasing);
  EXPECT_EQ(e.noise.spectral.tls_amplitude, 6.75);
  EXPECT_EQ(e.noise.spectral.temperature, 0.1);
  EXPECT_EQ(e.shots, 5000U);
  EXPECT_EQ(e.seed, 42U);
  EXPECT_EQ(e.evolution.dt, 0.005);
  EXPECT_EQ(e.evolution.max_norm_step, 0.2);
  EXPECT_EQ(e.evolution.record_stride, 3U);
  EXPECT_FALSE(e.evolution.fast_hold);
  ASSERT_EQ(c.lambda_grid.size(), 5U);
  EXPECT_EQ(c.lambda_grid.front(), 0.001);
  EXPECT_EQ(c.lambda_grid.back(), 0.1);
  EXPECT_NEAR(c.lambda_grid[2], 0.01, 1e-15);
  EXPECT_EQ(c.entropy_points, 11U);
  EXPECT_EQ(e.sampler, SamplerKind::remote);
  EXPECT_EQ(c.backend.endpoint, "http://127.0.0.1:9/api");
  EXPECT_EQ(c.backend.remote.poll_timeout_s, 5.0);
  EXPECT_EQ(c.backend.remote.max_in_flight, 2);
}

TEST(Config, SnapshotRoundTrips) {
  for (const char* doc : {"{}", kFullDoc}) {
    const Json snap = config_to_json(parse_config(doc));
    EXPECT_EQ(config_to_json(config_from_json(snap)), snap);
    EXPECT_EQ(config_to_json(parse_config(snap.dump())), snap);
  }
}

TEST(Config, ManifestIsAcceptedAsConfig) {
  const Json snap = config_to_json(parse_config(kFullDoc));
  Json manifest = {{"qalab_version", "x"}, {"command", "relax"}, {"config", snap}};
  EXPECT_EQ(config_to_json(config_from_json(manifest)), snap);
}

TEST(Config, UnknownKeysAreRejectedEverywhere) {
  EXPECT_NE(config_error(R"({"modle": {}})").find("unknown key 'modle'"), std::string::npos);
  EXPECT_NE(config_error(R"({"model": {"J": 1}})").find("'model'"), std::string::npos);
  EXPECT_NE(config_error(R"({"schedule": {"hd": 0.5}})").find("'schedule'"), std::string::npos);
  EXPECT_NE(config_error(R"({"noise": {"rate": 1}})").find("'noise'"), std::string::npos);
  EXPECT_NE(config_error(R"({"noise": {"spectral": {"ohmnic": 1}}})").find("'noise.spectral'"), std::string::npos);
  EXPECT_NE(config_error(R"({"experiment": {"shot": 1}})").find("'experiment'"), std::string::npos);
  EXPECT_NE(config_error(R"({"backend": {"url": "x"}})").find("'backend'"), std::string::npos);
  EXPECT_NE(config_error(R"({"schedule": {"h_d_grid": {"start": 0.1, "stop": 1, "num": 3, "step": 1}}})")
                .find("'schedule.h_d_grid'"),
            std::string::npos);
}

TEST(Config, WrongTypesAndValuesAreRejected) {
  config_error("[1, 2]");
  config_error("not json");
  config_error(R"({"model": []})");
  config_error(R"({"experiment": {"shots": -1}})");
  config_error(R"({"experiment": {"shots": 1.5}})");
  config_error(R"({"experiment": {"shots": 0}})");
  config_error(R"({"experiment": {"fast_hold": 1}})");
  config_error(R"({"noise": {"gamma": "0.1"}})");
  config_error(R"({"noise": {"gamma": -0.1}})");
  config_error(R"({"noise": {"mode": "davies"}})");
  config_error(R"({"noise": {"axis": "w"}})");
  config_error(R"({"noise": {"preset": "loud"}})");
  config_error(R"({"model": {"preset": "chain"}})");
  config_error(R"({"schedule": {"h_d": 1.5}})");
  config_error(R"({"schedule": {"t2_grid": [10, 5]}})");
  config_error(R"({"schedule": {"t2": -1}})");
  config_error(R"({"schedule": {"h_d_grid": [0.5, 0]}})");
  config_error(R"({"schedule": {"initial_state": [1, 0, 1, 1]}})");
  config_error(R"({"schedule": {"initial_state": [1, 1]}})");  // size differs from n_qubits
  config_error(R"({"experiment": {"lambda_grid": [0.5, 1.0]}})");
  config_error(R"({"experiment": {"entropy_points": 1}})");
  config_error(R"({"experiment": {"dt": -0.01}})");
  config_error(R"({"backend": {"sampler": "quantum"}})");
}

TEST(Config, GridSpecifications) {
  const AppConfig lin = parse_config(R"({"schedule": {"h_d_grid": {"start": 0.4, "stop": 0.5, "num": 11}}})");
  ASSERT_EQ(lin.hd_grid.size(), 11U);
  EXPECT_EQ(lin.hd_grid.front(), 0.4);
  EXPECT_EQ(lin.hd_grid.back(), 0.5);
  EXPECT_NEAR(lin.hd_grid[5], 0.45, 1e-15);
  const AppConfig one = parse_config(R"({"schedule": {"t2_grid": {"start": 7, "stop": 9, "num": 1}}})");
  EXPECT_EQ(one.experiment.t2_grid, std::vector<double>{7.0});
  config_error(R"({"schedule": {"t2_grid": {"start": 0, "stop": 9, "num": 0}}})");
  config_error(R"({"schedule": {"t2_grid": {"start": 0, "stop": 9, "num": 4, "log": true}}})");
  config_error(R"({"schedule": {"t2_grid": {"start": 0, "stop": 9}}})");
}

TEST(Config, SampleConfigsParse) {
  std::size_t n = 0;
  for (const auto& entry : fs::directory_iterator(QALAB_SAMPLES_DIR)) {
    if (entry.path().extension() != ".json") continue;
    EXPECT_NO_THROW((void)load_config(entry.path())) << entry.path();
    ++n;
  }
  EXPECT_GE(n, 1U);
}

TEST(Config, MissingFile) {
  EXPECT_THROW(load_config("/nonexistent/qalab.json"), ConfigError);
}

// --- command line -------------------------------------------------------------

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

CliResult run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "qalab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliResult r;
  r.code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    for (std::string cell; std::getline(ls, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / fmt::format("qalab_cli_{}_{}", info->name(), ::getpid());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p, std::ios::binary) << text;
    return p;
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const char* const kSingle = R"({
  "model": {"preset": "single_qubit"},
  "schedule": {"t1": 5, "t3": 5, "h_d": 0.7, "h_d_grid": {"start": 0.65, "stop": 0.7, "num": 3}, "t2": 100},
  "noise": {"preset": "davies_default"},
  "experiment": {"shots": 20000, "seed": 7, "max_norm_step": 0.1}
})";

TEST_F(Cli, MissingConfigFileExitsWithTwo) {
  const auto r = run_cli({"spectrum", "--config", path("absent.json"), "--out", path("s.csv")});
  EXPECT_EQ(r.code, cli::kConfigError);
  EXPECT_NE(r.err.find("absent.json"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("s.csv")));
}

TEST_F(Cli, UsageErrorsExitWithTwo) {
  const std::string cfg = write("bad.json", R"({"model": {"couplings": 1}})").string();
  EXPECT_EQ(run_cli({"spectrum", "--config", cfg, "--out", path("s.csv")}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"spectrum"}).code, cli::kConfigError);  // no --out
  EXPECT_EQ(run_cli({}).code, cli::kConfigError);            // no subcommand
  EXPECT_EQ(run_cli({"fly", "--out", path("x")}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"sweep", "--mode", "t2", "--out", path("x")}).code, cli::kConfigError);
  EXPECT_EQ(run_cli({"spectrum", "--out", path("s.csv"), "--seed", "minus"}).code, cli::kConfigError);
  const auto sweep_without_grid = run_cli({"sweep", "--out", path("sw")});
  EXPECT_EQ(sweep_without_grid.code, cli::kConfigError);
  EXPECT_NE(sweep_without_grid.err.find("h_d_grid"), std::string::npos);
  // a single qubit has no bipartition
  const std::string one = write("one.json", R"({"model": {"preset": "single_qubit"}})").string();
  EXPECT_EQ(run_cli({"entropy", "--config", one, "--out", path("e.csv")}).code, cli::kConfigError);
}

TEST_F(Cli, HelpAndVersionExitWithZero) {
  const auto help = run_cli({"--help"});
  EXPECT_EQ(help.code, cli::kOk);
  for (const char* cmd : {"spectrum", "relax", "sweep", "entropy", "perturb-check", "submit"}) {
    EXPECT_NE(help.out.find(cmd), std::string::npos) << cmd;
  }
  const auto v = run_cli({"--version"});
  EXPECT_EQ(v.code, cli::kOk);
  EXPECT_NE(v.out.find(cli::kVersion), std::string::npos);
}

TEST_F(Cli, SpectrumFullyConnectedGapAtClassicalEnd) {
  const auto r = run_cli({"spectrum", "--out", path("s.csv")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = read_csv(path("s.csv"));
  ASSERT_EQ(rows.front(), (std::vector<std::string>{"h_d", "gap", "transition_element_z"}));
  ASSERT_EQ(rows.size(), 101U);
  EXPECT_EQ(rows.back()[0], "1");
  EXPECT_NEAR(std::stod(rows.back()[1]), 4.0, 1e-12);
  EXPECT_TRUE(fs::exists(path("s.csv.manifest.json")));
}

// The single-qubit gap only touches 0.75 (minimum 0.7504), so the resonance
// is the row closest to it.
TEST_F(Cli, SpectrumSingleQubitResonanceInWindow) {
  const std::string cfg = write("one.json", R"({"model": {"preset": "single_qubit"},
      "schedule": {"h_d_grid": {"start": 0.70, "stop": 0.85, "num": 151}}})").string();
  ASSERT_EQ(run_cli({"spectrum", "--config", cfg, "--out", path("s.csv")}).code, cli::kOk);
  const auto rows = read_csv(path("s.csv"));
  double best_hd = 0.0;
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double miss = std::abs(std::stod(rows[i][1]) - 0.75);
    if (miss < best) {
      best = miss;
      best_hd = std::stod(rows[i][0]);
    }
  }
  EXPECT_LT(best, 1e-3);
  EXPECT_GE(best_hd, 0.76);
  EXPECT_LE(best_hd, 0.80);
}

TEST_F(Cli, ScalarsUseSeventeenSignificantDigits) {
  const std::string cfg = write("g.json", R"({"schedule": {"h_d_grid": [0.1, 0.3]}})").string();
  ASSERT_EQ(run_cli({"spectrum", "--config", cfg, "--out", path("s.csv")}).code, cli::kOk);
  const auto rows = read_csv(path("s.csv"));
  EXPECT_EQ(rows[1][0], "0.10000000000000001");
  EXPECT_EQ(rows[2][0], "0.29999999999999999");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    for (const auto& cell : rows[i]) {
      EXPECT_EQ(std::stod(cell), std::strtod(format_scalar(std::stod(cell)).c_str(), nullptr));
      EXPECT_EQ(cell.find_first_of(" ;"), std::string::npos);
    }
  }
  EXPECT_EQ(slurp(path("s.csv")).find('\r'), std::string::npos);
}

TEST_F(Cli, RelaxWritesCurveFitAndManifest) {
  const std::string cfg = write("c.json", kSingle).string();
  const auto r = run_cli({"relax", "--config", cfg, "--out", path("r")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const Json fit = Json::parse(slurp(path("r/fit.json")));
  EXPECT_GT(fit["t1_us"].get<double>(), 100.0);
  EXPECT_EQ(read_csv(path("r/curve.csv")).front(), (std::vector<std::string>{"t2_us", "survival", "shots"}));
  const Json m = Json::parse(slurp(path("r/manifest.json")));
  EXPECT_EQ(m["qalab_version"], cli::kVersion);
  EXPECT_EQ(m["command"], "relax");
  EXPECT_EQ(m["seed"], 7);
  EXPECT_EQ(m["exit_code"], 0);
  EXPECT_EQ(m["outputs"], Json::array({"curve.csv", "fit.json"}));
  EXPECT_EQ(m["summary"]["fit"]["t1_us"], fit["t1_us"]);
  for (const char* key : {"started_utc", "finished_utc"}) {
    const std::string ts = m[key];
    EXPECT_EQ(ts.size(), 20U);
    EXPECT_EQ(ts.back(), 'Z');
  }
  EXPECT_EQ(m["config"], config_to_json(load_config(cfg)));
  EXPECT_FALSE(fs::exists(path("r/manifest.json.tmp")));
}

TEST_F(Cli, IdenticalConfigAndSeedGiveIdenticalBytes) {
  const std::string cfg = write("c.json", kSingle).string();
  ASSERT_EQ(run_cli({"relax", "--config", cfg, "--out", path("a")}).code, cli::kOk);
  ASSERT_EQ(run_cli({"relax", "--config", cfg, "--out", path("b"), "--threads", "3"}).code, cli::kOk);
  for (const char* f : {"curve.csv", "fit.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  ASSERT_EQ(run_cli({"relax", "--config", cfg, "--out", path("c"), "--seed", "8"}).code, cli::kOk);
  EXPECT_NE(slurp(path("a/curve.csv")), slurp(path("c/curve.csv")));
  EXPECT_EQ(Json::parse(slurp(path("c/manifest.json")))["config"]["experiment"]["seed"], 8);
}

TEST_F(Cli, ManifestRerunReproducesOutputs) {
  const std::string cfg = write("c.json", kSingle).string();
  ASSERT_EQ(run_cli({"sweep", "--mode", "t1", "--config", cfg, "--out", path("a"), "--seed", "99"}).code, cli::kOk);
  ASSERT_EQ(run_cli({"sweep", "--mode", "t1", "--config", path("a/manifest.json"), "--out", path("b")}).code,
            cli::kOk);
  for (const char* f : {"t1_sweep.csv", "curves.csv"}) {
    EXPECT_EQ(slurp(dir_ / "a" / f), slurp(dir_ / "b" / f)) << f;
  }
  const Json a = Json::parse(slurp(path("a/manifest.json")));
  const Json b = Json::parse(slurp(path("b/manifest.json")));
  EXPECT_EQ(a["config"], b["config"]);
  EXPECT_EQ(a["summary"], b["summary"]);
  EXPECT_EQ(b["mode"], "t1");
}

TEST_F(Cli, SweepModes) {
  const std::string cfg = write("c.json", kSingle).string();
  ASSERT_EQ(run_cli({"sweep", "--config", cfg, "--out", path("s")}).code, cli::kOk);
  const auto surv = read_csv(path("s/sweep.csv"));
  ASSERT_EQ(surv.size(), 4U);
  EXPECT_EQ(surv.front(), (std::vector<std::string>{"h_d", "survival"}));
  ASSERT_EQ(run_cli({"sweep", "--mode", "t1", "--config", cfg, "--out", path("t")}).code, cli::kOk);
  const auto t1 = read_csv(path("t/t1_sweep.csv"));
  ASSERT_EQ(t1.size(), 4U);
  EXPECT_EQ(t1.front(), (std::vector<std::string>{"h_d", "t1_us", "t1_sd_us", "a", "residual"}));
  EXPECT_LT(std::stod(t1[1][1]), std::stod(t1[3][1]));
  EXPECT_EQ(read_csv(path("t/curves.csv")).size(), 1U + 3U * 12U);
  const Json m = Json::parse(slurp(path("t/manifest.json")));
  EXPECT_TRUE(m["summary"]["strictly_increasing"].get<bool>());
}

TEST_F(Cli, FitFailureExitsWithThreeAndKeepsCurve) {
  const std::string cfg =
      write("two.json", R"({"model": {"preset": "single_qubit"}, "schedule": {"t2_grid": [0, 10]}})").string();
  const auto r = run_cli({"relax", "--config", cfg, "--out", path("r")});
  EXPECT_EQ(r.code, cli::kFitFailed);
  EXPECT_TRUE(fs::exists(path("r/curve.csv")));
  EXPECT_FALSE(fs::exists(path("r/fit.json")));
  const Json m = Json::parse(slurp(path("r/manifest.json")));
  EXPECT_EQ(m["exit_code"], cli::kFitFailed);
  EXPECT_EQ(m["outputs"], Json::array({"curve.csv"}));
  EXPECT_FALSE(m["error"].get<std::string>().empty());
}

TEST_F(Cli, EntropyProfile) {
  const std::string cfg = write("e.json", R"({"schedule": {"t2": 2}, "experiment": {"entropy_points": 41}})").string();
  ASSERT_EQ(run_cli({"entropy", "--config", cfg, "--out", path("e.csv")}).code, cli::kOk);
  const auto rows = read_csv(path("e.csv"));
  ASSERT_EQ(rows.size(), 42U);
  EXPECT_EQ(rows.front(), (std::vector<std::string>{"t_us", "entropy"}));
  EXPECT_EQ(rows[1][0], "0");
  EXPECT_NEAR(std::stod(rows[1][1]), 0.0, 1e-9);
  EXPECT_EQ(std::stod(rows.back()[0]), 4.0);
  EXPECT_GT(std::stod(rows[21][1]), 0.0);
}

TEST_F(Cli, PerturbCheckSlopes) {
  const auto r = run_cli({"perturb-check", "--out", path("p.csv")});
  ASSERT_EQ(r.code, cli::kOk) << r.err;
  const auto rows = read_csv(path("p.csv"));
  EXPECT_EQ(rows.front(), (std::vector<std::string>{"lambda", "elem_4q", "elem_1q", "slope_4q", "slope_1q"}));
  ASSERT_EQ(rows.size(), 22U);
  const auto num = [&](std::size_t i, std::size_t col) { return std::stod(rows[i][col]); };
  // local slopes: least squares over each point and its neighbours
  const std::size_t n = rows.size() - 1;
  for (std::size_t i = 1; i <= n; ++i) {
    const std::size_t a = std::max<std::size_t>(i - 1, 1), b = std::min(i + 1, n);
    for (std::size_t col : {1U, 2U}) {
      std::vector<double> xs, ys;
      for (std::size_t j = a; j <= b; ++j) {
        xs.push_back(num(j, 0));
        ys.push_back(num(j, col));
      }
      EXPECT_NEAR(num(i, col + 2), loglog_slope(xs, ys), 1e-9) << "row " << i;
    }
    EXPECT_GE(num(i, 3), 1.95);
  }
  EXPECT_NEAR(num(1, 4), 1.0, 0.01);  // small-lambda limit of the single-qubit element
  const Json m = Json::parse(slurp(path("p.csv.manifest.json")));
  EXPECT_NEAR(m["summary"]["slope_1q"].get<double>(), 1.0, 0.05);
  EXPECT_GE(m["summary"]["slope_4q"].get<double>(), 1.95);
}

TEST_F(Cli, SubmitThroughMockServer) {
  const AppConfig c = parse_config(kSingle);
  MockAnnealServer server(c.experiment.noise, 0, "tok", 1, c.experiment.evolution);
  server.start();
  const std::string cfg = write("c.json", kSingle).string();
  ::setenv("QALAB_ENDPOINT", server.endpoint().c_str(), 1);
  ::setenv("QALAB_TOKEN", "tok", 1);
  const auto ok = run_cli({"submit", "--config", cfg, "--out", path("s")});
  ::unsetenv("QALAB_TOKEN");
  const auto denied = run_cli({"submit", "--config", cfg, "--out", path("d")});
  ::unsetenv("QALAB_ENDPOINT");
  EXPECT_EQ(ok.code, cli::kOk) << ok.err;
  EXPECT_TRUE(fs::exists(path("s/fit.json")));
  EXPECT_EQ(denied.code, cli::kSamplerFailed);
  EXPECT_NE(Json::parse(slurp(path("d/manifest.json")))["error"].get<std::string>().find("401"), std::string::npos);
  EXPECT_EQ(run_cli({"submit", "--config", cfg, "--out", path("n")}).code, cli::kConfigError);  // no endpoint
  EXPECT_EQ(run_cli({"submit", "--config", cfg, "--out", path("x"), "--endpoint", "http://127.0.0.1:1"}).code,
            cli::kSamplerFailed);
}

}  // namespace
}  // namespace qalab
