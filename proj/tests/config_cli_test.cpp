// Copyright 2026 The mixpsro Authors
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


#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <functional>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "mixpsro/cli.hpp"
#include "mixpsro/hparam_search.hpp"

namespace mixpsro {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const char* root = std::getenv("MIXPSRO_TEST_TMP");
  fs::path dir = fs::path(root != nullptr ? root : fs::temp_directory_path().string()) / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_config(const fs::path& dir, const std::string& name, const json& j) {
  const auto p = dir / (name + ".json");
  std::ofstream(p) << j.dump(1);
  return p;
}

ErrorCode code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::kPrecondition;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

json small_rps(const std::string& algorithm, std::uint64_t seed) {
  return {{"engine", {{"algorithm", algorithm}, {"epochs", 3}, {"seed", seed}}},
          {"environment", {{"spec", "rps"}}},
          {"solver", {{"name", "nash"}}}};
}

TEST(Config, SerializeParseRoundTrip) {
  std::mt19937_64 rng(5);
  const std::vector<std::string> solvers{"nash", "uniform", "last", "replicator"};
  for (int trial = 0; trial < 300; ++trial) {
    RunConfig c;
    c.algorithm = static_cast<Algorithm>(rng() % 3);
    c.env = rng() % 2 ? "rps" : "leduc";
    c.solver = solvers[rng() % solvers.size()];
    c.solver_options.tolerance = std::ldexp(static_cast<double>(rng() % 1000 + 1), -40);
    c.solver_options.replicator_steps = 1 + rng() % 50000;
    c.solver_options.replicator_step_size = static_cast<double>(rng() % 997 + 1) / 1000.0;
    const bool matrix = c.env == "rps";
    c.oracle = matrix && rng() % 2 ? "exact" : "tabular";
    c.epochs = 1 + rng() % 40;
    c.episodes_per_cell = 1 + rng() % 1000;
    c.payoff_mode = matrix && rng() % 2 ? PayoffMode::kAnalytic : PayoffMode::kSimulate;
    c.pure_hparams.learning_rate = static_cast<double>(rng() % 10000 + 1) * 1e-7;
    c.pure_hparams.total_timesteps = 1 + rng() % 1000000;
    c.pure_hparams.exploration_timesteps = rng() % (c.pure_hparams.total_timesteps + 1);
    c.mix_hparams.discount = static_cast<double>(rng() % 101) / 100.0;
    c.mix_hparams.batch_size = 1 + rng() % 128;
    c.seed = rng();
    c.workers = 1 + static_cast<int>(rng() % 8);
    if (rng() % 2) c.early_stop_tolerance = static_cast<double>(rng() % 100) / 1e4;
    c.eval_episodes = 1 + rng() % 500;
    const auto text = serialize_run_config(c).dump();
    EXPECT_EQ(parse_run_config(json::parse(text)), c);
  }
}

TEST(Config, UnknownFieldsAreRejectedByName) {
  auto j = small_rps("psro", 1);
  j["engine"]["epoch"] = 3;
  EXPECT_EQ(code_of([&] { parse_run_config(j); }), ErrorCode::kConfigError);
  EXPECT_NE(message_of([&] { parse_run_config(j); }).find("epoch"), std::string::npos);
  j = small_rps("psro", 1);
  j["extra"] = 1;
  EXPECT_EQ(code_of([&] { parse_run_config(j); }), ErrorCode::kConfigError);
}

TEST(Config, InvalidValuesNameTheField) {
  auto j = small_rps("double-psro", 1);
  EXPECT_NE(message_of([&] { parse_run_config(j); }).find("engine.algorithm"), std::string::npos);
  j = small_rps("psro", 1);
  j["engine"]["epochs"] = 0;
  EXPECT_NE(message_of([&] { parse_run_config(j); }).find("engine.epochs"), std::string::npos);
  j = small_rps("psro", 1);
  j["engine"]["epochs"] = "three";
  EXPECT_EQ(code_of([&] { parse_run_config(j); }), ErrorCode::kConfigError);
  j = small_rps("psro", 1);
  j["solver"]["name"] = "lcp";
  EXPECT_NE(message_of([&] { parse_run_config(j); }).find("solver.name"), std::string::npos);
  j = small_rps("psro", 1);
  j["oracle"] = {{"pure_hparams", {{"preset", "tiny"}}}};
  EXPECT_NE(message_of([&] { parse_run_config(j); }).find("oracle.pure_hparams"),
            std::string::npos);
  j = small_rps("psro", 1);
  j["environment"]["spec"] = "chess";
  EXPECT_EQ(code_of([&] { parse_run_config(j); }), ErrorCode::kConfigError);
}

TEST(Config, LeducPresetsUsePublishedValues) {
  const auto c = parse_run_config({{"environment", {{"spec", "leduc"}}}});
  EXPECT_EQ(c.pure_hparams.learning_rate, 1e-3);
  EXPECT_EQ(c.pure_hparams.batch_size, 32u);
  EXPECT_EQ(c.pure_hparams.replay_capacity, 10000u);
  EXPECT_EQ(c.pure_hparams.total_timesteps, 3000u);
  EXPECT_EQ(c.mix_hparams.learning_rate, 1e-4);
  EXPECT_EQ(c.mix_hparams.batch_size, 64u);
  EXPECT_EQ(c.mix_hparams.replay_capacity, 3000u);
  EXPECT_EQ(c.mix_hparams.total_timesteps, 100000u);
  const auto o = parse_run_config(
      {{"environment", {{"spec", "leduc"}}},
       {"oracle", {{"pure_hparams", {{"learning_rate", 0.1}}}}}});
  EXPECT_EQ(o.pure_hparams.learning_rate, 0.1);
  EXPECT_EQ(o.pure_hparams.batch_size, 32u);
}

TEST(Config, ShippedConfigsLoad) {
  for (const auto& entry : fs::directory_iterator(fs::path(MIXPSRO_SOURCE_DIR) / "configs")) {
    if (entry.path().filename() == "three_player_minority.json") continue;
    SCOPED_TRACE(entry.path().string());
    const auto c = load_run_config(entry.path().string());
    EXPECT_NO_THROW(make_environment(c.env));
  }
  const auto c = load_run_config(
      (fs::path(MIXPSRO_SOURCE_DIR) / "configs" / "three_player_mixed_opponents.json").string());
  EXPECT_EQ(make_environment(c.env)->num_players(), 3);
}

TEST(Config, MissingFileIsConfigError) {
  EXPECT_EQ(code_of([] { load_run_config("/nonexistent/config.json"); }),
            ErrorCode::kConfigError);
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(exit_code_for(Error(ErrorCode::kConfigError, "x")), kExitConfig);
  EXPECT_EQ(exit_code_for(Error(ErrorCode::kCorruptCheckpoint, "x")), kExitRuntime);
}

HParamSearchSpec tiny_spec() {
  HParamSearchSpec s;
  s.base = hparam_preset("rps", "pure-hparams");
  s.learning_rate = {0.05, 0.2};
  s.exploration_timesteps = {100, 1000};
  s.total_timesteps = {200, 400};
  s.sample_count = 4;
  s.opponent_count = 2;
  s.seed = 11;
  return s;
}

std::vector<std::shared_ptr<const Policy>> rps_opponents() {
  return {std::make_shared<FixedActionPolicy>(std::vector<double>{1, 0, 0}),
          std::make_shared<FixedActionPolicy>(std::vector<double>{0.2, 0.8, 0})};
}

TEST(HParamSearch, SingleSampleIsChosenForBothTasks) {
  auto s = tiny_spec();
  s.sample_count = 1;
  const auto r = hparam_search(s, *make_rps(), rps_opponents());
  ASSERT_EQ(r.candidates.size(), 1u);
  EXPECT_EQ(r.pure, r.candidates[0]);
  EXPECT_EQ(r.mix, r.candidates[0]);
}

TEST(HParamSearch, PicksFirstBestScore) {
  const auto r = hparam_search(tiny_spec(), *make_rps(), rps_opponents());
  ASSERT_EQ(r.candidates.size(), 4u);
  for (std::size_t c = 0; c < 4; ++c) {
    EXPECT_LE(r.pure_scores[c], r.pure_scores[r.pure_index]);
    EXPECT_LE(r.mix_scores[c], r.mix_scores[r.mix_index]);
    if (c < r.pure_index) {
      EXPECT_LT(r.pure_scores[c], r.pure_scores[r.pure_index]);
    }
    if (c < r.mix_index) {
      EXPECT_LT(r.mix_scores[c], r.mix_scores[r.mix_index]);
    }
  }
  EXPECT_EQ(r.pure, r.candidates[r.pure_index]);
  const auto again = hparam_search(tiny_spec(), *make_rps(), rps_opponents());
  EXPECT_EQ(to_json(r), to_json(again));
}

TEST(HParamSearch, ExplorationNeverExceedsBudget) {
  auto s = tiny_spec();
  s.exploration_timesteps = {50, 5000};
  Rng rng = make_rng(3);
  for (int i = 0; i < 500; ++i) {
    const auto h = sample_hparams(s, rng);
    EXPECT_LE(h.exploration_timesteps, h.total_timesteps);
    EXPECT_NO_THROW(h.validate());
  }
}

TEST(HParamSearch, WrongOpponentCountRejected) {
  auto s = tiny_spec();
  s.opponent_count = 3;
  EXPECT_EQ(code_of([&] { hparam_search(s, *make_rps(), rps_opponents()); }),
            ErrorCode::kPrecondition);
  EXPECT_EQ(code_of([] { parse_hparam_search_spec({{"sample_count", 0}}, {}); }),
            ErrorCode::kConfigError);
}

TEST(HParamSearch, CommandUsesSuppliedOpponents) {
  const auto dir = scratch("hps");
  const auto run_cfg = write_config(dir, "src", small_rps("psro", 2));
  std::ostringstream log;
  run_command({run_cfg.string(), (dir / "src").string(), 0, false, 0}, log);
  auto j = small_rps("psro", 2);
  j["hparam_search"] = {{"sample_count", 2},
                        {"opponent_count", 2},
                        {"learning_rate", {0.1}},
                        {"total_timesteps", {300}},
                        {"exploration_timesteps", {100}}};
  const auto cfg = write_config(dir, "search", j);
  std::ostringstream out, err;
  hparam_search_command({cfg.string(), (dir / "src").string()}, out, err);
  const auto result = json::parse(out.str());
  EXPECT_EQ(result.at("candidates").size(), 2u);
  EXPECT_EQ(result.at("pure_hparams").at("total_timesteps"), 300);
}

TEST(RunCommand, OutputRootFromEnvironment) {
  const auto root = scratch("env_root");
  const auto cfg = write_config(root, "my_run", small_rps("mixed-opponents", 1));
  ::setenv(kOutputRootVar, (root / "out").c_str(), 1);
  std::ostringstream log;
  const auto dir = run_command({cfg.string(), "", 0, false, 0}, log);
  ::unsetenv(kOutputRootVar);
  EXPECT_EQ(dir, root / "out" / "my_run");
  for (const char* f : {"regret_curve.tsv", "game.json", "record.json",
                        "checkpoint/manifest.json"}) {
    EXPECT_TRUE(fs::exists(dir / f)) << f;
  }
  EXPECT_EQ(resolve_output_dir("explicit", cfg.string()), fs::path("explicit"));
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

TEST(RunCommand, ResumeAfterInterruptionMatchesFullRun) {
  const auto dir = scratch("resume_cli");
  const auto cfg = write_config(dir, "c", small_rps("mixed-oracles", 6));
  std::ostringstream log;
  run_command({cfg.string(), (dir / "full").string(), 0, false, 0}, log);
  run_command({cfg.string(), (dir / "part").string(), 0, false, 1}, log);
  run_command({cfg.string(), (dir / "part").string(), 3, true, 0}, log);
  EXPECT_EQ(slurp(dir / "full" / "regret_curve.tsv"), slurp(dir / "part" / "regret_curve.tsv"));
  EXPECT_EQ(slurp(dir / "full" / "game.json"), slurp(dir / "part" / "game.json"));
}

TEST(Compare, LongFormatAcrossRuns) {
  const auto dir = scratch("compare");
  std::ostringstream log;
  std::vector<std::string> dirs;
  for (const std::string a : {"psro", "mixed-opponents"}) {
    const auto cfg = write_config(dir, a, small_rps(a, 1));
    dirs.push_back(run_command({cfg.string(), (dir / a).string(), 0, false, 0}, log).string());
  }
  std::ostringstream out;
  compare_command(dirs, out);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "algorithm\trun\taxis\tx\tsum_regret");
  int rows = 0, epochs = 0;
  while (std::getline(in, line)) {
    ++rows;
    if (line.find("\tepoch\t") != std::string::npos) ++epochs;
  }
  EXPECT_EQ(rows, 2 * 2 * 4);
  EXPECT_EQ(epochs, 2 * 4);
  EXPECT_NE(out.str().find("mixed-opponents\tmixed-opponents\ttimesteps\t"), std::string::npos);

  EXPECT_EQ(code_of([&] { compare_command({dirs[0]}, out); }), ErrorCode::kPrecondition);
  auto manifest = load_json_file((fs::path(dirs[1]) / "checkpoint" / "manifest.json").string());
  manifest["env_name"] = "leduc";
  save_json_file((fs::path(dirs[1]) / "checkpoint" / "manifest.json").string(), manifest);
  EXPECT_EQ(code_of([&] { compare_command(dirs, out); }), ErrorCode::kEnvironmentMismatch);
}

TEST(Eval, ProxyRegretPerEpoch) {
  const auto dir = scratch("eval");
  std::ostringstream log;
  const auto a = write_config(dir, "a", small_rps("psro", 1));
  const auto b = write_config(dir, "b", small_rps("mixed-opponents", 9));
  run_command({a.string(), (dir / "a").string(), 0, false, 0}, log);
  run_command({b.string(), (dir / "b").string(), 0, false, 0}, log);
  EvalOptions o;
  o.checkpoint = (dir / "a").string();
  o.eval_set = (dir / "b").string();
  o.eval_size = 3;
  std::ostringstream out, again;
  eval_command(o, out);
  eval_command(o, again);
  EXPECT_EQ(out.str(), again.str());
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "epoch\tcumulative_timesteps\tproxy_regret_p0\tproxy_regret_p1\tsum_regret");
  int rows = 0;
  while (std::getline(in, line)) {
    ++rows;
    std::istringstream cols(line);
    double epoch, steps, r0, r1, sum;
    cols >> epoch >> steps >> r0 >> r1 >> sum;
    EXPECT_GE(r0, 0.0);
    EXPECT_GE(r1, 0.0);
    EXPECT_DOUBLE_EQ(sum, r0 + r1);
  }
  EXPECT_EQ(rows, 4);
  o.eval_size = 0;
  EXPECT_EQ(code_of([&] { eval_command(o, out); }), ErrorCode::kConfigError);
}

}  // namespace
}  // namespace mixpsro
