// Copyright 2026 The DRON Authors. All rights reserved.
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

// dron: train, evaluate and check opponent-aware Q-learning agents.
//
//   dron train <config> [--render] [--quiet]
//   dron eval <checkpoint> --opponent <spec> --games N --seed S
//             [--trace <csv>] [--render]
//   dron sweep <config> --experts 2,3,4
//   dron ttest <csv_a> <csv_b> [--column mean_reward]
//   dron gradcheck [--seed S] [--networks N]
//   dron selfcheck [--seed S] [--quick]
//
// Output goes under the config's output_dir, or $DRON_OUTPUT_DIR when set.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dron/checkpoint.h"
#include "dron/checks.h"
#include "dron/config.h"
#include "dron/experiment.h"
#include "dron/stats.h"

namespace {

enum ExitCode {
  kOk = 0,
  kCheckFailed = 1,
  kBadInput = 2,
  kIoFailure = 3,
  kTrainingFailure = 4,
};

void PrintSummary(const dron::MetricsSummary& m) {
  std::printf(
      "games,mean_reward,win,tie,loss,rush,miss,mean_length\n"
      "%d,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.4f\n",
      m.games, m.mean_reward, m.win, m.tie, m.loss, m.rush, m.miss,
      m.mean_length);
}

int Report(const std::vector<dron::CheckResult>& results) {
  bool ok = true;
  for (const auto& r : results) {
    std::printf("%s %s: %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(),
                r.detail.c_str());
    ok = ok && r.passed;
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opponent-aware deep Q-learning experiments"};
  app.require_subcommand(1);

  std::string config_path, checkpoint_path, opponent, trace_path;
  std::string csv_a, csv_b, column = "mean_reward";
  std::vector<int> experts;
  int games = 5000, networks = 20;
  std::uint64_t seed = 1;
  bool render = false, quiet = false, quick = false;

  auto* train = app.add_subcommand("train", "train every seed of a config");
  train->add_option("config", config_path, "config file")->required();
  train->add_flag("--render", render, "print the boards of the last eval game");
  train->add_flag("--quiet", quiet, "no per-epoch progress");

  auto* eval = app.add_subcommand("eval", "greedy evaluation of a checkpoint");
  eval->add_option("checkpoint", checkpoint_path, "checkpoint file")
      ->required();
  eval->add_option("--opponent", opponent,
                   "soccer: mixed|offensive|defensive; "
                   "quizbowl: mixed|type1..type4")
      ->required();
  eval->add_option("--games", games, "number of games");
  eval->add_option("--seed", seed, "game seed");
  eval->add_option("--trace", trace_path, "quiz bowl: per-step trace CSV");
  eval->add_flag("--render", render, "soccer: print every board");

  auto* sweep = app.add_subcommand("sweep", "train dron_moe for several K");
  sweep->add_option("config", config_path, "config file")->required();
  sweep->add_option("--experts", experts, "expert counts")
      ->delimiter(',')
      ->required();
  sweep->add_flag("--quiet", quiet, "no per-epoch progress");

  auto* ttest = app.add_subcommand("ttest", "paired t-test of two CSVs");
  ttest->add_option("csv_a", csv_a)->required();
  ttest->add_option("csv_b", csv_b)->required();
  ttest->add_option("--column", column, "numeric column to pair");

  auto* grad = app.add_subcommand("gradcheck", "backprop vs finite differences");
  grad->add_option("--seed", seed);
  grad->add_option("--networks", networks, "networks per agent kind");

  auto* self = app.add_subcommand("selfcheck", "run the invariant suite");
  self->add_option("--seed", seed);
  self->add_flag("--quick", quick, "smaller sample sizes");

  CLI11_PARSE(app, argc, argv);

  try {
    dron::TrainOptions options;
    if (!quiet) options.log = &std::cerr;
    if (render) options.render = &std::cout;

    if (*train) {
      const auto config = dron::LoadConfig(config_path);
      for (const auto& r : dron::RunTraining(config, options)) {
        std::printf("max_reward %.6f mean_r %.6f\n", r.summary.max_reward,
                    r.summary.mean_r);
      }
      std::printf("output %s/%s\n", dron::OutputRoot(config).c_str(),
                  config.name.c_str());
    } else if (*eval) {
      const auto checkpoint = dron::LoadCheckpoint(checkpoint_path);
      dron::EvalOptions eval_options;
      std::ofstream trace;
      if (!trace_path.empty()) {
        if (checkpoint.env != dron::EnvKind::kQuizbowl) {
          throw dron::UsageError("--trace applies to quizbowl checkpoints");
        }
        trace.open(trace_path);
        if (!trace) throw dron::IoError("cannot write '" + trace_path + "'");
        eval_options.trace_csv = &trace;
      }
      if (render) eval_options.render = &std::cout;
      PrintSummary(dron::Evaluate(checkpoint, opponent, games, seed,
                                  eval_options));
    } else if (*sweep) {
      const auto config = dron::LoadConfig(config_path);
      std::fputs(dron::SweepCsv(dron::RunSweep(config, experts, options))
                     .c_str(),
                 stdout);
    } else if (*ttest) {
      const auto a = dron::ReadCsvColumn(csv_a, column);
      const auto b = dron::ReadCsvColumn(csv_b, column);
      const auto r = dron::PairedTTest(a, b);
      std::printf("t,p,df,degenerate,pairs\n%.6f,%.6g,%d,%d,%zu\n", r.t, r.p,
                  r.df, r.degenerate ? 1 : 0, a.size());
      std::printf("# pairs are rows of '%s' matched by position\n",
                  column.c_str());
    } else if (*grad) {
      return Report({dron::CheckGradients(seed, networks)});
    } else if (*self) {
      return Report(dron::RunSelfCheck(seed, quick));
    }
  } catch (const dron::ParseError& e) {
    std::fprintf(stderr, "parse error: %s\n", e.what());
    return kBadInput;
  } catch (const dron::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kBadInput;
  } catch (const dron::UsageError& e) {
    std::fprintf(stderr, "usage error: %s\n", e.what());
    return kBadInput;
  } catch (const dron::IoError& e) {
    std::fprintf(stderr, "i/o error: %s\n", e.what());
    return kIoFailure;
  } catch (const dron::TrainingError& e) {
    std::fprintf(stderr, "training error: %s\n", e.what());
    return kTrainingFailure;
  }
  return kOk;
}
