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

#ifndef DRON_EXPERIMENT_H_
#define DRON_EXPERIMENT_H_

// Training and evaluation driver.
//
// Learning-curve CSV (one row per epoch):
//   epoch,mean_reward,rush,miss,win,tie
// win/tie are the fractions of evaluation games with positive / zero total
// reward to the agent; rush/miss are always 0 for soccer.
//
// Sweep CSV (one row per expert count):
//   experts,runs,mean,ci90_low,ci90_high,half_width,degenerate
// where the per-run value is Mean R (last 10 epochs).

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dron/checkpoint.h"
#include "dron/config.h"

namespace dron {

// Quiz players are a fixed synthetic dataset shared by training and
// evaluation; only the episode stream depends on the run seed.
inline constexpr std::uint64_t kPopulationSeed = 2016;

struct MetricsSummary {
  int games = 0;  // per evaluation
  double mean_reward = 0.0;  // last evaluation
  double max_reward = 0.0;   // Max R over epochs
  double mean_r = 0.0;       // Mean R: last 10 epochs (all if fewer)
  double win = 0.0;
  double tie = 0.0;
  double loss = 0.0;
  double rush = 0.0;
  double miss = 0.0;
  double mean_length = 0.0;  // steps (soccer) or decision points (quiz)
  std::vector<double> epoch_rewards;
};

// Mean of the last min(10, n) entries.
double MeanOfLastEpochs(const std::vector<double>& rewards);

std::string CurveCsvHeader();

struct EvalOptions {
  // Quiz only: per-step episode traces.
  std::ostream* trace_csv = nullptr;
  // Soccer only: board after every step of every game.
  std::ostream* render = nullptr;
};

// Greedy play of `params` against `opponent` on n_games fresh games whose
// rng streams derive from (seed, game index). Throws UsageError for
// n_games < 1 and ConfigError for an unknown opponent.
MetricsSummary Evaluate(const Checkpoint& checkpoint,
                        const std::string& opponent, int n_games,
                        std::uint64_t seed, const EvalOptions& options = {});

struct TrainOptions {
  std::ostream* log = nullptr;     // one progress line per epoch
  std::ostream* render = nullptr;  // soccer: boards of the first eval game
};

struct TrainResult {
  Checkpoint checkpoint;
  std::string curve_csv;
  MetricsSummary summary;
};

// One seed. Deterministic in (config, seed). A non-finite loss raises
// TrainingError naming the epoch.
TrainResult Train(const ExperimentConfig& config, std::uint64_t seed,
                  const TrainOptions& options = {});

// Output root: $DRON_OUTPUT_DIR when set, else config.output_dir.
std::string OutputRoot(const ExperimentConfig& config);

// Trains every seed in config.seeds and writes
// <root>/<name>/seed_<s>/{curve.csv,checkpoint.txt,config.txt}.
std::vector<TrainResult> RunTraining(const ExperimentConfig& config,
                                     const TrainOptions& options = {});

struct SweepRow {
  int experts = 0;
  std::vector<double> mean_r;  // one per seed
  double mean = 0.0;
  double half_width = 0.0;
  bool degenerate = false;
};

// dron_moe only. Trains every (K, seed) pair; returns one row per K.
std::vector<SweepRow> SweepExperts(const ExperimentConfig& config,
                                   const std::vector<int>& experts,
                                   const TrainOptions& options = {});
std::string SweepCsv(const std::vector<SweepRow>& rows);
// Writes <root>/<name>/sweep.csv and per-run outputs.
std::vector<SweepRow> RunSweep(const ExperimentConfig& config,
                               const std::vector<int>& experts,
                               const TrainOptions& options = {});

// Numeric column `column` of a CSV with a header row.
std::vector<double> ReadCsvColumn(const std::string& path,
                                  const std::string& column);

void WriteTextFile(const std::string& path, const std::string& text);

}  // namespace dron

#endif  // DRON_EXPERIMENT_H_
