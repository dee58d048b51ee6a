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

#ifndef DRON_CONFIG_H_
#define DRON_CONFIG_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dron/agent.h"
#include "dron/quizbowl.h"
#include "dron/rl.h"
#include "dron/soccer.h"

namespace dron {

enum class EnvKind { kSoccer, kQuizbowl };
std::string ToString(EnvKind env);
EnvKind ParseEnvKind(const std::string& s);

// Everything one training run needs. Built by ParseConfig, which fills in
// environment-dependent defaults (network widths, feature sizes).
struct ExperimentConfig {
  std::string name = "run";
  EnvKind env = EnvKind::kSoccer;
  AgentSpec agent;
  QLearningConfig q;
  EpsilonSchedule epsilon;
  int epochs = 50;
  std::int64_t steps_per_epoch = 10000;
  int eval_games = 1000;
  std::vector<std::uint64_t> seeds = {1};
  // soccer: mixed | offensive | defensive
  // quizbowl: mixed | type1 | type2 | type3 | type4
  std::string opponent = "mixed";
  std::string output_dir = "runs";
  std::size_t replay_capacity = 100000;
  std::int64_t learning_starts = 1000;
  // quizbowl only: train on the opponent-agnostic shaped rewards.
  bool self_reward = false;
  soccer::SoccerConfig soccer;
  quiz::QuizConfig quiz;

  void Validate() const;
};

// Flat "key = value" lines; '#' starts a comment. Unknown keys and
// malformed values raise ParseError with the line number.
ExperimentConfig ParseConfig(std::string_view text);
ExperimentConfig LoadConfig(const std::string& path);

// The text ParseConfig would need to rebuild `config` (used in run
// metadata).
std::string FormatConfig(const ExperimentConfig& config);

// Width defaults for an agent kind in an environment.
AgentSpec DefaultAgentSpec(EnvKind env, AgentKind kind, Multitask multitask,
                           const quiz::QuizConfig& quiz = {});

bool IsValidOpponent(EnvKind env, const std::string& opponent);

}  // namespace dron

#endif  // DRON_CONFIG_H_
