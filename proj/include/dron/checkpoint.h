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

#ifndef DRON_CHECKPOINT_H_
#define DRON_CHECKPOINT_H_

// Versioned plain-text checkpoints:
//
//   dron-checkpoint 1
//   env soccer
//   soccer <horizon>
//   quiz <vocab> <min_length> <max_length> <alpha> <kappa>
//   agent <kind> <multitask> <weight> <experts> <state_dim> <opponent_dim>
//         <actions> <opponent_hidden> <head_hidden> <supervision_size>
//         <n> <state_hidden...>                       (one line)
//   steps <n>
//   rng <mt19937_64 state>
//   params <n matrices>
//   <name> <rows> <cols>
//   <values, 17 significant digits>
//   ...
//   end
//
// Each layer contributes "<layer>.weight" and "<layer>.bias" (bias is n x 1).

#include <cstdint>
#include <iosfwd>
#include <string>

#include "dron/agent.h"
#include "dron/config.h"

namespace dron {

inline constexpr int kCheckpointVersion = 1;

struct Checkpoint {
  int version = kCheckpointVersion;
  EnvKind env = EnvKind::kSoccer;
  soccer::SoccerConfig soccer;
  quiz::QuizConfig quiz;
  AgentSpec spec;
  ParamSet params;
  std::int64_t steps = 0;
  std::string rng_state;  // textual mt19937_64 state
};

void WriteCheckpoint(std::ostream& out, const Checkpoint& checkpoint);
// ParseError (with line number) on corrupt, truncated or unsupported input.
Checkpoint ReadCheckpoint(std::istream& in);

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path);
Checkpoint LoadCheckpoint(const std::string& path);

std::string RngState(const Rng& rng);
Rng RngFromState(const std::string& state);

}  // namespace dron

#endif  // DRON_CHECKPOINT_H_
