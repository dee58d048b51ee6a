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

#ifndef DRON_RL_H_
#define DRON_RL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dron/agent.h"
#include "dron/nn.h"

namespace dron {

struct Transition {
  std::vector<double> state;
  std::vector<double> opponent;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  std::vector<double> next_opponent;
  bool terminal = false;
  // Class index (stored as a real) or a scalar target in [0,1].
  std::optional<double> supervision;
};

// Fixed-capacity ring; once full the oldest transition is overwritten.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void Push(Transition t);
  // Uniform with replacement. Throws UsageError when empty.
  std::vector<const Transition*> Sample(int batch, Rng& rng) const;

  std::size_t size() const { return items_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return items_.empty(); }
  // i-th oldest stored transition.
  const Transition& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;  // slot overwritten by the next push once full
  std::vector<Transition> items_;
};

struct EpsilonSchedule {
  double start = 0.3;
  double end = 0.1;
  std::int64_t decay_steps = 500000;

  void Validate() const;
};

// Linear from start to end over decay_steps, then flat.
double EpsilonAt(const EpsilonSchedule& schedule, std::int64_t step);

struct QLearningConfig {
  double gamma = 0.9;
  int batch_size = 64;
  int target_sync_period = 500;
  double learning_rate = 0.0005;
  // Per-coordinate gradient clip; <= 0 disables.
  double gradient_clip = 0.0;

  void Validate() const;
};

// r if terminal, else r + gamma * max_a' Q_target(s', a').
Vector QTargets(const QNetwork& net, const ParamSet& target_params,
                std::span<const Transition* const> batch, double gamma);

struct TdStats {
  double loss = 0.0;         // combined
  double q_loss = 0.0;
  double supervision_loss = 0.0;
};

// One AdaGrad step on mean-over-batch 0.5 (Q(s,a) - y)^2, plus
// multitask_weight times the supervision loss when the agent has a
// supervision head. Only the taken action's output receives gradient.
TdStats TdUpdate(const QNetwork& net, ParamSet& params,
                 const ParamSet& target_params,
                 std::span<const Transition* const> batch,
                 const QLearningConfig& config, AdaGradState& optimizer);

// With probability epsilon a uniform action, else argmax (lowest index on
// ties).
int ActEpsilonGreedy(std::span<const double> q_values, double epsilon,
                     Rng& rng);
int Argmax(std::span<const double> values);

// Deep copy of the live parameters.
inline ParamSet SyncTarget(const ParamSet& live) { return live; }

}  // namespace dron

#endif  // DRON_RL_H_
