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

#ifndef DRON_AGENT_H_
#define DRON_AGENT_H_

// Q-value architectures.
//
//   dqn          state tower -> linear head
//   dron_concat  [state tower ; opponent tower] -> ReLU layer -> linear head
//   dron_moe     K experts over the state tower, mixed by a softmax gate
//                computed from the opponent tower only:
//                  Q(s, .) = sum_i w_i Q_i(h_s, .)
//                  w = softmax(relu(W_o h_o + b_o))
//
// Any kind may carry a supervision head on the opponent tower that predicts
// the opponent's action or type (multitask training). The head only reads
// h_o, so it never changes Q-values directly.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "dron/nn.h"

namespace dron {

enum class AgentKind { kDqn, kDronConcat, kDronMoe };
enum class Multitask { kNone, kAction, kType };

std::string ToString(AgentKind kind);
std::string ToString(Multitask m);
AgentKind ParseAgentKind(const std::string& s);
Multitask ParseMultitask(const std::string& s);

struct AgentSpec {
  AgentKind kind = AgentKind::kDqn;
  int state_dim = 15;
  int opponent_dim = 16;
  int num_actions = 5;
  // Hidden layers of the state tower; its last entry is |h_s|.
  std::vector<int> state_hidden = {50, 50};
  // |h_o|; unused by dqn.
  int opponent_hidden = 50;
  // Hidden width above the concatenation (dron_concat) and inside each
  // expert (dron_moe).
  int head_hidden = 50;
  int num_experts = 3;
  Multitask multitask = Multitask::kNone;
  double multitask_weight = 1.0;
  // Number of opponent classes for the supervision head; 1 means a scalar
  // in [0,1] (sigmoid output, mean squared error).
  int supervision_size = 2;

  bool uses_opponent() const { return kind != AgentKind::kDqn; }
  void Validate() const;
};

bool operator==(const AgentSpec& a, const AgentSpec& b);

struct HiddenReps {
  Vector state;
  Vector opponent;  // empty for dqn
};

struct MoeOutput {
  Vector q;
  Vector gate;                 // w, length K
  std::vector<Vector> expert;  // Q_i
};

// Everything the backward pass needs for one batch.
struct QForward {
  ForwardCache state;
  ForwardCache opponent;
  ForwardCache head;                 // dqn / dron_concat
  std::vector<ForwardCache> experts;  // dron_moe
  ForwardCache gate;                 // dron_moe, pre-softmax
  ForwardCache supervision;
  Matrix gate_weights;  // B x K
  Matrix q;             // B x A
  Matrix prediction;    // B x supervision_size (multitask only)
};

// Architecture only; parameters live in a ParamSet so the same network can
// evaluate live and frozen target weights.
class QNetwork {
 public:
  explicit QNetwork(AgentSpec spec);

  const AgentSpec& spec() const { return spec_; }

  // Zero-valued parameters in this network's layout.
  const ParamSet& layout() const { return layout_; }
  ParamSet InitParams(std::uint64_t seed) const;

  // Batched forward. `opponent` may have zero columns for dqn.
  // want_supervision computes the supervision head as well.
  QForward Forward(const ParamSet& params, const Matrix& state,
                   const Matrix& opponent, bool want_supervision) const;
  Matrix QValues(const ParamSet& params, const Matrix& state,
                 const Matrix& opponent) const;

  // Accumulates into grads. dq is B x A; dprediction is either empty or
  // B x supervision_size (dLoss/dPrediction).
  void Backward(const ParamSet& params, const QForward& fwd,
                const Matrix& dq, const Matrix& dprediction,
                ParamSet& grads) const;

  // Single-sample conveniences.
  HiddenReps Encode(const ParamSet& params, std::span<const double> state,
                    std::span<const double> opponent) const;
  Vector Q(const ParamSet& params, std::span<const double> state,
           std::span<const double> opponent) const;
  Vector QDqn(const ParamSet& params, std::span<const double> state) const;
  Vector QDronConcat(const ParamSet& params, std::span<const double> state,
                     std::span<const double> opponent) const;
  MoeOutput QDronMoe(const ParamSet& params, std::span<const double> state,
                     std::span<const double> opponent) const;
  // Class distribution, or a one-element vector in [0,1] for scalar
  // supervision.
  Vector PredictOpponent(const ParamSet& params,
                         std::span<const double> opponent_hidden) const;

  // Layer index ranges, exposed for tests that perturb sub-networks.
  const Mlp& state_tower() const { return state_tower_; }
  const Mlp& opponent_tower() const { return opponent_tower_; }
  const Mlp& head() const { return head_; }
  const std::vector<Mlp>& experts() const { return experts_; }
  const Mlp& gate() const { return gate_; }
  const Mlp& supervision_head() const { return supervision_; }

 private:
  Matrix StateInput(std::span<const double> v) const;
  Matrix OpponentInput(std::span<const double> v) const;

  AgentSpec spec_;
  ParamSet layout_;
  Mlp state_tower_;
  Mlp opponent_tower_;
  Mlp head_;
  std::vector<Mlp> experts_;
  Mlp gate_;
  Mlp supervision_;
};

// q_loss + weight * supervision_loss.
double CombinedLoss(double q_loss, double supervision_loss, double weight);

}  // namespace dron

#endif  // DRON_AGENT_H_
