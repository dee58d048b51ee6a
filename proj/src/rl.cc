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

#include "dron/rl.h"

#include <algorithm>
#include <cmath>

namespace dron {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::Push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
    return;
  }
  items_[next_] = std::move(t);
  next_ = (next_ + 1) % capacity_;
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= items_.size()) throw UsageError("replay index out of range");
  return items_[(next_ + i) % items_.size()];
}

std::vector<const Transition*> ReplayBuffer::Sample(int batch,
                                                    Rng& rng) const {
  if (items_.empty()) throw UsageError("cannot sample an empty replay buffer");
  if (batch < 1) throw UsageError("batch size must be positive");
  std::vector<const Transition*> out;
  out.reserve(batch);
  const int n = static_cast<int>(items_.size());
  for (int i = 0; i < batch; ++i) out.push_back(&items_[UniformInt(rng, n)]);
  return out;
}

void EpsilonSchedule::Validate() const {
  if (!(start >= end && end >= 0.0 && start <= 1.0)) {
    throw ConfigError("epsilon schedule needs 1 >= start >= end >= 0");
  }
  if (decay_steps < 0) throw ConfigError("decay_steps must be >= 0");
}

double EpsilonAt(const EpsilonSchedule& schedule, std::int64_t step) {
  if (step >= schedule.decay_steps) return schedule.end;
  const double frac =
      static_cast<double>(std::max<std::int64_t>(step, 0)) /
      static_cast<double>(schedule.decay_steps);
  return schedule.start + frac * (schedule.end - schedule.start);
}

void QLearningConfig::Validate() const {
  if (!(gamma >= 0.0 && gamma <= 1.0)) {
    throw ConfigError("gamma must lie in [0, 1]");
  }
  if (batch_size < 1) throw ConfigError("batch size must be >= 1");
  if (target_sync_period < 1) throw ConfigError("target sync period must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
}

namespace {

struct BatchMatrices {
  Matrix state, opponent, next_state, next_opponent;
};

Matrix Stack(std::span<const Transition* const> batch, int cols,
             const std::vector<double> Transition::*field) {
  Matrix m(static_cast<Eigen::Index>(batch.size()), cols);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const std::vector<double>& v = batch[i]->*field;
    if (static_cast<int>(v.size()) != cols) {
      throw ConfigError("transition feature length " +
                        std::to_string(v.size()) + " != " +
                        std::to_string(cols));
    }
    for (int c = 0; c < cols; ++c) m(i, c) = v[c];
  }
  return m;
}

int OpponentCols(const QNetwork& net) {
  return net.spec().uses_opponent() ? net.spec().opponent_dim : 0;
}

}  // namespace

Vector QTargets(const QNetwork& net, const ParamSet& target_params,
                std::span<const Transition* const> batch, double gamma) {
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  Vector targets(n);
  std::vector<const Transition*> live;
  for (const Transition* t : batch) {
    if (!t->terminal && gamma != 0.0) live.push_back(t);
  }
  Vector next_max;
  if (!live.empty()) {
    const int sd = net.spec().state_dim;
    const int od = OpponentCols(net);
    const Matrix s = Stack(live, sd, &Transition::next_state);
    const Matrix o = od > 0 ? Stack(live, od, &Transition::next_opponent)
                            : Matrix(s.rows(), 0);
    next_max = net.QValues(target_params, s, o).rowwise().maxCoeff();
  }
  std::size_t j = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const Transition* t = batch[i];
    targets[i] = t->reward;
    if (!t->terminal && gamma != 0.0) targets[i] += gamma * next_max[j++];
  }
  return targets;
}

TdStats TdUpdate(const QNetwork& net, ParamSet& params,
                 const ParamSet& target_params,
                 std::span<const Transition* const> batch,
                 const QLearningConfig& config, AdaGradState& optimizer) {
  if (batch.empty()) throw UsageError("TD update on an empty batch");
  const AgentSpec& spec = net.spec();
  const Eigen::Index n = static_cast<Eigen::Index>(batch.size());
  const Vector targets = QTargets(net, target_params, batch, config.gamma);

  const bool multitask = spec.multitask != Multitask::kNone;
  const int od = multitask || spec.uses_opponent() ? spec.opponent_dim : 0;
  const Matrix s = Stack(batch, spec.state_dim, &Transition::state);
  const Matrix o =
      od > 0 ? Stack(batch, od, &Transition::opponent) : Matrix(n, 0);
  const QForward fwd = net.Forward(params, s, o, multitask);

  TdStats stats;
  const double inv_n = 1.0 / static_cast<double>(n);
  Matrix dq = Matrix::Zero(n, spec.num_actions);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = batch[i]->action;
    if (a < 0 || a >= spec.num_actions) {
      throw UsageError("transition action out of range");
    }
    const double diff = fwd.q(i, a) - targets[i];
    stats.q_loss += 0.5 * diff * diff * inv_n;
    dq(i, a) = diff * inv_n;
  }

  Matrix dpred;
  if (multitask) {
    const LossKind kind = spec.supervision_size == 1 ? LossKind::kMeanSquared
                                                     : LossKind::kCrossEntropy;
    dpred = Matrix::Zero(n, spec.supervision_size);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!batch[i]->supervision) {
        throw UsageError("multitask agent needs supervised transitions");
      }
      const double target = *batch[i]->supervision;
      const LossResult r = LossAndGrad(
          kind, std::span<const double>(fwd.prediction.row(i).data(),
                                        spec.supervision_size),
          std::span<const double>(&target, 1));
      stats.supervision_loss += r.loss * inv_n;
      dpred.row(i) = r.gradient.transpose() * (spec.multitask_weight * inv_n);
    }
  }
  stats.loss =
      CombinedLoss(stats.q_loss, stats.supervision_loss, spec.multitask_weight);
  if (!std::isfinite(stats.loss)) {
    throw TrainingError("non-finite TD loss");
  }

  ParamSet grads = net.layout();
  net.Backward(params, fwd, dq, dpred, grads);
  AdaGradUpdate(params, grads, optimizer);
  return stats;
}

int Argmax(std::span<const double> values) {
  if (values.empty()) throw UsageError("argmax of an empty vector");
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

int ActEpsilonGreedy(std::span<const double> q_values, double epsilon,
                     Rng& rng) {
  if (q_values.empty()) throw UsageError("no action values");
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw UsageError("epsilon must lie in [0, 1]");
  }
  if (epsilon > 0.0 && Uniform01(rng) < epsilon) {
    return UniformInt(rng, static_cast<int>(q_values.size()));
  }
  return Argmax(q_values);
}

}  // namespace dron
