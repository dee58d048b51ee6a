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

#include "dron/agent.h"

#include <algorithm>

namespace dron {

std::string ToString(AgentKind kind) {
  switch (kind) {
    case AgentKind::kDqn:
      return "dqn";
    case AgentKind::kDronConcat:
      return "dron_concat";
    case AgentKind::kDronMoe:
      return "dron_moe";
  }
  return "?";
}

std::string ToString(Multitask m) {
  switch (m) {
    case Multitask::kNone:
      return "none";
    case Multitask::kAction:
      return "action";
    case Multitask::kType:
      return "type";
  }
  return "?";
}

AgentKind ParseAgentKind(const std::string& s) {
  if (s == "dqn") return AgentKind::kDqn;
  if (s == "dron_concat") return AgentKind::kDronConcat;
  if (s == "dron_moe") return AgentKind::kDronMoe;
  throw ConfigError("unknown agent kind '" + s + "'");
}

Multitask ParseMultitask(const std::string& s) {
  if (s == "none") return Multitask::kNone;
  if (s == "action") return Multitask::kAction;
  if (s == "type") return Multitask::kType;
  throw ConfigError("unknown multitask mode '" + s + "'");
}

void AgentSpec::Validate() const {
  if (state_dim < 1 || num_actions < 1) {
    throw ConfigError("agent needs positive state and action dimensions");
  }
  if (state_hidden.empty()) {
    throw ConfigError("state tower needs at least one hidden layer");
  }
  for (int h : state_hidden) {
    if (h < 1) throw ConfigError("hidden sizes must be positive");
  }
  if (kind == AgentKind::kDqn && multitask != Multitask::kNone) {
    throw ConfigError("multitask supervision needs an opponent tower (dron_*)");
  }
  if (uses_opponent()) {
    if (opponent_dim < 1 || opponent_hidden < 1) {
      throw ConfigError("opponent tower needs positive sizes");
    }
  }
  if (kind != AgentKind::kDqn && head_hidden < 1) {
    throw ConfigError("head_hidden must be positive");
  }
  if (kind == AgentKind::kDronMoe && num_experts < 1) {
    throw ConfigError("dron_moe needs at least one expert");
  }
  if (multitask != Multitask::kNone && supervision_size < 1) {
    throw ConfigError("supervision head needs at least one output");
  }
  if (multitask_weight < 0.0) {
    throw ConfigError("multitask weight must be non-negative");
  }
}

bool operator==(const AgentSpec& a, const AgentSpec& b) {
  return a.kind == b.kind && a.state_dim == b.state_dim &&
         a.opponent_dim == b.opponent_dim && a.num_actions == b.num_actions &&
         a.state_hidden == b.state_hidden &&
         a.opponent_hidden == b.opponent_hidden &&
         a.head_hidden == b.head_hidden && a.num_experts == b.num_experts &&
         a.multitask == b.multitask &&
         a.multitask_weight == b.multitask_weight &&
         a.supervision_size == b.supervision_size;
}

QNetwork::QNetwork(AgentSpec spec) : spec_(std::move(spec)) {
  spec_.Validate();
  std::vector<int> sizes = {spec_.state_dim};
  sizes.insert(sizes.end(), spec_.state_hidden.begin(),
               spec_.state_hidden.end());
  state_tower_ = Mlp::Create({sizes, Activation::kRelu}, "state_tower",
                             layout_);
  const int hs = spec_.state_hidden.back();
  const bool has_opponent_tower =
      spec_.uses_opponent() || spec_.multitask != Multitask::kNone;
  if (has_opponent_tower) {
    opponent_tower_ = Mlp::Create(
        {{spec_.opponent_dim, spec_.opponent_hidden}, Activation::kRelu},
        "opponent_tower", layout_);
  }
  switch (spec_.kind) {
    case AgentKind::kDqn:
      head_ = Mlp::Create({{hs, spec_.num_actions}, Activation::kIdentity},
                          "head", layout_);
      break;
    case AgentKind::kDronConcat:
      head_ = Mlp::Create({{hs + spec_.opponent_hidden, spec_.head_hidden,
                            spec_.num_actions},
                           Activation::kIdentity},
                          "head", layout_);
      break;
    case AgentKind::kDronMoe:
      for (int k = 0; k < spec_.num_experts; ++k) {
        experts_.push_back(Mlp::Create(
            {{hs, spec_.head_hidden, spec_.num_actions}, Activation::kIdentity},
            "expert." + std::to_string(k), layout_));
      }
      gate_ = Mlp::Create(
          {{spec_.opponent_hidden, spec_.num_experts}, Activation::kRelu},
          "gate", layout_);
      break;
  }
  // Supervision head goes last so that adding it never shifts the
  // initialization of the Q-learning layers.
  if (spec_.multitask != Multitask::kNone) {
    supervision_ = Mlp::Create(
        {{spec_.opponent_hidden, spec_.supervision_size},
         spec_.supervision_size == 1 ? Activation::kSigmoid
                                     : Activation::kSoftmax},
        "supervision", layout_);
  }
}

ParamSet QNetwork::InitParams(std::uint64_t seed) const {
  ParamSet params = layout_;
  Rng rng(seed);
  for (auto& layer : params.layers()) InitLayer(layer, rng);
  return params;
}

QForward QNetwork::Forward(const ParamSet& params, const Matrix& state,
                           const Matrix& opponent,
                           bool want_supervision) const {
  if (!params.SameShape(layout_)) {
    throw ConfigError("parameters do not match the " + ToString(spec_.kind) +
                      " layout");
  }
  if (state.cols() != spec_.state_dim) {
    throw ConfigError("state features have " + std::to_string(state.cols()) +
                      " entries, expected " + std::to_string(spec_.state_dim));
  }
  const bool need_opponent = spec_.uses_opponent() ||
                             (want_supervision &&
                              spec_.multitask != Multitask::kNone);
  if (need_opponent && (opponent.cols() != spec_.opponent_dim ||
                        opponent.rows() != state.rows())) {
    throw ConfigError("opponent features have " +
                      std::to_string(opponent.cols()) + " entries, expected " +
                      std::to_string(spec_.opponent_dim));
  }
  QForward fwd;
  fwd.state = state_tower_.Forward(params, state);
  const Matrix& hs = fwd.state.output();
  if (need_opponent) fwd.opponent = opponent_tower_.Forward(params, opponent);

  switch (spec_.kind) {
    case AgentKind::kDqn:
      fwd.head = head_.Forward(params, hs);
      fwd.q = fwd.head.output();
      break;
    case AgentKind::kDronConcat: {
      const Matrix& ho = fwd.opponent.output();
      Matrix joint(hs.rows(), hs.cols() + ho.cols());
      joint << hs, ho;
      fwd.head = head_.Forward(params, joint);
      fwd.q = fwd.head.output();
      break;
    }
    case AgentKind::kDronMoe: {
      fwd.gate = gate_.Forward(params, fwd.opponent.output());
      fwd.gate_weights = SoftmaxRows(fwd.gate.output());
      fwd.q = Matrix::Zero(hs.rows(), spec_.num_actions);
      fwd.experts.reserve(experts_.size());
      for (std::size_t k = 0; k < experts_.size(); ++k) {
        fwd.experts.push_back(experts_[k].Forward(params, hs));
        fwd.q.noalias() += fwd.gate_weights.col(k).asDiagonal() *
                           fwd.experts.back().output();
      }
      break;
    }
  }
  if (want_supervision && spec_.multitask != Multitask::kNone) {
    fwd.supervision = supervision_.Forward(params, fwd.opponent.output());
    fwd.prediction = fwd.supervision.output();
  }
  return fwd;
}

Matrix QNetwork::QValues(const ParamSet& params, const Matrix& state,
                         const Matrix& opponent) const {
  return Forward(params, state, opponent, false).q;
}

void QNetwork::Backward(const ParamSet& params, const QForward& fwd,
                        const Matrix& dq, const Matrix& dprediction,
                        ParamSet& grads) const {
  if (dq.rows() != fwd.q.rows() || dq.cols() != fwd.q.cols()) {
    throw ConfigError("Q gradient shape does not match the forward pass");
  }
  const Matrix& hs = fwd.state.output();
  Matrix dhs = Matrix::Zero(hs.rows(), hs.cols());
  Matrix dho;
  if (fwd.opponent.pre.size() == 1) {
    dho = Matrix::Zero(hs.rows(), spec_.opponent_hidden);
  }

  switch (spec_.kind) {
    case AgentKind::kDqn:
      dhs = head_.Backward(params, fwd.head, dq, grads);
      break;
    case AgentKind::kDronConcat: {
      const Matrix djoint = head_.Backward(params, fwd.head, dq, grads);
      dhs = djoint.leftCols(hs.cols());
      dho += djoint.rightCols(spec_.opponent_hidden);
      break;
    }
    case AgentKind::kDronMoe: {
      Matrix dw(dq.rows(), spec_.num_experts);
      for (std::size_t k = 0; k < experts_.size(); ++k) {
        const Matrix& qk = fwd.experts[k].output();
        dw.col(k) = (dq.array() * qk.array()).rowwise().sum();
        const Matrix dqk = fwd.gate_weights.col(k).asDiagonal() * dq;
        dhs += experts_[k].Backward(params, fwd.experts[k], dqk, grads);
      }
      const Matrix dgate = SoftmaxBackward(fwd.gate_weights, dw);
      dho += gate_.Backward(params, fwd.gate, dgate, grads);
      break;
    }
  }
  if (dprediction.size() > 0) {
    if (spec_.multitask == Multitask::kNone || fwd.supervision.pre.empty()) {
      throw UsageError("supervision gradient given without a supervision pass");
    }
    dho += supervision_.Backward(params, fwd.supervision, dprediction, grads);
  }
  state_tower_.Backward(params, fwd.state, dhs, grads);
  if (dho.size() > 0) opponent_tower_.Backward(params, fwd.opponent, dho, grads);
}

Matrix QNetwork::StateInput(std::span<const double> v) const {
  if (static_cast<int>(v.size()) != spec_.state_dim) {
    throw ConfigError("state features have " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(spec_.state_dim));
  }
  return Eigen::Map<const Matrix>(v.data(), 1, v.size());
}

Matrix QNetwork::OpponentInput(std::span<const double> v) const {
  if (!spec_.uses_opponent() && spec_.multitask == Multitask::kNone) {
    return Matrix(1, 0);
  }
  if (static_cast<int>(v.size()) != spec_.opponent_dim) {
    throw ConfigError("opponent features have " + std::to_string(v.size()) +
                      " entries, expected " +
                      std::to_string(spec_.opponent_dim));
  }
  return Eigen::Map<const Matrix>(v.data(), 1, v.size());
}

HiddenReps QNetwork::Encode(const ParamSet& params,
                            std::span<const double> state,
                            std::span<const double> opponent) const {
  HiddenReps reps;
  reps.state = state_tower_.Predict(params, StateInput(state)).row(0);
  if (spec_.uses_opponent() || spec_.multitask != Multitask::kNone) {
    reps.opponent =
        opponent_tower_.Predict(params, OpponentInput(opponent)).row(0);
  }
  return reps;
}

Vector QNetwork::Q(const ParamSet& params, std::span<const double> state,
                   std::span<const double> opponent) const {
  Matrix opp = spec_.uses_opponent() ? OpponentInput(opponent) : Matrix(1, 0);
  return QValues(params, StateInput(state), opp).row(0).transpose();
}

Vector QNetwork::QDqn(const ParamSet& params,
                      std::span<const double> state) const {
  if (spec_.kind != AgentKind::kDqn) {
    throw UsageError("QDqn called on a " + ToString(spec_.kind) + " agent");
  }
  return QValues(params, StateInput(state), Matrix(1, 0)).row(0).transpose();
}

Vector QNetwork::QDronConcat(const ParamSet& params,
                             std::span<const double> state,
                             std::span<const double> opponent) const {
  if (spec_.kind != AgentKind::kDronConcat) {
    throw UsageError("QDronConcat called on a " + ToString(spec_.kind) +
                     " agent");
  }
  return Q(params, state, opponent);
}

MoeOutput QNetwork::QDronMoe(const ParamSet& params,
                             std::span<const double> state,
                             std::span<const double> opponent) const {
  if (spec_.kind != AgentKind::kDronMoe) {
    throw UsageError("QDronMoe called on a " + ToString(spec_.kind) +
                     " agent");
  }
  const QForward fwd =
      Forward(params, StateInput(state), OpponentInput(opponent), false);
  MoeOutput out;
  out.q = fwd.q.row(0).transpose();
  out.gate = fwd.gate_weights.row(0).transpose();
  for (const auto& e : fwd.experts) {
    out.expert.push_back(e.output().row(0).transpose());
  }
  return out;
}

Vector QNetwork::PredictOpponent(
    const ParamSet& params, std::span<const double> opponent_hidden) const {
  if (spec_.multitask == Multitask::kNone) {
    throw UsageError("agent has no supervision head");
  }
  if (static_cast<int>(opponent_hidden.size()) != spec_.opponent_hidden) {
    throw ConfigError("opponent representation has the wrong length");
  }
  const Matrix h =
      Eigen::Map<const Matrix>(opponent_hidden.data(), 1, opponent_hidden.size());
  Vector out = supervision_.Predict(params, h).row(0).transpose();
  if (spec_.supervision_size == 1) out = out.cwiseMax(0.0).cwiseMin(1.0);
  return out;
}

double CombinedLoss(double q_loss, double supervision_loss, double weight) {
  if (weight < 0.0) throw UsageError("multitask weight must be non-negative");
  return q_loss + weight * supervision_loss;
}

}  // namespace dron
