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

#include "dron/checks.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "dron/agent.h"
#include "dron/checkpoint.h"
#include "dron/config.h"
#include "dron/experiment.h"
#include "dron/stats.h"

namespace dron {
namespace {

std::string Format(const char* fmt, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof(buf), fmt, a, b, c);
  return buf;
}

Matrix RandomMatrix(int rows, int cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = StandardNormal(rng);
  return m;
}

AgentSpec RandomMiniSpec(AgentKind kind, Rng& rng) {
  AgentSpec s;
  s.kind = kind;
  s.state_dim = 2 + UniformInt(rng, 4);
  s.opponent_dim = 2 + UniformInt(rng, 3);
  s.num_actions = 2 + UniformInt(rng, 3);
  s.state_hidden.assign(1 + UniformInt(rng, 2), 0);
  for (int& h : s.state_hidden) h = 2 + UniformInt(rng, 4);
  s.opponent_hidden = 2 + UniformInt(rng, 3);
  s.head_hidden = 2 + UniformInt(rng, 3);
  s.num_experts = 1 + UniformInt(rng, 4);
  s.multitask = kind == AgentKind::kDqn
                    ? Multitask::kNone
                    : static_cast<Multitask>(UniformInt(rng, 3));
  s.supervision_size = 1 + UniformInt(rng, 3);
  s.multitask_weight = 0.5 + Uniform01(rng);
  return s;
}

// Random weights and non-zero biases so ReLU units sit on both sides.
ParamSet RandomParams(const QNetwork& net, Rng& rng) {
  ParamSet p = net.InitParams(rng());
  for (DenseParams& layer : p.layers()) {
    for (Eigen::Index i = 0; i < layer.bias.size(); ++i) {
      layer.bias[i] = 0.3 * StandardNormal(rng);
    }
  }
  return p;
}

// Scalar objective: sum(R .* Q) + lambda * supervision loss.
struct Objective {
  const QNetwork& net;
  Matrix state, opponent, q_weights;
  std::vector<double> targets;  // one per row

  bool supervised() const { return net.spec().multitask != Multitask::kNone; }

  double Value(const ParamSet& params, Matrix* dq, Matrix* dpred) const {
    const QForward f = net.Forward(params, state, opponent, supervised());
    double value = (f.q.array() * q_weights.array()).sum();
    if (dq) *dq = q_weights;
    if (!supervised()) {
      if (dpred) *dpred = Matrix();
      return value;
    }
    const double w = net.spec().multitask_weight;
    const bool scalar = net.spec().supervision_size == 1;
    if (dpred) dpred->resize(f.prediction.rows(), f.prediction.cols());
    for (Eigen::Index r = 0; r < f.prediction.rows(); ++r) {
      const Vector p = f.prediction.row(r).transpose();
      const double t = targets[r];
      const LossResult l =
          LossAndGrad(scalar ? LossKind::kMeanSquared : LossKind::kCrossEntropy,
                      std::span<const double>(p.data(), p.size()),
                      std::span<const double>(&t, 1));
      value += w * l.loss;
      if (dpred) dpred->row(r) = w * l.gradient.transpose();
    }
    return value;
  }
};

}  // namespace

GradCheckReport GradientCheck(std::uint64_t seed, int networks_per_kind) {
  GradCheckReport report;
  Rng rng(seed);
  constexpr double kStep = 1e-5;
  for (AgentKind kind :
       {AgentKind::kDqn, AgentKind::kDronConcat, AgentKind::kDronMoe}) {
    for (int n = 0; n < networks_per_kind; ++n) {
      const AgentSpec spec = RandomMiniSpec(kind, rng);
      const QNetwork net(spec);
      ParamSet params = RandomParams(net, rng);
      const int batch = 3;
      Objective obj{net, RandomMatrix(batch, spec.state_dim, rng),
                    RandomMatrix(batch, spec.opponent_dim, rng),
                    RandomMatrix(batch, spec.num_actions, rng),
                    {}};
      for (int r = 0; r < batch; ++r) {
        obj.targets.push_back(spec.supervision_size == 1
                                  ? Uniform01(rng)
                                  : UniformInt(rng, spec.supervision_size));
      }
      Matrix dq, dpred;
      obj.Value(params, &dq, &dpred);
      ParamSet grads = params.ZerosLike();
      const QForward f =
          net.Forward(params, obj.state, obj.opponent, obj.supervised());
      net.Backward(params, f, dq, dpred, grads);

      for (int li = 0; li < params.size(); ++li) {
        for (int part = 0; part < 2; ++part) {
          double* values = part ? params[li].bias.data()
                                : params[li].weight.data();
          const double* analytic =
              part ? grads[li].bias.data() : grads[li].weight.data();
          const Eigen::Index count =
              part ? params[li].bias.size() : params[li].weight.size();
          for (Eigen::Index i = 0; i < count; ++i) {
            const double saved = values[i];
            values[i] = saved + kStep;
            const double up = obj.Value(params, nullptr, nullptr);
            values[i] = saved - kStep;
            const double down = obj.Value(params, nullptr, nullptr);
            values[i] = saved;
            const double numeric = (up - down) / (2 * kStep);
            const double err =
                std::abs(numeric - analytic[i]) /
                std::max({1e-3, std::abs(numeric), std::abs(analytic[i])});
            if (err > report.max_relative_error) {
              report.max_relative_error = err;
              report.worst = ToString(kind) + " " + params[li].name +
                             (part ? ".bias" : ".weight") + "[" +
                             std::to_string(i) + "]";
            }
          }
        }
      }
      ++report.networks;
    }
  }
  return report;
}

CheckResult CheckGradients(std::uint64_t seed, int networks_per_kind,
                           double tolerance) {
  const GradCheckReport r = GradientCheck(seed, networks_per_kind);
  CheckResult c{"gradients", r.max_relative_error <= tolerance, ""};
  c.detail = std::to_string(r.networks) + " networks, max relative error " +
             Format("%.3g", r.max_relative_error) +
             (r.worst.empty() ? "" : " at " + r.worst);
  return c;
}

CheckResult CheckMoeAlgebra(std::uint64_t seed, int trials) {
  Rng rng(seed);
  int simplex = 0, bounds = 0, reduction = 0, separation = 0;
  for (int trial = 0; trial < trials; ++trial) {
    AgentSpec spec = RandomMiniSpec(AgentKind::kDronMoe, rng);
    spec.num_experts = 1 + UniformInt(rng, 5);
    const QNetwork net(spec);
    ParamSet params = RandomParams(net, rng);
    std::vector<double> s(spec.state_dim), o(spec.opponent_dim);
    for (double& x : s) x = 2.0 * StandardNormal(rng);
    for (double& x : o) x = 2.0 * StandardNormal(rng);
    const MoeOutput out = net.QDronMoe(params, s, o);

    // Gate is a probability vector.
    if (std::abs(out.gate.sum() - 1.0) > 1e-6 || out.gate.minCoeff() < 0.0) {
      ++simplex;
    }
    // Mixed Q lies between the smallest and largest expert value.
    for (int a = 0; a < spec.num_actions; ++a) {
      double lo = out.expert[0][a], hi = lo;
      for (const Vector& e : out.expert) {
        lo = std::min(lo, e[a]);
        hi = std::max(hi, e[a]);
      }
      const double tol = 1e-9 * (1.0 + std::abs(lo) + std::abs(hi));
      if (out.q[a] < lo - tol || out.q[a] > hi + tol) {
        ++bounds;
        break;
      }
    }
    // K = 1: the mixture is the single expert.
    {
      AgentSpec one = spec;
      one.num_experts = 1;
      const QNetwork single(one);
      const ParamSet p1 = RandomParams(single, rng);
      const MoeOutput m1 = single.QDronMoe(p1, s, o);
      const Matrix hs = single.state_tower().Predict(
          p1, Eigen::Map<const Matrix>(s.data(), 1, s.size()));
      const Matrix direct = single.experts()[0].Predict(p1, hs);
      if (m1.gate.size() != 1 || std::abs(m1.gate[0] - 1.0) > 1e-12 ||
          (m1.q.transpose() - direct).cwiseAbs().maxCoeff() > 1e-12) {
        ++reduction;
      }
    }
    // Experts never see opponent features; the gate never sees state
    // features, and gate parameters never reach the experts.
    {
      std::vector<double> o2 = o, s2 = s;
      for (double& x : o2) x += StandardNormal(rng);
      for (double& x : s2) x += StandardNormal(rng);
      const MoeOutput by_o = net.QDronMoe(params, s, o2);
      const MoeOutput by_s = net.QDronMoe(params, s2, o);
      ParamSet gate_changed = params;
      const int g0 = net.gate().first_layer;
      for (int l = g0; l < g0 + net.gate().spec.num_layers(); ++l) {
        gate_changed[l].weight.array() += 0.5;
        gate_changed[l].bias.array() -= 0.25;
      }
      const MoeOutput by_g = net.QDronMoe(gate_changed, s, o);
      bool ok = (by_s.gate - out.gate).cwiseAbs().maxCoeff() == 0.0;
      for (int k = 0; k < spec.num_experts; ++k) {
        ok = ok && (by_o.expert[k] - out.expert[k]).cwiseAbs().maxCoeff() == 0.0;
        ok = ok && (by_g.expert[k] - out.expert[k]).cwiseAbs().maxCoeff() == 0.0;
      }
      if (!ok) ++separation;
    }
  }
  CheckResult c{"moe-algebra", simplex + bounds + reduction + separation == 0,
                ""};
  std::ostringstream d;
  d << trials << " trials; violations: simplex " << simplex << ", bounds "
    << bounds << ", K=1 " << reduction << ", separation " << separation;
  c.detail = d.str();
  return c;
}

// Written from the rules alone: 9 x 6 field, goals are rows 2-3 of the
// outer columns, the other outer-column cells are out of play.
soccer::StepResult ReferenceSoccerStep(const soccer::SoccerConfig& config,
                                       const soccer::SoccerState& state,
                                       int action_a, int action_b) {
  using namespace soccer;
  auto open = [&](int col, int row) {
    if (col < 0 || col > 8 || row < 0 || row > 5) return false;
    if (col == 0 || col == 8) return row == 2 || row == 3;
    return true;
  };
  auto move = [&](Cell c, int action) {
    int col = c.col, row = c.row;
    if (action == 0) row -= 1;
    if (action == 1) row += 1;
    if (action == 2) col += 1;
    if (action == 3) col -= 1;
    return open(col, row) ? Cell{col, row} : c;
  };
  StepResult r;
  r.state = state;
  r.state.steps = state.steps + 1;
  Cell na = move(state.a, action_a);
  Cell nb = move(state.b, action_b);
  r.events.effective_action_a = na == state.a ? kStand : action_a;
  r.events.effective_action_b = nb == state.b ? kStand : action_b;
  bool bump = false;
  if (na.col == nb.col && na.row == nb.row) bump = true;
  if (na == state.b && nb == state.a) bump = true;
  if (bump) {
    r.events.collision = true;
    r.events.ball_lost = true;
    r.state.owner = state.owner == Player::kA ? Player::kB : Player::kA;
  } else {
    r.state.a = na;
    r.state.b = nb;
  }
  const Cell holder = r.state.owner == Player::kA ? r.state.a : r.state.b;
  const bool at_right = holder.col == 8 && (holder.row == 2 || holder.row == 3);
  const bool at_left = holder.col == 0 && (holder.row == 2 || holder.row == 3);
  if (r.state.owner == Player::kA && at_right) {
    r.reward_a = 1.0;
    r.events.scorer = Player::kA;
    r.state.done = true;
  } else if (r.state.owner == Player::kB && at_left) {
    r.reward_a = -1.0;
    r.events.scorer = Player::kB;
    r.state.done = true;
  } else if (r.state.steps >= config.horizon) {
    r.state.done = true;
  }
  r.done = r.state.done;
  return r;
}

namespace {

soccer::Cell RandomPlayableCell(const soccer::SoccerConfig& config, Rng& rng) {
  while (true) {
    const soccer::Cell c{UniformInt(rng, config.width),
                         UniformInt(rng, config.height)};
    if (config.Playable(c)) return c;
  }
}

bool SameStep(const soccer::StepResult& x, const soccer::StepResult& y) {
  return x.state == y.state && x.reward_a == y.reward_a && x.done == y.done &&
         x.events.collision == y.events.collision &&
         x.events.ball_lost == y.events.ball_lost &&
         x.events.scorer == y.events.scorer &&
         x.events.effective_action_a == y.events.effective_action_a &&
         x.events.effective_action_b == y.events.effective_action_b;
}

}  // namespace

CheckResult CheckSoccerRules(std::uint64_t seed, int states) {
  using namespace soccer;
  const SoccerConfig config;
  Rng rng(seed);
  int mismatches = 0, checked = 0;
  std::string first;
  while (checked < states) {
    SoccerState s;
    s.a = RandomPlayableCell(config, rng);
    s.b = RandomPlayableCell(config, rng);
    if (s.a == s.b) continue;
    s.owner = UniformInt(rng, 2) ? Player::kB : Player::kA;
    // Skip positions that would already have ended the game.
    const Cell holder = s.pos(s.owner);
    const auto& goal = config.AttackGoal(s.owner);
    if (holder == goal[0] || holder == goal[1]) continue;
    s.steps = UniformInt(rng, config.horizon);
    ++checked;
    for (int a = 0; a < kNumActions; ++a) {
      for (int b = 0; b < kNumActions; ++b) {
        const StepResult got = Step(config, s, a, b);
        const StepResult want = ReferenceSoccerStep(config, s, a, b);
        if (!SameStep(got, want)) {
          if (mismatches == 0) {
            std::ostringstream d;
            d << "A(" << s.a.col << "," << s.a.row << ") B(" << s.b.col << ","
              << s.b.row << ") actions " << a << "," << b;
            first = d.str();
          }
          ++mismatches;
        }
      }
    }
  }
  CheckResult c{"soccer-rules", mismatches == 0, ""};
  c.detail = std::to_string(checked) + " states x 25 joint actions, " +
             std::to_string(mismatches) + " mismatches" +
             (first.empty() ? "" : " (first: " + first + ")");
  return c;
}

CheckResult CheckSoccerRollouts(std::uint64_t seed, int rollouts) {
  using namespace soccer;
  const SoccerConfig config;
  Rng rng(seed);
  int violations = 0;
  std::int64_t steps = 0;
  for (int g = 0; g < rollouts; ++g) {
    Episode ep = Reset(config, rng, ModePolicy::kMixed);
    // Mix random and rule-driven play for player A as well.
    const bool rule_a = UniformInt(rng, 2) == 0;
    const Mode mode_a = SampleMode(rng);
    double total = 0.0;
    while (!ep.state.done) {
      const SoccerState s = ep.state;
      const int a = rule_a ? RuleAgentAct(s, mode_a, rng, config, Player::kA)
                           : UniformInt(rng, kNumActions);
      const int b = RuleAgentAct(s, ep.mode, rng, config);
      const StepResult r = Step(config, s, a, b);
      ++steps;
      total += r.reward_a;
      bool ok = config.Playable(r.state.a) && config.Playable(r.state.b) &&
                !(r.state.a == r.state.b) && r.state.steps == s.steps + 1;
      // Zero-sum payoff only at the end, only from a goal by the holder.
      if (r.reward_a != 0.0) {
        ok = ok && r.done && r.events.scorer.has_value() &&
             (r.reward_a == 1.0) == (*r.events.scorer == Player::kA) &&
             std::abs(r.reward_a) == 1.0 && *r.events.scorer == r.state.owner;
      }
      // The ball changes hands exactly on collisions.
      ok = ok && ((r.state.owner != s.owner) == r.events.collision);
      ok = ok && (r.done == r.state.done) &&
           (!r.done || r.events.scorer || r.state.steps == config.horizon);
      if (!ok) ++violations;
      ep.state = r.state;
    }
    if (std::abs(total) > 1.0) ++violations;
  }
  CheckResult c{"soccer-rollouts", violations == 0, ""};
  c.detail = std::to_string(rollouts) + " rollouts (" + std::to_string(steps) +
             " steps), " + std::to_string(violations) + " violations";
  return c;
}

RuleAgentStats PlayRuleAgentVsRandom(soccer::ModePolicy policy, int games,
                                     std::uint64_t seed) {
  using namespace soccer;
  const SoccerConfig config;
  RuleAgentStats stats;
  double wins = 0, ties = 0, length = 0;
  for (int g = 0; g < games; ++g) {
    Rng rng = DeriveRng(seed, static_cast<std::uint64_t>(g));
    Episode ep = Reset(config, rng, policy);
    double reward = 0.0;
    while (!ep.state.done) {
      const int a = UniformInt(rng, kNumActions);
      const int b = RuleAgentAct(ep.state, ep.mode, rng, config);
      const StepResult r = Step(config, ep.state, a, b);
      reward += r.reward_a;
      ep.state = r.state;
    }
    wins += reward < 0;
    ties += reward == 0;
    length += ep.state.steps;
  }
  stats.games = games;
  stats.win = wins / games;
  stats.tie = ties / games;
  stats.mean_length = length / games;
  return stats;
}

CheckResult CheckRuleAgents(std::uint64_t seed, int games) {
  const RuleAgentStats off =
      PlayRuleAgentVsRandom(soccer::ModePolicy::kOffensiveOnly, games, seed);
  const RuleAgentStats def =
      PlayRuleAgentVsRandom(soccer::ModePolicy::kDefensiveOnly, games, seed);
  CheckResult c{"rule-agents", off.win >= 0.95 && off.mean_length <= 25 &&
                                   def.tie >= 0.40 && def.mean_length >= 60,
                ""};
  c.detail = "offensive win " + Format("%.4f length %.2f", off.win,
                                       off.mean_length) +
             "; defensive tie " +
             Format("%.4f length %.2f", def.tie, def.mean_length);
  return c;
}

double NumericTwoTailedP(double t, int df) {
  const double nu = df;
  const double log_c = std::lgamma(0.5 * (nu + 1)) - std::lgamma(0.5 * nu) -
                       0.5 * std::log(nu * M_PI);
  auto density = [&](double x) {
    return std::exp(log_c - 0.5 * (nu + 1) * std::log1p(x * x / nu));
  };
  // Tail integral on u in (0, 1] with x = |t| + (1 - u) / u.
  const double a = std::abs(t);
  auto integrand = [&](double u) {
    if (u <= 0.0) return 0.0;
    const double x = a + (1.0 - u) / u;
    return density(x) / (u * u);
  };
  const int n = 200000;  // even
  const double h = 1.0 / n;
  double sum = integrand(0.0) + integrand(1.0);
  for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * integrand(i * h);
  return std::min(1.0, 2.0 * sum * h / 3.0);
}

CheckResult CheckTTest() {
  struct Case {
    std::vector<double> a, b;
  };
  const std::vector<Case> cases = {
      {{1, 2, 3}, {0, 0, 0}},
      {{0.62, 0.71, 0.55, 0.68, 0.74}, {0.60, 0.58, 0.57, 0.61, 0.66}},
      {{1.2, -0.4, 0.3, 2.2, 0.9, -1.1, 0.5, 0.8}, {0.1, 0.2, 0.0, 0.4,
                                                     0.3, 0.2, 0.1, 0.0}},
      {{5, 7}, {4, 4.5}},
      {{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 1.1, 1.2},
       {0.15, 0.1, 0.35, 0.3, 0.55, 0.5, 0.75, 0.7, 0.95, 0.9, 1.15, 1.3}},
  };
  double worst = 0.0;
  for (const Case& c : cases) {
    const TTestResult r = PairedTTest(c.a, c.b);
    worst = std::max(worst, std::abs(r.p - NumericTwoTailedP(r.t, r.df)));
  }
  CheckResult c{"ttest", worst <= 1e-3, ""};
  c.detail = std::to_string(cases.size()) + " cases, max |p - oracle| " +
             Format("%.3g", worst);
  return c;
}

CheckResult CheckCheckpointRoundTrip(std::uint64_t seed) {
  Rng rng(seed);
  int failures = 0, nets = 0;
  for (AgentKind kind :
       {AgentKind::kDqn, AgentKind::kDronConcat, AgentKind::kDronMoe}) {
    for (int n = 0; n < 3; ++n, ++nets) {
      Checkpoint ck;
      ck.spec = RandomMiniSpec(kind, rng);
      const QNetwork net(ck.spec);
      ck.params = RandomParams(net, rng);
      // Values that stress 17-digit printing.
      ck.params[0].weight(0, 0) = 0.1 + 0.2;
      ck.params[0].bias[0] = -std::ldexp(1.0, -1060);
      ck.steps = static_cast<std::int64_t>(rng() >> 20);
      ck.rng_state = RngState(rng);
      std::stringstream ss;
      WriteCheckpoint(ss, ck);
      const Checkpoint back = ReadCheckpoint(ss);
      bool ok = back.spec == ck.spec && back.steps == ck.steps &&
                back.rng_state == ck.rng_state &&
                back.params.size() == ck.params.size();
      for (int l = 0; ok && l < ck.params.size(); ++l) {
        ok = back.params[l].name == ck.params[l].name &&
             back.params[l].weight == ck.params[l].weight &&
             back.params[l].bias == ck.params[l].bias;
      }
      for (int i = 0; ok && i < 100; ++i) {
        std::vector<double> s(ck.spec.state_dim), o(ck.spec.opponent_dim);
        for (double& x : s) x = StandardNormal(rng);
        for (double& x : o) x = StandardNormal(rng);
        ok = net.Q(ck.params, s, o) == net.Q(back.params, s, o);
      }
      if (!ok) ++failures;
    }
  }
  CheckResult c{"checkpoint", failures == 0, ""};
  c.detail = std::to_string(nets) + " networks, " + std::to_string(failures) +
             " round-trip failures";
  return c;
}

std::vector<CheckResult> RunSelfCheck(std::uint64_t seed, bool quick) {
  std::vector<CheckResult> out;
  out.push_back(CheckGradients(seed, quick ? 5 : 20));
  out.push_back(CheckMoeAlgebra(seed + 1, quick ? 200 : 1000));
  out.push_back(CheckSoccerRules(seed + 2, quick ? 200 : 1000));
  out.push_back(CheckSoccerRollouts(seed + 3, quick ? 1000 : 10000));
  out.push_back(CheckRuleAgents(seed + 4, quick ? 1000 : 5000));
  out.push_back(CheckTTest());
  out.push_back(CheckCheckpointRoundTrip(seed + 5));
  return out;
}

}  // namespace dron
