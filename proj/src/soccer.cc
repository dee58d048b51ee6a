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

#include "dron/soccer.h"

#include <algorithm>
#include <limits>
#include <sstream>

namespace dron::soccer {
namespace {

constexpr std::array<Cell, kNumActions> kDeltas = {
    Cell{0, -1}, Cell{0, 1}, Cell{1, 0}, Cell{-1, 0}, Cell{0, 0}};

bool InGoal(Cell c, const std::array<Cell, 2>& goal) {
  return c == goal[0] || c == goal[1];
}

void CheckAction(int action) {
  if (action < 0 || action >= kNumActions) {
    throw UsageError("soccer action " + std::to_string(action) +
                     " out of range");
  }
}

}  // namespace

char ActionChar(int action) {
  static constexpr char kChars[] = "NSEW.";
  CheckAction(action);
  return kChars[action];
}

std::string ToString(Mode m) {
  return m == Mode::kOffensive ? "offensive" : "defensive";
}

bool SoccerConfig::InGrid(Cell c) const {
  return c.col >= 0 && c.col < width && c.row >= 0 && c.row < height;
}

bool SoccerConfig::IsGoal(Cell c) const {
  return InGoal(c, left_goal) || InGoal(c, right_goal);
}

bool SoccerConfig::IsShaded(Cell c) const {
  return InGrid(c) && (c.col == 0 || c.col == width - 1) && !IsGoal(c);
}

const std::array<Cell, 2>& SoccerConfig::AttackGoal(Player p) const {
  return p == Player::kA ? right_goal : left_goal;
}

const std::array<Cell, 2>& SoccerConfig::OwnGoal(Player p) const {
  return p == Player::kA ? left_goal : right_goal;
}

int SoccerConfig::DistanceToGoal(Cell c,
                                 const std::array<Cell, 2>& goal) const {
  return std::min(Manhattan(c, goal[0]), Manhattan(c, goal[1]));
}

void SoccerConfig::Validate() const {
  if (width < 3 || height < 1) throw ConfigError("soccer grid too small");
  if (horizon < 1) throw ConfigError("soccer horizon must be >= 1");
  for (const auto* goal : {&left_goal, &right_goal}) {
    for (Cell c : *goal) {
      if (!InGrid(c)) throw ConfigError("goal cell outside the grid");
    }
  }
}

Cell Resolve(const SoccerConfig& config, Cell from, int action) {
  CheckAction(action);
  const Cell to{from.col + kDeltas[action].col, from.row + kDeltas[action].row};
  return config.Playable(to) ? to : from;
}

int ValidatedAction(const SoccerConfig& config, Cell from, int action) {
  return Resolve(config, from, action) == from ? kStand : action;
}

StepResult Step(const SoccerConfig& config, const SoccerState& state,
                int action_a, int action_b) {
  if (state.done) throw UsageError("step on a finished soccer episode");
  StepResult result;
  result.events.effective_action_a = ValidatedAction(config, state.a, action_a);
  result.events.effective_action_b = ValidatedAction(config, state.b, action_b);
  const Cell to_a = Resolve(config, state.a, action_a);
  const Cell to_b = Resolve(config, state.b, action_b);

  SoccerState next = state;
  ++next.steps;
  const bool same_cell = to_a == to_b;
  const bool swap = to_a == state.b && to_b == state.a;
  if (same_cell || swap) {
    result.events.collision = true;
    result.events.ball_lost = true;
    next.owner = Other(state.owner);
  } else {
    next.a = to_a;
    next.b = to_b;
  }

  if (InGoal(next.pos(next.owner), config.AttackGoal(next.owner))) {
    result.events.scorer = next.owner;
    result.reward_a = next.owner == Player::kA ? 1.0 : -1.0;
    next.done = true;
  } else if (next.steps >= config.horizon) {
    next.done = true;
  }
  result.done = next.done;
  result.state = next;
  return result;
}

Mode SampleMode(Rng& rng, ModePolicy policy) {
  switch (policy) {
    case ModePolicy::kOffensiveOnly:
      return Mode::kOffensive;
    case ModePolicy::kDefensiveOnly:
      return Mode::kDefensive;
    case ModePolicy::kMixed:
      break;
  }
  return UniformInt(rng, 2) == 0 ? Mode::kOffensive : Mode::kDefensive;
}

Episode Reset(const SoccerConfig& config, Rng& rng, ModePolicy policy) {
  std::vector<Cell> left, right;
  const int mid = config.width / 2;
  for (int col = 0; col < config.width; ++col) {
    for (int row = 0; row < config.height; ++row) {
      const Cell c{col, row};
      if (!config.Playable(c) || config.IsGoal(c)) continue;
      if (col < mid) left.push_back(c);
      if (col > mid) right.push_back(c);
    }
  }
  Episode ep;
  ep.state.a = left[UniformInt(rng, static_cast<int>(left.size()))];
  ep.state.b = right[UniformInt(rng, static_cast<int>(right.size()))];
  ep.state.owner = UniformInt(rng, 2) == 0 ? Player::kA : Player::kB;
  ep.mode = SampleMode(rng, policy);
  return ep;
}

std::vector<double> FeaturizeState(const SoccerState& state,
                                   const SoccerConfig& config,
                                   Player perspective) {
  const double sx = 1.0 / (config.width - 1);
  const double sy = 1.0 / (config.height - 1);
  const Cell self = state.pos(perspective);
  const Cell other = state.pos(Other(perspective));
  const auto& own = config.OwnGoal(perspective);
  const auto& opposing = config.AttackGoal(perspective);
  auto goal_rows = [](const std::array<Cell, 2>& g) {
    return std::pair{std::min(g[0].row, g[1].row), std::max(g[0].row, g[1].row)};
  };
  const auto [own_lo, own_hi] = goal_rows(own);
  const auto [opp_lo, opp_hi] = goal_rows(opposing);
  return {self.col * sx,
          self.row * sy,
          other.col * sx,
          other.row * sy,
          0.0,
          (config.width - 1) * sx,
          0.0,
          (config.height - 1) * sy,
          own[0].col * sx,
          own_lo * sy,
          own_hi * sy,
          opposing[0].col * sx,
          opp_lo * sy,
          opp_hi * sy,
          state.owner == perspective ? 1.0 : 0.0};
}

MoveCategory ClassifyMove(const SoccerState& previous, int action,
                          const SoccerConfig& config, Player mover) {
  const Cell from = previous.pos(mover);
  const Cell agent = previous.pos(Other(mover));
  const Cell to = Resolve(config, from, action);
  if (to == from) return MoveCategory::kStand;
  const int d_agent = Manhattan(to, agent) - Manhattan(from, agent);
  if (d_agent < 0) return MoveCategory::kApproachAgent;
  if (d_agent > 0) return MoveCategory::kAvoidAgent;
  const auto& agent_goal = config.OwnGoal(Other(mover));
  if (config.DistanceToGoal(to, agent_goal) <
      config.DistanceToGoal(from, agent_goal)) {
    return MoveCategory::kApproachAgentGoal;
  }
  const auto& own_goal = config.OwnGoal(mover);
  if (config.DistanceToGoal(to, own_goal) <
      config.DistanceToGoal(from, own_goal)) {
    return MoveCategory::kApproachOwnGoal;
  }
  // Unit moves always change the Manhattan distance to the agent, so this
  // is unreachable on a grid; it keeps the classification total.
  return MoveCategory::kStand;
}

void OpponentStats::Observe(MoveCategory category, int action,
                            bool agent_lost_ball) {
  CheckAction(action);
  ++counts[static_cast<int>(category)];
  last_category = category;
  last_action = action;
  if (agent_lost_ball) ++ball_losses;
  ++steps;
}

std::vector<double> OpponentFeatures(const OpponentStats& stats) {
  std::vector<double> f(kOpponentFeatures, 0.0);
  if (stats.steps > 0) {
    for (int i = 0; i < kNumMoveCategories; ++i) {
      f[i] = static_cast<double>(stats.counts[i]) / stats.steps;
    }
  }
  if (stats.last_category) f[5 + static_cast<int>(*stats.last_category)] = 1.0;
  if (stats.last_action) f[10 + *stats.last_action] = 1.0;
  f[15] = static_cast<double>(stats.ball_losses) / std::max(1, stats.steps);
  return f;
}

int RuleAgentAct(const SoccerState& state, Mode mode, Rng& rng,
                 const SoccerConfig& config, Player self) {
  const Cell me = state.pos(self);
  const Cell opponent = state.pos(Other(self));
  const bool has_ball = state.owner == self;
  const auto& own_goal = config.OwnGoal(self);

  // Guard post: the cell just in front of the own goal, on the row of the
  // goal closest to the ball holder.
  const int goal_lo = std::min(own_goal[0].row, own_goal[1].row);
  const int goal_hi = std::max(own_goal[0].row, own_goal[1].row);
  const int inward = own_goal[0].col == 0 ? 1 : -1;
  const Cell guard{own_goal[0].col + inward,
                   std::clamp(opponent.row, goal_lo, goal_hi)};

  int best_score = std::numeric_limits<int>::min();
  std::vector<int> best;
  for (int a = 0; a < kNumActions; ++a) {
    const Cell to{me.col + kDeltas[a].col, me.row + kDeltas[a].row};
    if (a != kStand && !config.Playable(to)) continue;
    int score = 0;
    if (mode == Mode::kOffensive) {
      score = has_ball ? -config.DistanceToGoal(to, config.AttackGoal(self))
                       : -Manhattan(to, opponent);
    } else {
      if (has_ball) {
        if (InGoal(to, own_goal)) continue;
        score = Manhattan(to, opponent);
      } else {
        score = -Manhattan(to, guard);
      }
    }
    if (score > best_score) {
      best_score = score;
      best.clear();
    }
    if (score == best_score) best.push_back(a);
  }
  if (best.size() == 1) return best[0];
  return best[UniformInt(rng, static_cast<int>(best.size()))];
}

std::string Render(const SoccerState& state, const SoccerConfig& config) {
  std::ostringstream out;
  for (int row = 0; row < config.height; ++row) {
    for (int col = 0; col < config.width; ++col) {
      const Cell c{col, row};
      char ch = '.';
      if (c == state.a) {
        ch = 'A';
      } else if (c == state.b) {
        ch = 'B';
      } else if (config.IsGoal(c)) {
        ch = 'G';
      } else if (config.IsShaded(c)) {
        ch = '#';
      }
      out << ch;
    }
    out << '\n';
  }
  out << '*' << (state.owner == Player::kA ? 'A' : 'B') << " step "
      << state.steps << (state.done ? " done" : "") << '\n';
  return out.str();
}

}  // namespace dron::soccer
