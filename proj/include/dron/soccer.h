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

#ifndef DRON_SOCCER_H_
#define DRON_SOCCER_H_

// Two-player grid soccer on a 6 x 9 board.
//
//   col: 0 1 2 3 4 5 6 7 8
//   row 0  # . . . . . . . #
//   row 1  # . . . . . . . #
//   row 2  G . . . . . . . G
//   row 3  G . . . . . . . G
//   row 4  # . . . . . . . #
//   row 5  # . . . . . . . #
//
// '#' cells are out of play. Player A starts on the left and scores in the
// right goal; player B mirrors that. Moves are simultaneous. When the two
// players would end on the same cell or swap cells, neither moves and the
// ball changes hands.

#include <array>
#include <cstdlib>
#include <optional>
#include <string>
#include <vector>

#include "dron/common.h"

namespace dron::soccer {

struct Cell {
  int col = 0;
  int row = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

inline int Manhattan(Cell a, Cell b) {
  return std::abs(a.col - b.col) + std::abs(a.row - b.row);
}

enum class Player { kA = 0, kB = 1 };
inline Player Other(Player p) { return p == Player::kA ? Player::kB : Player::kA; }

// Action indices double as Q-network output indices.
enum Action : int { kNorth = 0, kSouth = 1, kEast = 2, kWest = 3, kStand = 4 };
inline constexpr int kNumActions = 5;
char ActionChar(int action);

struct SoccerConfig {
  int width = 9;
  int height = 6;
  std::array<Cell, 2> left_goal = {Cell{0, 2}, Cell{0, 3}};
  std::array<Cell, 2> right_goal = {Cell{8, 2}, Cell{8, 3}};
  int horizon = 100;

  bool InGrid(Cell c) const;
  bool IsGoal(Cell c) const;
  // Edge cells of the goal columns that are not goals.
  bool IsShaded(Cell c) const;
  bool Playable(Cell c) const { return InGrid(c) && !IsShaded(c); }
  // The goal `p` attacks / defends.
  const std::array<Cell, 2>& AttackGoal(Player p) const;
  const std::array<Cell, 2>& OwnGoal(Player p) const;
  int DistanceToGoal(Cell c, const std::array<Cell, 2>& goal) const;
  void Validate() const;
};

struct SoccerState {
  Cell a;
  Cell b;
  Player owner = Player::kA;
  int steps = 0;
  bool done = false;

  Cell pos(Player p) const { return p == Player::kA ? a : b; }
  friend bool operator==(const SoccerState&, const SoccerState&) = default;
};

enum class Mode { kOffensive = 0, kDefensive = 1 };
enum class ModePolicy { kMixed, kOffensiveOnly, kDefensiveOnly };
std::string ToString(Mode m);

// Target of `action` from `from`; invalid moves (off grid or shaded)
// become stand.
Cell Resolve(const SoccerConfig& config, Cell from, int action);
int ValidatedAction(const SoccerConfig& config, Cell from, int action);

struct StepEvents {
  bool collision = false;
  // Ball owner before the step lost it through a collision.
  bool ball_lost = false;
  std::optional<Player> scorer;
  int effective_action_a = kStand;
  int effective_action_b = kStand;
};

struct StepResult {
  SoccerState state;
  double reward_a = 0.0;  // reward_b == -reward_a
  bool done = false;
  StepEvents events;
};

StepResult Step(const SoccerConfig& config, const SoccerState& state,
                int action_a, int action_b);

Mode SampleMode(Rng& rng, ModePolicy policy = ModePolicy::kMixed);

struct Episode {
  SoccerState state;
  Mode mode = Mode::kOffensive;
};
// A uniform over playable left-half cells, B over the right half (goals
// excluded), ball owner uniform, then the opponent's mode.
Episode Reset(const SoccerConfig& config, Rng& rng, ModePolicy policy);

inline constexpr int kStateFeatures = 15;
// [self x,y; opponent x,y; xmin,xmax,ymin,ymax; own goal x,ylow,yhigh;
//  opposing goal x,ylow,yhigh; ball flag], x scaled by 1/(width-1) and y by
// 1/(height-1).
std::vector<double> FeaturizeState(const SoccerState& state,
                                   const SoccerConfig& config,
                                   Player perspective);

enum class MoveCategory {
  kApproachAgent = 0,
  kAvoidAgent = 1,
  kApproachAgentGoal = 2,
  kApproachOwnGoal = 3,
  kStand = 4,
};
inline constexpr int kNumMoveCategories = 5;

// Category of `mover`'s (already validated) action from `previous`,
// relative to the other player (the agent). First match in the order
// approach agent > avoid agent > approach agent's goal > approach own goal.
MoveCategory ClassifyMove(const SoccerState& previous, int action,
                          const SoccerConfig& config,
                          Player mover = Player::kB);

// Observed behavior of the opponent during the current episode.
struct OpponentStats {
  std::array<int, kNumMoveCategories> counts{};
  std::optional<MoveCategory> last_category;
  std::optional<int> last_action;
  int ball_losses = 0;  // times the agent lost the ball to the opponent
  int steps = 0;

  void Observe(MoveCategory category, int action, bool agent_lost_ball);
};

inline constexpr int kOpponentFeatures = 16;
// [5 category frequencies; one-hot last category; one-hot last raw action;
//  ball-loss frequency]. All zeros before the first observation.
std::vector<double> OpponentFeatures(const OpponentStats& stats);

// Hand-crafted opponent. Offensive: advance to goal with the ball,
// intercept without it. Defensive: avoid the opponent with the ball, guard
// the own goal without it.
int RuleAgentAct(const SoccerState& state, Mode mode, Rng& rng,
                 const SoccerConfig& config, Player self = Player::kB);

// One character per cell ('A'/'B' players, '#' shaded, 'G' goal, '.'
// empty), then a footer line like "*A step 12" naming the ball owner.
std::string Render(const SoccerState& state, const SoccerConfig& config);

}  // namespace dron::soccer

#endif  // DRON_SOCCER_H_
