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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <vector>

#include "dron/checks.h"
#include "dron/common.h"
#include "dron/soccer.h"

namespace dron::soccer {
namespace {

using doctest::Approx;

double ThreeSigma(double p, int n) { return 3.0 * std::sqrt(p * (1 - p) / n); }

SoccerState At(Cell a, Cell b, Player owner, int steps = 0) {
  SoccerState s;
  s.a = a;
  s.b = b;
  s.owner = owner;
  s.steps = steps;
  return s;
}

TEST_CASE("reset places players in their halves") {
  const SoccerConfig config;
  Rng rng(1);
  const int n = 10000;
  int ball_a = 0;
  for (int i = 0; i < n; ++i) {
    const Episode e = Reset(config, rng, ModePolicy::kMixed);
    ball_a += e.state.owner == Player::kA;
    CHECK(config.Playable(e.state.a));
    CHECK(config.Playable(e.state.b));
    CHECK_FALSE(config.IsGoal(e.state.a));
    CHECK_FALSE(config.IsGoal(e.state.b));
    CHECK(e.state.a.col <= 3);
    CHECK(e.state.b.col >= 5);
    CHECK(e.state.steps == 0);
  }
  CHECK(std::abs(ball_a / double(n) - 0.5) <= ThreeSigma(0.5, n));

  Rng r1(77), r2(77);
  const Episode e1 = Reset(config, r1, ModePolicy::kMixed);
  const Episode e2 = Reset(config, r2, ModePolicy::kMixed);
  CHECK(e1.state == e2.state);
  CHECK(e1.mode == e2.mode);
}

TEST_CASE("step basics") {
  const SoccerConfig config;
  const SoccerState s = At({2, 2}, {6, 3}, Player::kA);
  const StepResult stand = Step(config, s, kStand, kStand);
  CHECK(stand.state.a == s.a);
  CHECK(stand.state.b == s.b);
  CHECK(stand.state.steps == 1);
  CHECK_FALSE(stand.done);

  // Both head for (4,2).
  const StepResult clash =
      Step(config, At({3, 2}, {5, 2}, Player::kA), kEast, kWest);
  CHECK(clash.state.a == Cell{3, 2});
  CHECK(clash.state.b == Cell{5, 2});
  CHECK(clash.state.owner == Player::kB);
  CHECK(clash.events.ball_lost);

  const StepResult goal =
      Step(config, At({7, 2}, {5, 4}, Player::kA), kEast, kStand);
  CHECK(goal.done);
  CHECK(goal.reward_a == 1.0);
  CHECK(goal.state.a == Cell{8, 2});

  const StepResult horizon =
      Step(config, At({2, 2}, {6, 3}, Player::kA, 99), kStand, kStand);
  CHECK(horizon.done);
  CHECK(horizon.reward_a == 0.0);
  CHECK_THROWS_AS(Step(config, horizon.state, kStand, kStand), UsageError);

  // Shaded corner (0,1) is not enterable; the move becomes stand.
  const StepResult shaded =
      Step(config, At({1, 1}, {6, 3}, Player::kB), kWest, kStand);
  CHECK(shaded.state.a == Cell{1, 1});
  CHECK(shaded.events.effective_action_a == kStand);
}

TEST_CASE("step agrees with the reference rules") {
  const CheckResult rules = CheckSoccerRules(5, 200);
  CHECK_MESSAGE(rules.passed, rules.detail);
  const CheckResult rollouts = CheckSoccerRollouts(6, 1000);
  CHECK_MESSAGE(rollouts.passed, rollouts.detail);
}

TEST_CASE("state features") {
  const SoccerConfig config;
  const SoccerState s = At({2, 3}, {6, 1}, Player::kA);
  const std::vector<double> golden = {0.25, 0.6, 0.75, 0.2, 0.0, 1.0, 0.0, 1.0,
                                      0.0,  0.4, 0.6,  1.0, 0.4, 0.6, 1.0};
  const auto f = FeaturizeState(s, config, Player::kA);
  REQUIRE(f.size() == 15);
  for (int i = 0; i < 15; ++i) CHECK(f[i] == Approx(golden[i]));
  const auto fb = FeaturizeState(s, config, Player::kB);
  CHECK(fb.size() == 15);
  CHECK(fb[14] == 0.0);
  CHECK(fb[0] == Approx(0.75));
}

TEST_CASE("move classification") {
  const SoccerConfig config;
  const SoccerState s = At({2, 3}, {5, 3}, Player::kA);
  CHECK(ClassifyMove(s, kStand, config) == MoveCategory::kStand);
  CHECK(ClassifyMove(s, kWest, config) == MoveCategory::kApproachAgent);
  // Westward away from A is also toward A's goal; avoid wins.
  const SoccerState behind = At({6, 3}, {4, 3}, Player::kA);
  CHECK(ClassifyMove(behind, kWest, config) == MoveCategory::kAvoidAgent);
  // Invalid move counts as standing.
  const SoccerState edge = At({2, 3}, {8, 4}, Player::kA);
  CHECK(ClassifyMove(edge, kEast, config) == MoveCategory::kStand);
}

TEST_CASE("opponent features") {
  OpponentStats stats;
  const auto fresh = OpponentFeatures(stats);
  REQUIRE(fresh.size() == 16);
  for (double x : fresh) CHECK(x == 0.0);

  stats.Observe(MoveCategory::kApproachAgent, kEast, false);
  const std::vector<double> one = {1, 0, 0, 0, 0, 1, 0, 0,
                                   0, 0, 0, 0, 1, 0, 0, 0};
  CHECK(OpponentFeatures(stats) == one);

  const SoccerConfig config;
  Rng rng(9);
  for (int game = 0; game < 50; ++game) {
    Episode e = Reset(config, rng, ModePolicy::kMixed);
    OpponentStats st;
    SoccerState state = e.state;
    while (!state.done) {
      const int a = UniformInt(rng, kNumActions);
      const int b = RuleAgentAct(state, e.mode, rng, config);
      const StepResult r = Step(config, state, a, b);
      st.Observe(ClassifyMove(state, r.events.effective_action_b, config),
                 r.events.effective_action_b,
                 r.events.ball_lost && state.owner == Player::kA);
      const auto f = OpponentFeatures(st);
      double sum = 0.0;
      for (int i = 0; i < 5; ++i) sum += f[i];
      CHECK(sum == Approx(1.0));
      CHECK(f[15] >= 0.0);
      CHECK(f[15] <= 1.0);
      state = r.state;
    }
  }
}

TEST_CASE("rule agents") {
  const SoccerConfig config;
  Rng rng(3);
  const SoccerState s = At({6, 2}, {2, 4}, Player::kA);
  for (int i = 0; i < 20; ++i) {
    CHECK(RuleAgentAct(s, Mode::kOffensive, rng, config, Player::kA) == kEast);
  }
  const RuleAgentStats off =
      PlayRuleAgentVsRandom(ModePolicy::kOffensiveOnly, 5000, 11);
  CHECK(off.win >= 0.95);
  CHECK(off.mean_length <= 25.0);
  const RuleAgentStats def =
      PlayRuleAgentVsRandom(ModePolicy::kDefensiveOnly, 5000, 12);
  CHECK(def.tie >= 0.40);
  CHECK(def.mean_length >= 60.0);
}

TEST_CASE("mode sampling") {
  Rng rng(4);
  const int n = 10000;
  int off = 0;
  for (int i = 0; i < n; ++i) off += SampleMode(rng) == Mode::kOffensive;
  CHECK(std::abs(off / double(n) - 0.5) <= ThreeSigma(0.5, n));
  for (int i = 0; i < 100; ++i) {
    CHECK(SampleMode(rng, ModePolicy::kDefensiveOnly) == Mode::kDefensive);
    CHECK(SampleMode(rng, ModePolicy::kOffensiveOnly) == Mode::kOffensive);
  }
  Rng r1(8), r2(8);
  for (int i = 0; i < 100; ++i) CHECK(SampleMode(r1) == SampleMode(r2));
}

TEST_CASE("render draws both players") {
  const SoccerConfig config;
  const std::string board = Render(At({2, 3}, {6, 1}, Player::kA), config);
  CHECK(board.find('A') != std::string::npos);
  CHECK(board.find('B') != std::string::npos);
}

}  // namespace
}  // namespace dron::soccer
