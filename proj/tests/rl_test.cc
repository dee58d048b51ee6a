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

#include <algorithm>
#include <cmath>
#include <vector>

#include "dron/agent.h"
#include "dron/common.h"
#include "dron/nn.h"
#include "dron/rl.h"

namespace dron {
namespace {

using doctest::Approx;

Transition Make(double tag, int action = 0, double reward = 0.0) {
  Transition t;
  t.state = {tag};
  t.next_state = {tag};
  t.action = action;
  t.reward = reward;
  return t;
}

// Three standard deviations of a binomial frequency.
double ThreeSigma(double p, int n) { return 3.0 * std::sqrt(p * (1 - p) / n); }

AgentSpec TinyDqn(int state_dim, int actions) {
  AgentSpec spec;
  spec.kind = AgentKind::kDqn;
  spec.state_dim = state_dim;
  spec.opponent_dim = 0;
  spec.num_actions = actions;
  spec.state_hidden = {4};
  return spec;
}

// Index of the network's final (output) layer.
int OutputLayer(const QNetwork& net) {
  return net.head().first_layer + net.head().spec.num_layers() - 1;
}

TEST_CASE("replay keeps the newest items up to capacity") {
  ReplayBuffer empty(4);
  empty.Push(Make(1));
  CHECK(empty.size() == 1);

  ReplayBuffer buf(2);
  for (int i = 1; i <= 3; ++i) buf.Push(Make(i));
  REQUIRE(buf.size() == 2);
  std::vector<double> held = {buf.at(0).state[0], buf.at(1).state[0]};
  std::sort(held.begin(), held.end());
  CHECK(held == std::vector<double>{2, 3});
}

TEST_CASE("replay sampling") {
  ReplayBuffer one(8);
  one.Push(Make(42));
  Rng rng(3);
  auto batch = one.Sample(64, rng);
  REQUIRE(batch.size() == 64);
  for (const Transition* t : batch) CHECK(t->state[0] == 42);

  ReplayBuffer none(8);
  CHECK_THROWS_AS(none.Sample(1, rng), UsageError);

  ReplayBuffer ten(10);
  for (int i = 0; i < 10; ++i) ten.Push(Make(i));
  Rng r1(99), r2(99);
  auto a = ten.Sample(50, r1);
  auto b = ten.Sample(50, r2);
  CHECK(a == b);

  const int n = 100000;
  std::vector<int> counts(10, 0);
  Rng r3(5);
  for (const Transition* t : ten.Sample(n, r3)) {
    ++counts[static_cast<int>(t->state[0])];
  }
  for (int c : counts) {
    CHECK(std::abs(c / double(n) - 0.1) <= ThreeSigma(0.1, n));
  }
}

TEST_CASE("epsilon schedule") {
  const EpsilonSchedule s;
  CHECK(EpsilonAt(s, 0) == Approx(0.3));
  CHECK(EpsilonAt(s, 250000) == Approx(0.2));
  CHECK(EpsilonAt(s, 500000) == Approx(0.1));
  CHECK(EpsilonAt(s, 800000) == Approx(0.1));
  double prev = EpsilonAt(s, 0);
  for (std::int64_t step = 0; step <= 600000; step += 7919) {
    const double e = EpsilonAt(s, step);
    CHECK(e <= prev);
    prev = e;
  }
}

TEST_CASE("q targets") {
  const QNetwork net(TinyDqn(1, 3));
  ParamSet target = net.layout();
  target[OutputLayer(net)].bias << 0.2, 0.5, -1.0;

  Transition terminal = Make(0.3, 0, 1.0);
  terminal.terminal = true;
  Transition live = Make(0.3, 0, 0.0);
  std::vector<const Transition*> batch = {&terminal, &live};

  const Vector t = QTargets(net, target, batch, 0.9);
  CHECK(t[0] == Approx(1.0));
  CHECK(t[1] == Approx(0.45));

  Transition r2 = Make(0.3, 1, -2.5);
  std::vector<const Transition*> batch0 = {&terminal, &live, &r2};
  const Vector t0 = QTargets(net, target, batch0, 0.0);
  CHECK(t0[0] == 1.0);
  CHECK(t0[1] == 0.0);
  CHECK(t0[2] == -2.5);
}

TEST_CASE("td update at the target leaves parameters alone") {
  const QNetwork net(TinyDqn(2, 2));
  ParamSet params = net.InitParams(11);
  const ParamSet target = params;
  Transition t;
  t.state = {0.4, -0.7};
  t.next_state = {0.1, 0.2};
  t.action = 1;
  // r chosen so that r + gamma * max Q(s') equals Q(s, a).
  const Vector q = net.QDqn(params, t.state);
  const Vector qn = net.QDqn(params, t.next_state);
  QLearningConfig config;
  t.reward = q[1] - config.gamma * qn.maxCoeff();
  std::vector<const Transition*> batch = {&t};
  AdaGradState opt = AdaGradState::For(params, config.learning_rate);
  const ParamSet before = params;
  const TdStats stats = TdUpdate(net, params, target, batch, config, opt);
  CHECK(stats.loss == Approx(0.0).epsilon(1e-20));
  for (int i = 0; i < params.size(); ++i) {
    CHECK((params[i].weight - before[i].weight).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((params[i].bias - before[i].bias).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("td update moves Q toward the target") {
  const QNetwork net(TinyDqn(3, 2));
  ParamSet params = net.InitParams(5);
  Transition t;
  t.state = {0.5, 0.1, -0.3};
  t.next_state = t.state;
  t.action = 0;
  t.reward = 2.0;
  t.terminal = true;
  std::vector<const Transition*> batch = {&t};
  QLearningConfig config;
  config.learning_rate = 1e-3;
  AdaGradState opt = AdaGradState::For(params, config.learning_rate);
  double previous = std::abs(net.QDqn(params, t.state)[0] - 2.0);
  for (int i = 0; i < 20; ++i) {
    TdUpdate(net, params, params, batch, config, opt);
    const double err = std::abs(net.QDqn(params, t.state)[0] - 2.0);
    CHECK(err < previous);
    previous = err;
  }
}

TEST_CASE("only the taken action's output receives gradient") {
  const QNetwork net(TinyDqn(2, 3));
  ParamSet params = net.InitParams(8);
  Transition t;
  t.state = {0.3, 0.9};
  t.next_state = t.state;
  t.terminal = true;
  t.action = 2;
  t.reward = 1.0;
  std::vector<const Transition*> batch = {&t};
  QLearningConfig config;
  AdaGradState opt = AdaGradState::For(params, config.learning_rate);
  const ParamSet before = params;
  TdUpdate(net, params, before, batch, config, opt);
  const int out = OutputLayer(net);
  // Weight rows index outputs.
  for (int a = 0; a < 2; ++a) {
    CHECK(params[out].bias[a] == before[out].bias[a]);
    CHECK(params[out].weight.row(a) == before[out].weight.row(a));
  }
  CHECK(params[out].bias[2] != before[out].bias[2]);
}

TEST_CASE("multitask weight zero updates like the plain agent") {
  AgentSpec plain;
  plain.kind = AgentKind::kDronMoe;
  plain.state_dim = 3;
  plain.opponent_dim = 2;
  plain.num_actions = 2;
  plain.state_hidden = {4};
  plain.opponent_hidden = 3;
  plain.head_hidden = 4;
  plain.num_experts = 2;
  AgentSpec multi = plain;
  multi.multitask = Multitask::kType;
  multi.multitask_weight = 0.0;
  multi.supervision_size = 2;

  const QNetwork np(plain), nm(multi);
  ParamSet pp = np.InitParams(21);
  ParamSet pm = nm.InitParams(21);
  for (int i = 0; i < pp.size(); ++i) {
    REQUIRE(pp[i].name == pm[i].name);
    REQUIRE(pp[i].weight == pm[i].weight);
  }
  std::vector<Transition> data;
  Rng rng(4);
  for (int i = 0; i < 6; ++i) {
    Transition t;
    t.state = {Uniform01(rng), Uniform01(rng), Uniform01(rng)};
    t.opponent = {Uniform01(rng), Uniform01(rng)};
    t.next_state = t.state;
    t.next_opponent = t.opponent;
    t.action = i % 2;
    t.reward = Uniform01(rng) - 0.5;
    t.supervision = static_cast<double>(i % 2);
    data.push_back(t);
  }
  std::vector<const Transition*> batch;
  for (const auto& t : data) batch.push_back(&t);
  QLearningConfig config;
  AdaGradState op = AdaGradState::For(pp, config.learning_rate);
  AdaGradState om = AdaGradState::For(pm, config.learning_rate);
  const ParamSet tp = pp, tm = pm;
  TdUpdate(np, pp, tp, batch, config, op);
  TdUpdate(nm, pm, tm, batch, config, om);
  for (int i = 0; i < pp.size(); ++i) {
    CHECK(pp[i].weight == pm[i].weight);
    CHECK(pp[i].bias == pm[i].bias);
  }
}

TEST_CASE("non-finite loss is a training error") {
  const QNetwork net(TinyDqn(1, 2));
  ParamSet params = net.InitParams(1);
  Transition t = Make(0.5, 0, std::nan(""));
  t.terminal = true;
  std::vector<const Transition*> batch = {&t};
  QLearningConfig config;
  AdaGradState opt = AdaGradState::For(params, config.learning_rate);
  CHECK_THROWS_AS(TdUpdate(net, params, params, batch, config, opt),
                  TrainingError);
  std::vector<const Transition*> none;
  CHECK_THROWS_AS(TdUpdate(net, params, params, none, config, opt), UsageError);
}

TEST_CASE("epsilon greedy") {
  Rng rng(17);
  const std::vector<double> q = {0.1, 0.9, 0.3};
  CHECK(ActEpsilonGreedy(q, 0.0, rng) == 1);
  const std::vector<double> tie = {1.0, 1.0};
  CHECK(ActEpsilonGreedy(tie, 0.0, rng) == 0);
  CHECK_THROWS_AS(ActEpsilonGreedy(std::vector<double>{}, 0.0, rng),
                  UsageError);

  const int n = 10000;
  std::vector<int> counts(5, 0);
  const std::vector<double> five = {5, 4, 3, 2, 1};
  for (int i = 0; i < n; ++i) ++counts[ActEpsilonGreedy(five, 1.0, rng)];
  for (int c : counts) {
    CHECK(std::abs(c / double(n) - 0.2) <= ThreeSigma(0.2, n));
  }
}

TEST_CASE("target copies are frozen") {
  const QNetwork net(TinyDqn(2, 2));
  ParamSet live = net.InitParams(3);
  const ParamSet first = SyncTarget(live);
  const ParamSet second = SyncTarget(live);
  for (int i = 0; i < live.size(); ++i) CHECK(first[i].weight == second[i].weight);

  Transition t;
  t.state = {0.2, 0.8};
  t.next_state = t.state;
  t.action = 1;
  t.reward = 1.0;
  std::vector<const Transition*> batch = {&t};
  const Vector before = QTargets(net, first, batch, 0.9);
  QLearningConfig config;
  config.learning_rate = 0.05;
  AdaGradState opt = AdaGradState::For(live, config.learning_rate);
  // K = 0 updates: a fresh sync gives the same targets.
  CHECK(QTargets(net, SyncTarget(live), batch, 0.9)[0] == before[0]);
  for (int k = 0; k < 3; ++k) TdUpdate(net, live, first, batch, config, opt);
  CHECK(QTargets(net, first, batch, 0.9)[0] == before[0]);
  CHECK(QTargets(net, SyncTarget(live), batch, 0.9)[0] != before[0]);
}

}  // namespace
}  // namespace dron
