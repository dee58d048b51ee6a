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
#include <sstream>
#include <vector>

#include "dron/common.h"
#include "dron/quizbowl.h"

namespace dron::quiz {
namespace {

using doctest::Approx;

double ThreeSigma(double p, int n) { return 3.0 * std::sqrt(p * (1 - p) / n); }

OpponentProfile Profile(double mu, double sigma, double rho) {
  OpponentProfile p;
  p.mean_fraction = mu;
  p.spread = sigma;
  p.accuracy = rho;
  return p;
}

QuizConfig FixedLength(int length) {
  QuizConfig c;
  c.min_length = length;
  c.max_length = length;
  return c;
}

// A state whose belief argmax is `guess`.
QuizState Handmade(const QuizConfig& config, int answer, int guess, int t,
                   int opponent_position) {
  QuizState s;
  s.length = config.max_length;
  s.answer = answer;
  s.t = t;
  s.belief = Vector::Constant(config.vocab, -10.0);
  s.belief[guess] = -0.001;
  s.prev_belief = s.belief;
  s.opponent_buzz_position = opponent_position;
  s.opponent_accuracy = 1.0;
  return s;
}

TEST_CASE("episode sampling") {
  const QuizConfig config;
  const Population pop = Population::Preset("mixed", 3);
  Rng r1(5), r2(5);
  const EpisodeStart a = SampleEpisode(config, pop, r1);
  const EpisodeStart b = SampleEpisode(config, pop, r2);
  CHECK(a.state.answer == b.state.answer);
  CHECK(a.state.length == b.state.length);
  CHECK(a.state.opponent_buzz_position == b.state.opponent_buzz_position);
  CHECK(a.state.belief == b.state.belief);
  CHECK(a.opponent == b.opponent);

  Rng rng(6);
  for (int i = 0; i < 2000; ++i) {
    const EpisodeStart e = SampleEpisode(config, pop, rng);
    CHECK(e.state.length >= config.min_length);
    CHECK(e.state.length <= config.max_length);
    CHECK(e.state.opponent_buzz_position >= 1);
    CHECK(e.state.opponent_buzz_position <= e.state.length);
  }

  const Population fixed({Profile(0.5, 0.0, 0.8)});
  for (int i = 0; i < 20; ++i) {
    CHECK(SampleEpisode(FixedLength(100), fixed, rng)
              .state.opponent_buzz_position == 50);
  }
}

TEST_CASE("belief sharpens as words arrive") {
  QuizConfig config = FixedLength(100);
  const Population pop({Profile(0.99, 0.0, 0.8)});
  const int n = 10000;
  const int checkpoints = 11;
  std::vector<double> prob(checkpoints, 0.0);
  std::vector<int> correct(checkpoints, 0);
  Rng rng(7);
  for (int i = 0; i < n; ++i) {
    EpisodeStart e = SampleEpisode(config, pop, rng);
    QuizState& s = e.state;
    for (int t = 0;; ++t) {
      CHECK(s.belief.array().exp().sum() == Approx(1.0));
      if (t % 10 == 0) {
        prob[t / 10] += std::exp(s.belief[s.answer]) / n;
        correct[t / 10] += s.GuessCorrect();
      }
      if (t == s.length) break;
      AdvanceBelief(s, config, rng);
    }
    CHECK_THROWS_AS(AdvanceBelief(s, config, rng), UsageError);
  }
  const double chance = 1.0 / config.vocab;
  CHECK(std::abs(correct[0] / double(n) - chance) <= ThreeSigma(chance, n));
  for (int k = 1; k < checkpoints; ++k) CHECK(prob[k] >= prob[k - 1] - 0.02);

  config.alpha = 10.0;
  config.kappa = 1.0;
  int hits = 0;
  for (int i = 0; i < n; ++i) {
    EpisodeStart e = SampleEpisode(config, pop, rng);
    while (e.state.t < e.state.length) AdvanceBelief(e.state, config, rng);
    hits += e.state.GuessCorrect();
  }
  CHECK(hits / double(n) >= 0.9);
}

TEST_CASE("step rules") {
  const QuizConfig config = FixedLength(100);
  Rng rng(8);

  QuizState right = Handmade(config, 4, 4, 10, 60);
  const QuizStepResult r1 = Step(right, kBuzz, config, rng);
  CHECK(r1.reward == 10.0);
  CHECK(r1.done);
  CHECK_THROWS_AS(Step(right, kWait, config, rng), UsageError);

  QuizState wrong = Handmade(config, 4, 7, 10, 60);
  const QuizStepResult r2 = Step(wrong, kBuzz, config, rng);
  CHECK(r2.reward == -5.0);
  CHECK_FALSE(r2.done);
  CHECK(wrong.agent_locked);
  CHECK(wrong.t == 11);
  // Locked players cannot buzz again.
  const QuizStepResult r2b = Step(wrong, kBuzz, config, rng);
  CHECK(r2b.buzzes.empty());
  CHECK(r2b.reward == 0.0);

  QuizState beaten = Handmade(config, 4, 7, 30, 30);
  const QuizStepResult r3 = Step(beaten, kWait, config, rng);
  CHECK(r3.reward == -10.0);
  CHECK(r3.done);

  QuizState exhausted = Handmade(config, 4, 7, 100, 50);
  exhausted.agent_locked = true;
  exhausted.opponent_locked = true;
  const QuizStepResult r4 = Step(exhausted, kWait, config, rng);
  CHECK(r4.done);
  CHECK(r4.reward == 0.0);
}

TEST_CASE("random play respects reward and length bounds") {
  const QuizConfig config;
  const Population pop = Population::Preset("mixed", 9);
  Rng rng(10);
  for (int game = 0; game < 3000; ++game) {
    EpisodeStart e = SampleEpisode(config, pop, rng);
    QuizState& s = e.state;
    double total = 0.0;
    int decisions = 0;
    int correct_buzzes = 0;
    while (!s.done) {
      const bool locked = s.agent_locked;
      const int action = Uniform01(rng) < 0.03 ? kBuzz : kWait;
      const QuizStepResult r = Step(s, action, config, rng);
      ++decisions;
      total += r.reward;
      for (const BuzzOutcome& b : r.buzzes) {
        CHECK((b.reward == 10.0 || b.reward == -5.0 || b.reward == -10.0 ||
               b.reward == 0.0));
        if (b.who == Buzzer::kAgent) CHECK_FALSE(locked);
        if (b.correct) ++correct_buzzes;
      }
    }
    CHECK(correct_buzzes <= 1);
    CHECK(total >= -15.0);
    CHECK(total <= 10.0);
    CHECK(decisions <= s.length + 1);
  }
}

TEST_CASE("state features") {
  const QuizConfig config = FixedLength(100);
  const Population pop({Profile(0.9, 0.0, 0.8)});
  Rng rng(11);
  EpisodeStart e = SampleEpisode(config, pop, rng);
  QuizState& s = e.state;
  auto f = Featurize(s);
  REQUIRE(f.size() == 102);
  REQUIRE(StateFeatureSize(config) == 102);
  for (int i = 0; i < 50; ++i) CHECK(f[50 + i] == Approx(-std::log(50.0)));
  CHECK(f[100] == 0.0);
  CHECK(f[101] == 0.0);

  // Force a wrong buzz.
  s.belief.setConstant(-10.0);
  s.belief[(s.answer + 1) % 50] = -0.001;
  Step(s, kWait, config, rng);
  CHECK(Featurize(s)[101] == 0.0);
  s.belief.setConstant(-10.0);
  s.belief[(s.answer + 1) % 50] = -0.001;
  Step(s, kBuzz, config, rng);
  f = Featurize(s);
  CHECK(f[101] == 1.0);
  CHECK(f[100] == Approx(2.0 / 100));
}

TEST_CASE("opponent features and types") {
  const OpponentProfile fresh;
  CHECK(OpponentFeatures(fresh) == std::vector<double>{0.0, 0.5, 0.5});

  OpponentProfile a, b;
  for (int i = 0; i < 7; ++i) {
    a.RecordBuzz(0.1 * i, i % 3 != 0);
    b.RecordBuzz(0.1 * i, i % 3 != 0);
  }
  CHECK(OpponentFeatures(a) == OpponentFeatures(b));
  const auto f = OpponentFeatures(a);
  CHECK(f[0] == Approx(std::log(8.0) / 10));
  CHECK(f[2] >= 0.0);
  CHECK(f[2] <= 1.0);

  auto typed = [](double fraction) {
    OpponentProfile p;
    p.RecordBuzz(fraction, true);
    return OpponentType(p);
  };
  CHECK(typed(0.10) == 1);
  CHECK(typed(0.25) == 1);
  CHECK(typed(0.30) == 2);
  CHECK(typed(0.90) == 4);
}

TEST_CASE("supervision target and shaped rewards") {
  CHECK(ActionSupervisionTarget(40, 40) == 1.0);
  CHECK(ActionSupervisionTarget(20, 40) == Approx(0.5));
  CHECK(ActionSupervisionTarget(70, 40) == 1.0);
  CHECK_THROWS_AS(ActionSupervisionTarget(3, 0), UsageError);

  CHECK(DqnSelfReward(true, true) == 10.0);
  CHECK(DqnSelfReward(false, true) == -10.0);
  CHECK(DqnSelfReward(true, false) == -15.0);
  CHECK(DqnSelfReward(false, false) == 15.0);
}

EpisodeTrace Trace(int last_t, int correct_from) {
  EpisodeTrace trace;
  trace.length = 100;
  for (int t = 0; t <= last_t; ++t) {
    TraceStep s;
    s.t = t;
    s.guess_correct = correct_from >= 0 && t >= correct_from;
    trace.steps.push_back(s);
  }
  trace.complete = true;
  return trace;
}

TEST_CASE("episode scoring") {
  EpisodeTrace quick = Trace(5, 5);
  quick.steps.back().agent_buzzed = true;
  quick.steps.back().agent_correct = true;
  quick.steps.back().reward = 10.0;
  EpisodeScore s = ScoreEpisode(quick);
  CHECK(s.reward == 10.0);
  CHECK_FALSE(s.rush);
  CHECK_FALSE(s.miss);

  EpisodeTrace rushed = Trace(3, -1);
  rushed.steps.back().agent_buzzed = true;
  rushed.steps.back().reward = -5.0;
  rushed.complete = false;
  CHECK_THROWS_AS(ScoreEpisode(rushed), UsageError);
  rushed.complete = true;
  CHECK(ScoreEpisode(rushed).rush);

  EpisodeTrace missed = Trace(40, 10);
  missed.steps.back().opponent_buzzed = true;
  missed.steps.back().opponent_correct = true;
  missed.steps.back().reward = -10.0;
  s = ScoreEpisode(missed);
  CHECK(s.miss);
  CHECK_FALSE(s.rush);
  CHECK(s.reward == -10.0);
}

TEST_CASE("trace csv") {
  const QuizConfig config = FixedLength(60);
  const Population pop({Profile(0.5, 0.0, 1.0)});
  Rng rng(12);
  EpisodeStart e = SampleEpisode(config, pop, rng);
  EpisodeTrace trace;
  while (!e.state.done) {
    const QuizState before = e.state;
    trace.Record(before, Step(e.state, kWait, config, rng));
  }
  CHECK(trace.complete);
  CHECK(trace.steps.size() == 31);
  std::ostringstream out;
  WriteTraceCsvHeader(out);
  WriteTraceCsv(out, 0, trace);
  const std::string csv = out.str();
  CHECK(csv.rfind("episode,t,length,", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 32);
}

TEST_CASE("population presets") {
  CHECK(Population::IsPreset("type4"));
  CHECK_FALSE(Population::IsPreset("type5"));
  CHECK_THROWS_AS(Population::Preset("nobody", 1), ConfigError);
  const Population late = Population::Preset("type4", 1);
  Rng rng(13);
  for (int i = 0; i < 200; ++i) {
    const OpponentProfile& p = late[late.Draw(rng)];
    CHECK(p.bucket == 3);
    CHECK(OpponentType(p) == 4);
  }
}

}  // namespace
}  // namespace dron::quiz
