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

#include "dron/quizbowl.h"

#include <algorithm>
#include <cmath>
#include <ostream>

namespace dron::quiz {
namespace {

Vector LogSoftmax(const Vector& logits) {
  const double m = logits.maxCoeff();
  const double lse = m + std::log((logits.array() - m).exp().sum());
  return (logits.array() - lse).matrix();
}

Vector DrawBelief(int t, int length, int answer, const QuizConfig& config,
                  Rng& rng) {
  Vector logits(config.vocab);
  for (int i = 0; i < config.vocab; ++i) logits[i] = StandardNormal(rng);
  logits[answer] +=
      config.alpha * std::pow(static_cast<double>(t) / length, config.kappa);
  return LogSoftmax(logits);
}

}  // namespace

void QuizConfig::Validate() const {
  if (vocab < 2) throw ConfigError("quiz vocabulary needs at least 2 answers");
  if (min_length < 1 || max_length < min_length) {
    throw ConfigError("quiz question length range is invalid");
  }
  if (alpha < 0.0 || kappa <= 0.0) {
    throw ConfigError("belief sharpening needs alpha >= 0 and kappa > 0");
  }
}

double OpponentProfile::HistoricalMeanFraction() const {
  return answered > 0 ? buzz_fraction_sum / answered : 0.5;
}

double OpponentProfile::HistoricalErrorRate() const {
  return answered > 0 ? static_cast<double>(errors) / answered : 0.5;
}

void OpponentProfile::RecordBuzz(double fraction, bool correct) {
  ++answered;
  buzz_fraction_sum += fraction;
  if (!correct) ++errors;
}

bool Population::IsPreset(const std::string& preset) {
  return preset == "mixed" || preset == "type1" || preset == "type2" ||
         preset == "type3" || preset == "type4";
}

Population Population::Preset(const std::string& preset, std::uint64_t seed,
                              int players_per_type) {
  if (!IsPreset(preset)) {
    throw ConfigError("unknown opponent population '" + preset + "'");
  }
  if (players_per_type < 1) throw ConfigError("population needs players");
  std::array<double, kNumTypes> weights{};
  if (preset == "mixed") {
    weights = kMixtureWeights;
  } else {
    weights[preset.back() - '1'] = 1.0;
  }
  Rng rng(seed);
  std::vector<OpponentProfile> players;
  for (int b = 0; b < kNumTypes; ++b) {
    if (weights[b] == 0.0) continue;
    const double lo = 0.25 * b + 0.01;
    const double hi = 0.25 * (b + 1) - 0.01;
    for (int i = 0; i < players_per_type; ++i) {
      OpponentProfile p;
      p.bucket = b;
      p.mean_fraction = std::clamp(
          kTypeMeanFraction[b] + 0.16 * (Uniform01(rng) - 0.5), lo, hi);
      p.spread = 0.05;
      p.accuracy = std::clamp(
          kTypeAccuracy[b] + 0.1 * (Uniform01(rng) - 0.5), 0.0, 1.0);
      const int history = 5 + UniformInt(rng, 56);
      for (int g = 0; g < history; ++g) {
        const double frac = std::clamp(
            p.mean_fraction + p.spread * StandardNormal(rng), 0.01, 1.0);
        p.RecordBuzz(frac, Uniform01(rng) < p.accuracy);
      }
      players.push_back(p);
    }
  }
  return Population(std::move(players), weights);
}

Population::Population(std::vector<OpponentProfile> players,
                       std::array<double, kNumTypes> weights)
    : players_(std::move(players)), weights_(weights) {
  if (players_.empty()) throw ConfigError("opponent population is empty");
  for (int i = 0; i < size(); ++i) {
    const OpponentProfile& p = players_[i];
    if (!(p.mean_fraction > 0.0 && p.mean_fraction <= 1.0) ||
        p.accuracy < 0.0 || p.accuracy > 1.0 || p.bucket < 0 ||
        p.bucket >= kNumTypes) {
      throw ConfigError("invalid opponent profile " + std::to_string(i));
    }
    by_bucket_[p.bucket].push_back(i);
  }
  for (int b = 0; b < kNumTypes; ++b) {
    if (by_bucket_[b].empty()) weights_[b] = 0.0;
  }
}

int Population::Draw(Rng& rng) const {
  double total = 0.0;
  for (double w : weights_) total += w;
  if (total <= 0.0) throw ConfigError("population has no weighted players");
  double u = Uniform01(rng) * total;
  int bucket = kNumTypes - 1;
  for (int b = 0; b < kNumTypes; ++b) {
    if (weights_[b] == 0.0) continue;
    if (u < weights_[b]) {
      bucket = b;
      break;
    }
    u -= weights_[b];
  }
  while (by_bucket_[bucket].empty()) --bucket;
  const auto& members = by_bucket_[bucket];
  return members[UniformInt(rng, static_cast<int>(members.size()))];
}

int QuizState::Guess() const {
  Eigen::Index best = 0;
  belief.maxCoeff(&best);
  return static_cast<int>(best);
}

EpisodeStart SampleEpisode(const QuizConfig& config,
                           const Population& population, Rng& rng) {
  EpisodeStart ep;
  QuizState& s = ep.state;
  s.length = config.min_length +
             UniformInt(rng, config.max_length - config.min_length + 1);
  s.answer = UniformInt(rng, config.vocab);
  ep.opponent = population.Draw(rng);
  const OpponentProfile& p = population[ep.opponent];
  const double z = StandardNormal(rng);
  const double pos = std::round(s.length * (p.mean_fraction + p.spread * z));
  s.opponent_buzz_position =
      static_cast<int>(std::clamp(pos, 1.0, static_cast<double>(s.length)));
  s.opponent_accuracy = p.accuracy;
  s.t = 0;
  s.prev_belief = Vector::Constant(config.vocab, -std::log(config.vocab));
  s.belief = DrawBelief(0, s.length, s.answer, config, rng);
  return ep;
}

void AdvanceBelief(QuizState& state, const QuizConfig& config, Rng& rng) {
  if (state.done) throw UsageError("advance on a finished quiz episode");
  if (state.t >= state.length) {
    throw UsageError("question already fully revealed");
  }
  state.prev_belief = state.belief;
  ++state.t;
  state.belief = DrawBelief(state.t, state.length, state.answer, config, rng);
}

QuizStepResult Step(QuizState& state, int agent_action,
                    const QuizConfig& config, Rng& rng) {
  if (state.done) throw UsageError("step on a finished quiz episode");
  if (agent_action != kBuzz && agent_action != kWait) {
    throw UsageError("quiz action must be buzz or wait");
  }
  QuizStepResult result;
  if (agent_action == kBuzz && !state.agent_locked) {
    BuzzOutcome b{Buzzer::kAgent, state.GuessCorrect(), state.t, 0.0};
    if (b.correct) {
      b.reward = config.reward_correct;
      state.done = true;
    } else {
      b.reward = config.reward_wrong;
      state.agent_locked = true;
    }
    result.reward += b.reward;
    result.buzzes.push_back(b);
  }
  if (!state.done && !state.opponent_locked &&
      state.t == state.opponent_buzz_position) {
    BuzzOutcome b{Buzzer::kOpponent, Uniform01(rng) < state.opponent_accuracy,
                  state.t, 0.0};
    if (b.correct) {
      b.reward = config.reward_opponent_correct;
      state.done = true;
    } else {
      state.opponent_locked = true;
    }
    result.reward += b.reward;
    result.buzzes.push_back(b);
  }
  if (!state.done) {
    if (state.t >= state.length) {
      result.reward += config.reward_nobody;
      state.done = true;
    } else {
      AdvanceBelief(state, config, rng);
    }
  }
  result.done = state.done;
  return result;
}

std::vector<double> Featurize(const QuizState& state) {
  const int v = static_cast<int>(state.belief.size());
  std::vector<double> f(2 * v + 2);
  for (int i = 0; i < v; ++i) {
    f[i] = state.belief[i];
    f[v + i] = state.prev_belief[i];
  }
  f[2 * v] = static_cast<double>(state.t) / state.length;
  f[2 * v + 1] = state.agent_locked ? 1.0 : 0.0;
  return f;
}

std::vector<double> OpponentFeatures(const OpponentProfile& profile) {
  return {std::log1p(static_cast<double>(profile.answered)) / 10.0,
          profile.HistoricalMeanFraction(), profile.HistoricalErrorRate()};
}

int OpponentType(const OpponentProfile& profile) {
  const double f = profile.HistoricalMeanFraction();
  if (f <= 0.25) return 1;
  if (f <= 0.50) return 2;
  if (f <= 0.75) return 3;
  return 4;
}

double ActionSupervisionTarget(int t, int buzz_position) {
  if (buzz_position < 1) throw UsageError("buzz position must be >= 1");
  return std::min(1.0, static_cast<double>(t) / buzz_position);
}

double DqnSelfReward(bool buzz, bool prediction_correct,
                     const QuizConfig& config) {
  if (prediction_correct) {
    return buzz ? config.self_buzz_correct : config.self_wait_correct;
  }
  return buzz ? config.self_buzz_wrong : config.self_wait_wrong;
}

void EpisodeTrace::Record(const QuizState& before,
                          const QuizStepResult& result) {
  if (complete) throw UsageError("trace already complete");
  if (steps.empty()) {
    length = before.length;
    opponent_buzz_position = before.opponent_buzz_position;
  }
  TraceStep s;
  s.t = before.t;
  s.agent_locked_before = before.agent_locked;
  s.guess_correct = before.GuessCorrect();
  for (const BuzzOutcome& b : result.buzzes) {
    if (b.who == Buzzer::kAgent) {
      s.agent_buzzed = true;
      s.agent_correct = b.correct;
    } else {
      s.opponent_buzzed = true;
      s.opponent_correct = b.correct;
    }
  }
  s.reward = result.reward;
  steps.push_back(s);
  complete = result.done;
}

EpisodeScore ScoreEpisode(const EpisodeTrace& trace) {
  if (!trace.complete) throw UsageError("cannot score an incomplete episode");
  EpisodeScore score;
  bool agent_correct = false;
  bool had_chance = false;
  for (const TraceStep& s : trace.steps) {
    score.reward += s.reward;
    if (s.agent_buzzed && !s.agent_correct) score.rush = true;
    if (s.agent_buzzed && s.agent_correct) agent_correct = true;
    if (!s.agent_locked_before && s.guess_correct && !s.agent_buzzed) {
      had_chance = true;
    }
  }
  score.miss = !agent_correct && had_chance;
  return score;
}

void WriteTraceCsvHeader(std::ostream& out) {
  out << "episode,t,length,agent_buzz,agent_correct,guess_correct,"
         "opponent_buzz,opponent_correct,reward\n";
}

void WriteTraceCsv(std::ostream& out, int episode, const EpisodeTrace& trace) {
  for (const TraceStep& s : trace.steps) {
    out << episode << ',' << s.t << ',' << trace.length << ','
        << s.agent_buzzed << ',' << s.agent_correct << ',' << s.guess_correct
        << ',' << s.opponent_buzzed << ',' << s.opponent_correct << ','
        << s.reward << '\n';
  }
}

}  // namespace dron::quiz
