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

#ifndef DRON_QUIZBOWL_H_
#define DRON_QUIZBOWL_H_

// Synthetic incremental question answering ("quiz bowl") buzzing game.
//
// A question of L words is revealed one word at a time. After t words the
// content model's belief over V answers is
//   logits_i = noise_i + [i == answer] * alpha * (t / L)^kappa
//   belief   = log_softmax(logits)
// so the argmax starts at chance and sharpens toward the end. At each
// word the agent may buzz (answer with the argmax) or wait; the opponent
// buzzes at a fixed hidden word drawn from its profile.

#include <array>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "dron/common.h"
#include "dron/nn.h"

namespace dron::quiz {

enum Action : int { kBuzz = 0, kWait = 1 };
inline constexpr int kNumActions = 2;

struct QuizConfig {
  int vocab = 50;
  int min_length = 60;
  int max_length = 120;
  double alpha = 8.0;
  double kappa = 1.0;

  double reward_correct = 10.0;
  double reward_wrong = -5.0;
  double reward_opponent_correct = -10.0;
  double reward_nobody = 0.0;

  // Shaped rewards for the opponent-agnostic baseline.
  double self_buzz_correct = 10.0;
  double self_wait_correct = -10.0;
  double self_buzz_wrong = -15.0;
  double self_wait_wrong = 15.0;

  void Validate() const;
};

// One human-like opponent. mean_fraction/spread/accuracy are ground truth
// used by the simulator; the historical fields are what an agent observes.
struct OpponentProfile {
  double mean_fraction = 0.5;  // mu
  double spread = 0.05;        // sigma
  double accuracy = 0.8;       // rho
  int bucket = 0;              // preset bucket the player was drawn from

  int answered = 0;  // observed buzzes
  double buzz_fraction_sum = 0.0;
  int errors = 0;

  double HistoricalMeanFraction() const;
  double HistoricalErrorRate() const;
  void RecordBuzz(double fraction, bool correct);
};

inline constexpr int kNumTypes = 4;

// Bucket presets: mean buzz fractions and accuracies per opponent type and
// the mixture weights of the "mixed" population.
inline constexpr std::array<double, kNumTypes> kTypeMeanFraction = {0.15, 0.38,
                                                                    0.62, 0.88};
inline constexpr std::array<double, kNumTypes> kTypeAccuracy = {0.6, 0.8, 0.85,
                                                                0.9};
inline constexpr std::array<double, kNumTypes> kMixtureWeights = {4.8, 18.0,
                                                                  0.7, 1.3};

class Population {
 public:
  // preset: "mixed", "type1".."type4". Players get jittered profiles and a
  // pre-seeded play history drawn from their profile.
  static Population Preset(const std::string& preset, std::uint64_t seed,
                           int players_per_type = 20);
  static bool IsPreset(const std::string& preset);

  explicit Population(std::vector<OpponentProfile> players,
                      std::array<double, kNumTypes> weights = {1, 1, 1, 1});

  // Bucket by weight, then a uniform player within the bucket.
  int Draw(Rng& rng) const;

  int size() const { return static_cast<int>(players_.size()); }
  OpponentProfile& operator[](int i) { return players_[i]; }
  const OpponentProfile& operator[](int i) const { return players_[i]; }

 private:
  std::vector<OpponentProfile> players_;
  std::array<double, kNumTypes> weights_;
  std::array<std::vector<int>, kNumTypes> by_bucket_;
};

struct QuizState {
  int t = 0;  // words revealed
  int length = 0;
  int answer = 0;
  Vector belief;       // log probabilities after t words
  Vector prev_belief;  // after t-1 words; uniform at t = 0
  bool agent_locked = false;
  bool opponent_locked = false;
  int opponent_buzz_position = 1;  // hidden from the agent
  double opponent_accuracy = 0.8;  // hidden from the agent
  bool done = false;

  int Guess() const;
  bool GuessCorrect() const { return Guess() == answer; }
};

struct EpisodeStart {
  QuizState state;
  int opponent = 0;  // index into the population
};

EpisodeStart SampleEpisode(const QuizConfig& config,
                           const Population& population, Rng& rng);

// Reveals one more word. Throws UsageError at t == L or when done.
void AdvanceBelief(QuizState& state, const QuizConfig& config, Rng& rng);

enum class Buzzer { kAgent, kOpponent };

struct BuzzOutcome {
  Buzzer who = Buzzer::kAgent;
  bool correct = false;
  int step = 0;
  double reward = 0.0;  // to the agent
};

struct QuizStepResult {
  double reward = 0.0;
  bool done = false;
  // Buzzes resolved during this step, agent first.
  std::vector<BuzzOutcome> buzzes;
};

// Agent buzz, then the opponent's buzz at its position, then the next word;
// the episode ends on a correct buzz or once the final word has been played.
QuizStepResult Step(QuizState& state, int agent_action,
                    const QuizConfig& config, Rng& rng);

inline int StateFeatureSize(const QuizConfig& config) {
  return 2 * config.vocab + 2;
}
inline constexpr int kOpponentFeatures = 3;

// [belief; previous belief; t/L; wrong-buzz flag].
std::vector<double> Featurize(const QuizState& state);
// [log(1 + answered)/10; mean buzz fraction; error rate], priors 0.5.
std::vector<double> OpponentFeatures(const OpponentProfile& profile);
// 1..4: quartile of the historical mean buzz fraction, boundaries to the
// lower class.
int OpponentType(const OpponentProfile& profile);
// min(1, t / buzz_position).
double ActionSupervisionTarget(int t, int buzz_position);
double DqnSelfReward(bool buzz, bool prediction_correct,
                     const QuizConfig& config = {});

struct TraceStep {
  int t = 0;
  bool agent_locked_before = false;
  bool agent_buzzed = false;
  bool agent_correct = false;
  bool guess_correct = false;
  bool opponent_buzzed = false;
  bool opponent_correct = false;
  double reward = 0.0;
};

struct EpisodeTrace {
  int length = 0;
  int opponent_buzz_position = 0;
  std::vector<TraceStep> steps;
  bool complete = false;

  void Record(const QuizState& before, const QuizStepResult& result);
};

struct EpisodeScore {
  double reward = 0.0;
  bool rush = false;
  bool miss = false;
};

EpisodeScore ScoreEpisode(const EpisodeTrace& trace);

// CSV with header
// "episode,t,length,agent_buzz,agent_correct,guess_correct,opponent_buzz,opponent_correct,reward".
void WriteTraceCsvHeader(std::ostream& out);
void WriteTraceCsv(std::ostream& out, int episode, const EpisodeTrace& trace);

}  // namespace dron::quiz

#endif  // DRON_QUIZBOWL_H_
