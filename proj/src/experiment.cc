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

#include "dron/experiment.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "dron/rl.h"
#include "dron/stats.h"

namespace dron {
namespace {

// Stream indices under the run seed.
constexpr std::uint64_t kInitStream = 1;
constexpr std::uint64_t kLearnerStream = 2;
constexpr std::uint64_t kEnvStream = 3;
constexpr std::uint64_t kEvalStream = 1000;

// Every update allocates and frees the same few hundred KB of temporaries.
// glibc's defaults hand those back to the kernel each time, which costs more
// than the arithmetic; keep them in the heap instead.
void TuneAllocator() {
#if defined(__GLIBC__)
  static std::once_flag once;
  std::call_once(once, [] {
    mallopt(M_MMAP_THRESHOLD, 64 << 20);
    mallopt(M_TRIM_THRESHOLD, 256 << 20);
    mallopt(M_TOP_PAD, 64 << 20);
  });
#endif
}

bool NeedsOpponentFeatures(const AgentSpec& spec) {
  return spec.uses_opponent() || spec.multitask != Multitask::kNone;
}

soccer::ModePolicy SoccerPolicy(const std::string& opponent) {
  if (opponent == "mixed") return soccer::ModePolicy::kMixed;
  if (opponent == "offensive") return soccer::ModePolicy::kOffensiveOnly;
  if (opponent == "defensive") return soccer::ModePolicy::kDefensiveOnly;
  throw ConfigError("unknown soccer opponent '" + opponent +
                    "' (mixed, offensive, defensive)");
}

// Replay, target network and optimizer around one QNetwork.
class Learner {
 public:
  Learner(const ExperimentConfig& config, std::uint64_t seed)
      : config_(config),
        net_(config.agent),
        params_(net_.InitParams(MixSeed(seed, kInitStream))),
        target_(SyncTarget(params_)),
        optimizer_(AdaGradState::For(params_, config.q.learning_rate,
                                     config.q.gradient_clip)),
        replay_(config.replay_capacity),
        rng_(MixSeed(seed, kLearnerStream)) {}

  int Act(const std::vector<double>& state,
          const std::vector<double>& opponent) {
    const Vector q = net_.Q(params_, state, opponent);
    return ActEpsilonGreedy(std::span<const double>(q.data(), q.size()),
                            EpsilonAt(config_.epsilon, steps_), rng_);
  }

  void Observe(Transition t) {
    replay_.Push(std::move(t));
    ++steps_;
    if (static_cast<std::int64_t>(replay_.size()) < config_.learning_starts) {
      return;
    }
    const auto batch = replay_.Sample(config_.q.batch_size, rng_);
    const TdStats stats =
        TdUpdate(net_, params_, target_, batch, config_.q, optimizer_);
    loss_sum_ += stats.loss;
    ++loss_count_;
    if (++updates_ % config_.q.target_sync_period == 0) {
      target_ = SyncTarget(params_);
    }
  }

  double TakeMeanLoss() {
    const double m = loss_count_ ? loss_sum_ / loss_count_ : 0.0;
    loss_sum_ = 0.0;
    loss_count_ = 0;
    return m;
  }

  const QNetwork& net() const { return net_; }
  const ParamSet& params() const { return params_; }
  std::int64_t steps() const { return steps_; }
  double epsilon() const { return EpsilonAt(config_.epsilon, steps_); }
  const Rng& rng() const { return rng_; }

 private:
  const ExperimentConfig& config_;
  QNetwork net_;
  ParamSet params_;
  ParamSet target_;
  AdaGradState optimizer_;
  ReplayBuffer replay_;
  Rng rng_;
  std::int64_t steps_ = 0;
  std::int64_t updates_ = 0;
  double loss_sum_ = 0.0;
  std::int64_t loss_count_ = 0;
};

int Greedy(const QNetwork& net, const ParamSet& params,
           const std::vector<double>& state,
           const std::vector<double>& opponent) {
  const Vector q = net.Q(params, state, opponent);
  return Argmax(std::span<const double>(q.data(), q.size()));
}

// Per-game results folded into a summary in game order.
struct Tally {
  double reward = 0.0;
  int wins = 0, ties = 0, losses = 0, rushes = 0, misses = 0;
  std::int64_t length = 0;
  int games = 0;

  void Add(double r, std::int64_t len, bool rush, bool miss) {
    reward += r;
    wins += r > 0;
    ties += r == 0;
    losses += r < 0;
    rushes += rush;
    misses += miss;
    length += len;
    ++games;
  }

  MetricsSummary Summary() const {
    MetricsSummary m;
    const double n = games;
    m.games = games;
    m.mean_reward = reward / n;
    m.win = wins / n;
    m.tie = ties / n;
    m.loss = losses / n;
    m.rush = rushes / n;
    m.miss = misses / n;
    m.mean_length = length / n;
    m.max_reward = m.mean_r = m.mean_reward;
    m.epoch_rewards = {m.mean_reward};
    return m;
  }
};

// ---- soccer ----

class SoccerRunner {
 public:
  SoccerRunner(const ExperimentConfig& config, std::uint64_t seed)
      : config_(config),
        policy_(SoccerPolicy(config.opponent)),
        rng_(MixSeed(seed, kEnvStream)),
        opponent_features_(NeedsOpponentFeatures(config.agent)) {}

  void Step(Learner& learner) {
    using namespace soccer;
    if (!active_) {
      episode_ = Reset(config_.soccer, rng_, policy_);
      stats_ = {};
      active_ = true;
    }
    const SoccerState& s = episode_.state;
    Transition t;
    t.state = FeaturizeState(s, config_.soccer, Player::kA);
    if (opponent_features_) t.opponent = OpponentFeatures(stats_);
    t.action = learner.Act(t.state, t.opponent);
    const int b = RuleAgentAct(s, episode_.mode, rng_, config_.soccer);
    const StepResult r = soccer::Step(config_.soccer, s, t.action, b);
    const MoveCategory cat = ClassifyMove(s, r.events.effective_action_b,
                                          config_.soccer, Player::kB);
    stats_.Observe(cat, r.events.effective_action_b,
                   r.events.ball_lost && s.owner == Player::kA);
    switch (config_.agent.multitask) {
      case Multitask::kType:
        t.supervision = static_cast<double>(episode_.mode);
        break;
      case Multitask::kAction:
        t.supervision = static_cast<double>(cat);
        break;
      case Multitask::kNone:
        break;
    }
    t.reward = r.reward_a;
    t.terminal = r.done;
    t.next_state = FeaturizeState(r.state, config_.soccer, Player::kA);
    if (opponent_features_) t.next_opponent = OpponentFeatures(stats_);
    episode_.state = r.state;
    active_ = !r.done;
    learner.Observe(std::move(t));
  }

 private:
  const ExperimentConfig& config_;
  soccer::ModePolicy policy_;
  Rng rng_;
  bool opponent_features_;
  bool active_ = false;
  soccer::Episode episode_;
  soccer::OpponentStats stats_;
};

MetricsSummary EvaluateSoccer(const QNetwork& net, const ParamSet& params,
                              const soccer::SoccerConfig& config,
                              const std::string& opponent, int n_games,
                              std::uint64_t seed, std::ostream* render,
                              int render_games) {
  using namespace soccer;
  const ModePolicy policy = SoccerPolicy(opponent);
  const bool features = NeedsOpponentFeatures(net.spec());
  Tally tally;
  for (int g = 0; g < n_games; ++g) {
    Rng rng = DeriveRng(seed, static_cast<std::uint64_t>(g));
    Episode ep = Reset(config, rng, policy);
    OpponentStats stats;
    const bool show = render && g < render_games;
    if (show) {
      *render << "game " << g << " opponent " << ToString(ep.mode) << "\n"
              << Render(ep.state, config) << "\n";
    }
    double reward = 0.0;
    while (!ep.state.done) {
      const auto phi = FeaturizeState(ep.state, config, Player::kA);
      const auto opp = features ? OpponentFeatures(stats) : std::vector<double>{};
      const int a = Greedy(net, params, phi, opp);
      const int b = RuleAgentAct(ep.state, ep.mode, rng, config);
      const StepResult r = soccer::Step(config, ep.state, a, b);
      stats.Observe(ClassifyMove(ep.state, r.events.effective_action_b, config),
                    r.events.effective_action_b,
                    r.events.ball_lost && ep.state.owner == Player::kA);
      reward += r.reward_a;
      ep.state = r.state;
      if (show) *render << Render(ep.state, config) << "\n";
    }
    tally.Add(reward, ep.state.steps, false, false);
  }
  return tally.Summary();
}

// ---- quiz bowl ----

int QuizSupervisionClass(const quiz::OpponentProfile& p) {
  return quiz::OpponentType(p) - 1;
}

void RecordOpponentBuzzes(const quiz::QuizStepResult& r, int length,
                          quiz::OpponentProfile& profile) {
  for (const quiz::BuzzOutcome& b : r.buzzes) {
    if (b.who == quiz::Buzzer::kOpponent) {
      profile.RecordBuzz(static_cast<double>(b.step) / length, b.correct);
    }
  }
}

class QuizRunner {
 public:
  QuizRunner(const ExperimentConfig& config, std::uint64_t seed)
      : config_(config),
        population_(quiz::Population::Preset(config.opponent, kPopulationSeed)),
        rng_(MixSeed(seed, kEnvStream)),
        opponent_features_(NeedsOpponentFeatures(config.agent)) {}

  // One agent decision point. A wrong agent buzz locks the agent out, so the
  // rest of that episode is played out here and folded into the
  // transition, which becomes terminal.
  void Step(Learner& learner) {
    using namespace quiz;
    if (!active_) {
      EpisodeStart start = SampleEpisode(config_.quiz, population_, rng_);
      state_ = std::move(start.state);
      player_ = start.opponent;
      active_ = true;
    }
    OpponentProfile& profile = population_[player_];
    Transition t;
    t.state = Featurize(state_);
    if (opponent_features_) t.opponent = OpponentFeatures(profile);
    t.action = learner.Act(t.state, t.opponent);
    switch (config_.agent.multitask) {
      case Multitask::kType:
        t.supervision = QuizSupervisionClass(profile);
        break;
      case Multitask::kAction:
        t.supervision =
            ActionSupervisionTarget(state_.t, state_.opponent_buzz_position);
        break;
      case Multitask::kNone:
        break;
    }
    const bool guess_correct = state_.GuessCorrect();
    QuizStepResult r = quiz::Step(state_, t.action, config_.quiz, rng_);
    RecordOpponentBuzzes(r, state_.length, profile);
    double reward = r.reward;
    while (!state_.done && state_.agent_locked) {
      r = quiz::Step(state_, kWait, config_.quiz, rng_);
      RecordOpponentBuzzes(r, state_.length, profile);
      reward += r.reward;
    }
    if (config_.self_reward) {
      reward = DqnSelfReward(t.action == kBuzz, guess_correct, config_.quiz);
    }
    t.reward = reward;
    t.terminal = state_.done;
    t.next_state = Featurize(state_);
    if (opponent_features_) t.next_opponent = OpponentFeatures(profile);
    active_ = !state_.done;
    learner.Observe(std::move(t));
  }

 private:
  const ExperimentConfig& config_;
  quiz::Population population_;
  Rng rng_;
  bool opponent_features_;
  bool active_ = false;
  quiz::QuizState state_;
  int player_ = 0;
};

MetricsSummary EvaluateQuiz(const QNetwork& net, const ParamSet& params,
                            const quiz::QuizConfig& config,
                            const std::string& opponent, int n_games,
                            std::uint64_t seed, std::ostream* trace_csv) {
  using namespace quiz;
  if (!Population::IsPreset(opponent)) {
    throw ConfigError("unknown quiz population '" + opponent +
                      "' (mixed, type1..type4)");
  }
  const Population population = Population::Preset(opponent, kPopulationSeed);
  const bool features = NeedsOpponentFeatures(net.spec());
  if (trace_csv) WriteTraceCsvHeader(*trace_csv);
  Tally tally;
  for (int g = 0; g < n_games; ++g) {
    Rng rng = DeriveRng(seed, static_cast<std::uint64_t>(g));
    EpisodeStart start = SampleEpisode(config, population, rng);
    QuizState& s = start.state;
    const auto opp = features ? OpponentFeatures(population[start.opponent])
                              : std::vector<double>{};
    EpisodeTrace trace;
    std::int64_t decisions = 0;
    while (!s.done) {
      int a = kWait;
      if (!s.agent_locked) {
        a = Greedy(net, params, Featurize(s), opp);
        ++decisions;
      }
      const QuizState before = s;
      const QuizStepResult r = quiz::Step(s, a, config, rng);
      trace.Record(before, r);
    }
    const EpisodeScore score = ScoreEpisode(trace);
    if (trace_csv) WriteTraceCsv(*trace_csv, g, trace);
    tally.Add(score.reward, decisions, score.rush, score.miss);
  }
  return tally.Summary();
}

MetricsSummary EvaluateNet(EnvKind env, const QNetwork& net,
                           const ParamSet& params,
                           const soccer::SoccerConfig& soccer_config,
                           const quiz::QuizConfig& quiz_config,
                           const std::string& opponent, int n_games,
                           std::uint64_t seed, const EvalOptions& options,
                           int render_games) {
  if (n_games < 1) throw UsageError("evaluation needs at least one game");
  if (env == EnvKind::kSoccer) {
    return EvaluateSoccer(net, params, soccer_config, opponent, n_games, seed,
                          options.render, render_games);
  }
  return EvaluateQuiz(net, params, quiz_config, opponent, n_games, seed,
                      options.trace_csv);
}

std::string FormatRow(int epoch, const MetricsSummary& m) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%d,%.6f,%.6f,%.6f,%.6f,%.6f\n", epoch,
                m.mean_reward, m.rush, m.miss, m.win, m.tie);
  return buf;
}

void EnsureDirectory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory '" + dir.string() +
                  "': " + (ec ? ec.message() : "not a directory"));
  }
}

}  // namespace

double MeanOfLastEpochs(const std::vector<double>& rewards) {
  if (rewards.empty()) throw UsageError("no epoch rewards");
  const std::size_t n = std::min<std::size_t>(10, rewards.size());
  double sum = 0.0;
  for (std::size_t i = rewards.size() - n; i < rewards.size(); ++i) {
    sum += rewards[i];
  }
  return sum / static_cast<double>(n);
}

std::string CurveCsvHeader() { return "epoch,mean_reward,rush,miss,win,tie\n"; }

MetricsSummary Evaluate(const Checkpoint& checkpoint,
                        const std::string& opponent, int n_games,
                        std::uint64_t seed, const EvalOptions& options) {
  const QNetwork net(checkpoint.spec);
  return EvaluateNet(checkpoint.env, net, checkpoint.params, checkpoint.soccer,
                     checkpoint.quiz, opponent, n_games, seed, options,
                     n_games);
}

TrainResult Train(const ExperimentConfig& config, std::uint64_t seed,
                  const TrainOptions& options) {
  config.Validate();
  TuneAllocator();
  Learner learner(config, seed);
  std::optional<SoccerRunner> soccer_runner;
  std::optional<QuizRunner> quiz_runner;
  if (config.env == EnvKind::kSoccer) {
    soccer_runner.emplace(config, seed);
  } else {
    quiz_runner.emplace(config, seed);
  }

  TrainResult result;
  std::string csv = CurveCsvHeader();
  MetricsSummary last;
  std::vector<double> series;
  for (int epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto start = std::chrono::steady_clock::now();
    try {
      for (std::int64_t i = 0; i < config.steps_per_epoch; ++i) {
        if (soccer_runner) {
          soccer_runner->Step(learner);
        } else {
          quiz_runner->Step(learner);
        }
      }
    } catch (const TrainingError& e) {
      throw TrainingError("epoch " + std::to_string(epoch) + ": " + e.what());
    }
    if (!AllFinite(learner.params())) {
      throw TrainingError("epoch " + std::to_string(epoch) +
                          ": parameters diverged");
    }
    const bool final_epoch = epoch == config.epochs;
    EvalOptions eval_options;
    if (final_epoch) eval_options.render = options.render;
    last = EvaluateNet(config.env, learner.net(), learner.params(),
                       config.soccer, config.quiz, config.opponent,
                       config.eval_games,
                       MixSeed(seed, kEvalStream + epoch), eval_options, 1);
    series.push_back(last.mean_reward);
    csv += FormatRow(epoch, last);
    if (options.log) {
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      char buf[200];
      std::snprintf(buf, sizeof(buf),
                    "seed %llu epoch %d/%d reward %.4f win %.3f tie %.3f "
                    "eps %.3f loss %.5f (%.1fs)\n",
                    static_cast<unsigned long long>(seed), epoch,
                    config.epochs, last.mean_reward, last.win, last.tie,
                    learner.epsilon(), learner.TakeMeanLoss(), secs);
      *options.log << buf << std::flush;
    }
  }

  last.epoch_rewards = series;
  last.max_reward = *std::max_element(series.begin(), series.end());
  last.mean_r = MeanOfLastEpochs(series);
  result.summary = last;
  result.curve_csv = std::move(csv);
  Checkpoint& c = result.checkpoint;
  c.env = config.env;
  c.soccer = config.soccer;
  c.quiz = config.quiz;
  c.spec = config.agent;
  c.params = learner.params();
  c.steps = learner.steps();
  c.rng_state = RngState(learner.rng());
  return result;
}

std::string OutputRoot(const ExperimentConfig& config) {
  if (const char* env = std::getenv("DRON_OUTPUT_DIR"); env && *env) {
    return env;
  }
  return config.output_dir;
}

void WriteTextFile(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  out.flush();
  if (!out) throw IoError("failed writing '" + path + "'");
}

namespace {

TrainResult TrainAndWrite(const ExperimentConfig& config, std::uint64_t seed,
                          const std::filesystem::path& dir,
                          const TrainOptions& options) {
  EnsureDirectory(dir);
  TrainResult r = Train(config, seed, options);
  WriteTextFile((dir / "curve.csv").string(), r.curve_csv);
  SaveCheckpoint(r.checkpoint, (dir / "checkpoint.txt").string());
  WriteTextFile((dir / "config.txt").string(),
                FormatConfig(config) + "# seed " + std::to_string(seed) +
                    "\n");
  return r;
}

}  // namespace

std::vector<TrainResult> RunTraining(const ExperimentConfig& config,
                                     const TrainOptions& options) {
  const std::filesystem::path root =
      std::filesystem::path(OutputRoot(config)) / config.name;
  EnsureDirectory(root);
  std::vector<TrainResult> results;
  for (std::uint64_t seed : config.seeds) {
    results.push_back(TrainAndWrite(
        config, seed, root / ("seed_" + std::to_string(seed)), options));
  }
  return results;
}

namespace {

std::vector<SweepRow> Sweep(const ExperimentConfig& config,
                            const std::vector<int>& experts,
                            const TrainOptions& options,
                            const std::filesystem::path* root) {
  if (experts.empty()) throw UsageError("sweep needs at least one K");
  if (config.agent.kind != AgentKind::kDronMoe) {
    throw ConfigError("expert sweep needs agent = dron_moe");
  }
  std::vector<SweepRow> rows;
  for (int k : experts) {
    if (k < 1) throw ConfigError("expert count must be >= 1");
    ExperimentConfig c = config;
    c.agent.num_experts = k;
    SweepRow row;
    row.experts = k;
    for (std::uint64_t seed : config.seeds) {
      const TrainResult r =
          root ? TrainAndWrite(c, seed,
                               *root / ("K" + std::to_string(k)) /
                                   ("seed_" + std::to_string(seed)),
                               options)
               : Train(c, seed, options);
      row.mean_r.push_back(r.summary.mean_r);
    }
    const ConfidenceInterval ci = MeanCi90(row.mean_r);
    row.mean = ci.mean;
    row.half_width = ci.half_width;
    row.degenerate = ci.degenerate;
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

std::vector<SweepRow> SweepExperts(const ExperimentConfig& config,
                                   const std::vector<int>& experts,
                                   const TrainOptions& options) {
  return Sweep(config, experts, options, nullptr);
}

std::string SweepCsv(const std::vector<SweepRow>& rows) {
  std::string out =
      "experts,runs,mean,ci90_low,ci90_high,half_width,degenerate\n";
  for (const SweepRow& r : rows) {
    char buf[200];
    std::snprintf(buf, sizeof(buf), "%d,%zu,%.6f,%.6f,%.6f,%.6f,%d\n",
                  r.experts, r.mean_r.size(), r.mean, r.mean - r.half_width,
                  r.mean + r.half_width, r.half_width, r.degenerate ? 1 : 0);
    out += buf;
  }
  return out;
}

std::vector<SweepRow> RunSweep(const ExperimentConfig& config,
                               const std::vector<int>& experts,
                               const TrainOptions& options) {
  const std::filesystem::path root =
      std::filesystem::path(OutputRoot(config)) / config.name;
  EnsureDirectory(root);
  auto rows = Sweep(config, experts, options, &root);
  WriteTextFile((root / "sweep.csv").string(), SweepCsv(rows));
  return rows;
}

std::vector<double> ReadCsvColumn(const std::string& path,
                                  const std::string& column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path + "'");
  auto split = [](const std::string& line) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      if (!cell.empty() && cell.back() == '\r') cell.pop_back();
      cells.push_back(cell);
    }
    return cells;
  };
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty CSV '" + path + "'", 1);
  const auto header = split(line);
  std::size_t index = header.size();
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (header[i] == column) index = i;
  }
  if (index == header.size()) {
    throw ParseError("CSV '" + path + "' has no column '" + column + "'", 1);
  }
  std::vector<double> values;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto cells = split(line);
    if (index >= cells.size()) {
      throw ParseError("row is missing column '" + column + "'", line_no);
    }
    char* end = nullptr;
    const double v = std::strtod(cells[index].c_str(), &end);
    if (cells[index].empty() || *end != '\0') {
      throw ParseError("malformed number '" + cells[index] + "'", line_no);
    }
    values.push_back(v);
  }
  return values;
}

}  // namespace dron
