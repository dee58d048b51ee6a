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

#include "dron/config.h"

#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace dron {

std::string ToString(EnvKind env) {
  return env == EnvKind::kSoccer ? "soccer" : "quizbowl";
}

EnvKind ParseEnvKind(const std::string& s) {
  if (s == "soccer") return EnvKind::kSoccer;
  if (s == "quizbowl") return EnvKind::kQuizbowl;
  throw ConfigError("unknown environment '" + s + "'");
}

bool IsValidOpponent(EnvKind env, const std::string& opponent) {
  if (env == EnvKind::kSoccer) {
    return opponent == "mixed" || opponent == "offensive" ||
           opponent == "defensive";
  }
  return quiz::Population::IsPreset(opponent);
}

AgentSpec DefaultAgentSpec(EnvKind env, AgentKind kind, Multitask multitask,
                           const quiz::QuizConfig& quiz) {
  AgentSpec spec;
  spec.kind = kind;
  spec.multitask = multitask;
  const bool dqn = kind == AgentKind::kDqn;
  if (env == EnvKind::kSoccer) {
    spec.state_dim = soccer::kStateFeatures;
    spec.opponent_dim = soccer::kOpponentFeatures;
    spec.num_actions = soccer::kNumActions;
    spec.state_hidden = dqn ? std::vector<int>{50, 50} : std::vector<int>{50};
    spec.opponent_hidden = 50;
    spec.head_hidden = 50;
    spec.supervision_size =
        multitask == Multitask::kAction ? soccer::kNumMoveCategories : 2;
  } else {
    spec.state_dim = quiz::StateFeatureSize(quiz);
    spec.opponent_dim = quiz::kOpponentFeatures;
    spec.num_actions = quiz::kNumActions;
    spec.state_hidden =
        dqn ? std::vector<int>{128, 128} : std::vector<int>{128};
    spec.opponent_hidden = 10;
    spec.head_hidden = 128;
    spec.supervision_size =
        multitask == Multitask::kAction ? 1 : quiz::kNumTypes;
  }
  spec.num_experts = 3;
  spec.multitask_weight = 1.0;
  return spec;
}

void ExperimentConfig::Validate() const {
  agent.Validate();
  q.Validate();
  epsilon.Validate();
  if (epochs < 1) throw ConfigError("epochs must be >= 1");
  if (steps_per_epoch < 1) throw ConfigError("steps_per_epoch must be >= 1");
  if (eval_games < 1) throw ConfigError("eval_games must be >= 1");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (replay_capacity < 1) throw ConfigError("replay_capacity must be >= 1");
  if (learning_starts < 1) throw ConfigError("learning_starts must be >= 1");
  if (!IsValidOpponent(env, opponent)) {
    throw ConfigError("unknown opponent '" + opponent + "' for " +
                      ToString(env));
  }
  if (self_reward && env != EnvKind::kQuizbowl) {
    throw ConfigError("reward=self is only defined for quizbowl");
  }
  soccer.Validate();
  quiz.Validate();
}

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

const std::set<std::string>& KnownKeys() {
  static const std::set<std::string> keys = {
      "name",          "env",             "agent",
      "multitask",     "multitask_weight", "experts",
      "state_hidden",  "opponent_hidden", "head_hidden",
      "gamma",         "learning_rate",   "batch_size",
      "target_sync",   "gradient_clip",   "epsilon_start",
      "epsilon_end",   "epsilon_decay_steps", "epochs",
      "steps_per_epoch", "eval_games",    "seeds",
      "opponent",      "output_dir",      "replay_capacity",
      "learning_starts", "reward",        "quiz_vocab",
      "quiz_min_length", "quiz_max_length", "quiz_alpha",
      "quiz_kappa",    "soccer_horizon"};
  return keys;
}

std::string Trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

class Reader {
 public:
  explicit Reader(std::map<std::string, Entry> entries)
      : entries_(std::move(entries)) {}

  bool Has(const std::string& key) const { return entries_.count(key) > 0; }

  std::string String(const std::string& key, std::string fallback) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? fallback : it->second.value;
  }

  template <typename T>
  T Number(const std::string& key, T fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    return ParseNumber<T>(key, it->second.value, it->second.line);
  }

  template <typename T>
  std::vector<T> List(const std::string& key, std::vector<T> fallback) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    std::vector<T> out;
    std::stringstream ss(it->second.value);
    std::string item;
    while (std::getline(ss, item, ',')) {
      out.push_back(ParseNumber<T>(key, Trim(item), it->second.line));
    }
    if (out.empty()) Fail(key, "expected a comma-separated list");
    return out;
  }

  int LineOf(const std::string& key) const {
    auto it = entries_.find(key);
    return it == entries_.end() ? 0 : it->second.line;
  }

  [[noreturn]] void Fail(const std::string& key, const std::string& why) const {
    throw ParseError("key '" + key + "': " + why, LineOf(key));
  }

  // Range checks report the offending key and line.
  template <typename T>
  void Require(const std::string& key, bool ok, const std::string& why) const {
    if (!ok) Fail(key, why);
  }

 private:
  template <typename T>
  static T ParseNumber(const std::string& key, const std::string& text,
                       int line) {
    T value{};
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec != std::errc() || ptr != end || text.empty()) {
      throw ParseError("key '" + key + "': malformed value '" + text + "'",
                       line);
    }
    return value;
  }

  std::map<std::string, Entry> entries_;
};

}  // namespace

ExperimentConfig ParseConfig(std::string_view text) {
  std::map<std::string, Entry> entries;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    std::string line = raw;
    if (auto hash = line.find('#'); hash != std::string::npos) {
      line.resize(hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError("expected key=value, got '" + line + "'", line_no);
    }
    const std::string key = Trim(std::string_view(line).substr(0, eq));
    const std::string value = Trim(std::string_view(line).substr(eq + 1));
    if (!KnownKeys().count(key)) {
      throw ParseError("unknown key '" + key + "'", line_no);
    }
    if (entries.count(key)) {
      throw ParseError("duplicate key '" + key + "'", line_no);
    }
    entries[key] = {value, line_no};
  }
  const Reader r(std::move(entries));

  ExperimentConfig c;
  auto wrap = [&](const std::string& key, auto&& fn) {
    try {
      fn();
    } catch (const ConfigError& e) {
      r.Fail(key, e.what());
    }
  };

  c.name = r.String("name", c.name);
  wrap("env", [&] { c.env = ParseEnvKind(r.String("env", "soccer")); });

  c.quiz.vocab = r.Number<int>("quiz_vocab", c.quiz.vocab);
  r.Require<int>("quiz_vocab", c.quiz.vocab >= 2, "must be >= 2");
  c.quiz.min_length = r.Number<int>("quiz_min_length", c.quiz.min_length);
  c.quiz.max_length = r.Number<int>("quiz_max_length", c.quiz.max_length);
  r.Require<int>("quiz_min_length", c.quiz.min_length >= 1, "must be >= 1");
  r.Require<int>("quiz_max_length", c.quiz.max_length >= c.quiz.min_length,
                 "must be >= quiz_min_length");
  c.quiz.alpha = r.Number<double>("quiz_alpha", c.quiz.alpha);
  r.Require<double>("quiz_alpha", c.quiz.alpha >= 0.0, "must be >= 0");
  c.quiz.kappa = r.Number<double>("quiz_kappa", c.quiz.kappa);
  r.Require<double>("quiz_kappa", c.quiz.kappa > 0.0, "must be > 0");
  c.soccer.horizon = r.Number<int>("soccer_horizon", c.soccer.horizon);
  r.Require<int>("soccer_horizon", c.soccer.horizon >= 1, "must be >= 1");

  AgentKind kind = AgentKind::kDqn;
  Multitask multitask = Multitask::kNone;
  wrap("agent", [&] { kind = ParseAgentKind(r.String("agent", "dqn")); });
  wrap("multitask",
       [&] { multitask = ParseMultitask(r.String("multitask", "none")); });
  r.Require<int>("multitask",
                 !(kind == AgentKind::kDqn && multitask != Multitask::kNone),
                 "multitask needs a dron_* agent");
  c.agent = DefaultAgentSpec(c.env, kind, multitask, c.quiz);
  c.agent.state_hidden = r.List<int>("state_hidden", c.agent.state_hidden);
  for (int h : c.agent.state_hidden) {
    r.Require<int>("state_hidden", h >= 1, "sizes must be >= 1");
  }
  c.agent.opponent_hidden =
      r.Number<int>("opponent_hidden", c.agent.opponent_hidden);
  r.Require<int>("opponent_hidden", c.agent.opponent_hidden >= 1,
                 "must be >= 1");
  c.agent.head_hidden = r.Number<int>("head_hidden", c.agent.head_hidden);
  r.Require<int>("head_hidden", c.agent.head_hidden >= 1, "must be >= 1");
  c.agent.num_experts = r.Number<int>("experts", c.agent.num_experts);
  r.Require<int>("experts", c.agent.num_experts >= 1, "must be >= 1");
  c.agent.multitask_weight =
      r.Number<double>("multitask_weight", c.agent.multitask_weight);
  r.Require<double>("multitask_weight", c.agent.multitask_weight >= 0.0,
                    "must be >= 0");

  c.q.gamma = r.Number<double>("gamma", c.q.gamma);
  r.Require<double>("gamma", c.q.gamma >= 0.0 && c.q.gamma <= 1.0,
                    "must lie in [0, 1]");
  c.q.learning_rate = r.Number<double>("learning_rate", c.q.learning_rate);
  r.Require<double>("learning_rate", c.q.learning_rate > 0.0, "must be > 0");
  c.q.batch_size = r.Number<int>("batch_size", c.q.batch_size);
  r.Require<int>("batch_size", c.q.batch_size >= 1, "must be >= 1");
  c.q.target_sync_period = r.Number<int>("target_sync", c.q.target_sync_period);
  r.Require<int>("target_sync", c.q.target_sync_period >= 1, "must be >= 1");
  c.q.gradient_clip = r.Number<double>("gradient_clip", c.q.gradient_clip);
  r.Require<double>("gradient_clip", c.q.gradient_clip >= 0.0, "must be >= 0");

  c.epsilon.start = r.Number<double>("epsilon_start", c.epsilon.start);
  c.epsilon.end = r.Number<double>("epsilon_end", c.epsilon.end);
  c.epsilon.decay_steps =
      r.Number<std::int64_t>("epsilon_decay_steps", c.epsilon.decay_steps);
  r.Require<double>("epsilon_start",
                    c.epsilon.start <= 1.0 && c.epsilon.start >= c.epsilon.end,
                    "must satisfy 1 >= epsilon_start >= epsilon_end");
  r.Require<double>("epsilon_end", c.epsilon.end >= 0.0, "must be >= 0");
  r.Require<double>("epsilon_decay_steps", c.epsilon.decay_steps >= 0,
                    "must be >= 0");

  c.epochs = r.Number<int>("epochs", c.epochs);
  r.Require<int>("epochs", c.epochs >= 1, "must be >= 1");
  c.steps_per_epoch =
      r.Number<std::int64_t>("steps_per_epoch", c.steps_per_epoch);
  r.Require<int>("steps_per_epoch", c.steps_per_epoch >= 1, "must be >= 1");
  c.eval_games = r.Number<int>("eval_games", c.eval_games);
  r.Require<int>("eval_games", c.eval_games >= 1, "must be >= 1");
  c.seeds = r.List<std::uint64_t>("seeds", c.seeds);
  c.opponent = r.String("opponent", c.opponent);
  r.Require<int>("opponent", IsValidOpponent(c.env, c.opponent),
                 "unknown opponent for " + ToString(c.env));
  c.output_dir = r.String("output_dir", c.output_dir);
  c.replay_capacity =
      r.Number<std::size_t>("replay_capacity", c.replay_capacity);
  r.Require<int>("replay_capacity", c.replay_capacity >= 1, "must be >= 1");
  c.learning_starts =
      r.Number<std::int64_t>("learning_starts", c.learning_starts);
  r.Require<int>("learning_starts", c.learning_starts >= 1, "must be >= 1");
  const std::string reward = r.String("reward", "game");
  r.Require<int>("reward", reward == "game" || reward == "self",
                 "must be 'game' or 'self'");
  c.self_reward = reward == "self";
  r.Require<int>("reward", !c.self_reward || c.env == EnvKind::kQuizbowl,
                 "reward=self is only defined for quizbowl");

  wrap("agent", [&] { c.Validate(); });
  return c;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ParseConfig(ss.str());
}

namespace {

// Shortest text that reads back to the same double.
std::string Real(double x) {
  char buf[32];
  const auto r =
      std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string FormatConfig(const ExperimentConfig& c) {
  std::ostringstream out;
  auto join = [](const auto& xs) {
    std::ostringstream s;
    for (std::size_t i = 0; i < xs.size(); ++i) s << (i ? "," : "") << xs[i];
    return s.str();
  };
  out << "name = " << c.name << "\n"
      << "env = " << ToString(c.env) << "\n"
      << "agent = " << ToString(c.agent.kind) << "\n"
      << "multitask = " << ToString(c.agent.multitask) << "\n"
      << "multitask_weight = " << Real(c.agent.multitask_weight) << "\n"
      << "experts = " << c.agent.num_experts << "\n"
      << "state_hidden = " << join(c.agent.state_hidden) << "\n"
      << "opponent_hidden = " << c.agent.opponent_hidden << "\n"
      << "head_hidden = " << c.agent.head_hidden << "\n"
      << "gamma = " << Real(c.q.gamma) << "\n"
      << "learning_rate = " << Real(c.q.learning_rate) << "\n"
      << "batch_size = " << c.q.batch_size << "\n"
      << "target_sync = " << c.q.target_sync_period << "\n"
      << "gradient_clip = " << Real(c.q.gradient_clip) << "\n"
      << "epsilon_start = " << Real(c.epsilon.start) << "\n"
      << "epsilon_end = " << Real(c.epsilon.end) << "\n"
      << "epsilon_decay_steps = " << c.epsilon.decay_steps << "\n"
      << "epochs = " << c.epochs << "\n"
      << "steps_per_epoch = " << c.steps_per_epoch << "\n"
      << "eval_games = " << c.eval_games << "\n"
      << "seeds = " << join(c.seeds) << "\n"
      << "opponent = " << c.opponent << "\n"
      << "output_dir = " << c.output_dir << "\n"
      << "replay_capacity = " << c.replay_capacity << "\n"
      << "learning_starts = " << c.learning_starts << "\n"
      << "reward = " << (c.self_reward ? "self" : "game") << "\n"
      << "quiz_vocab = " << c.quiz.vocab << "\n"
      << "quiz_min_length = " << c.quiz.min_length << "\n"
      << "quiz_max_length = " << c.quiz.max_length << "\n"
      << "quiz_alpha = " << Real(c.quiz.alpha) << "\n"
      << "quiz_kappa = " << Real(c.quiz.kappa) << "\n"
      << "soccer_horizon = " << c.soccer.horizon << "\n";
  return out.str();
}

}  // namespace dron
