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

#include "dron/checkpoint.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace dron {
namespace {

std::string Real(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Line-oriented tokenizer that remembers where it is for error messages.
class Lines {
 public:
  explicit Lines(std::istream& in) : in_(in) {}

  // Tokens of the next non-empty line; `section` names what was expected
  // when the input ends early.
  std::vector<std::string> Next(const std::string& section) {
    std::string line;
    while (std::getline(in_, line)) {
      ++line_;
      std::istringstream ss(line);
      std::vector<std::string> tokens;
      for (std::string t; ss >> t;) tokens.push_back(t);
      if (!tokens.empty()) return tokens;
    }
    throw ParseError("truncated checkpoint: missing section '" + section + "'",
                     line_ + 1);
  }

  std::vector<std::string> Expect(const std::string& key, std::size_t args) {
    auto tokens = Next(key);
    if (tokens[0] != key) {
      Fail("expected '" + key + "', found '" + tokens[0] + "'");
    }
    if (args != kAny && tokens.size() != args + 1) {
      Fail("'" + key + "' expects " + std::to_string(args) + " values");
    }
    return tokens;
  }

  template <typename T>
  T Number(const std::string& text) {
    T v{};
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) {
      Fail("malformed number '" + text + "'");
    }
    return v;
  }

  [[noreturn]] void Fail(const std::string& why) const {
    throw ParseError(why, line_);
  }

  int line() const { return line_; }

  static constexpr std::size_t kAny = static_cast<std::size_t>(-1);

 private:
  std::istream& in_;
  int line_ = 0;
};

void ReadValues(Lines& lines, const std::string& name, double* data,
                std::int64_t count) {
  std::int64_t got = 0;
  while (got < count) {
    for (const std::string& tok : lines.Next(name + " values")) {
      if (got == count) lines.Fail("too many values for '" + name + "'");
      data[got++] = lines.Number<double>(tok);
    }
  }
}

}  // namespace

std::string RngState(const Rng& rng) {
  std::ostringstream ss;
  ss << rng;
  return ss.str();
}

Rng RngFromState(const std::string& state) {
  Rng rng;
  std::istringstream ss(state);
  ss >> rng;
  if (ss.fail()) throw ParseError("malformed rng state", 0);
  return rng;
}

void WriteCheckpoint(std::ostream& out, const Checkpoint& c) {
  const AgentSpec& s = c.spec;
  out << "dron-checkpoint " << c.version << "\n";
  out << "env " << ToString(c.env) << "\n";
  out << "soccer " << c.soccer.horizon << "\n";
  out << "quiz " << c.quiz.vocab << ' ' << c.quiz.min_length << ' '
      << c.quiz.max_length << ' ' << Real(c.quiz.alpha) << ' '
      << Real(c.quiz.kappa) << "\n";
  out << "agent " << ToString(s.kind) << ' ' << ToString(s.multitask) << ' '
      << Real(s.multitask_weight) << ' ' << s.num_experts << ' '
      << s.state_dim << ' ' << s.opponent_dim << ' ' << s.num_actions << ' '
      << s.opponent_hidden << ' ' << s.head_hidden << ' '
      << s.supervision_size << ' ' << s.state_hidden.size();
  for (int h : s.state_hidden) out << ' ' << h;
  out << "\n";
  out << "steps " << c.steps << "\n";
  out << "rng " << (c.rng_state.empty() ? RngState(Rng()) : c.rng_state)
      << "\n";
  out << "params " << 2 * c.params.size() << "\n";
  for (const DenseParams& layer : c.params.layers()) {
    out << layer.name << ".weight " << layer.weight.rows() << ' '
        << layer.weight.cols() << "\n";
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      for (Eigen::Index k = 0; k < layer.weight.cols(); ++k) {
        out << (k ? " " : "") << Real(layer.weight(r, k));
      }
      out << "\n";
    }
    out << layer.name << ".bias " << layer.bias.size() << " 1\n";
    for (Eigen::Index r = 0; r < layer.bias.size(); ++r) {
      out << (r ? " " : "") << Real(layer.bias[r]);
    }
    out << "\n";
  }
  out << "end\n";
}

Checkpoint ReadCheckpoint(std::istream& in) {
  Lines lines(in);
  Checkpoint c;
  auto header = lines.Next("header");
  if (header[0] != "dron-checkpoint" || header.size() != 2) {
    lines.Fail("not a dron checkpoint");
  }
  c.version = lines.Number<int>(header[1]);
  if (c.version != kCheckpointVersion) {
    lines.Fail("unsupported checkpoint version " + header[1] +
               " (this build reads version " +
               std::to_string(kCheckpointVersion) + ")");
  }

  try {
    c.env = ParseEnvKind(lines.Expect("env", 1)[1]);
  } catch (const ConfigError& e) {
    lines.Fail(e.what());
  }
  c.soccer.horizon = lines.Number<int>(lines.Expect("soccer", 1)[1]);
  auto q = lines.Expect("quiz", 5);
  c.quiz.vocab = lines.Number<int>(q[1]);
  c.quiz.min_length = lines.Number<int>(q[2]);
  c.quiz.max_length = lines.Number<int>(q[3]);
  c.quiz.alpha = lines.Number<double>(q[4]);
  c.quiz.kappa = lines.Number<double>(q[5]);

  auto a = lines.Expect("agent", Lines::kAny);
  if (a.size() < 12) lines.Fail("'agent' line is incomplete");
  AgentSpec& s = c.spec;
  try {
    s.kind = ParseAgentKind(a[1]);
    s.multitask = ParseMultitask(a[2]);
  } catch (const ConfigError& e) {
    lines.Fail(e.what());
  }
  s.multitask_weight = lines.Number<double>(a[3]);
  s.num_experts = lines.Number<int>(a[4]);
  s.state_dim = lines.Number<int>(a[5]);
  s.opponent_dim = lines.Number<int>(a[6]);
  s.num_actions = lines.Number<int>(a[7]);
  s.opponent_hidden = lines.Number<int>(a[8]);
  s.head_hidden = lines.Number<int>(a[9]);
  s.supervision_size = lines.Number<int>(a[10]);
  const auto n_hidden = lines.Number<std::size_t>(a[11]);
  if (a.size() != 12 + n_hidden) lines.Fail("'agent' hidden sizes mismatch");
  s.state_hidden.clear();
  for (std::size_t i = 0; i < n_hidden; ++i) {
    s.state_hidden.push_back(lines.Number<int>(a[12 + i]));
  }
  const int agent_line = lines.line();
  try {
    s.Validate();
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), agent_line);
  }

  c.steps = lines.Number<std::int64_t>(lines.Expect("steps", 1)[1]);
  auto rng = lines.Expect("rng", Lines::kAny);
  std::string state;
  for (std::size_t i = 1; i < rng.size(); ++i) {
    state += (i > 1 ? " " : "") + rng[i];
  }
  try {
    RngFromState(state);
  } catch (const ParseError&) {
    lines.Fail("malformed rng state");
  }
  c.rng_state = state;

  c.params = QNetwork(s).layout();
  const int count = lines.Number<int>(lines.Expect("params", 1)[1]);
  if (count != 2 * c.params.size()) {
    lines.Fail("agent spec needs " + std::to_string(2 * c.params.size()) +
               " matrices, file declares " + std::to_string(count));
  }
  for (DenseParams& layer : c.params.layers()) {
    for (int part = 0; part < 2; ++part) {
      const std::string name = layer.name + (part ? ".bias" : ".weight");
      auto head = lines.Next(name);
      const Eigen::Index rows = part ? layer.bias.size() : layer.weight.rows();
      const Eigen::Index cols = part ? 1 : layer.weight.cols();
      if (head.size() != 3 || head[0] != name) {
        lines.Fail("expected matrix '" + name + "'");
      }
      if (lines.Number<Eigen::Index>(head[1]) != rows ||
          lines.Number<Eigen::Index>(head[2]) != cols) {
        lines.Fail("matrix '" + name + "' has the wrong shape");
      }
      double* data = part ? layer.bias.data() : layer.weight.data();
      ReadValues(lines, name, data, rows * cols);
    }
  }
  lines.Expect("end", 0);
  return c;
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write checkpoint '" + path + "'");
  WriteCheckpoint(out, checkpoint);
  out.flush();
  if (!out) throw IoError("failed writing checkpoint '" + path + "'");
}

Checkpoint LoadCheckpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read checkpoint '" + path + "'");
  return ReadCheckpoint(in);
}

}  // namespace dron
