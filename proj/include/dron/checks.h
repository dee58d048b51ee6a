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

#ifndef DRON_CHECKS_H_
#define DRON_CHECKS_H_

// Invariant suites shared by `dron selfcheck`, `dron gradcheck` and the
// acceptance test. The references here are written independently of the
// code they check (straight-line soccer rules, numerically integrated t
// density, central differences).

#include <cstdint>
#include <string>
#include <vector>

#include "dron/soccer.h"

namespace dron {

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Backprop vs central differences on random miniature networks of every
// agent kind (with and without supervision heads).
struct GradCheckReport {
  int networks = 0;
  double max_relative_error = 0.0;
  std::string worst;  // parameter with the largest error
};
GradCheckReport GradientCheck(std::uint64_t seed, int networks_per_kind);
CheckResult CheckGradients(std::uint64_t seed, int networks_per_kind = 20,
                           double tolerance = 1e-4);

// Gate simplex, convex-combination bounds, K = 1 reduction and
// expert/gate input separation.
CheckResult CheckMoeAlgebra(std::uint64_t seed, int trials = 1000);

// Straight-line restatement of the soccer rules.
soccer::StepResult ReferenceSoccerStep(const soccer::SoccerConfig& config,
                                       const soccer::SoccerState& state,
                                       int action_a, int action_b);
CheckResult CheckSoccerRules(std::uint64_t seed, int states = 1000);
CheckResult CheckSoccerRollouts(std::uint64_t seed, int rollouts = 10000);

// Rule agent (player B) against a uniformly random player A.
struct RuleAgentStats {
  int games = 0;
  double win = 0.0;  // rule agent scores
  double tie = 0.0;
  double mean_length = 0.0;
};
RuleAgentStats PlayRuleAgentVsRandom(soccer::ModePolicy policy, int games,
                                     std::uint64_t seed);
CheckResult CheckRuleAgents(std::uint64_t seed, int games = 5000);

// Two-tailed p by Simpson integration of the Student t density.
double NumericTwoTailedP(double t, int df);
CheckResult CheckTTest();

CheckResult CheckCheckpointRoundTrip(std::uint64_t seed);

// Everything above (with smaller sizes when quick is set).
std::vector<CheckResult> RunSelfCheck(std::uint64_t seed, bool quick);

}  // namespace dron

#endif  // DRON_CHECKS_H_
