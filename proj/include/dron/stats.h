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

#ifndef DRON_STATS_H_
#define DRON_STATS_H_

#include <span>

namespace dron {

double Mean(std::span<const double> xs);
// Sample variance (n - 1 denominator); 0 for fewer than two values.
double SampleVariance(std::span<const double> xs);

// I_x(a, b) by Lentz's continued fraction.
double RegularizedIncompleteBeta(double a, double b, double x);
// P(T <= t) for Student's t with df degrees of freedom.
double StudentTCdf(double t, double df);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-tailed
  int df = 0;
  // Differences have zero variance. t is 0 (p = 1) when they are all zero,
  // otherwise +-infinity (p = 0).
  bool degenerate = false;
};

// Paired t-test on a[i] - b[i]. Needs equal lengths >= 2.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

struct ConfidenceInterval {
  double mean = 0.0;
  double half_width = 0.0;
  // Fewer than two samples: the interval collapses to the mean.
  bool degenerate = false;
};

// Normal-approximation 90% interval of the mean: 1.645 * s / sqrt(n).
ConfidenceInterval MeanCi90(std::span<const double> xs);

}  // namespace dron

#endif  // DRON_STATS_H_
