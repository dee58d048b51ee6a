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

#include "dron/common.h"
#include "dron/nn.h"

namespace dron {
namespace {

using doctest::Approx;

ParamSet OneLayer(int in, int out) {
  ParamSet p;
  p.Add("mlp.0", in, out);
  return p;
}

TEST_CASE("zero parameters give zero output") {
  const MlpSpec spec{{3, 4, 2}, Activation::kIdentity};
  ParamSet p = InitParams(spec, 7);
  p.SetZero();
  const std::vector<double> x = {1.0, -2.0, 3.0};
  const MlpOutput out = MlpForward(spec, p, x);
  CHECK(out.output.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("identity relu layer") {
  const MlpSpec spec{{2, 2}, Activation::kRelu};
  ParamSet p = OneLayer(2, 2);
  p[0].weight = Matrix::Identity(2, 2);
  const std::vector<double> x = {-1.0, 2.0};
  const Vector y = MlpForward(spec, p, x).output;
  CHECK(y[0] == 0.0);
  CHECK(y[1] == 2.0);
}

TEST_CASE("2-3-2 forward matches a hand-evaluated chain") {
  const MlpSpec spec{{2, 3, 2}, Activation::kIdentity};
  ParamSet p = InitParams(spec, 11);
  p[0].bias << 0.1, -0.2, 0.3;
  p[1].bias << -0.05, 0.07;
  const std::vector<double> x = {0.7, -1.3};
  double h[3];
  for (int j = 0; j < 3; ++j) {
    double z = p[0].bias[j];
    for (int i = 0; i < 2; ++i) z += p[0].weight(j, i) * x[i];
    h[j] = z > 0 ? z : 0.0;
  }
  const Vector y = MlpForward(spec, p, x).output;
  for (int k = 0; k < 2; ++k) {
    double z = p[1].bias[k];
    for (int j = 0; j < 3; ++j) z += p[1].weight(k, j) * h[j];
    CHECK(y[k] == Approx(z).epsilon(1e-14));
  }
}

TEST_CASE("forward rejects a wrong input size") {
  const MlpSpec spec{{3, 2}, Activation::kIdentity};
  const ParamSet p = InitParams(spec, 1);
  const std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS(MlpForward(spec, p, x), ConfigError);
}

TEST_CASE("zero output gradient gives zero parameter gradients") {
  const MlpSpec spec{{3, 5, 2}, Activation::kIdentity};
  const ParamSet p = InitParams(spec, 3);
  const std::vector<double> x = {0.2, -0.4, 0.9};
  const MlpOutput out = MlpForward(spec, p, x);
  const std::vector<double> g = {0.0, 0.0};
  const ParamSet grads = MlpBackward(spec, p, out.cache, g);
  for (const DenseParams& l : grads.layers()) {
    CHECK(l.weight.cwiseAbs().maxCoeff() == 0.0);
    CHECK(l.bias.cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("linear layer squared loss gradient is (y - t) x^T") {
  const MlpSpec spec{{3, 2}, Activation::kIdentity};
  const ParamSet p = InitParams(spec, 5);
  const std::vector<double> x = {1.0, -2.0, 0.5};
  const std::vector<double> t = {0.3, -0.1};
  const MlpOutput out = MlpForward(spec, p, x);
  const LossResult l = LossAndGrad(
      LossKind::kSquared, std::span<const double>(out.output.data(), 2), t);
  const ParamSet g = MlpBackward(
      spec, p, out.cache, std::span<const double>(l.gradient.data(), 2));
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 3; ++c) {
      CHECK(g[0].weight(r, c) ==
            Approx((out.output[r] - t[r]) * x[c]).epsilon(1e-12));
    }
  }
}

TEST_CASE("4-8-3 backward matches central differences") {
  const MlpSpec spec{{4, 8, 3}, Activation::kIdentity};
  ParamSet p = InitParams(spec, 21);
  Rng rng(4);
  for (DenseParams& l : p.layers()) {
    for (Eigen::Index i = 0; i < l.bias.size(); ++i) {
      l.bias[i] = 0.2 * StandardNormal(rng);
    }
  }
  const std::vector<double> x = {0.5, -1.2, 0.8, 0.1};
  const std::vector<double> t = {0.1, 0.2, -0.3};
  auto loss = [&](const ParamSet& q) {
    const MlpOutput o = MlpForward(spec, q, x);
    return LossAndGrad(LossKind::kSquared,
                       std::span<const double>(o.output.data(), 3), t)
        .loss;
  };
  const MlpOutput out = MlpForward(spec, p, x);
  const LossResult l = LossAndGrad(
      LossKind::kSquared, std::span<const double>(out.output.data(), 3), t);
  const ParamSet g = MlpBackward(
      spec, p, out.cache, std::span<const double>(l.gradient.data(), 3));
  const double h = 1e-5;
  double worst = 0.0;
  for (int li = 0; li < p.size(); ++li) {
    for (Eigen::Index i = 0; i < p[li].weight.size(); ++i) {
      double& w = p[li].weight.data()[i];
      const double saved = w;
      w = saved + h;
      const double up = loss(p);
      w = saved - h;
      const double down = loss(p);
      w = saved;
      const double numeric = (up - down) / (2 * h);
      const double analytic = g[li].weight.data()[i];
      worst = std::max(worst, std::abs(numeric - analytic) /
                                  std::max({1e-3, std::abs(numeric),
                                            std::abs(analytic)}));
    }
  }
  CHECK(worst <= 1e-4);
}

TEST_CASE("softmax examples") {
  const std::vector<double> a = {0.0, 0.0};
  const Vector s = Softmax(a);
  CHECK(s[0] == Approx(0.5));
  CHECK(s[1] == Approx(0.5));

  const std::vector<double> big = {1000.0, 0.0};
  const Vector sb = Softmax(big);
  CHECK(std::isfinite(sb[0]));
  CHECK(sb[0] == Approx(1.0));
  CHECK(sb[1] == Approx(0.0));

  const std::vector<double> v = {1.0, 2.0, 3.0};
  const Vector sv = Softmax(v);
  CHECK(std::abs(sv[0] - 0.09003) <= 1e-5);
  CHECK(std::abs(sv[1] - 0.24473) <= 1e-5);
  CHECK(std::abs(sv[2] - 0.66524) <= 1e-5);

  CHECK_THROWS_AS(Softmax(std::vector<double>{}), UsageError);
}

TEST_CASE("loss examples") {
  const std::vector<double> p = {0.2, -0.7};
  const LossResult same = LossAndGrad(LossKind::kSquared, p, p);
  CHECK(same.loss == 0.0);
  CHECK(same.gradient.cwiseAbs().maxCoeff() == 0.0);

  const std::vector<double> uniform = {0.25, 0.25, 0.25, 0.25};
  const std::vector<double> cls = {2.0};
  CHECK(LossAndGrad(LossKind::kCrossEntropy, uniform, cls).loss ==
        Approx(std::log(4.0)).epsilon(1e-7));

  const std::vector<double> half = {0.5}, one = {1.0};
  const LossResult mse = LossAndGrad(LossKind::kMeanSquared, half, one);
  CHECK(mse.loss == Approx(0.25));
  CHECK(mse.gradient[0] == Approx(-1.0));

  const std::vector<double> bad = {0.7, 0.7};
  CHECK_THROWS_AS(LossAndGrad(LossKind::kCrossEntropy, bad, cls), UsageError);
}

TEST_CASE("adagrad examples") {
  ParamSet p = OneLayer(1, 1);
  p[0].weight(0, 0) = 1.0;
  ParamSet g = p.ZerosLike();
  AdaGradState state = AdaGradState::For(p, 0.0005);

  AdaGradUpdate(p, g, state);
  CHECK(p[0].weight(0, 0) == 1.0);

  g[0].weight(0, 0) = 0.5;
  AdaGradUpdate(p, g, state);
  const double first = p[0].weight(0, 0) - 1.0;
  CHECK(first == Approx(-0.0005).epsilon(1e-6));

  const double before = p[0].weight(0, 0);
  AdaGradUpdate(p, g, state);
  const double second = p[0].weight(0, 0) - before;
  CHECK(std::abs(second - first / std::sqrt(2.0)) <= 1e-9);

  g[0].weight(0, 0) = std::nan("");
  CHECK_THROWS_AS(AdaGradUpdate(p, g, state), TrainingError);
}

TEST_CASE("init is deterministic, bounded, zero-bias") {
  const MlpSpec spec{{15, 50, 5}, Activation::kIdentity};
  const ParamSet a = InitParams(spec, 9);
  const ParamSet b = InitParams(spec, 9);
  CHECK(a[0].weight == b[0].weight);
  CHECK(a[1].weight == b[1].weight);
  for (const DenseParams& l : a.layers()) {
    CHECK(l.bias.cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK(a[0].weight.cwiseAbs().maxCoeff() <= std::sqrt(6.0 / (15 + 50)));
  CHECK(a[0].weight.cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("softmax backward is the softmax Jacobian product") {
  Matrix logits(1, 3);
  logits << 0.3, -0.2, 1.1;
  const Matrix p = SoftmaxRows(logits);
  Matrix up(1, 3);
  up << 0.5, -1.0, 2.0;
  const Matrix d = SoftmaxBackward(p, up);
  for (int j = 0; j < 3; ++j) {
    double want = 0.0;
    for (int i = 0; i < 3; ++i) {
      want += up(0, i) * p(0, i) * ((i == j) - p(0, j));
    }
    CHECK(d(0, j) == Approx(want).epsilon(1e-12));
  }
}

}  // namespace
}  // namespace dron
