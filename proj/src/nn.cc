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

#include "dron/nn.h"

#include <cmath>
#include <sstream>

namespace dron {

double StandardNormal(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream position predictable.
  double u1 = Uniform01(rng);
  while (u1 <= 0.0) u1 = Uniform01(rng);
  const double u2 = Uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

int ParamSet::Add(std::string name, int in, int out) {
  DenseParams layer;
  layer.name = std::move(name);
  layer.weight = Matrix::Zero(out, in);
  layer.bias = Vector::Zero(out);
  layers_.push_back(std::move(layer));
  return size() - 1;
}

int ParamSet::Find(std::string_view name) const {
  for (int i = 0; i < size(); ++i) {
    if (layers_[i].name == name) return i;
  }
  return -1;
}

ParamSet ParamSet::ZerosLike() const {
  ParamSet out = *this;
  out.SetZero();
  return out;
}

bool ParamSet::SameShape(const ParamSet& other) const {
  if (size() != other.size()) return false;
  for (int i = 0; i < size(); ++i) {
    const auto& a = layers_[i];
    const auto& b = other.layers_[i];
    if (a.weight.rows() != b.weight.rows() ||
        a.weight.cols() != b.weight.cols() || a.bias.size() != b.bias.size())
      return false;
  }
  return true;
}

void ParamSet::SetZero() {
  for (auto& layer : layers_) {
    layer.weight.setZero();
    layer.bias.setZero();
  }
}

std::int64_t ParamSet::NumScalars() const {
  std::int64_t n = 0;
  for (const auto& layer : layers_) n += layer.weight.size() + layer.bias.size();
  return n;
}

void ValidateSpec(const MlpSpec& spec) {
  if (spec.sizes.size() < 2) {
    throw ConfigError("MLP needs at least an input and an output size");
  }
  for (int s : spec.sizes) {
    if (s < 1) throw ConfigError("MLP layer sizes must be positive");
  }
}

namespace {

void ApplyActivation(Activation act, const Matrix& pre, Matrix& post) {
  switch (act) {
    case Activation::kIdentity:
      post = pre;
      break;
    case Activation::kRelu:
      post = pre.cwiseMax(0.0);
      break;
    case Activation::kSoftmax:
      post = SoftmaxRows(pre);
      break;
    case Activation::kSigmoid:
      post = (1.0 + (-pre.array()).exp()).inverse().matrix();
      break;
  }
}

// dL/dpre from dL/dpost.
Matrix ActivationBackward(Activation act, const Matrix& pre,
                          const Matrix& post, const Matrix& grad_post) {
  switch (act) {
    case Activation::kIdentity:
      return grad_post;
    case Activation::kRelu:
      return (pre.array() > 0.0).select(grad_post, 0.0);
    case Activation::kSoftmax:
      return SoftmaxBackward(post, grad_post);
    case Activation::kSigmoid:
      return (grad_post.array() * post.array() * (1.0 - post.array()))
          .matrix();
  }
  return grad_post;
}

void CheckLayerShape(const DenseParams& layer, int in, int out) {
  if (layer.weight.rows() != out || layer.weight.cols() != in ||
      layer.bias.size() != out) {
    std::ostringstream msg;
    msg << "layer '" << layer.name << "' is " << layer.weight.rows() << "x"
        << layer.weight.cols() << ", network expects " << out << "x" << in;
    throw ConfigError(msg.str());
  }
}

}  // namespace

Mlp Mlp::Create(const MlpSpec& spec, const std::string& prefix,
                ParamSet& params) {
  ValidateSpec(spec);
  Mlp mlp;
  mlp.spec = spec;
  mlp.first_layer = params.size();
  for (int i = 0; i < spec.num_layers(); ++i) {
    params.Add(prefix + "." + std::to_string(i), spec.sizes[i],
               spec.sizes[i + 1]);
  }
  return mlp;
}

ForwardCache Mlp::Forward(const ParamSet& params, const Matrix& input) const {
  if (input.cols() != spec.input_size()) {
    throw ConfigError("MLP input has " + std::to_string(input.cols()) +
                      " features, expected " +
                      std::to_string(spec.input_size()));
  }
  if (first_layer + spec.num_layers() > params.size()) {
    throw ConfigError("parameter set has too few layers for this network");
  }
  ForwardCache cache;
  cache.input = input;
  cache.pre.resize(spec.num_layers());
  cache.post.resize(spec.num_layers());
  const Matrix* x = &cache.input;
  for (int i = 0; i < spec.num_layers(); ++i) {
    const DenseParams& layer = params[first_layer + i];
    CheckLayerShape(layer, spec.sizes[i], spec.sizes[i + 1]);
    cache.pre[i].noalias() = *x * layer.weight.transpose();
    cache.pre[i].rowwise() += layer.bias.transpose();
    const Activation act =
        i + 1 == spec.num_layers() ? spec.output : Activation::kRelu;
    ApplyActivation(act, cache.pre[i], cache.post[i]);
    x = &cache.post[i];
  }
  return cache;
}

Matrix Mlp::Predict(const ParamSet& params, const Matrix& input) const {
  return Forward(params, input).post.back();
}

Matrix Mlp::Backward(const ParamSet& params, const ForwardCache& cache,
                     const Matrix& output_gradient, ParamSet& grads) const {
  const int n = spec.num_layers();
  if (static_cast<int>(cache.pre.size()) != n) {
    throw ConfigError("forward cache does not match network depth");
  }
  if (output_gradient.rows() != cache.output().rows() ||
      output_gradient.cols() != cache.output().cols()) {
    throw ConfigError("output gradient shape does not match forward output");
  }
  if (!grads.SameShape(params)) {
    throw ConfigError("gradient set is not shaped like the parameters");
  }
  Matrix grad = output_gradient;
  for (int i = n - 1; i >= 0; --i) {
    const DenseParams& layer = params[first_layer + i];
    const int in = spec.sizes[i];
    const int out = spec.sizes[i + 1];
    CheckLayerShape(layer, in, out);
    if (cache.pre[i].cols() != out) {
      throw ConfigError("forward cache was produced by different parameters");
    }
    const Activation act = i + 1 == n ? spec.output : Activation::kRelu;
    const Matrix dpre =
        ActivationBackward(act, cache.pre[i], cache.post[i], grad);
    const Matrix& x = i == 0 ? cache.input : cache.post[i - 1];
    DenseParams& g = grads[first_layer + i];
    g.weight.noalias() += dpre.transpose() * x;
    g.bias.noalias() += dpre.colwise().sum().transpose();
    grad.noalias() = dpre * layer.weight;
  }
  return grad;
}

namespace {

Matrix RowFromSpan(std::span<const double> v) {
  Matrix m(1, static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) m(0, i) = v[i];
  return m;
}

Mlp StandaloneView(const MlpSpec& spec) {
  ValidateSpec(spec);
  Mlp mlp;
  mlp.spec = spec;
  mlp.first_layer = 0;
  return mlp;
}

}  // namespace

MlpOutput MlpForward(const MlpSpec& spec, const ParamSet& params,
                     std::span<const double> input) {
  const Mlp mlp = StandaloneView(spec);
  if (params.size() != spec.num_layers()) {
    throw ConfigError("parameter set depth does not match the MLP spec");
  }
  MlpOutput out;
  out.cache = mlp.Forward(params, RowFromSpan(input));
  out.output = out.cache.output().row(0).transpose();
  return out;
}

ParamSet MlpBackward(const MlpSpec& spec, const ParamSet& params,
                     const ForwardCache& cache,
                     std::span<const double> output_gradient) {
  const Mlp mlp = StandaloneView(spec);
  if (params.size() != spec.num_layers()) {
    throw ConfigError("parameter set depth does not match the MLP spec");
  }
  ParamSet grads = params.ZerosLike();
  mlp.Backward(params, cache, RowFromSpan(output_gradient), grads);
  return grads;
}

void InitLayer(DenseParams& layer, Rng& rng) {
  const double fan_in = static_cast<double>(layer.weight.cols());
  const double fan_out = static_cast<double>(layer.weight.rows());
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
    for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
      layer.weight(r, c) = (2.0 * Uniform01(rng) - 1.0) * bound;
    }
  }
  layer.bias.setZero();
}

ParamSet InitParams(const MlpSpec& spec, std::uint64_t seed) {
  ParamSet params;
  Mlp::Create(spec, "mlp", params);
  Rng rng(seed);
  for (auto& layer : params.layers()) InitLayer(layer, rng);
  return params;
}

Vector Softmax(std::span<const double> v) {
  if (v.empty()) throw UsageError("softmax of an empty vector");
  return SoftmaxRows(RowFromSpan(v)).row(0).transpose();
}

Matrix SoftmaxRows(const Matrix& logits) {
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index r = 0; r < logits.rows(); ++r) {
    const double m = logits.row(r).maxCoeff();
    out.row(r) = (logits.row(r).array() - m).exp().matrix();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

Matrix SoftmaxBackward(const Matrix& probs, const Matrix& grad_probs) {
  // dL/dz_j = p_j (g_j - sum_k p_k g_k)
  const Eigen::VectorXd dot =
      (probs.array() * grad_probs.array()).rowwise().sum();
  Matrix out = grad_probs;
  out.colwise() -= dot;
  return (out.array() * probs.array()).matrix();
}

LossResult LossAndGrad(LossKind kind, std::span<const double> prediction,
                       std::span<const double> target) {
  const std::size_t n = prediction.size();
  LossResult result;
  result.gradient = Vector::Zero(static_cast<Eigen::Index>(n));
  switch (kind) {
    case LossKind::kSquared:
    case LossKind::kMeanSquared: {
      if (target.size() != n) {
        throw UsageError("prediction and target lengths differ");
      }
      double sum = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = prediction[i] - target[i];
        sum += d * d;
        result.gradient[i] = d;
      }
      if (kind == LossKind::kSquared) {
        result.loss = 0.5 * sum;
      } else {
        result.loss = sum / static_cast<double>(n);
        result.gradient *= 2.0 / static_cast<double>(n);
      }
      break;
    }
    case LossKind::kCrossEntropy: {
      double total = 0.0;
      for (double p : prediction) {
        if (p < 0.0 || !std::isfinite(p)) {
          throw UsageError("cross entropy needs a probability vector");
        }
        total += p;
      }
      if (std::abs(total - 1.0) > 1e-6) {
        throw UsageError("cross entropy prediction does not sum to 1");
      }
      Vector t = Vector::Zero(static_cast<Eigen::Index>(n));
      if (target.size() == 1 && n != 1) {
        const double c = target[0];
        if (c < 0 || c >= static_cast<double>(n) || c != std::floor(c)) {
          throw UsageError("cross entropy class index out of range");
        }
        t[static_cast<Eigen::Index>(c)] = 1.0;
      } else if (target.size() == n) {
        for (std::size_t i = 0; i < n; ++i) t[i] = target[i];
      } else {
        throw UsageError("cross entropy target has the wrong length");
      }
      for (std::size_t i = 0; i < n; ++i) {
        if (t[i] == 0.0) continue;
        result.loss -= t[i] * std::log(prediction[i] + kNumericEpsilon);
        result.gradient[i] = -t[i] / (prediction[i] + kNumericEpsilon);
      }
      break;
    }
  }
  return result;
}

AdaGradState AdaGradState::For(const ParamSet& params, double learning_rate,
                               double clip) {
  AdaGradState state;
  state.accumulators = params.ZerosLike();
  state.learning_rate = learning_rate;
  state.clip = clip;
  return state;
}

bool AllFinite(const ParamSet& params) {
  for (const auto& layer : params.layers()) {
    if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
  }
  return true;
}

namespace {

template <typename Dense>
void AdaGradStep(Dense& theta, const Dense& grad, Dense& acc,
                 const AdaGradState& state) {
  if (state.clip > 0.0) {
    const Dense g = grad.cwiseMax(-state.clip).cwiseMin(state.clip);
    acc.array() += g.array().square();
    theta.array() -=
        state.learning_rate * g.array() / (acc.array().sqrt() + state.epsilon);
  } else {
    acc.array() += grad.array().square();
    theta.array() -= state.learning_rate * grad.array() /
                     (acc.array().sqrt() + state.epsilon);
  }
}

}  // namespace

void AdaGradUpdate(ParamSet& params, const ParamSet& grads,
                   AdaGradState& state) {
  if (!params.SameShape(grads) || !params.SameShape(state.accumulators)) {
    throw ConfigError("AdaGrad: parameter, gradient and state shapes differ");
  }
  for (int i = 0; i < grads.size(); ++i) {
    if (!grads[i].weight.allFinite() || !grads[i].bias.allFinite()) {
      throw TrainingError("non-finite gradient in layer '" + grads[i].name +
                          "'");
    }
  }
  for (int i = 0; i < params.size(); ++i) {
    AdaGradStep(params[i].weight, grads[i].weight,
                state.accumulators[i].weight, state);
    AdaGradStep(params[i].bias, grads[i].bias, state.accumulators[i].bias,
                state);
  }
}

}  // namespace dron
