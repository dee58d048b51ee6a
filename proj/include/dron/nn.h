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

#ifndef DRON_NN_H_
#define DRON_NN_H_

// Dense feed-forward networks with hand-written backpropagation.
//
// Everything is batched: an input is a Matrix with one sample per row.
// Single-vector helpers wrap the batched path so both share one
// implementation.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "dron/common.h"

namespace dron {

using Matrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// One affine layer: y = weight * x + bias. weight is out x in.
struct DenseParams {
  std::string name;
  Matrix weight;
  Vector bias;
};

// Named, ordered collection of affine layers. Networks address their
// layers by index; names exist for checkpoints and diagnostics.
class ParamSet {
 public:
  ParamSet() = default;

  // Appends a zero-initialized layer and returns its index.
  int Add(std::string name, int in, int out);

  int size() const { return static_cast<int>(layers_.size()); }
  DenseParams& operator[](int i) { return layers_[i]; }
  const DenseParams& operator[](int i) const { return layers_[i]; }
  std::vector<DenseParams>& layers() { return layers_; }
  const std::vector<DenseParams>& layers() const { return layers_; }

  // Index of the layer with this name, or -1.
  int Find(std::string_view name) const;

  // Same names and shapes, all values zero.
  ParamSet ZerosLike() const;
  bool SameShape(const ParamSet& other) const;
  void SetZero();
  std::int64_t NumScalars() const;

 private:
  std::vector<DenseParams> layers_;
};

enum class Activation { kIdentity, kRelu, kSoftmax, kSigmoid };

// Layer sizes [in, h1, ..., out]. Every layer but the last applies ReLU;
// the last applies `output`.
struct MlpSpec {
  std::vector<int> sizes;
  Activation output = Activation::kIdentity;

  int input_size() const { return sizes.front(); }
  int output_size() const { return sizes.back(); }
  int num_layers() const { return static_cast<int>(sizes.size()) - 1; }
};

void ValidateSpec(const MlpSpec& spec);

// Per-layer values for one batch: pre[i] = affine output of layer i,
// post[i] = activation(pre[i]). inputs is the batch fed to layer 0.
struct ForwardCache {
  Matrix input;
  std::vector<Matrix> pre;
  std::vector<Matrix> post;

  const Matrix& output() const { return post.back(); }
};

// A view of an MlpSpec living inside a ParamSet, starting at layer
// `first_layer`. Several networks may share one ParamSet.
struct Mlp {
  MlpSpec spec;
  int first_layer = 0;

  // Appends this network's layers to `params` as "<prefix>.<i>".
  static Mlp Create(const MlpSpec& spec, const std::string& prefix,
                    ParamSet& params);

  ForwardCache Forward(const ParamSet& params, const Matrix& input) const;
  Matrix Predict(const ParamSet& params, const Matrix& input) const;

  // Accumulates parameter gradients into `grads` (shaped like params) and
  // returns dLoss/dInput. output_gradient is dLoss/dOutput, i.e. with
  // respect to the post-activation output.
  Matrix Backward(const ParamSet& params, const ForwardCache& cache,
                  const Matrix& output_gradient, ParamSet& grads) const;
};

// Standalone single-network API.
struct MlpOutput {
  Vector output;
  ForwardCache cache;
};
MlpOutput MlpForward(const MlpSpec& spec, const ParamSet& params,
                     std::span<const double> input);
// Returns gradients shaped like params.
ParamSet MlpBackward(const MlpSpec& spec, const ParamSet& params,
                     const ForwardCache& cache,
                     std::span<const double> output_gradient);

// Deterministic init: weights uniform in +-sqrt(6 / (fan_in + fan_out)),
// biases zero.
ParamSet InitParams(const MlpSpec& spec, std::uint64_t seed);
void InitLayer(DenseParams& layer, Rng& rng);

Vector Softmax(std::span<const double> v);
// Row-wise softmax with max subtraction.
Matrix SoftmaxRows(const Matrix& logits);
// Vector-Jacobian product of row-wise softmax: given probabilities p and
// dL/dp, returns dL/dlogits.
Matrix SoftmaxBackward(const Matrix& probs, const Matrix& grad_probs);

inline constexpr double kNumericEpsilon = 1e-8;

enum class LossKind { kSquared, kCrossEntropy, kMeanSquared };

struct LossResult {
  double loss = 0.0;
  Vector gradient;
};

// kSquared:      0.5 * ||p - t||^2,          grad p - t
// kMeanSquared:  mean((p - t)^2),            grad 2 (p - t) / n
// kCrossEntropy: -sum t_i log(p_i + eps),    grad -t_i / (p_i + eps)
// For cross entropy `target` is either a one-hot / probability vector of
// the prediction's length or a single class index.
LossResult LossAndGrad(LossKind kind, std::span<const double> prediction,
                       std::span<const double> target);

struct AdaGradState {
  ParamSet accumulators;
  double learning_rate = 0.0005;
  double epsilon = kNumericEpsilon;
  // Per-coordinate clip applied to gradients before accumulation; <= 0
  // disables it.
  double clip = 0.0;

  static AdaGradState For(const ParamSet& params, double learning_rate,
                          double clip = 0.0);
};

// accumulator += g^2; theta -= lr * g / (sqrt(accumulator) + eps).
// Throws TrainingError on a non-finite gradient, leaving params untouched.
void AdaGradUpdate(ParamSet& params, const ParamSet& grads,
                   AdaGradState& state);

bool AllFinite(const ParamSet& params);

}  // namespace dron

#endif  // DRON_NN_H_
