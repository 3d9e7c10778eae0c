/*
 * Copyright 2026 The aslsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef ASLSIM_NN_HPP
#define ASLSIM_NN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "aslsim/rng.hpp"

namespace aslsim {

/// Raised when an input's dimensions do not match what a layer or network
/// expects. The message names the expected and actual dimensions.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Raised when a weight file is malformed; carries the byte offset at which
/// parsing failed.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::uint64_t byte_offset);
  std::uint64_t byte_offset() const { return byte_offset_; }

 private:
  std::uint64_t byte_offset_;
};

/// Raised when a weight file declares a format version this build does not
/// understand.
class UnsupportedVersionError : public std::runtime_error {
 public:
  UnsupportedVersionError(std::uint32_t found, std::uint32_t expected);
  std::uint32_t found() const { return found_; }
  std::uint32_t expected() const { return expected_; }

 private:
  std::uint32_t found_;
  std::uint32_t expected_;
};

enum class ActivationKind : std::uint8_t { Identity = 0, ReLU = 1, Softmax = 2 };

const char* to_string(ActivationKind kind);

/// Applies an activation elementwise (softmax normalizes the whole vector,
/// computed with max subtraction so large logits do not overflow).
Eigen::VectorXd apply_activation(ActivationKind kind, Eigen::VectorXd z);

/// Row-wise activation over a batch, one sample per row.
Eigen::MatrixXd apply_activation_rows(ActivationKind kind, Eigen::MatrixXd z);

/// Fully connected layer. Weights are stored (in_dim x out_dim), so a forward
/// pass is activation(weights^T x + bias).
struct DenseLayer {
  Eigen::MatrixXd weights;
  Eigen::VectorXd bias;
  ActivationKind activation = ActivationKind::Identity;

  Eigen::Index in_dim() const { return weights.rows(); }
  Eigen::Index out_dim() const { return weights.cols(); }

  Eigen::VectorXd forward(const Eigen::Ref<const Eigen::VectorXd>& x) const;
};

/// An ordered stack of dense layers. Consecutive dimensions must chain.
struct Network {
  std::vector<DenseLayer> layers;

  bool empty() const { return layers.empty(); }
  Eigen::Index in_dim() const { return layers.front().in_dim(); }
  Eigen::Index out_dim() const { return layers.back().out_dim(); }
};

/// Throws ShapeError if consecutive layer dimensions do not chain or a bias
/// length disagrees with its layer width.
void validate(const Network& net);

/// Composition of the layer maps. An empty network is the identity.
Eigen::VectorXd forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x);

/// Batch forward, one sample per row.
Eigen::MatrixXd forward_batch(const Network& net, Eigen::MatrixXd x);

struct LabeledDataset {
  Eigen::MatrixXd features;  // one sample per row
  std::vector<int> labels;   // values in [0, classes)
  int classes = 0;

  Eigen::Index size() const { return features.rows(); }
};

struct TrainConfig {
  int batch_size = 100;
  double learning_rate = 1e-3;
  int epochs = 10;
  std::uint64_t seed = 0;
};

/// Builds a network of the given layer widths, weights drawn uniformly from
/// [-1/sqrt(in_dim), +1/sqrt(in_dim)] and biases zero. widths has one entry
/// more than activations.
Network make_network(const std::vector<Eigen::Index>& widths,
                     const std::vector<ActivationKind>& activations, Rng& rng);

/// Mean cross-entropy of the network's softmax output against the labels.
/// The final layer must use Softmax; the loss is evaluated on its logits via
/// log-sum-exp so it stays finite for large pre-activations.
double cross_entropy_loss(const Network& net, const LabeledDataset& data);

/// Fraction of samples whose predicted class (argmax, lowest index on ties)
/// matches the label.
double accuracy(const Network& net, const LabeledDataset& data);

/// Minibatch SGD with cross-entropy loss. Returns the trained copy; the input
/// network is left untouched. Hidden layers may use Identity or ReLU; the
/// final layer must use Softmax.
Network train_sgd(Network net, const LabeledDataset& data, const TrainConfig& cfg);

// Binary weight container: magic "ASLW", format version, layer count, then per
// layer (in_dim u32, out_dim u32, activation u8, row-major weights and bias as
// little-endian 64-bit floats). Round-trips are bit-exact.
inline constexpr std::uint32_t kWeightFormatVersion = 1;

void save_weights(const Network& net, const std::filesystem::path& path);
Network load_weights(const std::filesystem::path& path);

/// Stream-level codec, shared with the split-model container format.
void write_network(std::ostream& out, const Network& net);
Network read_network(std::istream& in);

}  // namespace aslsim

#endif  // ASLSIM_NN_HPP
