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

#include "aslsim/nn.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

static_assert(std::endian::native == std::endian::little,
              "weight files are little-endian; big-endian hosts are unsupported");

namespace aslsim {

namespace {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

constexpr char kMagic[4] = {'A', 'S', 'L', 'W'};
constexpr std::uint32_t kMaxLayers = 1u << 16;
constexpr std::uint32_t kMaxWidth = 1u << 20;

std::uint64_t stream_pos(std::istream& in) {
  const auto pos = in.tellg();
  return pos < 0 ? 0 : static_cast<std::uint64_t>(pos);
}

template <typename T>
T read_raw(std::istream& in, const char* what) {
  const std::uint64_t at = stream_pos(in);
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof value);
  if (in.gcount() != static_cast<std::streamsize>(sizeof value)) {
    throw ParseError(std::string("truncated while reading ") + what,
                     at + static_cast<std::uint64_t>(in.gcount()));
  }
  return value;
}

void read_f64_block(std::istream& in, double* dst, std::size_t count, const char* what) {
  const std::uint64_t at = stream_pos(in);
  const auto bytes = static_cast<std::streamsize>(count * sizeof(double));
  in.read(reinterpret_cast<char*>(dst), bytes);
  if (in.gcount() != bytes) {
    throw ParseError(std::string("truncated while reading ") + what,
                     at + static_cast<std::uint64_t>(in.gcount()));
  }
}

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

std::string shape_message(const char* where, Eigen::Index expected, Eigen::Index actual) {
  std::ostringstream msg;
  msg << where << ": expected dimension " << expected << ", got " << actual;
  return msg.str();
}

/// Pre-activations of the final layer for a batch (hidden activations applied).
Eigen::MatrixXd final_logits(const Network& net, Eigen::MatrixXd x) {
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    x = apply_activation_rows(layer.activation,
                              (x * layer.weights).rowwise() + layer.bias.transpose());
  }
  const DenseLayer& last = net.layers.back();
  return (x * last.weights).rowwise() + last.bias.transpose();
}

Eigen::MatrixXd softmax_rows(Eigen::MatrixXd z) {
  const Eigen::VectorXd row_max = z.rowwise().maxCoeff();
  z = (z.colwise() - row_max).array().exp().matrix();
  const Eigen::VectorXd row_sum = z.rowwise().sum();
  return z.array().colwise() / row_sum.array();
}

void check_trainable(const Network& net, const LabeledDataset& data) {
  validate(net);
  if (net.empty()) throw std::invalid_argument("train_sgd: network has no layers");
  if (data.size() == 0) throw std::invalid_argument("train_sgd: dataset is empty");
  if (static_cast<Eigen::Index>(data.labels.size()) != data.size()) {
    throw ShapeError(shape_message("train_sgd labels", data.size(),
                                   static_cast<Eigen::Index>(data.labels.size())));
  }
  if (data.features.cols() != net.in_dim()) {
    throw ShapeError(shape_message("train_sgd features", net.in_dim(), data.features.cols()));
  }
  if (data.classes != net.out_dim()) {
    throw ShapeError(shape_message("train_sgd: label classes vs output width",
                                   net.out_dim(), data.classes));
  }
  if (net.layers.back().activation != ActivationKind::Softmax) {
    throw std::invalid_argument("train_sgd: final layer must use Softmax");
  }
  for (std::size_t l = 0; l + 1 < net.layers.size(); ++l) {
    if (net.layers[l].activation == ActivationKind::Softmax) {
      throw std::invalid_argument("train_sgd: Softmax is only supported on the final layer");
    }
  }
  for (int label : data.labels) {
    if (label < 0 || label >= data.classes) {
      throw std::invalid_argument("train_sgd: label out of range");
    }
  }
}

}  // namespace

ParseError::ParseError(const std::string& what, std::uint64_t byte_offset)
    : std::runtime_error(what + " (byte " + std::to_string(byte_offset) + ")"),
      byte_offset_(byte_offset) {}

UnsupportedVersionError::UnsupportedVersionError(std::uint32_t found, std::uint32_t expected)
    : std::runtime_error("unsupported weight format version " + std::to_string(found) +
                         " (this build reads version " + std::to_string(expected) + ")"),
      found_(found),
      expected_(expected) {}

const char* to_string(ActivationKind kind) {
  switch (kind) {
    case ActivationKind::Identity: return "identity";
    case ActivationKind::ReLU: return "relu";
    case ActivationKind::Softmax: return "softmax";
  }
  return "?";
}

Eigen::VectorXd apply_activation(ActivationKind kind, Eigen::VectorXd z) {
  switch (kind) {
    case ActivationKind::Identity:
      return z;
    case ActivationKind::ReLU:
      return z.cwiseMax(0.0);
    case ActivationKind::Softmax: {
      const double max = z.maxCoeff();
      z = (z.array() - max).exp().matrix();
      return z / z.sum();
    }
  }
  return z;
}

Eigen::MatrixXd apply_activation_rows(ActivationKind kind, Eigen::MatrixXd z) {
  switch (kind) {
    case ActivationKind::Identity:
      return z;
    case ActivationKind::ReLU:
      return z.cwiseMax(0.0);
    case ActivationKind::Softmax:
      return softmax_rows(std::move(z));
  }
  return z;
}

Eigen::VectorXd DenseLayer::forward(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  if (x.size() != in_dim()) {
    throw ShapeError(shape_message("DenseLayer::forward input", in_dim(), x.size()));
  }
  return apply_activation(activation, weights.transpose() * x + bias);
}

void validate(const Network& net) {
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    const DenseLayer& layer = net.layers[l];
    if (layer.bias.size() != layer.out_dim()) {
      throw ShapeError(shape_message("bias length", layer.out_dim(), layer.bias.size()));
    }
    if (l > 0 && net.layers[l - 1].out_dim() != layer.in_dim()) {
      throw ShapeError(shape_message("layer chain", net.layers[l - 1].out_dim(),
                                     layer.in_dim()));
    }
  }
}

Eigen::VectorXd forward(const Network& net, const Eigen::Ref<const Eigen::VectorXd>& x) {
  Eigen::VectorXd value = x;
  for (const DenseLayer& layer : net.layers) value = layer.forward(value);
  return value;
}

Eigen::MatrixXd forward_batch(const Network& net, Eigen::MatrixXd x) {
  for (const DenseLayer& layer : net.layers) {
    if (x.cols() != layer.in_dim()) {
      throw ShapeError(shape_message("forward_batch input", layer.in_dim(), x.cols()));
    }
    x = apply_activation_rows(layer.activation,
                              (x * layer.weights).rowwise() + layer.bias.transpose());
  }
  return x;
}

Network make_network(const std::vector<Eigen::Index>& widths,
                     const std::vector<ActivationKind>& activations, Rng& rng) {
  if (widths.size() < 2 || activations.size() != widths.size() - 1) {
    throw std::invalid_argument("make_network: need n+1 widths for n activations");
  }
  Network net;
  net.layers.reserve(activations.size());
  for (std::size_t l = 0; l < activations.size(); ++l) {
    DenseLayer layer;
    const Eigen::Index in = widths[l];
    const Eigen::Index out = widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(in));
    layer.weights = Eigen::MatrixXd::NullaryExpr(
        in, out, [&]() { return (2.0 * rng.uniform() - 1.0) * bound; });
    layer.bias = Eigen::VectorXd::Zero(out);
    layer.activation = activations[l];
    net.layers.push_back(std::move(layer));
  }
  return net;
}

double cross_entropy_loss(const Network& net, const LabeledDataset& data) {
  check_trainable(net, data);
  const Eigen::MatrixXd logits = final_logits(net, data.features);
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i) {
    const double max = logits.row(i).maxCoeff();
    const double lse = max + std::log((logits.row(i).array() - max).exp().sum());
    total += lse - logits(i, data.labels[static_cast<std::size_t>(i)]);
  }
  return total / static_cast<double>(logits.rows());
}

double accuracy(const Network& net, const LabeledDataset& data) {
  if (data.size() == 0) throw std::invalid_argument("accuracy: dataset is empty");
  const Eigen::MatrixXd out = forward_batch(net, data.features);
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < out.rows(); ++i) {
    Eigen::Index predicted = 0;
    out.row(i).maxCoeff(&predicted);  // first maximum, so lowest index wins ties
    if (predicted == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(out.rows());
}

Network train_sgd(Network net, const LabeledDataset& data, const TrainConfig& cfg) {
  if (cfg.batch_size <= 0 || cfg.learning_rate <= 0.0 || cfg.epochs < 0) {
    throw std::invalid_argument("train_sgd: batch size and learning rate must be positive");
  }
  check_trainable(net, data);
  if (cfg.epochs == 0) return net;

  const Eigen::Index n = data.size();
  const std::size_t layer_count = net.layers.size();
  Rng rng(cfg.seed);
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});

  // Per-batch scratch: pre-activations (z) and activations (x) per layer.
  std::vector<Eigen::MatrixXd> z(layer_count), x(layer_count + 1);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) {
      std::swap(order[i - 1], order[rng.uniform_int(i)]);
    }
    for (Eigen::Index start = 0; start < n; start += cfg.batch_size) {
      const Eigen::Index batch = std::min<Eigen::Index>(cfg.batch_size, n - start);

      x[0].resize(batch, data.features.cols());
      for (Eigen::Index r = 0; r < batch; ++r) {
        x[0].row(r) = data.features.row(order[static_cast<std::size_t>(start + r)]);
      }

      for (std::size_t l = 0; l < layer_count; ++l) {
        const DenseLayer& layer = net.layers[l];
        z[l] = (x[l] * layer.weights).rowwise() + layer.bias.transpose();
        x[l + 1] = l + 1 == layer_count ? z[l]  // final activation fused into the loss
                                        : apply_activation_rows(layer.activation, z[l]);
      }

      // Gradient of mean cross-entropy wrt final-layer logits.
      Eigen::MatrixXd grad = softmax_rows(z[layer_count - 1]);
      for (Eigen::Index r = 0; r < batch; ++r) {
        grad(r, data.labels[static_cast<std::size_t>(order[static_cast<std::size_t>(start + r)])]) -= 1.0;
      }
      grad /= static_cast<double>(batch);

      for (std::size_t l = layer_count; l-- > 0;) {
        DenseLayer& layer = net.layers[l];
        const Eigen::MatrixXd weight_grad = x[l].transpose() * grad;
        const Eigen::VectorXd bias_grad = grad.colwise().sum();
        if (l > 0) {
          grad = grad * layer.weights.transpose();
          if (net.layers[l - 1].activation == ActivationKind::ReLU) {
            grad = grad.cwiseProduct((z[l - 1].array() > 0.0).cast<double>().matrix());
          }
        }
        layer.weights.noalias() -= cfg.learning_rate * weight_grad;
        layer.bias -= cfg.learning_rate * bias_grad;
      }
    }
  }
  return net;
}

void write_network(std::ostream& out, const Network& net) {
  validate(net);
  out.write(kMagic, sizeof kMagic);
  write_raw(out, kWeightFormatVersion);
  write_raw(out, static_cast<std::uint32_t>(net.layers.size()));
  for (const DenseLayer& layer : net.layers) {
    write_raw(out, static_cast<std::uint32_t>(layer.in_dim()));
    write_raw(out, static_cast<std::uint32_t>(layer.out_dim()));
    write_raw(out, static_cast<std::uint8_t>(layer.activation));
    const RowMajorMatrix weights = layer.weights;
    out.write(reinterpret_cast<const char*>(weights.data()),
              static_cast<std::streamsize>(sizeof(double) * weights.size()));
    out.write(reinterpret_cast<const char*>(layer.bias.data()),
              static_cast<std::streamsize>(sizeof(double) * layer.bias.size()));
  }
}

Network read_network(std::istream& in) {
  const std::uint64_t magic_at = stream_pos(in);
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != static_cast<std::streamsize>(sizeof magic) ||
      !std::equal(std::begin(magic), std::end(magic), std::begin(kMagic))) {
    throw ParseError("bad magic, not a weight file", magic_at);
  }
  const auto version = read_raw<std::uint32_t>(in, "format version");
  if (version != kWeightFormatVersion) {
    throw UnsupportedVersionError(version, kWeightFormatVersion);
  }
  const std::uint64_t count_at = stream_pos(in);
  const auto layer_count = read_raw<std::uint32_t>(in, "layer count");
  if (layer_count > kMaxLayers) {
    throw ParseError("implausible layer count " + std::to_string(layer_count), count_at);
  }

  Network net;
  net.layers.reserve(layer_count);
  for (std::uint32_t l = 0; l < layer_count; ++l) {
    const std::uint64_t dims_at = stream_pos(in);
    const auto in_dim = read_raw<std::uint32_t>(in, "layer input width");
    const auto out_dim = read_raw<std::uint32_t>(in, "layer output width");
    if (in_dim == 0 || out_dim == 0 || in_dim > kMaxWidth || out_dim > kMaxWidth) {
      throw ParseError("implausible layer dimensions", dims_at);
    }
    const std::uint64_t tag_at = stream_pos(in);
    const auto tag = read_raw<std::uint8_t>(in, "activation tag");
    if (tag > static_cast<std::uint8_t>(ActivationKind::Softmax)) {
      throw ParseError("unknown activation tag " + std::to_string(tag), tag_at);
    }

    DenseLayer layer;
    RowMajorMatrix weights(in_dim, out_dim);
    read_f64_block(in, weights.data(), weights.size(), "weights");
    layer.weights = weights;
    layer.bias.resize(out_dim);
    read_f64_block(in, layer.bias.data(), static_cast<std::size_t>(out_dim), "bias");
    layer.activation = static_cast<ActivationKind>(tag);
    net.layers.push_back(std::move(layer));
  }
  validate(net);
  return net;
}

void save_weights(const Network& net, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
  write_network(out, net);
  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Network load_weights(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());
  return read_network(in);
}

}  // namespace aslsim
