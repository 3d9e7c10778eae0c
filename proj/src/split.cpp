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

#include "aslsim/split.hpp"

#include <fstream>
#include <sstream>

namespace aslsim {

namespace {

constexpr char kSplitMagic[4] = {'A', 'S', 'L', 'S'};
constexpr std::uint8_t kSectionSegments = 1;
constexpr std::uint8_t kSectionSoftCuts = 2;
constexpr std::uint8_t kSectionServerHead = 3;
constexpr std::uint32_t kMaxAgents = 1u << 16;

[[noreturn]] void shape_fail(const std::string& msg) { throw ShapeError(msg); }

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

template <typename T>
void write_raw(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof value);
}

void expect_section(std::istream& in, std::uint8_t expected) {
  const std::uint64_t at = stream_pos(in);
  const auto tag = read_raw<std::uint8_t>(in, "section tag");
  if (tag != expected) {
    throw ParseError("unexpected section tag " + std::to_string(tag) + ", wanted " +
                         std::to_string(expected),
                     at);
  }
}

}  // namespace

AggregationSpec replicated_aggregation(const Eigen::MatrixXd& weights,
                                       const Eigen::VectorXd& bias,
                                       ActivationKind activation, int agents) {
  if (agents < 1) throw std::invalid_argument("replicated_aggregation: agents must be >= 1");
  AggregationSpec agg;
  agg.per_agent_weights.assign(static_cast<std::size_t>(agents), weights);
  agg.bias = bias;
  agg.activation = activation;
  validate(agg);
  return agg;
}

void validate(const AggregationSpec& agg) {
  if (agg.per_agent_weights.empty()) shape_fail("aggregation: no agent weight blocks");
  const Eigen::Index rows = agg.per_agent_weights.front().rows();
  for (std::size_t m = 0; m < agg.per_agent_weights.size(); ++m) {
    const auto& block = agg.per_agent_weights[m];
    if (block.rows() != rows || block.cols() != agg.bias.size()) {
      std::ostringstream msg;
      msg << "aggregation: weight block of agent " << m << " is " << block.rows() << "x"
          << block.cols() << ", expected " << rows << "x" << agg.bias.size();
      shape_fail(msg.str());
    }
  }
}

void validate(const SplitNetwork& split) {
  if (split.agent_segments.empty() ||
      split.agent_segments.size() != split.soft_cut.size()) {
    shape_fail("split: agent segment and cut layer counts disagree");
  }
  const Eigen::Index agg_width = split.ps_bias.size();
  for (std::size_t m = 0; m < split.soft_cut.size(); ++m) {
    const DenseLayer& cut = split.soft_cut[m];
    if (cut.activation != ActivationKind::Identity) {
      shape_fail("split: cut layer of agent " + std::to_string(m) +
                 " must use the identity activation");
    }
    if (!(cut.bias.array() == 0.0).all()) {
      shape_fail("split: cut layer of agent " + std::to_string(m) +
                 " must have an exactly-zero bias");
    }
    if (cut.out_dim() != agg_width) {
      std::ostringstream msg;
      msg << "split: cut layer of agent " << m << " outputs " << cut.out_dim()
          << ", expected " << agg_width;
      shape_fail(msg.str());
    }
    const Network& segment = split.agent_segments[m];
    validate(segment);
    if (!segment.empty() && segment.out_dim() != cut.in_dim()) {
      std::ostringstream msg;
      msg << "split: segment of agent " << m << " outputs " << segment.out_dim()
          << ", cut layer expects " << cut.in_dim();
      shape_fail(msg.str());
    }
  }
  validate(split.ps_tail);
  if (!split.ps_tail.empty() && split.ps_tail.in_dim() != agg_width) {
    shape_fail("split: server tail expects " + std::to_string(split.ps_tail.in_dim()) +
               " inputs, fusion width is " + std::to_string(agg_width));
  }
}

SplitNetwork make_split(std::vector<Network> agent_nets, const AggregationSpec& agg,
                        Network ps_tail) {
  validate(agg);
  if (static_cast<int>(agent_nets.size()) != agg.agents()) {
    std::ostringstream msg;
    msg << "make_split: " << agent_nets.size() << " agent networks for "
        << agg.agents() << " aggregation blocks";
    shape_fail(msg.str());
  }
  for (std::size_t m = 0; m < agent_nets.size(); ++m) {
    validate(agent_nets[m]);
    if (!agent_nets[m].empty() && agent_nets[m].out_dim() != agg.cut_width()) {
      std::ostringstream msg;
      msg << "make_split: agent " << m << " segment outputs " << agent_nets[m].out_dim()
          << ", expected " << agg.cut_width();
      shape_fail(msg.str());
    }
  }

  SplitNetwork split;
  split.agent_segments = std::move(agent_nets);
  split.soft_cut.reserve(agg.per_agent_weights.size());
  for (const Eigen::MatrixXd& block : agg.per_agent_weights) {
    split.soft_cut.push_back(DenseLayer{block, Eigen::VectorXd::Zero(agg.agg_width()),
                                        ActivationKind::Identity});
  }
  split.ps_bias = agg.bias;
  split.ps_activation = agg.activation;
  split.ps_tail = std::move(ps_tail);
  validate(split);
  return split;
}

Eigen::VectorXd agent_forward(const SplitNetwork& split, int agent,
                              const Eigen::Ref<const Eigen::VectorXd>& input) {
  if (agent < 0 || agent >= split.agents()) {
    throw std::out_of_range("agent_forward: agent index " + std::to_string(agent));
  }
  const auto m = static_cast<std::size_t>(agent);
  const Eigen::VectorXd at_cut = forward(split.agent_segments[m], input);
  if (at_cut.size() != split.soft_cut[m].in_dim()) {
    std::ostringstream msg;
    msg << "agent_forward: agent " << agent << " produced " << at_cut.size()
        << " features, cut layer expects " << split.soft_cut[m].in_dim();
    throw ShapeError(msg.str());
  }
  // Weight multiplication only; the fused bias and activation live server-side.
  return split.soft_cut[m].weights.transpose() * at_cut;
}

Eigen::MatrixXd cut_outputs(const SplitNetwork& split,
                            const std::vector<Eigen::VectorXd>& inputs) {
  if (static_cast<int>(inputs.size()) != split.agents()) {
    throw ShapeError("cut_outputs: expected " + std::to_string(split.agents()) +
                     " inputs, got " + std::to_string(inputs.size()));
  }
  Eigen::MatrixXd out(split.agents(), split.agg_width());
  for (int m = 0; m < split.agents(); ++m) {
    out.row(m) = agent_forward(split, m, inputs[static_cast<std::size_t>(m)]).transpose();
  }
  return out;
}

Eigen::VectorXd ps_forward(const SplitNetwork& split,
                           const Eigen::Ref<const Eigen::VectorXd>& aggregated) {
  if (aggregated.size() != split.agg_width()) {
    std::ostringstream msg;
    msg << "ps_forward: aggregated input has length " << aggregated.size()
        << ", expected " << split.agg_width();
    throw ShapeError(msg.str());
  }
  const Eigen::VectorXd fused =
      apply_activation(split.ps_activation, aggregated + split.ps_bias);
  return forward(split.ps_tail, fused);
}

Eigen::VectorXd centralized_forward(const SplitNetwork& split,
                                    const std::vector<Eigen::VectorXd>& inputs) {
  if (static_cast<int>(inputs.size()) != split.agents()) {
    throw ShapeError("centralized_forward: expected " + std::to_string(split.agents()) +
                     " inputs, got " + std::to_string(inputs.size()));
  }
  // The original fusion layer: accumulate every agent's weighted cut output,
  // then bias, activation, and the server tail.
  Eigen::VectorXd fused_input = Eigen::VectorXd::Zero(split.agg_width());
  for (int m = 0; m < split.agents(); ++m) {
    const auto idx = static_cast<std::size_t>(m);
    const Eigen::VectorXd at_cut =
        forward(split.agent_segments[idx], inputs[idx]);
    fused_input += split.soft_cut[idx].weights.transpose() * at_cut;
  }
  return ps_forward(split, fused_input);
}

int argmax_class(const Eigen::Ref<const Eigen::VectorXd>& probabilities) {
  if (probabilities.size() == 0) {
    throw std::invalid_argument("argmax_class: empty vector");
  }
  Eigen::Index best = 0;
  probabilities.maxCoeff(&best);  // first maximum: lowest index wins ties
  return static_cast<int>(best);
}

void save_split(const SplitNetwork& split, const std::filesystem::path& path) {
  validate(split);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path.string());

  out.write(kSplitMagic, sizeof kSplitMagic);
  write_raw(out, kSplitFormatVersion);
  write_raw(out, static_cast<std::uint32_t>(split.agents()));
  write_raw(out, static_cast<std::uint32_t>(split.agg_width()));

  write_raw(out, kSectionSegments);
  for (const Network& segment : split.agent_segments) {
    write_raw(out, static_cast<std::uint8_t>(segment.empty() ? 0 : 1));
    if (!segment.empty()) write_network(out, segment);
  }

  write_raw(out, kSectionSoftCuts);
  for (const DenseLayer& cut : split.soft_cut) {
    write_network(out, Network{{cut}});
  }

  write_raw(out, kSectionServerHead);
  write_raw(out, static_cast<std::uint8_t>(split.ps_activation));
  write_raw(out, static_cast<std::uint32_t>(split.ps_bias.size()));
  out.write(reinterpret_cast<const char*>(split.ps_bias.data()),
            static_cast<std::streamsize>(sizeof(double) * split.ps_bias.size()));
  write_raw(out, static_cast<std::uint8_t>(split.ps_tail.empty() ? 0 : 1));
  if (!split.ps_tail.empty()) write_network(out, split.ps_tail);

  out.flush();
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

SplitNetwork load_split(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path.string());

  const std::uint64_t magic_at = stream_pos(in);
  char magic[4] = {};
  in.read(magic, sizeof magic);
  if (in.gcount() != static_cast<std::streamsize>(sizeof magic) ||
      !std::equal(std::begin(magic), std::end(magic), std::begin(kSplitMagic))) {
    throw ParseError("bad magic, not a split model file", magic_at);
  }
  const auto version = read_raw<std::uint32_t>(in, "split format version");
  if (version != kSplitFormatVersion) {
    throw UnsupportedVersionError(version, kSplitFormatVersion);
  }
  const std::uint64_t agents_at = stream_pos(in);
  const auto agents = read_raw<std::uint32_t>(in, "agent count");
  if (agents == 0 || agents > kMaxAgents) {
    throw ParseError("implausible agent count " + std::to_string(agents), agents_at);
  }
  const auto agg_width = read_raw<std::uint32_t>(in, "fusion width");

  SplitNetwork split;
  expect_section(in, kSectionSegments);
  split.agent_segments.reserve(agents);
  for (std::uint32_t m = 0; m < agents; ++m) {
    const auto present = read_raw<std::uint8_t>(in, "segment presence flag");
    split.agent_segments.push_back(present ? read_network(in) : Network{});
  }

  expect_section(in, kSectionSoftCuts);
  split.soft_cut.reserve(agents);
  for (std::uint32_t m = 0; m < agents; ++m) {
    const std::uint64_t at = stream_pos(in);
    Network cut = read_network(in);
    if (cut.layers.size() != 1) {
      throw ParseError("cut section must hold single-layer networks", at);
    }
    split.soft_cut.push_back(std::move(cut.layers.front()));
  }

  expect_section(in, kSectionServerHead);
  const std::uint64_t act_at = stream_pos(in);
  const auto act = read_raw<std::uint8_t>(in, "server activation tag");
  if (act > static_cast<std::uint8_t>(ActivationKind::Softmax)) {
    throw ParseError("unknown activation tag " + std::to_string(act), act_at);
  }
  split.ps_activation = static_cast<ActivationKind>(act);
  const auto bias_len = read_raw<std::uint32_t>(in, "server bias length");
  if (bias_len != agg_width) {
    throw ParseError("server bias length disagrees with fusion width", act_at);
  }
  split.ps_bias.resize(bias_len);
  const std::uint64_t bias_at = stream_pos(in);
  in.read(reinterpret_cast<char*>(split.ps_bias.data()),
          static_cast<std::streamsize>(sizeof(double) * bias_len));
  if (in.gcount() != static_cast<std::streamsize>(sizeof(double) * bias_len)) {
    throw ParseError("truncated while reading server bias",
                     bias_at + static_cast<std::uint64_t>(in.gcount()));
  }
  const auto tail_present = read_raw<std::uint8_t>(in, "tail presence flag");
  if (tail_present) split.ps_tail = read_network(in);

  validate(split);
  return split;
}

}  // namespace aslsim
