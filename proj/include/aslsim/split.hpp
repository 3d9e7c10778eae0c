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

#ifndef ASLSIM_SPLIT_HPP
#define ASLSIM_SPLIT_HPP

#include <Eigen/Dense>
#include <filesystem>
#include <vector>

#include "aslsim/nn.hpp"

namespace aslsim {

/// The fusion layer of the unsplit model, kept as one weight block per agent
/// so that per-agent substitution and replacement stay cheap. Block m maps
/// agent m's cut output (cut_width) into the fusion layer (agg_width); the
/// fused pre-activation is the sum of all block products plus one shared bias.
struct AggregationSpec {
  std::vector<Eigen::MatrixXd> per_agent_weights;  // each cut_width x agg_width
  Eigen::VectorXd bias;                            // agg_width
  ActivationKind activation = ActivationKind::ReLU;

  int agents() const { return static_cast<int>(per_agent_weights.size()); }
  Eigen::Index cut_width() const { return per_agent_weights.front().rows(); }
  Eigen::Index agg_width() const { return bias.size(); }
};

/// Shares one weight block across all agents.
AggregationSpec replicated_aggregation(const Eigen::MatrixXd& weights,
                                       const Eigen::VectorXd& bias,
                                       ActivationKind activation, int agents);

/// Throws ShapeError if blocks disagree in shape or with the bias length.
void validate(const AggregationSpec& agg);

/// A model split for distributed inference. Each agent runs its local segment
/// followed by a weight-only cut layer (zero bias, identity activation); the
/// server adds the shared bias, applies the fusion activation, and runs the
/// remaining layers. Summing the agents' cut outputs therefore reproduces the
/// unsplit model's fusion layer input.
struct SplitNetwork {
  std::vector<Network> agent_segments;  // per agent; may be empty (identity)
  std::vector<DenseLayer> soft_cut;     // per agent; zero bias, Identity
  Eigen::VectorXd ps_bias;
  ActivationKind ps_activation = ActivationKind::ReLU;
  Network ps_tail;

  int agents() const { return static_cast<int>(agent_segments.size()); }
  Eigen::Index cut_width() const { return soft_cut.front().in_dim(); }
  Eigen::Index agg_width() const { return ps_bias.size(); }
};

/// Structural invariants: every soft-cut layer has exactly-zero bias and
/// Identity activation, widths chain. Throws ShapeError on violation.
void validate(const SplitNetwork& split);

/// Splits the fusion layer described by `agg` between `agent_nets` and
/// `ps_tail`. Errors name the offending agent index.
SplitNetwork make_split(std::vector<Network> agent_nets, const AggregationSpec& agg,
                        Network ps_tail);

/// Agent m's transmission payload: its segment output pushed through the
/// weight-only cut layer. No bias, no nonlinearity.
Eigen::VectorXd agent_forward(const SplitNetwork& split, int agent,
                              const Eigen::Ref<const Eigen::VectorXd>& input);

/// All agents' cut outputs for one sample, one row per agent.
Eigen::MatrixXd cut_outputs(const SplitNetwork& split,
                            const std::vector<Eigen::VectorXd>& inputs);

/// Completes inference from an aggregated fusion input: activation(sum + bias)
/// followed by the server tail.
Eigen::VectorXd ps_forward(const SplitNetwork& split,
                           const Eigen::Ref<const Eigen::VectorXd>& aggregated);

/// Reference output of the unsplit model: computes the original fusion layer
/// in one place from the agents' raw inputs.
Eigen::VectorXd centralized_forward(const SplitNetwork& split,
                                    const std::vector<Eigen::VectorXd>& inputs);

/// Index of the largest probability; lowest index wins ties.
int argmax_class(const Eigen::Ref<const Eigen::VectorXd>& probabilities);

// Container format for split models: magic "ASLS", format version, agent
// count, then tagged sections (agent segments, soft cuts, server head), each
// network embedded in the weight format.
inline constexpr std::uint32_t kSplitFormatVersion = 1;

void save_split(const SplitNetwork& split, const std::filesystem::path& path);
SplitNetwork load_split(const std::filesystem::path& path);

}  // namespace aslsim

#endif  // ASLSIM_SPLIT_HPP
