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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <vector>

#include "aslsim/split.hpp"

using namespace aslsim;

namespace {

Network single_layer(Eigen::MatrixXd weights, Eigen::VectorXd bias,
                     ActivationKind activation) {
  return Network{{DenseLayer{std::move(weights), std::move(bias), activation}}};
}

Network identity_net(Eigen::Index dim) {
  return single_layer(Eigen::MatrixXd::Identity(dim, dim), Eigen::VectorXd::Zero(dim),
                      ActivationKind::Identity);
}

Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  return Eigen::MatrixXd::NullaryExpr(rows, cols,
                                      [&]() { return 2.0 * rng.uniform() - 1.0; });
}

Eigen::VectorXd random_vector(Eigen::Index n, Rng& rng) {
  return Eigen::VectorXd::NullaryExpr(n, [&]() { return 2.0 * rng.uniform() - 1.0; });
}

struct RandomInstance {
  SplitNetwork split;
  std::vector<Eigen::VectorXd> inputs;
};

// One-dense-layer segments with ReLU at the cut, per-agent fusion blocks, and
// a softmax tail: the smallest model exercising every split component.
RandomInstance random_instance(int agents, Eigen::Index cut_width,
                               Eigen::Index agg_width, Rng& rng) {
  const Eigen::Index in_dim = 3;
  const Eigen::Index classes = 4;
  std::vector<Network> segments;
  std::vector<Eigen::VectorXd> inputs;
  AggregationSpec agg;
  for (int m = 0; m < agents; ++m) {
    segments.push_back(single_layer(random_matrix(in_dim, cut_width, rng),
                                    random_vector(cut_width, rng), ActivationKind::ReLU));
    agg.per_agent_weights.push_back(random_matrix(cut_width, agg_width, rng));
    inputs.push_back(random_vector(in_dim, rng));
  }
  agg.bias = random_vector(agg_width, rng);
  agg.activation = ActivationKind::ReLU;
  Network tail = single_layer(random_matrix(agg_width, classes, rng),
                              random_vector(classes, rng), ActivationKind::Softmax);
  return RandomInstance{make_split(std::move(segments), agg, std::move(tail)),
                        std::move(inputs)};
}

// Index-loop evaluation of one weight-only cut layer, independent of Eigen.
Eigen::VectorXd naive_cut(const Eigen::MatrixXd& weights, const Eigen::VectorXd& at_cut) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(weights.cols());
  for (Eigen::Index j = 0; j < weights.cols(); ++j) {
    for (Eigen::Index k = 0; k < weights.rows(); ++k) {
      out(j) += weights(k, j) * at_cut(k);
    }
  }
  return out;
}

}  // namespace

TEST_CASE("scalar split: cut multiplies, server adds bias and activates") {
  const double w = 2.5, b = -1.0;
  AggregationSpec agg;
  agg.per_agent_weights = {Eigen::MatrixXd::Constant(1, 1, w)};
  agg.bias = Eigen::VectorXd::Constant(1, b);
  agg.activation = ActivationKind::Identity;
  SplitNetwork split = make_split({identity_net(1)}, agg, Network{});

  Eigen::VectorXd x(1);
  x << 3.0;
  const Eigen::VectorXd cut = agent_forward(split, 0, x);
  CHECK(cut(0) == w * 3.0);
  const Eigen::VectorXd out = ps_forward(split, cut);
  CHECK(out(0) == w * 3.0 + b);
}

TEST_CASE("wide fusion layer gives every agent the same output width") {
  Rng rng(40);
  const auto inst = random_instance(3, 8, 256, rng);
  for (int m = 0; m < 3; ++m) {
    CHECK(inst.split.soft_cut[static_cast<std::size_t>(m)].out_dim() == 256);
    CHECK(agent_forward(inst.split, m, inst.inputs[static_cast<std::size_t>(m)]).size() ==
          256);
  }
}

TEST_CASE("mismatched agent width is rejected naming the agent") {
  Rng rng(41);
  AggregationSpec agg;
  agg.per_agent_weights = {random_matrix(4, 2, rng), random_matrix(4, 2, rng)};
  agg.bias = random_vector(2, rng);
  std::vector<Network> segments;
  segments.push_back(identity_net(4));
  segments.push_back(identity_net(5));  // wrong: cut expects 4
  try {
    make_split(std::move(segments), agg, Network{});
    FAIL("expected ShapeError");
  } catch (const ShapeError& err) {
    CHECK(std::string(err.what()).find("agent 1") != std::string::npos);
  }
}

TEST_CASE("agent cut output is the plain weighted sum") {
  AggregationSpec agg;
  agg.per_agent_weights = {Eigen::MatrixXd::Ones(2, 1)};
  agg.bias = Eigen::VectorXd::Zero(1);
  agg.activation = ActivationKind::Identity;
  SplitNetwork split = make_split({identity_net(2)}, agg, Network{});
  Eigen::VectorXd x(2);
  x << 1.0, 2.0;
  CHECK(agent_forward(split, 0, x)(0) == 3.0);

  split.soft_cut[0].weights.setZero();
  CHECK(agent_forward(split, 0, x)(0) == 0.0);
}

TEST_CASE("cut layer agrees with the loop-based evaluation") {
  Rng rng(42);
  for (int trial = 0; trial < 25; ++trial) {
    const Eigen::MatrixXd weights = random_matrix(3, 5, rng);
    const Eigen::VectorXd seg_w_in = random_vector(4, rng);
    AggregationSpec agg;
    agg.per_agent_weights = {weights};
    agg.bias = Eigen::VectorXd::Zero(5);
    agg.activation = ActivationKind::Identity;
    Network segment = single_layer(random_matrix(4, 3, rng), random_vector(3, rng),
                                   ActivationKind::ReLU);
    const Eigen::VectorXd at_cut = forward(segment, seg_w_in);
    SplitNetwork split = make_split({std::move(segment)}, agg, Network{});

    const Eigen::VectorXd fast = agent_forward(split, 0, seg_w_in);
    const Eigen::VectorXd slow = naive_cut(weights, at_cut);
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("ps_forward identity case returns its input") {
  AggregationSpec agg;
  agg.per_agent_weights = {Eigen::MatrixXd::Identity(3, 3)};
  agg.bias = Eigen::VectorXd::Zero(3);
  agg.activation = ActivationKind::Identity;
  SplitNetwork split = make_split({identity_net(3)}, agg, Network{});
  Eigen::VectorXd fused(3);
  fused << 0.5, -2.0, 7.0;
  CHECK((ps_forward(split, fused) - fused).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("ps_forward bias-only path applies relu to the bias") {
  Eigen::VectorXd bias(3);
  bias << 1.0, -2.0, 0.5;
  AggregationSpec agg;
  agg.per_agent_weights = {Eigen::MatrixXd::Identity(3, 3)};
  agg.bias = bias;
  agg.activation = ActivationKind::ReLU;
  SplitNetwork split = make_split({identity_net(3)}, agg, Network{});
  const Eigen::VectorXd out = ps_forward(split, Eigen::VectorXd::Zero(3));
  CHECK(out(0) == 1.0);
  CHECK(out(1) == 0.0);
  CHECK(out(2) == 0.5);
}

TEST_CASE("split equivalence: summed cut outputs reproduce the unsplit model") {
  // The central identity, property-tested across the advertised grid.
  const int agent_grid[] = {1, 2, 6, 24};
  const Eigen::Index cut_grid[] = {1, 8, 32};
  const Eigen::Index agg_grid[] = {1, 16, 256};
  int seed = 0;
  for (int agents : agent_grid) {
    for (Eigen::Index cut_width : cut_grid) {
      for (Eigen::Index agg_width : agg_grid) {
        for (int rep = 0; rep < 3; ++rep) {
          Rng rng(static_cast<std::uint64_t>(1000 + seed++));
          const auto inst = random_instance(agents, cut_width, agg_width, rng);

          Eigen::VectorXd summed = Eigen::VectorXd::Zero(agg_width);
          for (int m = 0; m < agents; ++m) {
            summed += agent_forward(inst.split, m, inst.inputs[static_cast<std::size_t>(m)]);
          }
          const Eigen::VectorXd via_split = ps_forward(inst.split, summed);
          const Eigen::VectorXd reference = centralized_forward(inst.split, inst.inputs);

          CHECK((via_split - reference).cwiseAbs().maxCoeff() < 1e-9);
          CHECK(argmax_class(via_split) == argmax_class(reference));
        }
      }
    }
  }
}

TEST_CASE("soft cut structure survives every construction path") {
  Rng rng(50);
  const auto inst = random_instance(4, 8, 16, rng);
  for (const DenseLayer& cut : inst.split.soft_cut) {
    CHECK(cut.activation == ActivationKind::Identity);
    CHECK((cut.bias.array() == 0.0).all());
  }

  const auto path = std::filesystem::temp_directory_path() / "aslsim_split_struct.asls";
  save_split(inst.split, path);
  const SplitNetwork loaded = load_split(path);
  for (const DenseLayer& cut : loaded.soft_cut) {
    CHECK(cut.activation == ActivationKind::Identity);
    CHECK((cut.bias.array() == 0.0).all());
  }
  std::filesystem::remove(path);
}

TEST_CASE("single agent reduces to the concatenated network") {
  Rng rng(51);
  Network segment = single_layer(random_matrix(3, 4, rng), random_vector(4, rng),
                                 ActivationKind::ReLU);
  const Eigen::MatrixXd agg_weights = random_matrix(4, 5, rng);
  const Eigen::VectorXd agg_bias = random_vector(5, rng);
  Network tail = single_layer(random_matrix(5, 2, rng), random_vector(2, rng),
                              ActivationKind::Softmax);

  Network concatenated;
  concatenated.layers = {segment.layers[0],
                         DenseLayer{agg_weights, agg_bias, ActivationKind::ReLU},
                         tail.layers[0]};

  AggregationSpec agg;
  agg.per_agent_weights = {agg_weights};
  agg.bias = agg_bias;
  agg.activation = ActivationKind::ReLU;
  const SplitNetwork split = make_split({segment}, agg, tail);

  const Eigen::VectorXd x = random_vector(3, rng);
  const Eigen::VectorXd via_split = centralized_forward(split, {x});
  const Eigen::VectorXd via_plain = forward(concatenated, x);
  CHECK((via_split - via_plain).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("all-zero inputs yield the activated bias through the tail") {
  Rng rng(52);
  Eigen::VectorXd bias(3);
  bias << 0.7, -0.1, 0.2;
  AggregationSpec agg;
  agg.per_agent_weights = {random_matrix(2, 3, rng), random_matrix(2, 3, rng)};
  agg.bias = bias;
  agg.activation = ActivationKind::ReLU;
  // Segments without bias so zero inputs give zero cut outputs.
  auto segment = []() {
    return Network{{DenseLayer{Eigen::MatrixXd::Identity(2, 2), Eigen::VectorXd::Zero(2),
                               ActivationKind::ReLU}}};
  };
  const SplitNetwork split = make_split({segment(), segment()}, agg, Network{});
  const Eigen::VectorXd out = centralized_forward(
      split, {Eigen::VectorXd::Zero(2), Eigen::VectorXd::Zero(2)});
  const Eigen::VectorXd expected = apply_activation(ActivationKind::ReLU, bias);
  CHECK((out - expected).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("split model files round-trip") {
  Rng rng(53);
  const auto inst = random_instance(3, 4, 8, rng);
  const auto path = std::filesystem::temp_directory_path() / "aslsim_split_rt.asls";
  save_split(inst.split, path);
  const SplitNetwork loaded = load_split(path);

  REQUIRE(loaded.agents() == inst.split.agents());
  for (int m = 0; m < loaded.agents(); ++m) {
    const auto idx = static_cast<std::size_t>(m);
    CHECK(loaded.soft_cut[idx].weights == inst.split.soft_cut[idx].weights);
    REQUIRE(loaded.agent_segments[idx].layers.size() ==
            inst.split.agent_segments[idx].layers.size());
    for (std::size_t l = 0; l < loaded.agent_segments[idx].layers.size(); ++l) {
      CHECK(loaded.agent_segments[idx].layers[l].weights ==
            inst.split.agent_segments[idx].layers[l].weights);
    }
  }
  CHECK(loaded.ps_bias == inst.split.ps_bias);
  CHECK(loaded.ps_activation == inst.split.ps_activation);
  REQUIRE(loaded.ps_tail.layers.size() == inst.split.ps_tail.layers.size());

  // Behavioural check on top of the structural one.
  const Eigen::VectorXd a = centralized_forward(inst.split, inst.inputs);
  const Eigen::VectorXd b = centralized_forward(loaded, inst.inputs);
  CHECK(a == b);
  std::filesystem::remove(path);
}

TEST_CASE("hand-built splits cannot smuggle bias or activation into the cut") {
  Rng rng(54);
  const auto inst = random_instance(2, 3, 4, rng);

  SplitNetwork biased = inst.split;
  biased.soft_cut[0].bias(1) = 1e-9;  // any nonzero bias is structural corruption
  CHECK_THROWS_AS(validate(biased), ShapeError);

  SplitNetwork activated = inst.split;
  activated.soft_cut[1].activation = ActivationKind::ReLU;
  CHECK_THROWS_AS(validate(activated), ShapeError);
}

TEST_CASE("input lists must match the agent count") {
  Rng rng(55);
  const auto inst = random_instance(3, 4, 6, rng);
  std::vector<Eigen::VectorXd> two_inputs(inst.inputs.begin(), inst.inputs.begin() + 2);
  CHECK_THROWS_AS(cut_outputs(inst.split, two_inputs), ShapeError);
  CHECK_THROWS_AS(centralized_forward(inst.split, two_inputs), ShapeError);
  CHECK_THROWS_AS(agent_forward(inst.split, 3, inst.inputs[0]), std::out_of_range);
}

TEST_CASE("argmax tie-break picks the lowest index") {
  Eigen::VectorXd p(4);
  p << 0.25, 0.25, 0.25, 0.25;
  CHECK(argmax_class(p) == 0);
  p << 0.1, 0.4, 0.4, 0.1;
  CHECK(argmax_class(p) == 1);
}
