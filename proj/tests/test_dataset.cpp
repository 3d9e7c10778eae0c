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

#include <algorithm>
#include <cmath>
#include <vector>

#include "aslsim/dataset.hpp"

using namespace aslsim;

namespace {

DatasetParams small_params() {
  DatasetParams params;
  params.classes = 4;
  params.dim = 8;
  params.samples = 200;
  params.agents = 3;
  params.distortion = 0.3;
  params.class_separation = 4.0;
  return params;
}

}  // namespace

TEST_CASE("zero distortion gives identical views") {
  Rng rng(501);
  DatasetParams params = small_params();
  params.distortion = 0.0;
  const SyntheticDataset data = generate_dataset(rng, params);
  for (int m = 1; m < data.agents(); ++m) {
    CHECK(data.views[static_cast<std::size_t>(m)] == data.views[0]);
  }
}

TEST_CASE("generation is deterministic for a fixed seed") {
  Rng a(502), b(502);
  const SyntheticDataset first = generate_dataset(a, small_params());
  const SyntheticDataset second = generate_dataset(b, small_params());
  CHECK(first.labels == second.labels);
  for (std::size_t m = 0; m < first.views.size(); ++m) {
    CHECK(first.views[m] == second.views[m]);
  }
}

TEST_CASE("classes are balanced within one sample") {
  Rng rng(503);
  DatasetParams params = small_params();
  params.samples = 203;  // deliberately not divisible
  const SyntheticDataset data = generate_dataset(rng, params);
  std::vector<int> counts(static_cast<std::size_t>(params.classes), 0);
  for (int label : data.labels) ++counts[static_cast<std::size_t>(label)];
  const auto [lo, hi] = std::minmax_element(counts.begin(), counts.end());
  CHECK(*hi - *lo <= 1);
}

TEST_CASE("views of the same sample are positively correlated") {
  Rng rng(504);
  const SyntheticDataset data = generate_dataset(rng, small_params());
  const Eigen::MatrixXd& a = data.views[0];
  const Eigen::MatrixXd& b = data.views[1];
  const Eigen::MatrixXd ac = a.rowwise() - a.colwise().mean();
  const Eigen::MatrixXd bc = b.rowwise() - b.colwise().mean();
  const double correlation =
      (ac.array() * bc.array()).sum() /
      std::sqrt(ac.array().square().sum() * bc.array().square().sum());
  CHECK(correlation > 0.5);
}

TEST_CASE("a linear model separates well-separated classes") {
  Rng rng(505);
  DatasetParams params;
  params.classes = 2;
  params.dim = 4;
  params.samples = 400;
  params.agents = 1;
  params.distortion = 0.0;
  params.class_separation = 10.0;  // means 10+ standard deviations apart
  const SyntheticDataset data = generate_dataset(rng, params);

  // Separability certificate: project onto the difference of the class means
  // and check the gap between the classes is strictly positive.
  Eigen::VectorXd mean0 = Eigen::VectorXd::Zero(params.dim);
  Eigen::VectorXd mean1 = Eigen::VectorXd::Zero(params.dim);
  int n0 = 0, n1 = 0;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    if (data.labels[static_cast<std::size_t>(i)] == 0) {
      mean0 += data.views[0].row(i).transpose();
      ++n0;
    } else {
      mean1 += data.views[0].row(i).transpose();
      ++n1;
    }
  }
  mean0 /= n0;
  mean1 /= n1;
  const Eigen::VectorXd axis = mean1 - mean0;
  double max0 = -1e300, min1 = 1e300;
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    const double projected = data.views[0].row(i) * axis;
    if (data.labels[static_cast<std::size_t>(i)] == 0) {
      max0 = std::max(max0, projected);
    } else {
      min1 = std::min(min1, projected);
    }
  }
  REQUIRE(max0 < min1);

  Rng init(506);
  Network net = make_network({4, 2}, {ActivationKind::Softmax}, init);
  TrainConfig train;
  train.batch_size = 40;
  train.learning_rate = 0.1;
  train.epochs = 50;
  train.seed = 507;
  net = train_sgd(net, pooled_views(data), train);
  CHECK(accuracy(net, pooled_views(data)) >= 0.95);
}

TEST_CASE("slice keeps labels aligned with rows") {
  Rng rng(508);
  const SyntheticDataset data = generate_dataset(rng, small_params());
  const SyntheticDataset tail = slice(data, 150, 50);
  CHECK(tail.size() == 50);
  CHECK(tail.labels.size() == 50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    CHECK(tail.labels[static_cast<std::size_t>(i)] ==
          data.labels[static_cast<std::size_t>(150 + i)]);
    CHECK(tail.views[0].row(i) == data.views[0].row(150 + i));
  }
  CHECK_THROWS_AS(slice(data, 190, 20), std::out_of_range);
}

TEST_CASE("pooled views stack every agent's samples") {
  Rng rng(509);
  const SyntheticDataset data = generate_dataset(rng, small_params());
  const LabeledDataset pooled = pooled_views(data);
  CHECK(pooled.size() == data.size() * data.agents());
  CHECK(pooled.features.row(data.size()) == data.views[1].row(0));
  CHECK(pooled.labels[static_cast<std::size_t>(data.size())] == data.labels[0]);
}

TEST_CASE("degenerate parameters are rejected") {
  Rng rng(510);
  DatasetParams params = small_params();
  params.classes = 1;
  CHECK_THROWS_AS(generate_dataset(rng, params), std::invalid_argument);
  params = small_params();
  params.samples = 2;  // fewer than classes
  CHECK_THROWS_AS(generate_dataset(rng, params), std::invalid_argument);
}
