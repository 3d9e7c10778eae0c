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

#include "aslsim/dataset.hpp"

#include <cmath>
#include <stdexcept>

namespace aslsim {

namespace {

// Class c sits on coordinate axis (c mod dim), pushed further out on each
// wrap so means never collide.
Eigen::VectorXd class_mean(int label, int dim, double separation) {
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
  const int axis = label % dim;
  const double ring = 1.0 + static_cast<double>(label / dim);
  mean(axis) = separation * ring;
  return mean;
}

}  // namespace

SyntheticDataset generate_dataset(Rng& rng, const DatasetParams& params) {
  if (params.classes < 2) throw std::invalid_argument("dataset: need at least 2 classes");
  if (params.dim < 1) throw std::invalid_argument("dataset: dimension must be >= 1");
  if (params.samples < params.classes) {
    throw std::invalid_argument("dataset: need at least one sample per class");
  }
  if (params.agents < 1) throw std::invalid_argument("dataset: need at least one agent");
  if (params.distortion < 0.0) throw std::invalid_argument("dataset: negative distortion");

  const Eigen::Index n = params.samples;
  const Eigen::Index d = params.dim;
  const auto agents = static_cast<std::size_t>(params.agents);

  // One fixed distortion map per agent; scaled by 1/sqrt(d) so the distorted
  // component has roughly the latent's magnitude.
  std::vector<Eigen::MatrixXd> distortions;
  distortions.reserve(agents);
  const double map_scale = 1.0 / std::sqrt(static_cast<double>(d));
  for (std::size_t m = 0; m < agents; ++m) {
    distortions.push_back(Eigen::MatrixXd::NullaryExpr(
        d, d, [&]() { return rng.gaussian() * map_scale; }));
  }

  SyntheticDataset data;
  data.classes = params.classes;
  data.labels.resize(static_cast<std::size_t>(n));
  data.views.assign(agents, Eigen::MatrixXd(n, d));

  Eigen::VectorXd latent(d);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int label = static_cast<int>(i % params.classes);  // balanced by construction
    data.labels[static_cast<std::size_t>(i)] = label;
    const Eigen::VectorXd mean = class_mean(label, params.dim, params.class_separation);
    for (Eigen::Index k = 0; k < d; ++k) latent(k) = mean(k) + rng.gaussian();
    for (std::size_t m = 0; m < agents; ++m) {
      Eigen::VectorXd view = latent;
      if (params.distortion > 0.0) {
        view += params.distortion * (distortions[m] * latent);
        for (Eigen::Index k = 0; k < d; ++k) {
          view(k) += params.distortion * rng.gaussian();
        }
      }
      data.views[m].row(i) = view.transpose();
    }
  }
  return data;
}

SyntheticDataset slice(const SyntheticDataset& data, Eigen::Index start,
                       Eigen::Index count) {
  if (start < 0 || count < 0 || start + count > data.size()) {
    throw std::out_of_range("dataset slice out of range");
  }
  SyntheticDataset out;
  out.classes = data.classes;
  out.labels.assign(data.labels.begin() + start, data.labels.begin() + start + count);
  out.views.reserve(data.views.size());
  for (const Eigen::MatrixXd& view : data.views) {
    out.views.push_back(view.middleRows(start, count));
  }
  return out;
}

LabeledDataset pooled_views(const SyntheticDataset& data) {
  LabeledDataset pooled;
  pooled.classes = data.classes;
  const Eigen::Index n = data.size();
  pooled.features.resize(n * data.agents(), data.dim());
  pooled.labels.reserve(static_cast<std::size_t>(n) * data.views.size());
  for (std::size_t m = 0; m < data.views.size(); ++m) {
    pooled.features.middleRows(static_cast<Eigen::Index>(m) * n, n) = data.views[m];
    pooled.labels.insert(pooled.labels.end(), data.labels.begin(), data.labels.end());
  }
  return pooled;
}

std::vector<Eigen::VectorXd> sample_inputs(const SyntheticDataset& data,
                                           Eigen::Index sample) {
  if (sample < 0 || sample >= data.size()) {
    throw std::out_of_range("sample_inputs: index out of range");
  }
  std::vector<Eigen::VectorXd> inputs;
  inputs.reserve(data.views.size());
  for (const Eigen::MatrixXd& view : data.views) {
    inputs.push_back(view.row(sample).transpose());
  }
  return inputs;
}

}  // namespace aslsim
