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

#ifndef ASLSIM_DATASET_HPP
#define ASLSIM_DATASET_HPP

#include <Eigen/Dense>
#include <vector>

#include "aslsim/nn.hpp"
#include "aslsim/rng.hpp"

namespace aslsim {

/// Correlated multi-view classification data: each sample is one latent point
/// seen by every agent through its own fixed linear distortion plus noise,
/// standing in for several sensors observing the same scene.
struct SyntheticDataset {
  std::vector<Eigen::MatrixXd> views;  // one (samples x dim) matrix per agent
  std::vector<int> labels;             // shared across views
  int classes = 0;

  int agents() const { return static_cast<int>(views.size()); }
  Eigen::Index size() const { return views.empty() ? 0 : views.front().rows(); }
  Eigen::Index dim() const { return views.empty() ? 0 : views.front().cols(); }
};

struct DatasetParams {
  int classes = 10;
  int dim = 16;
  int samples = 2500;
  int agents = 6;
  double distortion = 0.3;        // 0 makes all views identical
  double class_separation = 4.0;  // distance scale between class means
};

/// Class-conditional unit-variance Gaussians around axis-aligned means,
/// class-balanced within one sample, deterministic given the rng seed.
SyntheticDataset generate_dataset(Rng& rng, const DatasetParams& params);

/// First `count` samples starting at `start`, all views.
SyntheticDataset slice(const SyntheticDataset& data, Eigen::Index start,
                       Eigen::Index count);

/// Every agent's view of every sample stacked as independent labeled samples.
LabeledDataset pooled_views(const SyntheticDataset& data);

/// The per-agent input list for one sample.
std::vector<Eigen::VectorXd> sample_inputs(const SyntheticDataset& data,
                                           Eigen::Index sample);

}  // namespace aslsim

#endif  // ASLSIM_DATASET_HPP
