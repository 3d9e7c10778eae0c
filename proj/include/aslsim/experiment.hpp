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

#ifndef ASLSIM_EXPERIMENT_HPP
#define ASLSIM_EXPERIMENT_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "aslsim/dataset.hpp"
#include "aslsim/digital.hpp"
#include "aslsim/ota.hpp"
#include "aslsim/split.hpp"

namespace aslsim {

enum class Scheme { AnalogV0, AnalogV1, Digital };

const char* to_string(Scheme scheme);
Scheme parse_scheme(const std::string& token);

/// Everything one sweep needs, read from a flat key = value config file.
/// SNR points are swept by scaling the transmit power against a fixed noise
/// floor; an "inf" entry runs the noiseless link (zero noise density).
struct ExperimentConfig {
  std::vector<int> agents_grid = {6};
  int cut_width = 32;
  int agg_width = 256;
  std::vector<double> snr_db_grid = {-20.0, 0.0, 20.0};
  std::vector<Scheme> schemes = {Scheme::AnalogV0, Scheme::AnalogV1, Scheme::Digital};
  std::vector<std::int64_t> cu_budgets = {2'000'000, 5'000'000};
  std::int64_t task_count = 10'000;
  int runs = 5;
  std::uint64_t seed = 1;

  // Synthetic multi-view dataset.
  int classes = 10;
  int latent_dim = 16;
  int train_samples = 2000;
  int test_samples = 500;
  double distortion = 0.3;
  double class_separation = 4.0;

  // Offline training of the desk-scale model.
  int epochs = 20;
  int batch_size = 100;
  double learning_rate = 0.01;

  // Radio.
  int subcarriers = 128;
  double bandwidth_hz = 15e3;
  double slot_duration_s = 1e-3;
  double noise_psd = 1e-3 / 15e3;  // 0 dB at 1 mW
  double epsilon = 0.2;
  double power_w = 1e-3;  // transmit power on the noiseless (inf SNR) link
  int bits_per_element = 32;

  // Optional pre-trained split model; trained on the fly when empty.
  std::string model_path;
};

/// Throws std::invalid_argument when grids are empty or sizes non-positive.
void validate(const ExperimentConfig& cfg);

/// Flat "key = value" lines, '#' comments, comma-separated lists. Unknown
/// keys and unparsable values are errors naming the line.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical one-line-per-key rendering; two configs hash equal exactly when
/// every effective setting matches.
std::string canonical_config(const ExperimentConfig& cfg);
std::uint64_t config_hash(const ExperimentConfig& cfg);

/// Radio parameters at one grid point: transmit power is snr * N0 * W against
/// the fixed noise floor, or the configured power on a noiseless link.
RadioConfig radio_at_snr(const ExperimentConfig& cfg, double snr_db);

/// Splits a plain network after layer `cut_index`: the layers up to the cut
/// become every agent's segment, the next layer becomes the fused layer with
/// per-agent blocks weights/agents (so identical inputs reproduce the plain
/// model), the rest becomes the server tail.
SplitNetwork split_plain_network(const Network& plain, int agents,
                                 std::size_t cut_index = 0);

struct ModelBundle {
  SyntheticDataset train_set;
  SyntheticDataset test_set;
  SplitNetwork split;
  double centralized_accuracy = 0.0;  // on the test set
};

/// Generates the multi-view data for `agents` agents and trains (or loads)
/// the split model evaluated by the sweeps.
ModelBundle prepare_model(const ExperimentConfig& cfg, int agents);

/// Test accuracy of the unsplit reference model.
double evaluate_centralized(const SplitNetwork& split, const SyntheticDataset& test);

/// Test accuracy with every sample's cut outputs carried over the air.
double evaluate_analog(const SplitNetwork& split, const SyntheticDataset& test,
                       const RadioConfig& radio, FadingPolicy policy, Rng& rng);

/// Decoding is error-free at capacity, so the digital pipeline scores exactly
/// the centralized model.
double evaluate_digital(const SplitNetwork& split, const SyntheticDataset& test);

/// CSV text: scheme,m,snr_db,run,accuracy. Analog schemes get one row per
/// (m, snr, run); the digital ceiling is SNR-independent and appears once per
/// m with an empty snr_db field. Byte-deterministic for a fixed config.
std::string run_accuracy_sweep(const ExperimentConfig& cfg);

/// CSV text: scheme,m,cu_budget,snr_db,run,completed_tasks. Analog rows carry
/// the same count across m, snr and run by construction.
std::string run_scalability_sweep(const ExperimentConfig& cfg);

}  // namespace aslsim

#endif  // ASLSIM_EXPERIMENT_HPP
