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

#include "aslsim/selftest.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "aslsim/digital.hpp"
#include "aslsim/experiment.hpp"
#include "aslsim/ota.hpp"
#include "aslsim/split.hpp"

namespace aslsim {

namespace {

struct Check {
  const char* name;
  std::function<bool()> body;
};

SplitNetwork random_split(int agents, Eigen::Index cut_width, Eigen::Index agg_width,
                          Rng& rng) {
  auto matrix = [&rng](Eigen::Index r, Eigen::Index c) {
    return Eigen::MatrixXd::NullaryExpr(r, c, [&]() { return 2.0 * rng.uniform() - 1.0; });
  };
  auto vector = [&rng](Eigen::Index n) {
    return Eigen::VectorXd::NullaryExpr(n, [&]() { return 2.0 * rng.uniform() - 1.0; });
  };
  std::vector<Network> segments;
  AggregationSpec agg;
  for (int m = 0; m < agents; ++m) {
    segments.push_back(
        Network{{DenseLayer{matrix(4, cut_width), vector(cut_width), ActivationKind::ReLU}}});
    agg.per_agent_weights.push_back(matrix(cut_width, agg_width));
  }
  agg.bias = vector(agg_width);
  agg.activation = ActivationKind::ReLU;
  Network tail{{DenseLayer{matrix(agg_width, 5), vector(5), ActivationKind::Softmax}}};
  return make_split(std::move(segments), agg, std::move(tail));
}

std::vector<Eigen::VectorXd> random_inputs(int agents, Rng& rng) {
  std::vector<Eigen::VectorXd> inputs;
  for (int m = 0; m < agents; ++m) {
    inputs.push_back(
        Eigen::VectorXd::NullaryExpr(4, [&]() { return 2.0 * rng.uniform() - 1.0; }));
  }
  return inputs;
}

bool split_equivalence() {
  for (int trial = 0; trial < 20; ++trial) {
    Rng rng(9000 + static_cast<std::uint64_t>(trial));
    const int agents = 1 + static_cast<int>(rng.uniform_int(8));
    const SplitNetwork split = random_split(agents, 6, 12, rng);
    const auto inputs = random_inputs(agents, rng);
    Eigen::VectorXd summed = Eigen::VectorXd::Zero(12);
    for (int m = 0; m < agents; ++m) summed += agent_forward(split, m, inputs[static_cast<std::size_t>(m)]);
    const Eigen::VectorXd via_split = ps_forward(split, summed);
    const Eigen::VectorXd reference = centralized_forward(split, inputs);
    if ((via_split - reference).cwiseAbs().maxCoeff() >= 1e-9) return false;
    if (argmax_class(via_split) != argmax_class(reference)) return false;
  }
  return true;
}

bool noiseless_transparency() {
  RadioConfig radio;
  radio.subcarriers = 8;
  radio.noise_psd = 0.0;
  radio.deep_fade_threshold = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    Rng rng(9100 + static_cast<std::uint64_t>(trial));
    const int agents = 1 + static_cast<int>(rng.uniform_int(6));
    const SplitNetwork split = random_split(agents, 6, 12, rng);
    const auto inputs = random_inputs(agents, rng);
    const Eigen::MatrixXd outputs = cut_outputs(split, inputs);
    const AnalogRoundResult round =
        analog_round(outputs, radio, FadingPolicy::DropFaded, rng);
    const Eigen::VectorXd over_air = ps_forward(split, round.aggregated);
    const Eigen::VectorXd reference = centralized_forward(split, inputs);
    if ((over_air - reference).cwiseAbs().maxCoeff() >= 1e-9) return false;
  }
  return true;
}

bool cost_accounting() {
  if (channel_uses_analog(256, 128) != 256) return false;
  if (channel_uses_analog(1, 128) != 128) return false;
  if (run_budgeted_analog(2'000'000, 10'000, 256, 128).completed_tasks != 7812) return false;
  if (run_budgeted_analog(5'000'000, 10'000, 256, 128).completed_tasks != 10'000) return false;
  return true;
}

bool channel_statistics() {
  Rng rng(9200);
  const int draws = 200'000;
  double sum_sq = 0.0;
  long long faded = 0;
  for (int i = 0; i < draws; i += 100) {
    const ChannelRealization gains = draw_channel(rng, 10, 10);
    sum_sq += gains.array().abs2().sum();
    faded += deep_fade_mask(gains, 0.2).count();
  }
  const double mean = sum_sq / draws;
  const double fade_prob = static_cast<double>(faded) / draws;
  return std::abs(mean - 1.0) < 0.02 && std::abs(fade_prob - (1.0 - std::exp(-0.2))) < 0.01;
}

bool power_feasibility() {
  RadioConfig radio;
  radio.subcarriers = 12;
  radio.noise_psd = 1e-9;
  radio.max_power_w = 1e-3;
  radio.deep_fade_threshold = 0.2;
  Rng rng(9300);
  for (int trial = 0; trial < 200; ++trial) {
    const int agents = 1 + static_cast<int>(rng.uniform_int(6));
    const Eigen::MatrixXd outputs = Eigen::MatrixXd::NullaryExpr(
        agents, 12, [&]() { return 4.0 * rng.uniform() - 2.0; });
    const AnalogRoundResult round =
        analog_round(outputs, radio, FadingPolicy::SubstituteAverage, rng);
    for (int slot = 0; slot < round.slots_used; ++slot) {
      if (!round.alpha_per_slot[static_cast<std::size_t>(slot)]) continue;
      const double peak = round.tx_power.row(slot).maxCoeff();
      if (peak > radio.max_power_w + 1e-12) return false;
      if (std::abs(peak - radio.max_power_w) > 1e-9 * radio.max_power_w) return false;
    }
  }
  return true;
}

bool substitute_average_algebra() {
  const int agents = 4;
  Eigen::VectorXd values(6);
  values << 1.0, -0.5, 2.25, 0.125, -3.75, 1.5;
  Eigen::MatrixXd outputs(agents, 6);
  for (int m = 0; m < agents; ++m) outputs.row(m) = values.transpose();
  RadioConfig radio;
  radio.subcarriers = 6;
  radio.noise_psd = 0.0;
  radio.deep_fade_threshold = 0.2;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(9400 + static_cast<std::uint64_t>(trial));
    const AnalogRoundResult round =
        analog_round(outputs, radio, FadingPolicy::SubstituteAverage, rng);
    if (!round.alpha_per_slot[0]) continue;
    for (Eigen::Index j = 0; j < 6; ++j) {
      if (round.aggregated(j) != agents * values(j) && round.aggregated(j) != 0.0) {
        return false;
      }
    }
  }
  return true;
}

bool weight_roundtrip() {
  Rng rng(9500);
  const Network net = make_network(
      {5, 7, 3}, {ActivationKind::ReLU, ActivationKind::Softmax}, rng);
  const auto path = std::filesystem::temp_directory_path() / "aslsim_selftest.aslw";
  save_weights(net, path);
  const Network loaded = load_weights(path);
  std::filesystem::remove(path);
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (loaded.layers[l].weights != net.layers[l].weights) return false;
    if (loaded.layers[l].bias != net.layers[l].bias) return false;
  }
  return true;
}

}  // namespace

bool run_selftest(std::ostream& out) {
  const std::vector<Check> checks = {
      {"split equivalence", split_equivalence},
      {"noiseless transparency", noiseless_transparency},
      {"channel-use accounting", cost_accounting},
      {"fading statistics", channel_statistics},
      {"power feasibility", power_feasibility},
      {"substitute-average algebra", substitute_average_algebra},
      {"weight file round-trip", weight_roundtrip},
  };
  bool all_ok = true;
  for (const Check& check : checks) {
    bool ok = false;
    try {
      ok = check.body();
    } catch (const std::exception& err) {
      out << "fail  " << check.name << " (" << err.what() << ")\n";
      all_ok = false;
      continue;
    }
    out << (ok ? "ok    " : "fail  ") << check.name << "\n";
    all_ok = all_ok && ok;
  }
  return all_ok;
}

}  // namespace aslsim
