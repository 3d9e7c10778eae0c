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

#include "aslsim/ota.hpp"

#include <complex>
#include <stdexcept>

namespace aslsim {

const char* to_string(FadingPolicy policy) {
  return policy == FadingPolicy::DropFaded ? "v0" : "v1";
}

std::int64_t channel_uses_analog(int elements, int subcarriers) {
  if (elements < 1 || subcarriers < 1) {
    throw std::invalid_argument("channel_uses_analog: sizes must be >= 1");
  }
  const std::int64_t slots = (elements + subcarriers - 1) / subcarriers;
  return slots * subcarriers;
}

double apply_policy(double partial_sum, int transmitting, int agents,
                    FadingPolicy policy) {
  if (transmitting < 0 || transmitting > agents) {
    throw std::invalid_argument("apply_policy: transmitter count out of range");
  }
  if (transmitting == 0) return 0.0;
  if (policy == FadingPolicy::SubstituteAverage && transmitting < agents) {
    // Adding (agents - transmitting) copies of the heard average equals
    // scaling the partial sum by agents / transmitting.
    return partial_sum * static_cast<double>(agents) / static_cast<double>(transmitting);
  }
  return partial_sum;
}

AnalogRoundResult analog_round(const Eigen::MatrixXd& cut_outputs,
                               const RadioConfig& radio, FadingPolicy policy,
                               Rng& rng) {
  validate(radio);
  const int agents = static_cast<int>(cut_outputs.rows());
  const Eigen::Index elements = cut_outputs.cols();
  if (agents < 1) throw std::invalid_argument("analog_round: need at least one agent");
  if (elements < 1) throw std::invalid_argument("analog_round: nothing to transmit");

  const int subcarriers = radio.subcarriers;
  const int slots = static_cast<int>((elements + subcarriers - 1) / subcarriers);
  const double noise_var = radio.noise_variance();

  AnalogRoundResult result;
  result.aggregated = Eigen::VectorXd::Zero(elements);
  result.slots_used = slots;
  result.channel_uses = channel_uses_analog(static_cast<int>(elements), subcarriers);
  result.alpha_per_slot.reserve(static_cast<std::size_t>(slots));
  result.tx_power = Eigen::MatrixXd::Zero(slots, agents);

  std::int64_t lost_pairs = 0;
  std::vector<double> signal_buf;
  std::vector<std::complex<double>> gain_buf;

  for (int slot = 0; slot < slots; ++slot) {
    const Eigen::Index first = static_cast<Eigen::Index>(slot) * subcarriers;
    const Eigen::Index carried = std::min<Eigen::Index>(subcarriers, elements - first);
    const ChannelRealization gains = draw_channel(rng, agents, subcarriers);
    const FadeMask mask = deep_fade_mask(gains, radio.deep_fade_threshold);

    std::vector<PowerFactor> factors(static_cast<std::size_t>(agents));
    std::vector<double> mean_inverted_sq(static_cast<std::size_t>(agents), 0.0);
    for (int m = 0; m < agents; ++m) {
      signal_buf.clear();
      gain_buf.clear();
      for (Eigen::Index c = 0; c < carried; ++c) {
        if (mask(m, static_cast<int>(c))) continue;
        signal_buf.push_back(cut_outputs(m, first + c));
        gain_buf.push_back(gains(m, static_cast<int>(c)));
      }
      if (signal_buf.empty()) continue;  // fully faded: silent this slot
      const Eigen::Map<const Eigen::VectorXd> signals(
          signal_buf.data(), static_cast<Eigen::Index>(signal_buf.size()));
      const Eigen::Map<const Eigen::VectorXcd> active_gains(
          gain_buf.data(), static_cast<Eigen::Index>(gain_buf.size()));
      factors[static_cast<std::size_t>(m)] =
          power_factor(signals, active_gains, radio.max_power_w,
                       radio.deep_fade_threshold);
      mean_inverted_sq[static_cast<std::size_t>(m)] =
          (signals.array() / active_gains.array().abs()).square().mean();
    }

    const PowerFactor alpha = global_alpha(factors);
    result.alpha_per_slot.push_back(alpha);

    if (!alpha) {
      // No agent carried energy, so the receiver saw noise it cannot scale:
      // the slot's elements are erased.
      lost_pairs += static_cast<std::int64_t>(agents) * carried;
      continue;
    }

    for (int m = 0; m < agents; ++m) {
      result.tx_power(slot, m) =
          (*alpha) * (*alpha) * mean_inverted_sq[static_cast<std::size_t>(m)];
    }

    for (Eigen::Index c = 0; c < carried; ++c) {
      const Eigen::Index element = first + c;
      double partial_sum = 0.0;
      int transmitting = 0;
      for (int m = 0; m < agents; ++m) {
        if (mask(m, static_cast<int>(c))) {
          ++lost_pairs;
          continue;
        }
        partial_sum += cut_outputs(m, element);
        ++transmitting;
      }
      // Inversion and alpha cancel exactly for the signal part, so only the
      // receiver noise is scaled back by alpha.
      const double equalized =
          partial_sum + noise_sample(rng, noise_var).real() / *alpha;
      result.aggregated(element) =
          apply_policy(equalized, transmitting, agents, policy);
    }
  }

  result.fade_fraction = static_cast<double>(lost_pairs) /
                         (static_cast<double>(agents) * static_cast<double>(elements));
  return result;
}

}  // namespace aslsim
