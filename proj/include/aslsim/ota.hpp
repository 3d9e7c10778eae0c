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

#ifndef ASLSIM_OTA_HPP
#define ASLSIM_OTA_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "aslsim/channel.hpp"

namespace aslsim {

/// What the receiver does about contributions lost to deep fades on a
/// subcarrier: drop them (the aggregate keeps only the agents heard), or
/// substitute the average of the agents heard, realized as rescaling the
/// partial sum by agents/heard.
enum class FadingPolicy { DropFaded, SubstituteAverage };

const char* to_string(FadingPolicy policy);

struct AnalogRoundResult {
  /// Equalized fusion-layer inputs, one per transmitted element.
  Eigen::VectorXd aggregated;
  int slots_used = 0;
  std::int64_t channel_uses = 0;
  /// Negotiated scale per slot; disengaged when the slot carried no energy
  /// (its elements are erased to zero).
  std::vector<PowerFactor> alpha_per_slot;
  /// Lost (agent, element) transmission opportunities over agents * elements.
  double fade_fraction = 0.0;
  /// Realized average transmit power, slots x agents. Zero rows/entries for
  /// silent agents and erased slots.
  Eigen::MatrixXd tx_power;
};

/// Channel uses consumed by one aggregation round: whole slots are occupied,
/// so padding subcarriers in the last slot count. Independent of the number
/// of agents.
std::int64_t channel_uses_analog(int elements, int subcarriers);

/// Receiver-side correction for one element given how many of the `agents`
/// transmitters reached it. Zero transmitters yield zero under both policies.
double apply_policy(double partial_sum, int transmitting, int agents,
                    FadingPolicy policy);

/// One over-the-air aggregation round.
///
/// Element j rides subcarrier (j mod S) of slot floor(j / S). Per slot: a
/// fresh block-fading draw, per-agent power factors over the non-faded
/// subcarriers each agent actually modulates, and the global scale alpha as
/// their minimum. Every heard agent's inverted, alpha-scaled signal
/// superposes at the receiver, which equalizes by alpha, keeps the real part
/// (the payload is real, so the quadrature component is pure noise), and
/// applies the fading policy using the per-subcarrier count of agents heard.
///
/// cut_outputs has one row per agent. Deterministic given the rng state.
AnalogRoundResult analog_round(const Eigen::MatrixXd& cut_outputs,
                               const RadioConfig& radio, FadingPolicy policy,
                               Rng& rng);

}  // namespace aslsim

#endif  // ASLSIM_OTA_HPP
