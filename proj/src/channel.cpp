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

#include "aslsim/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace aslsim {

void validate(const RadioConfig& radio) {
  if (radio.subcarriers < 1) throw std::invalid_argument("radio: subcarriers must be >= 1");
  if (!(radio.bandwidth_hz > 0.0)) throw std::invalid_argument("radio: bandwidth must be positive");
  if (!(radio.slot_duration_s > 0.0)) {
    throw std::invalid_argument("radio: slot duration must be positive");
  }
  if (!(radio.noise_psd >= 0.0)) throw std::invalid_argument("radio: noise psd must be >= 0");
  if (!(radio.max_power_w > 0.0)) throw std::invalid_argument("radio: power must be positive");
  if (!(radio.deep_fade_threshold >= 0.0)) {
    throw std::invalid_argument("radio: deep-fade threshold must be >= 0");
  }
}

ChannelRealization draw_channel(Rng& rng, int agents, int subcarriers) {
  if (agents < 1 || subcarriers < 1) {
    throw std::invalid_argument("draw_channel: sizes must be >= 1");
  }
  constexpr double kInvSqrt2 = 0.70710678118654752440;
  ChannelRealization gains(agents, subcarriers);
  // Row-major fill order so the draw sequence is independent of Eigen's
  // storage layout.
  for (int m = 0; m < agents; ++m) {
    for (int i = 0; i < subcarriers; ++i) {
      const double re = rng.gaussian();
      const double im = rng.gaussian();
      gains(m, i) = std::complex<double>(re * kInvSqrt2, im * kInvSqrt2);
    }
  }
  return gains;
}

FadeMask deep_fade_mask(const ChannelRealization& gains, double threshold) {
  return gains.array().abs2() <= threshold;
}

double fade_fraction(const FadeMask& mask) {
  if (mask.size() == 0) return 0.0;
  return static_cast<double>(mask.count()) / static_cast<double>(mask.size());
}

std::complex<double> noise_sample(Rng& rng, double variance) {
  if (variance < 0.0) throw std::invalid_argument("noise_sample: negative variance");
  return rng.complex_gaussian(variance);
}

PowerFactor power_factor(const Eigen::Ref<const Eigen::VectorXd>& signals,
                         const Eigen::Ref<const Eigen::VectorXcd>& gains,
                         double max_power_w, double deep_fade_threshold) {
  if (signals.size() == 0) {
    throw std::invalid_argument("power_factor: active subcarrier set is empty");
  }
  if (signals.size() != gains.size()) {
    throw std::invalid_argument("power_factor: signal and gain lengths disagree");
  }
  if (!(max_power_w > 0.0)) {
    throw std::invalid_argument("power_factor: power budget must be positive");
  }

  double sum = 0.0;
  for (Eigen::Index i = 0; i < signals.size(); ++i) {
    const double gain_sq = std::norm(gains(i));
    if (gain_sq <= deep_fade_threshold) {
      throw std::invalid_argument(
          "power_factor: deep-faded gain in the active set (subcarrier " +
          std::to_string(i) + ")");
    }
    const double inverted = signals(i) / std::abs(gains(i));
    sum += inverted * inverted;
  }
  if (sum == 0.0) return std::nullopt;  // nothing to radiate this slot
  const double mean = sum / static_cast<double>(signals.size());
  return std::sqrt(max_power_w / mean);
}

PowerFactor global_alpha(const std::vector<PowerFactor>& factors) {
  if (factors.empty()) throw std::invalid_argument("global_alpha: no participants");
  PowerFactor result;
  for (const PowerFactor& factor : factors) {
    if (!factor) continue;
    if (!result || *factor < *result) result = factor;
  }
  return result;
}

}  // namespace aslsim
