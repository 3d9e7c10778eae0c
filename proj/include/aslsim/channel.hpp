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

#ifndef ASLSIM_CHANNEL_HPP
#define ASLSIM_CHANNEL_HPP

#include <Eigen/Dense>
#include <complex>
#include <optional>
#include <vector>

#include "aslsim/rng.hpp"

namespace aslsim {

/// Uplink parameters shared by the analog and digital schemes.
struct RadioConfig {
  int subcarriers = 128;
  double bandwidth_hz = 15e3;        // per subcarrier
  double slot_duration_s = 1e-3;
  double noise_psd = 0.0;            // N0 in W/Hz; zero models a noiseless link
  double max_power_w = 1e-3;         // per-agent average transmit power budget
  double deep_fade_threshold = 0.2;  // on |h|^2

  /// Receiver noise variance per subcarrier and slot.
  double noise_variance() const { return noise_psd * bandwidth_hz; }

  /// Average SNR under unit-variance fading.
  double mean_snr() const { return max_power_w / (noise_psd * bandwidth_hz); }
};

/// Throws std::invalid_argument on non-positive sizes, durations or powers.
/// A zero noise_psd and a zero deep_fade_threshold are both valid.
void validate(const RadioConfig& radio);

/// Complex block-fading gains for one slot: one row per agent, one column per
/// subcarrier.
using ChannelRealization = Eigen::MatrixXcd;

using FadeMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// I.i.d. circularly-symmetric complex Gaussian draw, zero mean and unit
/// variance per entry: (g1 + i g2)/sqrt(2) with g1, g2 standard normal.
ChannelRealization draw_channel(Rng& rng, int agents, int subcarriers);

/// masked(m, i) is true exactly when |gains(m, i)|^2 <= threshold.
FadeMask deep_fade_mask(const ChannelRealization& gains, double threshold);

/// Fraction of masked entries.
double fade_fraction(const FadeMask& mask);

/// Circularly-symmetric complex receiver noise with total variance
/// `variance` (variance/2 per real component). Exactly zero when variance is
/// zero; negative variance is rejected.
std::complex<double> noise_sample(Rng& rng, double variance);

/// A power scaling factor. Disengaged (nullopt) means the agent radiates no
/// energy this slot and therefore imposes no power limit. Kept out of
/// arithmetic paths so no infinity ever multiplies a signal.
using PowerFactor = std::optional<double>;

/// Largest scale alpha_m such that the agent's inverted signals x_i / h_i
/// meet the average power budget: alpha_m = sqrt(P / mean(|x_i / h_i|^2)).
/// `signals` and `gains` cover the agent's active subcarriers only; a gain
/// with |h|^2 <= deep_fade_threshold in that set is a contract violation.
/// All-zero signals yield the disengaged factor.
PowerFactor power_factor(const Eigen::Ref<const Eigen::VectorXd>& signals,
                         const Eigen::Ref<const Eigen::VectorXcd>& gains,
                         double max_power_w, double deep_fade_threshold);

/// min over engaged factors; disengaged when every factor is. Throws on an
/// empty participant set.
PowerFactor global_alpha(const std::vector<PowerFactor>& factors);

}  // namespace aslsim

#endif  // ASLSIM_CHANNEL_HPP
