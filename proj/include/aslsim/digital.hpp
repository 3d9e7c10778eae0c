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

#ifndef ASLSIM_DIGITAL_HPP
#define ASLSIM_DIGITAL_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "aslsim/channel.hpp"

namespace aslsim {

/// Orthogonal-subcarrier transport of per-agent cut outputs, each element
/// quantized to a fixed bit width. Decoding is error-free at capacity, so the
/// scheme costs channel uses but never accuracy.
struct DigitalConfig {
  int bits_per_element = 32;
  int elements_per_agent = 32;
  RadioConfig radio;
  std::int64_t max_slots = 1'000'000;  // guard for vanishing rates

  std::int64_t payload_bits() const {
    return static_cast<std::int64_t>(bits_per_element) * elements_per_agent;
  }
};

/// Capacity of one subcarrier in bits per second:
/// bandwidth * log2(1 + power * gain_sq / (noise_psd * bandwidth)).
/// Zero noise density gives an infinite rate for any positive signal.
double shannon_rate(double power_w, double gain_sq, double noise_psd,
                    double bandwidth_hz);

/// Per-slot squared gains for an agent's allocated subcarriers.
using GainSource = std::function<Eigen::ArrayXd(std::int64_t slot)>;

/// Smallest whole number of slots after which the accumulated per-slot
/// Shannon throughput covers the payload. Returns nullopt (undeliverable)
/// when max_slots pass first.
std::optional<std::int64_t> upload_duration(std::int64_t payload_bits, int allocation,
                                            const RadioConfig& radio,
                                            std::int64_t max_slots,
                                            const GainSource& gains);

/// Rayleigh block-fading overload: fresh unit-variance gains every slot.
std::optional<std::int64_t> upload_duration(std::int64_t payload_bits, int allocation,
                                            const RadioConfig& radio,
                                            std::int64_t max_slots, Rng& rng);

/// Even static allocation; remainders stay idle. One subcarrier each once
/// agents outnumber subcarriers.
int subcarriers_per_agent(int subcarriers, int agents);

struct UploadOutcome {
  std::vector<std::int64_t> tau_hat;  // per-agent upload slots
  std::int64_t tau_bar = 0;           // round duration in slots
  std::int64_t channel_uses = 0;      // tau_bar * subcarriers
  bool undeliverable = false;
};

/// One full digital round: every agent uploads its payload on its own
/// subcarriers; the round lasts until the slowest agent finishes. When agents
/// outnumber subcarriers they proceed in batches and batch durations add up.
UploadOutcome digital_round(int agents, const DigitalConfig& cfg, Rng& rng);

struct BudgetLedger {
  std::int64_t total_cus = 0;
  std::int64_t consumed = 0;
  std::int64_t completed_tasks = 0;
};

/// Sequentially completes aggregation rounds until the next one would exceed
/// the budget or task_count tasks finish. Deterministic arithmetic: each task
/// costs the same whole-slot footprint.
BudgetLedger run_budgeted_analog(std::int64_t budget_cus, std::int64_t task_count,
                                 int elements, int subcarriers);

/// Same contract for the digital scheme; each task's cost is a fresh draw.
BudgetLedger run_budgeted_digital(std::int64_t budget_cus, std::int64_t task_count,
                                  int agents, const DigitalConfig& cfg, Rng& rng);

}  // namespace aslsim

#endif  // ASLSIM_DIGITAL_HPP
