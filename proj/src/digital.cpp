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

#include "aslsim/digital.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "aslsim/ota.hpp"

namespace aslsim {

double shannon_rate(double power_w, double gain_sq, double noise_psd,
                    double bandwidth_hz) {
  if (!(power_w > 0.0) || !(bandwidth_hz > 0.0) || noise_psd < 0.0 || gain_sq < 0.0) {
    throw std::invalid_argument("shannon_rate: invalid link parameters");
  }
  if (noise_psd == 0.0) {
    return power_w * gain_sq > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
  }
  const double snr = power_w * gain_sq / (noise_psd * bandwidth_hz);
  return bandwidth_hz * std::log2(1.0 + snr);
}

std::optional<std::int64_t> upload_duration(std::int64_t payload_bits, int allocation,
                                            const RadioConfig& radio,
                                            std::int64_t max_slots,
                                            const GainSource& gains) {
  validate(radio);
  if (allocation < 1) throw std::invalid_argument("upload_duration: allocation must be >= 1");
  if (payload_bits < 0) throw std::invalid_argument("upload_duration: negative payload");
  if (max_slots < 1) throw std::invalid_argument("upload_duration: max_slots must be >= 1");
  if (payload_bits == 0) return 0;

  double delivered_bits = 0.0;
  for (std::int64_t slot = 0; slot < max_slots; ++slot) {
    const Eigen::ArrayXd gain_sq = gains(slot);
    if (gain_sq.size() != allocation) {
      throw std::invalid_argument("upload_duration: gain source size mismatch");
    }
    double slot_rate = 0.0;
    for (Eigen::Index i = 0; i < gain_sq.size(); ++i) {
      slot_rate += shannon_rate(radio.max_power_w, gain_sq(i), radio.noise_psd,
                                radio.bandwidth_hz);
    }
    delivered_bits += slot_rate * radio.slot_duration_s;
    if (delivered_bits >= static_cast<double>(payload_bits)) return slot + 1;
  }
  return std::nullopt;
}

std::optional<std::int64_t> upload_duration(std::int64_t payload_bits, int allocation,
                                            const RadioConfig& radio,
                                            std::int64_t max_slots, Rng& rng) {
  return upload_duration(payload_bits, allocation, radio, max_slots,
                         [&rng, allocation](std::int64_t) {
                           Eigen::ArrayXd gain_sq(allocation);
                           for (int i = 0; i < allocation; ++i) {
                             const double re = rng.gaussian();
                             const double im = rng.gaussian();
                             gain_sq(i) = 0.5 * (re * re + im * im);
                           }
                           return gain_sq;
                         });
}

int subcarriers_per_agent(int subcarriers, int agents) {
  if (subcarriers < 1 || agents < 1) {
    throw std::invalid_argument("subcarriers_per_agent: sizes must be >= 1");
  }
  return agents >= subcarriers ? 1 : subcarriers / agents;
}

UploadOutcome digital_round(int agents, const DigitalConfig& cfg, Rng& rng) {
  if (agents < 1) throw std::invalid_argument("digital_round: need at least one agent");
  validate(cfg.radio);
  if (cfg.bits_per_element < 1 || cfg.elements_per_agent < 1) {
    throw std::invalid_argument("digital_round: payload dimensions must be >= 1");
  }

  const int subcarriers = cfg.radio.subcarriers;
  UploadOutcome outcome;
  outcome.tau_hat.resize(static_cast<std::size_t>(agents), 0);

  // Agents beyond the subcarrier count wait for the next batch; the round
  // lasts for the sum of batch durations.
  for (int start = 0; start < agents; start += subcarriers) {
    const int batch = std::min(subcarriers, agents - start);
    const int allocation = subcarriers_per_agent(subcarriers, batch);
    std::int64_t batch_tau = 0;
    for (int m = 0; m < batch; ++m) {
      const auto tau =
          upload_duration(cfg.payload_bits(), allocation, cfg.radio, cfg.max_slots, rng);
      const std::int64_t slots = tau.value_or(cfg.max_slots);
      if (!tau) outcome.undeliverable = true;
      outcome.tau_hat[static_cast<std::size_t>(start + m)] = slots;
      batch_tau = std::max(batch_tau, slots);
    }
    outcome.tau_bar += batch_tau;
  }
  outcome.channel_uses = outcome.tau_bar * subcarriers;
  return outcome;
}

BudgetLedger run_budgeted_analog(std::int64_t budget_cus, std::int64_t task_count,
                                 int elements, int subcarriers) {
  if (budget_cus < 0) throw std::invalid_argument("run_budgeted: negative budget");
  if (task_count < 0) throw std::invalid_argument("run_budgeted: negative task count");
  const std::int64_t per_task = channel_uses_analog(elements, subcarriers);
  BudgetLedger ledger;
  ledger.total_cus = budget_cus;
  ledger.completed_tasks = std::min(task_count, budget_cus / per_task);
  ledger.consumed = ledger.completed_tasks * per_task;
  return ledger;
}

BudgetLedger run_budgeted_digital(std::int64_t budget_cus, std::int64_t task_count,
                                  int agents, const DigitalConfig& cfg, Rng& rng) {
  if (budget_cus < 0) throw std::invalid_argument("run_budgeted: negative budget");
  if (task_count < 0) throw std::invalid_argument("run_budgeted: negative task count");
  BudgetLedger ledger;
  ledger.total_cus = budget_cus;
  while (ledger.completed_tasks < task_count) {
    const UploadOutcome outcome = digital_round(agents, cfg, rng);
    if (outcome.undeliverable) break;  // no further task can ever finish
    if (ledger.consumed + outcome.channel_uses > budget_cus) break;
    ledger.consumed += outcome.channel_uses;
    ++ledger.completed_tasks;
  }
  return ledger;
}

}  // namespace aslsim
