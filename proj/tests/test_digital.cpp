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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "aslsim/digital.hpp"

using namespace aslsim;

namespace {

// 15 kHz subcarriers, 1 ms slots, 0 dB mean SNR at 1 mW.
RadioConfig reference_radio() {
  RadioConfig radio;
  radio.subcarriers = 128;
  radio.bandwidth_hz = 15e3;
  radio.slot_duration_s = 1e-3;
  radio.max_power_w = 1e-3;
  radio.noise_psd = 1e-3 / 15e3;
  radio.deep_fade_threshold = 0.2;
  return radio;
}

GainSource unit_gains(int allocation) {
  return [allocation](std::int64_t) { return Eigen::ArrayXd::Ones(allocation); };
}

}  // namespace

TEST_CASE("shannon rate basics") {
  CHECK(shannon_rate(1e-3, 0.0, 1e-8, 15e3) == 0.0);
  // At 0 dB with unit gain the spectral efficiency is exactly 1 bit/s/Hz.
  CHECK(shannon_rate(1e-3, 1.0, 1e-3 / 15e3, 15e3) ==
        doctest::Approx(15000.0).epsilon(1e-12));
  const double low = shannon_rate(1e-3, 1.0, 1e-8, 15e3);
  const double high = shannon_rate(2e-3, 1.0, 1e-8, 15e3);
  CHECK(high > low);
  // Noiseless link: infinite for a live signal, zero for a dead one.
  CHECK(std::isinf(shannon_rate(1e-3, 1.0, 0.0, 15e3)));
  CHECK(shannon_rate(1e-3, 0.0, 0.0, 15e3) == 0.0);
}

TEST_CASE("upload duration on a deterministic unit channel") {
  const RadioConfig radio = reference_radio();
  SUBCASE("empty payload needs no slots") {
    CHECK(upload_duration(0, 1, radio, 1000, unit_gains(1)).value() == 0);
  }
  SUBCASE("15 bits per slot carries 30 bits in two slots") {
    CHECK(upload_duration(30, 1, radio, 1000, unit_gains(1)).value() == 2);
  }
  SUBCASE("21 subcarriers move a 1024-bit payload in four slots") {
    // 21 * 15 = 315 bits per slot; ceil(1024 / 315) = 4.
    CHECK(upload_duration(1024, 21, radio, 1000, unit_gains(21)).value() == 4);
  }
  SUBCASE("a dead channel hits the guard and reports undeliverable") {
    const GainSource dead = [](std::int64_t) { return Eigen::ArrayXd::Zero(1); };
    CHECK_FALSE(upload_duration(10, 1, radio, 50, dead).has_value());
  }
}

TEST_CASE("duration is monotone in the payload for a fixed gain sequence") {
  const RadioConfig radio = reference_radio();
  // Deterministic pseudo-fading shared by every payload size.
  const GainSource fading = [](std::int64_t slot) {
    Eigen::ArrayXd g(3);
    g << 0.2 + 0.1 * static_cast<double>(slot % 5), 1.0, 2.0;
    return g;
  };
  std::int64_t previous = 0;
  for (std::int64_t payload = 0; payload <= 4000; payload += 250) {
    const auto tau = upload_duration(payload, 3, radio, 100000, fading);
    REQUIRE(tau.has_value());
    CHECK(*tau >= previous);
    previous = *tau;
  }
}

TEST_CASE("raising transmit power never slows an upload") {
  RadioConfig radio = reference_radio();
  // One shared fading trace, replayed at each power level.
  Rng trace_rng(301);
  std::vector<Eigen::ArrayXd> trace;
  for (int slot = 0; slot < 4000; ++slot) {
    Eigen::ArrayXd g(5);
    for (int i = 0; i < 5; ++i) {
      const double re = trace_rng.gaussian();
      const double im = trace_rng.gaussian();
      g(i) = 0.5 * (re * re + im * im);
    }
    trace.push_back(g);
  }
  const GainSource replay = [&trace](std::int64_t slot) {
    return trace[static_cast<std::size_t>(slot)];
  };

  std::int64_t previous = std::numeric_limits<std::int64_t>::max();
  for (double power = 0.25e-3; power <= 8e-3; power *= 2.0) {
    radio.max_power_w = power;
    const auto tau = upload_duration(1024, 5, radio, 4000, replay);
    REQUIRE(tau.has_value());
    CHECK(*tau <= previous);
    previous = *tau;
  }
}

TEST_CASE("static allocation splits subcarriers evenly") {
  CHECK(subcarriers_per_agent(128, 1) == 128);
  CHECK(subcarriers_per_agent(128, 24) == 5);  // 8 idle
  CHECK(subcarriers_per_agent(128, 128) == 1);
  CHECK(subcarriers_per_agent(128, 200) == 1);
}

TEST_CASE("digital round aggregates per-agent uploads") {
  DigitalConfig cfg;
  cfg.radio = reference_radio();
  Rng rng(302);
  const UploadOutcome outcome = digital_round(24, cfg, rng);
  REQUIRE(outcome.tau_hat.size() == 24);
  std::int64_t max_tau = 0;
  for (std::int64_t tau : outcome.tau_hat) {
    CHECK(tau >= 1);
    max_tau = std::max(max_tau, tau);
  }
  CHECK(outcome.tau_bar == max_tau);  // single batch: round ends with the slowest
  CHECK(outcome.channel_uses == outcome.tau_bar * 128);
  CHECK_FALSE(outcome.undeliverable);
}

TEST_CASE("agents beyond the subcarrier count upload in batches") {
  DigitalConfig cfg;
  cfg.radio = reference_radio();
  cfg.radio.subcarriers = 8;
  Rng rng(303);
  const UploadOutcome outcome = digital_round(20, cfg, rng);  // 3 batches: 8+8+4
  std::int64_t batch_sum = 0;
  const std::int64_t batch_holders[3] = {
      *std::max_element(outcome.tau_hat.begin(), outcome.tau_hat.begin() + 8),
      *std::max_element(outcome.tau_hat.begin() + 8, outcome.tau_hat.begin() + 16),
      *std::max_element(outcome.tau_hat.begin() + 16, outcome.tau_hat.end())};
  for (std::int64_t tau : batch_holders) batch_sum += tau;
  CHECK(outcome.tau_bar == batch_sum);
  CHECK(outcome.channel_uses == outcome.tau_bar * 8);
}

TEST_CASE("expected digital cost grows with the agent count") {
  // Monte Carlo means with a 3-sigma margin.
  DigitalConfig cfg;
  cfg.radio = reference_radio();
  const int agent_grid[] = {2, 6, 24};
  const int runs = 200;
  double mean[3] = {0, 0, 0};
  double var[3] = {0, 0, 0};
  for (int g = 0; g < 3; ++g) {
    std::vector<double> costs;
    Rng rng(400 + static_cast<std::uint64_t>(g));
    for (int r = 0; r < runs; ++r) {
      costs.push_back(static_cast<double>(digital_round(agent_grid[g], cfg, rng).channel_uses));
    }
    for (double c : costs) mean[g] += c;
    mean[g] /= runs;
    for (double c : costs) var[g] += (c - mean[g]) * (c - mean[g]);
    var[g] /= (runs - 1);
  }
  for (int g = 0; g + 1 < 3; ++g) {
    const double sigma = std::sqrt(var[g] / runs + var[g + 1] / runs);
    CHECK(mean[g + 1] >= mean[g] - 3.0 * sigma);
  }
}

TEST_CASE("budgeted analog completion is exact arithmetic") {
  // floor(2e6 / 256) = 7812 tasks; 5e6 covers all 10000.
  const BudgetLedger tight = run_budgeted_analog(2'000'000, 10'000, 256, 128);
  CHECK(tight.completed_tasks == 7812);
  CHECK(tight.consumed == 7812 * 256);
  CHECK(tight.consumed <= tight.total_cus);

  const BudgetLedger loose = run_budgeted_analog(5'000'000, 10'000, 256, 128);
  CHECK(loose.completed_tasks == 10'000);

  const BudgetLedger none = run_budgeted_analog(0, 10'000, 256, 128);
  CHECK(none.completed_tasks == 0);
  CHECK(none.consumed == 0);
}

TEST_CASE("budgeted digital runs never overshoot the budget") {
  DigitalConfig cfg;
  cfg.radio = reference_radio();
  Rng rng(304);
  const BudgetLedger ledger = run_budgeted_digital(300'000, 10'000, 6, cfg, rng);
  CHECK(ledger.consumed <= ledger.total_cus);
  CHECK(ledger.completed_tasks > 0);
  CHECK(ledger.completed_tasks < 10'000);
}
