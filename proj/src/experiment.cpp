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

#include "aslsim/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace aslsim {

namespace {

// Stream salts for deriving independent seeds per purpose and grid point.
constexpr std::uint64_t kDatasetSalt = 0xD5;
constexpr std::uint64_t kTrainSalt = 0x7E;
constexpr std::uint64_t kAccuracySalt = 0xAC;
constexpr std::uint64_t kScalabilitySalt = 0x5C;

std::uint64_t chain_mix(std::uint64_t seed, std::initializer_list<std::uint64_t> salts) {
  std::uint64_t value = seed;
  for (std::uint64_t salt : salts) value = Rng::mix(value, salt);
  return value;
}

std::string format_double(const char* fmt, double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, value);
  return buf;
}

std::string trim(const std::string& text) {
  const auto begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::string current;
  std::istringstream stream(text);
  while (std::getline(stream, current, ',')) items.push_back(trim(current));
  return items;
}

[[noreturn]] void config_fail(int line, const std::string& message) {
  throw std::runtime_error("config line " + std::to_string(line) + ": " + message);
}

double parse_double(const std::string& token, int line) {
  if (token == "inf") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double value = std::stod(token, &used);
    if (used != token.size()) config_fail(line, "trailing junk in number '" + token + "'");
    return value;
  } catch (const std::logic_error&) {
    config_fail(line, "expected a number, got '" + token + "'");
  }
}

long long parse_int(const std::string& token, int line) {
  try {
    std::size_t used = 0;
    const long long value = std::stoll(token, &used);
    if (used != token.size()) config_fail(line, "trailing junk in integer '" + token + "'");
    return value;
  } catch (const std::logic_error&) {
    config_fail(line, "expected an integer, got '" + token + "'");
  }
}

/// Runs fn(0..count) across hardware threads; results must land in
/// caller-owned per-index slots. The first exception wins and is rethrown.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const unsigned workers =
      std::min<unsigned>(hw == 0 ? 1 : hw, static_cast<unsigned>(count));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (std::thread& worker : pool) worker.join();
  if (failure) std::rethrow_exception(failure);
}

DatasetParams dataset_params(const ExperimentConfig& cfg, int agents) {
  DatasetParams params;
  params.classes = cfg.classes;
  params.dim = cfg.latent_dim;
  params.samples = cfg.train_samples + cfg.test_samples;
  params.agents = agents;
  params.distortion = cfg.distortion;
  params.class_separation = cfg.class_separation;
  return params;
}

}  // namespace

const char* to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::AnalogV0: return "v0";
    case Scheme::AnalogV1: return "v1";
    case Scheme::Digital: return "digital";
  }
  return "?";
}

Scheme parse_scheme(const std::string& token) {
  if (token == "v0") return Scheme::AnalogV0;
  if (token == "v1") return Scheme::AnalogV1;
  if (token == "digital") return Scheme::Digital;
  throw std::runtime_error("unknown scheme '" + token + "' (expected v0, v1 or digital)");
}

void validate(const ExperimentConfig& cfg) {
  auto fail = [](const std::string& msg) { throw std::invalid_argument("config: " + msg); };
  if (cfg.agents_grid.empty()) fail("agents list is empty");
  for (int m : cfg.agents_grid) {
    if (m < 1) fail("agent counts must be >= 1");
  }
  if (cfg.cut_width < 1 || cfg.agg_width < 1) fail("layer widths must be >= 1");
  if (cfg.snr_db_grid.empty()) fail("snr_db list is empty");
  for (double snr : cfg.snr_db_grid) {
    if (std::isnan(snr) || (std::isinf(snr) && snr < 0.0)) {
      fail("snr_db entries must be finite or inf");
    }
  }
  if (cfg.schemes.empty()) fail("policies list is empty");
  if (cfg.cu_budgets.empty()) fail("cu_budgets list is empty");
  for (std::int64_t budget : cfg.cu_budgets) {
    if (budget < 0) fail("budgets must be >= 0");
  }
  if (cfg.task_count < 0) fail("task_count must be >= 0");
  if (cfg.runs < 1) fail("runs must be >= 1");
  if (cfg.classes < 2) fail("classes must be >= 2");
  if (cfg.latent_dim < 1) fail("latent_dim must be >= 1");
  if (cfg.train_samples < cfg.classes || cfg.test_samples < 1) fail("sample counts too small");
  if (cfg.distortion < 0.0) fail("distortion must be >= 0");
  if (cfg.class_separation <= 0.0) fail("class_separation must be positive");
  if (cfg.epochs < 0 || cfg.batch_size < 1 || cfg.learning_rate <= 0.0) {
    fail("bad training settings");
  }
  if (cfg.subcarriers < 1) fail("subcarriers must be >= 1");
  if (cfg.bandwidth_hz <= 0.0 || cfg.slot_duration_s <= 0.0) fail("bad radio timing");
  if (cfg.noise_psd <= 0.0) fail("noise_psd must be positive (snr_db = inf gives a noiseless link)");
  if (cfg.epsilon < 0.0) fail("epsilon must be >= 0");
  if (cfg.power_w <= 0.0) fail("power_w must be positive");
  if (cfg.bits_per_element < 1) fail("bits_per_element must be >= 1");
}

ExperimentConfig parse_config(std::istream& in) {
  ExperimentConfig cfg;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) config_fail(line_no, "expected 'key = value'");
    const std::string key = trim(text.substr(0, eq));
    const std::string value = trim(text.substr(eq + 1));
    if (key.empty()) config_fail(line_no, "empty key");
    if (value.empty()) config_fail(line_no, "empty value for '" + key + "'");

    if (key == "agents") {
      cfg.agents_grid.clear();
      for (const std::string& item : split_list(value)) {
        cfg.agents_grid.push_back(static_cast<int>(parse_int(item, line_no)));
      }
    } else if (key == "cut_width") {
      cfg.cut_width = static_cast<int>(parse_int(value, line_no));
    } else if (key == "agg_width") {
      cfg.agg_width = static_cast<int>(parse_int(value, line_no));
    } else if (key == "snr_db") {
      cfg.snr_db_grid.clear();
      for (const std::string& item : split_list(value)) {
        cfg.snr_db_grid.push_back(parse_double(item, line_no));
      }
    } else if (key == "policies") {
      cfg.schemes.clear();
      for (const std::string& item : split_list(value)) {
        try {
          cfg.schemes.push_back(parse_scheme(item));
        } catch (const std::runtime_error& err) {
          config_fail(line_no, err.what());
        }
      }
    } else if (key == "cu_budgets") {
      cfg.cu_budgets.clear();
      for (const std::string& item : split_list(value)) {
        cfg.cu_budgets.push_back(parse_int(item, line_no));
      }
    } else if (key == "task_count") {
      cfg.task_count = parse_int(value, line_no);
    } else if (key == "runs") {
      cfg.runs = static_cast<int>(parse_int(value, line_no));
    } else if (key == "seed") {
      cfg.seed = static_cast<std::uint64_t>(parse_int(value, line_no));
    } else if (key == "classes") {
      cfg.classes = static_cast<int>(parse_int(value, line_no));
    } else if (key == "latent_dim") {
      cfg.latent_dim = static_cast<int>(parse_int(value, line_no));
    } else if (key == "train_samples") {
      cfg.train_samples = static_cast<int>(parse_int(value, line_no));
    } else if (key == "test_samples") {
      cfg.test_samples = static_cast<int>(parse_int(value, line_no));
    } else if (key == "distortion") {
      cfg.distortion = parse_double(value, line_no);
    } else if (key == "class_separation") {
      cfg.class_separation = parse_double(value, line_no);
    } else if (key == "epochs") {
      cfg.epochs = static_cast<int>(parse_int(value, line_no));
    } else if (key == "batch_size") {
      cfg.batch_size = static_cast<int>(parse_int(value, line_no));
    } else if (key == "learning_rate") {
      cfg.learning_rate = parse_double(value, line_no);
    } else if (key == "subcarriers") {
      cfg.subcarriers = static_cast<int>(parse_int(value, line_no));
    } else if (key == "bandwidth_hz") {
      cfg.bandwidth_hz = parse_double(value, line_no);
    } else if (key == "slot_duration_s") {
      cfg.slot_duration_s = parse_double(value, line_no);
    } else if (key == "noise_psd") {
      cfg.noise_psd = parse_double(value, line_no);
    } else if (key == "epsilon") {
      cfg.epsilon = parse_double(value, line_no);
    } else if (key == "power_w") {
      cfg.power_w = parse_double(value, line_no);
    } else if (key == "bits_per_element") {
      cfg.bits_per_element = static_cast<int>(parse_int(value, line_no));
    } else if (key == "model") {
      cfg.model_path = value;
    } else {
      config_fail(line_no, "unknown key '" + key + "'");
    }
  }
  validate(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config: " + path.string());
  return parse_config(in);
}

std::string canonical_config(const ExperimentConfig& cfg) {
  std::ostringstream out;
  auto put = [&out](const char* key, const std::string& value) {
    out << key << " = " << value << "\n";
  };
  auto num = [](double v) { return format_double("%.17g", v); };
  auto join_ints = [](const auto& items) {
    std::string text;
    for (std::size_t i = 0; i < items.size(); ++i) {
      if (i) text += ",";
      text += std::to_string(items[i]);
    }
    return text;
  };

  put("agents", join_ints(cfg.agents_grid));
  put("cut_width", std::to_string(cfg.cut_width));
  put("agg_width", std::to_string(cfg.agg_width));
  {
    std::string text;
    for (std::size_t i = 0; i < cfg.snr_db_grid.size(); ++i) {
      if (i) text += ",";
      text += std::isinf(cfg.snr_db_grid[i]) ? "inf" : num(cfg.snr_db_grid[i]);
    }
    put("snr_db", text);
  }
  {
    std::string text;
    for (std::size_t i = 0; i < cfg.schemes.size(); ++i) {
      if (i) text += ",";
      text += to_string(cfg.schemes[i]);
    }
    put("policies", text);
  }
  put("cu_budgets", join_ints(cfg.cu_budgets));
  put("task_count", std::to_string(cfg.task_count));
  put("runs", std::to_string(cfg.runs));
  put("seed", std::to_string(cfg.seed));
  put("classes", std::to_string(cfg.classes));
  put("latent_dim", std::to_string(cfg.latent_dim));
  put("train_samples", std::to_string(cfg.train_samples));
  put("test_samples", std::to_string(cfg.test_samples));
  put("distortion", num(cfg.distortion));
  put("class_separation", num(cfg.class_separation));
  put("epochs", std::to_string(cfg.epochs));
  put("batch_size", std::to_string(cfg.batch_size));
  put("learning_rate", num(cfg.learning_rate));
  put("subcarriers", std::to_string(cfg.subcarriers));
  put("bandwidth_hz", num(cfg.bandwidth_hz));
  put("slot_duration_s", num(cfg.slot_duration_s));
  put("noise_psd", num(cfg.noise_psd));
  put("epsilon", num(cfg.epsilon));
  put("power_w", num(cfg.power_w));
  put("bits_per_element", std::to_string(cfg.bits_per_element));
  put("model", cfg.model_path);
  return out.str();
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  // FNV-1a over the canonical rendering.
  const std::string text = canonical_config(cfg);
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

RadioConfig radio_at_snr(const ExperimentConfig& cfg, double snr_db) {
  RadioConfig radio;
  radio.subcarriers = cfg.subcarriers;
  radio.bandwidth_hz = cfg.bandwidth_hz;
  radio.slot_duration_s = cfg.slot_duration_s;
  radio.deep_fade_threshold = cfg.epsilon;
  if (std::isinf(snr_db)) {
    radio.noise_psd = 0.0;
    radio.max_power_w = cfg.power_w;
  } else {
    radio.noise_psd = cfg.noise_psd;
    radio.max_power_w =
        std::pow(10.0, snr_db / 10.0) * cfg.noise_psd * cfg.bandwidth_hz;
  }
  validate(radio);
  return radio;
}

SplitNetwork split_plain_network(const Network& plain, int agents,
                                 std::size_t cut_index) {
  validate(plain);
  if (agents < 1) throw std::invalid_argument("split_plain_network: agents must be >= 1");
  if (cut_index + 1 >= plain.layers.size()) {
    throw std::invalid_argument(
        "split_plain_network: need at least one layer after the cut");
  }

  Network segment;
  segment.layers.assign(plain.layers.begin(),
                        plain.layers.begin() + static_cast<std::ptrdiff_t>(cut_index) + 1);
  const DenseLayer& fused = plain.layers[cut_index + 1];
  Network tail;
  tail.layers.assign(plain.layers.begin() + static_cast<std::ptrdiff_t>(cut_index) + 2,
                     plain.layers.end());

  // Each agent carries weights/agents, so the fused sum over agents seeing
  // identical inputs reproduces the plain model exactly.
  const AggregationSpec agg = replicated_aggregation(
      fused.weights / static_cast<double>(agents), fused.bias, fused.activation, agents);
  std::vector<Network> segments(static_cast<std::size_t>(agents), segment);
  return make_split(std::move(segments), agg, std::move(tail));
}

ModelBundle prepare_model(const ExperimentConfig& cfg, int agents) {
  validate(cfg);
  if (agents < 1) throw std::invalid_argument("prepare_model: agents must be >= 1");

  Rng data_rng(chain_mix(cfg.seed, {kDatasetSalt, static_cast<std::uint64_t>(agents)}));
  const SyntheticDataset everything = generate_dataset(data_rng, dataset_params(cfg, agents));

  ModelBundle bundle;
  bundle.train_set = slice(everything, 0, cfg.train_samples);
  bundle.test_set = slice(everything, cfg.train_samples, cfg.test_samples);

  if (!cfg.model_path.empty()) {
    bundle.split = load_split(cfg.model_path);
    if (bundle.split.agents() != agents) {
      throw std::invalid_argument("model file was built for " +
                                  std::to_string(bundle.split.agents()) +
                                  " agents, config asks for " + std::to_string(agents));
    }
  } else {
    Rng init_rng(chain_mix(cfg.seed, {kTrainSalt, static_cast<std::uint64_t>(agents), 1}));
    Network plain = make_network(
        {cfg.latent_dim, cfg.cut_width, cfg.agg_width, cfg.classes},
        {ActivationKind::ReLU, ActivationKind::ReLU, ActivationKind::Softmax}, init_rng);
    TrainConfig train;
    train.batch_size = cfg.batch_size;
    train.learning_rate = cfg.learning_rate;
    train.epochs = cfg.epochs;
    train.seed = chain_mix(cfg.seed, {kTrainSalt, static_cast<std::uint64_t>(agents), 2});
    plain = train_sgd(plain, pooled_views(bundle.train_set), train);
    bundle.split = split_plain_network(plain, agents);
  }

  bundle.centralized_accuracy = evaluate_centralized(bundle.split, bundle.test_set);
  return bundle;
}

double evaluate_centralized(const SplitNetwork& split, const SyntheticDataset& test) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const Eigen::VectorXd probs = centralized_forward(split, sample_inputs(test, i));
    if (argmax_class(probs) == test.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double evaluate_analog(const SplitNetwork& split, const SyntheticDataset& test,
                       const RadioConfig& radio, FadingPolicy policy, Rng& rng) {
  if (test.size() == 0) throw std::invalid_argument("evaluate: empty test set");
  Eigen::Index correct = 0;
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    const Eigen::MatrixXd outputs = cut_outputs(split, sample_inputs(test, i));
    const AnalogRoundResult round = analog_round(outputs, radio, policy, rng);
    const Eigen::VectorXd probs = ps_forward(split, round.aggregated);
    if (argmax_class(probs) == test.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test.size());
}

double evaluate_digital(const SplitNetwork& split, const SyntheticDataset& test) {
  return evaluate_centralized(split, test);
}

std::string run_accuracy_sweep(const ExperimentConfig& cfg) {
  validate(cfg);

  struct Job {
    Scheme scheme = Scheme::AnalogV0;
    int agents = 0;
    std::size_t agents_idx = 0;
    double snr_db = 0.0;
    std::size_t snr_idx = 0;
    int run = 0;
    const SplitNetwork* split = nullptr;
    const SyntheticDataset* test = nullptr;
    double accuracy = 0.0;
  };

  // Models are trained up front (one per agent count); jobs then evaluate the
  // channel grid in parallel on the shared immutable bundles.
  std::vector<ModelBundle> bundles;
  bundles.reserve(cfg.agents_grid.size());
  for (int agents : cfg.agents_grid) bundles.push_back(prepare_model(cfg, agents));

  std::vector<Job> jobs;
  for (std::size_t a = 0; a < cfg.agents_grid.size(); ++a) {
    for (Scheme scheme : cfg.schemes) {
      if (scheme == Scheme::Digital) {
        Job job;
        job.scheme = scheme;
        job.agents = cfg.agents_grid[a];
        job.agents_idx = a;
        job.run = 1;
        job.split = &bundles[a].split;
        job.test = &bundles[a].test_set;
        jobs.push_back(job);
        continue;
      }
      for (std::size_t s = 0; s < cfg.snr_db_grid.size(); ++s) {
        for (int run = 1; run <= cfg.runs; ++run) {
          Job job;
          job.scheme = scheme;
          job.agents = cfg.agents_grid[a];
          job.agents_idx = a;
          job.snr_db = cfg.snr_db_grid[s];
          job.snr_idx = s;
          job.run = run;
          job.split = &bundles[a].split;
          job.test = &bundles[a].test_set;
          jobs.push_back(job);
        }
      }
    }
  }

  parallel_for(jobs.size(), [&](std::size_t i) {
    Job& job = jobs[i];
    if (job.scheme == Scheme::Digital) {
      job.accuracy = evaluate_digital(*job.split, *job.test);
      return;
    }
    // The v0/v1 pair at one grid point shares a seed, so with no fading the
    // two policies see identical channels and agree exactly.
    Rng rng(chain_mix(cfg.seed, {kAccuracySalt, job.agents_idx, job.snr_idx,
                                 static_cast<std::uint64_t>(job.run)}));
    const FadingPolicy policy = job.scheme == Scheme::AnalogV0
                                    ? FadingPolicy::DropFaded
                                    : FadingPolicy::SubstituteAverage;
    job.accuracy = evaluate_analog(*job.split, *job.test,
                                   radio_at_snr(cfg, job.snr_db), policy, rng);
  });

  std::ostringstream csv;
  csv << "scheme,m,snr_db,run,accuracy\n";
  for (const Job& job : jobs) {
    csv << to_string(job.scheme) << "," << job.agents << ",";
    if (job.scheme != Scheme::Digital) {
      csv << (std::isinf(job.snr_db) ? "inf" : format_double("%g", job.snr_db));
    }
    csv << "," << job.run << "," << format_double("%.6f", job.accuracy) << "\n";
  }
  return csv.str();
}

std::string run_scalability_sweep(const ExperimentConfig& cfg) {
  validate(cfg);

  struct Job {
    Scheme scheme = Scheme::AnalogV0;
    int agents = 0;
    std::size_t agents_idx = 0;
    std::int64_t budget = 0;
    std::size_t budget_idx = 0;
    double snr_db = 0.0;
    std::size_t snr_idx = 0;
    int run = 0;
    std::int64_t completed = 0;
  };

  std::vector<Job> jobs;
  for (std::size_t a = 0; a < cfg.agents_grid.size(); ++a) {
    for (Scheme scheme : cfg.schemes) {
      for (std::size_t b = 0; b < cfg.cu_budgets.size(); ++b) {
        for (std::size_t s = 0; s < cfg.snr_db_grid.size(); ++s) {
          for (int run = 1; run <= cfg.runs; ++run) {
            Job job;
            job.scheme = scheme;
            job.agents = cfg.agents_grid[a];
            job.agents_idx = a;
            job.budget = cfg.cu_budgets[b];
            job.budget_idx = b;
            job.snr_db = cfg.snr_db_grid[s];
            job.snr_idx = s;
            job.run = run;
            jobs.push_back(job);
          }
        }
      }
    }
  }

  parallel_for(jobs.size(), [&](std::size_t i) {
    Job& job = jobs[i];
    if (job.scheme != Scheme::Digital) {
      // Whole-slot accounting only; no randomness, no dependence on m or snr.
      job.completed = run_budgeted_analog(job.budget, cfg.task_count, cfg.agg_width,
                                          cfg.subcarriers)
                          .completed_tasks;
      return;
    }
    DigitalConfig digital;
    digital.bits_per_element = cfg.bits_per_element;
    digital.elements_per_agent = cfg.cut_width;
    digital.radio = radio_at_snr(cfg, job.snr_db);
    Rng rng(chain_mix(cfg.seed, {kScalabilitySalt, job.agents_idx, job.budget_idx,
                                 job.snr_idx, static_cast<std::uint64_t>(job.run)}));
    job.completed =
        run_budgeted_digital(job.budget, cfg.task_count, job.agents, digital, rng)
            .completed_tasks;
  });

  std::ostringstream csv;
  csv << "scheme,m,cu_budget,snr_db,run,completed_tasks\n";
  for (const Job& job : jobs) {
    csv << to_string(job.scheme) << "," << job.agents << "," << job.budget << ","
        << (std::isinf(job.snr_db) ? "inf" : format_double("%g", job.snr_db)) << ","
        << job.run << "," << job.completed << "\n";
  }
  return csv.str();
}

}  // namespace aslsim
