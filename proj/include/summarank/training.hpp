/* Copyright 2026 The summarank Authors
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

#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "summarank/candidates.hpp"
#include "summarank/errors.hpp"
#include "summarank/evaluation.hpp"
#include "summarank/features.hpp"
#include "summarank/moe_net.hpp"
#include "summarank/parallel.hpp"
#include "summarank/rng.hpp"

namespace summarank {

struct TrainConfig {
  std::size_t epochs = 5;
  std::size_t batch_size = 32;  // examples per step
  std::size_t m_top = 1;
  std::size_t m_bottom = 1;
  std::vector<std::string> train_methods;
  std::vector<std::string> metrics;
  double warmup_fraction = 0.05;
  double peak_lr = 1e-3;
  std::uint64_t seed = 0;
  bool full_pool_labels = false;
  std::size_t workers = 1;

  void validate() const {
    require(batch_size >= 1, "batch_size must be at least 1");
    require(!train_methods.empty(), "the training method set is empty");
    require(!metrics.empty(), "the metric set is empty");
    require(peak_lr > 0.0, "peak learning rate must be positive");
    require(warmup_fraction >= 0.0 && warmup_fraction <= 1.0, "warmup fraction must lie in [0, 1]");
  }
};

// ---------------------------------------------------------------------------
// Training pairs

/// One training candidate with its per-metric labels.
struct TrainingPair {
  std::size_t example = 0;
  std::size_t candidate = 0;
  std::vector<int> labels;
};

/// Sampled candidates of every example, grouped per example in dataset order.
inline std::vector<std::vector<TrainingPair>> sample_all_pairs(const Dataset& dataset, const TrainConfig& config) {
  std::vector<std::vector<TrainingPair>> groups(dataset.size());
  parallel_for(dataset.size(), config.workers, [&](std::size_t e) {
    const auto& example = dataset[e];
    const auto pool = merge_pools(example, config.train_methods);
    const auto subset =
        sample_training_candidates(example, pool, config.m_top, config.m_bottom, config.metrics, config.full_pool_labels);
    for (std::size_t i = 0; i < subset.candidates.size(); ++i)
      groups[e].push_back({e, subset.candidates[i], subset.labels[i]});
  });
  for (const auto& group : groups)
    for (const auto& pair : group) {
      const auto& method = dataset[pair.example].candidates[pair.candidate].method;
      if (std::find(config.train_methods.begin(), config.train_methods.end(), method) == config.train_methods.end())
        throw ValidationError("training pair from method '" + method + "' outside the training set");
    }
  return groups;
}

/// Example visiting order for `epoch` (0-based), a permutation drawn from the
/// run seed.
inline std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::size_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(mix_seed(seed, 0x5348554646ULL + epoch));
  rng.shuffle(std::span<std::size_t>(order));
  return order;
}

/// The pair stream of one epoch: sampled pairs of every example, examples
/// visited in the epoch's shuffled order.
inline std::vector<TrainingPair> build_training_pairs(const Dataset& dataset, const TrainConfig& config,
                                                      std::size_t epoch = 0) {
  config.validate();
  const auto groups = sample_all_pairs(dataset, config);
  std::vector<TrainingPair> stream;
  for (std::size_t e : epoch_order(dataset.size(), config.seed, epoch))
    stream.insert(stream.end(), groups[e].begin(), groups[e].end());
  return stream;
}

inline std::size_t steps_per_epoch(std::size_t examples, std::size_t batch_size) {
  return (examples + batch_size - 1) / batch_size;
}

// ---------------------------------------------------------------------------
// Training loop

struct Checkpoint {
  RerankerModel model;
  std::size_t epoch = 0;          // 0 is the initialization
  double validation_score = 0.0;  // sum over metrics of the mean selected score
  double train_loss = 0.0;        // mean batch loss over the epoch
};

struct TrainResult {
  std::vector<Checkpoint> checkpoints;
  std::size_t best = 0;

  const Checkpoint& selected() const { return checkpoints.at(best); }
};

/// Sum over metrics of the mean raw score of the re-ranker's selections.
inline double validation_score(const RerankerModel& model, const Dataset& dataset, const FeatureTable& features,
                               const std::vector<std::string>& methods, const std::vector<std::string>& metrics,
                               std::size_t workers = 1) {
  const auto outcomes = rerank_dataset(model, dataset, features, methods, workers);
  double total = 0.0;
  for (const auto& [metric, mean] : mean_scores(dataset, selected_indices(outcomes), metrics)) total += mean;
  require_finite(total, "validation score");
  return total;
}

/// Sum over metrics of the mean per-example pool maximum.
inline double oracle_validation_score(const Dataset& dataset, const std::vector<std::string>& methods,
                                      const std::vector<std::string>& metrics) {
  double total = 0.0;
  for (const auto& [metric, mean] : oracle_scores(dataset, metrics, methods)) total += mean;
  return total;
}

inline TrainResult train(const Dataset& train_data, const FeatureTable& train_features, const Dataset& val_data,
                         const FeatureTable& val_features, ModelConfig model_config, const TrainConfig& config,
                         std::ostream* log = nullptr) {
  config.validate();
  if (train_data.empty()) throw ValidationError("training dataset is empty");
  if (val_data.empty()) throw ValidationError("validation dataset is empty");
  require(train_features.values.size() == train_data.size(), "training features do not cover the dataset");
  require(val_features.values.size() == val_data.size(), "validation features do not cover the dataset");
  if (train_features.dim != model_config.input_dim || val_features.dim != model_config.input_dim)
    throw ValidationError("feature dimension " + std::to_string(train_features.dim) + "/" +
                          std::to_string(val_features.dim) + " does not match model input_dim " +
                          std::to_string(model_config.input_dim));
  require(model_config.num_tasks == config.metrics.size(), "the model needs one task per metric");

  const auto groups = sample_all_pairs(train_data, config);
  for (std::size_t e = 0; e < train_data.size(); ++e)
    for (const auto& pair : groups[e])
      if (train_features.at(e, pair.candidate).size() != model_config.input_dim)
        throw ValidationError("example '" + train_data[e].id + "': feature vector of candidate " +
                              std::to_string(pair.candidate) + " has the wrong dimension");

  RerankerModel model = init_model(model_config, config.metrics, config.train_methods);
  const std::size_t per_epoch = steps_per_epoch(train_data.size(), config.batch_size);
  OptimizerState optimizer(model.config,
                           Schedule{config.peak_lr, config.warmup_fraction, std::max<std::size_t>(1, per_epoch * config.epochs)});
  Rng mask_rng(mix_seed(config.seed, 0x4d41534bULL));
  const std::size_t experts = model.config.experts();
  const double dropout = model.config.expert_dropout;

  auto snapshot = [&](std::size_t epoch, double loss) {
    Checkpoint c{model, epoch,
                 validation_score(model, val_data, val_features, config.train_methods, config.metrics, config.workers),
                 loss};
    if (log)
      *log << "epoch " << epoch << " train_loss " << std::setprecision(6) << loss << " val_score "
           << c.validation_score << '\n';
    return c;
  };

  TrainResult result;
  if (config.epochs == 0) {
    result.checkpoints.push_back(snapshot(0, 0.0));
    return result;
  }
  std::vector<TrainingRow> batch;
  for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
    const auto order = epoch_order(train_data.size(), config.seed, epoch - 1);
    double loss_total = 0.0;
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      batch.clear();
      const std::size_t stop = std::min(order.size(), start + config.batch_size);
      for (std::size_t i = start; i < stop; ++i) {
        const std::size_t e = order[i];
        ExpertMask mask;
        if (dropout > 0.0) mask = sample_expert_mask(experts, dropout, mask_rng);
        for (const auto& pair : groups[e]) batch.push_back({train_features.at(e, pair.candidate), pair.labels, mask});
      }
      double loss = 0.0;
      const auto grads = backward(model, batch, config.workers, &loss);
      require_finite(loss, "training loss");
      optimizer_step(model, grads, optimizer);
      loss_total += loss;
    }
    result.checkpoints.push_back(snapshot(epoch, loss_total / static_cast<double>(per_epoch)));
  }
  for (std::size_t i = 1; i < result.checkpoints.size(); ++i)
    if (result.checkpoints[i].validation_score > result.checkpoints[result.best].validation_score) result.best = i;
  return result;
}

inline nlohmann::json checkpoint_manifest(const TrainResult& result) {
  nlohmann::json list = nlohmann::json::array();
  for (std::size_t i = 0; i < result.checkpoints.size(); ++i) {
    const auto& c = result.checkpoints[i];
    list.push_back({{"epoch", c.epoch},
                    {"validation_score", c.validation_score},
                    {"train_loss", c.train_loss},
                    {"selected", i == result.best}});
  }
  return {{"checkpoints", list}, {"selected_epoch", result.selected().epoch}};
}

// ---------------------------------------------------------------------------
// Half-split protocol
//
// The training set is split into halves A and B. A base generator trained on
// B produces candidates for A and vice versa, so that re-ranker training
// candidates come from a generator that never saw the document. Generators
// are trained externally; this code assigns the halves, checks the cross
// pairing, and records provenance.

struct HalfSplitManifest {
  std::uint64_t split_seed = 0;
  std::vector<std::string> half_a;
  std::vector<std::string> half_b;
  std::string generator_a;  // produced the candidates of half A (trained on B)
  std::string generator_b;
  std::string config_hash;
};

inline nlohmann::json to_json(const HalfSplitManifest& m) {
  nlohmann::json j{{"split_seed", m.split_seed},
                   {"halves",
                    {{"a", {{"ids", m.half_a}, {"generator", m.generator_a}}},
                     {"b", {{"ids", m.half_b}, {"generator", m.generator_b}}}}}};
  if (!m.config_hash.empty()) j["config_hash"] = m.config_hash;
  return j;
}

/// Parses a manifest; `require_provenance` demands a nonempty generator for
/// both halves.
inline HalfSplitManifest manifest_from_json(const nlohmann::json& j, bool require_provenance) {
  HalfSplitManifest m;
  try {
    m.split_seed = j.at("split_seed").get<std::uint64_t>();
    const auto& halves = j.at("halves");
    m.half_a = halves.at("a").at("ids").get<std::vector<std::string>>();
    m.half_b = halves.at("b").at("ids").get<std::vector<std::string>>();
    auto generator = [&](const char* half) -> std::string {
      const auto& h = halves.at(half);
      if (!h.contains("generator") || !h["generator"].is_string()) return "";
      return h["generator"].get<std::string>();
    };
    m.generator_a = generator("a");
    m.generator_b = generator("b");
    if (j.contains("config_hash")) m.config_hash = j["config_hash"].get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("malformed split manifest: ") + e.what());
  }
  if (require_provenance) {
    if (m.generator_a.empty())
      throw ValidationError("split manifest lacks the \"generator\" provenance of half a");
    if (m.generator_b.empty())
      throw ValidationError("split manifest lacks the \"generator\" provenance of half b");
  }
  return m;
}

inline HalfSplitManifest load_manifest(const std::string& path, bool require_provenance) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open split manifest '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("split manifest '" + path + "' is not valid JSON: " + e.what());
  }
  return manifest_from_json(j, require_provenance);
}

inline std::string hex32(std::uint32_t v) {
  std::ostringstream out;
  out << std::hex << std::setw(8) << std::setfill('0') << v;
  return out.str();
}

inline std::string config_hash(const nlohmann::json& config) { return hex32(detail::crc32_of(config.dump())); }

/// Assigns the examples of `full_train` to two halves under `seed`.
inline std::pair<HalfSplitManifest, std::pair<Dataset, Dataset>> assign_halves(const Dataset& full_train,
                                                                               std::uint64_t seed) {
  auto halves = half_split(full_train, seed);
  HalfSplitManifest m;
  m.split_seed = seed;
  for (const auto& e : halves.first) m.half_a.push_back(e.id);
  for (const auto& e : halves.second) m.half_b.push_back(e.id);
  return {m, std::move(halves)};
}

/// Re-ranker training set from the cross-inferred halves: `candidates_a` holds
/// candidates for half A produced by the generator trained on half B, and
/// `candidates_b` the converse. `held_out` lists ids (validation, test) that
/// must not appear in either half.
inline Dataset run_half_split_protocol(HalfSplitManifest& manifest, const Dataset& candidates_a,
                                       const Dataset& candidates_b, const std::vector<std::string>& held_out,
                                       const nlohmann::json& resolved_config) {
  if (manifest.generator_a.empty() || manifest.generator_b.empty())
    throw ValidationError("split manifest lacks the \"generator\" provenance of " +
                          std::string(manifest.generator_a.empty() ? "half a" : "half b"));
  const std::set<std::string> a(manifest.half_a.begin(), manifest.half_a.end());
  const std::set<std::string> b(manifest.half_b.begin(), manifest.half_b.end());
  for (const auto& id : a)
    if (b.contains(id)) throw ValidationError("leakage: id '" + id + "' is assigned to both halves");
  auto check_half = [](const Dataset& data, const std::set<std::string>& own, const std::set<std::string>& other,
                       const char* name) {
    std::set<std::string> seen;
    for (const auto& e : data) {
      if (other.contains(e.id))
        throw ValidationError(std::string("leakage: id '") + e.id + "' in the candidates of half " + name +
                              " belongs to the other half");
      if (!own.contains(e.id))
        throw ValidationError(std::string("id '") + e.id + "' in the candidates of half " + name +
                              " is not listed in the split manifest");
      seen.insert(e.id);
    }
    if (seen.size() != own.size())
      throw ValidationError(std::string("the candidates of half ") + name + " cover " + std::to_string(seen.size()) +
                            " of " + std::to_string(own.size()) + " manifest ids");
  };
  check_half(candidates_a, a, b, "a");
  check_half(candidates_b, b, a, "b");
  for (const auto& id : held_out)
    if (a.contains(id) || b.contains(id))
      throw ValidationError("leakage: held-out id '" + id + "' appears in the training halves");
  manifest.config_hash = config_hash(resolved_config);
  Dataset merged = candidates_a;
  merged.insert(merged.end(), candidates_b.begin(), candidates_b.end());
  return merged;
}

}  // namespace summarank
