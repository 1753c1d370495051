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

#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "summarank/errors.hpp"
#include "summarank/features.hpp"
#include "summarank/metrics.hpp"
#include "summarank/moe_net.hpp"
#include "summarank/training.hpp"

namespace summarank {

/// Everything a command-line run needs. Every key is optional in the file;
/// missing keys keep the defaults below and unknown keys are rejected.
///
/// {
///   "train_path": "", "val_path": "", "test_path": "",
///   "metrics": ["rouge1", "rouge2", "rougeL"],   // order = task order
///   "external_metrics": [],
///   "train_methods": [], "test_methods": [],     // empty test set = train set
///   "base_method": "",                           // default: first train method
///   "features": {"mode": "lexical", "source_cap": 512, "length_cap": 128,
///                "train_path": "", "val_path": "", "test_path": ""},
///   "model": {"bottom_hidden": [64, 64], "expert_hidden": [64, 64],
///             "num_experts": 0, "expert_dropout": 0.5},
///   "train": {"epochs": 5, "batch_size": 32, "m_top": 1, "m_bottom": 1,
///             "warmup_fraction": 0.05, "peak_lr": 0.001,
///             "full_pool_labels": false},
///   "eval": {"recall_k": 15, "subsample_ks": [], "subsample_trials": 10,
///            "alpha": 0.05, "novelty_n": [1, 2, 3, 4]},
///   "split_seed": 0, "seed": 0, "workers": 1, "out_dir": "out", "strict": false
/// }
struct RunConfig {
  std::string train_path, val_path, test_path;
  std::vector<std::string> metrics{"rouge1", "rouge2", "rougeL"};
  std::vector<std::string> external_metrics;
  std::vector<std::string> train_methods;
  std::vector<std::string> test_methods;
  std::string base_method;

  FeatureConfig features;
  std::string features_train_path, features_val_path, features_test_path;

  ModelConfig model;

  std::size_t epochs = 5;
  std::size_t batch_size = 32;
  std::size_t m_top = 1;
  std::size_t m_bottom = 1;
  double warmup_fraction = 0.05;
  double peak_lr = 1e-3;
  bool full_pool_labels = false;

  std::size_t recall_k = 15;
  std::vector<std::size_t> subsample_ks;
  std::size_t subsample_trials = 10;
  double alpha = 0.05;
  std::vector<std::size_t> novelty_n{1, 2, 3, 4};

  std::uint64_t split_seed = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out_dir = "out";
  bool strict = false;

  MetricRegistry registry() const {
    MetricRegistry r;
    for (const auto& name : external_metrics) r.register_external_metric(name);
    for (const auto& name : metrics)
      if (!r.contains(name)) {
        std::string known;
        for (const auto& m : r.metrics()) known += (known.empty() ? "" : ", ") + m.name;
        throw ValidationError("unknown metric '" + name + "'; registered metrics: " + known);
      }
    return r;
  }

  const std::vector<std::string>& effective_test_methods() const {
    return test_methods.empty() ? train_methods : test_methods;
  }

  std::string effective_base_method() const {
    if (!base_method.empty()) return base_method;
    return train_methods.empty() ? std::string{} : train_methods.front();
  }

  ModelConfig model_config(std::size_t input_dim) const {
    ModelConfig m = model;
    m.input_dim = input_dim;
    m.num_tasks = metrics.size();
    m.seed = mix_seed(seed, 1);
    return m;
  }

  TrainConfig train_config() const {
    TrainConfig t;
    t.epochs = epochs;
    t.batch_size = batch_size;
    t.m_top = m_top;
    t.m_bottom = m_bottom;
    t.train_methods = train_methods;
    t.metrics = metrics;
    t.warmup_fraction = warmup_fraction;
    t.peak_lr = peak_lr;
    t.seed = mix_seed(seed, 2);
    t.full_pool_labels = full_pool_labels;
    t.workers = workers;
    return t;
  }

  void validate() const {
    require(!metrics.empty(), "config: metrics must be nonempty");
    std::set<std::string> seen;
    for (const auto& m : metrics) require(seen.insert(m).second, "config: metric '" + m + "' listed twice");
    (void)registry();
    seen.clear();
    for (const auto& m : train_methods) require(seen.insert(m).second, "config: train method '" + m + "' listed twice");
    for (const auto& m : test_methods)
      if (!train_methods.empty() && !seen.contains(m))
        throw ValidationError("config: test method '" + m + "' is not among the train methods");
    require(workers >= 1, "config: workers must be at least 1");
    require(m_top >= 1 && m_bottom >= 1, "config: m_top and m_bottom must be at least 1");
    require(batch_size >= 1, "config: batch_size must be at least 1");
    require(peak_lr > 0.0, "config: peak_lr must be positive");
    require(warmup_fraction >= 0.0 && warmup_fraction <= 1.0, "config: warmup_fraction must lie in [0, 1]");
    require(alpha > 0.0 && alpha < 1.0, "config: alpha must lie in (0, 1)");
    require(recall_k >= 1, "config: recall_k must be at least 1");
    require(subsample_trials >= 1, "config: subsample_trials must be at least 1");
    for (auto n : novelty_n) require(n >= 1, "config: novelty_n entries must be at least 1");
    require(features.source_cap >= 1 && features.length_cap >= 1, "config: feature caps must be at least 1");
    ModelConfig probe = model;
    probe.num_tasks = metrics.size();
    probe.validate();
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::initializer_list<const char*> allowed,
                           const std::string& where) {
  if (!obj.is_object()) throw ValidationError("config: '" + where + "' must be an object");
  for (const auto& [key, value] : obj.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) {
      std::string list;
      for (const char* a : allowed) list += (list.empty() ? "" : ", ") + std::string(a);
      throw ValidationError("config: unknown key '" + (where.empty() ? key : where + "." + key) +
                            "' (allowed: " + list + ")");
    }
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out, const std::string& where) {
  if (!obj.contains(key)) return;
  try {
    out = obj.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ValidationError("config: '" + (where.empty() ? std::string(key) : where + "." + key) +
                          "' has the wrong type");
  }
}

}  // namespace detail

inline RunConfig config_from_json(const nlohmann::json& j) {
  using detail::read;
  RunConfig c;
  detail::reject_unknown(j,
                         {"train_path", "val_path", "test_path", "metrics", "external_metrics", "train_methods",
                          "test_methods", "base_method", "features", "model", "train", "eval", "split_seed", "seed",
                          "workers", "out_dir", "strict"},
                         "");
  read(j, "train_path", c.train_path, "");
  read(j, "val_path", c.val_path, "");
  read(j, "test_path", c.test_path, "");
  read(j, "metrics", c.metrics, "");
  read(j, "external_metrics", c.external_metrics, "");
  read(j, "train_methods", c.train_methods, "");
  read(j, "test_methods", c.test_methods, "");
  read(j, "base_method", c.base_method, "");
  read(j, "split_seed", c.split_seed, "");
  read(j, "seed", c.seed, "");
  read(j, "workers", c.workers, "");
  read(j, "out_dir", c.out_dir, "");
  read(j, "strict", c.strict, "");
  if (j.contains("features")) {
    const auto& f = j["features"];
    detail::reject_unknown(f, {"mode", "source_cap", "length_cap", "train_path", "val_path", "test_path"}, "features");
    std::string mode = "lexical";
    read(f, "mode", mode, "features");
    if (mode == "lexical")
      c.features.mode = FeatureMode::lexical;
    else if (mode == "precomputed")
      c.features.mode = FeatureMode::precomputed;
    else
      throw ValidationError("config: features.mode must be \"lexical\" or \"precomputed\", got '" + mode + "'");
    read(f, "source_cap", c.features.source_cap, "features");
    read(f, "length_cap", c.features.length_cap, "features");
    read(f, "train_path", c.features_train_path, "features");
    read(f, "val_path", c.features_val_path, "features");
    read(f, "test_path", c.features_test_path, "features");
  }
  if (j.contains("model")) {
    const auto& m = j["model"];
    detail::reject_unknown(m, {"bottom_hidden", "expert_hidden", "num_experts", "expert_dropout"}, "model");
    read(m, "bottom_hidden", c.model.bottom_hidden, "model");
    read(m, "expert_hidden", c.model.expert_hidden, "model");
    read(m, "num_experts", c.model.num_experts, "model");
    read(m, "expert_dropout", c.model.expert_dropout, "model");
  }
  if (j.contains("train")) {
    const auto& t = j["train"];
    detail::reject_unknown(
        t, {"epochs", "batch_size", "m_top", "m_bottom", "warmup_fraction", "peak_lr", "full_pool_labels"}, "train");
    read(t, "epochs", c.epochs, "train");
    read(t, "batch_size", c.batch_size, "train");
    read(t, "m_top", c.m_top, "train");
    read(t, "m_bottom", c.m_bottom, "train");
    read(t, "warmup_fraction", c.warmup_fraction, "train");
    read(t, "peak_lr", c.peak_lr, "train");
    read(t, "full_pool_labels", c.full_pool_labels, "train");
  }
  if (j.contains("eval")) {
    const auto& e = j["eval"];
    detail::reject_unknown(e, {"recall_k", "subsample_ks", "subsample_trials", "alpha", "novelty_n"}, "eval");
    read(e, "recall_k", c.recall_k, "eval");
    read(e, "subsample_ks", c.subsample_ks, "eval");
    read(e, "subsample_trials", c.subsample_trials, "eval");
    read(e, "alpha", c.alpha, "eval");
    read(e, "novelty_n", c.novelty_n, "eval");
  }
  return c;
}

inline nlohmann::json to_json(const RunConfig& c) {
  return {{"train_path", c.train_path},
          {"val_path", c.val_path},
          {"test_path", c.test_path},
          {"metrics", c.metrics},
          {"external_metrics", c.external_metrics},
          {"train_methods", c.train_methods},
          {"test_methods", c.test_methods},
          {"base_method", c.base_method},
          {"features",
           {{"mode", c.features.mode == FeatureMode::lexical ? "lexical" : "precomputed"},
            {"source_cap", c.features.source_cap},
            {"length_cap", c.features.length_cap},
            {"train_path", c.features_train_path},
            {"val_path", c.features_val_path},
            {"test_path", c.features_test_path}}},
          {"model",
           {{"bottom_hidden", c.model.bottom_hidden},
            {"expert_hidden", c.model.expert_hidden},
            {"num_experts", c.model.num_experts},
            {"expert_dropout", c.model.expert_dropout}}},
          {"train",
           {{"epochs", c.epochs},
            {"batch_size", c.batch_size},
            {"m_top", c.m_top},
            {"m_bottom", c.m_bottom},
            {"warmup_fraction", c.warmup_fraction},
            {"peak_lr", c.peak_lr},
            {"full_pool_labels", c.full_pool_labels}}},
          {"eval",
           {{"recall_k", c.recall_k},
            {"subsample_ks", c.subsample_ks},
            {"subsample_trials", c.subsample_trials},
            {"alpha", c.alpha},
            {"novelty_n", c.novelty_n}}},
          {"split_seed", c.split_seed},
          {"seed", c.seed},
          {"workers", c.workers},
          {"out_dir", c.out_dir},
          {"strict", c.strict}};
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace summarank
