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
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "summarank/errors.hpp"
#include "summarank/metrics.hpp"
#include "summarank/rng.hpp"
#include "summarank/textproc.hpp"

namespace summarank {

struct Candidate {
  std::string text;
  std::string method;
  ScoreVector scores;
  std::optional<std::vector<double>> features;

  double score(const std::string& metric) const {
    auto it = scores.find(metric);
    if (it == scores.end()) throw ValidationError("candidate has no score for metric '" + metric + "'");
    return it->second;
  }
};

struct CandidateExample {
  std::string id;
  std::string source;
  std::string reference;
  // Load order; it is the tie-break order everywhere.
  std::vector<Candidate> candidates;
};

using Dataset = std::vector<CandidateExample>;

/// Positions into CandidateExample::candidates, in pool order.
using Pool = std::vector<std::size_t>;

// ---------------------------------------------------------------------------
// Persistence

struct LoadOptions {
  MetricRegistry registry;
  // Empty means any method tag is accepted.
  std::set<std::string> methods;
  bool strict = false;
  bool compute_native = true;
  TokenizerConfig rouge_tokenizer = TokenizerConfig::rouge();
};

/// Fills every missing native metric score on every candidate. Returns the
/// number of scores written.
inline std::size_t fill_native_scores(CandidateExample& example, const MetricRegistry& registry,
                                      const TokenizerConfig& tokenizer = TokenizerConfig::rouge(),
                                      bool overwrite = false) {
  std::size_t written = 0;
  std::optional<Tokens> reference;
  for (auto& candidate : example.candidates) {
    std::optional<Tokens> tokens;
    for (const auto& metric : registry.metrics()) {
      if (!metric.native) continue;
      if (!overwrite && candidate.scores.contains(metric.name)) continue;
      if (!reference) reference = tokenize(example.reference, tokenizer);
      if (!tokens) tokens = tokenize(candidate.text, tokenizer);
      candidate.scores[metric.name] = native_score(metric.name, *tokens, *reference);
      ++written;
    }
  }
  return written;
}

namespace detail {

inline void check_fields(const nlohmann::json& obj, std::initializer_list<const char*> allowed, const std::string& where,
                         bool strict, std::vector<std::string>* warnings) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (known) continue;
    if (strict) throw ValidationError(where + ": unknown field '" + key + "'");
    if (warnings) warnings->push_back(where + ": ignoring unknown field '" + key + "'");
  }
}

inline std::string get_string(const nlohmann::json& obj, const char* key, const std::string& where) {
  auto it = obj.find(key);
  if (it == obj.end() || !it->is_string()) throw ValidationError(where + ": field '" + key + "' must be a string");
  return it->get<std::string>();
}

}  // namespace detail

inline CandidateExample parse_example(const nlohmann::json& record, const LoadOptions& options, const std::string& where,
                                      std::vector<std::string>* warnings = nullptr) {
  if (!record.is_object()) throw ValidationError(where + ": record must be an object");
  detail::check_fields(record, {"id", "source", "reference", "candidates"}, where, options.strict, warnings);
  CandidateExample example;
  example.id = detail::get_string(record, "id", where);
  example.source = detail::get_string(record, "source", where);
  example.reference = detail::get_string(record, "reference", where);
  auto cands = record.find("candidates");
  if (cands == record.end() || !cands->is_array()) throw ValidationError(where + ": field 'candidates' must be an array");
  for (std::size_t i = 0; i < cands->size(); ++i) {
    const auto& c = (*cands)[i];
    const std::string cwhere = where + ", example '" + example.id + "', candidate " + std::to_string(i);
    if (!c.is_object()) throw ValidationError(cwhere + ": candidate must be an object");
    detail::check_fields(c, {"text", "method", "scores", "features"}, cwhere, options.strict, warnings);
    Candidate candidate;
    candidate.text = detail::get_string(c, "text", cwhere);
    candidate.method = detail::get_string(c, "method", cwhere);
    if (!options.methods.empty() && !options.methods.contains(candidate.method))
      throw ValidationError(cwhere + ": unknown decoding method '" + candidate.method + "'");
    if (auto s = c.find("scores"); s != c.end()) {
      if (!s->is_object()) throw ValidationError(cwhere + ": 'scores' must be an object");
      for (const auto& [name, value] : s->items()) {
        if (!value.is_number()) throw ValidationError(cwhere + ": score '" + name + "' is not a number");
        const double v = value.get<double>();
        if (!std::isfinite(v)) throw NumericError(cwhere + ": score '" + name + "' is not finite");
        candidate.scores[name] = v;
      }
    }
    for (const auto& name : options.registry.external_names())
      if (!candidate.scores.contains(name)) throw ValidationError(cwhere + ": missing score for metric '" + name + "'");
    if (auto f = c.find("features"); f != c.end()) {
      if (!f->is_array()) throw ValidationError(cwhere + ": 'features' must be an array of numbers");
      std::vector<double> values;
      values.reserve(f->size());
      for (const auto& v : *f) {
        if (!v.is_number()) throw ValidationError(cwhere + ": 'features' must be an array of numbers");
        values.push_back(require_finite(v.get<double>(), "candidate features"));
      }
      candidate.features = std::move(values);
    }
    example.candidates.push_back(std::move(candidate));
  }
  if (options.compute_native) fill_native_scores(example, options.registry, options.rouge_tokenizer);
  return example;
}

/// Reads a line-delimited dataset file. Blank lines are skipped; error
/// messages carry the 1-based line number.
inline Dataset load_dataset(const std::string& path, const LoadOptions& options = {},
                            std::vector<std::string>* warnings = nullptr) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dataset file '" + path + "'");
  Dataset dataset;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    nlohmann::json record;
    try {
      record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw ValidationError(where + ": malformed record (" + e.what() + ")");
    }
    auto example = parse_example(record, options, where, warnings);
    if (!ids.insert(example.id).second) throw ValidationError(where + ": duplicate example id '" + example.id + "'");
    dataset.push_back(std::move(example));
  }
  return dataset;
}

inline nlohmann::json to_json(const CandidateExample& example) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : example.candidates) {
    nlohmann::json obj = {{"text", c.text}, {"method", c.method}};
    if (!c.scores.empty()) obj["scores"] = c.scores;
    if (c.features) obj["features"] = *c.features;
    cands.push_back(std::move(obj));
  }
  return {{"id", example.id}, {"source", example.source}, {"reference", example.reference}, {"candidates", cands}};
}

inline void save_dataset(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write dataset file '" + path + "'");
  for (const auto& example : dataset) out << to_json(example).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path + "'");
}

// ---------------------------------------------------------------------------
// Pools and labels

/// Candidates whose method is in `methods`, grouped by method in the given
/// order and in load order within each method. No deduplication.
inline Pool merge_pools(const CandidateExample& example, const std::vector<std::string>& methods) {
  require(!methods.empty(), "merge_pools: method set is empty");
  Pool pool;
  for (const auto& method : methods)
    for (std::size_t i = 0; i < example.candidates.size(); ++i)
      if (example.candidates[i].method == method) pool.push_back(i);
  if (pool.empty()) throw ValidationError("example '" + example.id + "': empty candidate pool for the requested methods");
  return pool;
}

inline Pool full_pool(const CandidateExample& example) {
  Pool pool(example.candidates.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  return pool;
}

inline std::vector<double> pool_scores(const CandidateExample& example, const Pool& pool, const std::string& metric) {
  std::vector<double> scores;
  scores.reserve(pool.size());
  for (std::size_t idx : pool) scores.push_back(example.candidates.at(idx).score(metric));
  return scores;
}

/// 1 for every candidate attaining the maximum, 0 otherwise.
inline std::vector<int> label_pool(std::span<const double> scores) {
  std::vector<int> labels(scores.size(), 0);
  if (scores.empty()) return labels;
  const double best = *std::max_element(scores.begin(), scores.end());
  for (std::size_t i = 0; i < scores.size(); ++i) labels[i] = scores[i] == best ? 1 : 0;
  return labels;
}

/// Sum over metrics of per-pool min-max normalized scores, in pool order.
inline std::vector<double> summed_normalized_scores(const CandidateExample& example, const Pool& pool,
                                                    const std::vector<std::string>& metrics) {
  std::vector<double> sums(pool.size(), 0.0);
  for (const auto& metric : metrics) {
    const auto normalized = normalize_pool_scores(pool_scores(example, pool, metric));
    for (std::size_t i = 0; i < pool.size(); ++i) sums[i] += normalized[i];
  }
  return sums;
}

/// Pool positions ordered by decreasing summed normalized score; equal sums
/// are ordered by load order.
inline std::vector<std::size_t> rank_by_summed_scores(const CandidateExample& example, const Pool& pool,
                                                      const std::vector<std::string>& metrics) {
  const auto sums = summed_normalized_scores(example, pool, metrics);
  std::vector<std::size_t> order(pool.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (sums[a] != sums[b]) return sums[a] > sums[b];
    return pool[a] < pool[b];
  });
  return order;
}

/// Candidate indices in the pool that attain the maximal summed normalized
/// score (the tie-aware best set).
inline std::vector<std::size_t> best_candidate_set(const CandidateExample& example, const Pool& pool,
                                                   const std::vector<std::string>& metrics) {
  const auto sums = summed_normalized_scores(example, pool, metrics);
  const auto labels = label_pool(sums);
  std::vector<std::size_t> best;
  for (std::size_t i = 0; i < pool.size(); ++i)
    if (labels[i]) best.push_back(pool[i]);
  return best;
}

struct TrainingSubset {
  // Candidate indices: the m_top best first, then the m_bottom worst.
  std::vector<std::size_t> candidates;
  // labels[i][k] for candidate i and metric k.
  std::vector<std::vector<int>> labels;
};

/// Keeps the `m_top` highest and `m_bottom` lowest candidates by summed
/// normalized score and labels them per metric. With `full_pool_labels`
/// the positives are the argmax set of the whole pool rather than of the
/// retained subset.
inline TrainingSubset sample_training_candidates(const CandidateExample& example, const Pool& pool, std::size_t m_top,
                                                 std::size_t m_bottom, const std::vector<std::string>& metrics,
                                                 bool full_pool_labels = false) {
  require(m_top >= 1 && m_bottom >= 1, "m_top and m_bottom must be at least 1");
  if (m_top + m_bottom > pool.size())
    throw ValidationError("example '" + example.id + "': pool of " + std::to_string(pool.size()) +
                          " is too small for m_top + m_bottom = " + std::to_string(m_top + m_bottom));
  const auto order = rank_by_summed_scores(example, pool, metrics);
  TrainingSubset subset;
  for (std::size_t i = 0; i < m_top; ++i) subset.candidates.push_back(pool[order[i]]);
  for (std::size_t i = order.size() - m_bottom; i < order.size(); ++i) subset.candidates.push_back(pool[order[i]]);

  const Pool& label_scope = full_pool_labels ? pool : subset.candidates;
  subset.labels.assign(subset.candidates.size(), std::vector<int>(metrics.size(), 0));
  for (std::size_t k = 0; k < metrics.size(); ++k) {
    const auto scores = pool_scores(example, label_scope, metrics[k]);
    const double best = *std::max_element(scores.begin(), scores.end());
    for (std::size_t i = 0; i < subset.candidates.size(); ++i)
      subset.labels[i][k] = example.candidates[subset.candidates[i]].score(metrics[k]) == best ? 1 : 0;
  }
  return subset;
}

// ---------------------------------------------------------------------------
// Pool statistics

inline double round6(double x) { return std::round(x * 1e6) / 1e6; }

inline std::size_t unique_score_count(std::span<const double> scores) {
  std::set<double> distinct;
  for (double s : scores) distinct.insert(round6(s));
  return distinct.size();
}

/// Fraction of examples whose `method` candidates all share one score.
/// Examples with no candidate of that method are left out of the count.
inline double identical_pool_fraction(const Dataset& dataset, const std::string& metric, const std::string& method) {
  require(!dataset.empty(), "identical_pool_fraction: empty dataset");
  std::size_t considered = 0, identical = 0;
  for (const auto& example : dataset) {
    std::vector<double> scores;
    for (const auto& c : example.candidates)
      if (c.method == method) scores.push_back(c.score(metric));
    if (scores.empty()) continue;
    ++considered;
    if (unique_score_count(scores) == 1) ++identical;
  }
  return considered == 0 ? 0.0 : static_cast<double>(identical) / static_cast<double>(considered);
}

/// Deterministic shuffle, then the first ceil(n/2) positions go to half A.
inline std::pair<std::vector<std::size_t>, std::vector<std::size_t>> half_split_indices(std::size_t n,
                                                                                        std::uint64_t seed) {
  require(n >= 2, "half_split needs at least two examples");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  rng.shuffle(std::span<std::size_t>(order));
  const std::size_t a = (n + 1) / 2;
  return {std::vector<std::size_t>(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(a)),
          std::vector<std::size_t>(order.begin() + static_cast<std::ptrdiff_t>(a), order.end())};
}

inline std::pair<Dataset, Dataset> half_split(const Dataset& dataset, std::uint64_t seed) {
  const auto [a, b] = half_split_indices(dataset.size(), seed);
  Dataset half_a, half_b;
  for (auto i : a) half_a.push_back(dataset[i]);
  for (auto i : b) half_b.push_back(dataset[i]);
  return {std::move(half_a), std::move(half_b)};
}

}  // namespace summarank
