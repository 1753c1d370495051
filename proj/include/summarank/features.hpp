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
#include <array>
#include <cmath>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "summarank/candidates.hpp"
#include "summarank/errors.hpp"
#include "summarank/metrics.hpp"
#include "summarank/parallel.hpp"
#include "summarank/textproc.hpp"

namespace summarank {

using FeatureVector = std::vector<double>;

enum class FeatureMode { lexical, precomputed };

struct FeatureConfig {
  FeatureMode mode = FeatureMode::lexical;
  // Sources are truncated to this many tokens before any feature is computed.
  std::size_t source_cap = 512;
  // Candidate length is clipped at this many tokens and scaled to [0, 1].
  std::size_t length_cap = 128;
};

/// Index map of the built-in lexical representation. Every value is in
/// [0, 1]; undefined quantities (e.g. novelty of an empty candidate) are 0.
namespace lexical {
enum Index : std::size_t {
  length_ratio = 0,   // min(1, |cand| / |source|)
  length_scaled = 1,  // min(|cand|, length_cap) / length_cap
  precision_1 = 2,    // clipped n-gram overlap with the source / cand n-grams
  precision_2 = 3,
  precision_3 = 4,
  recall_1 = 5,  // clipped n-gram overlap / source n-grams
  recall_2 = 6,
  recall_3 = 7,
  novel_1 = 8,  // novel n-gram fraction w.r.t. the source
  novel_2 = 9,
  novel_3 = 10,
  distinct_ratio = 11,   // distinct unigrams / |cand|
  lcs_precision = 12,    // LCS(cand, source) / |cand|
  lcs_recall = 13,       // LCS(cand, source) / |source|
  lead_affinity = 14,    // 1 - mean relative source position of matched unigrams
  numeric_fraction = 15, // tokens containing a digit / |cand|
  dim = 16
};
}  // namespace lexical

/// Source-side state reused across every candidate of one example.
class SourceContext {
 public:
  SourceContext(std::string_view source, const FeatureConfig& config)
      : config_(config),
        tokens_(tokenize(source, TokenizerConfig{true, false, config.source_cap})),
        grams_{NGramMultiset(tokens_, 1), NGramMultiset(tokens_, 2), NGramMultiset(tokens_, 3)} {
    for (std::size_t i = 0; i < tokens_.size(); ++i) first_position_.try_emplace(tokens_[i], i);
  }

  FeatureVector extract(std::string_view candidate_text) const {
    FeatureVector v(lexical::dim, 0.0);
    const Tokens cand = tokenize(candidate_text, TokenizerConfig::surface());
    if (cand.empty()) return v;
    const double len = static_cast<double>(cand.size());
    const double src_len = static_cast<double>(tokens_.size());

    v[lexical::length_ratio] = src_len > 0 ? std::min(1.0, len / src_len) : 0.0;
    v[lexical::length_scaled] =
        static_cast<double>(std::min(cand.size(), config_.length_cap)) / static_cast<double>(config_.length_cap);

    for (std::size_t n = 1; n <= 3; ++n) {
      const NGramMultiset cg(cand, n);
      const auto& sg = grams_[n - 1];
      if (cg.empty()) continue;
      const double overlap = static_cast<double>(cg.clipped_overlap(sg));
      v[lexical::precision_1 + n - 1] = overlap / static_cast<double>(cg.total());
      v[lexical::recall_1 + n - 1] = sg.empty() ? 0.0 : overlap / static_cast<double>(sg.total());
      v[lexical::novel_1 + n - 1] = novel_ngram_fraction(cand, sg);
    }

    std::unordered_set<std::string_view> distinct;
    std::size_t numeric = 0;
    double position_sum = 0.0;
    std::size_t matched = 0;
    for (const auto& t : cand) {
      distinct.insert(t);
      if (std::any_of(t.begin(), t.end(), [](char c) { return c >= '0' && c <= '9'; })) ++numeric;
      if (auto it = first_position_.find(t); it != first_position_.end()) {
        position_sum += src_len > 1 ? static_cast<double>(it->second) / (src_len - 1) : 0.0;
        ++matched;
      }
    }
    v[lexical::distinct_ratio] = static_cast<double>(distinct.size()) / len;
    v[lexical::numeric_fraction] = static_cast<double>(numeric) / len;
    v[lexical::lead_affinity] = matched ? 1.0 - position_sum / static_cast<double>(matched) : 0.0;

    if (!tokens_.empty()) {
      const double lcs = static_cast<double>(lcs_length(cand, tokens_));
      v[lexical::lcs_precision] = lcs / len;
      v[lexical::lcs_recall] = lcs / src_len;
    }
    return v;
  }

 private:
  FeatureConfig config_;
  Tokens tokens_;
  std::array<NGramMultiset, 3> grams_;
  std::unordered_map<std::string, std::size_t> first_position_;
};

inline FeatureVector extract_lexical(std::string_view source, std::string_view candidate_text,
                                     const FeatureConfig& config = {}) {
  require(config.mode == FeatureMode::lexical, "extract_lexical requires lexical feature mode");
  return SourceContext(source, config).extract(candidate_text);
}

/// Externally computed vectors keyed by (example id, candidate index).
class FeatureStore {
 public:
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return vectors_.size(); }

  void insert(const std::string& id, std::size_t index, FeatureVector vector) {
    if (vectors_.empty())
      dim_ = vector.size();
    else if (vector.size() != dim_)
      throw ValidationError("ragged feature dimensions: (" + id + ", " + std::to_string(index) + ") has " +
                            std::to_string(vector.size()) + " values, expected " + std::to_string(dim_));
    require(dim_ >= 1, "feature vectors must be nonempty");
    for (double x : vector) require_finite(x, "precomputed features");
    if (!vectors_.emplace(std::make_pair(id, index), std::move(vector)).second)
      throw ValidationError("duplicate feature vector for (" + id + ", " + std::to_string(index) + ")");
  }

  const FeatureVector& at(const std::string& id, std::size_t index) const {
    auto it = vectors_.find({id, index});
    if (it == vectors_.end())
      throw ValidationError("missing feature vector for (" + id + ", " + std::to_string(index) + ")");
    return it->second;
  }

  bool contains(const std::string& id, std::size_t index) const { return vectors_.contains({id, index}); }

  /// Throws naming the first (id, index) of `dataset` without a vector.
  void check_covers(const Dataset& dataset) const {
    for (const auto& example : dataset)
      for (std::size_t i = 0; i < example.candidates.size(); ++i) (void)at(example.id, i);
  }

 private:
  std::size_t dim_ = 0;
  std::map<std::pair<std::string, std::size_t>, FeatureVector> vectors_;
};

inline FeatureStore load_precomputed(const std::string& path, const Dataset& dataset) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open feature file '" + path + "'");
  FeatureStore store;
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
    if (!record.is_object() || !record.contains("id") || !record["id"].is_string() || !record.contains("index") ||
        !record["index"].is_number_unsigned() || !record.contains("vector") || !record["vector"].is_array())
      throw ValidationError(where + ": expected {\"id\": string, \"index\": integer, \"vector\": [numbers]}");
    FeatureVector v;
    for (const auto& x : record["vector"]) {
      if (!x.is_number()) throw ValidationError(where + ": vector entries must be numbers");
      v.push_back(x.get<double>());
    }
    try {
      store.insert(record["id"].get<std::string>(), record["index"].get<std::size_t>(), std::move(v));
    } catch (const ValidationError& e) {
      throw ValidationError(where + ": " + e.what());
    }
  }
  store.check_covers(dataset);
  return store;
}

/// Vectors embedded in the dataset records ("features" on each candidate).
inline FeatureStore store_from_dataset(const Dataset& dataset) {
  FeatureStore store;
  for (const auto& example : dataset)
    for (std::size_t i = 0; i < example.candidates.size(); ++i) {
      const auto& f = example.candidates[i].features;
      if (!f) throw ValidationError("missing feature vector for (" + example.id + ", " + std::to_string(i) + ")");
      store.insert(example.id, i, *f);
    }
  return store;
}

/// Feature vectors for every candidate of every example.
struct FeatureTable {
  std::size_t dim = 0;
  std::vector<std::vector<FeatureVector>> values;  // [example][candidate]

  const FeatureVector& at(std::size_t example, std::size_t candidate) const { return values.at(example).at(candidate); }
};

inline FeatureTable featurize(const Dataset& dataset, const FeatureConfig& config, const FeatureStore* store = nullptr,
                              std::size_t workers = 1) {
  FeatureTable table;
  table.values.resize(dataset.size());
  if (config.mode == FeatureMode::precomputed) {
    require(store != nullptr, "precomputed feature mode needs a feature store");
    table.dim = store->dim();
    for (std::size_t e = 0; e < dataset.size(); ++e)
      for (std::size_t i = 0; i < dataset[e].candidates.size(); ++i)
        table.values[e].push_back(store->at(dataset[e].id, i));
    return table;
  }
  table.dim = lexical::dim;
  parallel_for(dataset.size(), workers, [&](std::size_t e) {
    const SourceContext context(dataset[e].source, config);
    for (const auto& c : dataset[e].candidates) table.values[e].push_back(context.extract(c.text));
  });
  return table;
}

}  // namespace summarank
