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
#include <string>
#include <vector>

#include "summarank/candidates.hpp"
#include "summarank/metrics.hpp"
#include "summarank/rng.hpp"

namespace summarank {

/// Generator of candidate datasets with a known quality signal. Each source
/// is a random token sequence and the reference is a contiguous span of it.
/// A candidate copies the reference, keeping each token with a per-candidate
/// probability q ~ U(0, 1) and otherwise substituting a distractor. A
/// distractor is drawn from the source with probability `in_source_distractor`
/// and from an unrelated vocabulary otherwise, so source overlap features
/// track reference overlap with tunable noise.
struct SyntheticConfig {
  std::size_t examples = 100;
  std::size_t candidates = 8;
  std::size_t source_length = 60;
  std::size_t reference_length = 15;
  std::size_t vocabulary = 400;
  double in_source_distractor = 0.5;
  std::vector<std::string> methods{"beam", "dbs"};
  std::string id_prefix = "syn";
  std::uint64_t seed = 0;
};

inline Dataset generate_synthetic(const SyntheticConfig& config) {
  require(config.candidates >= 1, "synthetic: need at least one candidate");
  require(config.reference_length >= 1 && config.reference_length <= config.source_length,
          "synthetic: reference must be a nonempty span of the source");
  require(!config.methods.empty(), "synthetic: need at least one method");
  require(config.vocabulary >= 1, "synthetic: vocabulary must be nonempty");
  Rng rng(config.seed);
  const MetricRegistry registry;
  auto word = [&](char prefix) { return std::string(1, prefix) + std::to_string(rng.index(config.vocabulary)); };
  Dataset dataset;
  dataset.reserve(config.examples);
  for (std::size_t e = 0; e < config.examples; ++e) {
    std::vector<std::string> source(config.source_length);
    for (auto& w : source) w = word('w');
    const std::size_t start = rng.index(config.source_length - config.reference_length + 1);
    const std::vector<std::string> reference(source.begin() + static_cast<std::ptrdiff_t>(start),
                                             source.begin() + static_cast<std::ptrdiff_t>(start + config.reference_length));
    CandidateExample example{config.id_prefix + std::to_string(e), join(source), join(reference), {}};
    for (std::size_t c = 0; c < config.candidates; ++c) {
      const double keep = rng.uniform();
      const double in_source = rng.uniform(0.0, config.in_source_distractor);
      // In-source distractors continue a copy of some other source region.
      std::size_t cursor = rng.index(source.size());
      std::vector<std::string> tokens;
      for (const auto& t : reference) {
        if (rng.bernoulli(keep)) {
          tokens.push_back(t);
        } else if (rng.bernoulli(in_source)) {
          tokens.push_back(source[cursor]);
          cursor = (cursor + 1) % source.size();
        } else {
          tokens.push_back(word('z'));
        }
      }
      const std::string& method = config.methods[c * config.methods.size() / config.candidates];
      example.candidates.push_back({join(tokens), method, {}, std::nullopt});
    }
    fill_native_scores(example, registry);
    dataset.push_back(std::move(example));
  }
  return dataset;
}

}  // namespace summarank
