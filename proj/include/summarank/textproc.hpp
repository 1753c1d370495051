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

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "summarank/errors.hpp"
#include "summarank/porter.hpp"

namespace summarank {

using Tokens = std::vector<std::string>;

/// Tokens are maximal runs of ASCII alphanumerics; every other byte
/// (punctuation, whitespace, any part of a multi-byte UTF-8 sequence) is a
/// separator.
struct TokenizerConfig {
  bool lowercase = true;
  bool stem = false;
  // Keep at most this many tokens; 0 keeps everything.
  std::size_t max_tokens = 0;

  static TokenizerConfig rouge() { return {true, true, 0}; }
  static TokenizerConfig surface() { return {true, false, 0}; }
};

inline bool is_token_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

inline Tokens tokenize(std::string_view text, const TokenizerConfig& config = {}) {
  Tokens tokens;
  std::size_t i = 0;
  while (i < text.size()) {
    if (config.max_tokens != 0 && tokens.size() >= config.max_tokens) break;
    if (!is_token_char(text[i])) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && is_token_char(text[j])) ++j;
    std::string token(text.substr(i, j - i));
    if (config.lowercase)
      for (auto& c : token)
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (config.stem) token = porter_stem(token);
    tokens.push_back(std::move(token));
    i = j;
  }
  return tokens;
}

inline std::string join(std::span<const std::string> tokens, std::string_view sep = " ") {
  std::string out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) out += sep;
    out += tokens[i];
  }
  return out;
}

/// Multiset of the n-grams of one token sequence. Keys are the n tokens
/// joined by a single space, which is unambiguous because tokens never
/// contain spaces.
class NGramMultiset {
 public:
  NGramMultiset(std::span<const std::string> tokens, std::size_t n) : n_(n) {
    require(n >= 1, "n-gram order must be at least 1");
    if (tokens.size() < n) return;
    for (std::size_t i = 0; i + n <= tokens.size(); ++i) {
      ++counts_[join(tokens.subspan(i, n))];
      ++total_;
    }
  }

  std::size_t order() const noexcept { return n_; }
  std::size_t total() const noexcept { return total_; }
  bool empty() const noexcept { return total_ == 0; }
  const std::unordered_map<std::string, std::size_t>& counts() const noexcept { return counts_; }

  std::size_t count(const std::string& key) const {
    auto it = counts_.find(key);
    return it == counts_.end() ? 0 : it->second;
  }

  bool contains(const std::string& key) const { return counts_.contains(key); }

  /// Sum over shared n-grams of min(count here, count there).
  std::size_t clipped_overlap(const NGramMultiset& other) const {
    const auto& small = counts_.size() <= other.counts_.size() ? *this : other;
    const auto& large = &small == this ? other : *this;
    std::size_t overlap = 0;
    for (const auto& [key, c] : small.counts_) {
      const std::size_t d = large.count(key);
      overlap += c < d ? c : d;
    }
    return overlap;
  }

 private:
  std::size_t n_;
  std::size_t total_ = 0;
  std::unordered_map<std::string, std::size_t> counts_;
};

inline NGramMultiset ngrams(std::span<const std::string> tokens, std::size_t n) { return NGramMultiset(tokens, n); }

/// Share of summary n-gram occurrences whose n-gram never occurs in the
/// source.
inline double novel_ngram_fraction(std::span<const std::string> summary, const NGramMultiset& source) {
  const std::size_t n = source.order();
  if (summary.size() < n)
    throw ValidationError("undefined novelty: summary has " + std::to_string(summary.size()) +
                          " tokens, fewer than n=" + std::to_string(n));
  const NGramMultiset grams(summary, n);
  std::size_t novel = 0;
  for (const auto& [key, c] : grams.counts())
    if (!source.contains(key)) novel += c;
  return static_cast<double>(novel) / static_cast<double>(grams.total());
}

inline double novel_ngram_fraction(std::span<const std::string> summary, std::span<const std::string> source,
                                   std::size_t n) {
  require(n >= 1, "n-gram order must be at least 1");
  if (summary.size() < n)
    throw ValidationError("undefined novelty: summary has " + std::to_string(summary.size()) +
                          " tokens, fewer than n=" + std::to_string(n));
  return novel_ngram_fraction(summary, NGramMultiset(source, n));
}

}  // namespace summarank
