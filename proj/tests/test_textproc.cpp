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

#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "summarank/rng.hpp"
#include "summarank/textproc.hpp"

using namespace summarank;

namespace {

Tokens random_tokens(Rng& rng, std::size_t max_len, std::size_t vocab) {
  Tokens t(rng.index(max_len + 1));
  for (auto& s : t) s = std::string(1, static_cast<char>('a' + rng.index(vocab)));
  return t;
}

}  // namespace

TEST(Tokenize, EmptyString) {
  EXPECT_TRUE(tokenize("", TokenizerConfig::surface()).empty());
  EXPECT_TRUE(tokenize("", TokenizerConfig::rouge()).empty());
}

TEST(Tokenize, SplitsOnNonAlphanumerics) {
  EXPECT_EQ(tokenize("The cat-sat.", {true, false, 0}), (Tokens{"the", "cat", "sat"}));
  EXPECT_EQ(tokenize("The cat-sat.", {false, false, 0}), (Tokens{"The", "cat", "sat"}));
  EXPECT_EQ(tokenize("a1b2  --x\t\nY9", TokenizerConfig::surface()), (Tokens{"a1b2", "x", "y9"}));
}

TEST(Tokenize, NonAsciiBytesSeparate) {
  EXPECT_EQ(tokenize("caf\xc3\xa9 na\xc3\xafve", TokenizerConfig::surface()), (Tokens{"caf", "na", "ve"}));
}

TEST(Tokenize, Stemming) {
  EXPECT_EQ(tokenize("running Runners", {true, true, 0}), (Tokens{"run", "runner"}));
}

TEST(Tokenize, TokenCap) {
  EXPECT_EQ(tokenize("a b c d e", {true, false, 3}), (Tokens{"a", "b", "c"}));
}

TEST(Tokenize, IdempotentWithoutStemming) {
  Rng rng(7);
  const std::string alphabet = "aB3 .,-x\xc3\xa9Z";
  for (int trial = 0; trial < 500; ++trial) {
    std::string s(rng.index(40), ' ');
    for (auto& c : s) c = alphabet[rng.index(alphabet.size())];
    const auto once = tokenize(s, TokenizerConfig::surface());
    EXPECT_EQ(tokenize(join(once), TokenizerConfig::surface()), once);
    EXPECT_EQ(tokenize(s, TokenizerConfig::surface()), once);
  }
}

TEST(PorterStem, ShortAndClassicWords) {
  EXPECT_EQ(porter_stem("sky"), "sky");
  EXPECT_EQ(porter_stem("caresses"), "caress");
  EXPECT_EQ(porter_stem("relational"), "relat");
  EXPECT_EQ(porter_stem("ponies"), "poni");
  EXPECT_EQ(porter_stem("hopping"), "hop");
  EXPECT_EQ(porter_stem("generalizations"), "gener");
  EXPECT_EQ(porter_stem("is"), "is");
}

TEST(PorterStem, NonLetterInputUnchanged) {
  EXPECT_EQ(porter_stem("2021"), "2021");
  EXPECT_EQ(porter_stem("abc9ing"), "abc9ing");
  EXPECT_EQ(porter_stem("Running"), "Running");
}

// Word list stemmed by an independent reference implementation of the
// published algorithm (with the reference C code's departures).
TEST(PorterStem, ReferenceVocabulary) {
  std::ifstream in(std::string(SUMMARANK_TEST_DATA) + "/porter_vocabulary.tsv");
  ASSERT_TRUE(in) << "missing porter_vocabulary.tsv";
  std::string line;
  std::size_t total = 0, mismatches = 0;
  std::ostringstream report;
  while (std::getline(in, line)) {
    const auto tab = line.find('\t');
    ASSERT_NE(tab, std::string::npos);
    const auto word = line.substr(0, tab), expected = line.substr(tab + 1);
    ++total;
    const auto got = porter_stem(word);
    if (got != expected) {
      ++mismatches;
      if (mismatches < 20) report << word << ": got " << got << ", expected " << expected << "\n";
    }
  }
  EXPECT_GT(total, 5000u);
  EXPECT_EQ(mismatches, 0u) << report.str();
}

TEST(NGrams, DirectCounts) {
  const Tokens t{"a", "b", "a"};
  const auto uni = ngrams(t, 1);
  EXPECT_EQ(uni.total(), 3u);
  EXPECT_EQ(uni.count("a"), 2u);
  EXPECT_EQ(uni.count("b"), 1u);
  EXPECT_EQ(uni.counts().size(), 2u);
  const auto bi = ngrams(t, 2);
  EXPECT_EQ(bi.count("a b"), 1u);
  EXPECT_EQ(bi.count("b a"), 1u);
  EXPECT_EQ(bi.counts().size(), 2u);
  EXPECT_TRUE(ngrams(Tokens{"a"}, 2).empty());
}

TEST(NGrams, RejectsZeroOrder) { EXPECT_THROW(ngrams(Tokens{"a"}, 0), ValidationError); }

TEST(NGrams, TotalCountMatchesLength) {
  Rng rng(11);
  for (int trial = 0; trial < 300; ++trial) {
    const auto t = random_tokens(rng, 15, 4);
    const std::size_t n = 1 + rng.index(4);
    const auto g = ngrams(t, n);
    const std::size_t expected = t.size() >= n ? t.size() - n + 1 : 0;
    std::size_t sum = 0;
    for (const auto& [key, c] : g.counts()) {
      sum += c;
      EXPECT_EQ(static_cast<std::size_t>(std::count(key.begin(), key.end(), ' ')) + 1, n);
    }
    EXPECT_EQ(sum, expected);
    EXPECT_EQ(g.total(), expected);
  }
}

TEST(Novelty, Examples) {
  EXPECT_DOUBLE_EQ(novel_ngram_fraction(Tokens{"a", "b"}, Tokens{"x", "a", "b", "c"}, 1), 0.0);
  EXPECT_DOUBLE_EQ(novel_ngram_fraction(Tokens{"a", "b"}, Tokens{"x", "y"}, 1), 1.0);
  EXPECT_DOUBLE_EQ(novel_ngram_fraction(Tokens{"a", "b", "c"}, Tokens{"a", "b"}, 1), 1.0 / 3.0);
}

TEST(Novelty, UndefinedForShortSummaries) {
  EXPECT_THROW(novel_ngram_fraction(Tokens{"a", "b"}, Tokens{"a", "b", "c"}, 3), ValidationError);
}

TEST(Novelty, SelfIsNeverNovel) {
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const auto t = random_tokens(rng, 12, 5);
    for (std::size_t n = 1; n <= 4; ++n)
      if (t.size() >= n) EXPECT_EQ(novel_ngram_fraction(t, t, n), 0.0);
  }
}
