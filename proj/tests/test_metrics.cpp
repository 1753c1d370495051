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

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "summarank/metrics.hpp"
#include "summarank/rng.hpp"

using namespace summarank;

TEST(RougeN, Identity) {
  const Tokens t{"the", "cat", "sat"};
  for (std::size_t n : {1u, 2u}) {
    const auto s = rouge_n(t, t, n);
    EXPECT_DOUBLE_EQ(s.precision, 1.0);
    EXPECT_DOUBLE_EQ(s.recall, 1.0);
    EXPECT_DOUBLE_EQ(s.f1, 1.0);
  }
}

TEST(RougeN, HandCounts) {
  const Tokens cand{"the", "cat", "sat"}, ref{"the", "cat", "slept"};
  const auto r1 = rouge_n(cand, ref, 1);
  EXPECT_DOUBLE_EQ(r1.precision, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r1.recall, 2.0 / 3.0);
  EXPECT_NEAR(r1.f1, 2.0 / 3.0, 1e-15);
  const auto r2 = rouge_n(cand, ref, 2);
  EXPECT_DOUBLE_EQ(r2.precision, 0.5);
  EXPECT_DOUBLE_EQ(r2.recall, 0.5);
  EXPECT_DOUBLE_EQ(r2.f1, 0.5);
}

TEST(RougeN, DegenerateInputsAreZero) {
  const auto s = rouge_n(Tokens{}, Tokens{"a"}, 1);
  EXPECT_EQ(s.precision, 0.0);
  EXPECT_EQ(s.f1, 0.0);
  EXPECT_EQ(rouge_n(Tokens{"a"}, Tokens{"a"}, 2).f1, 0.0);
}

TEST(RougeL, Examples) {
  const Tokens t{"a", "b", "c"};
  EXPECT_DOUBLE_EQ(rouge_l(t, t).f1, 1.0);
  const auto s = rouge_l(Tokens{"a", "b", "c", "d"}, Tokens{"a", "c", "b", "d"});
  EXPECT_DOUBLE_EQ(s.precision, 0.75);
  EXPECT_DOUBLE_EQ(s.recall, 0.75);
  EXPECT_DOUBLE_EQ(s.f1, 0.75);
  const auto z = rouge_l(Tokens{"x"}, Tokens{"y"});
  EXPECT_EQ(z.precision, 0.0);
  EXPECT_EQ(z.recall, 0.0);
  EXPECT_EQ(z.f1, 0.0);
}

TEST(Rouge, MatchesBruteForceOracles) {
  Rng rng(2024);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto a = oracle::random_tokens(rng, 12, 5);
    const auto b = oracle::random_tokens(rng, 12, 5);
    for (std::size_t n : {1u, 2u}) {
      const auto got = rouge_n(a, b, n);
      const auto want = oracle::rouge_n(a, b, n);
      ASSERT_EQ(got.precision, want.precision);
      ASSERT_EQ(got.recall, want.recall);
      ASSERT_EQ(got.f1, want.f1);
    }
    const auto a10 = Tokens(a.begin(), a.begin() + std::min<std::ptrdiff_t>(10, a.size()));
    const auto b10 = Tokens(b.begin(), b.begin() + std::min<std::ptrdiff_t>(10, b.size()));
    const auto got = rouge_l(a10, b10);
    const auto want = oracle::rouge_l(a10, b10);
    ASSERT_EQ(got.precision, want.precision);
    ASSERT_EQ(got.recall, want.recall);
    ASSERT_EQ(got.f1, want.f1);
  }
}

TEST(Rouge, PrecisionAndRecallSwapUnderExchange) {
  Rng rng(99);
  for (int trial = 0; trial < 500; ++trial) {
    const auto a = oracle::random_tokens(rng, 12, 5);
    const auto b = oracle::random_tokens(rng, 12, 5);
    for (std::size_t n : {1u, 2u}) {
      const auto ab = rouge_n(a, b, n), ba = rouge_n(b, a, n);
      EXPECT_EQ(ab.precision, ba.recall);
      EXPECT_EQ(ab.recall, ba.precision);
    }
    const auto ab = rouge_l(a, b), ba = rouge_l(b, a);
    EXPECT_EQ(ab.precision, ba.recall);
    EXPECT_EQ(ab.recall, ba.precision);
    if (a.size() == b.size()) EXPECT_DOUBLE_EQ(ab.f1, ba.f1);
  }
}

TEST(Normalize, MinMax) {
  EXPECT_EQ(normalize_pool_scores(std::vector<double>{10, 20, 30}), (std::vector<double>{0.0, 0.5, 1.0}));
  EXPECT_EQ(normalize_pool_scores(std::vector<double>{5, 5, 5}), (std::vector<double>{0.5, 0.5, 0.5}));
  EXPECT_EQ(normalize_pool_scores(std::vector<double>{0.2, 0.8}), (std::vector<double>{0.0, 1.0}));
  EXPECT_THROW(normalize_pool_scores(std::vector<double>{}), ValidationError);
}

TEST(Normalize, RangeAndArgmax) {
  Rng rng(3);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<double> raw(1 + rng.index(10));
    for (auto& x : raw) x = rng.uniform(-5, 5);
    const auto norm = normalize_pool_scores(raw);
    for (double x : norm) {
      EXPECT_GE(x, 0.0);
      EXPECT_LE(x, 1.0);
    }
    if (raw.size() > 1)
      EXPECT_EQ(std::max_element(raw.begin(), raw.end()) - raw.begin(),
                std::max_element(norm.begin(), norm.end()) - norm.begin());
  }
}

TEST(Pearson, Examples) {
  const std::vector<double> x{1, 2, 3};
  EXPECT_NEAR(pearson(x, x), 1.0, 1e-15);
  EXPECT_NEAR(pearson(x, std::vector<double>{-1, -2, -3}), -1.0, 1e-15);
  EXPECT_NEAR(pearson(x, std::vector<double>{1, 3, 2}), 0.5, 1e-15);
  EXPECT_THROW(pearson(x, std::vector<double>{4, 4, 4}), ValidationError);
  EXPECT_THROW(pearson(std::vector<double>{1}, std::vector<double>{1}), ValidationError);
}

TEST(Pearson, AffineInvariance) {
  Rng rng(17);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + rng.index(20);
    std::vector<double> x(n), y(n), xt(n), yt(n);
    const double a = rng.uniform(0.1, 10), b = rng.uniform(-5, 5), c = rng.uniform(0.1, 10), d = rng.uniform(-5, 5);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = rng.uniform(-1, 1);
      y[i] = 0.5 * x[i] + rng.uniform(-1, 1);
      xt[i] = a * x[i] + b;
      yt[i] = c * y[i] + d;
    }
    EXPECT_LT(std::abs(pearson(x, y) - pearson(xt, yt)), 1e-12);
  }
}

TEST(Gain, Examples) {
  const std::map<std::string, double> base{{"rouge1", 44.56}, {"rouge2", 21.48}, {"rougeL", 41.58}};
  EXPECT_EQ(mean_relative_gain(base, base), 0.0);
  const std::map<std::string, double> sys{{"rouge1", 47.16}, {"rouge2", 22.55}, {"rougeL", 43.87}};
  EXPECT_NEAR(mean_relative_gain(sys, base), 5.44, 0.005);
  EXPECT_DOUBLE_EQ(mean_relative_gain({{"m", 2.0}}, {{"m", 1.0}}), 100.0);
  EXPECT_THROW(mean_relative_gain({{"m", 2.0}}, {{"m", 0.0}}), ValidationError);
  EXPECT_THROW(mean_relative_gain({{"m", 2.0}}, {{"n", 1.0}}), ValidationError);
}

TEST(Gain, PerMetricBestBaseline) {
  // Beam search and diverse beam search rows of the PEGASUS baselines.
  const std::map<std::string, double> beam{{"rouge1", 44.23}, {"rouge2", 21.48}, {"rougeL", 41.21}};
  const std::map<std::string, double> dbs{{"rouge1", 44.56}, {"rouge2", 20.90}, {"rougeL", 41.58}};
  const auto best = best_baselines({beam, dbs});
  EXPECT_EQ(best.at("rouge1"), 44.56);
  EXPECT_EQ(best.at("rouge2"), 21.48);
  EXPECT_EQ(best.at("rougeL"), 41.58);
}

TEST(Registry, ExternalMetrics) {
  MetricRegistry registry;
  registry.register_external_metric("bertscore");
  EXPECT_TRUE(registry.contains("bertscore"));
  EXPECT_FALSE(registry.is_native("bertscore"));
  EXPECT_TRUE(registry.is_native("rouge1"));
  EXPECT_THROW(registry.register_external_metric("rouge1"), ValidationError);
  EXPECT_THROW(registry.register_external_metric("bertscore"), ValidationError);
  EXPECT_EQ(registry.external_names(), (std::vector<std::string>{"bertscore"}));
}
