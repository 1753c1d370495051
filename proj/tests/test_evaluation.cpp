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

#include <boost/math/distributions/students_t.hpp>

#include "oracles.hpp"
#include "summarank/evaluation.hpp"

using namespace summarank;

namespace {

const std::vector<std::string> kMetrics{"rouge1", "rouge2", "rougeL"};

Candidate make_candidate(const std::string& method, double r1, double r2, double rl, const std::string& text = "x") {
  return {text, method, {{"rouge1", r1}, {"rouge2", r2}, {"rougeL", rl}}, std::nullopt};
}

// Random example with `m` candidates from two methods and scores drawn from a
// coarse grid so ties are common.
CandidateExample random_example(Rng& rng, std::size_t m, const std::string& id) {
  CandidateExample ex{id, "source text", "reference", {}};
  for (std::size_t i = 0; i < m; ++i)
    ex.candidates.push_back(make_candidate(i % 2 ? "dbs" : "beam", 0.1 * static_cast<double>(rng.index(5)),
                                           0.1 * static_cast<double>(rng.index(5)),
                                           0.1 * static_cast<double>(rng.index(5))));
  return ex;
}

RerankerModel small_model(std::size_t dim, std::uint64_t seed) {
  ModelConfig config;
  config.input_dim = dim;
  config.bottom_hidden = {6, 6};
  config.expert_hidden = {5, 5};
  config.num_tasks = 3;
  config.seed = seed;
  auto model = init_model(config, kMetrics, {"beam", "dbs"});
  Rng rng(seed);
  for (auto t : model.params.tensors())
    for (auto& x : t) x += rng.uniform(-0.3, 0.3);
  return model;
}

FeatureTable random_features(const Dataset& dataset, std::size_t dim, Rng& rng) {
  FeatureTable table{dim, {}};
  for (const auto& ex : dataset) {
    table.values.emplace_back();
    for (std::size_t i = 0; i < ex.candidates.size(); ++i) {
      FeatureVector v(dim);
      for (auto& x : v) x = rng.uniform(-1, 1);
      table.values.back().push_back(v);
    }
  }
  return table;
}

// Outcome whose ranking is given directly by `sums` over the full pool.
RankingOutcome outcome_from_sums(const CandidateExample& ex, std::vector<double> sums) {
  RankingOutcome o;
  o.pool = full_pool(ex);
  o.prob_sums = std::move(sums);
  for (std::size_t pos : order_by_scores(o.prob_sums)) o.order.push_back(o.pool[pos]);
  o.selected = o.order.front();
  return o;
}

}  // namespace

TEST(Rerank, OrdersBySummedProbabilities) {
  // A [0.9, 0.8], B [0.5, 0.5], C [0.95, 0.7]
  const std::vector<double> sums{0.9 + 0.8, 0.5 + 0.5, 0.95 + 0.7};
  EXPECT_EQ(order_by_scores(sums), (std::vector<std::size_t>{0, 2, 1}));
}

TEST(Rerank, TiesKeepLoadOrder) {
  EXPECT_EQ(order_by_scores(std::vector<double>{0.5, 0.7, 0.5, 0.7}), (std::vector<std::size_t>{1, 3, 0, 2}));
  EXPECT_EQ(order_by_scores(std::vector<double>{0.3}), (std::vector<std::size_t>{0}));
}

TEST(Rerank, ShiftInvariance) {
  Rng rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> s(1 + rng.index(10));
    for (auto& x : s) x = 0.25 * static_cast<double>(rng.index(4));
    auto shifted = s;
    for (auto& x : shifted) x += 0.5;
    EXPECT_EQ(order_by_scores(s), order_by_scores(shifted));
  }
}

TEST(Rerank, UsesModelProbabilities) {
  Rng rng(11);
  Dataset data{random_example(rng, 6, "e0"), random_example(rng, 7, "e1")};
  const auto model = small_model(4, 3);
  const auto features = random_features(data, 4, rng);
  const auto outcomes = rerank_dataset(model, data, features, {"beam", "dbs"});
  for (std::size_t e = 0; e < data.size(); ++e) {
    const auto& o = outcomes[e];
    EXPECT_EQ(o.pool, merge_pools(data[e], {"beam", "dbs"}));
    auto sorted = o.order;
    std::sort(sorted.begin(), sorted.end());
    EXPECT_EQ(sorted, full_pool(data[e]));
    EXPECT_EQ(o.selected, o.order.front());
    for (std::size_t pos = 0; pos < o.pool.size(); ++pos) {
      const auto p = predict_probs(model, features.at(e, o.pool[pos]));
      EXPECT_DOUBLE_EQ(o.prob_sums[pos], p[0] + p[1] + p[2]);
    }
    double best = -1;
    for (double s : o.prob_sums) best = std::max(best, s);
    const auto pos = std::find(o.pool.begin(), o.pool.end(), o.selected) - o.pool.begin();
    EXPECT_EQ(o.prob_sums[static_cast<std::size_t>(pos)], best);
    for (const auto& g : o.selected_gates) {
      double total = 0;
      for (double x : g) total += x;
      EXPECT_NEAR(total, 1.0, 1e-9);
    }
  }
}

TEST(Rerank, IdenticalFeaturesSelectFirst) {
  Rng rng(12);
  Dataset data{random_example(rng, 5, "e0")};
  const auto model = small_model(3, 4);
  FeatureTable table{3, {std::vector<FeatureVector>(5, FeatureVector{0.1, -0.2, 0.3})}};
  const auto o = rerank(model, data[0], table.values[0], {"dbs", "beam"});
  // Pool order puts dbs first: candidates 1, 3, then beam 0, 2, 4.
  EXPECT_EQ(o.selected, 1u);
  EXPECT_EQ(o.order, (std::vector<std::size_t>{1, 3, 0, 2, 4}));
}

TEST(Rerank, RejectsUnseenMethods) {
  Rng rng(13);
  Dataset data{random_example(rng, 4, "e0")};
  const auto model = small_model(2, 5);
  const auto features = random_features(data, 2, rng);
  EXPECT_THROW(rerank(model, data[0], features.values[0], {"beam", "topk"}), ValidationError);
  EXPECT_THROW(rerank_dataset(model, data, features, {"topp"}), ValidationError);
  EXPECT_NO_THROW(rerank(model, data[0], features.values[0], {"beam"}));
}

TEST(Rerank, WorkerCountDoesNotChangeOutcomes) {
  Rng rng(14);
  Dataset data;
  for (int i = 0; i < 40; ++i) data.push_back(random_example(rng, 8, "e" + std::to_string(i)));
  const auto model = small_model(4, 6);
  const auto features = random_features(data, 4, rng);
  const auto one = rerank_dataset(model, data, features, {"beam", "dbs"}, 1);
  const auto four = rerank_dataset(model, data, features, {"beam", "dbs"}, 4);
  for (std::size_t e = 0; e < data.size(); ++e) {
    EXPECT_EQ(one[e].order, four[e].order);
    EXPECT_EQ(one[e].prob_sums, four[e].prob_sums);
  }
}

TEST(Oracle, SingletonAndDominance) {
  Dataset data{{"a", "s", "r", {make_candidate("beam", 0.2, 0.1, 0.3), make_candidate("dbs", 0.4, 0.3, 0.5)}},
               {"b", "s", "r", {make_candidate("beam", 0.1, 0.0, 0.1), make_candidate("dbs", 0.3, 0.2, 0.2)}}};
  const auto beam = oracle_scores(data, kMetrics, {"beam"});
  EXPECT_DOUBLE_EQ(beam.at("rouge1"), 0.15);
  EXPECT_DOUBLE_EQ(beam.at("rouge2"), 0.05);
  const auto merged = oracle_scores(data, kMetrics, {"beam", "dbs"});
  const auto dbs = oracle_scores(data, kMetrics, {"dbs"});
  EXPECT_EQ(merged, dbs);
  EXPECT_THROW(oracle_scores(data, kMetrics, {"topk"}), ValidationError);
}

TEST(Oracle, MergedDominatesEachMethodAndSelections) {
  Rng rng(21);
  for (int trial = 0; trial < 50; ++trial) {
    Dataset data;
    for (int i = 0; i < 10; ++i) data.push_back(random_example(rng, 2 + rng.index(8), "e" + std::to_string(i)));
    const auto merged = oracle_scores(data, kMetrics, {"beam", "dbs"});
    for (const std::string m : {"beam", "dbs"}) {
      const auto single = oracle_scores(data, kMetrics, {m});
      for (const auto& metric : kMetrics) EXPECT_GE(merged.at(metric), single.at(metric));
    }
    const auto selected = mean_scores(data, base_candidates(data, "beam"), kMetrics);
    for (const auto& metric : kMetrics) EXPECT_LE(selected.at(metric), merged.at(metric));
  }
}

TEST(RandomRecall, Examples) {
  EXPECT_NEAR(random_baseline_recall(15, 1, 1), 1.0 / 15.0, 1e-15);
  EXPECT_DOUBLE_EQ(random_baseline_recall(4, 2, 1), 0.5);
  EXPECT_EQ(random_baseline_recall(7, 3, 7), 1.0);
  EXPECT_EQ(random_baseline_recall(5, 5, 1), 1.0);
  EXPECT_EQ(random_baseline_recall(6, 3, 4), 1.0);
  EXPECT_THROW(random_baseline_recall(4, 0, 1), ValidationError);
  EXPECT_THROW(random_baseline_recall(4, 5, 1), ValidationError);
  EXPECT_THROW(random_baseline_recall(4, 1, 0), ValidationError);
  EXPECT_THROW(random_baseline_recall(4, 1, 5), ValidationError);
}

TEST(RandomRecall, MatchesBinomialRatio) {
  auto choose = [](double a, double b) {
    if (a < b) return 0.0;
    double r = 1.0;
    for (double i = 0; i < b; ++i) r = r * (a - i) / (i + 1);
    return r;
  };
  for (std::size_t m = 1; m <= 20; ++m)
    for (std::size_t b = 1; b <= m; ++b)
      for (std::size_t k = 1; k <= m; ++k) {
        const double want = (choose(m, b) - choose(m - k, b)) / choose(m, b);
        EXPECT_NEAR(random_baseline_recall(m, b, k), want, 1e-12) << m << " " << b << " " << k;
      }
}

TEST(RandomRecall, MatchesPermutationSimulation) {
  Rng rng(31);
  const std::size_t grid[][3] = {{15, 1, 1}, {15, 1, 5}, {15, 3, 2}, {8, 4, 1}, {8, 8, 1}};
  for (const auto& g : grid) {
    const double sim = oracle::simulated_recall(g[0], g[1], g[2], 100000, rng);
    EXPECT_NEAR(random_baseline_recall(g[0], g[1], g[2]), sim, 0.005);
  }
}

TEST(RecallAtK, PerfectRankingAndFullDepth) {
  Rng rng(41);
  Dataset data;
  std::vector<RankingOutcome> perfect, reversed;
  for (int i = 0; i < 30; ++i) {
    data.push_back(random_example(rng, 6, "e" + std::to_string(i)));
    const auto sums = summed_normalized_scores(data.back(), full_pool(data.back()), kMetrics);
    perfect.push_back(outcome_from_sums(data.back(), sums));
    auto neg = sums;
    for (auto& x : neg) x = -x;
    reversed.push_back(outcome_from_sums(data.back(), neg));
  }
  const auto curve = recall_at_k(perfect, data, kMetrics, 8);
  EXPECT_EQ(curve.model.front(), 1.0);
  const auto rev = recall_at_k(reversed, data, kMetrics, 8);
  for (const auto* c : {&curve, &rev}) {
    for (std::size_t k = 1; k < 8; ++k) {
      EXPECT_LE(c->model[k - 1], c->model[k]);
      EXPECT_LE(c->random_baseline[k - 1], c->random_baseline[k] + 1e-15);
      EXPECT_LE(c->base_order[k - 1], c->base_order[k]);
    }
    for (std::size_t k = 5; k < 8; ++k) {
      EXPECT_EQ(c->model[k], 1.0);
      EXPECT_NEAR(c->random_baseline[k], 1.0, 1e-15);
      EXPECT_EQ(c->base_order[k], 1.0);
    }
  }
  EXPECT_EQ(curve.base_order, rev.base_order);
  EXPECT_EQ(curve.random_baseline, rev.random_baseline);
}

TEST(RecallAtK, BestSetCountsTies) {
  // Candidates 1 and 3 tie for best; the ranking reaches the first of them at depth 3.
  CandidateExample ex{"t", "s", "r",
                      {make_candidate("beam", 0.1, 0.1, 0.1), make_candidate("beam", 0.5, 0.2, 0.3),
                       make_candidate("beam", 0.2, 0.1, 0.1), make_candidate("beam", 0.5, 0.2, 0.3)}};
  const auto o = outcome_from_sums(ex, {0.9, 0.1, 0.5, 0.2});
  const auto curve = recall_at_k({o}, {ex}, kMetrics, 4);
  EXPECT_EQ(curve.model, (std::vector<double>{0.0, 0.0, 1.0, 1.0}));
  EXPECT_EQ(curve.base_order, (std::vector<double>{0.0, 1.0, 1.0, 1.0}));
  EXPECT_DOUBLE_EQ(curve.random_baseline[0], 0.5);
}

TEST(TTest, ReferenceExample) {
  const std::vector<double> a{1, 1, 1, -1}, zero(4, 0.0);
  const auto r = paired_t_test(a, zero);
  EXPECT_NEAR(r.t, 1.0, 1e-12);
  EXPECT_EQ(r.df, 3.0);
  EXPECT_NEAR(r.p, 0.391, 0.0005);
}

TEST(TTest, MatchesStudentDistribution) {
  Rng rng(51);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 2 + rng.index(40);
    std::vector<double> a(n), b(n);
    const double shift = rng.uniform(-0.5, 0.5);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = rng.normal() + shift;
      b[i] = rng.normal();
    }
    const auto r = paired_t_test(a, b);
    const boost::math::students_t dist(static_cast<double>(n - 1));
    const double want = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t)));
    EXPECT_NEAR(r.p, want, 1e-6) << "n=" << n << " t=" << r.t;
  }
}

TEST(TTest, DegenerateCases) {
  const std::vector<double> a{0.3, 0.4, 0.5};
  EXPECT_EQ(paired_t_test(a, a).p, 1.0);
  const std::vector<double> b{0.2, 0.3, 0.4};
  EXPECT_EQ(paired_t_test(a, std::vector<double>{0.3, 0.4, 0.5}).p, 1.0);
  const std::vector<double> up{1.5, 2.5, 3.5, 4.5, 5.5}, base{1, 2, 3, 4, 5};
  EXPECT_EQ(paired_t_test(up, base).p, 0.0);
  EXPECT_THROW(paired_t_test(a, std::vector<double>{1, 2}), ValidationError);
  EXPECT_THROW(paired_t_test(std::vector<double>{1}, std::vector<double>{2}), ValidationError);
  (void)b;
}

TEST(IncompleteBeta, KnownValues) {
  EXPECT_NEAR(regularized_incomplete_beta(1, 1, 0.3), 0.3, 1e-14);
  EXPECT_NEAR(regularized_incomplete_beta(2, 1, 0.5), 0.25, 1e-14);
  EXPECT_NEAR(regularized_incomplete_beta(0.5, 0.5, 0.5), 0.5, 1e-12);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 0.0), 0.0);
  EXPECT_EQ(regularized_incomplete_beta(2, 3, 1.0), 1.0);
}

TEST(Significance, AllBaselinesMustPass) {
  EXPECT_TRUE(significance_flags({{"rouge1", {{"beam", 0.01}, {"dbs", 0.04}}}}).at("rouge1"));
  EXPECT_FALSE(significance_flags({{"rouge1", {{"beam", 0.01}, {"dbs", 0.20}}}}).at("rouge1"));
  EXPECT_TRUE(significance_flags({{"rouge1", {{"beam", 0.049}}}}).at("rouge1"));
  EXPECT_FALSE(significance_flags({{"rouge1", {{"beam", 0.05}}}}).at("rouge1"));
}

TEST(Significance, MonotoneInPValues) {
  Rng rng(61);
  for (int trial = 0; trial < 500; ++trial) {
    std::map<std::string, std::map<std::string, double>> p{{"m", {{"a", rng.uniform(0, 0.1)}, {"b", rng.uniform(0, 0.1)}}}};
    const bool before = significance_flags(p).at("m");
    p["m"][rng.bernoulli(0.5) ? "a" : "b"] += rng.uniform(0, 0.1);
    if (!before) EXPECT_FALSE(significance_flags(p).at("m"));
  }
}

TEST(Significance, ReportRunsTTests) {
  const std::map<std::string, std::vector<double>> sys{{"rouge1", {0.5, 0.625, 0.75, 0.875}}};
  const std::map<std::string, std::map<std::string, std::vector<double>>> base{
      {"beam", {{"rouge1", {0.5, 0.625, 0.75, 0.875}}}}, {"dbs", {{"rouge1", {0.375, 0.5, 0.625, 0.75}}}}};
  const auto report = significance_report(sys, base);
  EXPECT_EQ(report.p_values.at("rouge1").at("beam"), 1.0);
  EXPECT_EQ(report.p_values.at("rouge1").at("dbs"), 0.0);
  EXPECT_FALSE(report.significant.at("rouge1"));
  const std::map<std::string, std::map<std::string, std::vector<double>>> short_base{
      {"beam", {{"rouge1", {0.5, 0.6}}}}};
  EXPECT_THROW(significance_report(sys, short_base), ValidationError);
}

TEST(Overlap, Fractions) {
  Rng rng(71);
  Dataset data;
  std::vector<RankingOutcome> first, oracle_like, one_of_four;
  for (int i = 0; i < 4; ++i) {
    data.push_back(random_example(rng, 6, "e" + std::to_string(i)));
    std::vector<double> s(6, 0.0);
    s[0] = 1.0;
    first.push_back(outcome_from_sums(data.back(), s));
    oracle_like.push_back(outcome_from_sums(data.back(), summed_normalized_scores(data.back(), full_pool(data.back()), kMetrics)));
    std::vector<double> t(6, 0.0);
    t[i == 0 ? 0 : 1] = 1.0;
    one_of_four.push_back(outcome_from_sums(data.back(), t));
  }
  EXPECT_EQ(overlap_stats(first, data, kMetrics, "beam").picks_base, 1.0);
  EXPECT_EQ(overlap_stats(oracle_like, data, kMetrics, "beam").picks_best, 1.0);
  EXPECT_EQ(overlap_stats(one_of_four, data, kMetrics, "beam").picks_base, 0.25);
  EXPECT_THROW(overlap_stats(first, data, kMetrics, "topk"), ValidationError);
}

TEST(Subsample, FullSizeEqualsRerank) {
  Rng rng(81);
  Dataset data;
  for (int i = 0; i < 20; ++i) data.push_back(random_example(rng, 6, "e" + std::to_string(i)));
  const auto model = small_model(3, 8);
  const auto features = random_features(data, 3, rng);
  const auto outcomes = rerank_dataset(model, data, features, {"beam", "dbs"});
  const auto full = mean_scores(data, selected_indices(outcomes), kMetrics);
  const auto curve = subsample_curve(outcomes, data, {6}, 3, kMetrics, 1);
  for (const auto& metric : kMetrics) EXPECT_NEAR(curve[0].mean_selected.at(metric), full.at(metric), 1e-12);
  EXPECT_THROW(subsample_curve(outcomes, data, {7}, 1, kMetrics, 1), ValidationError);
  EXPECT_THROW(subsample_curve(outcomes, data, {2}, 0, kMetrics, 1), ValidationError);
}

TEST(Subsample, SingleCandidateMatchesPoolMean) {
  Rng rng(82);
  Dataset data;
  for (int i = 0; i < 10; ++i) data.push_back(random_example(rng, 5, "e" + std::to_string(i)));
  const auto model = small_model(3, 9);
  const auto features = random_features(data, 3, rng);
  const auto outcomes = rerank_dataset(model, data, features, {"beam", "dbs"});
  const std::size_t trials = 10000;
  const auto curve = subsample_curve(outcomes, data, {1}, trials, kMetrics, 2);
  for (const auto& metric : kMetrics) {
    // Per example, a single draw is uniform over the pool.
    double mean = 0.0, var = 0.0;
    for (const auto& ex : data) {
      double m = 0.0, sq = 0.0;
      for (const auto& c : ex.candidates) {
        m += c.score(metric);
        sq += c.score(metric) * c.score(metric);
      }
      m /= 5.0;
      sq /= 5.0;
      mean += m;
      var += sq - m * m;
    }
    const double n = static_cast<double>(data.size());
    mean /= n;
    const double se = std::sqrt(var / (n * n) / static_cast<double>(trials));
    EXPECT_LT(std::abs(curve[0].mean_selected.at(metric) - mean), 3 * se) << metric;
  }
  const auto again = subsample_curve(outcomes, data, {1, 3}, 50, kMetrics, 7);
  const auto same = subsample_curve(outcomes, data, {1, 3}, 50, kMetrics, 7);
  for (std::size_t i = 0; i < again.size(); ++i) EXPECT_EQ(again[i].mean_selected, same[i].mean_selected);
}

TEST(Utilization, RowsAreDistributions) {
  Rng rng(91);
  Dataset data;
  for (int i = 0; i < 5; ++i) data.push_back(random_example(rng, 4, "e" + std::to_string(i)));
  const auto features = random_features(data, 3, rng);
  const auto model = small_model(3, 10);
  for (const auto& row : expert_utilization(model, data, features)) {
    double total = 0;
    for (double x : row) total += x;
    EXPECT_NEAR(total, 1.0, 1e-9);
  }
  auto zero_gates = model;
  for (auto& g : zero_gates.params.gates) std::fill(g.data.begin(), g.data.end(), 0.0);
  for (const auto& row : expert_utilization(zero_gates, data, features))
    for (double x : row) EXPECT_NEAR(x, 1.0 / 6.0, 1e-12);
  auto config = model.config;
  config.num_experts = 1;
  const auto single = init_model(config, kMetrics, {"beam"});
  for (const auto& row : expert_utilization(single, data, features)) EXPECT_EQ(row, std::vector<double>{1.0});
}

TEST(Correlation, MatrixProperties) {
  Rng rng(101);
  Dataset data;
  for (int i = 0; i < 20; ++i) data.push_back(random_example(rng, 5, "e" + std::to_string(i)));
  const std::vector<std::string> with_dup{"rouge1", "rouge2", "rougeL", "rouge1"};
  const auto r = metric_correlation_report(data, with_dup, "beam");
  for (std::size_t i = 0; i < 4; ++i) {
    EXPECT_EQ(r[i][i], 1.0);
    for (std::size_t j = 0; j < 4; ++j) EXPECT_NEAR(r[i][j], r[j][i], 1e-12);
  }
  EXPECT_NEAR(r[0][3], 1.0, 1e-12);
  for (auto& ex : data)
    for (auto& c : ex.candidates) c.scores["rouge2"] = 0.25;
  EXPECT_THROW(metric_correlation_report(data, kMetrics), ValidationError);
}

TEST(Novelty, SkipsShortSummariesAndDetectsCopies) {
  const std::string source = "the quick brown fox jumps over the lazy dog";
  const auto copies = novelty_report({{"the quick brown fox", source}, {"jumps over the lazy dog", source}});
  for (const auto& row : copies) EXPECT_EQ(row.mean, 0.0);
  const auto rows = novelty_report({{"a b c", "a b c d e"}, {"a b c d x", "a b c d e"}}, {4});
  EXPECT_EQ(rows[0].skipped, 1u);
  EXPECT_EQ(rows[0].counted, 1u);
  EXPECT_DOUBLE_EQ(rows[0].mean, 0.5);
}
