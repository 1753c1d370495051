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
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "summarank/candidates.hpp"
#include "summarank/errors.hpp"
#include "summarank/features.hpp"
#include "summarank/metrics.hpp"
#include "summarank/moe_net.hpp"
#include "summarank/parallel.hpp"
#include "summarank/rng.hpp"
#include "summarank/stats.hpp"
#include "summarank/textproc.hpp"

namespace summarank {

// ---------------------------------------------------------------------------
// Re-ranking

struct RankingOutcome {
  Pool pool;                               // candidate indices in pool order
  std::vector<double> prob_sums;           // per pool position
  std::vector<std::vector<double>> probs;  // [pool position][task]
  std::vector<std::size_t> order;          // candidate indices, best first
  std::size_t selected = 0;                // == order.front()
  std::vector<std::vector<double>> selected_gates;  // [task][expert] for the selected candidate
};

/// Pool positions by decreasing score; equal scores keep pool order.
inline std::vector<std::size_t> order_by_scores(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

/// Throws unless every test-time method was seen during training.
inline void check_test_methods(const RerankerModel& model, const std::vector<std::string>& test_methods) {
  for (const auto& m : test_methods)
    if (std::find(model.train_methods.begin(), model.train_methods.end(), m) == model.train_methods.end()) {
      std::string trained;
      for (const auto& t : model.train_methods) trained += (trained.empty() ? "" : ",") + t;
      throw ValidationError("decoding method '" + m + "' is not among the model's training methods {" + trained +
                            "}; test-time methods must be a subset of training methods");
    }
}

/// Scores every pool candidate and ranks by the sum of per-metric
/// probabilities. `features[i]` is the vector of candidate i.
inline RankingOutcome rerank(const RerankerModel& model, const CandidateExample& example,
                             std::span<const FeatureVector> features, const std::vector<std::string>& test_methods) {
  check_test_methods(model, test_methods);
  if (features.size() != example.candidates.size())
    throw ValidationError("example '" + example.id + "': missing feature vectors");
  RankingOutcome out;
  out.pool = merge_pools(example, test_methods);
  std::vector<std::vector<std::vector<double>>> gates;
  for (std::size_t idx : out.pool) {
    auto result = forward(model, features[idx]);
    std::vector<double> p;
    double sum = 0.0;
    for (double z : result.logits) {
      p.push_back(sigmoid(z));
      sum += p.back();
    }
    require_finite(sum, "predicted probabilities");
    out.probs.push_back(std::move(p));
    out.prob_sums.push_back(sum);
    gates.push_back(std::move(result.gates));
  }
  const auto order = order_by_scores(out.prob_sums);
  for (std::size_t pos : order) out.order.push_back(out.pool[pos]);
  out.selected = out.order.front();
  out.selected_gates = std::move(gates[order.front()]);
  return out;
}

inline std::vector<RankingOutcome> rerank_dataset(const RerankerModel& model, const Dataset& dataset,
                                                  const FeatureTable& features,
                                                  const std::vector<std::string>& test_methods,
                                                  std::size_t workers = 1) {
  check_test_methods(model, test_methods);
  require(features.values.size() == dataset.size(), "feature table does not cover the dataset");
  std::vector<RankingOutcome> outcomes(dataset.size());
  parallel_for(dataset.size(), workers,
               [&](std::size_t e) { outcomes[e] = rerank(model, dataset[e], features.values[e], test_methods); });
  return outcomes;
}

/// Per-metric mean over examples of the chosen candidate's raw score.
inline std::map<std::string, double> mean_scores(const Dataset& dataset, const std::vector<std::size_t>& chosen,
                                                 const std::vector<std::string>& metrics) {
  require(chosen.size() == dataset.size(), "selection does not cover the dataset");
  require(!dataset.empty(), "cannot average over an empty dataset");
  std::map<std::string, double> out;
  for (const auto& metric : metrics) {
    double total = 0.0;
    for (std::size_t e = 0; e < dataset.size(); ++e) total += dataset[e].candidates.at(chosen[e]).score(metric);
    out[metric] = total / static_cast<double>(dataset.size());
  }
  return out;
}

inline std::vector<std::size_t> selected_indices(const std::vector<RankingOutcome>& outcomes) {
  std::vector<std::size_t> out;
  for (const auto& o : outcomes) out.push_back(o.selected);
  return out;
}

/// Load-order-first candidate of `method` in every example.
inline std::vector<std::size_t> base_candidates(const Dataset& dataset, const std::string& method) {
  std::vector<std::size_t> out;
  for (const auto& example : dataset) {
    std::optional<std::size_t> first;
    for (std::size_t i = 0; i < example.candidates.size() && !first; ++i)
      if (example.candidates[i].method == method) first = i;
    if (!first) throw ValidationError("example '" + example.id + "' has no candidate from method '" + method + "'");
    out.push_back(*first);
  }
  return out;
}

/// Candidate with the highest score on `metric` per example (first on ties).
inline std::vector<std::size_t> oracle_selection(const Dataset& dataset, const std::vector<std::string>& methods,
                                                 const std::string& metric) {
  std::vector<std::size_t> out;
  for (const auto& example : dataset) {
    const auto pool = merge_pools(example, methods);
    const auto scores = pool_scores(example, pool, metric);
    out.push_back(pool[static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin())]);
  }
  return out;
}

/// Per-metric mean of the per-example pool maximum.
inline std::map<std::string, double> oracle_scores(const Dataset& dataset, const std::vector<std::string>& metrics,
                                                   const std::vector<std::string>& methods) {
  require(!dataset.empty(), "oracle_scores: empty dataset");
  std::map<std::string, double> out;
  for (const auto& metric : metrics) {
    double total = 0.0;
    for (const auto& example : dataset) {
      const auto scores = pool_scores(example, merge_pools(example, methods), metric);
      total += *std::max_element(scores.begin(), scores.end());
    }
    out[metric] = total / static_cast<double>(dataset.size());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Recall

/// Probability that a uniformly random ranking of m candidates, m_best of
/// which are best, places a best one in the top k:
/// (C(m, m_best) - C(m - k, m_best)) / C(m, m_best).
inline double random_baseline_recall(std::size_t m, std::size_t m_best, std::size_t k) {
  require(m_best >= 1 && m_best <= m, "random_baseline_recall: need 1 <= m_best <= m");
  require(k >= 1 && k <= m, "random_baseline_recall: need 1 <= k <= m");
  if (m - k < m_best) return 1.0;
  // C(m-k, b) / C(m, b) = prod_{i<b} (m-k-i) / (m-i)
  double miss = 1.0;
  for (std::size_t i = 0; i < m_best; ++i)
    miss *= static_cast<double>(m - k - i) / static_cast<double>(m - i);
  return 1.0 - miss;
}

struct RecallCurve {
  std::vector<std::size_t> k;
  std::vector<double> model;
  std::vector<double> random_baseline;
  std::vector<double> base_order;
};

/// Best-candidate recall at k = 1..max_k. The best set of an example is the
/// argmax set of summed per-pool-normalized metric scores over the outcome's
/// pool; k beyond a pool's size counts as the whole pool.
inline RecallCurve recall_at_k(const std::vector<RankingOutcome>& outcomes, const Dataset& dataset,
                               const std::vector<std::string>& metrics, std::size_t max_k) {
  require(outcomes.size() == dataset.size(), "recall_at_k: outcomes do not cover the dataset");
  require(max_k >= 1, "recall_at_k: max_k must be at least 1");
  RecallCurve curve;
  for (std::size_t k = 1; k <= max_k; ++k) curve.k.push_back(k);
  curve.model.assign(max_k, 0.0);
  curve.random_baseline.assign(max_k, 0.0);
  curve.base_order.assign(max_k, 0.0);
  if (dataset.empty()) return curve;
  for (std::size_t e = 0; e < dataset.size(); ++e) {
    const auto& o = outcomes[e];
    const auto best = best_candidate_set(dataset[e], o.pool, metrics);
    auto is_best = [&](std::size_t idx) { return std::find(best.begin(), best.end(), idx) != best.end(); };
    const std::size_t m = o.pool.size();
    std::size_t first_model = m, first_base = m;
    for (std::size_t r = 0; r < m; ++r) {
      if (first_model == m && is_best(o.order[r])) first_model = r;
      if (first_base == m && is_best(o.pool[r])) first_base = r;
    }
    for (std::size_t k = 1; k <= max_k; ++k) {
      const std::size_t kk = std::min(k, m);
      curve.model[k - 1] += first_model < kk ? 1.0 : 0.0;
      curve.base_order[k - 1] += first_base < kk ? 1.0 : 0.0;
      curve.random_baseline[k - 1] += random_baseline_recall(m, best.size(), kk);
    }
  }
  const double n = static_cast<double>(dataset.size());
  for (std::size_t k = 0; k < max_k; ++k) {
    curve.model[k] /= n;
    curve.base_order[k] /= n;
    curve.random_baseline[k] /= n;
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Significance

/// Per-metric flag: significant iff p < alpha against every baseline.
/// `p_values[metric][method]`.
inline std::map<std::string, bool> significance_flags(
    const std::map<std::string, std::map<std::string, double>>& p_values, double alpha = 0.05) {
  std::map<std::string, bool> out;
  for (const auto& [metric, per_method] : p_values) {
    require(!per_method.empty(), "significance: metric '" + metric + "' has no baselines");
    bool all = true;
    for (const auto& [method, p] : per_method) all = all && p < alpha;
    out[metric] = all;
  }
  return out;
}

struct SignificanceReport {
  std::map<std::string, std::map<std::string, double>> p_values;  // [metric][method]
  std::map<std::string, bool> significant;
};

/// `system[metric]` and `baselines[method][metric]` are per-example score
/// lists aligned by example.
inline SignificanceReport significance_report(
    const std::map<std::string, std::vector<double>>& system,
    const std::map<std::string, std::map<std::string, std::vector<double>>>& baselines, double alpha = 0.05) {
  require(!baselines.empty(), "significance: no baselines");
  SignificanceReport report;
  for (const auto& [metric, scores] : system) {
    for (const auto& [method, per_metric] : baselines) {
      auto it = per_metric.find(metric);
      require(it != per_metric.end(), "significance: baseline '" + method + "' lacks metric '" + metric + "'");
      require(it->second.size() == scores.size(), "significance: baseline '" + method + "' is misaligned");
      report.p_values[metric][method] = paired_t_test(scores, it->second).p;
    }
  }
  report.significant = significance_flags(report.p_values, alpha);
  return report;
}

/// Per-example raw scores of chosen candidates.
inline std::map<std::string, std::vector<double>> per_example_scores(const Dataset& dataset,
                                                                     const std::vector<std::size_t>& chosen,
                                                                     const std::vector<std::string>& metrics) {
  require(chosen.size() == dataset.size(), "selection does not cover the dataset");
  std::map<std::string, std::vector<double>> out;
  for (const auto& metric : metrics)
    for (std::size_t e = 0; e < dataset.size(); ++e)
      out[metric].push_back(dataset[e].candidates.at(chosen[e]).score(metric));
  return out;
}

// ---------------------------------------------------------------------------
// Selection overlap

struct OverlapStats {
  double picks_base = 0.0;
  double picks_best = 0.0;
};

inline OverlapStats overlap_stats(const std::vector<RankingOutcome>& outcomes, const Dataset& dataset,
                                  const std::vector<std::string>& metrics, const std::string& base_method) {
  require(outcomes.size() == dataset.size(), "overlap_stats: outcomes do not cover the dataset");
  OverlapStats stats;
  if (dataset.empty()) return stats;
  const auto base = base_candidates(dataset, base_method);
  for (std::size_t e = 0; e < dataset.size(); ++e) {
    if (outcomes[e].selected == base[e]) stats.picks_base += 1.0;
    const auto best = best_candidate_set(dataset[e], outcomes[e].pool, metrics);
    if (std::find(best.begin(), best.end(), outcomes[e].selected) != best.end()) stats.picks_best += 1.0;
  }
  stats.picks_base /= static_cast<double>(dataset.size());
  stats.picks_best /= static_cast<double>(dataset.size());
  return stats;
}

// ---------------------------------------------------------------------------
// Candidate subsampling

struct SubsamplePoint {
  std::size_t k = 0;
  std::map<std::string, double> mean_selected;
};

/// For each k, the mean over trials and examples of the selected candidate's
/// scores when re-ranking only a uniformly drawn k-subset of each pool.
/// Subsets keep pool order, so k = pool size reproduces the full re-ranking.
inline std::vector<SubsamplePoint> subsample_curve(const std::vector<RankingOutcome>& outcomes, const Dataset& dataset,
                                                   const std::vector<std::size_t>& ks, std::size_t trials,
                                                   const std::vector<std::string>& metrics, std::uint64_t seed) {
  require(outcomes.size() == dataset.size(), "subsample_curve: outcomes do not cover the dataset");
  require(trials >= 1, "subsample_curve: trials must be at least 1");
  require(!dataset.empty(), "subsample_curve: empty dataset");
  std::vector<SubsamplePoint> curve;
  for (std::size_t ki = 0; ki < ks.size(); ++ki) {
    const std::size_t k = ks[ki];
    require(k >= 1, "subsample_curve: k must be at least 1");
    SubsamplePoint point{k, {}};
    for (const auto& metric : metrics) point.mean_selected[metric] = 0.0;
    Rng rng(mix_seed(seed, ki));
    for (std::size_t t = 0; t < trials; ++t) {
      for (std::size_t e = 0; e < dataset.size(); ++e) {
        const auto& o = outcomes[e];
        const std::size_t m = o.pool.size();
        if (k > m)
          throw ValidationError("subsample size " + std::to_string(k) + " exceeds the pool size " + std::to_string(m) +
                                " of example '" + dataset[e].id + "'");
        std::vector<std::size_t> positions(m);
        std::iota(positions.begin(), positions.end(), std::size_t{0});
        if (k < m) {
          // Partial Fisher-Yates: the first k entries are a uniform k-subset.
          for (std::size_t i = 0; i < k; ++i) std::swap(positions[i], positions[i + rng.index(m - i)]);
          positions.resize(k);
          std::sort(positions.begin(), positions.end());
        }
        std::size_t best = positions.front();
        for (std::size_t pos : positions)
          if (o.prob_sums[pos] > o.prob_sums[best]) best = pos;
        const auto& chosen = dataset[e].candidates[o.pool[best]];
        for (const auto& metric : metrics) point.mean_selected[metric] += chosen.score(metric);
      }
    }
    const double denom = static_cast<double>(trials * dataset.size());
    for (auto& [metric, v] : point.mean_selected) v /= denom;
    curve.push_back(std::move(point));
  }
  return curve;
}

// ---------------------------------------------------------------------------
// Gate utilization and metric correlation

/// [task][expert] mean gate weight over every candidate of every example.
inline std::vector<std::vector<double>> expert_utilization(const RerankerModel& model, const Dataset& dataset,
                                                           const FeatureTable& features) {
  const std::size_t tasks = model.config.num_tasks, experts = model.config.experts();
  std::vector<std::vector<double>> usage(tasks, std::vector<double>(experts, 0.0));
  std::size_t count = 0;
  for (std::size_t e = 0; e < dataset.size(); ++e)
    for (std::size_t i = 0; i < dataset[e].candidates.size(); ++i) {
      const auto result = forward(model, features.at(e, i));
      for (std::size_t k = 0; k < tasks; ++k)
        for (std::size_t j = 0; j < experts; ++j) usage[k][j] += result.gates[k][j];
      ++count;
    }
  if (count == 0) return usage;
  for (auto& row : usage)
    for (auto& v : row) v /= static_cast<double>(count);
  return usage;
}

/// Pearson correlation between metrics over all candidates of `method`
/// (every candidate when `method` is empty).
inline std::vector<std::vector<double>> metric_correlation_report(const Dataset& dataset,
                                                                  const std::vector<std::string>& metrics,
                                                                  const std::string& method = "") {
  std::vector<std::vector<double>> columns(metrics.size());
  for (const auto& example : dataset)
    for (const auto& c : example.candidates) {
      if (!method.empty() && c.method != method) continue;
      for (std::size_t j = 0; j < metrics.size(); ++j) columns[j].push_back(c.score(metrics[j]));
    }
  std::vector<std::vector<double>> r(metrics.size(), std::vector<double>(metrics.size(), 1.0));
  for (std::size_t a = 0; a < metrics.size(); ++a)
    for (std::size_t b = a + 1; b < metrics.size(); ++b) {
      double value;
      try {
        value = pearson(columns[a], columns[b]);
      } catch (const ValidationError& e) {
        throw ValidationError("correlation between '" + metrics[a] + "' and '" + metrics[b] + "': " + e.what());
      }
      r[a][b] = r[b][a] = value;
    }
  if (metrics.size() == 1) {
    // Still reject a constant column.
    (void)pearson(columns[0], columns[0]);
  }
  return r;
}

// ---------------------------------------------------------------------------
// Novelty

struct NoveltyRow {
  std::size_t n = 0;
  double mean = 0.0;
  std::size_t counted = 0;
  std::size_t skipped = 0;  // summaries shorter than n
};

struct SummaryPair {
  std::string summary;
  std::string source;
};

inline std::vector<NoveltyRow> novelty_report(const std::vector<SummaryPair>& pairs,
                                              const std::vector<std::size_t>& n_values = {1, 2, 3, 4},
                                              const TokenizerConfig& tokenizer = TokenizerConfig::surface()) {
  std::vector<NoveltyRow> rows;
  for (std::size_t n : n_values) rows.push_back({n, 0.0, 0, 0});
  for (const auto& pair : pairs) {
    const auto summary = tokenize(pair.summary, tokenizer);
    const auto source = tokenize(pair.source, tokenizer);
    for (auto& row : rows) {
      if (summary.size() < row.n) {
        ++row.skipped;
        continue;
      }
      row.mean += novel_ngram_fraction(summary, source, row.n);
      ++row.counted;
    }
  }
  for (auto& row : rows)
    if (row.counted) row.mean /= static_cast<double>(row.counted);
  return rows;
}

inline std::vector<SummaryPair> selected_pairs(const Dataset& dataset, const std::vector<std::size_t>& chosen) {
  std::vector<SummaryPair> out;
  for (std::size_t e = 0; e < dataset.size(); ++e)
    out.push_back({dataset[e].candidates.at(chosen.at(e)).text, dataset[e].source});
  return out;
}

inline std::vector<SummaryPair> reference_pairs(const Dataset& dataset) {
  std::vector<SummaryPair> out;
  for (const auto& example : dataset) out.push_back({example.reference, example.source});
  return out;
}

}  // namespace summarank
