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
#include <map>
#include <span>
#include <string>
#include <vector>

#include "summarank/errors.hpp"
#include "summarank/textproc.hpp"

namespace summarank {

struct ScoreTriple {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;

  static ScoreTriple from(double p, double r) {
    return {p, r, p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0};
  }
};

/// Raw per-metric scores for one candidate. ROUGE values live on [0, 1].
using ScoreVector = std::map<std::string, double>;

inline ScoreTriple rouge_n(std::span<const std::string> candidate, std::span<const std::string> reference,
                           std::size_t n) {
  require(n >= 1, "rouge_n needs n >= 1");
  const NGramMultiset cand(candidate, n);
  const NGramMultiset ref(reference, n);
  if (cand.empty() || ref.empty()) return {};
  const double overlap = static_cast<double>(cand.clipped_overlap(ref));
  return ScoreTriple::from(overlap / static_cast<double>(cand.total()), overlap / static_cast<double>(ref.total()));
}

inline std::size_t lcs_length(std::span<const std::string> a, std::span<const std::string> b) {
  if (a.empty() || b.empty()) return 0;
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

/// Whole-sequence LCS variant (no sentence splitting).
inline ScoreTriple rouge_l(std::span<const std::string> candidate, std::span<const std::string> reference) {
  if (candidate.empty() || reference.empty()) return {};
  const double lcs = static_cast<double>(lcs_length(candidate, reference));
  return ScoreTriple::from(lcs / static_cast<double>(candidate.size()), lcs / static_cast<double>(reference.size()));
}

/// Min-max rescaling within one pool; a constant pool maps to 0.5 everywhere.
inline std::vector<double> normalize_pool_scores(std::span<const double> raw) {
  require(!raw.empty(), "cannot normalize an empty score list");
  const auto [lo, hi] = std::minmax_element(raw.begin(), raw.end());
  const double min = *lo, range = *hi - *lo;
  std::vector<double> out(raw.size(), 0.5);
  if (range > 0.0)
    for (std::size_t i = 0; i < raw.size(); ++i) out[i] = (raw[i] - min) / range;
  return out;
}

/// Sample Pearson correlation.
inline double pearson(std::span<const double> xs, std::span<const double> ys) {
  require(xs.size() == ys.size(), "pearson: length mismatch");
  require(xs.size() >= 2, "pearson: need at least two points");
  const double n = static_cast<double>(xs.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double dx = xs[i] - mx, dy = ys[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) throw ValidationError("undefined correlation: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

/// Mean over metrics of the percentage improvement of `system` over the
/// per-metric best baseline value.
inline double mean_relative_gain(const std::map<std::string, double>& system,
                                 const std::map<std::string, double>& baselines) {
  require(!system.empty(), "mean_relative_gain: no metrics");
  require(system.size() == baselines.size(), "mean_relative_gain: metric keys differ");
  double total = 0.0;
  for (const auto& [metric, value] : system) {
    auto it = baselines.find(metric);
    require(it != baselines.end(), "mean_relative_gain: baseline missing metric " + metric);
    require(it->second > 0.0, "mean_relative_gain: baseline for " + metric + " must be positive");
    total += 100.0 * (value / it->second - 1.0);
  }
  return total / static_cast<double>(system.size());
}

/// Per-metric maximum over several baselines (one map per decoding method).
inline std::map<std::string, double> best_baselines(const std::vector<std::map<std::string, double>>& per_method) {
  require(!per_method.empty(), "best_baselines: no baselines");
  std::map<std::string, double> best = per_method.front();
  for (const auto& method : per_method) {
    require(method.size() == best.size(), "best_baselines: metric keys differ");
    for (const auto& [metric, value] : method) {
      auto it = best.find(metric);
      require(it != best.end(), "best_baselines: metric keys differ");
      it->second = std::max(it->second, value);
    }
  }
  return best;
}

struct MetricId {
  std::string name;
  bool native = false;
};

/// Every metric the loader knows about. ROUGE-1/2/L are native and always
/// present; external metrics are ingested from the dataset file.
class MetricRegistry {
 public:
  MetricRegistry() {
    for (const char* name : {"rouge1", "rouge2", "rougeL"}) metrics_.push_back({name, true});
  }

  static bool is_native_name(const std::string& name) {
    return name == "rouge1" || name == "rouge2" || name == "rougeL";
  }

  MetricRegistry& register_external_metric(const std::string& name) {
    require(!name.empty(), "metric name must be nonempty");
    require(!contains(name), "metric '" + name + "' is already registered");
    metrics_.push_back({name, false});
    return *this;
  }

  bool contains(const std::string& name) const {
    return std::any_of(metrics_.begin(), metrics_.end(), [&](const MetricId& m) { return m.name == name; });
  }

  bool is_native(const std::string& name) const {
    for (const auto& m : metrics_)
      if (m.name == name) return m.native;
    return false;
  }

  const std::vector<MetricId>& metrics() const noexcept { return metrics_; }

  std::vector<std::string> external_names() const {
    std::vector<std::string> out;
    for (const auto& m : metrics_)
      if (!m.native) out.push_back(m.name);
    return out;
  }

  std::string describe() const {
    std::string out;
    for (const auto& m : metrics_) out += (out.empty() ? "" : ", ") + m.name;
    return out;
  }

  /// Builds a registry whose externals are the non-native names in `active`.
  static MetricRegistry for_metrics(const std::vector<std::string>& active) {
    MetricRegistry registry;
    for (const auto& name : active)
      if (!is_native_name(name) && !registry.contains(name)) registry.register_external_metric(name);
    return registry;
  }

 private:
  std::vector<MetricId> metrics_;
};

/// F1 of a native metric over pre-tokenized (stemmed) texts.
inline double native_score(const std::string& metric, std::span<const std::string> candidate,
                           std::span<const std::string> reference) {
  if (metric == "rouge1") return rouge_n(candidate, reference, 1).f1;
  if (metric == "rouge2") return rouge_n(candidate, reference, 2).f1;
  if (metric == "rougeL") return rouge_l(candidate, reference).f1;
  throw ValidationError("'" + metric + "' is not a native metric");
}

}  // namespace summarank
