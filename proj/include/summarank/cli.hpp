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
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "summarank/candidates.hpp"
#include "summarank/config.hpp"
#include "summarank/errors.hpp"
#include "summarank/evaluation.hpp"
#include "summarank/features.hpp"
#include "summarank/metrics.hpp"
#include "summarank/moe_net.hpp"
#include "summarank/reports.hpp"
#include "summarank/synthetic.hpp"
#include "summarank/training.hpp"

namespace summarank::cli {

namespace fs = std::filesystem;

/// Files a command will produce. Nothing touches the output directory until
/// commit(), which runs only after every input has been validated and every
/// output rendered.
class Outputs {
 public:
  void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }
  void add(const Report& report) {
    add(report.name + ".txt", report.text());
    add(report.name + ".jsonl", report.jsonl());
  }

  void commit(const fs::path& dir) const {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, content] : files_) write_text_file(dir / name, content);
  }

  const std::vector<std::pair<std::string, std::string>>& files() const { return files_; }

 private:
  std::vector<std::pair<std::string, std::string>> files_;
};

struct CommonOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out_dir;
  bool strict = false;
};

inline void log_line(const std::string& message) { std::cerr << "summarank: " << message << '\n'; }

inline RunConfig resolve_config(const CommonOptions& common) {
  RunConfig config = common.config_path.empty() ? RunConfig{} : load_config(common.config_path);
  if (common.seed) config.seed = *common.seed;
  if (common.workers) config.workers = *common.workers;
  if (common.out_dir) config.out_dir = *common.out_dir;
  if (common.strict) config.strict = true;
  return config;
}

inline std::string dump_json(const nlohmann::json& j) { return j.dump(2) + "\n"; }

inline Dataset load(const std::string& path, const RunConfig& config, bool compute_native = true) {
  if (path.empty()) throw ValidationError("no dataset path given");
  LoadOptions options;
  options.registry = config.registry();
  options.strict = config.strict;
  options.compute_native = compute_native;
  std::vector<std::string> warnings;
  Dataset dataset = load_dataset(path, options, &warnings);
  for (const auto& w : warnings) log_line("warning: " + w);
  return dataset;
}

/// Methods in first-seen order across the dataset.
inline std::vector<std::string> methods_in(const Dataset& dataset) {
  std::vector<std::string> out;
  for (const auto& example : dataset)
    for (const auto& c : example.candidates)
      if (std::find(out.begin(), out.end(), c.method) == out.end()) out.push_back(c.method);
  return out;
}

inline void check_scored(const Dataset& dataset, const std::vector<std::string>& metrics) {
  for (const auto& example : dataset)
    for (std::size_t i = 0; i < example.candidates.size(); ++i)
      for (const auto& m : metrics)
        if (!example.candidates[i].scores.contains(m))
          throw ValidationError("example '" + example.id + "', candidate " + std::to_string(i) +
                                ": missing score for metric '" + m + "'");
}

inline FeatureTable features_for(const Dataset& dataset, const RunConfig& config, const std::string& feature_path) {
  if (config.features.mode == FeatureMode::lexical) return featurize(dataset, config.features, nullptr, config.workers);
  const FeatureStore store = feature_path.empty() ? store_from_dataset(dataset) : load_precomputed(feature_path, dataset);
  return featurize(dataset, config.features, &store, config.workers);
}

// ---------------------------------------------------------------------------
// score

inline void cmd_score(const RunConfig& base, const std::string& input, const std::vector<std::string>& metrics_opt,
                      Outputs& out) {
  RunConfig config = base;
  if (!metrics_opt.empty()) config.metrics = metrics_opt;
  config.validate();
  Dataset dataset = load(input, config, false);
  const TokenizerConfig tokenizer = TokenizerConfig::rouge();
  for (auto& example : dataset) {
    const Tokens reference = tokenize(example.reference, tokenizer);
    for (auto& c : example.candidates) {
      const Tokens tokens = tokenize(c.text, tokenizer);
      for (const auto& m : config.metrics)
        if (MetricRegistry::is_native_name(m)) c.scores[m] = native_score(m, tokens, reference);
    }
  }
  check_scored(dataset, config.metrics);
  std::ostringstream data;
  for (const auto& example : dataset) data << to_json(example).dump() << '\n';
  out.add("scored.jsonl", data.str());
  out.add("resolved_config.json", dump_json(to_json(config)));
  log_line("scored " + std::to_string(dataset.size()) + " examples");
}

// ---------------------------------------------------------------------------
// stats

inline void cmd_stats(const RunConfig& base, const std::string& input, Outputs& out) {
  RunConfig config = base;
  config.validate();
  const Dataset dataset = load(input, config);
  require(!dataset.empty(), "stats: dataset is empty");
  check_scored(dataset, config.metrics);
  const auto methods = config.train_methods.empty() ? methods_in(dataset) : config.train_methods;
  require(!methods.empty(), "stats: the dataset has no candidates");

  Report oracle{"oracle", "Oracle scores: mean over examples of the pool maximum (x100)", {"methods", "mean_pool_size"}, {}, {}};
  for (const auto& m : config.metrics) oracle.columns.push_back(m);
  auto oracle_row = [&](const std::string& label, const std::vector<std::string>& subset) {
    double pool = 0.0;
    for (const auto& example : dataset) pool += static_cast<double>(merge_pools(example, subset).size());
    std::vector<Cell> row{Cell::str(label), Cell::real(pool / static_cast<double>(dataset.size()))};
    const auto scores = oracle_scores(dataset, config.metrics, subset);
    for (const auto& m : config.metrics) row.push_back(Cell::score(scores.at(m)));
    oracle.add(std::move(row));
  };
  for (const auto& m : methods) oracle_row(m, {m});
  if (methods.size() > 1) {
    std::string label;
    for (const auto& m : methods) label += (label.empty() ? "" : "+") + m;
    oracle_row(label, methods);
  }

  Report unique{"unique_scores", "Mean number of distinct scores per pool (6-decimal rounding)", {"method"}, {}, {}};
  Report identical{"identical_fraction", "Fraction of pools whose candidates all share one score", {"method"}, {}, {}};
  for (const auto& m : config.metrics) {
    unique.columns.push_back(m);
    identical.columns.push_back(m);
  }
  for (const auto& method : methods) {
    std::vector<Cell> u{Cell::str(method)}, id{Cell::str(method)};
    for (const auto& metric : config.metrics) {
      double total = 0.0;
      std::size_t counted = 0;
      for (const auto& example : dataset) {
        std::vector<double> scores;
        for (const auto& c : example.candidates)
          if (c.method == method) scores.push_back(c.score(metric));
        if (scores.empty()) continue;
        total += static_cast<double>(unique_score_count(scores));
        ++counted;
      }
      u.push_back(Cell::real(counted ? total / static_cast<double>(counted) : 0.0));
      id.push_back(Cell::fraction(identical_pool_fraction(dataset, metric, method)));
    }
    unique.add(std::move(u));
    identical.add(std::move(id));
  }

  Report correlation{"correlation", "Pearson correlation between metrics over candidates", {"method", "metric"}, {}, {}};
  for (const auto& m : config.metrics) correlation.columns.push_back(m);
  for (const auto& method : methods) {
    const auto r = metric_correlation_report(dataset, config.metrics, method);
    for (std::size_t a = 0; a < config.metrics.size(); ++a) {
      std::vector<Cell> row{Cell::str(method), Cell::str(config.metrics[a])};
      for (std::size_t b = 0; b < config.metrics.size(); ++b) row.push_back(Cell::fraction(r[a][b]));
      correlation.add(std::move(row));
    }
  }
  for (const auto* r : {&oracle, &unique, &identical, &correlation}) out.add(*r);
  out.add("resolved_config.json", dump_json(to_json(config)));
}

// ---------------------------------------------------------------------------
// split

struct SplitOptions {
  std::string input;
  bool merge = false;
  std::string manifest;
  std::string half_a, half_b;
  std::string generator_a, generator_b;
  std::vector<std::string> held_out;
};

inline std::string dataset_text(const Dataset& dataset) {
  std::ostringstream s;
  for (const auto& example : dataset) s << to_json(example).dump() << '\n';
  return s.str();
}

inline void cmd_split(const RunConfig& base, const SplitOptions& opt, Outputs& out) {
  RunConfig config = base;
  config.validate();
  if (!opt.merge) {
    const Dataset full = load(opt.input.empty() ? config.train_path : opt.input, config);
    auto [manifest, halves] = assign_halves(full, config.split_seed);
    manifest.config_hash = config_hash(to_json(config));
    out.add("half_a.jsonl", dataset_text(halves.first));
    out.add("half_b.jsonl", dataset_text(halves.second));
    out.add("split_manifest.json", dump_json(to_json(manifest)));
    log_line("split " + std::to_string(full.size()) + " examples into " + std::to_string(halves.first.size()) + " + " +
             std::to_string(halves.second.size()));
  } else {
    require(!opt.manifest.empty(), "split --merge needs --manifest");
    require(!opt.half_a.empty() && !opt.half_b.empty(), "split --merge needs --half-a and --half-b");
    HalfSplitManifest manifest = load_manifest(opt.manifest, false);
    if (!opt.generator_a.empty()) manifest.generator_a = opt.generator_a;
    if (!opt.generator_b.empty()) manifest.generator_b = opt.generator_b;
    const Dataset a = load(opt.half_a, config), b = load(opt.half_b, config);
    std::vector<std::string> held_out;
    for (const auto& path : opt.held_out)
      for (const auto& example : load(path, config)) held_out.push_back(example.id);
    const Dataset merged = run_half_split_protocol(manifest, a, b, held_out, to_json(config));
    out.add("train_merged.jsonl", dataset_text(merged));
    out.add("split_manifest.json", dump_json(to_json(manifest)));
    log_line("merged " + std::to_string(merged.size()) + " cross-inferred examples");
  }
  out.add("resolved_config.json", dump_json(to_json(config)));
}

// ---------------------------------------------------------------------------
// train

inline void cmd_train(const RunConfig& base, Outputs& out) {
  RunConfig config = base;
  if (config.train_path.empty()) throw ValidationError("train: no training dataset (set train_path or --train)");
  if (config.val_path.empty()) throw ValidationError("train: no validation dataset (set val_path or --val)");
  config.validate();
  const Dataset train_data = load(config.train_path, config);
  const Dataset val_data = load(config.val_path, config);
  const auto present = methods_in(train_data);
  if (config.train_methods.empty()) config.train_methods = present;
  for (const auto& m : config.train_methods)
    if (std::find(present.begin(), present.end(), m) == present.end())
      throw ValidationError("train: method '" + m + "' has no candidates in the training dataset");
  config.validate();
  check_scored(train_data, config.metrics);
  check_scored(val_data, config.metrics);
  const FeatureTable train_features = features_for(train_data, config, config.features_train_path);
  const FeatureTable val_features = features_for(val_data, config, config.features_val_path);
  const auto model_config = config.model_config(train_features.dim);
  std::ostringstream progress;
  const auto result = train(train_data, train_features, val_data, val_features, model_config, config.train_config(), &progress);
  std::istringstream lines(progress.str());
  for (std::string line; std::getline(lines, line);) log_line(line);
  out.add("model.bin", serialize_model(result.selected().model));
  out.add("checkpoints.json", dump_json(checkpoint_manifest(result)));
  out.add("resolved_config.json", dump_json(to_json(config)));
  log_line("selected epoch " + std::to_string(result.selected().epoch));
}

// ---------------------------------------------------------------------------
// rerank

inline constexpr const char* kSelectionsFormat = "summarank-selections";

inline void cmd_rerank(const RunConfig& base, const std::string& model_path, const std::string& input,
                       const std::vector<std::string>& methods_opt, Outputs& out) {
  RunConfig config = base;
  require(!model_path.empty(), "rerank: --model is required");
  const RerankerModel model = load_model(model_path);
  if (!methods_opt.empty()) config.test_methods = methods_opt;
  if (config.train_methods.empty()) config.train_methods = model.train_methods;
  const auto methods = config.effective_test_methods();
  check_test_methods(model, methods);
  config.validate();
  const std::string path = input.empty() ? config.test_path : input;
  const Dataset dataset = load(path, config);
  const FeatureTable features = features_for(dataset, config, config.features_test_path);
  if (!dataset.empty() && features.dim != model.config.input_dim)
    throw ValidationError("rerank: feature dimension " + std::to_string(features.dim) +
                          " does not match the model input_dim " + std::to_string(model.config.input_dim));
  const auto outcomes = rerank_dataset(model, dataset, features, methods, config.workers);

  std::ostringstream s;
  s << nlohmann::json{{"format", kSelectionsFormat},
                      {"version", 1},
                      {"model_metrics", model.metrics},
                      {"methods", methods},
                      {"examples", dataset.size()}}
           .dump()
    << '\n';
  for (std::size_t e = 0; e < dataset.size(); ++e) {
    const auto& o = outcomes[e];
    const auto& chosen = dataset[e].candidates[o.selected];
    s << nlohmann::json{{"id", dataset[e].id},
                        {"selected", o.selected},
                        {"method", chosen.method},
                        {"text", chosen.text},
                        {"pool", o.pool},
                        {"prob_sums", o.prob_sums},
                        {"order", o.order}}
             .dump()
      << '\n';
  }
  out.add("selections.jsonl", s.str());
  out.add("resolved_config.json", dump_json(to_json(config)));
  log_line("reranked " + std::to_string(dataset.size()) + " examples");
}

// ---------------------------------------------------------------------------
// eval

struct Selections {
  std::vector<std::string> methods;
  std::vector<std::string> model_metrics;
  std::vector<std::string> ids;
  std::vector<RankingOutcome> outcomes;
};

inline Selections load_selections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open selections file '" + path + "'");
  Selections sel;
  std::string line;
  std::size_t line_no = 0;
  bool header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = path + ":" + std::to_string(line_no);
    try {
      const auto j = nlohmann::json::parse(line);
      if (!header) {
        if (j.value("format", "") != kSelectionsFormat) throw ValidationError(where + ": not a selections file");
        sel.methods = j.at("methods").get<std::vector<std::string>>();
        sel.model_metrics = j.at("model_metrics").get<std::vector<std::string>>();
        header = true;
        continue;
      }
      RankingOutcome o;
      sel.ids.push_back(j.at("id").get<std::string>());
      o.selected = j.at("selected").get<std::size_t>();
      o.pool = j.at("pool").get<Pool>();
      o.prob_sums = j.at("prob_sums").get<std::vector<double>>();
      o.order = j.at("order").get<std::vector<std::size_t>>();
      if (o.prob_sums.size() != o.pool.size() || o.order.size() != o.pool.size() || o.order.empty() ||
          o.order.front() != o.selected)
        throw ValidationError(where + ": inconsistent selection record");
      for (double p : o.prob_sums) require_finite(p, "selection probabilities");
      sel.outcomes.push_back(std::move(o));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(where + ": malformed selection record (" + e.what() + ")");
    }
  }
  if (!header) throw ValidationError(path + ": missing selections header");
  return sel;
}

struct EvalOptions {
  std::string selections;
  std::string input;
  std::vector<std::string> baselines;
  std::string model;
  std::string base_method;
};

inline void cmd_eval(const RunConfig& base, const EvalOptions& opt, Outputs& out) {
  RunConfig config = base;
  require(!opt.selections.empty(), "eval: --selections is required");
  const Selections sel = load_selections(opt.selections);
  if (config.train_methods.empty()) config.train_methods = sel.methods;
  config.validate();
  const Dataset dataset = load(opt.input.empty() ? config.test_path : opt.input, config);
  check_scored(dataset, config.metrics);
  if (sel.ids.size() != dataset.size())
    throw ValidationError("eval: selections cover " + std::to_string(sel.ids.size()) + " examples but the dataset has " +
                          std::to_string(dataset.size()));
  for (std::size_t e = 0; e < dataset.size(); ++e) {
    if (sel.ids[e] != dataset[e].id)
      throw ValidationError("eval: selection " + std::to_string(e) + " is for '" + sel.ids[e] + "' but the dataset has '" +
                            dataset[e].id + "'");
    if (sel.outcomes[e].pool != merge_pools(dataset[e], sel.methods))
      throw ValidationError("eval: the candidate pool of '" + dataset[e].id + "' does not match the selections");
  }
  if (dataset.empty()) throw ValidationError("eval: dataset is empty");
  const auto& metrics = config.metrics;
  const auto chosen = selected_indices(sel.outcomes);

  // Metric table.
  Report table{"metric_table", "Mean scores of selected candidates (x100)", {"system"}, {}, {}};
  for (const auto& m : metrics) table.columns.push_back(m);
  auto table_row = [&](const std::string& label, const std::map<std::string, double>& scores) {
    std::vector<Cell> row{Cell::str(label)};
    for (const auto& m : metrics) row.push_back(Cell::score(scores.at(m)));
    table.add(std::move(row));
  };
  const auto system = mean_scores(dataset, chosen, metrics);
  table_row("reranker", system);
  std::map<std::string, std::vector<std::size_t>> baseline_choice;
  for (const auto& method : opt.baselines) {
    baseline_choice[method] = base_candidates(dataset, method);
    table_row(method, mean_scores(dataset, baseline_choice[method], metrics));
  }
  table_row("oracle", oracle_scores(dataset, metrics, sel.methods));

  // Gain and significance need baselines.
  Report gain{"gain", "Mean relative gain over the per-metric best baseline (percent)", {"system", "gain"}, {}, {}};
  Report significance{"significance", "Paired two-sided t-test of the reranker against each baseline",
                      {"metric", "baseline", "p_value", "significant"}, {}, {}};
  if (opt.baselines.empty()) {
    gain.notes.push_back("no baselines given; gain omitted");
    significance.notes.push_back("no baselines given; significance omitted");
  } else {
    std::vector<std::map<std::string, double>> per_method;
    for (const auto& method : opt.baselines) per_method.push_back(mean_scores(dataset, baseline_choice[method], metrics));
    gain.add({Cell::str("reranker"), Cell::percent(mean_relative_gain(system, best_baselines(per_method)))});
    std::map<std::string, std::map<std::string, std::vector<double>>> base_scores;
    for (const auto& method : opt.baselines)
      base_scores[method] = per_example_scores(dataset, baseline_choice[method], metrics);
    const auto report = significance_report(per_example_scores(dataset, chosen, metrics), base_scores, config.alpha);
    for (const auto& m : metrics)
      for (const auto& method : opt.baselines)
        significance.add({Cell::str(m), Cell::str(method), Cell::pvalue(report.p_values.at(m).at(method)),
                          Cell::str(report.significant.at(m) ? "yes" : "no")});
  }

  // Recall curve.
  std::size_t max_pool = 0;
  for (const auto& o : sel.outcomes) max_pool = std::max(max_pool, o.pool.size());
  const std::size_t K = std::min(config.recall_k, max_pool);
  const auto curve = recall_at_k(sel.outcomes, dataset, metrics, K);
  Report recall{"recall", "Best-candidate recall at k", {"k", "model", "random", "base_order"}, {}, {}};
  for (std::size_t i = 0; i < K; ++i)
    recall.add({Cell::count(static_cast<double>(curve.k[i])), Cell::fraction(curve.model[i]),
                Cell::fraction(curve.random_baseline[i]), Cell::fraction(curve.base_order[i])});

  // Overlap.
  const std::string base_method = !opt.base_method.empty()     ? opt.base_method
                                  : !config.base_method.empty() ? config.base_method
                                                                : sel.methods.front();
  const auto overlap = overlap_stats(sel.outcomes, dataset, metrics, base_method);
  Report overlap_report{"overlap", "Overlap of selections with the base and best candidates",
                        {"base_method", "picks_base", "picks_best"}, {}, {}};
  overlap_report.add({Cell::str(base_method), Cell::fraction(overlap.picks_base), Cell::fraction(overlap.picks_best)});

  // Novelty.
  Report novelty{"novelty", "Novel n-gram fraction against the source (x100)", {"system", "n", "novel", "counted", "skipped"},
                 {}, {}};
  auto novelty_rows = [&](const std::string& label, const std::vector<SummaryPair>& pairs) {
    for (const auto& row : novelty_report(pairs, config.novelty_n))
      novelty.add({Cell::str(label), Cell::count(static_cast<double>(row.n)), Cell::score(row.mean),
                   Cell::count(static_cast<double>(row.counted)), Cell::count(static_cast<double>(row.skipped))});
  };
  novelty_rows("reranker", selected_pairs(dataset, chosen));
  for (const auto& method : opt.baselines) novelty_rows(method, selected_pairs(dataset, baseline_choice[method]));
  novelty_rows("reference", reference_pairs(dataset));

  // Subsampling.
  Report subsample{"subsample", "Mean selected score when re-ranking random k-subsets (x100)", {"k"}, {}, {}};
  for (const auto& m : metrics) subsample.columns.push_back(m);
  if (config.subsample_ks.empty()) subsample.notes.push_back("no subsample sizes configured");
  for (const auto& point :
       config.subsample_ks.empty()
           ? std::vector<SubsamplePoint>{}
           : subsample_curve(sel.outcomes, dataset, config.subsample_ks, config.subsample_trials, metrics, config.seed)) {
    std::vector<Cell> row{Cell::count(static_cast<double>(point.k))};
    for (const auto& m : metrics) row.push_back(Cell::score(point.mean_selected.at(m)));
    subsample.add(std::move(row));
  }

  // Expert utilization needs the model.
  Report utilization{"utilization", "Mean gate weight per task and expert", {"task"}, {}, {}};
  if (opt.model.empty()) {
    utilization.notes.push_back("no model given; utilization omitted");
  } else {
    const RerankerModel model = load_model(opt.model);
    const FeatureTable features = features_for(dataset, config, config.features_test_path);
    require(features.dim == model.config.input_dim, "eval: feature dimension does not match the model");
    const auto usage = expert_utilization(model, dataset, features);
    for (std::size_t j = 0; j < model.config.experts(); ++j) utilization.columns.push_back("expert" + std::to_string(j));
    for (std::size_t k = 0; k < usage.size(); ++k) {
      std::vector<Cell> row{Cell::str(model.metrics[k])};
      for (double x : usage[k]) row.push_back(Cell::fraction(x));
      utilization.add(std::move(row));
    }
  }

  for (const auto* r : {&table, &gain, &significance, &recall, &overlap_report, &novelty, &subsample, &utilization})
    out.add(*r);
  out.add("resolved_config.json", dump_json(to_json(config)));
}

// ---------------------------------------------------------------------------
// synth

inline void cmd_synth(const RunConfig& base, SyntheticConfig synth, Outputs& out) {
  RunConfig config = base;
  config.validate();
  synth.seed = config.seed;
  out.add("synthetic.jsonl", dataset_text(generate_synthetic(synth)));
  out.add("resolved_config.json", dump_json(to_json(config)));
}

// ---------------------------------------------------------------------------
// Entry point

/// Runs one command line and returns the process exit code: 0 success,
/// 1 validation, 2 I/O, 3 non-finite numbers.
inline int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Re-rank summary candidates with a multi-gate mixture-of-experts model"};
  app.require_subcommand(1);
  CommonOptions common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", common.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--seed", common.seed, "Seed overriding the configuration");
    sub->add_option("--workers", common.workers, "Worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", common.out_dir, "Output directory");
    sub->add_flag("--strict", common.strict, "Reject unknown fields in dataset records");
  };

  std::string input, model_path;
  std::vector<std::string> metrics, methods;
  std::string train_path, val_path;

  auto* score = app.add_subcommand("score", "Compute native ROUGE scores for every candidate");
  add_common(score);
  score->add_option("--input", input, "Dataset file")->required();
  score->add_option("--metrics", metrics, "Metrics to compute (comma separated)")->delimiter(',');

  auto* stats = app.add_subcommand("stats", "Oracle, unique-score, identical-pool and correlation reports");
  add_common(stats);
  stats->add_option("--input", input, "Scored dataset file")->required();
  stats->add_option("--methods", methods, "Decoding methods (comma separated)")->delimiter(',');

  SplitOptions split_opt;
  auto* split = app.add_subcommand("split", "Assign halves for cross-inference, or merge cross-inferred halves");
  add_common(split);
  split->add_option("--input", split_opt.input, "Full training dataset");
  std::optional<std::uint64_t> split_seed;
  split->add_option("--split-seed", split_seed, "Seed of the half assignment");
  split->add_flag("--merge", split_opt.merge, "Merge cross-inferred halves instead of splitting");
  split->add_option("--manifest", split_opt.manifest, "Split manifest (merge)");
  split->add_option("--half-a", split_opt.half_a, "Candidates for half A from the generator trained on half B");
  split->add_option("--half-b", split_opt.half_b, "Candidates for half B from the generator trained on half A");
  split->add_option("--generator-a", split_opt.generator_a, "Provenance of the half A candidates");
  split->add_option("--generator-b", split_opt.generator_b, "Provenance of the half B candidates");
  split->add_option("--held-out", split_opt.held_out, "Validation or test datasets that must not overlap");

  auto* train_cmd = app.add_subcommand("train", "Train the re-ranker and keep the best validation checkpoint");
  add_common(train_cmd);
  train_cmd->add_option("--train", train_path, "Training dataset");
  train_cmd->add_option("--val", val_path, "Validation dataset");
  train_cmd->add_option("--methods", methods, "Training decoding methods (comma separated)")->delimiter(',');

  auto* rerank_cmd = app.add_subcommand("rerank", "Select one candidate per example");
  add_common(rerank_cmd);
  rerank_cmd->add_option("--model", model_path, "Model file")->required();
  rerank_cmd->add_option("--input", input, "Dataset file");
  rerank_cmd->add_option("--methods", methods, "Test-time decoding methods (comma separated)")->delimiter(',');

  EvalOptions eval_opt;
  auto* eval = app.add_subcommand("eval", "Evaluate selections against baselines and the oracle");
  add_common(eval);
  eval->add_option("--selections", eval_opt.selections, "Selections file from rerank")->required();
  eval->add_option("--input", eval_opt.input, "Dataset file");
  eval->add_option("--baselines", eval_opt.baselines, "Baseline decoding methods (comma separated)")->delimiter(',');
  eval->add_option("--model", eval_opt.model, "Model file for gate utilization");
  eval->add_option("--base-method", eval_opt.base_method, "Method whose first candidate is the base candidate");

  SyntheticConfig synth;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic scored dataset");
  add_common(synth_cmd);
  synth_cmd->add_option("--examples", synth.examples, "Number of examples");
  synth_cmd->add_option("--candidates", synth.candidates, "Candidates per example");
  synth_cmd->add_option("--id-prefix", synth.id_prefix, "Prefix of example ids");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  try {
    RunConfig config = resolve_config(common);
    Outputs out;
    if (*score) {
      cmd_score(config, input, metrics, out);
    } else if (*stats) {
      if (!methods.empty()) config.train_methods = methods;
      cmd_stats(config, input, out);
    } else if (*split) {
      if (split_seed) config.split_seed = *split_seed;
      cmd_split(config, split_opt, out);
    } else if (*train_cmd) {
      if (!train_path.empty()) config.train_path = train_path;
      if (!val_path.empty()) config.val_path = val_path;
      if (!methods.empty()) config.train_methods = methods;
      cmd_train(config, out);
    } else if (*rerank_cmd) {
      cmd_rerank(config, model_path, input, methods, out);
    } else if (*eval) {
      cmd_eval(config, eval_opt, out);
    } else if (*synth_cmd) {
      cmd_synth(config, synth, out);
    }
    out.commit(config.out_dir);
    return 0;
  } catch (const Error& e) {
    log_line(std::string("error: ") + e.what());
    return e.exit_code();
  } catch (const fs::filesystem_error& e) {
    log_line(std::string("error: ") + e.what());
    return static_cast<int>(Error::Kind::io);
  } catch (const nlohmann::json::exception& e) {
    log_line(std::string("error: ") + e.what());
    return static_cast<int>(Error::Kind::validation);
  }
}

}  // namespace summarank::cli
