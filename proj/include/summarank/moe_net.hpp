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
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <functional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <zlib.h>

#include <json.hpp>

#include "summarank/errors.hpp"
#include "summarank/parallel.hpp"
#include "summarank/rng.hpp"

namespace summarank {

// ---------------------------------------------------------------------------
// Configuration and parameters

struct ModelConfig {
  std::size_t input_dim = 16;
  std::array<std::size_t, 2> bottom_hidden{64, 64};
  std::array<std::size_t, 2> expert_hidden{64, 64};
  std::size_t num_tasks = 3;
  // 0 selects the default of twice the number of tasks.
  std::size_t num_experts = 0;
  double expert_dropout = 0.5;
  std::uint64_t seed = 0;

  std::size_t experts() const noexcept { return num_experts == 0 ? 2 * num_tasks : num_experts; }

  void validate() const {
    require(input_dim >= 1, "model input_dim must be at least 1");
    require(bottom_hidden[0] >= 1 && bottom_hidden[1] >= 1, "bottom hidden sizes must be at least 1");
    require(expert_hidden[0] >= 1 && expert_hidden[1] >= 1, "expert hidden sizes must be at least 1");
    require(num_tasks >= 1, "num_tasks must be at least 1");
    require(experts() >= 1, "num_experts must be at least 1");
    require(expert_dropout >= 0.0 && expert_dropout < 1.0, "expert_dropout must lie in [0, 1)");
  }
};

/// Row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
};

struct Dense {
  Matrix weight;  // out x in
  std::vector<double> bias;

  Dense() = default;
  Dense(std::size_t in, std::size_t out) : weight(out, in), bias(out, 0.0) {}

  std::size_t in() const noexcept { return weight.cols; }
  std::size_t out() const noexcept { return weight.rows; }

  void apply(std::span<const double> x, std::span<double> y) const {
    for (std::size_t r = 0; r < weight.rows; ++r) {
      const double* row = &weight.data[r * weight.cols];
      double s = bias[r];
      for (std::size_t c = 0; c < weight.cols; ++c) s += row[c] * x[c];
      y[r] = s;
    }
  }
};

/// Every learnable tensor of the re-ranker. Gradients and optimizer moments
/// use the same type.
struct Parameters {
  std::array<Dense, 2> bottom;
  std::vector<std::array<Dense, 2>> experts;
  std::vector<Matrix> gates;  // one E x h matrix per task, no bias
  std::vector<Dense> towers;  // one scalar head per task

  static Parameters zeros(const ModelConfig& config) {
    config.validate();
    Parameters p;
    const std::size_t h = config.bottom_hidden[1];
    p.bottom = {Dense(config.input_dim, config.bottom_hidden[0]), Dense(config.bottom_hidden[0], h)};
    p.experts.assign(config.experts(),
                     {Dense(h, config.expert_hidden[0]), Dense(config.expert_hidden[0], config.expert_hidden[1])});
    p.gates.assign(config.num_tasks, Matrix(config.experts(), h));
    p.towers.assign(config.num_tasks, Dense(config.expert_hidden[1], 1));
    return p;
  }

  /// Visits (name, rows, cols, values) for every tensor in a fixed order.
  template <class Self, class F>
  static void visit(Self& self, F&& f) {
    auto dense = [&](const std::string& name, auto& layer) {
      f(name + ".weight", layer.weight.rows, layer.weight.cols, std::span(layer.weight.data));
      f(name + ".bias", layer.bias.size(), std::size_t{1}, std::span(layer.bias));
    };
    dense("bottom.0", self.bottom[0]);
    dense("bottom.1", self.bottom[1]);
    for (std::size_t i = 0; i < self.experts.size(); ++i) {
      dense("expert." + std::to_string(i) + ".0", self.experts[i][0]);
      dense("expert." + std::to_string(i) + ".1", self.experts[i][1]);
    }
    for (std::size_t k = 0; k < self.gates.size(); ++k)
      f("gate." + std::to_string(k) + ".weight", self.gates[k].rows, self.gates[k].cols, std::span(self.gates[k].data));
    for (std::size_t k = 0; k < self.towers.size(); ++k) dense("tower." + std::to_string(k), self.towers[k]);
  }

  template <class F>
  void for_each_tensor(F&& f) {
    visit(*this, std::forward<F>(f));
  }
  template <class F>
  void for_each_tensor(F&& f) const {
    visit(*this, std::forward<F>(f));
  }

  /// All tensors as spans, in visit order.
  std::vector<std::span<double>> tensors() {
    std::vector<std::span<double>> out;
    for_each_tensor([&](const std::string&, std::size_t, std::size_t, std::span<double> v) { out.push_back(v); });
    return out;
  }
  std::vector<std::span<const double>> tensors() const {
    std::vector<std::span<const double>> out;
    for_each_tensor(
        [&](const std::string&, std::size_t, std::size_t, std::span<const double> v) { out.push_back(v); });
    return out;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (auto t : tensors()) n += t.size();
    return n;
  }

  void fill(double value) {
    for (auto t : tensors()) std::fill(t.begin(), t.end(), value);
  }

  Parameters& operator+=(const Parameters& other) {
    auto a = tensors();
    auto b = other.tensors();
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < a[i].size(); ++j) a[i][j] += b[i][j];
    return *this;
  }

  bool operator==(const Parameters& other) const {
    auto a = tensors();
    auto b = other.tensors();
    if (a.size() != b.size()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
      if (a[i].size() != b[i].size() ||
          std::memcmp(a[i].data(), b[i].data(), a[i].size() * sizeof(double)) != 0)
        return false;
    return true;
  }
};

using Gradients = Parameters;

struct RerankerModel {
  ModelConfig config;
  // Task k predicts metric metrics[k].
  std::vector<std::string> metrics;
  // Decoding methods the training candidates came from.
  std::vector<std::string> train_methods;
  Parameters params;
};

/// Uniform(-a, a) weights with a = sqrt(6 / (fan_in + fan_out)), zero biases.
inline RerankerModel init_model(const ModelConfig& config, std::vector<std::string> metrics = {},
                                std::vector<std::string> train_methods = {}) {
  config.validate();
  if (metrics.empty())
    for (std::size_t k = 0; k < config.num_tasks; ++k) metrics.push_back("task" + std::to_string(k));
  require(metrics.size() == config.num_tasks, "metric order must name exactly one metric per task");
  RerankerModel model{config, std::move(metrics), std::move(train_methods), Parameters::zeros(config)};
  Rng rng(config.seed);
  model.params.for_each_tensor([&](const std::string& name, std::size_t rows, std::size_t cols, std::span<double> v) {
    if (name.ends_with(".bias")) return;
    const double a = std::sqrt(6.0 / static_cast<double>(rows + cols));
    for (auto& x : v) x = rng.uniform(-a, a);
  });
  return model;
}

// ---------------------------------------------------------------------------
// Forward pass

using ExpertMask = std::vector<bool>;

inline double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

struct ForwardResult {
  std::vector<double> logits;                 // one per task
  std::vector<std::vector<double>> gates;     // [task][expert]
};

/// Intermediate activations kept for the backward pass.
struct ForwardCache {
  std::vector<double> input, pre_h1, h1, pre_x, x;
  std::vector<std::vector<double>> pre_a, a, expert_out;  // [expert][...], empty when masked
  std::vector<std::vector<double>> mix;                   // [task][expert_hidden[1]]
  ExpertMask mask;
  ForwardResult result;
};

namespace detail {

inline void relu(std::span<const double> in, std::span<double> out) {
  for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
}

/// Softmax over the kept entries; masked entries get exactly 0.
inline void masked_softmax(std::span<const double> z, const ExpertMask& mask, std::span<double> out) {
  double max = -INFINITY;
  for (std::size_t i = 0; i < z.size(); ++i)
    if (mask[i]) max = std::max(max, z[i]);
  double total = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = mask[i] ? std::exp(z[i] - max) : 0.0;
    total += out[i];
  }
  for (auto& g : out) g /= total;
}

}  // namespace detail

inline void forward(const RerankerModel& model, std::span<const double> v, const ExpertMask* mask_in,
                    ForwardCache& cache) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const std::size_t experts = cfg.experts();
  if (v.size() != cfg.input_dim)
    throw ValidationError("feature dimension " + std::to_string(v.size()) + " does not match model input_dim " +
                          std::to_string(cfg.input_dim));
  cache.mask = mask_in ? *mask_in : ExpertMask(experts, true);
  require(cache.mask.size() == experts, "expert mask size does not match the number of experts");
  require(std::find(cache.mask.begin(), cache.mask.end(), true) != cache.mask.end(),
          "expert mask must keep at least one expert");

  cache.input.assign(v.begin(), v.end());
  cache.pre_h1.resize(cfg.bottom_hidden[0]);
  cache.h1.resize(cfg.bottom_hidden[0]);
  cache.pre_x.resize(cfg.bottom_hidden[1]);
  cache.x.resize(cfg.bottom_hidden[1]);
  p.bottom[0].apply(v, cache.pre_h1);
  detail::relu(cache.pre_h1, cache.h1);
  p.bottom[1].apply(cache.h1, cache.pre_x);
  detail::relu(cache.pre_x, cache.x);

  cache.pre_a.assign(experts, {});
  cache.a.assign(experts, {});
  cache.expert_out.assign(experts, {});
  for (std::size_t i = 0; i < experts; ++i) {
    if (!cache.mask[i]) continue;
    cache.pre_a[i].resize(cfg.expert_hidden[0]);
    cache.a[i].resize(cfg.expert_hidden[0]);
    cache.expert_out[i].resize(cfg.expert_hidden[1]);
    p.experts[i][0].apply(cache.x, cache.pre_a[i]);
    detail::relu(cache.pre_a[i], cache.a[i]);
    p.experts[i][1].apply(cache.a[i], cache.expert_out[i]);
  }

  auto& result = cache.result;
  result.logits.assign(cfg.num_tasks, 0.0);
  result.gates.assign(cfg.num_tasks, std::vector<double>(experts, 0.0));
  cache.mix.assign(cfg.num_tasks, std::vector<double>(cfg.expert_hidden[1], 0.0));
  std::vector<double> z(experts, 0.0);
  for (std::size_t k = 0; k < cfg.num_tasks; ++k) {
    const Matrix& w = p.gates[k];
    for (std::size_t i = 0; i < experts; ++i) {
      double s = 0.0;
      if (cache.mask[i])
        for (std::size_t c = 0; c < w.cols; ++c) s += w(i, c) * cache.x[c];
      z[i] = s;
    }
    detail::masked_softmax(z, cache.mask, result.gates[k]);
    auto& mix = cache.mix[k];
    for (std::size_t i = 0; i < experts; ++i) {
      if (!cache.mask[i]) continue;
      const double g = result.gates[k][i];
      for (std::size_t j = 0; j < mix.size(); ++j) mix[j] += g * cache.expert_out[i][j];
    }
    double logit = 0.0;
    p.towers[k].apply(mix, std::span(&logit, 1));
    result.logits[k] = logit;
  }
}

/// Per-task logits and gate weights.
inline ForwardResult forward(const RerankerModel& model, std::span<const double> v, const ExpertMask* mask = nullptr) {
  ForwardCache cache;
  forward(model, v, mask, cache);
  return std::move(cache.result);
}

/// Per-metric probability that the candidate is the best one.
inline std::vector<double> predict_probs(const RerankerModel& model, std::span<const double> v) {
  auto logits = forward(model, v).logits;
  for (auto& z : logits) z = sigmoid(z);
  return logits;
}

// ---------------------------------------------------------------------------
// Losses

inline constexpr double kProbEpsilon = 1e-7;

inline double bce_loss(double prob, int label) {
  const double p = std::clamp(prob, kProbEpsilon, 1.0 - kProbEpsilon);
  return label ? -std::log(p) : -std::log(1.0 - p);
}

/// Binary cross-entropy evaluated from the logit, log(1 + e^z) - y z.
inline double bce_with_logit(double z, int label) {
  const double softplus = z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  return softplus - (label ? z : 0.0);
}

inline double multi_task_loss(std::span<const double> per_metric) {
  require(!per_metric.empty(), "multi_task_loss needs at least one metric loss");
  double total = 0.0;
  for (double l : per_metric) total += l;
  return total / static_cast<double>(per_metric.size());
}

// ---------------------------------------------------------------------------
// Backward pass

struct TrainingRow {
  std::span<const double> features;
  std::vector<int> labels;  // one per task
  ExpertMask mask;          // empty means all experts kept
};

namespace detail {

// Accumulates scale * d(loss of one row)/d(theta) into grad.
inline double backward_row(const RerankerModel& model, const TrainingRow& row, double scale, Gradients& grad,
                           ForwardCache& cache) {
  const auto& cfg = model.config;
  const auto& p = model.params;
  const std::size_t experts = cfg.experts();
  require(row.labels.size() == cfg.num_tasks, "label count does not match the number of tasks");
  forward(model, row.features, row.mask.empty() ? nullptr : &row.mask, cache);

  const std::size_t h = cfg.bottom_hidden[1];
  const std::size_t eo = cfg.expert_hidden[1];
  std::vector<double> dx(h, 0.0);
  std::vector<std::vector<double>> d_expert(experts, std::vector<double>(eo, 0.0));
  std::vector<double> dmix(eo), dg(experts), dz(experts);
  double loss = 0.0;

  for (std::size_t k = 0; k < cfg.num_tasks; ++k) {
    const double z = cache.result.logits[k];
    loss += bce_with_logit(z, row.labels[k]);
    const double dlogit = scale * (sigmoid(z) - row.labels[k]);

    auto& tower_grad = grad.towers[k];
    const auto& mix = cache.mix[k];
    for (std::size_t j = 0; j < eo; ++j) {
      tower_grad.weight.data[j] += dlogit * mix[j];
      dmix[j] = dlogit * p.towers[k].weight.data[j];
    }
    tower_grad.bias[0] += dlogit;

    const auto& g = cache.result.gates[k];
    double weighted = 0.0;
    for (std::size_t i = 0; i < experts; ++i) {
      dg[i] = 0.0;
      if (!cache.mask[i]) continue;
      for (std::size_t j = 0; j < eo; ++j) {
        d_expert[i][j] += g[i] * dmix[j];
        dg[i] += dmix[j] * cache.expert_out[i][j];
      }
      weighted += g[i] * dg[i];
    }
    Matrix& gate_grad = grad.gates[k];
    const Matrix& gate = p.gates[k];
    for (std::size_t i = 0; i < experts; ++i) {
      dz[i] = cache.mask[i] ? g[i] * (dg[i] - weighted) : 0.0;
      if (dz[i] == 0.0) continue;
      for (std::size_t c = 0; c < h; ++c) {
        gate_grad(i, c) += dz[i] * cache.x[c];
        dx[c] += dz[i] * gate(i, c);
      }
    }
  }

  std::vector<double> da(cfg.expert_hidden[0]);
  for (std::size_t i = 0; i < experts; ++i) {
    if (!cache.mask[i]) continue;
    const Dense& l1 = p.experts[i][1];
    Dense& g1 = grad.experts[i][1];
    std::fill(da.begin(), da.end(), 0.0);
    for (std::size_t r = 0; r < l1.out(); ++r) {
      const double d = d_expert[i][r];
      g1.bias[r] += d;
      for (std::size_t c = 0; c < l1.in(); ++c) {
        g1.weight(r, c) += d * cache.a[i][c];
        da[c] += d * l1.weight(r, c);
      }
    }
    const Dense& l0 = p.experts[i][0];
    Dense& g0 = grad.experts[i][0];
    for (std::size_t r = 0; r < l0.out(); ++r) {
      const double d = cache.pre_a[i][r] > 0.0 ? da[r] : 0.0;
      if (d == 0.0) continue;
      g0.bias[r] += d;
      for (std::size_t c = 0; c < l0.in(); ++c) {
        g0.weight(r, c) += d * cache.x[c];
        dx[c] += d * l0.weight(r, c);
      }
    }
  }

  std::vector<double> dh1(cfg.bottom_hidden[0], 0.0);
  {
    const Dense& l1 = p.bottom[1];
    Dense& g1 = grad.bottom[1];
    for (std::size_t r = 0; r < l1.out(); ++r) {
      const double d = cache.pre_x[r] > 0.0 ? dx[r] : 0.0;
      if (d == 0.0) continue;
      g1.bias[r] += d;
      for (std::size_t c = 0; c < l1.in(); ++c) {
        g1.weight(r, c) += d * cache.h1[c];
        dh1[c] += d * l1.weight(r, c);
      }
    }
    Dense& g0 = grad.bottom[0];
    for (std::size_t r = 0; r < p.bottom[0].out(); ++r) {
      const double d = cache.pre_h1[r] > 0.0 ? dh1[r] : 0.0;
      if (d == 0.0) continue;
      g0.bias[r] += d;
      for (std::size_t c = 0; c < p.bottom[0].in(); ++c) g0.weight(r, c) += d * cache.input[c];
    }
  }
  return loss / static_cast<double>(cfg.num_tasks);
}

}  // namespace detail

/// Mean multi-task loss of a batch under the given masks.
inline double batch_loss(const RerankerModel& model, std::span<const TrainingRow> batch) {
  require(!batch.empty(), "batch must be nonempty");
  double total = 0.0;
  for (const auto& row : batch) {
    const auto result = forward(model, row.features, row.mask.empty() ? nullptr : &row.mask);
    require(row.labels.size() == result.logits.size(), "label count does not match the number of tasks");
    std::vector<double> losses;
    for (std::size_t k = 0; k < result.logits.size(); ++k) losses.push_back(bce_with_logit(result.logits[k], row.labels[k]));
    total += multi_task_loss(losses);
  }
  return total / static_cast<double>(batch.size());
}

/// Exact gradient of batch_loss. Per-row gradients are reduced in row order,
/// so the result is identical for every worker count.
inline Gradients backward(const RerankerModel& model, std::span<const TrainingRow> batch, std::size_t workers = 1,
                          double* loss_out = nullptr) {
  require(!batch.empty(), "batch must be nonempty");
  const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(model.config.num_tasks));
  Gradients total = Parameters::zeros(model.config);
  double loss = 0.0;
  if (workers <= 1) {
    Gradients row_grad = Parameters::zeros(model.config);
    ForwardCache cache;
    for (const auto& row : batch) {
      row_grad.fill(0.0);
      loss += detail::backward_row(model, row, scale, row_grad, cache);
      total += row_grad;
    }
  } else {
    std::vector<Gradients> row_grads(batch.size());
    std::vector<double> row_loss(batch.size(), 0.0);
    parallel_for(batch.size(), workers, [&](std::size_t i) {
      ForwardCache cache;
      row_grads[i] = Parameters::zeros(model.config);
      row_loss[i] = detail::backward_row(model, batch[i], scale, row_grads[i], cache);
    });
    for (std::size_t i = 0; i < batch.size(); ++i) {
      total += row_grads[i];
      loss += row_loss[i];
    }
  }
  if (loss_out) *loss_out = loss / static_cast<double>(batch.size());
  return total;
}

// ---------------------------------------------------------------------------
// Expert dropout

/// Drops each expert independently with probability p, redrawing the whole
/// mask until at least one expert survives.
inline ExpertMask sample_expert_mask(std::size_t experts, double p, Rng& rng) {
  require(p >= 0.0 && p < 1.0, "expert dropout probability must lie in [0, 1)");
  require(experts >= 1, "need at least one expert");
  ExpertMask mask(experts);
  while (true) {
    bool any = false;
    for (std::size_t i = 0; i < experts; ++i) {
      mask[i] = !rng.bernoulli(p);
      any = any || mask[i];
    }
    if (any) return mask;
  }
}

// ---------------------------------------------------------------------------
// Optimizer

struct Schedule {
  double peak_lr = 1e-3;
  double warmup_fraction = 0.05;
  std::size_t total_steps = 1;

  std::size_t warmup_steps() const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(warmup_fraction * static_cast<double>(total_steps))));
  }

  /// Rate used by the 1-based step `step`: linear ramp, then constant peak.
  double lr(std::size_t step) const {
    const auto w = warmup_steps();
    return step >= w ? peak_lr : peak_lr * static_cast<double>(step) / static_cast<double>(w);
  }
};

/// Adam moments with a linearly warmed-up rate.
struct OptimizerState {
  Schedule schedule;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t step = 0;
  Parameters first_moment;
  Parameters second_moment;

  OptimizerState(const ModelConfig& config, Schedule s)
      : schedule(s), first_moment(Parameters::zeros(config)), second_moment(Parameters::zeros(config)) {}
};

inline void optimizer_step(RerankerModel& model, const Gradients& grads, OptimizerState& state) {
  ++state.step;
  const double lr = state.schedule.lr(state.step);
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  auto params = model.params.tensors();
  auto g = grads.tensors();
  auto m = state.first_moment.tensors();
  auto v = state.second_moment.tensors();
  for (std::size_t t = 0; t < params.size(); ++t) {
    for (std::size_t i = 0; i < params[t].size(); ++i) {
      const double gi = g[t][i];
      m[t][i] = state.beta1 * m[t][i] + (1.0 - state.beta1) * gi;
      v[t][i] = state.beta2 * v[t][i] + (1.0 - state.beta2) * gi * gi;
      const double mhat = m[t][i] / c1;
      const double vhat = v[t][i] / c2;
      params[t][i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    }
  }
}

// ---------------------------------------------------------------------------
// Model file
//
// Layout (little-endian):
//   8 bytes  magic "SRMOE\0\0\1"
//   u32      format version
//   u32      config length L, then L bytes of JSON (dims, tasks, experts,
//            dropout, seed, metric order, training methods)
//   u32      tensor count, then per tensor:
//            u32 name length, name bytes, u64 rows, u64 cols,
//            rows*cols f64 values (row-major)
//   u32      CRC-32 of every preceding byte

inline constexpr std::array<char, 8> kModelMagic{'S', 'R', 'M', 'O', 'E', '\0', '\0', '\1'};
inline constexpr std::uint32_t kModelFormatVersion = 1;

static_assert(std::endian::native == std::endian::little, "model files are written in little-endian byte order");

namespace detail {

template <class T>
void put(std::string& out, T value) {
  char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  out.append(bytes, sizeof(T));
}

class Reader {
 public:
  explicit Reader(std::string_view data) : data_(data) {}

  template <class T>
  T get() {
    need(sizeof(T));
    T value;
    std::memcpy(&value, data_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return value;
  }

  std::string_view bytes(std::size_t n) {
    need(n);
    auto s = data_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool done() const { return pos_ == data_.size(); }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw ValidationError("model file is truncated");
  }
  std::string_view data_;
  std::size_t pos_ = 0;
};

inline std::uint32_t crc32_of(std::string_view bytes) {
  return static_cast<std::uint32_t>(
      ::crc32(0L, reinterpret_cast<const Bytef*>(bytes.data()), static_cast<uInt>(bytes.size())));
}

}  // namespace detail

inline nlohmann::json config_to_json(const RerankerModel& model) {
  const auto& c = model.config;
  return {{"input_dim", c.input_dim},
          {"bottom_hidden", c.bottom_hidden},
          {"expert_hidden", c.expert_hidden},
          {"num_tasks", c.num_tasks},
          {"num_experts", c.experts()},
          {"expert_dropout", c.expert_dropout},
          {"seed", c.seed},
          {"metrics", model.metrics},
          {"train_methods", model.train_methods}};
}

inline std::string serialize_model(const RerankerModel& model) {
  std::string out(kModelMagic.begin(), kModelMagic.end());
  detail::put<std::uint32_t>(out, kModelFormatVersion);
  const std::string config = config_to_json(model).dump();
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(config.size()));
  out += config;
  std::uint32_t count = 0;
  model.params.for_each_tensor([&](const std::string&, std::size_t, std::size_t, std::span<const double>) { ++count; });
  detail::put<std::uint32_t>(out, count);
  model.params.for_each_tensor(
      [&](const std::string& name, std::size_t rows, std::size_t cols, std::span<const double> values) {
        detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out += name;
        detail::put<std::uint64_t>(out, rows);
        detail::put<std::uint64_t>(out, cols);
        out.append(reinterpret_cast<const char*>(values.data()), values.size() * sizeof(double));
      });
  detail::put<std::uint32_t>(out, detail::crc32_of(out));
  return out;
}

inline RerankerModel deserialize_model(std::string_view data) {
  if (data.size() < kModelMagic.size() || data.substr(0, kModelMagic.size()) != std::string_view(kModelMagic.data(), kModelMagic.size()))
    throw ValidationError("not a re-ranker model file (bad magic)");
  if (data.size() < kModelMagic.size() + 8) throw ValidationError("model file checksum mismatch (file truncated)");
  const std::string_view body = data.substr(0, data.size() - 4);
  std::uint32_t stored;
  std::memcpy(&stored, data.data() + body.size(), 4);
  if (stored != detail::crc32_of(body)) throw ValidationError("model file checksum mismatch (corrupt or truncated)");

  detail::Reader r(body);
  r.bytes(kModelMagic.size());
  const auto version = r.get<std::uint32_t>();
  if (version != kModelFormatVersion)
    throw ValidationError("unsupported model format version " + std::to_string(version) + " (expected " +
                          std::to_string(kModelFormatVersion) + ")");
  const auto config_len = r.get<std::uint32_t>();
  nlohmann::json cj;
  try {
    cj = nlohmann::json::parse(r.bytes(config_len));
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model config block is malformed: ") + e.what());
  }
  RerankerModel model;
  try {
    auto& c = model.config;
    c.input_dim = cj.at("input_dim").get<std::size_t>();
    c.bottom_hidden = cj.at("bottom_hidden").get<std::array<std::size_t, 2>>();
    c.expert_hidden = cj.at("expert_hidden").get<std::array<std::size_t, 2>>();
    c.num_tasks = cj.at("num_tasks").get<std::size_t>();
    c.num_experts = cj.at("num_experts").get<std::size_t>();
    c.expert_dropout = cj.at("expert_dropout").get<double>();
    c.seed = cj.at("seed").get<std::uint64_t>();
    model.metrics = cj.at("metrics").get<std::vector<std::string>>();
    model.train_methods = cj.at("train_methods").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model config block is incomplete: ") + e.what());
  }
  model.config.validate();
  require(model.metrics.size() == model.config.num_tasks, "model metric order does not match its task count");
  model.params = Parameters::zeros(model.config);

  const auto count = r.get<std::uint32_t>();
  std::uint32_t expected = 0;
  model.params.for_each_tensor([&](const std::string&, std::size_t, std::size_t, std::span<double>) { ++expected; });
  if (count != expected) throw ValidationError("model tensor count does not match its configuration");
  model.params.for_each_tensor([&](const std::string& name, std::size_t rows, std::size_t cols, std::span<double> values) {
    const auto len = r.get<std::uint32_t>();
    const auto stored_name = r.bytes(len);
    const auto stored_rows = r.get<std::uint64_t>();
    const auto stored_cols = r.get<std::uint64_t>();
    if (stored_name != name || stored_rows != rows || stored_cols != cols)
      throw ValidationError("model tensor '" + std::string(stored_name) + "' has the wrong name or shape (expected " +
                            name + " " + std::to_string(rows) + "x" + std::to_string(cols) + ")");
    const auto raw = r.bytes(values.size() * sizeof(double));
    std::memcpy(values.data(), raw.data(), raw.size());
  });
  if (!r.done()) throw ValidationError("model file has trailing bytes");
  for (auto t : model.params.tensors())
    for (double x : t) require_finite(x, "model parameters");
  return model;
}

inline void save_model(const RerankerModel& model, const std::string& path) {
  const std::string bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write model file '" + path + "'");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for '" + path + "'");
}

inline RerankerModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return deserialize_model(buffer.str());
}

/// Throws unless the model's tasks are exactly `metrics`, in order.
inline void check_metric_order(const RerankerModel& model, const std::vector<std::string>& metrics) {
  if (model.metrics == metrics) return;
  auto list = [](const std::vector<std::string>& v) {
    std::string s;
    for (const auto& m : v) s += (s.empty() ? "" : ",") + m;
    return "[" + s + "]";
  };
  throw ValidationError("metric-order mismatch: model predicts " + list(model.metrics) + " but the run expects " +
                        list(metrics));
}

}  // namespace summarank
