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

#include <filesystem>
#include <fstream>

#include "summarank/config.hpp"
#include "summarank/reports.hpp"

using namespace summarank;
using nlohmann::json;

namespace {

std::string validation_message(const json& j) {
  try {
    config_from_json(j).validate();
  } catch (const ValidationError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(Config, Defaults) {
  const auto c = config_from_json(json::object());
  EXPECT_EQ(c.metrics, (std::vector<std::string>{"rouge1", "rouge2", "rougeL"}));
  EXPECT_EQ(c.epochs, 5u);
  EXPECT_EQ(c.batch_size, 32u);
  EXPECT_EQ(c.m_top, 1u);
  EXPECT_EQ(c.m_bottom, 1u);
  EXPECT_DOUBLE_EQ(c.alpha, 0.05);
  EXPECT_EQ(c.recall_k, 15u);
  EXPECT_EQ(c.workers, 1u);
  EXPECT_FALSE(c.strict);
  EXPECT_NO_THROW(c.validate());
  const auto m = c.model_config(30);
  EXPECT_EQ(m.input_dim, 30u);
  EXPECT_EQ(m.num_tasks, 3u);
  EXPECT_EQ(m.experts(), 6u);
}

TEST(Config, UnknownKeysRejectedAtEveryLevel) {
  EXPECT_NE(validation_message({{"epochz", 3}}).find("epochz"), std::string::npos);
  for (const char* section : {"features", "model", "train", "eval"}) {
    const auto msg = validation_message({{section, {{"bogus", 1}}}});
    EXPECT_NE(msg.find(std::string(section) + ".bogus"), std::string::npos) << msg;
  }
}

TEST(Config, WrongTypesRejected) {
  EXPECT_NE(validation_message({{"seed", "seven"}}).find("seed"), std::string::npos);
  EXPECT_NE(validation_message({{"train", {{"peak_lr", "fast"}}}}).find("train.peak_lr"), std::string::npos);
  EXPECT_FALSE(validation_message({{"model", 3}}).empty());
  EXPECT_FALSE(validation_message({{"features", {{"mode", "learned"}}}}).empty());
}

TEST(Config, UnknownMetricListsRegistry) {
  const auto msg = validation_message({{"metrics", {"rouge1", "bleu"}}});
  EXPECT_NE(msg.find("bleu"), std::string::npos);
  EXPECT_NE(msg.find("rouge1, rouge2, rougeL"), std::string::npos) << msg;
  EXPECT_TRUE(validation_message({{"metrics", {"rouge1", "bleu"}}, {"external_metrics", {"bleu"}}}).empty());
}

TEST(Config, SemanticChecks) {
  EXPECT_FALSE(validation_message({{"metrics", json::array()}}).empty());
  EXPECT_FALSE(validation_message({{"metrics", {"rouge1", "rouge1"}}}).empty());
  EXPECT_FALSE(validation_message({{"train_methods", {"beam"}}, {"test_methods", {"dbs"}}}).empty());
  EXPECT_TRUE(validation_message({{"train_methods", {"beam", "dbs"}}, {"test_methods", {"dbs"}}}).empty());
  EXPECT_FALSE(validation_message({{"train", {{"m_top", 0}}}}).empty());
  EXPECT_FALSE(validation_message({{"eval", {{"alpha", 1.5}}}}).empty());
  EXPECT_FALSE(validation_message({{"model", {{"expert_dropout", 1.0}}}}).empty());
  EXPECT_FALSE(validation_message({{"workers", 0}}).empty());
}

TEST(Config, EffectiveMethods) {
  auto c = config_from_json({{"train_methods", {"beam", "dbs"}}});
  EXPECT_EQ(c.effective_test_methods(), c.train_methods);
  EXPECT_EQ(c.effective_base_method(), "beam");
  c.base_method = "dbs";
  EXPECT_EQ(c.effective_base_method(), "dbs");
}

TEST(Config, JsonRoundTrip) {
  const json input{{"metrics", {"rougeL", "rouge1"}},
                   {"train_methods", {"beam"}},
                   {"features", {{"mode", "precomputed"}, {"train_path", "f.jsonl"}}},
                   {"model", {{"bottom_hidden", json::array({8, 4})}, {"num_experts", 5}}},
                   {"train", {{"epochs", 2}, {"peak_lr", 0.01}}},
                   {"eval", {{"subsample_ks", {1, 2}}}},
                   {"seed", 99},
                   {"strict", true}};
  const auto c = config_from_json(input);
  const auto dumped = to_json(c);
  EXPECT_EQ(to_json(config_from_json(dumped)), dumped);
  EXPECT_EQ(dumped["model"]["num_experts"], 5);
  EXPECT_EQ(dumped["features"]["mode"], "precomputed");
  EXPECT_EQ(dumped["eval"]["subsample_ks"], json({1, 2}));
}

TEST(Config, LoadFile) {
  const auto path = (std::filesystem::path(testing::TempDir()) / "cfg.json").string();
  std::ofstream(path) << R"({"epochs_typo": 1})";
  EXPECT_THROW(load_config(path), ValidationError);
  std::ofstream(path) << R"({"seed": 4)";
  EXPECT_THROW(load_config(path), ValidationError);
  std::ofstream(path) << R"({"seed": 4})";
  EXPECT_EQ(load_config(path).seed, 4u);
  EXPECT_THROW(load_config("/nonexistent/cfg.json"), IoError);
}

TEST(Reports, Formatting) {
  EXPECT_EQ(format_cell(Cell::score(0.12345)), "12.35");
  EXPECT_EQ(format_cell(Cell::pvalue(0.000123456)), "0.0001235");
  EXPECT_EQ(format_cell(Cell::fraction(0.5)), "0.5000");
  EXPECT_EQ(format_cell(Cell::count(7)), "7");
  EXPECT_THROW(format_cell(Cell::score(std::nan(""))), NumericError);
  EXPECT_EQ(cell_json(Cell::score(0.12345)), 12.35);
  EXPECT_EQ(cell_json(Cell::count(3)), 3);
}

TEST(Reports, TextAndJsonl) {
  Report r{"demo", "Demo table", {"system", "value"}, {}, {"a note"}};
  r.add({Cell::str("model"), Cell::score(0.5)});
  r.add({Cell::str("x"), Cell::score(0.25)});
  EXPECT_THROW(r.add({Cell::str("short")}), ValidationError);
  EXPECT_EQ(r.text(), "# Demo table\n# a note\nsystem  value\nmodel   50.00\nx       25.00\n");
  const auto lines = r.jsonl();
  EXPECT_NE(lines.find(R"({"report":"demo","system":"model","value":50.0})"), std::string::npos) << lines;
  EXPECT_NE(lines.find(R"("note":"a note")"), std::string::npos);
}
