/* Copyright 2026 The VLP Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>

#include "test_util.hpp"
#include "vlp/error.hpp"
#include "vlp/executor.hpp"
#include "vlp/fixture.hpp"
#include "vlp/log.hpp"
#include "vlp/perception.hpp"
#include "vlp/search.hpp"
#include "vlp/task.hpp"

namespace vlp {
namespace {

namespace fs = std::filesystem;

void write(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream(p, std::ios::binary) << text;
}

// Writes n_pos + n_neg distinct images and a task file referencing them.
std::string task_file(const testing::TempDir& dir, int n_pos, int n_neg, int n_query,
                      const std::string& extra_query = "") {
  nlohmann::json doc;
  doc["task_id"] = "t1";
  doc["profile"] = "bongard-hoi";
  doc["few_shot"] = nlohmann::json::array();
  doc["query"] = nlohmann::json::array();
  int k = 0;
  for (int i = 0; i < n_pos + n_neg; ++i, ++k) {
    write(dir.path() / "img" / (std::to_string(k) + ".png"), "image " + std::to_string(k));
    doc["few_shot"].push_back({{"image", "img/" + std::to_string(k) + ".png"}, {"label", i < n_pos ? 1 : 0}});
  }
  for (int i = 0; i < n_query; ++i, ++k) {
    write(dir.path() / "img" / (std::to_string(k) + ".png"), "image " + std::to_string(k));
    doc["query"].push_back({{"image", "img/" + std::to_string(k) + ".png"}, {"label", i % 2}});
  }
  if (!extra_query.empty()) doc["query"].push_back({{"image", extra_query}, {"label", 1}});
  write(dir.path() / "task.json", doc.dump(2));
  return dir.str("task.json");
}

std::string ingestion_error(const std::string& path) {
  try {
    load_task(path);
  } catch (const IngestionError& e) {
    return e.what();
  }
  return "";
}

TEST(LoadTask, BongardShaped) {
  testing::TempDir dir;
  const Task t = load_task(task_file(dir, 6, 6, 2));
  EXPECT_EQ(t.task_id, "t1");
  EXPECT_EQ(t.profile, "bongard-hoi");
  EXPECT_EQ(t.few_shot.size(), 12u);
  EXPECT_EQ(t.query.size(), 2u);
  EXPECT_EQ(t.few_shot[0].digest, sha256_hex("image 0"));
  EXPECT_TRUE(fs::exists(t.few_shot[0].resolved_path));
}

TEST(LoadTask, LogicShaped) {
  testing::TempDir dir;
  const Task t = load_task(task_file(dir, 10, 10, 0));
  EXPECT_EQ(t.few_shot.size(), 20u);
  EXPECT_TRUE(t.query.empty());
}

TEST(LoadTask, SplitOverlapIsRejected) {
  testing::TempDir dir;
  const auto msg = ingestion_error(task_file(dir, 6, 6, 0, "img/3.png"));
  EXPECT_NE(msg.find("query[0].image"), std::string::npos) << msg;
}

TEST(LoadTask, SameBytesUnderAnotherNameIsStillOverlap) {
  testing::TempDir dir;
  write(dir.path() / "copy.png", "image 2");
  EXPECT_NE(ingestion_error(task_file(dir, 6, 6, 0, "copy.png")).find("query"), std::string::npos);
}

TEST(LoadTask, FieldErrors) {
  testing::TempDir dir;
  const auto path = task_file(dir, 2, 2, 0);
  auto doc = nlohmann::json::parse(read_file(path));
  auto with = [&](const std::function<void(nlohmann::json&)>& edit) {
    auto d = doc;
    edit(d);
    write(path, d.dump());
    return ingestion_error(path);
  };
  EXPECT_NE(with([](auto& d) { d["few_shot"][1]["label"] = 2; }).find("few_shot[1].label"),
            std::string::npos);
  EXPECT_NE(with([](auto& d) { d["few_shot"][0]["image"] = "nope.png"; }).find("few_shot[0].image"),
            std::string::npos);
  EXPECT_NE(with([](auto& d) { d.erase("few_shot"); }).find("few_shot"), std::string::npos);
  EXPECT_NE(with([](auto& d) { d.erase("task_id"); }).find("task_id"), std::string::npos);
  EXPECT_NE(with([](auto& d) { d["profile"] = "imagenet"; }).find("profile"), std::string::npos);
  EXPECT_NE(with([](auto& d) {
              for (auto& e : d["few_shot"]) e["label"] = 1;
            }).find("negative"),
            std::string::npos);
  write(path, "{not json");
  EXPECT_FALSE(ingestion_error(path).empty());
  EXPECT_THROW(load_task(dir.str("absent.json")), IngestionError);
}

TEST(LoadTask, SaveRoundTrip) {
  testing::TempDir dir;
  const Task t = load_task(task_file(dir, 6, 6, 4));
  save_task(t, dir.str("again.json"));
  EXPECT_EQ(load_task(dir.str("again.json")), t);
}

TEST(Metrics, Examples) {
  // 2 positives right, 1 of 2 negatives right.
  auto r = score_predictions({true, true, false, true}, {true, true, false, false});
  EXPECT_DOUBLE_EQ(r.balanced_accuracy, 0.75);
  EXPECT_DOUBLE_EQ(r.true_positive_rate, 1.0);
  EXPECT_DOUBLE_EQ(r.true_negative_rate, 0.5);
  r = score_predictions({true, true, true, true}, {true, false, true, false});
  EXPECT_DOUBLE_EQ(r.balanced_accuracy, 0.5);
  r = score_predictions({true, false}, {true, false});
  EXPECT_DOUBLE_EQ(r.balanced_accuracy, 1.0);
}

TEST(Metrics, BalancedAccuracyMatchesConfusionMatrix) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 5000; ++trial) {
    const std::size_t n = 1 + rng() % 40;
    std::vector<bool> pred(n), label(n);
    for (std::size_t i = 0; i < n; ++i) {
      pred[i] = rng() % 2;
      label[i] = rng() % 2;
    }
    int m[2][2] = {{0, 0}, {0, 0}};  // [label][pred]
    for (std::size_t i = 0; i < n; ++i) ++m[label[i]][pred[i]];
    const int p = m[1][0] + m[1][1], q = m[0][0] + m[0][1];
    const auto r = score_predictions(pred, label);
    ASSERT_DOUBLE_EQ(r.accuracy, double(m[1][1] + m[0][0]) / n);
    if (p && q) {
      ASSERT_DOUBLE_EQ(r.balanced_accuracy, (double(m[1][1]) / p + double(m[0][0]) / q) / 2);
    } else if (p) {
      ASSERT_DOUBLE_EQ(r.balanced_accuracy, double(m[1][1]) / p);
    } else {
      ASSERT_DOUBLE_EQ(r.balanced_accuracy, double(m[0][0]) / q);
    }
    ASSERT_GE(r.balanced_accuracy, 0.0);
    ASSERT_LE(r.balanced_accuracy, 1.0);
    if (p == q) ASSERT_DOUBLE_EQ(r.balanced_accuracy, r.accuracy);
  }
}

TEST(Metrics, MissingQuerySceneIsMisclassifiedAndFlagged) {
  Task t;
  t.query = {{"a.png", "", "da", true}, {"b.png", "", "db", false}, {"c.png", "", "dc", true}};
  SceneCache scenes;
  ImageScenes dog;
  dog.objects = testing::scene({{"dog"}});
  scenes.put("da", dog);
  scenes.put("db", ImageScenes{});
  const auto p = parse_program("(exists_object (get_objects IMG) dog)", catalog("bongard-hoi"));
  const auto r = evaluate_on_queries(p, t, scenes);
  EXPECT_EQ(r.failed_images, std::vector<std::string>{"c.png"});
  EXPECT_EQ(r.predictions, (std::vector<bool>{true, false, false}));
  EXPECT_DOUBLE_EQ(r.balanced_accuracy, 0.75);
  const auto back = eval_report_from_json(eval_report_to_json(r));
  EXPECT_EQ(back.failed_images, r.failed_images);
  EXPECT_EQ(back.balanced_accuracy, r.balanced_accuracy);
}

// --- fixtures ----------------------------------------------------------------------

FixtureSpec cake_spec(std::uint64_t seed = 7) {
  const auto& cat = catalog("bongard-hoi");
  FixtureSpec s;
  s.task_id = "cake";
  s.dsl.profile = "bongard-hoi";
  s.rule = parse_program(
      "(and (exists_object (get_objects IMG) cake) (exists_object (get_objects IMG) candles))", cat);
  s.vocabulary = {{"cake", "candles", "plate", "person", "table", "balloon"},
                  {"colorful", "round", "lit", "white", "small"},
                  {"holding", "blowing", "cutting"}};
  s.seed = seed;
  s.n_query = 4;
  s.must_not_separate = {parse_program("(exists_object (get_objects IMG) candles)", cat)};
  return s;
}

std::vector<const ImageScenes*> inputs(const Fixture& f, const std::vector<LabeledImage>& split,
                                       std::vector<bool>* labels) {
  std::vector<const ImageScenes*> out;
  for (const auto& i : split) {
    out.push_back(f.scenes.find(i.digest));
    labels->push_back(i.label);
  }
  return out;
}

TEST(Fixture, ConjunctionRejectsSingleConjunct) {
  const Fixture f = make_fixture(cake_spec());
  EXPECT_EQ(f.task.few_shot.size(), 12u);
  EXPECT_EQ(f.task.query.size(), 4u);
  std::vector<bool> labels;
  const auto in = inputs(f, f.task.few_shot, &labels);
  EXPECT_EQ(std::count(labels.begin(), labels.end(), true), 6);
  EXPECT_EQ(program_accuracy(f.rule, in, labels), 1.0);
  const auto candles = parse_program("(exists_object (get_objects IMG) candles)", catalog("bongard-hoi"));
  EXPECT_LT(program_accuracy(candles, in, labels), 1.0);
}

TEST(Fixture, RuleReproducesEveryLabel) {
  const auto& cat = catalog("cocologic");
  const std::vector<std::string> rules = {
      "(exists_property (get_objects IMG) round)",
      "(not (exists_object (get_objects IMG) dog))",
      "(or (exists_object_with_property (get_objects IMG) dog brown) (exists_object (get_objects IMG) cat))",
      "(gt? (count_all_objects (get_objects IMG)) 2)",
      "(xor (exists_object (get_objects IMG) dog) (exists_property (get_objects IMG) round))",
  };
  for (const auto& text : rules) {
    for (std::uint64_t seed : {1, 2, 3}) {
      FixtureSpec s;
      s.dsl.profile = "cocologic";
      s.rule = parse_program(text, cat);
      s.vocabulary = {{"dog", "cat", "ball"}, {"brown", "round"}, {}};
      s.seed = seed;
      s.n_query = 6;
      const Fixture f = make_fixture(s);
      for (const auto* split : {&f.task.few_shot, &f.task.query}) {
        for (const auto& img : *split) {
          ASSERT_EQ(evaluate(f.rule, *f.scenes.find(img.digest)), img.label) << text;
        }
      }
      EXPECT_EQ(f.task.query.size(), 6u);
    }
  }
}

TEST(Fixture, UnsatisfiableNegativesFail) {
  log::set_quiet(true);
  const auto& cat = catalog("bongard-hoi");
  FixtureSpec s;
  s.dsl.profile = "bongard-hoi";
  s.vocabulary = {{"ball"}, {"round"}, {}};
  s.min_objects = 1;
  // Every scene has at least one ball.
  s.rule = parse_program("(exists_object (get_objects IMG) ball)", cat);
  EXPECT_THROW(make_fixture(s), GenerationError);
  s.rule = parse_program("(exists_object (get_objects IMG) cake)", cat);
  EXPECT_THROW(make_fixture(s), GenerationError);  // outside the vocabulary
  s.rule = Program::apply(*find_primitive("and"), {Program::input(), Program::input()});
  EXPECT_THROW(make_fixture(s), GenerationError);  // ill-typed
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = read_file(e.path().string());
  }
  return out;
}

TEST(Fixture, SeededDeterminism) {
  testing::TempDir a, b, c;
  write_fixture(make_fixture(cake_spec(7)), a.str());
  write_fixture(make_fixture(cake_spec(7)), b.str());
  write_fixture(make_fixture(cake_spec(8)), c.str());
  const auto ta = tree(a.path());
  EXPECT_EQ(ta, tree(b.path()));
  EXPECT_NE(ta, tree(c.path()));
  EXPECT_TRUE(ta.count("task.json"));
  EXPECT_TRUE(ta.count("dsl.json"));
  EXPECT_TRUE(ta.count("fixture.json"));
}

TEST(Fixture, MockBundleReplaysGroundingAndScenes) {
  testing::TempDir dir;
  const Fixture f = make_fixture(cake_spec());
  const Task t = write_fixture(f, dir.str());
  MockVlmBackend mock(dir.str("mock"));
  VlmEndpointConfig cfg;
  cfg.model_name = "anything";
  cfg.seed = 3;
  Perception p(mock, cfg, nullptr);
  const auto symbols = p.ground_symbols(grounding_request(t, profile_defaults("bongard-hoi")));
  EXPECT_EQ(symbols, clean_symbols(f.vocabulary));
  SceneCache scenes;
  const auto m = p.precompute_task(t, symbols, f.dsl, scenes);
  EXPECT_EQ(m.misses, 0u);
  EXPECT_EQ(m.parse_failures, 0u);
  for (const auto* split : {&t.few_shot, &t.query}) {
    for (const auto& img : *split) {
      const auto* got = scenes.find(img.digest);
      ASSERT_TRUE(got);
      EXPECT_EQ(got->objects, f.scenes.find(img.digest)->objects);
      EXPECT_EQ(evaluate(f.rule, *got), img.label);
    }
  }
}

TEST(Fixture, ProgramSymbols) {
  const auto s = program_symbols(cake_spec().rule);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].second, "cake");
  EXPECT_EQ(s[1].first, SemanticType::kObject);
}

}  // namespace
}  // namespace vlp
