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

// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "repair_corpus.hpp"
#include "test_util.hpp"
#include "vlp/error.hpp"
#include "vlp/executor.hpp"
#include "vlp/fixture.hpp"
#include "vlp/list_parser.hpp"
#include "vlp/log.hpp"
#include "vlp/perception.hpp"
#include "vlp/pipeline.hpp"
#include "vlp/search.hpp"

namespace vlp {
namespace {

namespace fs = std::filesystem;
namespace sem = semantics;

// Thrown by require(); carries the first failed condition.
struct Failure {
  std::string what;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

bool close_rel(double a, double b, double tol) {
  return std::fabs(a - b) <= tol * std::max(std::fabs(a), std::fabs(b));
}

std::vector<testing::SmallGrammar>& grammars() {
  static std::vector<testing::SmallGrammar> gs = [] {
    std::vector<testing::SmallGrammar> out;
    for (std::uint64_t seed = 1; seed <= 8; ++seed) out.push_back(testing::random_small_grammar(seed));
    return out;
  }();
  return gs;
}

// --- 1 ---------------------------------------------------------------------

std::string enumeration_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t total = 0;
  for (const auto& g : grammars()) {
    const auto brute = testing::brute_force(g.pcfg, SemanticType::kBool, g.depth);
    require(brute.size() <= 5000, "grammar larger than 5000 programs");
    const auto heap = enumerate(g.pcfg, g.depth);
    std::set<std::string> want, got;
    for (const auto& [p, pr] : brute) want.insert(p.text());
    for (std::size_t i = 0; i < heap.size(); ++i) {
      require(got.insert(heap[i].program.text()).second,
              "duplicate program " + heap[i].program.text());
      if (i) require(heap[i].probability <= heap[i - 1].probability, "probability increased");
    }
    require(want.size() == brute.size(), "brute force produced duplicates");
    require(got == want, "heap search and brute force disagree on " + g.profile);
    total += heap.size();
  }
  const double secs =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  require(secs < 30.0, "took " + std::to_string(secs) + " s");
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu grammars, %zu programs, %.2f s", grammars().size(), total,
                secs);
  return buf;
}

// --- 2 ---------------------------------------------------------------------

std::string probability_correctness() {
  std::size_t checked = 0;
  for (const auto& g : grammars()) {
    for (const auto& e : enumerate(g.pcfg, g.depth)) {
      const double p = program_probability(g.pcfg, e.program);
      require(close_rel(p, e.probability, 1e-12), "probability mismatch on " + e.program.text());
      ++checked;
    }
  }
  require(checked >= 1000, "only " + std::to_string(checked) + " programs");
  return std::to_string(checked) + " programs";
}

// --- 3 ---------------------------------------------------------------------

std::string symbol_weighting() {
  require(symbol_weight(6, 0, 6) == 1.0, "(6,0,6)");
  for (int k = 0; k <= 6; ++k) require(symbol_weight(0, k, 6) == 0.01, "(0,k,6)");
  require(std::fabs(symbol_weight(3, 3, 6) - 0.25) < 1e-15, "(3,3,6)");

  // "round" in every positive and no negative, "shiny" in every negative only.
  std::vector<ImageScenes> imgs(12);
  std::vector<LabeledScenes> ex;
  for (std::size_t i = 0; i < imgs.size(); ++i) {
    const bool pos = i < 6;
    imgs[i].objects = testing::scene({{"ball", pos ? "round" : "shiny"}});
    ex.push_back({&imgs[i], pos});
  }
  const GroundedSymbols s{{"ball"}, {"round", "shiny"}, {}};
  DslConfig c;
  c.profile = "bongard-hoi";
  const auto g = build_pcfg(c, s, compute_symbol_stats(ex, s));
  double round = -1, shiny = -1;
  for (const auto& r : g.rules(SemanticType::kProperty)) {
    if (r.symbol == "round") round = r.probability;
    if (r.symbol == "shiny") shiny = r.probability;
  }
  require(std::fabs(round - 100.0 / 101.0) < 1e-12, "round = " + std::to_string(round));
  require(std::fabs(shiny - 1.0 / 101.0) < 1e-12, "shiny = " + std::to_string(shiny));
  return "weights and {100/101, 1/101}";
}

// --- 4, 8, 9: fixtures through the mock pipeline ----------------------------

struct Case {
  std::string id;
  std::string profile;
  std::string rule;
  GroundedSymbols vocab;
  std::vector<std::string> single_conjuncts;  // must not separate the few-shot split
  std::uint64_t seed = 1;
};

RunConfig mock_config(const testing::TempDir& dir, const std::string& name) {
  RunConfig c;
  c.task_paths = {dir.str(name + "/task.json")};
  c.backend = BackendKind::kMock;
  c.mock_dir = dir.str(name + "/mock");
  c.cache_dir = dir.str(name + "-cache");
  c.out_dir = dir.str(name + "-out");
  c.seeds = {0};
  return c;
}

FixtureSpec spec_for(const Case& k) {
  const auto cat = catalog(k.profile);
  FixtureSpec s;
  s.task_id = k.id;
  s.dsl.profile = k.profile;
  s.rule = parse_program(k.rule, cat);
  s.vocabulary = k.vocab;
  s.seed = k.seed;
  s.n_query = 8;
  s.reject_shortcuts = true;
  s.shortcut_depth = profile_defaults(k.profile).max_depth;
  for (const auto& p : k.single_conjuncts) s.must_not_separate.push_back(parse_program(p, cat));
  return s;
}

const std::vector<Case>& cases() {
  static const std::vector<Case> all = {
      {"cake-candles", "bongard-hoi",
       "(and (exists_object (get_objects IMG) cake) (exists_object (get_objects IMG) candles))",
       {{"cake", "candles", "plate", "person"}, {"lit", "white"}, {"holding", "cutting"}},
       {"(exists_object (get_objects IMG) cake)", "(exists_object (get_objects IMG) candles)"}},
      {"holding-surfboard", "bongard-hoi",
       "(exists_action_with_object (get_actions IMG) holding surfboard)",
       {{"surfboard", "person", "dog"}, {"wet"}, {"holding", "riding", "walking"}}},
      {"ride-or-walk", "bongard-hoi",
       "(or (exists_action (get_actions IMG) riding) (exists_action (get_actions IMG) walking))",
       {{"horse", "person"}, {"brown"}, {"riding", "walking", "feeding", "sitting"}}},
      {"no-dog", "bongard-hoi", "(not (exists_object (get_objects IMG) dog))",
       {{"dog", "cat", "ball"}, {"small"}, {"sitting", "running"}}},
      {"red-car", "bongard-ow", "(exists_object_with_property (get_objects IMG) car red)",
       {{"car", "truck", "tree"}, {"red", "blue", "green"}, {"parked"}}},
      {"round-shiny", "bongard-ow", "(exists_properties (get_objects IMG) round shiny)",
       {{"ball", "box", "coin"}, {"round", "shiny", "dull"}, {"rolling"}}},
      {"cat-not-red", "bongard-ow",
       "(and (exists_object (get_objects IMG) cat) (not (exists_property (get_objects IMG) red)))",
       {{"cat", "dog", "ball"}, {"red", "round", "fluffy"}, {"sleeping"}}},
      {"red-metal-cube", "clevr-hans3",
       "(exists_object_with_properties (get_objects IMG) cube red metal)",
       {{"cube", "sphere", "cylinder"}, {"red", "metal", "rubber", "blue"}, {}}},
      {"sphere-or-gold", "clevr-hans3",
       "(or (exists_object (get_objects IMG) sphere) (exists_property (get_objects IMG) gold))",
       {{"cube", "sphere", "cylinder"}, {"gold", "blue", "rubber"}, {}}},
      {"crowd", "cocologic", "(gt? (count_object_in_img (get_objects IMG) person) 2)",
       {{"person", "bicycle", "dog"}, {"standing"}, {"walking"}}},
      {"dog-and-frisbee", "cocologic",
       "(and (exists_object (get_objects IMG) dog) (exists_object (get_objects IMG) frisbee))",
       {{"dog", "frisbee", "person", "car"}, {"white"}, {"playing"}},
       {"(exists_object (get_objects IMG) dog)", "(exists_object (get_objects IMG) frisbee)"}},
  };
  return all;
}

double split_accuracy(const Program& p, const Task& task, const SceneCache& scenes) {
  std::vector<const ImageScenes*> in;
  std::vector<bool> labels;
  for (const auto& l : task.few_shot) {
    in.push_back(scenes.find(l.digest));
    labels.push_back(l.label);
  }
  return program_accuracy(p, in, labels);
}

std::string fixture_recovery() {
  testing::TempDir dir;
  std::ostringstream detail;
  int n = 0;
  std::set<std::string> operators;
  for (const auto& k : cases()) {
    const Fixture fx = make_fixture(spec_for(k));
    const Task task = write_fixture(fx, dir.str(k.id));
    const auto out = run_pipeline(mock_config(dir, k.id));
    require(out.size() == 1 && out[0].seeds.size() == 1, k.id + ": no outcome");
    const auto& s = out[0].seeds[0];
    require(s.ok, k.id + ": " + s.stage + ": " + s.error);
    const auto budget = effective_budget(mock_config(dir, k.id), k.profile);
    require(budget.max_depth >= 4 && budget.max_depth <= 6 && budget.time_limit_seconds == 10.0,
            k.id + ": unexpected budget");
    require(s.result->best.accuracy == 1.0,
            k.id + ": few-shot accuracy " + std::to_string(s.result->best.accuracy));
    require(s.eval->balanced_accuracy == 1.0,
            k.id + ": query balanced accuracy " + std::to_string(s.eval->balanced_accuracy) +
                " for " + s.result->best.program.text());
    for (const auto& c : k.single_conjuncts) {
      const double acc = split_accuracy(parse_program(c, catalog(k.profile)), task, fx.scenes);
      require(acc < 1.0, k.id + ": shortcut " + c + " separates the few-shot images");
    }
    for (const auto* op : {"and", "or", "not", "gt?"}) {
      if (k.rule.find(std::string("(") + op + " ") != std::string::npos) operators.insert(op);
    }
    ++n;
  }
  require(n >= 10, "fewer than 10 fixtures");
  require(operators.size() == 4, "rules do not span and/or/not/gt?");
  return std::to_string(n) + " fixtures recovered";
}

// --- 5 ---------------------------------------------------------------------

std::string ranking_law() {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> size(1, 30), correct(0, 6), pgrid(1, 8);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<Candidate> cs;
    std::vector<std::uint64_t> idx(static_cast<std::size_t>(size(rng)));
    std::iota(idx.begin(), idx.end(), 0);
    std::shuffle(idx.begin(), idx.end(), rng);
    for (auto i : idx) cs.push_back({Program(), pgrid(rng) / 16.0, correct(rng) / 6.0, i});
    const auto& best = rank(cs);
    auto key = [](const Candidate& c) {
      return std::make_tuple(c.accuracy, c.probability, -static_cast<double>(c.enumeration_index));
    };
    const auto oracle = *std::max_element(
        cs.begin(), cs.end(), [&](const auto& x, const auto& y) { return key(x) < key(y); });
    require(best.enumeration_index == oracle.enumeration_index,
            "trial " + std::to_string(trial));
  }
  return "10000 random sets";
}

// --- 6 ---------------------------------------------------------------------

const Catalog& everything() {
  static const Catalog c(full_catalog(false).begin(), full_catalog(false).end());
  return c;
}

std::string executor_properties() {
  const std::vector<std::string> heads{"dog", "cat", "cake", "holding", "riding"};
  const std::vector<std::string> tails{"red", "round", "dog", "cat", "shiny"};
  const Scene e;
  for (const auto& h : heads) {
    for (const auto& t : tails) {
      require(!sem::exists_object(e, h) && !sem::exists_property(e, t) &&
                  !sem::exists_object_with_property(e, h, t) && !sem::exists_properties(e, t, t) &&
                  !sem::exists_object_with_properties(e, h, t, t) && !sem::exists_action(e, h) &&
                  !sem::exists_action_with_object(e, h, t) &&
                  sem::count_object_in_img(e, h) == 0 && sem::count_objects_with_property(e, t) == 0,
              "empty scene is not annihilating");
    }
  }
  require(sem::count_all_objects(e) == 0 && sem::max_objects_of_same_type(e) == 0,
          "empty scene counts");

  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::size_t> h(0, heads.size() - 1), t(0, tails.size() - 1);
  auto implies = [](bool a, bool b) { return !a || b; };
  for (int trial = 0; trial < 10000; ++trial) {
    const Scene s = testing::random_scene(rng, heads, tails, 5, 0.05);
    std::vector<Row> grown = s.empty() ? std::vector<Row>{} : s.rows();
    grown.insert(grown.begin() + static_cast<long>(grown.empty() ? 0 : rng() % (grown.size() + 1)),
                 Row{heads[h(rng)], tails[t(rng)]});
    const Scene g = testing::scene(grown);
    const std::string& o = heads[h(rng)];
    const std::string& p = tails[t(rng)];
    const std::string& q = tails[t(rng)];
    require(implies(sem::exists_object(s, o), sem::exists_object(g, o)) &&
                implies(sem::exists_property(s, p), sem::exists_property(g, p)) &&
                implies(sem::exists_object_with_property(s, o, p),
                        sem::exists_object_with_property(g, o, p)) &&
                implies(sem::exists_properties(s, p, q), sem::exists_properties(g, p, q)) &&
                implies(sem::exists_object_with_properties(s, o, p, q),
                        sem::exists_object_with_properties(g, o, p, q)) &&
                implies(sem::exists_action(s, o), sem::exists_action(g, o)) &&
                implies(sem::exists_action_with_object(s, o, p),
                        sem::exists_action_with_object(g, o, p)),
            "monotonicity");
    for (const Scene* x : {&s, &g}) {
      require(sem::exists_object(*x, o) == (sem::count_object_in_img(*x, o) >= 1) &&
                  sem::exists_property(*x, p) == (sem::count_objects_with_property(*x, p) >= 1) &&
                  sem::count_all_objects(*x) == static_cast<std::int64_t>(x->size()) &&
                  sem::max_objects_of_same_type(*x) <= sem::count_all_objects(*x),
              "count/exists coherence");
    }
  }

  GroundedSymbols symbols{{"dog", "cat", "cake"}, {"red", "round", "shiny"}, {"holding", "riding"}};
  testing::ProgramGenerator gen(everything(), symbols, 99);
  const Primitive& and_ = *find_primitive("and");
  const Primitive& or_ = *find_primitive("or");
  const Primitive& not_ = *find_primitive("not");
  const Primitive& xor_ = *find_primitive("xor");
  for (int trial = 0; trial < 10000; ++trial) {
    const Program a = gen.generate(SemanticType::kBool, 1 + trial % 4);
    const Program b = gen.generate(SemanticType::kBool, 1 + (trial / 4) % 4);
    ImageScenes img;
    img.objects = testing::random_scene(rng, symbols.objects, symbols.properties);
    img.actions = testing::random_scene(rng, symbols.actions, symbols.objects);
    for (const auto& pred : size_predicate_names()) {
      for (const auto& o : symbols.objects) {
        img.size_answers[size_answer_key(pred, {o})] = rng() % 2;
        for (const auto& p : symbols.properties) {
          img.size_answers[size_answer_key(pred, {o, p})] = rng() % 2;
        }
      }
    }
    const bool va = evaluate(a, img), vb = evaluate(b, img);
    const Program lhs = Program::apply(not_, {Program::apply(and_, {a, b})});
    const Program rhs =
        Program::apply(or_, {Program::apply(not_, {a}), Program::apply(not_, {b})});
    require(evaluate(lhs, img) == evaluate(rhs, img) && evaluate(lhs, img) == !(va && vb),
            "De Morgan on " + a.text() + " / " + b.text());
    require(evaluate(Program::apply(xor_, {a, b}), img) == (va != vb), "xor identity");
  }
  return "3 x 10000 trials";
}

// --- 7 ---------------------------------------------------------------------

std::string parser_corpus() {
  auto r = parse_list_response("```python\nobjects = ['birthday cake', 'candles']\n```",
                               ListShape::kFlat);
  require(r.parse_ok && !r.repaired &&
              r.items == std::vector<std::string>{"birthday cake", "candles"},
          "fence format");
  r = parse_list_response("objects = []", ListShape::kFlat);
  require(r.parse_ok && !r.repaired && r.items.empty(), "empty list");
  r = parse_list_response(
      "```python\nobjects = [\n    ['dog', 'sitting'],\n    ['ball', 'round'],\n    ['chair', "
      "'blue']\n]\n```",
      ListShape::kNested);
  require(r.parse_ok && r.rows == std::vector<Row>{{"dog", "sitting"}, {"ball", "round"},
                                                    {"chair", "blue"}},
          "objects example");
  r = parse_list_response("```python\nobjects = [[]]\n```", ListShape::kNested);
  require(r.parse_ok && r.rows == std::vector<Row>{Row{}}, "empty scene example");
  r = parse_list_response(
      "```python\nactions = [\n    ['throwing', 'person', 'ball'],\n    ['walking', 'dog']\n]\n```",
      ListShape::kNested);
  require(r.parse_ok &&
              r.rows == std::vector<Row>{{"throwing", "person", "ball"}, {"walking", "dog"}},
          "actions example");

  const auto corpus = testing::repair_corpus();
  require(corpus.size() >= 20, "corpus too small");
  for (const auto& c : corpus) {
    const std::string msg = testing::check_repair_case(c);
    require(msg.empty(), std::string(c.name) + ": " + msg);
  }

  // Parse-rate accounting over a mock precompute run.
  testing::TempDir dir;
  Case k = cases()[0];
  const Fixture fx = make_fixture(spec_for(k));
  const Task task = write_fixture(fx, dir.str("fx"));
  auto backend = make_backend(BackendKind::kMock, dir.str("fx/mock"));
  VlmEndpointConfig cfg;
  ResponseCache cache(dir.str("cache"));
  Perception p(*backend, cfg, &cache);
  const auto symbols = p.ground_symbols(grounding_request(task, profile_defaults(k.profile)));
  SceneCache scenes;
  DslConfig dsl;
  dsl.profile = k.profile;
  const auto m = p.precompute_task(task, symbols, dsl, scenes);
  std::uint64_t parsed = 0, repaired = 0, failed = 0;
  for (const auto& e : m.entries) {
    for (auto [req, ok, rep] : {std::tuple{e.objects_requested, e.objects_parse_ok, e.objects_repaired},
                                std::tuple{e.actions_requested, e.actions_parse_ok, e.actions_repaired}}) {
      if (!req) continue;
      parsed += ok;
      repaired += rep;
      failed += !ok;
    }
  }
  require(m.parsed == parsed && m.repaired == repaired && m.parse_failures == failed,
          "manifest parse counts disagree with per-image flags");
  require(m.entries.size() == task.few_shot.size() + task.query.size(), "manifest entries");
  return std::to_string(corpus.size()) + " malformed cases, " + std::to_string(m.entries.size()) +
         " manifest entries";
}

// --- 8 ---------------------------------------------------------------------

std::string edit_effects() {
  // Grammar dump: only PROPERTY terminals change, survivors are renormalized.
  std::vector<ImageScenes> imgs(8);
  std::vector<LabeledScenes> ex;
  const std::vector<std::vector<Row>> rows{
      {{"cube", "red"}, {"sphere", "metal"}}, {{"cube", "gold"}},
      {{"cube", "red", "small"}},             {{"sphere", "blue"}, {"cube", "metal"}},
      {{"sphere", "small"}},                  {{"cylinder", "blue"}},
      {{"cube", "blue"}},                     {{"sphere", "gold"}}};
  for (std::size_t i = 0; i < rows.size(); ++i) {
    imgs[i].objects = testing::scene(rows[i]);
    ex.push_back({&imgs[i], i < 4});
  }
  const GroundedSymbols s{{"cube", "sphere", "cylinder"}, {"red", "gold", "metal", "small", "blue"},
                          {}};
  DslConfig c;
  c.profile = "clevr-hans3";
  const auto stats = compute_symbol_stats(ex, s);
  const auto edit = dsl_edit(c, DslEdit{{}, {}, {"red", "gold"}, {}, false}, s, &stats);
  const auto before = build_pcfg(c, s, stats);
  const auto after = build_pcfg(edit.config, clean_symbols(s, edit.config.removed_symbols), stats);
  for (auto nt : before.nonterminals()) {
    if (nt == SemanticType::kProperty) continue;
    const auto& a = before.rules(nt);
    const auto& b = after.rules(nt);
    require(a.size() == b.size(), "rule count changed outside PROPERTY");
    for (std::size_t i = 0; i < a.size(); ++i) {
      require(a[i].rhs_text() == b[i].rhs_text() && a[i].probability == b[i].probability,
              "rule changed outside PROPERTY: " + a[i].rhs_text());
    }
  }
  double removed_mass = 0;
  for (const auto& r : before.rules(SemanticType::kProperty)) {
    if (r.symbol == "red" || r.symbol == "gold") removed_mass += r.probability;
  }
  require(after.rules(SemanticType::kProperty).size() == 3, "PROPERTY terminal count");
  for (const auto& r : after.rules(SemanticType::kProperty)) {
    const auto* old = before.find_rule(SemanticType::kProperty, r.terminal().node());
    require(old != nullptr, "new PROPERTY terminal " + r.symbol);
    require(close_rel(r.probability, old->probability / (1.0 - removed_mass), 1e-12),
            "not renormalized: " + r.symbol);
  }
  std::istringstream diff(edit.grammar_diff);
  int lines = 0;
  for (std::string line; std::getline(diff, line);) {
    if (line.empty()) continue;
    require(line.find("PROPERTY ->") != std::string::npos, "diff touches " + line);
    ++lines;
  }
  require(lines == 2 + 2 * 3, "diff has " + std::to_string(lines) + " lines");

  // Synthesis: the perfect shortcut uses a removed symbol; after the edit a
  // different program is found that is still perfect.
  testing::TempDir dir;
  const auto cat = catalog("clevr-hans3");
  FixtureSpec spec;
  spec.task_id = "shortcut";
  spec.dsl.profile = "clevr-hans3";
  spec.rule = parse_program("(exists_object (get_objects IMG) cube)", cat);
  spec.vocabulary = {{"cube", "sphere", "cylinder", "cone", "torus"}, {"red", "gold"}, {}};
  spec.agree_on_few_shot = {parse_program("(exists_property (get_objects IMG) red)", cat)};
  spec.removal_variants = {{"red", "gold"}};
  spec.seed = 3;
  spec.n_query = 8;
  const Fixture fx = make_fixture(spec);
  write_fixture(fx, dir.str("fx"));
  const auto first = run_pipeline(mock_config(dir, "fx"));
  const auto& s0 = first[0].seeds[0];
  require(s0.ok, "before edit: " + s0.error);
  const std::string p0 = s0.result->best.program.text();
  require(s0.result->best.accuracy == 1.0, "before edit: not perfect");
  require(p0.find(" red)") != std::string::npos || p0.find(" gold)") != std::string::npos,
          "before edit the shortcut was not chosen: " + p0);

  DslConfig edited = spec.dsl;
  edited.removed_symbols = {"red", "gold"};
  save_dsl_config(edited, dir.str("dsl.json"));
  auto cfg = mock_config(dir, "fx");
  cfg.dsl_config_path = dir.str("dsl.json");
  cfg.out_dir = dir.str("out-edited");
  const auto second = run_pipeline(cfg);
  const auto& s1 = second[0].seeds[0];
  require(s1.ok, "after edit: " + s1.error);
  const std::string p1 = s1.result->best.program.text();
  require(p1 != p0, "same program after edit");
  require(p1.find("red") == std::string::npos && p1.find("gold") == std::string::npos,
          "removed symbol still used: " + p1);
  require(s1.result->best.accuracy == 1.0, "after edit: not perfect: " + p1);
  return p0 + " -> " + p1;
}

// --- 9 ---------------------------------------------------------------------

std::string offline_guarantee() {
  testing::TempDir dir;
  const Case& k = cases()[6];
  write_fixture(make_fixture(spec_for(k)), dir.str("fx"));
  auto cfg = mock_config(dir, "fx");
  const auto warm = run_pipeline(cfg);
  require(warm[0].seeds[0].ok, "mock run: " + warm[0].seeds[0].error);

  cfg.backend = BackendKind::kOffline;
  cfg.mock_dir.clear();
  cfg.out_dir = dir.str("offline-out");
  const auto off = run_pipeline(cfg);
  const auto& s = off[0].seeds[0];
  require(s.ok, "offline run: " + s.stage + ": " + s.error);
  require(s.result->best.program.text() == warm[0].seeds[0].result->best.program.text(),
          "offline run found a different program");
  const auto m = manifest_from_json(
      read_file((fs::path(cfg.out_dir) / k.id / "seed-0" / "manifest.json").string()));
  require(m.network_calls == 0, std::to_string(m.network_calls) + " network calls");
  require(m.misses == 0, std::to_string(m.misses) + " misses");
  for (const auto& e : m.entries) {
    if (!e.errors.empty()) throw Failure{e.image + ": " + e.errors.front()};
  }
  return "0 network calls, 0 transport errors";
}

// --- 10 --------------------------------------------------------------------

std::string knob_snapshot() {
  struct Row {
    const char* profile;
    int depth, objects, properties, actions;
  };
  const Row want[] = {{"bongard-hoi", 4, 10, 5, 10},
                      {"bongard-ow", 4, 10, 10, 3},
                      {"bongard-rwr", 4, 10, 10, 5},
                      {"cocologic", 6, 10, 10, 3},
                      {"clevr-hans3", 6, 10, 10, 0}};
  RunConfig cfg;
  for (const auto& w : want) {
    const auto d = profile_defaults(w.profile);
    const std::string p = w.profile;
    require(d.time_limit_seconds == 10.0 && d.max_depth == w.depth, p + ": budget");
    require(d.n_objects == w.objects && d.n_properties == w.properties && d.n_actions == w.actions,
            p + ": symbol counts");
    const auto b = effective_budget(cfg, p);
    require(b.time_limit_seconds == 10.0 && b.max_depth == w.depth && !b.max_programs,
            p + ": effective budget");
  }
  return "5 profiles";
}

}  // namespace
}  // namespace vlp

// With arguments, runs only the listed criterion numbers.
int main(int argc, char** argv) {
  vlp::log::set_quiet(true);
  std::set<std::size_t> only;
  for (int i = 1; i < argc; ++i) only.insert(std::strtoul(argv[i], nullptr, 10));
  const std::vector<std::pair<std::string, std::function<std::string()>>> criteria = {
      {"enumeration matches brute force", vlp::enumeration_oracle},
      {"heap probabilities match program_probability", vlp::probability_correctness},
      {"symbol weighting", vlp::symbol_weighting},
      {"fixture recovery", vlp::fixture_recovery},
      {"ranking law", vlp::ranking_law},
      {"executor properties", vlp::executor_properties},
      {"parser and repair corpus", vlp::parser_corpus},
      {"DSL edit effects", vlp::edit_effects},
      {"offline rerun", vlp::offline_guarantee},
      {"profile knobs", vlp::knob_snapshot},
  };
  int failed = 0;
  int ran = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && !only.count(i + 1)) continue;
    ++ran;
    const auto& [name, fn] = criteria[i];
    std::string detail;
    bool ok = false;
    try {
      detail = fn();
      ok = true;
    } catch (const vlp::Failure& f) {
      detail = f.what;
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %2zu %s: %s\n", ok ? "PASS" : "FAIL", i + 1, name.c_str(), detail.c_str());
    std::fflush(stdout);
    failed += ok ? 0 : 1;
  }
  std::printf("%d/%d criteria passed\n", ran - failed, ran);
  return failed == 0 ? 0 : 1;
}
