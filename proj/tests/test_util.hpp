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

// Helpers shared by the test binaries: an independent brute-force program
// generator, random programs and scenes, and scratch directories.

#ifndef VLP_TESTS_TEST_UTIL_HPP_
#define VLP_TESTS_TEST_UTIL_HPP_

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "vlp/dsl.hpp"
#include "vlp/error.hpp"
#include "vlp/grammar.hpp"
#include "vlp/program.hpp"
#include "vlp/scene.hpp"

namespace vlp::testing {

/// Every program of type `t` with depth <= `depth`, with its probability as
/// the product of rule probabilities. Written directly from the definitions,
/// sharing no code with the heap search.
inline std::vector<std::pair<Program, double>> brute_force(const Pcfg& g, SemanticType t,
                                                           int depth) {
  std::vector<std::pair<Program, double>> out;
  if (depth < 0) return out;
  for (const auto& r : g.rules(t)) {
    if (r.kind != RuleKind::kApply) {
      out.emplace_back(r.terminal(), r.probability);
      continue;
    }
    if (depth == 0) continue;
    std::vector<std::vector<std::pair<Program, double>>> options;
    for (auto a : r.args()) options.push_back(brute_force(g, a, depth - 1));
    std::vector<std::size_t> idx(options.size(), 0);
    bool empty = false;
    for (const auto& o : options) empty = empty || o.empty();
    if (empty) continue;
    while (true) {
      std::vector<Program> children;
      double p = r.probability;
      for (std::size_t i = 0; i < idx.size(); ++i) {
        children.push_back(options[i][idx[i]].first);
        p *= options[i][idx[i]].second;
      }
      out.emplace_back(Program::apply(*r.primitive, std::move(children)), p);
      std::size_t k = 0;
      while (k < idx.size() && ++idx[k] == options[k].size()) idx[k++] = 0;
      if (k == idx.size()) break;
    }
  }
  return out;
}

/// Number of programs brute_force would return, without building them.
inline double count_programs(const Pcfg& g, SemanticType t, int depth) {
  if (depth < 0) return 0;
  double n = 0;
  for (const auto& r : g.rules(t)) {
    if (r.kind != RuleKind::kApply) {
      n += 1;
      continue;
    }
    if (depth == 0) continue;
    double prod = 1;
    for (auto a : r.args()) prod *= count_programs(g, a, depth - 1);
    n += prod;
  }
  return n;
}

/// Random well-typed program of type `t` and depth <= `depth` over `cat`.
class ProgramGenerator {
 public:
  ProgramGenerator(Catalog cat, GroundedSymbols symbols, std::uint64_t seed)
      : cat_(std::move(cat)), symbols_(std::move(symbols)), rng_(seed) {}

  Program generate(SemanticType t, int depth) {
    if (t == SemanticType::kImg) return Program::input();
    if (is_symbol_type(t)) {
      const auto& v = symbols_.of(t);
      return Program::symbol(t, v[pick(v.size())]);
    }
    std::vector<const Primitive*> options;
    for (const auto* p : cat_) {
      if (p->result != t) continue;
      if (p->arity() > 0 && depth < 1) continue;
      if (p->arity() > 0 && !derivable(p, depth - 1)) continue;
      options.push_back(p);
    }
    if (options.empty()) return {};
    const Primitive* p = options[pick(options.size())];
    if (p->kind == PrimitiveKind::kConstant) return Program::integer(p->constant_value);
    std::vector<Program> children;
    for (auto a : p->args) children.push_back(generate(a, depth - 1));
    return Program::apply(*p, std::move(children));
  }

  std::mt19937_64& rng() { return rng_; }

 private:
  bool derivable(const Primitive* p, int depth) {
    for (auto a : p->args) {
      if (!derivable_type(a, depth)) return false;
    }
    return true;
  }
  bool derivable_type(SemanticType t, int depth) {
    if (t == SemanticType::kImg) return true;
    if (is_symbol_type(t)) return !symbols_.of(t).empty();
    if (depth < 0) return false;
    for (const auto* p : cat_) {
      if (p->result != t) continue;
      if (p->arity() == 0) return true;
      if (depth >= 1 && derivable(p, depth - 1)) return true;
    }
    return false;
  }
  std::size_t pick(std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_);
  }

  Catalog cat_;
  GroundedSymbols symbols_;
  std::mt19937_64 rng_;
};

inline Scene scene(std::vector<Row> rows) { return Scene(std::move(rows)); }

/// Random scene over the given heads and tails; `empty_rate` chance of [[]].
inline Scene random_scene(std::mt19937_64& rng, const std::vector<std::string>& heads,
                          const std::vector<std::string>& tails, int max_rows = 4,
                          double empty_rate = 0.1) {
  if (std::bernoulli_distribution(empty_rate)(rng)) return Scene();
  std::uniform_int_distribution<int> rows(1, max_rows);
  std::uniform_int_distribution<std::size_t> h(0, heads.size() - 1);
  std::uniform_int_distribution<std::size_t> tl(0, tails.size() - 1);
  std::uniform_int_distribution<int> ntail(0, 3);
  std::vector<Row> out;
  const int n = rows(rng);
  for (int i = 0; i < n; ++i) {
    Row r{heads[h(rng)]};
    const int k = ntail(rng);
    for (int j = 0; j < k; ++j) r.push_back(tails[tl(rng)]);
    out.push_back(std::move(r));
  }
  return Scene(out);
}

struct SmallGrammar {
  Pcfg pcfg;
  int depth = 2;
  std::string profile;
};

/// A randomly configured, occurrence-weighted grammar whose BOOL programs up
/// to `depth` number between `min_programs` and `max_programs`.
inline SmallGrammar random_small_grammar(std::uint64_t seed, double min_programs = 20,
                                         double max_programs = 5000) {
  std::mt19937_64 rng(seed);
  const std::vector<std::string> profiles{"bongard-hoi", "bongard-ow", "clevr-hans3", "cocologic"};
  const std::vector<std::string> objects{"dog", "cat", "birthday cake", "ball"};
  const std::vector<std::string> properties{"red", "round", "shiny"};
  const std::vector<std::string> actions{"holding", "riding", "sitting"};
  auto take = [&](const std::vector<std::string>& pool, int lo, int hi) {
    std::vector<std::string> out;
    const int n = std::uniform_int_distribution<int>(lo, hi)(rng);
    for (int i = 0; i < n && i < static_cast<int>(pool.size()); ++i) out.push_back(pool[i]);
    return out;
  };
  for (int attempt = 0; attempt < 10000; ++attempt) {
    SmallGrammar g;
    g.profile = profiles[std::uniform_int_distribution<std::size_t>(0, profiles.size() - 1)(rng)];
    DslConfig c;
    c.profile = g.profile;
    c.strict_scene_typing = std::bernoulli_distribution(0.3)(rng);
    c.int_constant_max = std::uniform_int_distribution<int>(0, 3)(rng);
    std::vector<std::string> enabled;
    for (const auto* p : catalog(g.profile)) {
      if (p->kind == PrimitiveKind::kConstant) continue;
      if (p->name == "get_objects" || std::bernoulli_distribution(0.5)(rng)) {
        enabled.push_back(p->name);
      }
    }
    c.enabled_primitives = enabled;
    GroundedSymbols s{take(objects, 1, 3), take(properties, 0, 2), take(actions, 0, 2)};
    std::vector<ImageScenes> imgs(8);
    std::vector<LabeledScenes> ex;
    for (std::size_t i = 0; i < imgs.size(); ++i) {
      imgs[i].objects = random_scene(rng, s.objects, s.properties.empty() ? objects : s.properties);
      imgs[i].actions = random_scene(rng, s.actions.empty() ? actions : s.actions, s.objects);
      ex.push_back({&imgs[i], i < 4});
    }
    g.depth = std::uniform_int_distribution<int>(2, 3)(rng);
    try {
      g.pcfg = build_pcfg(c, s, compute_symbol_stats(ex, s));
    } catch (const Error&) {
      continue;
    }
    const double n = count_programs(g.pcfg, SemanticType::kBool, g.depth);
    if (n >= min_programs && n <= max_programs) return g;
  }
  throw std::runtime_error("no small grammar found");
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("vlp-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const std::filesystem::path& path() const { return path_; }
  std::string str(const std::string& sub = "") const {
    return sub.empty() ? path_.string() : (path_ / sub).string();
  }

 private:
  std::filesystem::path path_;
};

}  // namespace vlp::testing

#endif  // VLP_TESTS_TEST_UTIL_HPP_
