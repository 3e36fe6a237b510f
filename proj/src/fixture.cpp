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

#include "vlp/fixture.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "json.hpp"
#include "vlp/error.hpp"
#include "vlp/executor.hpp"
#include "vlp/log.hpp"
#include "vlp/perception.hpp"
#include "vlp/search.hpp"
#include "vlp/vlm.hpp"

namespace vlp {

namespace fs = std::filesystem;

namespace {

constexpr int kDrawsPerImage = 20000;
constexpr std::uint64_t kShortcutProgramCap = 2'000'000;

void collect_symbols(const Program& p, std::vector<std::pair<SemanticType, std::string>>& out) {
  if (p.kind() == NodeKind::kSymbol) {
    out.emplace_back(p.type(), p.node().symbol);
    return;
  }
  for (const auto& c : p.children()) collect_symbols(c, out);
}

void collect_primitives(const Program& p, std::set<std::string>& out) {
  if (p.kind() == NodeKind::kApply) out.insert(p.node().primitive->name);
  for (const auto& c : p.children()) collect_primitives(c, out);
}

class SceneSampler {
 public:
  SceneSampler(const FixtureSpec& spec, const GroundedSymbols& vocab, bool with_actions,
               std::vector<std::string> size_preds, std::uint64_t seed)
      : spec_(spec), vocab_(vocab), with_actions_(with_actions),
        size_preds_(std::move(size_preds)), rng_(seed) {}

  ImageScenes draw() {
    ImageScenes s;
    std::vector<Row> objects;
    const int k = uniform(spec_.min_objects, spec_.max_objects);
    for (int i = 0; i < k && !vocab_.objects.empty(); ++i) {
      Row row{pick(vocab_.objects)};
      for (auto& p : sample(vocab_.properties, uniform(0, spec_.max_properties_per_object))) {
        row.push_back(std::move(p));
      }
      objects.push_back(std::move(row));
    }
    s.objects = Scene(objects);
    if (with_actions_ && !vocab_.actions.empty()) {
      std::vector<std::string> present;
      for (const auto& r : objects) present.push_back(r.front());
      if (present.empty()) present = vocab_.objects;
      std::vector<Row> actions;
      const int j = uniform(0, spec_.max_actions);
      for (int i = 0; i < j && !present.empty(); ++i) {
        Row row{pick(vocab_.actions)};
        for (auto& o : sample(present, uniform(1, 2))) row.push_back(std::move(o));
        actions.push_back(std::move(row));
      }
      s.actions = Scene(actions);
    }
    std::bernoulli_distribution yes(spec_.size_yes_rate);
    for (const auto& pred : size_preds_) {
      const bool with_property = pred.find("with_property") != std::string::npos;
      for (const auto& o : vocab_.objects) {
        if (!with_property) {
          const bool present = semantics::exists_object(s.objects, o);
          s.size_answers[size_answer_key(pred, {o})] = present && yes(rng_);
          continue;
        }
        for (const auto& p : vocab_.properties) {
          const bool present = semantics::exists_object_with_property(s.objects, o, p);
          s.size_answers[size_answer_key(pred, {o, p})] = present && yes(rng_);
        }
      }
    }
    return s;
  }

 private:
  int uniform(int lo, int hi) {
    if (hi < lo) return lo;
    return std::uniform_int_distribution<int>(lo, hi)(rng_);
  }
  const std::string& pick(const std::vector<std::string>& v) {
    return v[static_cast<std::size_t>(uniform(0, static_cast<int>(v.size()) - 1))];
  }
  std::vector<std::string> sample(std::vector<std::string> v, int n) {
    n = std::min<int>(n, static_cast<int>(v.size()));
    for (int i = 0; i < n; ++i) {
      std::swap(v[static_cast<std::size_t>(i)],
                v[static_cast<std::size_t>(uniform(i, static_cast<int>(v.size()) - 1))]);
    }
    v.resize(static_cast<std::size_t>(n));
    return v;
  }

  const FixtureSpec& spec_;
  const GroundedSymbols& vocab_;
  bool with_actions_;
  std::vector<std::string> size_preds_;
  std::mt19937_64 rng_;
};

bool eval_or(const Program& p, const ImageScenes& s, bool fallback) {
  try {
    return evaluate(p, s);
  } catch (const EvalError&) {
    return fallback;
  }
}

// Scenes as the pipeline will see them: restricted to the symbols listed in
// the extraction prompt.
ImageScenes restrict_to(const ImageScenes& s, const GroundedSymbols& symbols) {
  auto keep = [](const std::vector<std::string>& v, const std::string& x) {
    return std::find(v.begin(), v.end(), x) != v.end();
  };
  ImageScenes out;
  std::vector<Row> rows;
  if (!s.objects.empty()) {
    for (const auto& r : s.objects.rows()) {
      if (!keep(symbols.objects, r.front())) continue;
      Row row{r.front()};
      for (std::size_t i = 1; i < r.size(); ++i) {
        if (keep(symbols.properties, r[i])) row.push_back(r[i]);
      }
      rows.push_back(std::move(row));
    }
  }
  out.objects = Scene(rows);
  rows.clear();
  if (!s.actions.empty()) {
    for (const auto& r : s.actions.rows()) {
      if (!keep(symbols.actions, r.front())) continue;
      Row row{r.front()};
      for (std::size_t i = 1; i < r.size(); ++i) {
        if (keep(symbols.objects, r[i])) row.push_back(r[i]);
      }
      rows.push_back(std::move(row));
    }
  }
  out.actions = Scene(rows);
  out.size_answers = s.size_answers;
  return out;
}

std::string fence(const std::string& var, const std::string& literal) {
  return "```python\n" + var + " = " + literal + "\n```";
}

std::string flat_literal(const std::vector<std::string>& v) {
  std::string out = "[";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ", ";
    out += "'" + v[i] + "'";
  }
  return out + "]";
}

}  // namespace

std::vector<std::pair<SemanticType, std::string>> program_symbols(const Program& program) {
  std::vector<std::pair<SemanticType, std::string>> out;
  collect_symbols(program, out);
  return out;
}

Fixture make_fixture(const FixtureSpec& spec) {
  if (!spec.rule) throw GenerationError("fixture rule is empty");
  if (const auto report = typecheck(spec.rule); !report.ok) {
    throw GenerationError("fixture rule is ill-typed: " + report.message);
  }
  if (spec.n_pos < 1 || spec.n_neg < 1 || spec.n_query < 0) {
    throw GenerationError("fixture needs at least one positive and one negative example");
  }
  const ResolvedDsl dsl = resolve(spec.dsl);
  std::set<std::string> used;
  collect_primitives(spec.rule, used);
  for (const auto& name : used) {
    if (!dsl.enables(name)) {
      throw GenerationError("rule uses '" + name + "', which profile '" + spec.dsl.profile +
                            "' does not enable");
    }
  }
  const GroundedSymbols vocab = clean_symbols(spec.vocabulary);
  const GroundedSymbols grounded = clean_symbols(spec.vocabulary, spec.dsl.removed_symbols);
  for (const auto& [type, sym] : program_symbols(spec.rule)) {
    const auto& list = grounded.of(type);
    if (std::find(list.begin(), list.end(), sym) == list.end()) {
      throw GenerationError("rule symbol '" + sym + "' is not in the " +
                            std::string(type_name(type)) + " vocabulary");
    }
  }
  std::vector<std::string> size_preds;
  for (const auto& name : size_predicate_names()) {
    if (dsl.enables(name)) size_preds.push_back(name);
  }

  SceneSampler sampler(spec, vocab, dsl.enables("get_actions"), size_preds, spec.seed);
  const int q_pos = (spec.n_query + 1) / 2;
  const int q_neg = spec.n_query / 2;

  auto fill = [&](int want_pos, int want_neg, bool few_shot, std::vector<ImageScenes>& pos,
                  std::vector<ImageScenes>& neg) {
    const long limit = static_cast<long>(kDrawsPerImage) * (want_pos + want_neg);
    for (long draws = 0; static_cast<int>(pos.size()) < want_pos ||
                         static_cast<int>(neg.size()) < want_neg;
         ++draws) {
      if (draws >= limit) {
        const bool need_pos = static_cast<int>(pos.size()) < want_pos;
        throw GenerationError(std::string("could not generate ") +
                              (need_pos ? "positive" : "negative") + " scenes for rule " +
                              spec.rule.text() + "; the vocabulary cannot realize the split");
      }
      ImageScenes s = sampler.draw();
      const bool label = eval_or(spec.rule, s, false);
      auto& bucket = label ? pos : neg;
      if (static_cast<int>(bucket.size()) >= (label ? want_pos : want_neg)) continue;
      if (few_shot) {
        bool agree = true;
        for (const auto& p : spec.agree_on_few_shot) agree = agree && eval_or(p, s, !label) == label;
        if (!agree) continue;
      }
      bucket.push_back(std::move(s));
    }
  };

  for (int attempt = 0; attempt < spec.max_attempts; ++attempt) {
    std::vector<ImageScenes> fpos, fneg, qpos, qneg;
    fill(spec.n_pos, spec.n_neg, true, fpos, fneg);
    fill(q_pos, q_neg, false, qpos, qneg);

    // Interleave so both splits mix labels: +, -, +, - ...
    std::vector<std::pair<ImageScenes, bool>> few, query;
    for (std::size_t i = 0; i < std::max(fpos.size(), fneg.size()); ++i) {
      if (i < fpos.size()) few.emplace_back(fpos[i], true);
      if (i < fneg.size()) few.emplace_back(fneg[i], false);
    }
    for (std::size_t i = 0; i < std::max(qpos.size(), qneg.size()); ++i) {
      if (i < qpos.size()) query.emplace_back(qpos[i], true);
      if (i < qneg.size()) query.emplace_back(qneg[i], false);
    }

    std::vector<ImageScenes> seen;  // as the pipeline will perceive them
    std::vector<bool> labels;
    for (const auto& [s, l] : few) {
      seen.push_back(restrict_to(s, grounded));
      labels.push_back(l);
    }
    const std::size_t n_few = seen.size();
    for (const auto& [s, l] : query) {
      seen.push_back(restrict_to(s, grounded));
      labels.push_back(l);
    }
    std::vector<const ImageScenes*> few_ptrs;
    for (std::size_t i = 0; i < n_few; ++i) few_ptrs.push_back(&seen[i]);
    const std::vector<bool> few_labels(labels.begin(), labels.begin() + static_cast<long>(n_few));

    bool ok = true;
    for (const auto& p : spec.must_not_separate) {
      std::vector<const ImageScenes*> raw;
      for (const auto& f : few) raw.push_back(&f.first);
      if (program_accuracy(p, raw, few_labels) >= 1.0) ok = false;
    }
    if (ok && spec.reject_shortcuts) {
      std::vector<LabeledScenes> ls;
      for (std::size_t i = 0; i < n_few; ++i) ls.push_back({&seen[i], labels[i]});
      const Pcfg pcfg = build_pcfg(spec.dsl, grounded, compute_symbol_stats(ls, grounded));
      const double p_rule = program_probability(pcfg, spec.rule);
      HeapSearch hs(pcfg, spec.shortcut_depth);
      std::uint64_t n = 0;
      while (ok) {
        auto e = hs.next();
        if (!e || e->probability < p_rule * (1.0 - 1e-9)) break;
        if (++n > kShortcutProgramCap) {
          log::warn("shortcut check stopped after " + std::to_string(kShortcutProgramCap) +
                    " programs");
          break;
        }
        if (program_accuracy(e->program, few_ptrs, few_labels) < 1.0) continue;
        for (std::size_t i = 0; i < seen.size() && ok; ++i) {
          ok = eval_or(e->program, seen[i], !labels[i]) == labels[i];
        }
      }
    }
    if (!ok) continue;

    Fixture fx;
    fx.task.task_id = spec.task_id;
    fx.task.profile = spec.dsl.profile;
    fx.vocabulary = vocab;
    fx.dsl = spec.dsl;
    fx.rule = spec.rule;
    fx.seed = spec.seed;
    fx.removal_variants = spec.removal_variants;
    auto add = [&](std::vector<std::pair<ImageScenes, bool>>& split, bool is_query) {
      for (std::size_t i = 0; i < split.size(); ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "images/%s_%03zu.png", is_query ? "query" : "img", i);
        std::string bytes = "VLP synthetic image\ntask " + spec.task_id + "\nseed " +
                            std::to_string(spec.seed) + "\n" + name + "\n";
        LabeledImage li;
        li.image = name;
        li.label = split[i].second;
        li.digest = sha256_hex(bytes);
        fx.scenes.put(li.digest, std::move(split[i].first));
        fx.image_bytes.push_back(std::move(bytes));
        (is_query ? fx.task.query : fx.task.few_shot).push_back(std::move(li));
      }
    };
    add(few, false);
    add(query, true);
    return fx;
  }
  throw GenerationError("no sample satisfied the fixture constraints after " +
                        std::to_string(spec.max_attempts) + " attempts");
}

Task write_fixture(const Fixture& fx, const std::string& dir) {
  fs::create_directories(fs::path(dir) / "images");
  const std::string mock = (fs::path(dir) / "mock").string();
  fs::create_directories(mock);

  std::vector<const LabeledImage*> all;
  for (const auto& i : fx.task.few_shot) all.push_back(&i);
  for (const auto& i : fx.task.query) all.push_back(&i);
  for (std::size_t i = 0; i < all.size(); ++i) {
    std::ofstream out(fs::path(dir) / all[i]->image, std::ios::binary);
    if (!out) throw ConfigError("cannot write fixture image under '" + dir + "'");
    out << fx.image_bytes[i];
  }
  save_task(fx.task, (fs::path(dir) / "task.json").string());
  save_dsl_config(fx.dsl, (fs::path(dir) / "dsl.json").string());
  {
    nlohmann::ordered_json j;
    j["task_id"] = fx.task.task_id;
    j["profile"] = fx.dsl.profile;
    j["rule"] = fx.rule.text();
    j["seed"] = fx.seed;
    j["vocabulary"] = nlohmann::ordered_json::parse(grounded_symbols_to_json(fx.vocabulary));
    std::ofstream out(fs::path(dir) / "fixture.json");
    out << j.dump(2) << "\n";
  }

  const PromptSet prompts;
  const ProfileDefaults counts = profile_defaults(fx.dsl.profile);
  const ResolvedDsl dsl = resolve(fx.dsl);
  std::vector<ImageInput> few;
  for (const auto& i : fx.task.few_shot) few.push_back({i.digest, i.image});

  std::vector<std::set<std::string>> variants = {fx.dsl.removed_symbols};
  for (const auto& v : fx.removal_variants) variants.push_back(v);
  for (const auto& removed : variants) {
    GroundedSymbols g;
    if (counts.n_objects > 0) {
      write_mock_response(mock,
                          {grounding_prompt(prompts, PromptId::kGroundObjects, counts.n_objects, {}), few},
                          fence("objects", flat_literal(fx.vocabulary.objects)));
      g.objects = clean_symbols({fx.vocabulary.objects, {}, {}}, removed).objects;
    }
    if (counts.n_properties > 0) {
      write_mock_response(mock,
                          {grounding_prompt(prompts, PromptId::kGroundProperties,
                                            counts.n_properties, g.objects), few},
                          fence("properties", flat_literal(fx.vocabulary.properties)));
      g.properties = fx.vocabulary.properties;
    }
    if (counts.n_actions > 0) {
      write_mock_response(mock,
                          {grounding_prompt(prompts, PromptId::kGroundActions, counts.n_actions,
                                            g.objects), few},
                          fence("actions", flat_literal(fx.vocabulary.actions)));
      g.actions = fx.vocabulary.actions;
    }
    g = clean_symbols(g, removed);

    for (const auto* img : all) {
      const ImageInput input{img->digest, img->image};
      const ImageScenes seen = restrict_to(*fx.scenes.find(img->digest), g);
      if (!g.objects.empty()) {
        write_mock_response(mock, {scene_prompt(prompts, SceneKind::kObjects, g), {input}},
                            fence("objects", seen.objects.to_python()));
      }
      if (!g.actions.empty()) {
        write_mock_response(mock, {scene_prompt(prompts, SceneKind::kActions, g), {input}},
                            fence("actions", seen.actions.to_python()));
      }
      for (const auto& pred : size_predicate_names()) {
        if (!dsl.enables(pred)) continue;
        const bool with_property = pred.find("with_property") != std::string::npos;
        for (const auto& o : g.objects) {
          std::vector<std::vector<std::string>> arg_sets;
          if (!with_property) {
            arg_sets.push_back({o});
          } else {
            for (const auto& p : g.properties) arg_sets.push_back({o, p});
          }
          for (const auto& args : arg_sets) {
            const auto it = seen.size_answers.find(size_answer_key(pred, args));
            const bool yes = it != seen.size_answers.end() && it->second;
            write_mock_response(mock, {size_prompt(prompts, pred, args), {input}},
                                yes ? "YES" : "NO");
          }
        }
      }
    }
  }
  return load_task((fs::path(dir) / "task.json").string());
}

}  // namespace vlp
