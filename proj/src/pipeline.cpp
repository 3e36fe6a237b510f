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

#include "vlp/pipeline.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <set>
#include <thread>

#include "json.hpp"
#include "vlp/error.hpp"
#include "vlp/log.hpp"

namespace vlp {

namespace fs = std::filesystem;

namespace {

void write_text(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + p.string() + "'");
  out << text;
}

}  // namespace

int error_exit_code(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const CacheMissError*>(&e) ||
      dynamic_cast<const ParseError*>(&e) || dynamic_cast<const UnderivableError*>(&e)) {
    return 2;
  }
  if (dynamic_cast<const TransportError*>(&e)) return 3;
  if (dynamic_cast<const NoCandidateError*>(&e)) return 4;
  return 1;
}

void RunConfig::validate() const {
  if (task_paths.empty()) throw ConfigError("no task file given");
  for (const auto& p : task_paths) {
    if (!fs::exists(p)) throw ConfigError("task file not found '" + p + "'");
  }
  if (dsl_config_path && !fs::exists(*dsl_config_path)) {
    throw ConfigError("DSL config not found '" + *dsl_config_path + "'");
  }
  if (backend == BackendKind::kMock && !fs::is_directory(mock_dir)) {
    throw ConfigError("mock backend directory not found '" + mock_dir + "'");
  }
  if (prompt_dir && !fs::is_directory(*prompt_dir)) {
    throw ConfigError("prompt directory not found '" + *prompt_dir + "'");
  }
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (time_limit_seconds && !(*time_limit_seconds > 0.0)) {
    throw ConfigError("time limit must be positive");
  }
  if (max_depth && *max_depth < 1) throw ConfigError("max depth must be at least 1");
  endpoint.validate();
}

std::unique_ptr<VlmBackend> make_backend(BackendKind kind, const std::string& mock_dir) {
  switch (kind) {
    case BackendKind::kHttp: return std::make_unique<HttpVlmBackend>();
    case BackendKind::kMock: return std::make_unique<MockVlmBackend>(mock_dir);
    case BackendKind::kOffline: return std::make_unique<OfflineBackend>();
  }
  throw ConfigError("unknown backend");
}

DslConfig effective_dsl(const RunConfig& cfg, const Task& task) {
  DslConfig c;
  c.profile = task.profile;
  if (cfg.dsl_config_path) c = load_dsl_config(*cfg.dsl_config_path);
  if (cfg.profile) c.profile = *cfg.profile;
  resolve(c);
  return c;
}

SearchBudget effective_budget(const RunConfig& cfg, const std::string& profile) {
  const ProfileDefaults d = profile_defaults(profile);
  SearchBudget b;
  b.time_limit_seconds = cfg.time_limit_seconds.value_or(d.time_limit_seconds);
  b.max_depth = cfg.max_depth.value_or(d.max_depth);
  b.max_programs = cfg.max_programs;
  b.stop_on_perfect = cfg.stop_on_perfect;
  b.validate();
  return b;
}

SeedOutcome run_seed(const RunConfig& cfg, const Task& task, std::int64_t seed,
                     VlmBackend& backend, const std::string& cache_dir,
                     const std::string& out_dir) {
  SeedOutcome o;
  o.seed = seed;
  const fs::path out(out_dir);
  try {
    o.stage = "config";
    const DslConfig dsl = effective_dsl(cfg, task);
    const SearchBudget budget = effective_budget(cfg, dsl.profile);
    VlmEndpointConfig ep = cfg.endpoint;
    ep.seed = seed;
    ResponseCache cache(cache_dir);
    Perception perception(backend, ep, &cache,
                          cfg.prompt_dir ? PromptSet::with_overrides(*cfg.prompt_dir) : PromptSet());

    o.stage = "ground";
    const GroundedSymbols symbols = perception.ground_symbols(
        grounding_request(task, profile_defaults(dsl.profile), dsl.removed_symbols));
    write_text(out / "symbols.json", grounded_symbols_to_json(symbols));

    o.stage = "perceive";
    SceneCache scenes;
    const PrecomputeManifest manifest = perception.precompute_task(task, symbols, dsl, scenes);
    write_text(out / "manifest.json", manifest_to_json(manifest));
    write_text(out / "scenes.json", scene_cache_to_json(scenes));
    if (const auto missing = manifest.missing_few_shot(); !missing.empty()) {
      throw CacheMissError("perception incomplete for few-shot image '" + missing.front() + "'");
    }

    o.stage = "grammar";
    std::vector<LabeledScenes> labeled;
    for (const auto& ex : task.few_shot) labeled.push_back({scenes.find(ex.digest), ex.label});
    const Pcfg pcfg = cfg.uniform_weights
                          ? build_pcfg_uniform(dsl, symbols)
                          : build_pcfg(dsl, symbols, compute_symbol_stats(labeled, symbols));
    write_text(out / "grammar.txt", pcfg.dump());

    o.stage = "synthesize";
    SynthesisResult result = synthesize(task, pcfg, scenes, budget);
    write_text(out / "result.json", synthesis_result_to_json(result, task));

    o.stage = "eval";
    EvalReport report = evaluate_on_queries(result.best.program, task, scenes);
    write_text(out / "eval.json", eval_report_to_json(report));

    o.result = std::move(result);
    o.eval = std::move(report);
    o.ok = true;
    o.stage = "done";
  } catch (const std::exception& e) {
    o.ok = false;
    o.error = e.what();
    o.exit_code = error_exit_code(e);
    log::warn("task " + task.task_id + " seed " + std::to_string(seed) + " failed during " +
              o.stage + ": " + e.what());
  }
  return o;
}

std::string aggregate_to_json(const TaskOutcome& t) {
  nlohmann::ordered_json j;
  j["task_id"] = t.task_id;
  j["seeds"] = nlohmann::ordered_json::array();
  std::size_t completed = 0;
  for (const auto& s : t.seeds) {
    nlohmann::ordered_json e;
    e["seed"] = s.seed;
    e["ok"] = s.ok;
    if (s.ok) {
      ++completed;
      e["program"] = s.result->best.program.text();
      e["few_shot_accuracy"] = s.result->best.accuracy;
      e["probability"] = s.result->best.probability;
      e["balanced_accuracy"] = s.eval->balanced_accuracy;
    } else {
      e["stage"] = s.stage;
      e["error"] = s.error;
    }
    j["seeds"].push_back(e);
  }
  j["completed_seeds"] = completed;
  j["mean_balanced_accuracy"] =
      t.mean_balanced_accuracy ? nlohmann::ordered_json(*t.mean_balanced_accuracy) : nullptr;
  return j.dump(2) + "\n";
}

std::vector<TaskOutcome> run_pipeline(const RunConfig& cfg) {
  cfg.validate();
  auto backend = make_backend(cfg.backend, cfg.mock_dir);
  std::vector<TaskOutcome> outcomes;
  for (const auto& path : cfg.task_paths) {
    const Task task = load_task(path);
    TaskOutcome t;
    t.task_id = task.task_id;
    t.seeds.resize(cfg.seeds.size());
    const fs::path task_out = fs::path(cfg.out_dir) / task.task_id;
    auto one = [&](std::size_t i) {
      const auto seed = cfg.seeds[i];
      const std::string cache = cfg.parallel_seeds
                                    ? (fs::path(cfg.cache_dir) / ("seed-" + std::to_string(seed))).string()
                                    : cfg.cache_dir;
      t.seeds[i] = run_seed(cfg, task, seed, *backend, cache,
                            (task_out / ("seed-" + std::to_string(seed))).string());
    };
    if (cfg.parallel_seeds) {
      std::vector<std::thread> threads;
      for (std::size_t i = 0; i < cfg.seeds.size(); ++i) threads.emplace_back(one, i);
      for (auto& th : threads) th.join();
    } else {
      for (std::size_t i = 0; i < cfg.seeds.size(); ++i) one(i);
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& s : t.seeds) {
      if (!s.ok) continue;
      sum += s.eval->balanced_accuracy;
      ++n;
    }
    if (n) t.mean_balanced_accuracy = sum / static_cast<double>(n);
    write_text(task_out / "aggregate.json", aggregate_to_json(t));
    outcomes.push_back(std::move(t));
  }
  return outcomes;
}

std::string grammar_diff(const std::string& before, const std::string& after) {
  auto rules = [](const std::string& text) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string::npos) end = text.size();
      std::string line = text.substr(pos, end - pos);
      if (line.find(" -> ") != std::string::npos) out.push_back(std::move(line));
      pos = end + 1;
    }
    return out;
  };
  const auto a = rules(before);
  const auto b = rules(after);
  const std::set<std::string> sa(a.begin(), a.end());
  const std::set<std::string> sb(b.begin(), b.end());
  std::string out;
  for (const auto& l : a) {
    if (!sb.count(l)) out += "- " + l + "\n";
  }
  for (const auto& l : b) {
    if (!sa.count(l)) out += "+ " + l + "\n";
  }
  return out;
}

DslEditResult dsl_edit(const DslConfig& config, const DslEdit& edit,
                       const GroundedSymbols& symbols, const SymbolStats* stats) {
  DslEditResult r;
  DslConfig c = config;
  const auto& sizes = size_predicate_names();
  auto is_size = [&](const std::string& n) {
    return std::find(sizes.begin(), sizes.end(), n) != sizes.end();
  };
  auto check_name = [&](const std::string& n) {
    if (find_primitive(n)) return;
    std::string valid;
    for (const auto* p : full_catalog()) valid += (valid.empty() ? "" : ", ") + p->name;
    throw ConfigError("unknown primitive '" + n + "'; valid names: " + valid);
  };

  std::set<std::string> enabled;
  if (c.enabled_primitives) {
    enabled.insert(c.enabled_primitives->begin(), c.enabled_primitives->end());
  } else {
    for (const auto* p : catalog(c.profile)) enabled.insert(p->name);
  }
  const bool touches_primitives = !edit.add_primitives.empty() || !edit.remove_primitives.empty();
  for (const auto& n : edit.add_primitives) {
    check_name(n);
    if (is_size(n)) {
      c.extra_perception_predicates.insert(n);
    } else {
      enabled.insert(n);
    }
  }
  for (const auto& n : edit.remove_primitives) {
    check_name(n);
    if (is_size(n)) {
      c.extra_perception_predicates.erase(n);
    } else if (!enabled.erase(n)) {
      r.warnings.push_back("primitive '" + n + "' was not enabled");
    }
  }
  if (!edit.remove_primitives.empty()) {
    // A consumer of object or action scenes is dead once nothing produces
    // that scene kind, even though the coarse SCENE type still matches.
    std::set<SemanticType> produced;
    for (const auto& n : enabled) {
      if (const auto* p = find_primitive(n, true); p && is_scene_type(p->result)) {
        produced.insert(p->result);
      }
    }
    for (auto it = enabled.begin(); it != enabled.end();) {
      const auto* p = find_primitive(*it, true);
      bool dead = false;
      for (auto a : p ? p->args : std::vector<SemanticType>{}) {
        dead = dead || (is_scene_type(a) && !produced.count(a));
      }
      if (dead) {
        r.warnings.push_back("disabling '" + *it + "': no enabled primitive produces its " +
                             std::string(type_name(p->args.front())) + " input");
        it = enabled.erase(it);
      } else {
        ++it;
      }
    }
  }
  if (touches_primitives) {
    std::vector<std::string> ordered;
    for (const auto* p : full_catalog()) {
      if (enabled.count(p->name)) ordered.push_back(p->name);
    }
    c.enabled_primitives = ordered;
  }
  if (edit.add_size_predicates) c.extra_perception_predicates.insert(sizes.begin(), sizes.end());

  const bool have_symbols =
      !symbols.objects.empty() || !symbols.properties.empty() || !symbols.actions.empty();
  for (const auto& raw : edit.remove_symbols) {
    const std::string s = normalize_symbol(raw);
    if (have_symbols) {
      bool known = false;
      for (auto t : {SemanticType::kObject, SemanticType::kProperty, SemanticType::kAction}) {
        const auto& v = symbols.of(t);
        known = known || std::find(v.begin(), v.end(), s) != v.end();
      }
      if (!known) {
        std::string valid;
        for (auto t : {SemanticType::kObject, SemanticType::kProperty, SemanticType::kAction}) {
          for (const auto& v : symbols.of(t)) valid += (valid.empty() ? "" : ", ") + v;
        }
        throw ConfigError("unknown symbol '" + s + "'; grounded symbols: " + valid);
      }
    }
    c.removed_symbols.insert(s);
  }
  for (const auto& raw : edit.restore_symbols) {
    const std::string s = normalize_symbol(raw);
    if (!c.removed_symbols.erase(s)) {
      std::string valid;
      for (const auto& v : c.removed_symbols) valid += (valid.empty() ? "" : ", ") + v;
      throw ConfigError("symbol '" + s + "' is not removed; removed symbols: " +
                        (valid.empty() ? std::string("(none)") : valid));
    }
  }
  resolve(c);

  auto dump = [&](const DslConfig& d, bool collect) -> std::string {
    try {
      const Pcfg g = stats ? build_pcfg(d, symbols, *stats) : build_pcfg_uniform(d, symbols);
      if (collect) r.warnings.insert(r.warnings.end(), g.warnings().begin(), g.warnings().end());
      return g.dump();
    } catch (const GrammarError& e) {
      if (collect) r.warnings.push_back(e.what());
      return "";
    }
  };
  r.grammar_diff = grammar_diff(dump(config, false), dump(c, true));
  r.config = std::move(c);
  return r;
}

}  // namespace vlp
