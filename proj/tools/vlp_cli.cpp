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

// vlp: command-line front end.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "vlp/dsl.hpp"
#include "vlp/error.hpp"
#include "vlp/fixture.hpp"
#include "vlp/grammar.hpp"
#include "vlp/log.hpp"
#include "vlp/perception.hpp"
#include "vlp/pipeline.hpp"
#include "vlp/search.hpp"
#include "vlp/task.hpp"

namespace fs = std::filesystem;
using namespace vlp;

namespace {

struct Common {
  std::string profile;
  std::string dsl_path;
  std::string endpoint;
  std::string model;
  std::string api_key_env = "VLP_API_KEY";
  bool greedy = false;
  std::optional<double> temperature;
  int max_retries = 3;
  double timeout = 120.0;
  int parallelism = 4;
  std::string cache_dir = ".vlp-cache";
  std::string mock_dir;
  bool offline = false;
  std::string prompt_dir;
  bool quiet = false;
};

void add_endpoint_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--endpoint", c.endpoint, "Chat-completions base URL, e.g. http://host:8000/v1");
  cmd->add_option("--model", c.model, "Model name sent to the endpoint");
  cmd->add_option("--api-key-env", c.api_key_env, "Environment variable holding the API key");
  auto* g = cmd->add_flag("--greedy", c.greedy, "Greedy decoding (temperature 0)");
  cmd->add_option("--temperature", c.temperature, "Sampling temperature")->excludes(g);
  cmd->add_option("--max-retries", c.max_retries, "Retries for unparsable or failed responses");
  cmd->add_option("--timeout", c.timeout, "Per-request timeout in seconds");
  cmd->add_option("--parallelism", c.parallelism, "Concurrent per-image requests");
  cmd->add_option("--cache-dir", c.cache_dir, "Response cache directory");
  auto* m = cmd->add_option("--mock-backend", c.mock_dir, "Replay responses from a fixture's mock/ directory");
  cmd->add_flag("--offline", c.offline, "Serve from cache only; fail on any network request")->excludes(m);
  cmd->add_option("--prompt-dir", c.prompt_dir, "Directory of prompt template overrides");
}

void add_dsl_flags(CLI::App* cmd, Common& c) {
  cmd->add_option("--profile", c.profile, "Dataset profile (overrides the task's)");
  cmd->add_option("--dsl", c.dsl_path, "DSL configuration file");
}

VlmEndpointConfig endpoint_config(const Common& c) {
  VlmEndpointConfig e;
  if (!c.endpoint.empty()) e.base_url = c.endpoint;
  if (!c.model.empty()) e.model_name = c.model;
  e.api_key_env = c.api_key_env;
  e.greedy = c.greedy;
  if (c.temperature) e.temperature = *c.temperature;
  e.max_retries = c.max_retries;
  e.timeout_seconds = c.timeout;
  e.parallelism = c.parallelism;
  e.validate();
  return e;
}

std::unique_ptr<VlmBackend> backend_for(const Common& c) {
  if (c.offline) return make_backend(BackendKind::kOffline, "");
  if (!c.mock_dir.empty()) return make_backend(BackendKind::kMock, c.mock_dir);
  return make_backend(BackendKind::kHttp, "");
}

DslConfig dsl_for(const Common& c, const Task* task) {
  DslConfig d;
  if (task) d.profile = task->profile;
  if (!c.dsl_path.empty()) d = load_dsl_config(c.dsl_path);
  if (!c.profile.empty()) d.profile = c.profile;
  resolve(d);
  return d;
}

PromptSet prompts_for(const Common& c) {
  return c.prompt_dir.empty() ? PromptSet() : PromptSet::with_overrides(c.prompt_dir);
}

void write_or_print(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path + "'");
  out << text;
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

// "3" means three seeds 0,1,2; "7,11" lists seeds explicitly.
std::vector<std::int64_t> parse_seeds(const std::string& s) {
  std::vector<std::int64_t> out;
  try {
    if (s.find(',') == std::string::npos) {
      const long n = std::stol(s);
      if (n < 1) throw ConfigError("--seeds must be >= 1");
      for (long i = 0; i < n; ++i) out.push_back(i);
      return out;
    }
    for (const auto& part : split_csv(s)) out.push_back(std::stoll(part));
  } catch (const std::logic_error&) {
    throw ConfigError("bad --seeds value '" + s + "'");
  }
  return out;
}

SceneCache load_scenes(const std::string& path) { return scene_cache_from_json(read_file(path)); }

Pcfg grammar_for(const DslConfig& dsl, const GroundedSymbols& symbols, const Task* task,
                 const SceneCache* scenes, bool uniform) {
  if (uniform || !task || !scenes) return build_pcfg_uniform(dsl, symbols);
  std::vector<LabeledScenes> labeled;
  for (const auto& ex : task->few_shot) {
    const ImageScenes* s = scenes->find(ex.digest);
    if (!s) throw CacheMissError("no cached scenes for few-shot image '" + ex.image + "'");
    labeled.push_back({s, ex.label});
  }
  return build_pcfg(dsl, symbols, compute_symbol_stats(labeled, symbols));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vision-language program synthesis"};
  app.require_subcommand(1);
  Common c;
  app.add_flag("-q,--quiet", c.quiet, "Suppress warnings");

  // ground
  std::string task_path, out_path, symbols_path, scenes_path, result_path;
  std::optional<std::int64_t> seed;
  auto* ground = app.add_subcommand("ground", "Ground object/property/action symbols for a task");
  ground->add_option("--task", task_path, "Task file")->required();
  ground->add_option("--seed", seed, "Sampling seed");
  ground->add_option("--out", out_path, "Symbols file (default: stdout)");
  add_dsl_flags(ground, c);
  add_endpoint_flags(ground, c);

  // perceive
  auto* perceive = app.add_subcommand("perceive", "Precompute scene representations for every image");
  perceive->add_option("--task", task_path, "Task file")->required();
  perceive->add_option("--symbols", symbols_path, "Symbols file from 'ground'")->required();
  perceive->add_option("--seed", seed, "Sampling seed");
  perceive->add_option("--out", out_path, "Output directory (scenes.json, manifest.json)")->required();
  add_dsl_flags(perceive, c);
  add_endpoint_flags(perceive, c);

  // synthesize
  std::optional<double> budget_secs;
  std::optional<int> max_depth;
  std::optional<std::uint64_t> max_programs;
  bool uniform = false, stop_on_perfect = false;
  std::string grammar_out;
  auto* synth = app.add_subcommand("synthesize", "Search for the best program (offline)");
  synth->add_option("--task", task_path, "Task file")->required();
  synth->add_option("--symbols", symbols_path, "Symbols file")->required();
  synth->add_option("--scenes", scenes_path, "scenes.json from 'perceive'")->required();
  synth->add_option("--budget-secs", budget_secs, "Search time limit in seconds");
  synth->add_option("--max-depth", max_depth, "Maximum program depth");
  synth->add_option("--max-programs", max_programs, "Stop after this many candidates");
  synth->add_flag("--stop-on-perfect", stop_on_perfect, "Stop at the first perfect program");
  synth->add_flag("--uniform-weights", uniform, "Uniform symbol probabilities");
  synth->add_option("--grammar-out", grammar_out, "Also write the grammar dump here");
  synth->add_option("--out", out_path, "Result file (default: stdout)");
  add_dsl_flags(synth, c);

  // eval
  auto* eval = app.add_subcommand("eval", "Score a program on the task's query images");
  std::string program_text;
  eval->add_option("--task", task_path, "Task file")->required();
  eval->add_option("--scenes", scenes_path, "scenes.json")->required();
  auto* res_opt = eval->add_option("--result", result_path, "Result file from 'synthesize'");
  eval->add_option("--program", program_text, "Program text instead of a result file")->excludes(res_opt);
  eval->add_option("--out", out_path, "Eval report (default: stdout)");
  add_dsl_flags(eval, c);

  // run
  std::vector<std::string> task_paths;
  std::string seeds_text = "3";
  bool parallel_seeds = false;
  std::string run_out = "vlp-out";
  auto* run = app.add_subcommand("run", "ground -> perceive -> synthesize -> eval over seeds");
  run->add_option("--task", task_paths, "Task file(s)")->required();
  run->add_option("--seeds", seeds_text, "Seed count (e.g. 3) or list (e.g. 0,5,9)");
  run->add_flag("--parallel-seeds", parallel_seeds, "Run seeds concurrently");
  run->add_option("--budget-secs", budget_secs, "Search time limit in seconds");
  run->add_option("--max-depth", max_depth, "Maximum program depth");
  run->add_option("--max-programs", max_programs, "Stop after this many candidates");
  run->add_flag("--stop-on-perfect", stop_on_perfect, "Stop at the first perfect program");
  run->add_flag("--uniform-weights", uniform, "Uniform symbol probabilities");
  run->add_option("--out", run_out, "Output directory");
  add_dsl_flags(run, c);
  add_endpoint_flags(run, c);

  // dsl
  std::string config_path, add_prims, remove_prims, remove_syms, restore_syms, init_profile;
  bool add_size = false;
  auto* dsl = app.add_subcommand("dsl", "Edit a DSL configuration file");
  dsl->add_option("--config", config_path, "DSL configuration file (created if missing)")->required();
  dsl->add_option("--init-profile", init_profile, "Profile for a new configuration");
  dsl->add_option("--add", add_prims, "Comma-separated primitives to enable");
  dsl->add_option("--remove", remove_prims, "Comma-separated primitives to disable");
  dsl->add_flag("--add-size-predicates", add_size, "Enable the four size predicates");
  dsl->add_option("--remove-symbols", remove_syms, "Comma-separated symbols to exclude");
  dsl->add_option("--restore-symbols", restore_syms, "Comma-separated symbols to bring back");
  dsl->add_option("--symbols", symbols_path, "Symbols file used to validate names and show the diff");
  dsl->add_option("--task", task_path, "Task file; with --scenes, weights the diff like a run");
  dsl->add_option("--scenes", scenes_path, "scenes.json for occurrence weights");

  // grammar
  auto* grammar = app.add_subcommand("grammar", "Print the grammar for a DSL and symbol set");
  grammar->add_option("--symbols", symbols_path, "Symbols file")->required();
  grammar->add_option("--task", task_path, "Task file (with --scenes: occurrence weights)");
  grammar->add_option("--scenes", scenes_path, "scenes.json");
  grammar->add_flag("--uniform-weights", uniform, "Uniform symbol probabilities");
  grammar->add_option("--out", out_path, "Output file (default: stdout)");
  add_dsl_flags(grammar, c);

  // cache
  std::string cache_key_arg;
  auto* cache = app.add_subcommand("cache", "Inspect the response cache");
  cache->add_option("--cache-dir", c.cache_dir, "Response cache directory");
  auto* cache_stats = cache->add_subcommand("stats", "Entry and parse counts");
  auto* cache_list = cache->add_subcommand("list", "List entry keys");
  auto* cache_show = cache->add_subcommand("show", "Print one entry");
  cache_show->add_option("key", cache_key_arg, "Entry key")->required();
  cache->require_subcommand(1);
  for (auto* sub : {cache_stats, cache_list, cache_show}) sub->fallthrough();

  // fixture
  std::string rule_text, objects_csv, properties_csv, actions_csv, fixture_out;
  std::vector<std::string> not_separate;
  int n_pos = 6, n_neg = 6, n_query = 4;
  std::uint64_t fixture_seed = 0;
  bool reject_shortcuts = false;
  std::string fixture_id = "fixture";
  auto* fixture = app.add_subcommand("fixture", "Generate a synthetic task with a known rule");
  fixture->add_option("--rule", rule_text, "Ground-truth program")->required();
  fixture->add_option("--objects", objects_csv, "Comma-separated object vocabulary")->required();
  fixture->add_option("--properties", properties_csv, "Comma-separated property vocabulary");
  fixture->add_option("--actions", actions_csv, "Comma-separated action vocabulary");
  fixture->add_option("--pos", n_pos, "Positive few-shot images");
  fixture->add_option("--neg", n_neg, "Negative few-shot images");
  fixture->add_option("--query", n_query, "Query images");
  fixture->add_option("--seed", fixture_seed, "Generator seed");
  fixture->add_option("--task-id", fixture_id, "Task id");
  fixture->add_option("--not-separating", not_separate, "Programs that must not separate the few-shot set");
  fixture->add_flag("--reject-shortcuts", reject_shortcuts, "Reject samples with a more probable misleading separator");
  fixture->add_option("--out", fixture_out, "Output directory")->required();
  add_dsl_flags(fixture, c);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  log::set_quiet(c.quiet);

  try {
    if (ground->parsed()) {
      const Task task = load_task(task_path);
      const DslConfig d = dsl_for(c, &task);
      auto backend = backend_for(c);
      VlmEndpointConfig ep = endpoint_config(c);
      ep.seed = seed;
      ResponseCache rc(c.cache_dir);
      Perception p(*backend, ep, &rc, prompts_for(c));
      const auto symbols =
          p.ground_symbols(grounding_request(task, profile_defaults(d.profile), d.removed_symbols));
      write_or_print(out_path, grounded_symbols_to_json(symbols));
      std::cerr << "grounding: " << p.cache_hits() << " cached, " << p.fetched() << " fetched\n";
    } else if (perceive->parsed()) {
      const Task task = load_task(task_path);
      const DslConfig d = dsl_for(c, &task);
      const auto symbols = clean_symbols(grounded_symbols_from_json(read_file(symbols_path)),
                                         d.removed_symbols);
      auto backend = backend_for(c);
      VlmEndpointConfig ep = endpoint_config(c);
      ep.seed = seed;
      ResponseCache rc(c.cache_dir);
      Perception p(*backend, ep, &rc, prompts_for(c));
      SceneCache scenes;
      const auto manifest = p.precompute_task(task, symbols, d, scenes);
      write_or_print((fs::path(out_path) / "scenes.json").string(), scene_cache_to_json(scenes));
      write_or_print((fs::path(out_path) / "manifest.json").string(), manifest_to_json(manifest));
      std::cerr << "perceive: " << manifest.hits << " cached, " << manifest.fetched
                << " fetched, " << manifest.misses << " incomplete images\n";
      if (manifest.network_calls && manifest.misses) return 3;
    } else if (synth->parsed()) {
      const Task task = load_task(task_path);
      const DslConfig d = dsl_for(c, &task);
      const auto symbols = clean_symbols(grounded_symbols_from_json(read_file(symbols_path)),
                                         d.removed_symbols);
      const SceneCache scenes = load_scenes(scenes_path);
      const Pcfg pcfg = grammar_for(d, symbols, &task, &scenes, uniform);
      if (!grammar_out.empty()) write_or_print(grammar_out, pcfg.dump());
      RunConfig rc;
      rc.time_limit_seconds = budget_secs;
      rc.max_depth = max_depth;
      rc.max_programs = max_programs;
      rc.stop_on_perfect = stop_on_perfect;
      const auto result = synthesize(task, pcfg, scenes, effective_budget(rc, d.profile));
      write_or_print(out_path, synthesis_result_to_json(result, task));
    } else if (eval->parsed()) {
      const Task task = load_task(task_path);
      const DslConfig d = dsl_for(c, &task);
      const SceneCache scenes = load_scenes(scenes_path);
      std::string text = program_text;
      if (!result_path.empty()) text = synthesis_result_from_json(read_file(result_path)).program;
      if (text.empty()) throw ConfigError("give --result or --program");
      const Program prog = parse_program(text, resolve(d).primitives);
      write_or_print(out_path, eval_report_to_json(evaluate_on_queries(prog, task, scenes)));
    } else if (run->parsed()) {
      RunConfig rc;
      rc.task_paths = task_paths;
      if (!c.profile.empty()) rc.profile = c.profile;
      if (!c.dsl_path.empty()) rc.dsl_config_path = c.dsl_path;
      rc.endpoint = endpoint_config(c);
      rc.backend = c.offline ? BackendKind::kOffline
                             : (c.mock_dir.empty() ? BackendKind::kHttp : BackendKind::kMock);
      rc.mock_dir = c.mock_dir;
      rc.time_limit_seconds = budget_secs;
      rc.max_depth = max_depth;
      rc.max_programs = max_programs;
      rc.stop_on_perfect = stop_on_perfect;
      rc.uniform_weights = uniform;
      rc.seeds = parse_seeds(seeds_text);
      rc.parallel_seeds = parallel_seeds;
      rc.cache_dir = c.cache_dir;
      rc.out_dir = run_out;
      if (!c.prompt_dir.empty()) rc.prompt_dir = c.prompt_dir;
      const auto outcomes = run_pipeline(rc);
      int code = 0;
      for (const auto& t : outcomes) {
        std::cout << t.task_id << ":";
        for (const auto& s : t.seeds) {
          std::cout << "\n  seed " << s.seed << ": ";
          if (s.ok) {
            std::cout << s.result->best.program.text() << "  few-shot acc "
                      << s.result->best.accuracy << "  query bal-acc "
                      << s.eval->balanced_accuracy;
          } else {
            std::cout << "failed in " << s.stage << ": " << s.error;
          }
        }
        if (t.mean_balanced_accuracy) {
          std::cout << "\n  mean balanced accuracy " << *t.mean_balanced_accuracy << "\n";
        } else {
          std::cout << "\n  no seed completed\n";
          if (code == 0) code = t.seeds.front().exit_code;
        }
      }
      return code;
    } else if (dsl->parsed()) {
      DslConfig cfg;
      if (fs::exists(config_path)) {
        cfg = load_dsl_config(config_path);
      } else {
        cfg.profile = init_profile.empty() ? "custom" : init_profile;
      }
      GroundedSymbols symbols;
      if (!symbols_path.empty()) symbols = grounded_symbols_from_json(read_file(symbols_path));
      std::optional<Task> task;
      std::optional<SceneCache> scenes;
      std::optional<SymbolStats> stats;
      if (!task_path.empty() && !scenes_path.empty()) {
        task = load_task(task_path);
        scenes = load_scenes(scenes_path);
        std::vector<LabeledScenes> labeled;
        for (const auto& ex : task->few_shot) {
          const ImageScenes* s = scenes->find(ex.digest);
          if (!s) throw CacheMissError("no cached scenes for few-shot image '" + ex.image + "'");
          labeled.push_back({s, ex.label});
        }
        stats = compute_symbol_stats(labeled, symbols);
      }
      DslEdit edit;
      edit.add_primitives = split_csv(add_prims);
      edit.remove_primitives = split_csv(remove_prims);
      edit.remove_symbols = split_csv(remove_syms);
      edit.restore_symbols = split_csv(restore_syms);
      edit.add_size_predicates = add_size;
      const auto r = dsl_edit(cfg, edit, symbols, stats ? &*stats : nullptr);
      save_dsl_config(r.config, config_path);
      for (const auto& w : r.warnings) log::warn(w);
      std::cout << (r.grammar_diff.empty() ? std::string("(no grammar changes)\n") : r.grammar_diff);
    } else if (grammar->parsed()) {
      std::optional<Task> task;
      if (!task_path.empty()) task = load_task(task_path);
      const DslConfig d = dsl_for(c, task ? &*task : nullptr);
      const auto symbols = clean_symbols(grounded_symbols_from_json(read_file(symbols_path)),
                                         d.removed_symbols);
      std::optional<SceneCache> scenes;
      if (!scenes_path.empty()) scenes = load_scenes(scenes_path);
      const Pcfg pcfg =
          grammar_for(d, symbols, task ? &*task : nullptr, scenes ? &*scenes : nullptr, uniform);
      for (const auto& w : pcfg.warnings()) log::warn(w);
      write_or_print(out_path, pcfg.dump());
    } else if (cache->parsed()) {
      ResponseCache rc(c.cache_dir);
      if (cache_stats->parsed()) {
        std::size_t n = 0, ok = 0, repaired = 0;
        for (const auto& k : rc.keys()) {
          auto e = rc.get(k);
          if (!e) continue;
          ++n;
          ok += e->parse_ok;
          repaired += e->repaired;
        }
        std::cout << "entries " << n << "\nparse_ok " << ok << "\nrepaired " << repaired
                  << "\nparse_failed " << (n - ok) << "\n";
      } else if (cache_list->parsed()) {
        for (const auto& k : rc.keys()) std::cout << k << "\n";
      } else if (cache_show->parsed()) {
        auto e = rc.get(cache_key_arg);
        if (!e) throw ConfigError("no cache entry '" + cache_key_arg + "'");
        std::cout << read_file((fs::path(c.cache_dir) / (cache_key_arg + ".json")).string());
      }
    } else if (fixture->parsed()) {
      FixtureSpec spec;
      spec.task_id = fixture_id;
      if (!c.dsl_path.empty()) spec.dsl = load_dsl_config(c.dsl_path);
      spec.dsl.profile = c.profile.empty() ? spec.dsl.profile : c.profile;
      const Catalog cat = resolve(spec.dsl).primitives;
      spec.rule = parse_program(rule_text, cat);
      spec.vocabulary = {split_csv(objects_csv), split_csv(properties_csv), split_csv(actions_csv)};
      spec.n_pos = n_pos;
      spec.n_neg = n_neg;
      spec.n_query = n_query;
      spec.seed = fixture_seed;
      spec.reject_shortcuts = reject_shortcuts;
      for (const auto& t : not_separate) spec.must_not_separate.push_back(parse_program(t, cat));
      const Fixture fx = make_fixture(spec);
      write_fixture(fx, fixture_out);
      std::cout << "wrote " << fx.task.few_shot.size() << " few-shot and " << fx.task.query.size()
                << " query images to " << fixture_out << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return error_exit_code(e);
  }
  return 0;
}
