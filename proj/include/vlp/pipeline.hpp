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

// End-to-end orchestration: ground -> perceive -> grammar -> search -> eval,
// repeated over seeds, plus DSL editing.

#ifndef VLP_PIPELINE_HPP_
#define VLP_PIPELINE_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "vlp/dsl.hpp"
#include "vlp/perception.hpp"
#include "vlp/search.hpp"
#include "vlp/task.hpp"
#include "vlp/vlm.hpp"

namespace vlp {

enum class BackendKind { kHttp, kMock, kOffline };

struct RunConfig {
  std::vector<std::string> task_paths;
  /// Overrides the task's profile when set.
  std::optional<std::string> profile;
  /// Loaded over the profile defaults when set.
  std::optional<std::string> dsl_config_path;
  VlmEndpointConfig endpoint;
  BackendKind backend = BackendKind::kHttp;
  std::string mock_dir;
  /// Unset fields take the profile defaults.
  std::optional<double> time_limit_seconds;
  std::optional<int> max_depth;
  std::optional<std::uint64_t> max_programs;
  bool stop_on_perfect = false;
  bool uniform_weights = false;
  std::vector<std::int64_t> seeds = {0, 1, 2};
  bool parallel_seeds = false;
  std::string cache_dir = ".vlp-cache";
  std::string out_dir = "vlp-out";
  std::optional<std::string> prompt_dir;

  /// Throws ConfigError when paths are missing or seeds are empty.
  void validate() const;
};

std::unique_ptr<VlmBackend> make_backend(BackendKind kind, const std::string& mock_dir);

/// Effective DSL for a task: profile defaults, then the config file, then the
/// profile override.
DslConfig effective_dsl(const RunConfig& cfg, const Task& task);
SearchBudget effective_budget(const RunConfig& cfg, const std::string& profile);

struct SeedOutcome {
  std::int64_t seed = 0;
  bool ok = false;
  std::string error;
  std::string stage;
  /// Process exit code matching the error (see error_exit_code).
  int exit_code = 0;
  std::optional<SynthesisResult> result;
  std::optional<EvalReport> eval;
};

struct TaskOutcome {
  std::string task_id;
  std::vector<SeedOutcome> seeds;
  /// Mean query balanced accuracy over completed seeds.
  std::optional<double> mean_balanced_accuracy;
};

/// Runs every task for every seed. Per-seed artifacts go to
/// <out>/<task_id>/seed-<s>/ (symbols.json, manifest.json, scenes.json,
/// grammar.txt, result.json, eval.json); <out>/<task_id>/aggregate.json holds
/// the mean. A failing stage aborts only its seed.
std::vector<TaskOutcome> run_pipeline(const RunConfig& cfg);

/// One seed of the pipeline for an already loaded task.
SeedOutcome run_seed(const RunConfig& cfg, const Task& task, std::int64_t seed,
                     VlmBackend& backend, const std::string& cache_dir, const std::string& out_dir);

std::string aggregate_to_json(const TaskOutcome& outcome);

struct DslEdit {
  std::vector<std::string> add_primitives;
  std::vector<std::string> remove_primitives;
  std::vector<std::string> remove_symbols;
  std::vector<std::string> restore_symbols;
  bool add_size_predicates = false;
};

struct DslEditResult {
  DslConfig config;
  /// Unified-style diff of grammar productions ("- rule" / "+ rule").
  std::string grammar_diff;
  std::vector<std::string> warnings;
};

/// Applies `edit` to `config`. Unknown primitive names raise ConfigError
/// listing the valid names; removing a symbol that `symbols` does not contain
/// raises ConfigError listing the grounded symbols. The diff compares the
/// grammars built from `symbols` before and after the edit (uniform weights).
DslEditResult dsl_edit(const DslConfig& config, const DslEdit& edit,
                       const GroundedSymbols& symbols, const SymbolStats* stats = nullptr);

/// 0 ok, 2 configuration, 3 transport, 4 no candidate, 1 anything else.
int error_exit_code(const std::exception& e);

/// Line diff of two grammar dumps restricted to productions.
std::string grammar_diff(const std::string& before, const std::string& after);

}  // namespace vlp

#endif  // VLP_PIPELINE_HPP_
