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

// Synthetic tasks with a known ground-truth rule, for offline testing of the
// whole pipeline through the mock backend.

#ifndef VLP_FIXTURE_HPP_
#define VLP_FIXTURE_HPP_

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vlp/dsl.hpp"
#include "vlp/grammar.hpp"
#include "vlp/program.hpp"
#include "vlp/scene.hpp"
#include "vlp/task.hpp"

namespace vlp {

struct FixtureSpec {
  std::string task_id = "fixture";
  Program rule;
  /// DSL used for the task; its profile also fixes the grounding counts.
  DslConfig dsl;
  /// Symbols the scenes are drawn from (what mock grounding returns).
  GroundedSymbols vocabulary;
  int n_pos = 6;
  int n_neg = 6;
  /// Held-out images, split as evenly as possible (extra one positive).
  int n_query = 4;
  std::uint64_t seed = 0;

  int min_objects = 1;
  int max_objects = 4;
  int max_properties_per_object = 2;
  int max_actions = 2;
  /// Chance that a size predicate answers YES.
  double size_yes_rate = 0.3;

  /// Programs that must agree with the rule on every few-shot image.
  std::vector<Program> agree_on_few_shot;
  /// Programs that must not reach accuracy 1.0 on the few-shot images.
  std::vector<Program> must_not_separate;
  /// Rejects samples in which a program at least as probable as the rule
  /// (under the task's own grammar, depth <= shortcut_depth) separates the
  /// few-shot images but disagrees with the rule on some image.
  bool reject_shortcuts = false;
  int shortcut_depth = 4;

  int max_attempts = 2000;

  /// Further removed-symbol sets to write mock responses for, so the bundle
  /// also replays after those DSL edits.
  std::vector<std::set<std::string>> removal_variants;
};

struct Fixture {
  /// Image paths are relative ("images/img_000.png"); resolved_path is
  /// filled by write_fixture.
  Task task;
  /// Scenes by image digest.
  SceneCache scenes;
  /// Placeholder image contents, parallel to few_shot then query.
  std::vector<std::string> image_bytes;
  GroundedSymbols vocabulary;
  DslConfig dsl;
  Program rule;
  std::uint64_t seed = 0;
  std::vector<std::set<std::string>> removal_variants;
};

/// Throws GenerationError when the rule is ill-typed, uses symbols outside
/// the vocabulary, or the requested split cannot be realized.
Fixture make_fixture(const FixtureSpec& spec);

/// Writes task.json, images/, dsl.json, fixture.json and mock/ (replayable
/// responses for grounding and every per-image prompt) under `dir`, and
/// returns the task as loaded from the written file.
Task write_fixture(const Fixture& fixture, const std::string& dir);

/// Symbols (with their type) that occur in `program`.
std::vector<std::pair<SemanticType, std::string>> program_symbols(const Program& program);

}  // namespace vlp

#endif  // VLP_FIXTURE_HPP_
