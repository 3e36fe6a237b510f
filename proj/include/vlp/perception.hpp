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

// Perception: symbol grounding, per-image scene extraction and size-predicate
// answers, all routed through the response cache so that search never talks
// to a VLM.

#ifndef VLP_PERCEPTION_HPP_
#define VLP_PERCEPTION_HPP_

#include <atomic>
#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "vlp/dsl.hpp"
#include "vlp/grammar.hpp"
#include "vlp/list_parser.hpp"
#include "vlp/prompts.hpp"
#include "vlp/scene.hpp"
#include "vlp/task.hpp"
#include "vlp/vlm.hpp"

namespace vlp {

struct GroundingRequest {
  std::vector<ImageInput> images;
  int n_objects = 10;
  int n_properties = 10;
  int n_actions = 3;
  std::set<std::string> removed_symbols;
};

/// Grounding request for every few-shot image of `task` (labels are not sent).
GroundingRequest grounding_request(const Task& task, const ProfileDefaults& counts,
                                   const std::set<std::string>& removed = {});

enum class SceneKind { kObjects, kActions };

struct SceneResult {
  Scene scene;
  bool parse_ok = true;
  bool repaired = false;
  bool from_cache = false;
  /// False when no request was needed (empty symbol list).
  bool requested = false;
};

/// Per-image record of a precompute run.
struct ManifestEntry {
  std::string image;
  std::string digest;
  bool few_shot = false;
  /// All enabled perception outputs are available.
  bool complete = false;
  bool objects_requested = false;
  bool objects_parse_ok = true;
  bool objects_repaired = false;
  bool actions_requested = false;
  bool actions_parse_ok = true;
  bool actions_repaired = false;
  std::size_t size_answers = 0;
  std::vector<std::string> errors;
};

struct PrecomputeManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t hits = 0;
  std::uint64_t fetched = 0;
  std::uint64_t network_calls = 0;
  std::uint64_t object_entries = 0;
  std::uint64_t action_entries = 0;
  std::uint64_t size_entries = 0;
  std::uint64_t parsed = 0;
  std::uint64_t repaired = 0;
  std::uint64_t parse_failures = 0;
  /// Images with at least one missing output.
  std::uint64_t misses = 0;

  std::vector<std::string> missing_few_shot() const;
};

std::string manifest_to_json(const PrecomputeManifest& m);
PrecomputeManifest manifest_from_json(std::string_view text);

class Perception {
 public:
  /// `cache` may be null, in which case every request goes to the backend.
  Perception(VlmBackend& backend, VlmEndpointConfig cfg, ResponseCache* cache,
             PromptSet prompts = PromptSet());

  /// Objects first, then properties and actions with the objects interpolated.
  /// A count of 0 skips that prompt. Unparsable output is retried with fresh
  /// attempts and finally yields an empty list.
  GroundedSymbols ground_symbols(const GroundingRequest& request);

  SceneResult extract_scene(const ImageInput& image, SceneKind kind,
                            const GroundedSymbols& symbols);

  /// YES/NO answer; unrecognized answers are retried, then read as false.
  bool answer_size_predicate(const ImageInput& image, const std::string& predicate,
                             const std::vector<std::string>& args);

  /// Fills `scenes` for every few-shot and query image with the VLM outputs
  /// the configuration enables. Transport failures are recorded as misses and
  /// leave the image out of `scenes`.
  PrecomputeManifest precompute_task(const Task& task, const GroundedSymbols& symbols,
                                     const DslConfig& dsl, SceneCache& scenes);

  std::uint64_t cache_hits() const { return hits_.load(); }
  std::uint64_t fetched() const { return fetched_.load(); }
  const VlmEndpointConfig& config() const { return cfg_; }

 private:
  struct Reply {
    CachedResponse entry;
    bool from_cache = false;
  };
  template <typename Parse>
  Reply request(const ChatRequest& req, Parse parse);

  std::vector<std::string> ground_list(const std::string& what, const std::string& prompt,
                                       const std::vector<ImageInput>& images);

  VlmBackend& backend_;
  VlmEndpointConfig cfg_;
  ResponseCache* cache_;
  PromptSet prompts_;
  std::atomic<std::uint64_t> hits_{0};
  std::atomic<std::uint64_t> fetched_{0};
};

/// The exact prompt texts Perception sends; shared with the fixture writer
/// so replayed responses are keyed identically.
std::string grounding_prompt(const PromptSet& prompts, PromptId id, int n,
                             const std::vector<std::string>& objects);
std::string scene_prompt(const PromptSet& prompts, SceneKind kind, const GroundedSymbols& symbols);
std::string size_prompt(const PromptSet& prompts, const std::string& predicate,
                        const std::vector<std::string>& args);

std::string grounded_symbols_to_json(const GroundedSymbols& symbols);
GroundedSymbols grounded_symbols_from_json(std::string_view text);

std::string scene_cache_to_json(const SceneCache& cache);
SceneCache scene_cache_from_json(std::string_view text);

}  // namespace vlp

#endif  // VLP_PERCEPTION_HPP_
