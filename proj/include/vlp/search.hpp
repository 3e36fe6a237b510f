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

// Best-first program enumeration (heap search) and candidate ranking.
//
// The grammar is unrolled by depth: nonterminal (T, d) derives the programs
// of type T with application depth <= d, so every program has exactly one
// derivation and probabilities are those of the original grammar. Each
// nonterminal owns a max-heap of pending programs and the stream of programs
// it has already popped. A pending program is a rule plus one index into each
// argument's stream; popping it pushes the successors obtained by advancing
// one index at a time. Streams are therefore produced in non-increasing
// probability order, lazily and without duplicates.

#ifndef VLP_SEARCH_HPP_
#define VLP_SEARCH_HPP_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vlp/grammar.hpp"
#include "vlp/program.hpp"
#include "vlp/scene.hpp"
#include "vlp/task.hpp"

namespace vlp {

struct SearchBudget {
  double time_limit_seconds = 10.0;
  int max_depth = 4;
  std::optional<std::uint64_t> max_programs;
  /// Stop at the first program with accuracy 1.0. Off by default: the best
  /// perfect program is the most probable one, which may come later.
  bool stop_on_perfect = false;

  /// Throws ConfigError unless time_limit > 0 and max_depth >= 1.
  void validate() const;
};

struct Enumerated {
  Program program;
  double probability = 0.0;
};

class HeapSearch {
 public:
  HeapSearch(const Pcfg& pcfg, int max_depth);
  ~HeapSearch();
  HeapSearch(HeapSearch&&) noexcept;
  HeapSearch& operator=(HeapSearch&&) noexcept;

  /// Next BOOL program in non-increasing probability order; ties are broken
  /// by serialized text. std::nullopt once the grammar is exhausted.
  std::optional<Enumerated> next();
  std::uint64_t yielded() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

/// Convenience: the first `limit` programs (all of them when unset).
std::vector<Enumerated> enumerate(const Pcfg& pcfg, int max_depth,
                                  std::optional<std::uint64_t> limit = std::nullopt);

struct Candidate {
  Program program;
  double probability = 0.0;
  double accuracy = 0.0;
  std::uint64_t enumeration_index = 0;
};

/// True when `a` ranks strictly above `b`: higher accuracy, then higher
/// probability, then lower enumeration index.
bool ranks_above(const Candidate& a, const Candidate& b);

/// The top-ranked candidate. Throws NoCandidateError on an empty set.
const Candidate& rank(std::span<const Candidate> candidates);

enum class StopReason { kBudget, kExhausted, kPerfectEarlyStop };

std::string_view stop_reason_name(StopReason r);

struct SynthesisResult {
  Candidate best;
  /// Predictions of `best` on the few-shot images, in task order.
  std::vector<bool> per_image_predictions;
  std::uint64_t candidates_evaluated = 0;
  StopReason stop_reason = StopReason::kExhausted;
  /// Image evaluations that raised and were counted as misclassified.
  std::uint64_t evaluation_errors = 0;
};

/// Fraction of `examples` the program classifies correctly. Evaluation errors
/// count as misclassifications and are added to `errors` when given.
double program_accuracy(const Program& program, std::span<const ImageScenes* const> scenes,
                        const std::vector<bool>& labels, std::vector<bool>* predictions = nullptr,
                        std::uint64_t* errors = nullptr);

/// Enumerates programs and keeps the best by rank(). Scenes are only read
/// from `scenes`; a missing few-shot entry raises CacheMissError before any
/// search happens.
SynthesisResult synthesize(const Task& task, const Pcfg& pcfg, const SceneCache& scenes,
                           const SearchBudget& budget);

std::string synthesis_result_to_json(const SynthesisResult& result, const Task& task);

/// Loaded form of a result file.
struct StoredResult {
  std::string program;
  double accuracy = 0.0;
  double probability = 0.0;
  std::uint64_t candidates_evaluated = 0;
  std::string stop_reason;
  std::vector<bool> per_image_predictions;
};

StoredResult synthesis_result_from_json(std::string_view text);

}  // namespace vlp

#endif  // VLP_SEARCH_HPP_
