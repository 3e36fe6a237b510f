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

#include "vlp/search.hpp"

#include <chrono>
#include <deque>
#include <map>
#include <queue>
#include <unordered_set>

#include "json.hpp"
#include "vlp/error.hpp"
#include "vlp/executor.hpp"
#include "vlp/log.hpp"

namespace vlp {

void SearchBudget::validate() const {
  if (!(time_limit_seconds > 0.0)) throw ConfigError("time limit must be positive");
  if (max_depth < 1) throw ConfigError("max depth must be at least 1");
}

// --- heap search -----------------------------------------------------------

struct HeapSearch::Impl {
  struct Item {
    Program program;
    double probability;
  };

  struct Pending {
    double probability;
    Program program;
    std::uint32_t rule;
    std::vector<std::uint32_t> indices;
  };

  // Max-heap order: probability, then lexicographically smaller text first.
  struct PendingLess {
    bool operator()(const Pending& a, const Pending& b) const {
      if (a.probability != b.probability) return a.probability < b.probability;
      return a.program.text() > b.program.text();
    }
  };

  struct RuleRef {
    const ProductionRule* rule;
    std::vector<int> children;  // nonterminal ids
  };

  struct Nonterminal {
    bool initialized = false;
    std::vector<RuleRef> rules;
    std::priority_queue<Pending, std::vector<Pending>, PendingLess> heap;
    std::vector<Item> stream;
    std::unordered_set<std::string> seen;
  };

  const Pcfg& pcfg;
  std::deque<Nonterminal> nts;
  std::map<std::pair<SemanticType, int>, int> ids;
  int start = -1;
  std::uint64_t yielded = 0;

  Impl(const Pcfg& g, int max_depth) : pcfg(g) { start = id(g.start(), max_depth); }

  bool terminal_only(SemanticType t) const {
    for (const auto& r : pcfg.rules(t)) {
      if (r.kind == RuleKind::kApply) return false;
    }
    return true;
  }

  int id(SemanticType t, int depth) {
    if (depth < 0) return -1;
    if (terminal_only(t)) depth = 0;
    auto key = std::make_pair(t, depth);
    if (auto it = ids.find(key); it != ids.end()) return it->second;
    const int me = static_cast<int>(nts.size());
    ids.emplace(key, me);
    nts.emplace_back();
    std::vector<RuleRef> rules;
    for (const auto& r : pcfg.rules(t)) {
      if (r.kind != RuleKind::kApply) {
        rules.push_back({&r, {}});
        continue;
      }
      if (depth == 0) continue;
      RuleRef ref{&r, {}};
      for (auto a : r.args()) ref.children.push_back(id(a, depth - 1));
      rules.push_back(std::move(ref));
    }
    nts[me].rules = std::move(rules);
    return me;
  }

  static std::string seen_key(std::uint32_t rule, const std::vector<std::uint32_t>& idx) {
    std::string k(reinterpret_cast<const char*>(&rule), sizeof rule);
    k.append(reinterpret_cast<const char*>(idx.data()), idx.size() * sizeof(std::uint32_t));
    return k;
  }

  // Builds the pending program for rule `r` of `nt` at child stream positions
  // `idx`; nullopt if some child stream is too short.
  std::optional<Pending> make(int nt, std::uint32_t r, std::vector<std::uint32_t> idx) {
    const RuleRef& ref = nts[nt].rules[r];
    if (ref.rule->kind != RuleKind::kApply) {
      return Pending{ref.rule->probability, ref.rule->terminal(), r, {}};
    }
    std::vector<Program> children;
    children.reserve(idx.size());
    double p = ref.rule->probability;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      if (ref.children[i] < 0 || !ensure(ref.children[i], idx[i])) return std::nullopt;
      const Item& c = nts[ref.children[i]].stream[idx[i]];
      p *= c.probability;
      children.push_back(c.program);
    }
    return Pending{p, Program::apply(*ref.rule->primitive, std::move(children)), r,
                   std::move(idx)};
  }

  void initialize(int nt) {
    nts[nt].initialized = true;
    for (std::uint32_t r = 0; r < nts[nt].rules.size(); ++r) {
      std::vector<std::uint32_t> zeros(nts[nt].rules[r].children.size(), 0);
      if (auto p = make(nt, r, zeros)) nts[nt].heap.push(std::move(*p));
    }
  }

  // Makes stream position `j` of `nt` available. False once exhausted.
  bool ensure(int nt, std::size_t j) {
    if (!nts[nt].initialized) initialize(nt);
    while (nts[nt].stream.size() <= j) {
      if (nts[nt].heap.empty()) return false;
      Pending top = nts[nt].heap.top();
      nts[nt].heap.pop();
      nts[nt].stream.push_back({top.program, top.probability});
      const std::size_t k = top.indices.size();
      for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::uint32_t> succ = top.indices;
        ++succ[i];
        if (k > 1 && !nts[nt].seen.insert(seen_key(top.rule, succ)).second) continue;
        if (auto p = make(nt, top.rule, std::move(succ))) nts[nt].heap.push(std::move(*p));
      }
    }
    return true;
  }

  std::optional<Enumerated> next() {
    if (start < 0 || !ensure(start, yielded)) return std::nullopt;
    const Item& it = nts[start].stream[yielded++];
    return Enumerated{it.program, it.probability};
  }
};

HeapSearch::HeapSearch(const Pcfg& pcfg, int max_depth)
    : impl_(std::make_unique<Impl>(pcfg, max_depth)) {}
HeapSearch::~HeapSearch() = default;
HeapSearch::HeapSearch(HeapSearch&&) noexcept = default;
HeapSearch& HeapSearch::operator=(HeapSearch&&) noexcept = default;

std::optional<Enumerated> HeapSearch::next() { return impl_->next(); }
std::uint64_t HeapSearch::yielded() const { return impl_->yielded; }

std::vector<Enumerated> enumerate(const Pcfg& pcfg, int max_depth,
                                  std::optional<std::uint64_t> limit) {
  std::vector<Enumerated> out;
  HeapSearch hs(pcfg, max_depth);
  while (!limit || out.size() < *limit) {
    auto e = hs.next();
    if (!e) break;
    out.push_back(std::move(*e));
  }
  return out;
}

// --- ranking -----------------------------------------------------------------

bool ranks_above(const Candidate& a, const Candidate& b) {
  if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
  if (a.probability != b.probability) return a.probability > b.probability;
  return a.enumeration_index < b.enumeration_index;
}

const Candidate& rank(std::span<const Candidate> candidates) {
  if (candidates.empty()) throw NoCandidateError("no candidate programs to rank");
  const Candidate* best = &candidates.front();
  for (const auto& c : candidates.subspan(1)) {
    if (ranks_above(c, *best)) best = &c;
  }
  return *best;
}

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::kBudget: return "budget";
    case StopReason::kExhausted: return "exhausted";
    case StopReason::kPerfectEarlyStop: return "perfect_early_stop";
  }
  return "?";
}

// --- synthesis ---------------------------------------------------------------

double program_accuracy(const Program& program, std::span<const ImageScenes* const> scenes,
                        const std::vector<bool>& labels, std::vector<bool>* predictions,
                        std::uint64_t* errors) {
  std::size_t correct = 0;
  if (predictions) predictions->clear();
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    bool pred;
    try {
      pred = evaluate(program, *scenes[i]);
    } catch (const EvalError&) {
      pred = !labels[i];
      if (errors) ++*errors;
    }
    if (pred == labels[i]) ++correct;
    if (predictions) predictions->push_back(pred);
  }
  return scenes.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(scenes.size());
}

SynthesisResult synthesize(const Task& task, const Pcfg& pcfg, const SceneCache& scenes,
                           const SearchBudget& budget) {
  budget.validate();
  std::vector<const ImageScenes*> inputs;
  std::vector<bool> labels;
  for (const auto& ex : task.few_shot) {
    const ImageScenes* s = scenes.find(ex.digest);
    if (!s) throw CacheMissError("no cached scenes for few-shot image '" + ex.image + "'");
    inputs.push_back(s);
    labels.push_back(ex.label);
  }

  using Clock = std::chrono::steady_clock;
  const auto deadline =
      Clock::now() + std::chrono::duration_cast<Clock::duration>(
                         std::chrono::duration<double>(budget.time_limit_seconds));

  HeapSearch search(pcfg, budget.max_depth);
  SynthesisResult result;
  bool have_best = false;
  result.stop_reason = StopReason::kExhausted;
  while (true) {
    if (budget.max_programs && result.candidates_evaluated >= *budget.max_programs) {
      result.stop_reason = StopReason::kBudget;
      break;
    }
    auto next = search.next();
    if (!next) break;
    Candidate c{next->program, next->probability, 0.0, result.candidates_evaluated};
    c.accuracy = program_accuracy(c.program, inputs, labels, nullptr, &result.evaluation_errors);
    ++result.candidates_evaluated;
    if (!have_best || ranks_above(c, result.best)) {
      result.best = std::move(c);
      have_best = true;
      if (budget.stop_on_perfect && result.best.accuracy == 1.0) {
        result.stop_reason = StopReason::kPerfectEarlyStop;
        break;
      }
    }
    if (Clock::now() >= deadline) {
      result.stop_reason = StopReason::kBudget;
      break;
    }
  }
  if (!have_best) throw NoCandidateError("search produced no candidate program");
  if (result.evaluation_errors) {
    log::warn(std::to_string(result.evaluation_errors) +
              " image evaluation(s) failed during search and were counted as misclassified");
  }
  program_accuracy(result.best.program, inputs, labels, &result.per_image_predictions);
  return result;
}

std::string synthesis_result_to_json(const SynthesisResult& r, const Task& task) {
  nlohmann::ordered_json j;
  j["task_id"] = task.task_id;
  j["program"] = r.best.program.text();
  j["accuracy"] = r.best.accuracy;
  j["probability"] = r.best.probability;
  j["enumeration_index"] = r.best.enumeration_index;
  j["candidates_evaluated"] = r.candidates_evaluated;
  j["stop_reason"] = std::string(stop_reason_name(r.stop_reason));
  j["evaluation_errors"] = r.evaluation_errors;
  nlohmann::ordered_json preds = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < r.per_image_predictions.size(); ++i) {
    preds.push_back({{"image", i < task.few_shot.size() ? task.few_shot[i].image : ""},
                     {"prediction", r.per_image_predictions[i] ? 1 : 0}});
  }
  j["per_image_predictions"] = preds;
  return j.dump(2) + "\n";
}

StoredResult synthesis_result_from_json(std::string_view text) {
  StoredResult s;
  try {
    const auto j = nlohmann::json::parse(text);
    s.program = j.at("program").get<std::string>();
    s.accuracy = j.at("accuracy").get<double>();
    s.probability = j.at("probability").get<double>();
    s.candidates_evaluated = j.at("candidates_evaluated").get<std::uint64_t>();
    s.stop_reason = j.at("stop_reason").get<std::string>();
    for (const auto& p : j.at("per_image_predictions")) {
      s.per_image_predictions.push_back(p.at("prediction").get<int>() == 1);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed result file: ") + e.what());
  }
  return s;
}

}  // namespace vlp
