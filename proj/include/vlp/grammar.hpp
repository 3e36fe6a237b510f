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

// Probabilistic context-free grammar over semantic types.
//
// One nonterminal per semantic type, one production per (return type,
// primitive) and per (symbol type, grounded symbol). Non-symbol productions
// of a nonterminal share its mass uniformly; grounded symbols are weighted by
// how often they occur in positive versus negative few-shot scenes:
//
//   w(e) = (n_pos / N_pos) * (n_pos / (n_pos + n_neg))   if n_pos > 0
//   w(e) = 0.01                                          otherwise
//
// and normalized within their nonterminal.

#ifndef VLP_GRAMMAR_HPP_
#define VLP_GRAMMAR_HPP_

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "vlp/dsl.hpp"
#include "vlp/program.hpp"
#include "vlp/scene.hpp"

namespace vlp {

inline constexpr double kSymbolEpsilon = 0.01;

struct GroundedSymbols {
  std::vector<std::string> objects;
  std::vector<std::string> properties;
  std::vector<std::string> actions;

  /// Symbol list for OBJECT, PROPERTY or ACTION; empty for anything else.
  const std::vector<std::string>& of(SemanticType t) const;
  bool operator==(const GroundedSymbols&) const = default;
};

/// Normalizes every symbol, removes duplicates (first occurrence wins) and
/// drops `removed`.
GroundedSymbols clean_symbols(const GroundedSymbols& symbols,
                              const std::set<std::string>& removed = {});

struct SymbolCounts {
  int n_pos = 0;
  int n_neg = 0;
};

/// Presence counts of each grounded symbol over the few-shot scenes.
struct SymbolStats {
  int total_pos = 0;
  int total_neg = 0;
  std::map<std::pair<SemanticType, std::string>, SymbolCounts> counts;

  SymbolCounts get(SemanticType type, const std::string& symbol) const;
};

struct LabeledScenes {
  const ImageScenes* scenes;
  bool positive;
};

/// Counts each symbol at most once per image. OBJECT symbols match row heads
/// and PROPERTY symbols row tails of the objects scene; ACTION symbols match
/// row heads of the actions scene.
SymbolStats compute_symbol_stats(std::span<const LabeledScenes> examples,
                                 const GroundedSymbols& symbols);

/// Unnormalized occurrence weight. Throws ConfigError when total_pos == 0 or
/// n_pos > total_pos.
double symbol_weight(int n_pos, int n_neg, int total_pos);

enum class RuleKind : std::uint8_t { kApply, kSymbol, kInt, kInput };

struct ProductionRule {
  SemanticType lhs;
  RuleKind kind;
  const Primitive* primitive = nullptr;  // kApply, kInput
  std::string symbol;                    // kSymbol
  std::int64_t value = 0;                // kInt
  double probability = 0.0;

  /// Argument nonterminals; empty for terminals.
  const std::vector<SemanticType>& args() const;
  /// Right-hand side as written in grammar dumps, e.g. "(exists_object SCENE OBJECT)".
  std::string rhs_text() const;
  /// The leaf program for terminal rules.
  Program terminal() const;
};

class Pcfg {
 public:
  Pcfg() = default;

  SemanticType start() const { return SemanticType::kBool; }
  /// Nonterminals with at least one production, in canonical order.
  std::vector<SemanticType> nonterminals() const;
  const std::vector<ProductionRule>& rules(SemanticType lhs) const;
  std::size_t rule_count() const;
  bool empty() const { return rules_.empty(); }

  /// The production that builds `node` at `lhs`, or nullptr.
  const ProductionRule* find_rule(SemanticType lhs, const Node& node) const;

  const std::vector<std::string>& warnings() const { return warnings_; }

  /// Line-oriented text form; probabilities to 12 significant digits.
  std::string dump() const;
  static Pcfg from_dump(std::string_view text);

  /// Adds a rule; used by the builder and the dump loader. Call reindex() after.
  void add_rule(ProductionRule rule);
  void reindex();
  void add_warning(std::string w) { warnings_.push_back(std::move(w)); }

 private:
  std::map<SemanticType, std::vector<ProductionRule>> rules_;
  std::map<SemanticType, std::unordered_map<std::string, std::size_t>> index_;
  std::vector<std::string> warnings_;
};

/// Grammar with occurrence-weighted symbol productions.
Pcfg build_pcfg(const DslConfig& config, const GroundedSymbols& symbols,
                const SymbolStats& stats);
/// Fully uniform grammar (symbol weighting ablated).
Pcfg build_pcfg_uniform(const DslConfig& config, const GroundedSymbols& symbols);

/// Product of the probabilities of the rules in the (unique) derivation.
/// Throws UnderivableError naming the first node without a matching rule.
double program_probability(const Pcfg& pcfg, const Program& program);

}  // namespace vlp

#endif  // VLP_GRAMMAR_HPP_
