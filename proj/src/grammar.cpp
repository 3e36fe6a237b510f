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

#include "vlp/grammar.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <set>
#include <sstream>

#include "vlp/error.hpp"
#include "vlp/executor.hpp"
#include "vlp/log.hpp"

namespace vlp {
namespace {

const std::vector<SemanticType> kNoArgs;

std::string rule_key(RuleKind kind, const std::string& name, const std::string& symbol,
                     std::int64_t value) {
  switch (kind) {
    case RuleKind::kApply: return "(" + name;
    case RuleKind::kSymbol: return "s:" + symbol;
    case RuleKind::kInt: return "i:" + std::to_string(value);
    case RuleKind::kInput: return "IMG";
  }
  return {};
}

std::string rule_key(const ProductionRule& r) {
  return rule_key(r.kind, r.primitive ? r.primitive->name : std::string(), r.symbol, r.value);
}

std::string node_key(const Node& n) {
  switch (n.kind) {
    case NodeKind::kApply: return "(" + n.primitive->name;
    case NodeKind::kSymbol: return "s:" + n.symbol;
    case NodeKind::kInt: return "i:" + std::to_string(n.value);
    case NodeKind::kInput: return "IMG";
  }
  return {};
}

std::string format_probability(double p) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", p);
  return buf;
}

enum class Weighting { kOccurrence, kUniform };

Pcfg build(const DslConfig& config, const GroundedSymbols& raw_symbols, const SymbolStats* stats,
           Weighting weighting) {
  const ResolvedDsl dsl = resolve(config);
  const GroundedSymbols symbols = clean_symbols(raw_symbols, config.removed_symbols);

  std::vector<ProductionRule> candidates;
  for (const auto* p : dsl.primitives) {
    candidates.push_back({p->result, RuleKind::kApply, p});
  }
  for (auto t : {SemanticType::kObject, SemanticType::kProperty, SemanticType::kAction}) {
    for (const auto& s : symbols.of(t)) {
      candidates.push_back({t, RuleKind::kSymbol, nullptr, s});
    }
  }
  for (auto v : dsl.constants) {
    candidates.push_back({SemanticType::kInt, RuleKind::kInt, nullptr, {}, v});
  }
  candidates.push_back({SemanticType::kImg, RuleKind::kInput, &input_variable()});

  // Productive nonterminals: least fixpoint from terminal rules.
  std::set<SemanticType> productive;
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : candidates) {
      if (productive.count(r.lhs)) continue;
      const auto& args = r.args();
      if (std::all_of(args.begin(), args.end(),
                      [&](SemanticType a) { return productive.count(a) > 0; })) {
        productive.insert(r.lhs);
        changed = true;
      }
    }
  }

  Pcfg out;
  std::vector<ProductionRule> kept;
  for (auto& r : candidates) {
    const auto& args = r.args();
    auto missing = std::find_if(args.begin(), args.end(),
                                [&](SemanticType a) { return productive.count(a) == 0; });
    if (missing != args.end()) {
      std::string w = "dropping productions of '" + r.primitive->name + "': no productions for " +
                      std::string(type_name(*missing));
      log::warn(w);
      out.add_warning(std::move(w));
      continue;
    }
    kept.push_back(std::move(r));
  }
  if (!productive.count(SemanticType::kBool)) {
    throw GrammarError("BOOL is underivable: no complete program can be built from the enabled "
                       "primitives and grounded symbols");
  }

  // Keep only what the start symbol can reach.
  std::set<SemanticType> reachable = {SemanticType::kBool};
  for (bool changed = true; changed;) {
    changed = false;
    for (const auto& r : kept) {
      if (!reachable.count(r.lhs)) continue;
      for (auto a : r.args()) changed |= reachable.insert(a).second;
    }
  }

  std::map<SemanticType, std::vector<ProductionRule>> by_lhs;
  for (auto& r : kept) {
    if (reachable.count(r.lhs)) by_lhs[r.lhs].push_back(std::move(r));
  }

  for (auto& [lhs, rules] : by_lhs) {
    const double n = static_cast<double>(rules.size());
    std::vector<double> weights;
    double weight_sum = 0.0;
    std::size_t symbol_rules = 0;
    for (const auto& r : rules) {
      if (r.kind == RuleKind::kSymbol && weighting == Weighting::kOccurrence) {
        const auto c = stats->get(r.lhs, r.symbol);
        const double w = symbol_weight(c.n_pos, c.n_neg, stats->total_pos);
        weights.push_back(w);
        weight_sum += w;
        ++symbol_rules;
      } else {
        weights.push_back(0.0);
      }
    }
    const double symbol_mass = static_cast<double>(symbol_rules) / n;
    for (std::size_t i = 0; i < rules.size(); ++i) {
      auto& r = rules[i];
      if (r.kind == RuleKind::kSymbol && weighting == Weighting::kOccurrence) {
        r.probability = symbol_mass * (weights[i] / weight_sum);
      } else {
        r.probability = 1.0 / n;
      }
      out.add_rule(std::move(r));
    }
  }
  out.reindex();
  return out;
}

struct DerivationWalker {
  const Pcfg& pcfg;

  double operator()(const Program& p, SemanticType lhs) const {
    const Node& n = p.node();
    const ProductionRule* rule = pcfg.find_rule(lhs, n);
    if (!rule) {
      throw UnderivableError("no production " + std::string(type_name(lhs)) + " -> " +
                             p.text() + " in the grammar");
    }
    double prob = rule->probability;
    const auto& args = rule->args();
    if (args.size() != n.children.size()) {
      throw UnderivableError("arity mismatch at " + p.text());
    }
    for (std::size_t i = 0; i < args.size(); ++i) prob *= (*this)(n.children[i], args[i]);
    return prob;
  }
};

}  // namespace

const std::vector<std::string>& GroundedSymbols::of(SemanticType t) const {
  static const std::vector<std::string> none;
  switch (t) {
    case SemanticType::kObject: return objects;
    case SemanticType::kProperty: return properties;
    case SemanticType::kAction: return actions;
    default: return none;
  }
}

GroundedSymbols clean_symbols(const GroundedSymbols& symbols, const std::set<std::string>& removed) {
  std::set<std::string> removed_norm;
  for (const auto& r : removed) removed_norm.insert(normalize_symbol(r));
  auto clean = [&](const std::vector<std::string>& in) {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& s : in) {
      auto n = normalize_symbol(s);
      if (n.empty() || removed_norm.count(n) || !seen.insert(n).second) continue;
      out.push_back(std::move(n));
    }
    return out;
  };
  return {clean(symbols.objects), clean(symbols.properties), clean(symbols.actions)};
}

SymbolCounts SymbolStats::get(SemanticType type, const std::string& symbol) const {
  auto it = counts.find({type, symbol});
  return it == counts.end() ? SymbolCounts{} : it->second;
}

SymbolStats compute_symbol_stats(std::span<const LabeledScenes> examples,
                                 const GroundedSymbols& symbols) {
  SymbolStats stats;
  for (auto t : {SemanticType::kObject, SemanticType::kProperty, SemanticType::kAction}) {
    for (const auto& s : symbols.of(t)) stats.counts[{t, normalize_symbol(s)}];
  }
  for (const auto& ex : examples) {
    (ex.positive ? stats.total_pos : stats.total_neg) += 1;
    for (auto& [key, c] : stats.counts) {
      const auto& [type, sym] = key;
      bool present = false;
      switch (type) {
        case SemanticType::kObject:
          present = semantics::exists_object(ex.scenes->objects, sym);
          break;
        case SemanticType::kProperty:
          present = semantics::exists_property(ex.scenes->objects, sym);
          break;
        case SemanticType::kAction:
          present = semantics::exists_action(ex.scenes->actions, sym);
          break;
        default: break;
      }
      if (present) (ex.positive ? c.n_pos : c.n_neg) += 1;
    }
  }
  return stats;
}

double symbol_weight(int n_pos, int n_neg, int total_pos) {
  if (total_pos <= 0) throw ConfigError("symbol weighting needs at least one positive example");
  if (n_pos < 0 || n_neg < 0 || n_pos > total_pos) {
    throw ConfigError("symbol counts out of range: n_pos=" + std::to_string(n_pos) +
                      " n_neg=" + std::to_string(n_neg) + " N_pos=" + std::to_string(total_pos));
  }
  if (n_pos == 0) return kSymbolEpsilon;
  const double pos = static_cast<double>(n_pos);
  return (pos / total_pos) * (pos / (pos + n_neg));
}

const std::vector<SemanticType>& ProductionRule::args() const {
  return kind == RuleKind::kApply ? primitive->args : kNoArgs;
}

std::string ProductionRule::rhs_text() const {
  switch (kind) {
    case RuleKind::kApply: {
      std::string s = "(" + primitive->name;
      for (auto a : primitive->args) {
        s += ' ';
        s += type_name(a);
      }
      return s + ")";
    }
    case RuleKind::kSymbol: return quote_symbol_if_needed(symbol);
    case RuleKind::kInt: return std::to_string(value);
    case RuleKind::kInput: return "IMG";
  }
  return {};
}

Program ProductionRule::terminal() const {
  switch (kind) {
    case RuleKind::kSymbol: return Program::symbol(lhs, symbol);
    case RuleKind::kInt: return Program::integer(value);
    case RuleKind::kInput: return Program::input();
    case RuleKind::kApply: break;
  }
  return {};
}

std::vector<SemanticType> Pcfg::nonterminals() const {
  std::vector<SemanticType> out;
  for (const auto& [t, rules] : rules_) {
    if (!rules.empty()) out.push_back(t);
  }
  return out;
}

const std::vector<ProductionRule>& Pcfg::rules(SemanticType lhs) const {
  static const std::vector<ProductionRule> none;
  auto it = rules_.find(lhs);
  return it == rules_.end() ? none : it->second;
}

std::size_t Pcfg::rule_count() const {
  std::size_t n = 0;
  for (const auto& [t, rules] : rules_) n += rules.size();
  return n;
}

const ProductionRule* Pcfg::find_rule(SemanticType lhs, const Node& node) const {
  auto it = index_.find(lhs);
  if (it == index_.end()) return nullptr;
  auto jt = it->second.find(node_key(node));
  if (jt == it->second.end()) return nullptr;
  return &rules_.at(lhs)[jt->second];
}

void Pcfg::add_rule(ProductionRule rule) { rules_[rule.lhs].push_back(std::move(rule)); }

void Pcfg::reindex() {
  index_.clear();
  for (const auto& [lhs, rules] : rules_) {
    auto& idx = index_[lhs];
    for (std::size_t i = 0; i < rules.size(); ++i) idx.emplace(rule_key(rules[i]), i);
  }
}

std::string Pcfg::dump() const {
  std::ostringstream out;
  out << "# vlp grammar\n";
  out << "start " << type_name(start()) << "\n";
  out << "nonterminals";
  for (auto t : nonterminals()) out << ' ' << type_name(t);
  out << "\n";
  for (const auto& [lhs, rules] : rules_) {
    for (const auto& r : rules) {
      out << type_name(lhs) << " -> " << r.rhs_text() << " @ " << format_probability(r.probability)
          << "\n";
    }
  }
  return out.str();
}

Pcfg Pcfg::from_dump(std::string_view text) {
  Pcfg g;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  auto fail = [&](const std::string& why) {
    throw GrammarError("grammar dump line " + std::to_string(lineno) + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#' || line.rfind("start ", 0) == 0 ||
        line.rfind("nonterminals", 0) == 0) {
      continue;
    }
    const auto arrow = line.find(" -> ");
    const auto at = line.rfind(" @ ");
    if (arrow == std::string::npos || at == std::string::npos || at < arrow) fail("malformed rule");
    const auto lhs = parse_type_name(line.substr(0, arrow));
    if (!lhs) fail("unknown nonterminal");
    const std::string rhs = line.substr(arrow + 4, at - arrow - 4);
    ProductionRule r{*lhs, RuleKind::kInput};
    try {
      r.probability = std::stod(line.substr(at + 3));
    } catch (const std::exception&) {
      fail("bad probability");
    }
    if (rhs.empty()) fail("empty right-hand side");
    if (rhs.front() == '(') {
      std::istringstream parts(rhs.substr(1, rhs.size() - 2));
      std::string name;
      parts >> name;
      std::vector<SemanticType> args;
      for (std::string a; parts >> a;) {
        auto t = parse_type_name(a);
        if (!t) fail("unknown argument type " + a);
        args.push_back(*t);
      }
      const Primitive* prim = nullptr;
      for (bool strict : {false, true}) {
        const auto* p = find_primitive(name, strict);
        if (p && p->args == args && p->result == *lhs) prim = p;
      }
      if (!prim) fail("unknown primitive signature " + rhs);
      r.kind = RuleKind::kApply;
      r.primitive = prim;
    } else if (rhs.front() == '"') {
      std::string sym;
      for (std::size_t i = 1; i + 1 < rhs.size(); ++i) {
        if (rhs[i] == '\\' && i + 2 < rhs.size()) ++i;
        sym += rhs[i];
      }
      r.kind = RuleKind::kSymbol;
      r.symbol = sym;
    } else if (rhs == "IMG" && *lhs == SemanticType::kImg) {
      r.kind = RuleKind::kInput;
      r.primitive = &input_variable();
    } else if (*lhs == SemanticType::kInt) {
      r.kind = RuleKind::kInt;
      auto [ptr, ec] = std::from_chars(rhs.data(), rhs.data() + rhs.size(), r.value);
      if (ec != std::errc() || ptr != rhs.data() + rhs.size()) fail("bad integer constant");
    } else {
      r.kind = RuleKind::kSymbol;
      r.symbol = rhs;
    }
    g.add_rule(std::move(r));
  }
  g.reindex();
  return g;
}

Pcfg build_pcfg(const DslConfig& config, const GroundedSymbols& symbols,
                const SymbolStats& stats) {
  return build(config, symbols, &stats, Weighting::kOccurrence);
}

Pcfg build_pcfg_uniform(const DslConfig& config, const GroundedSymbols& symbols) {
  return build(config, symbols, nullptr, Weighting::kUniform);
}

double program_probability(const Pcfg& pcfg, const Program& program) {
  return DerivationWalker{pcfg}(program, pcfg.start());
}

}  // namespace vlp
