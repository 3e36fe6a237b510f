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

#ifndef VLP_PROGRAM_HPP_
#define VLP_PROGRAM_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "vlp/dsl.hpp"

namespace vlp {

enum class NodeKind : std::uint8_t { kApply, kSymbol, kInt, kInput };

struct Node;

/// Immutable typed expression tree. Copies share structure.
class Program {
 public:
  Program() = default;

  static Program apply(const Primitive& primitive, std::vector<Program> children);
  /// `text` is normalized (lowercased, trimmed).
  static Program symbol(SemanticType type, std::string_view text);
  static Program integer(std::int64_t value);
  static Program input();

  explicit operator bool() const { return static_cast<bool>(node_); }
  const Node& node() const { return *node_; }

  NodeKind kind() const;
  SemanticType type() const;
  int depth() const;
  /// The canonical s-expression; computed once at construction.
  const std::string& text() const;
  const std::vector<Program>& children() const;

  bool operator==(const Program& other) const;
  bool operator!=(const Program& other) const { return !(*this == other); }

 private:
  explicit Program(std::shared_ptr<const Node> n) : node_(std::move(n)) {}
  std::shared_ptr<const Node> node_;
};

struct Node {
  NodeKind kind;
  SemanticType type;
  const Primitive* primitive = nullptr;  // kApply
  std::string symbol;                    // kSymbol
  std::int64_t value = 0;                // kInt
  std::vector<Program> children;
  int depth = 0;
  std::string text;
};

inline NodeKind Program::kind() const { return node_->kind; }
inline SemanticType Program::type() const { return node_->type; }
inline int Program::depth() const { return node_->depth; }
inline const std::string& Program::text() const { return node_->text; }
inline const std::vector<Program>& Program::children() const { return node_->children; }

/// Symbol text as it appears in program text; quoted when it could be
/// mistaken for a token.
std::string quote_symbol_if_needed(std::string_view symbol);

inline std::string serialize(const Program& p) { return p.text(); }

/// Parses an s-expression over `catalog` names and symbol strings. Throws
/// ParseError (with byte offset) on unbalanced parentheses, unknown
/// primitives, and arity mismatches.
Program parse_program(std::string_view text, const Catalog& catalog);

struct TypeReport {
  bool ok = true;
  /// Child indices from the root to the first offending node.
  std::vector<std::size_t> path;
  std::string message;

  std::string path_string() const;
};

/// Total: never throws.
TypeReport typecheck(const Program& program);

/// Counts nodes in the tree.
std::size_t program_size(const Program& program);

}  // namespace vlp

#endif  // VLP_PROGRAM_HPP_
