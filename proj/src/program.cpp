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

#include "vlp/program.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <optional>

#include "vlp/error.hpp"

namespace vlp {
namespace {

bool looks_like_integer(std::string_view s) {
  if (s.empty()) return false;
  std::size_t i = (s[0] == '-') ? 1 : 0;
  if (i == s.size()) return false;
  for (; i < s.size(); ++i) {
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  }
  return true;
}

}  // namespace

std::string quote_symbol_if_needed(std::string_view s) {
  bool quote = s.empty() || s == "IMG" || looks_like_integer(s);
  for (char c : s) {
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')' || c == '"' ||
        c == '\\') {
      quote = true;
      break;
    }
  }
  if (!quote) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

Program Program::apply(const Primitive& primitive, std::vector<Program> children) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kApply;
  n->type = primitive.result;
  n->primitive = &primitive;
  int max_child = 0;
  std::size_t len = primitive.name.size() + 2;
  for (const auto& c : children) {
    max_child = std::max(max_child, c.depth());
    len += c.text().size() + 1;
  }
  n->depth = 1 + max_child;
  n->text.reserve(len);
  n->text += '(';
  n->text += primitive.name;
  for (const auto& c : children) {
    n->text += ' ';
    n->text += c.text();
  }
  n->text += ')';
  n->children = std::move(children);
  return Program(std::move(n));
}

Program Program::symbol(SemanticType type, std::string_view text) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kSymbol;
  n->type = type;
  n->symbol = normalize_symbol(text);
  n->text = quote_symbol_if_needed(n->symbol);
  return Program(std::move(n));
}

Program Program::integer(std::int64_t value) {
  auto n = std::make_shared<Node>();
  n->kind = NodeKind::kInt;
  n->type = SemanticType::kInt;
  n->value = value;
  n->text = std::to_string(value);
  return Program(std::move(n));
}

Program Program::input() {
  static const Program img = [] {
    auto n = std::make_shared<Node>();
    n->kind = NodeKind::kInput;
    n->type = SemanticType::kImg;
    n->primitive = &input_variable();
    n->text = "IMG";
    return Program(std::move(n));
  }();
  return img;
}

bool Program::operator==(const Program& other) const {
  if (node_ == other.node_) return true;
  if (!node_ || !other.node_) return false;
  const Node& a = *node_;
  const Node& b = *other.node_;
  if (a.kind != b.kind || a.type != b.type) return false;
  switch (a.kind) {
    case NodeKind::kInput: return true;
    case NodeKind::kInt: return a.value == b.value;
    case NodeKind::kSymbol: return a.symbol == b.symbol;
    case NodeKind::kApply:
      if (a.primitive->name != b.primitive->name) return false;
      return a.children == b.children;
  }
  return false;
}

std::size_t program_size(const Program& p) {
  std::size_t n = 1;
  for (const auto& c : p.children()) n += program_size(c);
  return n;
}

// --- parsing ---------------------------------------------------------------

namespace {

enum class Tok { kOpen, kClose, kAtom, kQuoted, kEnd };

struct Token {
  Tok kind;
  std::string text;
  std::size_t offset;
};

class Lexer {
 public:
  explicit Lexer(std::string_view s) : s_(s) {}

  Token next() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (pos_ >= s_.size()) return {Tok::kEnd, "", s_.size()};
    const std::size_t start = pos_;
    const char c = s_[pos_];
    if (c == '(') {
      ++pos_;
      return {Tok::kOpen, "(", start};
    }
    if (c == ')') {
      ++pos_;
      return {Tok::kClose, ")", start};
    }
    if (c == '"') {
      ++pos_;
      std::string out;
      while (pos_ < s_.size() && s_[pos_] != '"') {
        if (s_[pos_] == '\\') {
          ++pos_;
          if (pos_ >= s_.size()) break;
        }
        out += s_[pos_++];
      }
      if (pos_ >= s_.size()) throw ParseError("unterminated quoted symbol", s_.size());
      ++pos_;
      return {Tok::kQuoted, out, start};
    }
    while (pos_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[pos_])) &&
           s_[pos_] != '(' && s_[pos_] != ')' && s_[pos_] != '"') {
      ++pos_;
    }
    return {Tok::kAtom, std::string(s_.substr(start, pos_ - start)), start};
  }

  Token peek() {
    const std::size_t save = pos_;
    Token t = next();
    pos_ = save;
    return t;
  }

 private:
  std::string_view s_;
  std::size_t pos_ = 0;
};

class Parser {
 public:
  Parser(std::string_view text, const Catalog& catalog) : lex_(text), catalog_(catalog) {}

  Program parse() {
    Program p = expr(SemanticType::kBool, /*at_root=*/true);
    Token t = lex_.next();
    if (t.kind != Tok::kEnd) {
      throw ParseError(t.kind == Tok::kClose ? "unbalanced ')'" : "trailing input", t.offset);
    }
    return p;
  }

 private:
  const Primitive* lookup(std::string_view name) const {
    for (const auto* p : catalog_) {
      if (p->name == name) return p;
    }
    return nullptr;
  }

  Program expr(SemanticType expected, bool at_root) {
    Token t = lex_.next();
    switch (t.kind) {
      case Tok::kEnd: throw ParseError("unexpected end of input", t.offset);
      case Tok::kClose: throw ParseError("unexpected ')'", t.offset);
      case Tok::kOpen: return application(t.offset);
      case Tok::kQuoted:
        if (at_root || !is_symbol_type(expected)) {
          throw ParseError("symbol '" + t.text + "' where " +
                               std::string(type_name(expected)) + " is expected",
                           t.offset);
        }
        return Program::symbol(expected, t.text);
      case Tok::kAtom: return atom(t, expected, at_root);
    }
    throw ParseError("unreachable", t.offset);
  }

  Program atom(const Token& t, SemanticType expected, bool at_root) {
    if (t.text == "IMG") return Program::input();
    if (looks_like_integer(t.text)) {
      std::int64_t v = 0;
      auto [ptr, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
      if (ec != std::errc()) throw ParseError("integer out of range", t.offset);
      return Program::integer(v);
    }
    if (const Primitive* p = lookup(t.text); p && p->kind == PrimitiveKind::kConstant) {
      return Program::integer(p->constant_value);
    }
    if (at_root || !is_symbol_type(expected)) {
      if (lookup(t.text)) {
        throw ParseError("primitive '" + t.text + "' used without parentheses", t.offset);
      }
      throw ParseError("symbol '" + t.text + "' where " + std::string(type_name(expected)) +
                           " is expected",
                       t.offset);
    }
    return Program::symbol(expected, t.text);
  }

  Program application(std::size_t open_offset) {
    Token head = lex_.next();
    if (head.kind == Tok::kEnd) throw ParseError("unexpected end of input", head.offset);
    if (head.kind != Tok::kAtom) throw ParseError("expected primitive name", head.offset);
    const Primitive* prim = lookup(head.text);
    if (!prim || prim->kind == PrimitiveKind::kConstant) {
      throw ParseError("unknown primitive '" + head.text + "'", head.offset);
    }
    std::vector<Program> children;
    while (true) {
      Token t = lex_.peek();
      if (t.kind == Tok::kClose) {
        lex_.next();
        break;
      }
      if (t.kind == Tok::kEnd) throw ParseError("unexpected end of input", t.offset);
      if (children.size() >= prim->arity()) {
        throw ParseError("arity mismatch: '" + prim->name + "' takes " +
                             std::to_string(prim->arity()) + " argument(s)",
                         t.offset);
      }
      children.push_back(expr(prim->args[children.size()], false));
    }
    if (children.size() != prim->arity()) {
      throw ParseError("arity mismatch: '" + prim->name + "' takes " +
                           std::to_string(prim->arity()) + " argument(s), got " +
                           std::to_string(children.size()),
                       open_offset);
    }
    return Program::apply(*prim, std::move(children));
  }

  Lexer lex_;
  const Catalog& catalog_;
};

std::optional<TypeReport> check_node(const Program& p, std::vector<std::size_t>& path) {
  const Node& n = p.node();
  if (n.kind != NodeKind::kApply) return std::nullopt;
  const Primitive& prim = *n.primitive;
  if (n.children.size() != prim.arity()) {
    return TypeReport{false, path,
                      prim.name + " expects " + std::to_string(prim.arity()) +
                          " argument(s), has " + std::to_string(n.children.size())};
  }
  for (std::size_t i = 0; i < n.children.size(); ++i) {
    path.push_back(i);
    const auto& child = n.children[i];
    if (child.type() != prim.args[i]) {
      return TypeReport{false, path,
                        "argument " + std::to_string(i) + " of " + prim.name + " must be " +
                            std::string(type_name(prim.args[i])) + ", got " +
                            std::string(type_name(child.type()))};
    }
    if (auto r = check_node(child, path)) return r;
    path.pop_back();
  }
  return std::nullopt;
}

}  // namespace

Program parse_program(std::string_view text, const Catalog& catalog) {
  return Parser(text, catalog).parse();
}

std::string TypeReport::path_string() const {
  std::string out = "root";
  for (auto i : path) out += "/" + std::to_string(i);
  return out;
}

TypeReport typecheck(const Program& program) {
  if (!program) return {false, {}, "empty program"};
  std::vector<std::size_t> path;
  if (auto r = check_node(program, path)) return *r;
  if (program.type() != SemanticType::kBool) {
    return {false, {}, "root must be BOOL, got " + std::string(type_name(program.type()))};
  }
  return {};
}

}  // namespace vlp
