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

#include "vlp/executor.hpp"

#include <algorithm>
#include <map>

#include "vlp/error.hpp"

namespace vlp {
namespace semantics {
namespace {

bool tail_has(const Row& row, const std::string& s) {
  return std::find(row.begin() + 1, row.end(), s) != row.end();
}

template <typename Pred>
bool any_row(const Scene& s, Pred pred) {
  if (s.empty()) return false;
  return std::any_of(s.rows().begin(), s.rows().end(), pred);
}

template <typename Pred>
std::int64_t count_rows(const Scene& s, Pred pred) {
  if (s.empty()) return 0;
  return std::count_if(s.rows().begin(), s.rows().end(), pred);
}

}  // namespace

bool exists_object(const Scene& s, const std::string& o) {
  return any_row(s, [&](const Row& r) { return r.front() == o; });
}

bool exists_property(const Scene& s, const std::string& p) {
  return any_row(s, [&](const Row& r) { return tail_has(r, p); });
}

bool exists_object_with_property(const Scene& s, const std::string& o, const std::string& p) {
  return any_row(s, [&](const Row& r) { return r.front() == o && tail_has(r, p); });
}

bool exists_properties(const Scene& s, const std::string& p1, const std::string& p2) {
  return any_row(s, [&](const Row& r) { return tail_has(r, p1) && tail_has(r, p2); });
}

bool exists_object_with_properties(const Scene& s, const std::string& o, const std::string& p1,
                                   const std::string& p2) {
  return any_row(
      s, [&](const Row& r) { return r.front() == o && tail_has(r, p1) && tail_has(r, p2); });
}

bool exists_action(const Scene& s, const std::string& a) { return exists_object(s, a); }

bool exists_action_with_object(const Scene& s, const std::string& a, const std::string& o) {
  return exists_object_with_property(s, a, o);
}

std::int64_t count_object_in_img(const Scene& s, const std::string& o) {
  return count_rows(s, [&](const Row& r) { return r.front() == o; });
}

std::int64_t count_objects_with_property(const Scene& s, const std::string& p) {
  return count_rows(s, [&](const Row& r) { return tail_has(r, p); });
}

std::int64_t count_all_objects(const Scene& s) { return static_cast<std::int64_t>(s.size()); }

std::int64_t max_objects_of_same_type(const Scene& s) {
  if (s.empty()) return 0;
  std::map<std::string_view, std::int64_t> counts;
  std::int64_t best = 0;
  for (const auto& r : s.rows()) best = std::max(best, ++counts[r.front()]);
  return best;
}

}  // namespace semantics

namespace {

class Evaluator {
 public:
  explicit Evaluator(const ImageScenes& image) : image_(image) {}

  bool boolean(const Program& p) { return std::get<bool>(value(p)); }
  std::int64_t integer(const Program& p) { return std::get<std::int64_t>(value(p)); }
  const Scene& scene(const Program& p) { return *std::get<const Scene*>(value(p)); }
  const std::string& sym(const Program& p) { return *std::get<const std::string*>(value(p)); }

  Value value(const Program& p) {
    const Node& n = p.node();
    switch (n.kind) {
      case NodeKind::kInput: return std::monostate{};
      case NodeKind::kInt: return n.value;
      case NodeKind::kSymbol: return &n.symbol;
      case NodeKind::kApply: break;
    }
    const auto& c = n.children;
    namespace sem = semantics;
    switch (n.primitive->op) {
      case Op::kGetObjects: return &image_.objects;
      case Op::kGetActions: return &image_.actions;
      case Op::kExistsObject: return sem::exists_object(scene(c[0]), sym(c[1]));
      case Op::kExistsObjectWithProperty:
        return sem::exists_object_with_property(scene(c[0]), sym(c[1]), sym(c[2]));
      case Op::kExistsProperty: return sem::exists_property(scene(c[0]), sym(c[1]));
      case Op::kExistsAction: return sem::exists_action(scene(c[0]), sym(c[1]));
      case Op::kExistsActionWithObject:
        return sem::exists_action_with_object(scene(c[0]), sym(c[1]), sym(c[2]));
      case Op::kExistsProperties:
        return sem::exists_properties(scene(c[0]), sym(c[1]), sym(c[2]));
      case Op::kExistsObjectWithProperties:
        return sem::exists_object_with_properties(scene(c[0]), sym(c[1]), sym(c[2]),
                                                  sym(c[3]));
      case Op::kCountObjectInImg: return sem::count_object_in_img(scene(c[0]), sym(c[1]));
      case Op::kCountObjectsWithProperty:
        return sem::count_objects_with_property(scene(c[0]), sym(c[1]));
      case Op::kMaxObjectsOfSameType: return sem::max_objects_of_same_type(scene(c[0]));
      case Op::kCountAllObjects: return sem::count_all_objects(scene(c[0]));
      case Op::kAnd: return boolean(c[0]) && boolean(c[1]);
      case Op::kOr: return boolean(c[0]) || boolean(c[1]);
      case Op::kNot: return !boolean(c[0]);
      case Op::kXor: return boolean(c[0]) != boolean(c[1]);
      case Op::kGt: return integer(c[0]) > integer(c[1]);
      case Op::kEq: return integer(c[0]) == integer(c[1]);
      case Op::kConstant: return n.primitive->constant_value;
      case Op::kInput: return std::monostate{};
      case Op::kObjectSmall:
      case Op::kObjectLarge:
      case Op::kObjectWithPropertySmall:
      case Op::kObjectWithPropertyLarge: return size_answer(n);
    }
    throw EvalError("unhandled primitive " + n.primitive->name);
  }

 private:
  bool size_answer(const Node& n) {
    std::vector<std::string> args;
    for (std::size_t i = 1; i < n.children.size(); ++i) args.push_back(sym(n.children[i]));
    const auto key = size_answer_key(n.primitive->name, args);
    auto it = image_.size_answers.find(key);
    if (it == image_.size_answers.end()) throw EvalError("no cached answer for " + key);
    return it->second;
  }

  const ImageScenes& image_;
};

}  // namespace

Value evaluate_value(const Program& program, const ImageScenes& image) {
  try {
    return Evaluator(image).value(program);
  } catch (const std::bad_variant_access&) {
    throw EvalError("ill-typed program: " + program.text());
  }
}

bool evaluate(const Program& program, const ImageScenes& image) {
  auto v = evaluate_value(program, image);
  if (!std::holds_alternative<bool>(v)) throw EvalError("program is not BOOL-valued");
  return std::get<bool>(v);
}

bool evaluate(const Program& program, const Scene& objects, const Scene& actions) {
  ImageScenes image{objects, actions, {}};
  return evaluate(program, image);
}

}  // namespace vlp
