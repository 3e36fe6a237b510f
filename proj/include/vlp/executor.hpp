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

#ifndef VLP_EXECUTOR_HPP_
#define VLP_EXECUTOR_HPP_

#include <cstdint>
#include <string>
#include <variant>

#include "vlp/program.hpp"
#include "vlp/scene.hpp"

namespace vlp {

/// Runtime value of a node. Its alternative always matches the node type:
/// BOOL -> bool, INT -> int64, scenes -> Scene pointer, symbols -> string
/// pointer, IMG -> monostate.
using Value = std::variant<std::monostate, bool, std::int64_t, const Scene*, const std::string*>;

/// Evaluates any well-typed subprogram on one image. Throws EvalError when an
/// enabled size predicate has no cached answer.
Value evaluate_value(const Program& program, const ImageScenes& image);

/// Evaluates a BOOL program on one image.
bool evaluate(const Program& program, const ImageScenes& image);
bool evaluate(const Program& program, const Scene& objects, const Scene& actions);

namespace semantics {

bool exists_object(const Scene& s, const std::string& object);
bool exists_property(const Scene& s, const std::string& property);
bool exists_object_with_property(const Scene& s, const std::string& object,
                                 const std::string& property);
bool exists_properties(const Scene& s, const std::string& p1, const std::string& p2);
bool exists_object_with_properties(const Scene& s, const std::string& object,
                                   const std::string& p1, const std::string& p2);
bool exists_action(const Scene& s, const std::string& action);
bool exists_action_with_object(const Scene& s, const std::string& action,
                               const std::string& object);
std::int64_t count_object_in_img(const Scene& s, const std::string& object);
std::int64_t count_objects_with_property(const Scene& s, const std::string& property);
std::int64_t count_all_objects(const Scene& s);
std::int64_t max_objects_of_same_type(const Scene& s);

}  // namespace semantics

}  // namespace vlp

#endif  // VLP_EXECUTOR_HPP_
