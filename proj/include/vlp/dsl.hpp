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

// Type vocabulary and the primitive catalog of the vision-language DSL.
//
// Scene-producing VLM functions (get_objects, get_actions) read a per-image
// cache; symbolic functions query the nested string lists they return; the
// boolean and integer operators compose everything into a BOOL program.

#ifndef VLP_DSL_HPP_
#define VLP_DSL_HPP_

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace vlp {

/// Semantic types. The first seven tags form the closed vocabulary; the two
/// scene refinements only occur when strict scene typing is enabled.
enum class SemanticType : std::uint8_t {
  kImg,
  kBool,
  kInt,
  kObject,
  kProperty,
  kAction,
  kScene,
  kObjectScene,
  kActionScene,
};

inline constexpr SemanticType kBaseTypes[] = {
    SemanticType::kImg,    SemanticType::kBool,     SemanticType::kInt,
    SemanticType::kObject, SemanticType::kProperty, SemanticType::kAction,
    SemanticType::kScene};

std::string_view type_name(SemanticType t);
std::optional<SemanticType> parse_type_name(std::string_view name);

/// OBJECT, PROPERTY or ACTION: types whose productions are grounded symbols.
bool is_symbol_type(SemanticType t);
bool is_scene_type(SemanticType t);
/// Strips the strict-typing refinement (OBJ_SCENE -> SCENE).
SemanticType base_type(SemanticType t);

enum class PrimitiveKind : std::uint8_t {
  kVlmFunction,
  kSymbolicFunction,
  kOperator,
  kConstant,
  kInputVariable,
};

std::string_view kind_name(PrimitiveKind k);

/// Evaluation opcode; one per catalog entry.
enum class Op : std::uint8_t {
  kGetObjects,
  kGetActions,
  kExistsObject,
  kExistsObjectWithProperty,
  kExistsProperty,
  kExistsAction,
  kExistsActionWithObject,
  kAnd,
  kOr,
  kNot,
  kExistsProperties,
  kExistsObjectWithProperties,
  kCountObjectInImg,
  kCountObjectsWithProperty,
  kMaxObjectsOfSameType,
  kCountAllObjects,
  kXor,
  kGt,
  kEq,
  kConstant,
  kInput,
  kObjectSmall,
  kObjectLarge,
  kObjectWithPropertySmall,
  kObjectWithPropertyLarge,
};

struct Primitive {
  std::string name;
  PrimitiveKind kind;
  Op op;
  std::vector<SemanticType> args;
  SemanticType result;
  std::int64_t constant_value = 0;

  std::size_t arity() const { return args.size(); }
};

using Catalog = std::vector<const Primitive*>;

/// Every primitive the engine knows, in canonical order. Pointers are stable
/// for the lifetime of the program.
const Catalog& full_catalog(bool strict_scene_typing = false);

/// The input variable IMG (arity 0, type IMG). Not part of any profile table.
const Primitive& input_variable();

const Primitive* find_primitive(std::string_view name, bool strict_scene_typing = false);

/// Profile catalogs. Throws ConfigError naming an unknown profile.
Catalog catalog(std::string_view dataset_profile);

const std::vector<std::string>& known_profiles();

/// Names of the optional size predicates that can be added to any profile.
const std::vector<std::string>& size_predicate_names();

/// Per-profile search and grounding defaults.
struct ProfileDefaults {
  double time_limit_seconds = 10.0;
  int max_depth = 4;
  int n_objects = 10;
  int n_properties = 10;
  int n_actions = 3;
};

ProfileDefaults profile_defaults(std::string_view dataset_profile);

/// Lowercased, whitespace-trimmed symbol text.
std::string normalize_symbol(std::string_view s);

/// Editable view of the DSL for one run.
struct DslConfig {
  std::string profile = "custom";
  /// When unset the profile catalog is used as-is.
  std::optional<std::vector<std::string>> enabled_primitives;
  std::int64_t int_constant_min = 0;
  std::int64_t int_constant_max = 6;
  std::set<std::string> removed_symbols;
  std::set<std::string> extra_perception_predicates;
  bool strict_scene_typing = false;

  bool operator==(const DslConfig&) const = default;
};

/// The primitives and integer constants a configuration actually enables.
struct ResolvedDsl {
  Catalog primitives;  // no constants; canonical order
  std::vector<std::int64_t> constants;
  bool strict_scene_typing = false;

  bool enables(std::string_view name) const;
};

/// Validates and expands a configuration. Throws ConfigError on unknown
/// profile or primitive names.
ResolvedDsl resolve(const DslConfig& config);

DslConfig load_dsl_config(const std::string& path);
void save_dsl_config(const DslConfig& config, const std::string& path);
std::string dsl_config_to_json(const DslConfig& config);
DslConfig dsl_config_from_json(std::string_view text);

}  // namespace vlp

#endif  // VLP_DSL_HPP_
