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

#include "vlp/dsl.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "vlp/error.hpp"

namespace vlp {
namespace {

using T = SemanticType;

std::vector<Primitive> make_table(bool strict) {
  const T obj_scene = strict ? T::kObjectScene : T::kScene;
  const T act_scene = strict ? T::kActionScene : T::kScene;
  const auto vlm = PrimitiveKind::kVlmFunction;
  const auto sym = PrimitiveKind::kSymbolicFunction;
  const auto opr = PrimitiveKind::kOperator;

  std::vector<Primitive> t = {
      {"get_objects", vlm, Op::kGetObjects, {T::kImg}, obj_scene},
      {"get_actions", vlm, Op::kGetActions, {T::kImg}, act_scene},
      {"exists_object", sym, Op::kExistsObject, {obj_scene, T::kObject}, T::kBool},
      {"exists_object_with_property", sym, Op::kExistsObjectWithProperty,
       {obj_scene, T::kObject, T::kProperty}, T::kBool},
      {"exists_property", sym, Op::kExistsProperty, {obj_scene, T::kProperty}, T::kBool},
      {"exists_action", sym, Op::kExistsAction, {act_scene, T::kAction}, T::kBool},
      {"exists_action_with_object", sym, Op::kExistsActionWithObject,
       {act_scene, T::kAction, T::kObject}, T::kBool},
      {"and", opr, Op::kAnd, {T::kBool, T::kBool}, T::kBool},
      {"or", opr, Op::kOr, {T::kBool, T::kBool}, T::kBool},
      {"not", opr, Op::kNot, {T::kBool}, T::kBool},
      {"exists_properties", sym, Op::kExistsProperties,
       {obj_scene, T::kProperty, T::kProperty}, T::kBool},
      {"exists_object_with_properties", sym, Op::kExistsObjectWithProperties,
       {obj_scene, T::kObject, T::kProperty, T::kProperty}, T::kBool},
      {"count_object_in_img", sym, Op::kCountObjectInImg, {obj_scene, T::kObject}, T::kInt},
      {"count_objects_with_property", sym, Op::kCountObjectsWithProperty,
       {obj_scene, T::kProperty}, T::kInt},
      {"max_objects_of_same_type", sym, Op::kMaxObjectsOfSameType, {obj_scene}, T::kInt},
      {"count_all_objects", sym, Op::kCountAllObjects, {obj_scene}, T::kInt},
      {"xor", opr, Op::kXor, {T::kBool, T::kBool}, T::kBool},
      {"gt?", opr, Op::kGt, {T::kInt, T::kInt}, T::kBool},
      {"eq?", opr, Op::kEq, {T::kInt, T::kInt}, T::kBool},
  };
  for (std::int64_t v = 0; v <= 6; ++v) {
    t.push_back({std::to_string(v), PrimitiveKind::kConstant, Op::kConstant, {}, T::kInt, v});
  }
  t.push_back({"exists_object_small_in_img", vlm, Op::kObjectSmall, {T::kImg, T::kObject},
               T::kBool});
  t.push_back({"exists_object_large_in_img", vlm, Op::kObjectLarge, {T::kImg, T::kObject},
               T::kBool});
  t.push_back({"exists_object_with_property_small_in_img", vlm, Op::kObjectWithPropertySmall,
               {T::kImg, T::kObject, T::kProperty}, T::kBool});
  t.push_back({"exists_object_with_property_large_in_img", vlm, Op::kObjectWithPropertyLarge,
               {T::kImg, T::kObject, T::kProperty}, T::kBool});
  return t;
}

const std::vector<Primitive>& table(bool strict) {
  static const std::vector<Primitive> loose = make_table(false);
  static const std::vector<Primitive> tight = make_table(true);
  return strict ? tight : loose;
}

Catalog pointers(bool strict) {
  Catalog out;
  for (const auto& p : table(strict)) out.push_back(&p);
  return out;
}

const std::vector<std::string> kHoi = {
    "get_objects",   "get_actions",
    "exists_object", "exists_object_with_property",
    "exists_property", "exists_action",
    "exists_action_with_object", "and",
    "or",            "not"};
const std::vector<std::string> kOwExtra = {"exists_properties", "exists_object_with_properties"};
const std::vector<std::string> kCountingExtra = {
    "count_object_in_img", "count_objects_with_property", "max_objects_of_same_type",
    "count_all_objects",   "xor",
    "gt?",                 "eq?",
    "0", "1", "2", "3", "4", "5", "6"};
const std::vector<std::string> kActionPrimitives = {"get_actions", "exists_action",
                                                    "exists_action_with_object"};

std::set<std::string> profile_names(std::string_view profile) {
  std::set<std::string> names;
  auto add = [&](const std::vector<std::string>& v) { names.insert(v.begin(), v.end()); };
  if (profile == "bongard-hoi") {
    add(kHoi);
  } else if (profile == "bongard-ow") {
    add(kHoi);
    add(kOwExtra);
  } else if (profile == "bongard-rwr") {
    add(kHoi);
    add(kOwExtra);
    add(kCountingExtra);
  } else if (profile == "cocologic") {
    add(kHoi);
    add(kCountingExtra);
  } else if (profile == "clevr-hans3") {
    add(kHoi);
    add(kOwExtra);
    for (const auto& a : kActionPrimitives) names.erase(a);
  } else if (profile != "custom") {
    throw ConfigError("unknown dataset profile '" + std::string(profile) + "'");
  }
  return names;
}

std::string valid_names_list(bool strict) {
  std::string out;
  for (const auto* p : full_catalog(strict)) {
    if (!out.empty()) out += ", ";
    out += p->name;
  }
  return out;
}

}  // namespace

std::string_view type_name(SemanticType t) {
  switch (t) {
    case T::kImg: return "IMG";
    case T::kBool: return "BOOL";
    case T::kInt: return "INT";
    case T::kObject: return "OBJECT";
    case T::kProperty: return "PROPERTY";
    case T::kAction: return "ACTION";
    case T::kScene: return "SCENE";
    case T::kObjectScene: return "OBJ_SCENE";
    case T::kActionScene: return "ACT_SCENE";
  }
  return "?";
}

std::optional<SemanticType> parse_type_name(std::string_view name) {
  for (auto t : {T::kImg, T::kBool, T::kInt, T::kObject, T::kProperty, T::kAction, T::kScene,
                 T::kObjectScene, T::kActionScene}) {
    if (type_name(t) == name) return t;
  }
  return std::nullopt;
}

bool is_symbol_type(SemanticType t) {
  return t == T::kObject || t == T::kProperty || t == T::kAction;
}

bool is_scene_type(SemanticType t) {
  return t == T::kScene || t == T::kObjectScene || t == T::kActionScene;
}

SemanticType base_type(SemanticType t) { return is_scene_type(t) ? T::kScene : t; }

std::string_view kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::kVlmFunction: return "vlm_function";
    case PrimitiveKind::kSymbolicFunction: return "symbolic_function";
    case PrimitiveKind::kOperator: return "operator";
    case PrimitiveKind::kConstant: return "constant";
    case PrimitiveKind::kInputVariable: return "input_variable";
  }
  return "?";
}

const Catalog& full_catalog(bool strict_scene_typing) {
  static const Catalog loose = pointers(false);
  static const Catalog tight = pointers(true);
  return strict_scene_typing ? tight : loose;
}

const Primitive& input_variable() {
  static const Primitive img{"IMG", PrimitiveKind::kInputVariable, Op::kInput, {}, T::kImg};
  return img;
}

const Primitive* find_primitive(std::string_view name, bool strict_scene_typing) {
  for (const auto* p : full_catalog(strict_scene_typing)) {
    if (p->name == name) return p;
  }
  return nullptr;
}

Catalog catalog(std::string_view dataset_profile) {
  const auto names = profile_names(dataset_profile);
  Catalog out;
  for (const auto* p : full_catalog(false)) {
    if (names.count(p->name)) out.push_back(p);
  }
  return out;
}

const std::vector<std::string>& known_profiles() {
  static const std::vector<std::string> profiles = {"bongard-hoi", "bongard-ow", "bongard-rwr",
                                                    "cocologic", "clevr-hans3", "custom"};
  return profiles;
}

const std::vector<std::string>& size_predicate_names() {
  static const std::vector<std::string> names = {
      "exists_object_small_in_img", "exists_object_large_in_img",
      "exists_object_with_property_small_in_img", "exists_object_with_property_large_in_img"};
  return names;
}

ProfileDefaults profile_defaults(std::string_view p) {
  if (p == "bongard-hoi") return {10.0, 4, 10, 5, 10};
  if (p == "bongard-ow") return {10.0, 4, 10, 10, 3};
  if (p == "bongard-rwr") return {10.0, 4, 10, 10, 5};
  if (p == "cocologic") return {10.0, 6, 10, 10, 3};
  if (p == "clevr-hans3") return {10.0, 6, 10, 10, 0};
  if (p == "custom") return {10.0, 4, 10, 10, 3};
  throw ConfigError("unknown dataset profile '" + std::string(p) + "'");
}

std::string normalize_symbol(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  std::string out(s.substr(b, e - b));
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool ResolvedDsl::enables(std::string_view name) const {
  return std::any_of(primitives.begin(), primitives.end(),
                     [&](const Primitive* p) { return p->name == name; });
}

ResolvedDsl resolve(const DslConfig& config) {
  std::set<std::string> names;
  if (config.enabled_primitives) {
    profile_names(config.profile);  // still validates the profile id
    for (const auto& n : *config.enabled_primitives) {
      if (!find_primitive(n)) {
        throw ConfigError("unknown primitive '" + n + "'; valid names: " +
                          valid_names_list(false));
      }
      names.insert(n);
    }
  } else {
    names = profile_names(config.profile);
  }
  for (const auto& n : config.extra_perception_predicates) {
    const auto& sizes = size_predicate_names();
    if (std::find(sizes.begin(), sizes.end(), n) == sizes.end()) {
      throw ConfigError("unknown perception predicate '" + n + "'");
    }
    names.insert(n);
  }
  if (config.int_constant_min > config.int_constant_max) {
    throw ConfigError("int_constant_min exceeds int_constant_max");
  }

  ResolvedDsl out;
  out.strict_scene_typing = config.strict_scene_typing;
  bool constants = false;
  for (const auto* p : full_catalog(config.strict_scene_typing)) {
    if (!names.count(p->name)) continue;
    if (p->kind == PrimitiveKind::kConstant) {
      constants = true;
    } else {
      out.primitives.push_back(p);
    }
  }
  if (constants) {
    for (auto v = config.int_constant_min; v <= config.int_constant_max; ++v) {
      out.constants.push_back(v);
    }
  }
  return out;
}

std::string dsl_config_to_json(const DslConfig& c) {
  nlohmann::ordered_json j;
  j["profile"] = c.profile;
  if (c.enabled_primitives) j["enabled_primitives"] = *c.enabled_primitives;
  j["int_constant_min"] = c.int_constant_min;
  j["int_constant_max"] = c.int_constant_max;
  j["removed_symbols"] = c.removed_symbols;
  j["extra_perception_predicates"] = c.extra_perception_predicates;
  j["strict_scene_typing"] = c.strict_scene_typing;
  return j.dump(2) + "\n";
}

DslConfig dsl_config_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed DSL config: ") + e.what());
  }
  if (!j.is_object()) throw ConfigError("DSL config must be a JSON object");
  DslConfig c;
  try {
    c.profile = j.value("profile", std::string("custom"));
    if (j.contains("enabled_primitives")) {
      c.enabled_primitives = j.at("enabled_primitives").get<std::vector<std::string>>();
    }
    c.int_constant_min = j.value("int_constant_min", std::int64_t{0});
    c.int_constant_max = j.value("int_constant_max", std::int64_t{6});
    for (const auto& s : j.value("removed_symbols", std::vector<std::string>{})) {
      c.removed_symbols.insert(normalize_symbol(s));
    }
    for (const auto& s : j.value("extra_perception_predicates", std::vector<std::string>{})) {
      c.extra_perception_predicates.insert(s);
    }
    c.strict_scene_typing = j.value("strict_scene_typing", false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad DSL config field: ") + e.what());
  }
  resolve(c);
  return c;
}

DslConfig load_dsl_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open DSL config '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return dsl_config_from_json(ss.str());
}

void save_dsl_config(const DslConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write DSL config '" + path + "'");
  out << dsl_config_to_json(config);
}

}  // namespace vlp
