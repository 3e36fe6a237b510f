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

// VLM prompt templates. Placeholders are written {name}; render() replaces
// the known ones and leaves any other braces untouched.

#ifndef VLP_PROMPTS_HPP_
#define VLP_PROMPTS_HPP_

#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace vlp {

enum class PromptId {
  kGroundObjects,
  kGroundProperties,
  kGroundActions,
  kGetObjects,
  kGetActions,
  kObjectSmall,
  kObjectLarge,
  kObjectWithPropertySmall,
  kObjectWithPropertyLarge,
};

/// File stem used for overrides, e.g. "ground_objects" -> ground_objects.txt.
std::string_view prompt_file_name(PromptId id);

/// Template for the size predicate `name`; throws ConfigError for other names.
PromptId size_prompt_id(std::string_view predicate_name);

/// The placeholders a template may contain.
const std::vector<std::string>& prompt_placeholders();

class PromptSet {
 public:
  /// Built-in templates.
  PromptSet();
  /// Built-ins, replaced by any <file stem>.txt found in `dir`.
  static PromptSet with_overrides(const std::string& dir);

  const std::string& text(PromptId id) const;
  void set(PromptId id, std::string text);

 private:
  std::map<PromptId, std::string> templates_;
};

/// Substitutes {n}, {objects}, {properties}, {actions}, {obj}, {prop} and
/// {response}; values missing from `values` leave their placeholder as is.
std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values);

/// Symbol list as it appears inside prompts: ["a", "b"].
std::string format_symbol_list(const std::vector<std::string>& symbols);

}  // namespace vlp

#endif  // VLP_PROMPTS_HPP_
