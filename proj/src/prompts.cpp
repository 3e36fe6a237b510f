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

#include "vlp/prompts.hpp"

#include <filesystem>

#include "vlp/error.hpp"
#include "vlp/task.hpp"

namespace vlp {
namespace {

constexpr const char* kGroundObjectsText =
    R"(You are analyzing images to identify notable objects. Focus on clearly identifiable, semantically meaningful objects that appear across the image set, especially those present in some images but not others. Objects include persons, animals, and things. Avoid minor details like shadows or textures. Use specific, descriptive names (e.g., "bicycle" not "vehicle"). Return exactly {n} objects in a Python list.

Answer format:
```python
objects = [...]
```
No comments or explanations. If no objects found, return [].)";

constexpr const char* kGroundPropertiesText = R"(# Property Discovery Task

You are analyzing a set of images to identify important properties that describe objects in the image set.

## Objective

Discover **notable properties** that characterize objects in the images. Focus on properties that meaningfully distinguish or describe objects (visual attributes, spatial relationships, geometric features, states).

## Instructions

1. **Examine all images carefully** - Look for properties that apply to the relevant objects across the image set
2. **Identify important properties** - Focus on significant, clearly observable properties that meaningfully describe objects
3. **Consider property variation** - Properties that vary across images or objects may be particularly noteworthy
4. **Prioritize meaningful properties** - Choose properties that help distinguish or characterize objects (e.g., color, size, position, orientation, state)
5. **Return exactly {n} properties** - If fewer notable properties exist, return as many as available
6. **Use descriptive names** - Name properties clearly and specifically (e.g., "red" rather than "colored", "horizontal" rather than "oriented")

## Relevant Objects
The objects to consider are: {objects}

## Property Categories
- **Visual attributes**: color, texture, pattern, brightness
- **Spatial properties**: position (left/right, top/bottom, center), proximity, distance
- **Geometric attributes**: size, shape, orientation, symmetry
- **States**: filled/outlined, open/closed, active/inactive

## Output Requirements
- Return a Python list assigned to variable `properties`
- Include only the Python code, no explanations or comments
- If no notable properties are found, return an empty list `[]`
- Use clear, specific property names (e.g., "blue", "large", "leftmost", "vertical")
- Be general (e.g., if there's a yellow triangle, use "yellow" not "yellow triangle")

## Example Format
```python
properties = ["red", "large", "horizontal", "outlined", "centered"]
```)";

constexpr const char* kGroundActionsText = R"(# Action Discovery Task

You are analyzing a set of images to identify important actions performed by objects in the image set.

## Objective

Discover **notable actions** that characterize objects in the images. Focus on actions that meaningfully distinguish or describe what objects are doing (movements, behaviors, states of activity).

## Instructions

1. **Examine all images carefully** - Look for actions that apply to the relevant objects across the image set
2. **Identify important actions** - Focus on significant, clearly observable actions that meaningfully describe what objects are doing
3. **Consider action variation** - Actions that vary across images or objects may be particularly noteworthy (contrasting actions)
4. **Prioritize meaningful actions** - Choose actions that help distinguish or characterize object behaviors (e.g., running, jumping, standing, flying)
5. **Return exactly {n} actions** - If fewer notable actions exist, return as many as available
6. **Use descriptive names** - Name actions clearly and specifically (e.g., "running" rather than "moving", "sitting" rather than "positioned")

## Relevant Objects

The objects to consider are: {objects}

## Action Categories

- **Movement actions**: walking, running, jumping, flying, rolling
- **Positional actions**: standing, sitting, lying, hanging
- **Interactive actions**: holding, pushing, pulling, touching
- **State actions**: opening, closing, rotating, tilting

## Output Requirements

- Return a Python list assigned to variable `actions`
- Include only the Python code, no explanations or comments
- If no notable actions are found, return an empty list `[]`
- Use clear, specific action names (e.g., "jumping", "sitting", "rotating", "falling")

## Example Format
```python
actions = ["running", "jumping", "standing", "flying", "sitting"]
```)";

constexpr const char* kGetObjectsText = R"(## Task
Identify objects and their properties from the image using only the provided lists.

**Objects:** {objects}
**Properties:** {properties}

## Rules
1. Only use objects/properties from the provided lists
2. Return empty list if no valid objects found
3. No explanations or additional text

## Output Format
```python
objects = [
    ['object_name', 'property1', 'property2', ...],
    ['object_name', 'property1'],
    ...
]
```

**If no valid objects:** `objects = [[]]`

## Examples

**Example 1**
- Objects: ["car", "person", "tree"]
- Properties: ["red", "tall", "small", "standing"]
- Image: Red car under tall tree with small standing person

```python
objects = [
    ['car', 'red'],
    ['tree', 'tall'],
    ['person', 'standing', 'small']
]
```

**Example 2**
- Objects: ["dog", "ball", "book", "chair"]
- Properties: ["blue", "sitting", "round"]
- Image: Dog sitting by round ball and blue chair

```python
objects = [
    ['dog', 'sitting'],
    ['ball', 'round'],
    ['chair', 'blue']
]
```

**Example 3**
- Objects: ["bicycle", "lamp", "table", "cup"]
- Properties: ["green", "broken", "wooden", "white"]
- Image: Table with laptop and cup

```python
objects = [[]]
```
*Note: Even though 'table' and 'cup' are in the objects list and visible in the image, neither has properties from the provided list, so no valid object-property combinations exist*

**Analyze the image now:**)";

constexpr const char* kGetActionsText = R"(## Task
Identify actions occurring in the image using only the provided lists.

**Actions:** {actions}
**Objects:** {objects}

## Rules
1. Only use actions/objects from the provided lists
2. Only detect actions that are actually happening in the image
3. Do not include actions from the list if they are not occurring in the image
4. If an action involves an object, include the object name
5. Return empty list if no valid actions found
6. No explanations or additional text

## Output Format
```python
actions = [
    ['action_name1'],
    ['action_name2', 'object_name2'],
    ['action_name2', 'object_name1', 'object_name2'],
    ...
]
```

**If no valid actions:** `actions = [[]]`

## Examples

**Example 1**
- Actions: ["running", "jumping", "sitting", "dancing"]
- Objects: ["chair", "ball", "person", "table"]
- Image: Person sitting on chair

```python
actions = [
    ['sitting', 'person', 'chair']
]
```
*Note: 'running', 'jumping', and 'dancing' are in the actions list but not happening in the image, so they're excluded*

**Example 2**
- Actions: ["throwing", "catching", "walking", "reading", "sleeping"]
- Objects: ["ball", "book", "dog", "frisbee"]
- Image: Person throwing a ball while dog is walking

```python
actions = [
    ['throwing', 'person', 'ball'],
    ['walking', 'dog']
]
```
*Note: 'catching', 'reading', and 'sleeping' are in the actions list but not occurring in the image, so they're excluded*

**Example 3**
- Actions: ["swimming", "flying", "cooking"]
- Objects: ["pool", "bird", "kitchen"]
- Image: Person eating at a restaurant

```python
actions = [[]]
```
*Note: Even though actions are happening in the image, none match the provided actions list, so no valid actions exist*

**Analyze the image now:**)";

constexpr const char* kObjectSmallText =
    "Does the image contain any '{obj}' that is relatively small in size compared to the other "
    "objects? Answer with 'YES' or 'NO'.";
constexpr const char* kObjectLargeText =
    "Does the image contain any '{obj}' that is relatively large in size compared to the other "
    "objects? Answer with 'YES' or 'NO'.";
constexpr const char* kObjectWithPropertySmallText =
    "Does the image contain any '{obj}' with the property '{prop}' that is relatively small in "
    "size compared to the other objects? Answer with 'YES' or 'NO'.";
constexpr const char* kObjectWithPropertyLargeText =
    "Does the image contain any '{obj}' with the property '{prop}' that is relatively large in "
    "size compared to the other objects? Answer with 'YES' or 'NO'.";

constexpr PromptId kAllPrompts[] = {
    PromptId::kGroundObjects, PromptId::kGroundProperties,        PromptId::kGroundActions,
    PromptId::kGetObjects,    PromptId::kGetActions,              PromptId::kObjectSmall,
    PromptId::kObjectLarge,   PromptId::kObjectWithPropertySmall, PromptId::kObjectWithPropertyLarge,
};

}  // namespace

std::string_view prompt_file_name(PromptId id) {
  switch (id) {
    case PromptId::kGroundObjects: return "ground_objects";
    case PromptId::kGroundProperties: return "ground_properties";
    case PromptId::kGroundActions: return "ground_actions";
    case PromptId::kGetObjects: return "get_objects";
    case PromptId::kGetActions: return "get_actions";
    case PromptId::kObjectSmall: return "exists_object_small_in_img";
    case PromptId::kObjectLarge: return "exists_object_large_in_img";
    case PromptId::kObjectWithPropertySmall: return "exists_object_with_property_small_in_img";
    case PromptId::kObjectWithPropertyLarge: return "exists_object_with_property_large_in_img";
  }
  return "";
}

PromptId size_prompt_id(std::string_view name) {
  for (PromptId id : {PromptId::kObjectSmall, PromptId::kObjectLarge,
                      PromptId::kObjectWithPropertySmall, PromptId::kObjectWithPropertyLarge}) {
    if (prompt_file_name(id) == name) return id;
  }
  throw ConfigError("unknown size predicate '" + std::string(name) + "'");
}

const std::vector<std::string>& prompt_placeholders() {
  static const std::vector<std::string> names = {"n",   "objects", "properties", "actions",
                                                 "obj", "prop",    "response"};
  return names;
}

PromptSet::PromptSet() {
  templates_[PromptId::kGroundObjects] = kGroundObjectsText;
  templates_[PromptId::kGroundProperties] = kGroundPropertiesText;
  templates_[PromptId::kGroundActions] = kGroundActionsText;
  templates_[PromptId::kGetObjects] = kGetObjectsText;
  templates_[PromptId::kGetActions] = kGetActionsText;
  templates_[PromptId::kObjectSmall] = kObjectSmallText;
  templates_[PromptId::kObjectLarge] = kObjectLargeText;
  templates_[PromptId::kObjectWithPropertySmall] = kObjectWithPropertySmallText;
  templates_[PromptId::kObjectWithPropertyLarge] = kObjectWithPropertyLargeText;
}

PromptSet PromptSet::with_overrides(const std::string& dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw ConfigError("prompt directory not found '" + dir + "'");
  PromptSet set;
  for (PromptId id : kAllPrompts) {
    const fs::path p = fs::path(dir) / (std::string(prompt_file_name(id)) + ".txt");
    if (fs::exists(p)) set.set(id, read_file(p.string()));
  }
  return set;
}

const std::string& PromptSet::text(PromptId id) const { return templates_.at(id); }

void PromptSet::set(PromptId id, std::string text) { templates_[id] = std::move(text); }

std::string render(std::string_view tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  out.reserve(tmpl.size());
  std::size_t i = 0;
  while (i < tmpl.size()) {
    if (tmpl[i] == '{') {
      const auto close = tmpl.find('}', i + 1);
      if (close != std::string_view::npos) {
        const std::string name(tmpl.substr(i + 1, close - i - 1));
        if (auto it = values.find(name); it != values.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += tmpl[i++];
  }
  return out;
}

std::string format_symbol_list(const std::vector<std::string>& symbols) {
  std::string out = "[";
  for (std::size_t i = 0; i < symbols.size(); ++i) {
    if (i) out += ", ";
    out += '"';
    for (char c : symbols[i]) {
      if (c == '"' || c == '\\') out += '\\';
      out += c;
    }
    out += '"';
  }
  return out + "]";
}

}  // namespace vlp
