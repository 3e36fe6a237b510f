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

#ifndef VLP_SCENE_HPP_
#define VLP_SCENE_HPP_

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace vlp {

using Row = std::vector<std::string>;

/// Nested string list extracted from one image. Objects scenes hold
/// [object, property...] rows; actions scenes hold [action, participant...].
/// The empty scene is exactly one empty row, [[]].
class Scene {
 public:
  /// The empty-scene sentinel.
  Scene() : rows_{Row{}} {}
  /// Lowercases and trims every string, drops empty rows, and collapses an
  /// empty result to the sentinel.
  explicit Scene(std::vector<Row> rows);

  bool empty() const { return rows_.size() == 1 && rows_.front().empty(); }
  /// Raw rows including the sentinel.
  const std::vector<Row>& rows() const { return rows_; }
  /// Number of non-sentinel rows.
  std::size_t size() const { return empty() ? 0 : rows_.size(); }

  /// Python-style list literal, e.g. [['dog', 'brown'], ['cat']].
  std::string to_python() const;

  bool operator==(const Scene&) const = default;

 private:
  std::vector<Row> rows_;
};

/// Key for a cached yes/no size-predicate answer, e.g.
/// "exists_object_with_property_small_in_img(cube, metal)".
std::string size_answer_key(const std::string& predicate, const std::vector<std::string>& args);

/// Everything the executor may read for one image.
struct ImageScenes {
  Scene objects;
  Scene actions;
  std::map<std::string, bool> size_answers;

  bool operator==(const ImageScenes&) const = default;
};

/// Per-image scene cache keyed by image digest. Immutable once search starts.
class SceneCache {
 public:
  void put(const std::string& image_digest, ImageScenes scenes);
  const ImageScenes* find(const std::string& image_digest) const;
  bool contains(const std::string& image_digest) const { return find(image_digest) != nullptr; }
  std::size_t size() const { return entries_.size(); }
  const std::map<std::string, ImageScenes>& entries() const { return entries_; }

 private:
  std::map<std::string, ImageScenes> entries_;
};

}  // namespace vlp

#endif  // VLP_SCENE_HPP_
