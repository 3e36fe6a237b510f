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

#include "vlp/scene.hpp"

#include "vlp/dsl.hpp"

namespace vlp {

Scene::Scene(std::vector<Row> rows) {
  for (auto& row : rows) {
    Row clean;
    clean.reserve(row.size());
    for (const auto& s : row) {
      auto n = normalize_symbol(s);
      if (!n.empty()) clean.push_back(std::move(n));
    }
    if (!clean.empty()) rows_.push_back(std::move(clean));
  }
  if (rows_.empty()) rows_.push_back(Row{});
}

std::string Scene::to_python() const {
  std::string out = "[";
  for (std::size_t r = 0; r < rows_.size(); ++r) {
    if (r) out += ", ";
    out += '[';
    for (std::size_t i = 0; i < rows_[r].size(); ++i) {
      if (i) out += ", ";
      out += '\'';
      for (char c : rows_[r][i]) {
        if (c == '\'' || c == '\\') out += '\\';
        out += c;
      }
      out += '\'';
    }
    out += ']';
  }
  out += ']';
  return out;
}

std::string size_answer_key(const std::string& predicate, const std::vector<std::string>& args) {
  std::string key = predicate + "(";
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (i) key += ", ";
    key += args[i];
  }
  key += ")";
  return key;
}

void SceneCache::put(const std::string& image_digest, ImageScenes scenes) {
  entries_[image_digest] = std::move(scenes);
}

const ImageScenes* SceneCache::find(const std::string& image_digest) const {
  auto it = entries_.find(image_digest);
  return it == entries_.end() ? nullptr : &it->second;
}

}  // namespace vlp
