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

#ifndef VLP_TASK_HPP_
#define VLP_TASK_HPP_

#include <string>
#include <vector>

#include "vlp/program.hpp"
#include "vlp/scene.hpp"

namespace vlp {

struct LabeledImage {
  /// Path as written in the task file (relative to the task file).
  std::string image;
  /// Absolute or working-directory-relative path used for reading bytes.
  std::string resolved_path;
  /// Lowercase hex SHA-256 of the image bytes; the scene cache key.
  std::string digest;
  bool label = false;

  bool operator==(const LabeledImage&) const = default;
};

/// Few-shot images the rule is induced from plus held-out query images.
struct Task {
  std::string task_id;
  std::string profile = "custom";
  std::vector<LabeledImage> few_shot;
  std::vector<LabeledImage> query;

  bool operator==(const Task&) const = default;
};

/// Reads and validates a task document:
///   {"task_id": ..., "profile": ..., "few_shot": [{"image": path, "label": 0|1}],
///    "query": [...]}
/// Image paths are relative to the task file. Throws IngestionError naming
/// the offending field.
Task load_task(const std::string& path);
void save_task(const Task& task, const std::string& path);

/// Checks split hygiene and label presence. Throws IngestionError.
void validate_task(const Task& task);

struct EvalReport {
  std::vector<bool> predictions;
  /// Query images whose scenes were missing or failed to evaluate; counted
  /// as misclassified.
  std::vector<std::string> failed_images;
  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  double true_positive_rate = 0.0;
  double true_negative_rate = 0.0;
  double balanced_accuracy = 0.0;
  double accuracy = 0.0;
};

/// Mean of the class recalls. If one class is absent, the recall of the
/// present class; zero for empty input.
EvalReport score_predictions(const std::vector<bool>& predictions, const std::vector<bool>& labels);

/// Runs `program` on every query image.
EvalReport evaluate_on_queries(const Program& program, const Task& task, const SceneCache& scenes);

std::string eval_report_to_json(const EvalReport& report);
EvalReport eval_report_from_json(std::string_view text);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);
std::string read_file(const std::string& path);

}  // namespace vlp

#endif  // VLP_TASK_HPP_
