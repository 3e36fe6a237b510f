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

#include "vlp/task.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "vlp/error.hpp"
#include "vlp/executor.hpp"

namespace vlp {

namespace fs = std::filesystem;

std::string sha256_hex(std::string_view bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr);
  static const char* hex = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 0xf];
  }
  return out;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestionError("cannot read file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace {

std::vector<LabeledImage> read_split(const nlohmann::json& doc, const char* field,
                                     const fs::path& base) {
  std::vector<LabeledImage> out;
  if (!doc.contains(field)) {
    if (std::string(field) == "query") return out;
    throw IngestionError(std::string("missing field '") + field + "'");
  }
  const auto& arr = doc.at(field);
  if (!arr.is_array()) throw IngestionError(std::string("field '") + field + "' must be a list");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = std::string(field) + "[" + std::to_string(i) + "]";
    const auto& e = arr[i];
    if (!e.is_object() || !e.contains("image") || !e.at("image").is_string()) {
      throw IngestionError(where + ".image: missing image path");
    }
    if (!e.contains("label") || !e.at("label").is_number_integer()) {
      throw IngestionError(where + ".label: label must be 0 or 1");
    }
    const auto label = e.at("label").get<long long>();
    if (label != 0 && label != 1) throw IngestionError(where + ".label: label must be 0 or 1");
    LabeledImage img;
    img.image = e.at("image").get<std::string>();
    img.label = label == 1;
    const fs::path p = fs::path(img.image).is_absolute() ? fs::path(img.image) : base / img.image;
    img.resolved_path = p.lexically_normal().string();
    if (!fs::exists(p)) {
      throw IngestionError(where + ".image: file not found '" + img.resolved_path + "'");
    }
    img.digest = sha256_hex(read_file(img.resolved_path));
    out.push_back(std::move(img));
  }
  return out;
}

}  // namespace

void validate_task(const Task& task) {
  if (task.few_shot.empty()) throw IngestionError("few_shot: must not be empty");
  const auto pos = std::count_if(task.few_shot.begin(), task.few_shot.end(),
                                 [](const LabeledImage& i) { return i.label; });
  if (pos == 0) throw IngestionError("few_shot: needs at least one positive example");
  if (pos == static_cast<long>(task.few_shot.size())) {
    throw IngestionError("few_shot: needs at least one negative example");
  }
  std::map<std::string, std::string> few;
  for (const auto& i : task.few_shot) few.emplace(i.digest, i.image);
  for (std::size_t q = 0; q < task.query.size(); ++q) {
    auto it = few.find(task.query[q].digest);
    if (it != few.end()) {
      throw IngestionError("query[" + std::to_string(q) + "].image: same image as few-shot '" +
                           it->second + "'");
    }
  }
}

Task load_task(const std::string& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw IngestionError("task file '" + path + "' is not valid JSON: " + e.what());
  }
  if (!doc.is_object()) throw IngestionError("task file must hold a JSON object");
  Task task;
  if (!doc.contains("task_id") || !doc.at("task_id").is_string()) {
    throw IngestionError("task_id: missing or not a string");
  }
  task.task_id = doc.at("task_id").get<std::string>();
  if (doc.contains("profile")) {
    if (!doc.at("profile").is_string()) throw IngestionError("profile: must be a string");
    task.profile = doc.at("profile").get<std::string>();
    const auto& known = known_profiles();
    if (std::find(known.begin(), known.end(), task.profile) == known.end()) {
      throw IngestionError("profile: unknown dataset profile '" + task.profile + "'");
    }
  }
  const fs::path base = fs::path(path).parent_path();
  task.few_shot = read_split(doc, "few_shot", base);
  task.query = read_split(doc, "query", base);
  validate_task(task);
  return task;
}

void save_task(const Task& task, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["task_id"] = task.task_id;
  doc["profile"] = task.profile;
  auto split = [](const std::vector<LabeledImage>& v) {
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& i : v) arr.push_back({{"image", i.image}, {"label", i.label ? 1 : 0}});
    return arr;
  };
  doc["few_shot"] = split(task.few_shot);
  doc["query"] = split(task.query);
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write task file '" + path + "'");
  out << doc.dump(2) << "\n";
}

EvalReport score_predictions(const std::vector<bool>& predictions,
                             const std::vector<bool>& labels) {
  EvalReport r;
  r.predictions.assign(predictions.begin(), predictions.end());
  std::size_t tp = 0;
  std::size_t tn = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      ++r.n_pos;
      tp += predictions[i] ? 1 : 0;
    } else {
      ++r.n_neg;
      tn += predictions[i] ? 0 : 1;
    }
  }
  if (r.n_pos) r.true_positive_rate = static_cast<double>(tp) / r.n_pos;
  if (r.n_neg) r.true_negative_rate = static_cast<double>(tn) / r.n_neg;
  if (r.n_pos && r.n_neg) {
    r.balanced_accuracy = (r.true_positive_rate + r.true_negative_rate) / 2.0;
  } else if (r.n_pos) {
    r.balanced_accuracy = r.true_positive_rate;
  } else if (r.n_neg) {
    r.balanced_accuracy = r.true_negative_rate;
  }
  if (!labels.empty()) r.accuracy = static_cast<double>(tp + tn) / labels.size();
  return r;
}

EvalReport evaluate_on_queries(const Program& program, const Task& task,
                               const SceneCache& scenes) {
  std::vector<bool> preds;
  std::vector<bool> labels;
  std::vector<std::string> failed;
  for (const auto& q : task.query) {
    labels.push_back(q.label);
    const ImageScenes* s = scenes.find(q.digest);
    bool pred = !q.label;  // counted as misclassified on failure
    if (!s) {
      failed.push_back(q.image);
    } else {
      try {
        pred = evaluate(program, *s);
      } catch (const EvalError&) {
        failed.push_back(q.image);
      }
    }
    preds.push_back(pred);
  }
  auto r = score_predictions(preds, labels);
  r.failed_images = std::move(failed);
  return r;
}

std::string eval_report_to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["predictions"] = r.predictions;
  j["failed_images"] = r.failed_images;
  j["n_pos"] = r.n_pos;
  j["n_neg"] = r.n_neg;
  j["true_positive_rate"] = r.true_positive_rate;
  j["true_negative_rate"] = r.true_negative_rate;
  j["balanced_accuracy"] = r.balanced_accuracy;
  j["accuracy"] = r.accuracy;
  return j.dump(2) + "\n";
}

EvalReport eval_report_from_json(std::string_view text) {
  EvalReport r;
  try {
    const auto j = nlohmann::json::parse(text);
    r.predictions = j.at("predictions").get<std::vector<bool>>();
    r.failed_images = j.at("failed_images").get<std::vector<std::string>>();
    r.n_pos = j.at("n_pos").get<std::size_t>();
    r.n_neg = j.at("n_neg").get<std::size_t>();
    r.true_positive_rate = j.at("true_positive_rate").get<double>();
    r.true_negative_rate = j.at("true_negative_rate").get<double>();
    r.balanced_accuracy = j.at("balanced_accuracy").get<double>();
    r.accuracy = j.at("accuracy").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed eval report: ") + e.what());
  }
  return r;
}

}  // namespace vlp
