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

#include "vlp/perception.hpp"

#include <mutex>
#include <thread>

#include "vlp/error.hpp"
#include "vlp/log.hpp"

namespace vlp {

using nlohmann::json;

GroundingRequest grounding_request(const Task& task, const ProfileDefaults& counts,
                                   const std::set<std::string>& removed) {
  GroundingRequest r;
  for (const auto& ex : task.few_shot) r.images.push_back({ex.digest, ex.resolved_path});
  r.n_objects = counts.n_objects;
  r.n_properties = counts.n_properties;
  r.n_actions = counts.n_actions;
  r.removed_symbols = removed;
  return r;
}

std::vector<std::string> PrecomputeManifest::missing_few_shot() const {
  std::vector<std::string> out;
  for (const auto& e : entries) {
    if (e.few_shot && !e.complete) out.push_back(e.image);
  }
  return out;
}

Perception::Perception(VlmBackend& backend, VlmEndpointConfig cfg, ResponseCache* cache,
                       PromptSet prompts)
    : backend_(backend), cfg_(std::move(cfg)), cache_(cache), prompts_(std::move(prompts)) {
  cfg_.validate();
}

template <typename Parse>
Perception::Reply Perception::request(const ChatRequest& req, Parse parse) {
  const std::string key = cache_key(req, cfg_);
  if (cache_) {
    if (auto hit = cache_->get(key)) {
      ++hits_;
      return {std::move(*hit), true};
    }
  }
  CachedResponse entry;
  entry.key = key;
  entry.raw_text = backend_.complete(req, cfg_);
  parse(entry);
  entry.timestamp = utc_timestamp();
  entry.model = cfg_.model_name;
  entry.decode_params = decode_params_json(cfg_);
  ++fetched_;
  if (cache_) entry = cache_->put(entry);
  return {std::move(entry), false};
}

namespace {

void parse_flat(CachedResponse& e) {
  auto p = parse_list_response(e.raw_text, ListShape::kFlat);
  e.parse_ok = p.parse_ok;
  e.repaired = p.repaired;
  e.parsed = p.parse_ok ? json(p.items) : json(nullptr);
}

void parse_nested(CachedResponse& e) {
  auto p = parse_list_response(e.raw_text, ListShape::kNested);
  e.parse_ok = p.parse_ok;
  e.repaired = p.repaired;
  e.parsed = json(p.rows);
}

void parse_bool(CachedResponse& e) {
  auto b = parse_yes_no(e.raw_text);
  e.parse_ok = b.has_value();
  e.repaired = false;
  e.parsed = b ? json(*b) : json(nullptr);
}

std::vector<std::string> cleaned(const std::vector<std::string>& in,
                                 const std::set<std::string>& removed) {
  GroundedSymbols g;
  g.objects = in;
  return clean_symbols(g, removed).objects;
}

}  // namespace

std::string grounding_prompt(const PromptSet& prompts, PromptId id, int n,
                             const std::vector<std::string>& objects) {
  return render(prompts.text(id),
                {{"n", std::to_string(n)}, {"objects", format_symbol_list(objects)}});
}

std::string scene_prompt(const PromptSet& prompts, SceneKind kind, const GroundedSymbols& symbols) {
  if (kind == SceneKind::kObjects) {
    return render(prompts.text(PromptId::kGetObjects),
                  {{"objects", format_symbol_list(symbols.objects)},
                   {"properties", format_symbol_list(symbols.properties)}});
  }
  return render(prompts.text(PromptId::kGetActions),
                {{"actions", format_symbol_list(symbols.actions)},
                 {"objects", format_symbol_list(symbols.objects)}});
}

std::string size_prompt(const PromptSet& prompts, const std::string& predicate,
                        const std::vector<std::string>& args) {
  const PromptId id = size_prompt_id(predicate);
  const bool with_property = id == PromptId::kObjectWithPropertySmall ||
                             id == PromptId::kObjectWithPropertyLarge;
  if (args.size() != (with_property ? 2u : 1u)) {
    throw ConfigError("wrong number of arguments for " + predicate);
  }
  std::map<std::string, std::string> values = {{"obj", args[0]}};
  if (with_property) values["prop"] = args[1];
  return render(prompts.text(id), values);
}

std::vector<std::string> Perception::ground_list(const std::string& what,
                                                 const std::string& prompt,
                                                 const std::vector<ImageInput>& images) {
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    const Reply r = request(ChatRequest{prompt, images, attempt}, parse_flat);
    if (r.entry.parse_ok) return r.entry.parsed.get<std::vector<std::string>>();
  }
  log::warn("grounding of " + what + " failed to parse after " +
            std::to_string(cfg_.max_retries + 1) + " attempts; using an empty list");
  return {};
}

GroundedSymbols Perception::ground_symbols(const GroundingRequest& req) {
  if (req.images.empty()) throw ConfigError("grounding needs at least one image");
  if (req.n_objects < 0 || req.n_properties < 0 || req.n_actions < 0) {
    throw ConfigError("symbol counts must be >= 0");
  }
  GroundedSymbols g;
  if (req.n_objects > 0) {
    g.objects = cleaned(
        ground_list("objects",
                    grounding_prompt(prompts_, PromptId::kGroundObjects, req.n_objects, {}),
                    req.images),
        req.removed_symbols);
  }
  if (req.n_properties > 0) {
    g.properties = ground_list(
        "properties",
        grounding_prompt(prompts_, PromptId::kGroundProperties, req.n_properties, g.objects),
        req.images);
  }
  if (req.n_actions > 0) {
    g.actions = ground_list(
        "actions", grounding_prompt(prompts_, PromptId::kGroundActions, req.n_actions, g.objects),
        req.images);
  }
  return clean_symbols(g, req.removed_symbols);
}

SceneResult Perception::extract_scene(const ImageInput& image, SceneKind kind,
                                      const GroundedSymbols& symbols) {
  SceneResult out;
  const auto& needed = kind == SceneKind::kObjects ? symbols.objects : symbols.actions;
  if (needed.empty()) return out;
  const Reply r =
      request(ChatRequest{scene_prompt(prompts_, kind, symbols), {image}, 0}, parse_nested);
  out.requested = true;
  out.from_cache = r.from_cache;
  out.parse_ok = r.entry.parse_ok;
  out.repaired = r.entry.repaired;
  if (r.entry.parse_ok) out.scene = Scene(r.entry.parsed.get<std::vector<Row>>());
  if (!out.parse_ok) log::warn("unparsable scene for image " + image.path + "; using [[]]");
  return out;
}

bool Perception::answer_size_predicate(const ImageInput& image, const std::string& predicate,
                                       const std::vector<std::string>& args) {
  const std::string prompt = size_prompt(prompts_, predicate, args);
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    const Reply r = request(ChatRequest{prompt, {image}, attempt}, parse_bool);
    if (r.entry.parse_ok) return r.entry.parsed.get<bool>();
  }
  log::warn("no YES/NO answer for " + size_answer_key(predicate, args) + " on " + image.path +
            "; treating as NO");
  return false;
}

PrecomputeManifest Perception::precompute_task(const Task& task, const GroundedSymbols& symbols,
                                               const DslConfig& dsl, SceneCache& scenes) {
  const ResolvedDsl resolved = resolve(dsl);
  const bool want_objects = resolved.enables("get_objects");
  const bool want_actions = resolved.enables("get_actions");
  std::vector<std::string> size_preds;
  for (const auto& name : size_predicate_names()) {
    if (resolved.enables(name)) size_preds.push_back(name);
  }

  std::vector<const LabeledImage*> images;
  for (const auto& i : task.few_shot) images.push_back(&i);
  for (const auto& i : task.query) images.push_back(&i);

  PrecomputeManifest m;
  m.entries.resize(images.size());
  const auto hits0 = hits_.load();
  const auto fetched0 = fetched_.load();
  const auto calls0 = backend_.calls();
  std::mutex mu;
  std::atomic<std::size_t> next{0};

  auto work = [&]() {
    for (std::size_t i = next++; i < images.size(); i = next++) {
      const LabeledImage& img = *images[i];
      const ImageInput input{img.digest, img.resolved_path};
      ManifestEntry& e = m.entries[i];
      e.image = img.image;
      e.digest = img.digest;
      e.few_shot = i < task.few_shot.size();
      ImageScenes out;
      bool ok = true;
      try {
        if (want_objects) {
          auto r = extract_scene(input, SceneKind::kObjects, symbols);
          out.objects = std::move(r.scene);
          e.objects_requested = r.requested;
          e.objects_parse_ok = r.parse_ok;
          e.objects_repaired = r.repaired;
        }
        if (want_actions) {
          auto r = extract_scene(input, SceneKind::kActions, symbols);
          out.actions = std::move(r.scene);
          e.actions_requested = r.requested;
          e.actions_parse_ok = r.parse_ok;
          e.actions_repaired = r.repaired;
        }
        for (const auto& pred : size_preds) {
          const bool with_property = pred.find("with_property") != std::string::npos;
          for (const auto& o : symbols.objects) {
            if (!with_property) {
              out.size_answers[size_answer_key(pred, {o})] =
                  answer_size_predicate(input, pred, {o});
              continue;
            }
            for (const auto& p : symbols.properties) {
              out.size_answers[size_answer_key(pred, {o, p})] =
                  answer_size_predicate(input, pred, {o, p});
            }
          }
        }
      } catch (const TransportError& err) {
        ok = false;
        e.errors.push_back(err.what());
      }
      e.size_answers = out.size_answers.size();
      e.complete = ok;
      if (ok) {
        std::lock_guard lock(mu);
        scenes.put(img.digest, std::move(out));
      }
    }
  };
  const int n_threads =
      std::max(1, std::min<int>(cfg_.parallelism, static_cast<int>(images.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();

  for (const auto& e : m.entries) {
    if (!e.complete) {
      ++m.misses;
      log::warn("perception incomplete for " + e.image + ": " +
                (e.errors.empty() ? std::string("unknown error") : e.errors.front()));
      continue;
    }
    if (want_objects) ++m.object_entries;
    if (want_actions) ++m.action_entries;
    m.size_entries += e.size_answers;
    for (auto [requested, parse_ok, repaired] :
         {std::tuple{e.objects_requested, e.objects_parse_ok, e.objects_repaired},
          std::tuple{e.actions_requested, e.actions_parse_ok, e.actions_repaired}}) {
      if (!requested) continue;
      if (parse_ok) ++m.parsed; else ++m.parse_failures;
      if (repaired) ++m.repaired;
    }
  }
  m.hits = hits_.load() - hits0;
  m.fetched = fetched_.load() - fetched0;
  m.network_calls = backend_.calls() - calls0;
  return m;
}

std::string manifest_to_json(const PrecomputeManifest& m) {
  nlohmann::ordered_json j;
  j["hits"] = m.hits;
  j["fetched"] = m.fetched;
  j["network_calls"] = m.network_calls;
  j["misses"] = m.misses;
  j["object_entries"] = m.object_entries;
  j["action_entries"] = m.action_entries;
  j["size_entries"] = m.size_entries;
  j["parsed"] = m.parsed;
  j["repaired"] = m.repaired;
  j["parse_failures"] = m.parse_failures;
  j["images"] = nlohmann::ordered_json::array();
  for (const auto& e : m.entries) {
    j["images"].push_back({{"image", e.image},
                           {"digest", e.digest},
                           {"few_shot", e.few_shot},
                           {"complete", e.complete},
                           {"objects_requested", e.objects_requested},
                           {"objects_parse_ok", e.objects_parse_ok},
                           {"objects_repaired", e.objects_repaired},
                           {"actions_requested", e.actions_requested},
                           {"actions_parse_ok", e.actions_parse_ok},
                           {"actions_repaired", e.actions_repaired},
                           {"size_answers", e.size_answers},
                           {"errors", e.errors}});
  }
  return j.dump(2) + "\n";
}

PrecomputeManifest manifest_from_json(std::string_view text) {
  PrecomputeManifest m;
  try {
    const auto j = json::parse(text);
    m.hits = j.at("hits");
    m.fetched = j.at("fetched");
    m.network_calls = j.at("network_calls");
    m.misses = j.at("misses");
    m.object_entries = j.at("object_entries");
    m.action_entries = j.at("action_entries");
    m.size_entries = j.at("size_entries");
    m.parsed = j.at("parsed");
    m.repaired = j.at("repaired");
    m.parse_failures = j.at("parse_failures");
    for (const auto& i : j.at("images")) {
      ManifestEntry e;
      e.image = i.at("image");
      e.digest = i.at("digest");
      e.few_shot = i.at("few_shot");
      e.complete = i.at("complete");
      e.objects_requested = i.at("objects_requested");
      e.objects_parse_ok = i.at("objects_parse_ok");
      e.objects_repaired = i.at("objects_repaired");
      e.actions_requested = i.at("actions_requested");
      e.actions_parse_ok = i.at("actions_parse_ok");
      e.actions_repaired = i.at("actions_repaired");
      e.size_answers = i.at("size_answers");
      e.errors = i.at("errors").get<std::vector<std::string>>();
      m.entries.push_back(std::move(e));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed manifest: ") + e.what());
  }
  return m;
}

std::string grounded_symbols_to_json(const GroundedSymbols& s) {
  nlohmann::ordered_json j;
  j["objects"] = s.objects;
  j["properties"] = s.properties;
  j["actions"] = s.actions;
  return j.dump(2) + "\n";
}

GroundedSymbols grounded_symbols_from_json(std::string_view text) {
  try {
    const auto j = json::parse(text);
    GroundedSymbols s;
    s.objects = j.value("objects", std::vector<std::string>{});
    s.properties = j.value("properties", std::vector<std::string>{});
    s.actions = j.value("actions", std::vector<std::string>{});
    return clean_symbols(s);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed symbols file: ") + e.what());
  }
}

std::string scene_cache_to_json(const SceneCache& cache) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& [digest, s] : cache.entries()) {
    j[digest] = {{"objects", s.objects.rows()},
                 {"actions", s.actions.rows()},
                 {"size_answers", s.size_answers}};
  }
  return j.dump(2) + "\n";
}

SceneCache scene_cache_from_json(std::string_view text) {
  SceneCache cache;
  try {
    const auto j = json::parse(text);
    for (const auto& [digest, v] : j.items()) {
      ImageScenes s;
      s.objects = Scene(v.at("objects").get<std::vector<Row>>());
      s.actions = Scene(v.at("actions").get<std::vector<Row>>());
      s.size_answers = v.value("size_answers", std::map<std::string, bool>{});
      cache.put(digest, std::move(s));
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("malformed scene cache: ") + e.what());
  }
  return cache;
}

}  // namespace vlp
