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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include "vlp/vlm.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "vlp/error.hpp"
#include "vlp/log.hpp"
#include "vlp/task.hpp"

namespace vlp {

namespace fs = std::filesystem;

void VlmEndpointConfig::validate() const {
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (!(timeout_seconds > 0.0)) throw ConfigError("request timeout must be positive");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (!greedy && temperature < 0.0) throw ConfigError("temperature must be >= 0");
}

std::string VlmBackend::complete(const ChatRequest& request, const VlmEndpointConfig& cfg) {
  ++calls_;
  return do_complete(request, cfg);
}

namespace {

std::string base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string mime_type(const std::string& path) {
  std::string ext = fs::path(path).extension().string();
  for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  if (ext == ".jpg" || ext == ".jpeg") return "image/jpeg";
  if (ext == ".gif") return "image/gif";
  if (ext == ".webp") return "image/webp";
  return "image/png";
}

struct Endpoint {
  std::string origin;  // scheme://host[:port]
  std::string path;    // prefix without trailing slash
};

Endpoint split_url(const std::string& url) {
  const auto scheme = url.find("://");
  if (scheme == std::string::npos) throw ConfigError("endpoint URL needs a scheme: '" + url + "'");
  const auto slash = url.find('/', scheme + 3);
  Endpoint e;
  e.origin = url.substr(0, slash);
  e.path = slash == std::string::npos ? "" : url.substr(slash);
  while (!e.path.empty() && e.path.back() == '/') e.path.pop_back();
  return e;
}

std::string message_text(const nlohmann::json& body) {
  const auto& content = body.at("choices").at(0).at("message").at("content");
  if (content.is_string()) return content.get<std::string>();
  std::string out;
  for (const auto& part : content) {
    if (part.value("type", "") == "text") out += part.at("text").get<std::string>();
  }
  return out;
}

std::string sha256_of_json(const nlohmann::json& j) { return sha256_hex(j.dump()); }

}  // namespace

nlohmann::json chat_request_body(const ChatRequest& request, const VlmEndpointConfig& cfg) {
  nlohmann::json content = nlohmann::json::array();
  for (const auto& img : request.images) {
    const std::string url = "data:" + mime_type(img.path) + ";base64," + base64(read_file(img.path));
    content.push_back({{"type", "image_url"}, {"image_url", {{"url", url}}}});
  }
  content.push_back({{"type", "text"}, {"text", request.prompt}});
  nlohmann::json body = {
      {"model", cfg.model_name},
      {"messages", nlohmann::json::array({{{"role", "user"}, {"content", content}}})},
      {"temperature", cfg.effective_temperature()},
  };
  if (cfg.seed) body["seed"] = *cfg.seed;
  return body;
}

std::string HttpVlmBackend::do_complete(const ChatRequest& request, const VlmEndpointConfig& cfg) {
  const Endpoint ep = split_url(cfg.base_url);
  std::string payload;
  try {
    payload = chat_request_body(request, cfg).dump();
  } catch (const IngestionError& e) {
    throw TransportError(std::string("cannot attach image: ") + e.what());
  }
  httplib::Headers headers;
  if (const char* key = std::getenv(cfg.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }
  const auto secs = static_cast<time_t>(cfg.timeout_seconds);
  const auto usecs = static_cast<time_t>((cfg.timeout_seconds - static_cast<double>(secs)) * 1e6);

  std::string last_error;
  for (int attempt = 0; attempt <= cfg.max_retries; ++attempt) {
    if (attempt > 0) std::this_thread::sleep_for(std::chrono::milliseconds(100 * attempt));
    httplib::Client cli(ep.origin);
    cli.set_connection_timeout(secs, usecs);
    cli.set_read_timeout(secs, usecs);
    cli.set_write_timeout(secs, usecs);
    auto res = cli.Post(ep.path + "/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "request to " + cfg.base_url + " failed: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw TransportError("authentication failed (HTTP " + std::to_string(res->status) +
                           "); check $" + cfg.api_key_env);
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status) + " from " + cfg.base_url;
      continue;
    }
    if (res->status != 200) {
      throw TransportError("HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 200));
    }
    try {
      return message_text(nlohmann::json::parse(res->body));
    } catch (const nlohmann::json::exception& e) {
      throw TransportError(std::string("malformed chat completion response: ") + e.what());
    }
  }
  throw TransportError(last_error);
}

std::string replay_key(const ChatRequest& request) {
  nlohmann::json j;
  j["images"] = nlohmann::json::array();
  for (const auto& img : request.images) j["images"].push_back(img.digest);
  j["prompt"] = request.prompt;
  return sha256_of_json(j);
}

MockVlmBackend::MockVlmBackend(std::string dir) : dir_(std::move(dir)) {
  if (!fs::is_directory(dir_)) throw ConfigError("mock backend directory not found '" + dir_ + "'");
}

std::string MockVlmBackend::do_complete(const ChatRequest& request, const VlmEndpointConfig&) {
  const std::string key = replay_key(request);
  for (const fs::path& p : {fs::path(dir_) / (key + "." + std::to_string(request.attempt) + ".json"),
                           fs::path(dir_) / (key + ".json")}) {
    if (!fs::exists(p)) continue;
    try {
      return nlohmann::json::parse(read_file(p.string())).at("response").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw TransportError("corrupt mock response " + p.string() + ": " + e.what());
    }
  }
  throw TransportError("mock backend has no response for key " + key);
}

void write_mock_response(const std::string& dir, const ChatRequest& request,
                         const std::string& response) {
  fs::create_directories(dir);
  const std::string key = replay_key(request);
  nlohmann::ordered_json j;
  j["key"] = key;
  j["response"] = response;
  std::ofstream out(fs::path(dir) / (key + ".json"), std::ios::binary);
  if (!out) throw ConfigError("cannot write mock response in '" + dir + "'");
  out << j.dump(2) << "\n";
}

std::string OfflineBackend::do_complete(const ChatRequest&, const VlmEndpointConfig&) {
  throw TransportError("network access disabled");
}

nlohmann::json decode_params_json(const VlmEndpointConfig& cfg) {
  nlohmann::json j;
  j["temperature"] = cfg.effective_temperature();
  j["greedy"] = cfg.greedy;
  j["seed"] = cfg.seed ? nlohmann::json(*cfg.seed) : nlohmann::json(nullptr);
  return j;
}

std::string cache_key(const ChatRequest& request, const VlmEndpointConfig& cfg) {
  nlohmann::json j;
  j["images"] = nlohmann::json::array();
  for (const auto& img : request.images) j["images"].push_back(img.digest);
  j["prompt"] = request.prompt;
  j["model"] = cfg.model_name;
  j["decode"] = decode_params_json(cfg);
  j["attempt"] = request.attempt;
  return sha256_of_json(j);
}

std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

ResponseCache::ResponseCache(std::string dir) : dir_(std::move(dir)) {
  std::error_code ec;
  fs::create_directories(dir_, ec);
  if (!fs::is_directory(dir_)) throw ConfigError("cannot create cache directory '" + dir_ + "'");
}

std::string ResponseCache::path_for(const std::string& key) const {
  return (fs::path(dir_) / (key + ".json")).string();
}

std::optional<CachedResponse> ResponseCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  const std::string p = path_for(key);
  if (!fs::exists(p)) return std::nullopt;
  try {
    const auto j = nlohmann::json::parse(read_file(p));
    CachedResponse r;
    r.key = j.at("key").get<std::string>();
    r.raw_text = j.at("raw_text").get<std::string>();
    r.parsed = j.at("parsed");
    r.parse_ok = j.at("parse_ok").get<bool>();
    r.repaired = j.at("repaired").get<bool>();
    r.timestamp = j.value("timestamp", "");
    r.model = j.value("model", "");
    r.decode_params = j.value("decode_params", nlohmann::json::object());
    return r;
  } catch (const nlohmann::json::exception& e) {
    log::warn("ignoring corrupt cache entry " + p + ": " + e.what());
    return std::nullopt;
  }
}

CachedResponse ResponseCache::put(const CachedResponse& entry) {
  if (auto existing = get(entry.key)) return *existing;
  std::lock_guard lock(mu_);
  const std::string p = path_for(entry.key);
  if (!fs::exists(p)) {
    nlohmann::ordered_json j;
    j["key"] = entry.key;
    j["raw_text"] = entry.raw_text;
    j["parsed"] = entry.parsed;
    j["parse_ok"] = entry.parse_ok;
    j["repaired"] = entry.repaired;
    j["timestamp"] = entry.timestamp;
    j["model"] = entry.model;
    j["decode_params"] = entry.decode_params;
    const std::string tmp = p + ".tmp" + std::to_string(std::hash<std::thread::id>{}(
                                             std::this_thread::get_id()));
    {
      std::ofstream out(tmp, std::ios::binary);
      if (!out) throw ConfigError("cannot write cache entry in '" + dir_ + "'");
      out << j.dump(2) << "\n";
    }
    fs::rename(tmp, p);
  }
  return entry;
}

std::vector<std::string> ResponseCache::keys() const {
  std::lock_guard lock(mu_);
  std::vector<std::string> out;
  for (const auto& e : fs::directory_iterator(dir_)) {
    if (e.path().extension() == ".json") out.push_back(e.path().stem().string());
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::size_t ResponseCache::size() const { return keys().size(); }

}  // namespace vlp
