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

// Chat-completions client, replay backends and the on-disk response cache.

#ifndef VLP_VLM_HPP_
#define VLP_VLM_HPP_

#include <atomic>
#include <cstdint>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace vlp {

struct VlmEndpointConfig {
  std::string base_url = "http://127.0.0.1:8000/v1";
  std::string model_name = "mock";
  /// Environment variable holding the API key; no Authorization header when unset.
  std::string api_key_env = "VLP_API_KEY";
  double temperature = 1.0;
  /// Greedy decoding; overrides temperature with 0.
  bool greedy = false;
  int max_retries = 3;
  double timeout_seconds = 120.0;
  std::optional<std::int64_t> seed;
  /// Concurrent per-image requests.
  int parallelism = 4;

  double effective_temperature() const { return greedy ? 0.0 : temperature; }
  /// Throws ConfigError on negative retries, non-positive timeout or parallelism.
  void validate() const;
};

struct ImageInput {
  std::string digest;
  std::string path;
};

/// One user message: the images followed by the prompt text.
struct ChatRequest {
  std::string prompt;
  std::vector<ImageInput> images;
  /// Retry ordinal; part of the cache key so retries are distinct entries.
  int attempt = 0;
};

class VlmBackend {
 public:
  virtual ~VlmBackend() = default;
  /// Returns the assistant message text. Throws TransportError.
  std::string complete(const ChatRequest& request, const VlmEndpointConfig& cfg);
  /// Requests that reached the backend (including failed ones).
  std::uint64_t calls() const { return calls_.load(); }

 protected:
  virtual std::string do_complete(const ChatRequest& request, const VlmEndpointConfig& cfg) = 0;

 private:
  std::atomic<std::uint64_t> calls_{0};
};

/// OpenAI-compatible POST {base_url}/chat/completions. Images are sent as
/// base64 data URLs.
class HttpVlmBackend : public VlmBackend {
 protected:
  std::string do_complete(const ChatRequest& request, const VlmEndpointConfig& cfg) override;
};

/// Request body as sent by HttpVlmBackend.
nlohmann::json chat_request_body(const ChatRequest& request, const VlmEndpointConfig& cfg);

/// Replays canned responses from a directory of <replay_key>.json files,
/// each {"key": ..., "response": ...}. A file named <replay_key>.<attempt>.json
/// takes precedence for that attempt. Missing responses raise TransportError.
class MockVlmBackend : public VlmBackend {
 public:
  explicit MockVlmBackend(std::string dir);
  const std::string& dir() const { return dir_; }

 protected:
  std::string do_complete(const ChatRequest& request, const VlmEndpointConfig& cfg) override;

 private:
  std::string dir_;
};

/// Fails every request; used to prove a stage is served from cache.
class OfflineBackend : public VlmBackend {
 protected:
  std::string do_complete(const ChatRequest& request, const VlmEndpointConfig& cfg) override;
};

/// Seed- and model-independent key under which mock responses are stored:
/// SHA-256 over the image digests and the prompt text.
std::string replay_key(const ChatRequest& request);

/// Writes a mock response file.
void write_mock_response(const std::string& dir, const ChatRequest& request,
                         const std::string& response);

/// Cache key: SHA-256 over image digests, prompt, model, decode parameters
/// (temperature, seed) and attempt.
std::string cache_key(const ChatRequest& request, const VlmEndpointConfig& cfg);

struct CachedResponse {
  std::string key;
  std::string raw_text;
  /// Flat list, nested rows, or a boolean, depending on the prompt.
  nlohmann::json parsed;
  bool parse_ok = false;
  bool repaired = false;
  std::string timestamp;
  std::string model;
  nlohmann::json decode_params;
};

/// Directory of <key>.json documents. Entries are written once and never
/// overwritten, so a key always resolves to the same payload.
class ResponseCache {
 public:
  explicit ResponseCache(std::string dir);
  std::optional<CachedResponse> get(const std::string& key) const;
  /// Stores `entry` unless the key exists; returns the stored entry.
  CachedResponse put(const CachedResponse& entry);
  std::size_t size() const;
  std::vector<std::string> keys() const;
  const std::string& dir() const { return dir_; }

 private:
  std::string path_for(const std::string& key) const;
  std::string dir_;
  mutable std::mutex mu_;
};

nlohmann::json decode_params_json(const VlmEndpointConfig& cfg);
std::string utc_timestamp();

}  // namespace vlp

#endif  // VLP_VLM_HPP_
