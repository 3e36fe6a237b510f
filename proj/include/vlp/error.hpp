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

#ifndef VLP_ERROR_HPP_
#define VLP_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vlp {

/// Root of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid DSL configuration, unknown profile, bad CLI input. Exit code 2.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Malformed task file, label outside {0,1}, split overlap, missing image.
class IngestionError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// Program text that cannot be parsed. Carries the byte offset of the fault.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Program uses a rule the grammar does not contain.
class UnderivableError : public Error {
 public:
  using Error::Error;
};

/// Grammar construction failed (e.g. BOOL underivable).
class GrammarError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

/// HTTP, auth, or replay failures talking to a VLM endpoint. Exit code 3.
class TransportError : public Error {
 public:
  using Error::Error;
};

/// A scene required by search is not in the cache.
class CacheMissError : public Error {
 public:
  using Error::Error;
};

/// Search produced nothing to rank. Exit code 4.
class NoCandidateError : public Error {
 public:
  using Error::Error;
};

/// Runtime failure while evaluating one program on one image.
class EvalError : public Error {
 public:
  using Error::Error;
};

/// A fixture cannot be generated from the given rule and vocabulary.
class GenerationError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

}  // namespace vlp

#endif  // VLP_ERROR_HPP_
