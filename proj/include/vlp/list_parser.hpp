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

// Parsing of the Python list assignments VLMs are asked to return, e.g.
//
//   ```python
//   objects = [['dog', 'sitting'], ['ball', 'round']]
//   ```
//
// plus best-effort repair of truncated or looping output.

#ifndef VLP_LIST_PARSER_HPP_
#define VLP_LIST_PARSER_HPP_

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vlp/scene.hpp"

namespace vlp {

/// A Python literal restricted to strings and (nested) lists.
struct PyValue {
  bool is_list = false;
  std::string str;
  std::vector<PyValue> items;
};

/// Strict parse of a complete literal spanning all of `text` (surrounding
/// whitespace allowed). On failure returns nullopt and sets `error_offset`.
std::optional<PyValue> parse_python_literal(std::string_view text,
                                            std::size_t* error_offset = nullptr);

/// Flat: list of strings (grounding). Nested: list of lists of strings (scenes).
enum class ListShape { kFlat, kNested };

struct ParsedListResponse {
  /// kNested results; never contains an empty row except the [[]] sentinel.
  std::vector<Row> rows;
  /// kFlat results.
  std::vector<std::string> items;
  bool parse_ok = false;
  bool repaired = false;
  std::string raw_text;
  /// Names of the repair rules that fired, in order.
  std::vector<std::string> repairs;
};

/// The list literal inside the response: the body of the first fenced code
/// block (if any), from the first '[' after the assignment.
std::string_view locate_list(std::string_view raw_text);

/// Strict parse first; falls back to repair() on failure.
ParsedListResponse parse_list_response(std::string_view raw_text, ListShape shape);

/// Applies, in order: close an unterminated string, then unterminated inner
/// and outer lists; truncate at the last complete row if that still fails;
/// collapse immediately repeated rows. `repaired` is set when a rule fired
/// and the result parses. Terminates on every input.
ParsedListResponse repair(std::string_view raw_text, ListShape shape);

/// Interprets a YES/NO answer: leading word, case- and punctuation-insensitive.
std::optional<bool> parse_yes_no(std::string_view text);

}  // namespace vlp

#endif  // VLP_LIST_PARSER_HPP_
