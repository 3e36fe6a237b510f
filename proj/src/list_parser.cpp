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

#include "vlp/list_parser.hpp"

#include <cctype>

#include "vlp/dsl.hpp"
#include "vlp/log.hpp"

namespace vlp {
namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

class LiteralParser {
 public:
  explicit LiteralParser(std::string_view s) : s_(s) {}

  std::optional<PyValue> parse(std::size_t* error_offset) {
    auto v = value();
    skip_ws();
    if (v && pos_ != s_.size()) {
      fail();
      v.reset();
    }
    if (!v && error_offset) *error_offset = err_;
    return v;
  }

 private:
  void skip_ws() {
    while (pos_ < s_.size() && is_space(s_[pos_])) ++pos_;
  }
  void fail() {
    if (err_ == std::string_view::npos) err_ = pos_;
  }

  std::optional<PyValue> value() {
    skip_ws();
    if (pos_ >= s_.size()) {
      fail();
      return std::nullopt;
    }
    const char c = s_[pos_];
    if (c == '[') return list();
    if (c == '\'' || c == '"') return string();
    fail();
    return std::nullopt;
  }

  std::optional<PyValue> string() {
    const char quote = s_[pos_++];
    PyValue v;
    while (pos_ < s_.size() && s_[pos_] != quote) {
      char c = s_[pos_++];
      if (c == '\n') {
        --pos_;
        fail();
        return std::nullopt;
      }
      if (c == '\\') {
        if (pos_ >= s_.size()) break;
        c = s_[pos_++];
        if (c == 'n') c = '\n';
        if (c == 't') c = '\t';
      }
      v.str += c;
    }
    if (pos_ >= s_.size()) {
      fail();
      return std::nullopt;
    }
    ++pos_;
    return v;
  }

  std::optional<PyValue> list() {
    ++pos_;
    PyValue v;
    v.is_list = true;
    skip_ws();
    if (pos_ < s_.size() && s_[pos_] == ']') {
      ++pos_;
      return v;
    }
    while (true) {
      auto item = value();
      if (!item) return std::nullopt;
      v.items.push_back(std::move(*item));
      skip_ws();
      if (pos_ >= s_.size()) {
        fail();
        return std::nullopt;
      }
      if (s_[pos_] == ']') {
        ++pos_;
        return v;
      }
      if (s_[pos_] != ',') {
        fail();
        return std::nullopt;
      }
      ++pos_;
      skip_ws();
      if (pos_ < s_.size() && s_[pos_] == ']') {  // trailing comma
        ++pos_;
        return v;
      }
    }
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::size_t err_ = std::string_view::npos;
};

// Converts a parsed literal to the requested shape. False if it does not conform.
bool conform(const PyValue& v, ListShape shape, ParsedListResponse& out) {
  if (!v.is_list) return false;
  out.rows.clear();
  out.items.clear();
  if (shape == ListShape::kFlat) {
    for (const auto& item : v.items) {
      if (item.is_list) return false;
      auto n = normalize_symbol(item.str);
      if (!n.empty()) out.items.push_back(std::move(n));
    }
    return true;
  }
  for (const auto& row : v.items) {
    if (!row.is_list) return false;
    Row r;
    for (const auto& cell : row.items) {
      if (cell.is_list) return false;
      auto n = normalize_symbol(cell.str);
      if (!n.empty()) r.push_back(std::move(n));
    }
    if (!r.empty()) out.rows.push_back(std::move(r));
  }
  if (out.rows.empty()) out.rows.push_back(Row{});
  return true;
}

bool try_parse(std::string_view text, ListShape shape, ParsedListResponse& out) {
  auto v = parse_python_literal(text);
  return v && conform(*v, shape, out);
}

struct ScanResult {
  bool in_string = false;
  char quote = 0;
  bool dangling_escape = false;
  int depth = 0;
  std::size_t closed_at = std::string_view::npos;      // index of the outermost ']'
  std::size_t last_complete = std::string_view::npos;  // one past the last complete element
};

ScanResult scan(std::string_view s, ListShape shape) {
  ScanResult r;
  const int element_depth = shape == ListShape::kNested ? 2 : 1;
  for (std::size_t i = 0; i < s.size(); ++i) {
    const char c = s[i];
    if (r.in_string) {
      if (c == '\\') {
        if (i + 1 == s.size()) {
          r.dangling_escape = true;
        } else {
          ++i;
        }
      } else if (c == r.quote) {
        r.in_string = false;
        if (shape == ListShape::kFlat && r.depth == 1) r.last_complete = i + 1;
      }
      continue;
    }
    if (c == '\'' || c == '"') {
      r.in_string = true;
      r.quote = c;
    } else if (c == '[') {
      ++r.depth;
    } else if (c == ']') {
      if (r.depth == element_depth && shape == ListShape::kNested) r.last_complete = i + 1;
      --r.depth;
      if (r.depth == 0) {
        r.closed_at = i;
        return r;
      }
    }
  }
  return r;
}

template <typename T>
bool collapse_repeats(std::vector<T>& v) {
  if (v.size() < 2) return false;
  std::vector<T> out;
  out.reserve(v.size());
  for (auto& x : v) {
    if (out.empty() || !(out.back() == x)) out.push_back(std::move(x));
  }
  const bool changed = out.size() != v.size();
  v = std::move(out);
  return changed;
}

}  // namespace

std::optional<PyValue> parse_python_literal(std::string_view text, std::size_t* error_offset) {
  return LiteralParser(text).parse(error_offset);
}

std::string_view locate_list(std::string_view raw) {
  std::string_view body = raw;
  if (auto fence = raw.find("```"); fence != std::string_view::npos) {
    std::size_t start = raw.find('\n', fence);
    start = (start == std::string_view::npos) ? fence + 3 : start + 1;
    std::size_t end = raw.find("```", start);
    body = raw.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
  }
  const auto open = body.find('[');
  if (open == std::string_view::npos) return {};
  body = body.substr(open);
  while (!body.empty() && is_space(body.back())) body.remove_suffix(1);
  return body;
}

ParsedListResponse parse_list_response(std::string_view raw_text, ListShape shape) {
  ParsedListResponse out;
  out.raw_text = std::string(raw_text);
  const auto text = locate_list(raw_text);
  if (!text.empty() && try_parse(text, shape, out)) {
    out.parse_ok = true;
    return out;
  }
  return repair(raw_text, shape);
}

ParsedListResponse repair(std::string_view raw_text, ListShape shape) {
  ParsedListResponse out;
  out.raw_text = std::string(raw_text);
  const std::string_view text = locate_list(raw_text);
  auto fail = [&]() {
    out.parse_ok = false;
    out.repaired = false;
    out.rows = {Row{}};
    out.items.clear();
    log::warn("unparsable VLM list output");
    return out;
  };
  if (text.empty()) return fail();

  const ScanResult s = scan(text, shape);
  std::vector<std::string> fired;
  bool ok = false;

  // Rule 1: close what is open.
  std::string candidate;
  if (s.closed_at != std::string_view::npos) {
    candidate = std::string(text.substr(0, s.closed_at + 1));
    if (candidate.size() != text.size()) fired.push_back("drop_trailing_text");
  } else {
    candidate = std::string(text);
    if (s.in_string) {
      if (s.dangling_escape) candidate.pop_back();
      candidate += s.quote;
      fired.push_back("close_string");
    }
    if (s.depth > 1) fired.push_back("close_inner_list");
    if (s.depth > 0) {
      candidate.append(static_cast<std::size_t>(s.depth), ']');
      fired.push_back("close_outer_list");
    }
  }
  ok = try_parse(candidate, shape, out);

  // Rule 2: cut back to the last complete element.
  if (!ok && s.last_complete != std::string_view::npos) {
    candidate = std::string(text.substr(0, s.last_complete)) + "]";
    fired.push_back("truncate_to_last_complete_row");
    ok = try_parse(candidate, shape, out);
  }
  if (!ok) return fail();

  // Rule 3: repetition loops.
  const bool collapsed =
      shape == ListShape::kNested ? collapse_repeats(out.rows) : collapse_repeats(out.items);
  if (collapsed) fired.push_back("collapse_repeated_rows");

  out.parse_ok = true;
  out.repaired = !fired.empty();
  out.repairs = std::move(fired);
  if (out.repaired) {
    std::string msg = "repaired VLM list output:";
    for (const auto& r : out.repairs) msg += " " + r;
    log::warn(msg);
  }
  return out;
}

std::optional<bool> parse_yes_no(std::string_view text) {
  std::size_t i = 0;
  while (i < text.size() && !std::isalpha(static_cast<unsigned char>(text[i]))) ++i;
  std::string word;
  while (i < text.size() && std::isalpha(static_cast<unsigned char>(text[i]))) {
    word += static_cast<char>(std::tolower(static_cast<unsigned char>(text[i++])));
  }
  if (word == "yes") return true;
  if (word == "no") return false;
  return std::nullopt;
}

}  // namespace vlp
