// Copyright 2026 The revlogic Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace revlogic::text {

/// Decodes UTF-8 into code points; each invalid byte becomes U+FFFD.
std::u32string utf8_decode(std::string_view s);

std::size_t codepoint_count(std::string_view s);

inline bool is_space(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

std::string_view trim(std::string_view s);
std::string to_lower(std::string_view s);
bool iequals(std::string_view a, std::string_view b);
bool istarts_with(std::string_view s, std::string_view prefix);

/// Collapses each whitespace run to one space and trims both ends.
std::string normalize_whitespace(std::string_view s);

std::vector<std::string> split_whitespace(std::string_view s);

/// Splits prose into sentences at '.', '!' or '?' followed by whitespace.
/// Decimal points ("0.907") do not end a sentence.
std::vector<std::string> split_sentences(std::string_view s);

std::string replace_all(std::string s, std::string_view from, std::string_view to);

/// Conservative token estimate: ceil(code points / 4).
std::size_t estimate_tokens(std::string_view s);

}  // namespace revlogic::text
