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


// American/British spelling lexicon.

#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace revlogic::spelling {

enum class Direction { AmericanToBritish, BritishToAmerican };

/// (american, british) pairs, lower case, including inflected forms.
const std::vector<std::pair<std::string, std::string>>& lexicon();

/// Converted word with the input's capitalization pattern, or nullopt when
/// the word has no counterpart in that direction.
std::optional<std::string> convert_word(std::string_view word, Direction dir);

struct WordReplacement {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string replacement;
};

/// Replacements for every convertible word in text, skipping inline code and
/// $math$ spans.
std::vector<WordReplacement> conversions(std::string_view text, Direction dir);

/// Number of convertible words in either direction.
std::pair<std::size_t, std::size_t> count_variants(std::string_view text);  // (american, british)

}  // namespace revlogic::spelling
