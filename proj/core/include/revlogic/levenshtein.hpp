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

namespace revlogic {

// Unit-cost edit distance (insert, delete, substitute) over Unicode code
// points. Uses the Myers/Hyyrö bit-vector recurrence in 64-bit blocks after
// stripping the common prefix and suffix, so whole-paper diffs run in
// O(n * ceil(m / 64)).
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

/// UTF-8 convenience overload.
std::size_t levenshtein(std::string_view a, std::string_view b);

}  // namespace revlogic
