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

#include <cstdint>
#include <string>
#include <string_view>

namespace revlogic {

/// Lowercase hex SHA-256 of the input bytes.
std::string sha256_hex(std::string_view data);

/// Derives a child seed from a parent seed and a label (first 8 bytes of
/// SHA-256 over both). Used so every pipeline item has a stable seed that does
/// not depend on processing order.
std::uint64_t derive_seed(std::uint64_t parent, std::string_view label);

}  // namespace revlogic
