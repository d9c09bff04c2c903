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

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace revlogic {

using TemplateParams = std::map<std::string, std::string>;

/// Single-pass placeholder substitution. "{name}" is replaced by params[name];
/// "{{" and "}}" are literal braces. A placeholder with no matching parameter
/// throws Error{UnresolvedPlaceholder}. Substituted values are not rescanned.
std::string substitute(std::string_view tmpl, const TemplateParams& params);

/// Placeholder names referenced by a template, in order of first use.
std::vector<std::string> placeholders(std::string_view tmpl);

/// Named prompt templates. Starts from the built-in assets; a directory of
/// "<name>.txt" files overrides or extends them.
class PromptLibrary {
 public:
  PromptLibrary();

  static const PromptLibrary& builtin();

  void load_dir(const std::filesystem::path& dir);
  void set(std::string name, std::string tmpl);

  bool contains(std::string_view name) const;
  const std::string& get(std::string_view name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, std::string, std::less<>> templates_;
};

}  // namespace revlogic
