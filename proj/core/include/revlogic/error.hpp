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

#include <stdexcept>
#include <string>
#include <string_view>

namespace revlogic {

enum class ErrorCode {
  // paper_model
  MissingTitleOrAbstract,
  TooFewSections,
  MalformedTable,
  UnknownBlock,
  QuoteNotFound,
  OverlappingEdits,
  // llm_gateway
  TransportError,
  RateLimited,
  ContextOverflow,
  UnparseableVerdict,
  SchemaViolation,
  UnknownSchema,
  UnresolvedPlaceholder,
  ScriptMissing,
  // research_logic
  NoEmpiricalFindings,
  DanglingLink,
  CycleDetected,
  LayeringViolation,
  // counterfactual
  PreconditionViolated,
  TableCellNotFound,
  // arg_suite
  WindowTooSmall,
  ExternalCommandFailed,
  MissingOriginalReview,
  // stats
  EmptyCell,
  SingularDesign,
  NonConvergence,
  InvalidP,
  ZeroNeutralSd,
  InsufficientData,
  // pipeline
  ConfigError,
  ConfigMismatch,
  IoError,
  Interrupted,
};

std::string_view to_string(ErrorCode code);

/// The single exception type thrown by the library. Callers branch on code().
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }

  /// Returns a copy whose message is prefixed with a step label ("step: ...").
  Error with_context(std::string_view step) const;

 private:
  ErrorCode code_;
};

}  // namespace revlogic
