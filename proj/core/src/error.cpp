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

#include "revlogic/error.hpp"

namespace revlogic {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::MissingTitleOrAbstract: return "MissingTitleOrAbstract";
    case ErrorCode::TooFewSections: return "TooFewSections";
    case ErrorCode::MalformedTable: return "MalformedTable";
    case ErrorCode::UnknownBlock: return "UnknownBlock";
    case ErrorCode::QuoteNotFound: return "QuoteNotFound";
    case ErrorCode::OverlappingEdits: return "OverlappingEdits";
    case ErrorCode::TransportError: return "TransportError";
    case ErrorCode::RateLimited: return "RateLimited";
    case ErrorCode::ContextOverflow: return "ContextOverflow";
    case ErrorCode::UnparseableVerdict: return "UnparseableVerdict";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::UnknownSchema: return "UnknownSchema";
    case ErrorCode::UnresolvedPlaceholder: return "UnresolvedPlaceholder";
    case ErrorCode::ScriptMissing: return "ScriptMissing";
    case ErrorCode::NoEmpiricalFindings: return "NoEmpiricalFindings";
    case ErrorCode::DanglingLink: return "DanglingLink";
    case ErrorCode::CycleDetected: return "CycleDetected";
    case ErrorCode::LayeringViolation: return "LayeringViolation";
    case ErrorCode::PreconditionViolated: return "PreconditionViolated";
    case ErrorCode::TableCellNotFound: return "TableCellNotFound";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::ExternalCommandFailed: return "ExternalCommandFailed";
    case ErrorCode::MissingOriginalReview: return "MissingOriginalReview";
    case ErrorCode::EmptyCell: return "EmptyCell";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::NonConvergence: return "NonConvergence";
    case ErrorCode::InvalidP: return "InvalidP";
    case ErrorCode::ZeroNeutralSd: return "ZeroNeutralSd";
    case ErrorCode::InsufficientData: return "InsufficientData";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::ConfigMismatch: return "ConfigMismatch";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Interrupted: return "Interrupted";
  }
  return "Unknown";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code) {}

Error Error::with_context(std::string_view step) const {
  return Error(code_, std::string(step) + ": " + what());
}

}  // namespace revlogic
