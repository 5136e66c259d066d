// Copyright 2026 The signform Authors.
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

#include "signform/error.hpp"

namespace signform {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::EmptyForm: return "EmptyForm";
    case ErrorCode::InvalidForm: return "InvalidForm";
    case ErrorCode::MissingColumn: return "MissingColumn";
    case ErrorCode::EmptyLexicon: return "EmptyLexicon";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NonNumericField: return "NonNumericField";
    case ErrorCode::TooManyFolds: return "TooManyFolds";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::OddHiddenSplit: return "OddHiddenSplit";
    case ErrorCode::UnknownClass: return "UnknownClass";
    case ErrorCode::OutOfInventory: return "OutOfInventory";
    case ErrorCode::TrainingDiverged: return "TrainingDiverged";
    case ErrorCode::EmptyTable: return "EmptyTable";
    case ErrorCode::SignSetMismatch: return "SignSetMismatch";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::DegenerateRanks: return "DegenerateRanks";
    case ErrorCode::TooFewValues: return "TooFewValues";
    case ErrorCode::SingularKernel: return "SingularKernel";
    case ErrorCode::AllTrialsDiverged: return "AllTrialsDiverged";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::InfeasibleSpec: return "InfeasibleSpec";
    case ErrorCode::ConfigError: return "ConfigError";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::ArchiveError: return "ArchiveError";
  }
  return "Unknown";
}

}  // namespace signform
