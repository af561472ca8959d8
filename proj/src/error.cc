//
// Copyright 2026 The Envre Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "envre/error.h"

#include <string>

namespace envre {

std::string_view ErrorCodeName(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
      return "PARSE";
    case ErrorCode::kValidation:
      return "VALIDATION";
    case ErrorCode::kOverlap:
      return "OVERLAP";
    case ErrorCode::kNotFound:
      return "NOT_FOUND";
    case ErrorCode::kTransient:
      return "TRANSIENT";
    case ErrorCode::kEmptyPool:
      return "EMPTY_POOL";
    case ErrorCode::kMissingPopularity:
      return "MISSING_POPULARITY";
    case ErrorCode::kCache:
      return "CACHE";
    case ErrorCode::kInternal:
      return "INTERNAL";
  }
  return "INTERNAL";
}

int ExitCodeFor(ErrorCode code) {
  switch (code) {
    case ErrorCode::kParse:
    case ErrorCode::kValidation:
    case ErrorCode::kOverlap:
      return 2;
    case ErrorCode::kNotFound:
    case ErrorCode::kTransient:
    case ErrorCode::kEmptyPool:
    case ErrorCode::kMissingPopularity:
    case ErrorCode::kCache:
      return 3;
    case ErrorCode::kInternal:
      return 4;
  }
  return 4;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(ErrorCodeName(code)) + ": " + message),
      code_(code),
      message_(message) {}

}  // namespace envre
