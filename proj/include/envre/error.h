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

#ifndef ENVRE_ERROR_H_
#define ENVRE_ERROR_H_

#include <stdexcept>
#include <string>
#include <string_view>

namespace envre {

enum class ErrorCode {
  kParse,
  kValidation,
  kOverlap,
  kNotFound,
  kTransient,
  kEmptyPool,
  kMissingPopularity,
  kCache,
  kInternal,
};

std::string_view ErrorCodeName(ErrorCode code);

// Process exit status for a failure of the given kind: 2 for bad input,
// 3 for knowledge-base/cache problems, 4 for everything else.
int ExitCodeFor(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const { return code_; }
  // The message without the code-name prefix that what() carries.
  const std::string& message() const { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace envre

#endif  // ENVRE_ERROR_H_
