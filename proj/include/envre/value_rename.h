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

// Rule-based renaming for NUM and TIME entities, which have no
// knowledge-base counterpart. The renamer keeps the surface format (digit
// counts, separators, signs, ordinal suffixes, month words) and redraws the
// values subject to calendar validity.

#ifndef ENVRE_VALUE_RENAME_H_
#define ENVRE_VALUE_RENAME_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace envre {

struct RenamedValue {
  std::string value;
  // False when no renamable field was recognized; `value` is then the input.
  bool parsed = false;
};

bool IsRuleBasedType(std::string_view entity_type);

// Throws Error(kValidation) unless `entity_type` is NUM or TIME.
RenamedValue RenameValue(std::string_view name, std::string_view entity_type,
                         std::uint64_t seed);

}  // namespace envre

#endif  // ENVRE_VALUE_RENAME_H_
