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

#ifndef ENVRE_TEXT_UTIL_H_
#define ENVRE_TEXT_UTIL_H_

#include <string>
#include <string_view>
#include <vector>

namespace envre {

// ASCII lowercasing; bytes outside ASCII pass through unchanged.
std::string FoldCase(std::string_view text);

std::vector<std::string> SplitWhitespace(std::string_view text);

// Collapses runs of whitespace to single spaces and trims both ends.
std::string NormalizeWhitespace(std::string_view text);

std::string_view Trim(std::string_view text);

}  // namespace envre

#endif  // ENVRE_TEXT_UTIL_H_
