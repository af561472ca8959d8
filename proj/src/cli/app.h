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

// Flag parsing for the envre command line.

#ifndef ENVRE_CLI_APP_H_
#define ENVRE_CLI_APP_H_

#include <ostream>
#include <string>
#include <vector>

namespace envre::cli {

// Runs the command line described by `args` (args[0] is the program name)
// and returns the process exit status.
int Main(const std::vector<std::string>& args, std::ostream& out,
         std::ostream& err);

}  // namespace envre::cli

#endif  // ENVRE_CLI_APP_H_
