// Copyright 2026 The dpsyn Authors
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


#ifndef DPSYN_CLI_HPP_
#define DPSYN_CLI_HPP_

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace dpsyn {

enum class ExitCode : int {
  kOk = 0,
  kFailure = 1,
  kUsage = 2,
  kConfig = 3,
  kMissingFile = 4,
  kNumerical = 5,
  kInfeasible = 6,
  kFormat = 7,
};

// Machine-readable name used in the "error: code=<name>" line.
const char* exit_code_name(ExitCode code);

inline constexpr const char* kOutputRootVariable = "DPSYN_OUT_ROOT";

// Relative directories resolve under $DPSYN_OUT_ROOT when it is set.
std::filesystem::path resolve_output_dir(const std::string& configured);

// args[0] is the program name. Results go to `out`; failures print one
// line `error: code=<name> message="..."` to `err`.
int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dpsyn

#endif  // DPSYN_CLI_HPP_
