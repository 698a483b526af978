/*
* Copyright (C) 2026 epildp contributors
*
* Licensed under the Apache License, Version 2.0 (the "License");
* you may not use this file except in compliance with the License.
* You may obtain a copy of the License at
*
*     http://www.apache.org/licenses/LICENSE-2.0
*
* Unless required by applicable law or agreed to in writing, software
* distributed under the License is distributed on an "AS IS" BASIS,
* WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
* See the License for the specific language governing permissions and
* limitations under the License.
*/
#ifndef EPILDP_TOOLS_CLI_HPP
#define EPILDP_TOOLS_CLI_HPP

#include <ostream>
#include <string>
#include <vector>

namespace epildp
{
namespace cli
{

/// Runs the command line tool on args (without the program name). Output files go to the
/// directory given by --out, else $EPILDP_OUT, else ./epildp_out. Errors are reported on err
/// as a one-line JSON object and mapped to the returned exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for an error category ("ConfigError", "DomainError", ...).
int exit_code(const std::string& category);

} // namespace cli
} // namespace epildp

#endif // EPILDP_TOOLS_CLI_HPP
