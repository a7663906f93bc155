// SPDX-License-Identifier: Apache-2.0
//
// risblock - RIS-assisted blockage prediction workbench
// Copyright (C) 2026 The risblock authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#ifndef RISBLOCK_CLI_HPP
#define RISBLOCK_CLI_HPP

#include <ostream>

namespace risblock
{

enum ExitCode : int
{
    kExitOk = 0,
    kExitRuntime = 1,
    kExitConfig = 2,
};

// risblock generate|train|eval|gradcheck|curves|experiment ...
// Log lines go to `log`.
int run_cli(int argc, const char *const *argv, std::ostream &log);

} // namespace risblock

#endif
