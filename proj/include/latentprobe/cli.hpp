/* Copyright 2026 The latentprobe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Batch front end: recon, sweep, probe and ablate subcommands.

#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace latentprobe {

/// Exit status for input or per-tile failures. Usage errors return the
/// argument parser's own nonzero code.
inline constexpr int kExitTileFailure = 2;

/// Runs one command line (without the program name). Returns the process
/// exit code; 0 only when every tile succeeded.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace latentprobe
