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


#ifndef RISBLOCK_CONFIG_HPP
#define RISBLOCK_CONFIG_HPP

#include "risblock/pipeline.hpp"

#include <cstddef>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>

namespace risblock
{

// Parse or validation failure. line() is 0 when no single line is at fault.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(const std::string &what, std::size_t line = 0);
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

// Sectioned key = value text:
//
//   # comment
//   [general]
//   seed = 20260101
//   [scene]
//   penetration_loss_db = 30
//
// Unknown sections or keys, malformed values and duplicate keys are errors.
// The finished config is validated.
ExperimentConfig parse_config(std::string_view text, const std::string &source = "<config>");
ExperimentConfig load_config(const std::filesystem::path &path);

// Applies RISBLOCK_SEED when it is set. Throws ConfigError on garbage.
void apply_seed_override(ExperimentConfig &cfg);

// The text form of a config, accepted by parse_config.
std::string config_text(const ExperimentConfig &cfg);

} // namespace risblock

#endif
