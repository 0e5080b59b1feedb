// Copyright 2026 The kickflow Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef KICKFLOW_ERRORS_HPP
#define KICKFLOW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace kickflow {

/// Invalid configuration value. `field()` is the dotted path of the
/// offending entry, e.g. "grid.h" or "potential.bump_width".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& what)
      : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// A slice of a transfer computation carries no finite mass on the grid.
class EmptySliceError : public std::runtime_error {
 public:
  EmptySliceError(const std::string& what, double leak)
      : std::runtime_error(what), leak_(leak) {}
  double boundary_leak() const noexcept { return leak_; }

 private:
  double leak_;
};

}  // namespace kickflow

#endif  // KICKFLOW_ERRORS_HPP
