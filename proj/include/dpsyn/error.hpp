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

#ifndef DPSYN_ERROR_HPP_
#define DPSYN_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace dpsyn {

// Caller handed us something outside an operation's precondition.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A configuration (distribution, plan, run) that cannot be executed.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Non-finite values or other arithmetic breakdown.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A search target that no admissible parameter can reach.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed files (IDX, tensor containers, checkpoints).
class FormatError : public std::runtime_error {
 public:
  enum class Kind { kBadMagic, kTruncated, kCountMismatch, kUnsupportedVersion, kIo };

  FormatError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  Kind kind() const noexcept { return kind_; }

 private:
  Kind kind_;
};

// A required input file does not exist or cannot be opened.
class FileNotFound : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Raised when a region lies outside the validity domain of an analytic bound.
class OutOfRegion : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace dpsyn

#endif  // DPSYN_ERROR_HPP_
