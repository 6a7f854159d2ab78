// Copyright 2026 The sbrbench Authors.
//
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

#pragma once

#include <stdexcept>
#include <string>

namespace sbr {

// Process exit codes used by the command-line tool.
enum class ExitCode : int {
  kOk = 0,
  kInputError = 2,
  kTuningFailure = 3,
  kMissingArtifact = 4,
  kBadArguments = 5,
};

// Base class for every error raised by the toolkit. Carries the exit code
// the command-line front end should terminate with.
class Error : public std::runtime_error {
 public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ExitCode code() const noexcept { return code_; }

 private:
  ExitCode code_;
};

// Bad or unreadable input data: malformed rows, missing files, empty data.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what)
      : Error(ExitCode::kInputError, what) {}
};

// Every tuning trial failed.
class TuningError : public Error {
 public:
  explicit TuningError(const std::string& what)
      : Error(ExitCode::kTuningFailure, what) {}
};

// A required artifact of an earlier stage (split files, tuned config) is absent.
class MissingArtifactError : public Error {
 public:
  explicit MissingArtifactError(const std::string& what)
      : Error(ExitCode::kMissingArtifact, what) {}
};

// Invalid parameter names, values or command-line arguments.
class ArgumentError : public Error {
 public:
  explicit ArgumentError(const std::string& what)
      : Error(ExitCode::kBadArguments, what) {}
};

}  // namespace sbr
