// Copyright 2026 The tubalcs Authors.
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
#include <vector>

namespace tubalcs {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define TUBALCS_DEFINE_ERROR(Name)            \
  class Name : public Error {                 \
   public:                                    \
    using Error::Error;                       \
  }

// t-algebra
TUBALCS_DEFINE_ERROR(DimensionMismatch);
TUBALCS_DEFINE_ERROR(SymmetryViolation);
TUBALCS_DEFINE_ERROR(TooLarge);
TUBALCS_DEFINE_ERROR(NotOrthogonal);
TUBALCS_DEFINE_ERROR(ZeroTensor);
TUBALCS_DEFINE_ERROR(SingularTensor);
TUBALCS_DEFINE_ERROR(NonFiniteValue);

// sensing / synthetic
TUBALCS_DEFINE_ERROR(InvalidSchedule);
TUBALCS_DEFINE_ERROR(InvalidSpec);
TUBALCS_DEFINE_ERROR(RankExceeded);

// recovery
TUBALCS_DEFINE_ERROR(DegenerateInit);
TUBALCS_DEFINE_ERROR(UnderdeterminedSystem);
TUBALCS_DEFINE_ERROR(SingularSystem);
TUBALCS_DEFINE_ERROR(SingularPreconditioner);

// harness
TUBALCS_DEFINE_ERROR(IoError);

#undef TUBALCS_DEFINE_ERROR

/// Errors that accumulate every problem found in one pass (config parsing).
class DiagnosticError : public Error {
 public:
  DiagnosticError(const std::string& what, std::vector<std::string> messages)
      : Error(join(what, messages)), messages_(std::move(messages)) {}

  const std::vector<std::string>& messages() const noexcept { return messages_; }

 private:
  static std::string join(const std::string& what,
                          const std::vector<std::string>& messages) {
    std::string out = what;
    for (const auto& m : messages) {
      out += "\n  ";
      out += m;
    }
    return out;
  }

  std::vector<std::string> messages_;
};

class ParseError : public DiagnosticError {
 public:
  explicit ParseError(std::vector<std::string> messages)
      : DiagnosticError("config parse error:", std::move(messages)) {}
};

class ValidationError : public DiagnosticError {
 public:
  explicit ValidationError(std::vector<std::string> messages)
      : DiagnosticError("config validation error:", std::move(messages)) {}
};

}  // namespace tubalcs
