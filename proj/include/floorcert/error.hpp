// Copyright 2026 The floorcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef FLOORCERT_ERROR_HPP_
#define FLOORCERT_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace floorcert {

enum class ErrorKind {
  kSchema,      // input header is missing a mapped column
  kRow,         // a log row violates the row invariants or fails to parse
  kEmptyPanel,  // no valid rows survived ingestion
  kConfig,      // malformed or contradictory configuration
  kContract,    // caller violated an API precondition (e.g. unfrozen quantiles)
  kDomain,      // statistic is undefined for the given data (e.g. zero baseline)
  kDependency,  // a pipeline stage ran before its upstream stage
  kIo,          // file could not be opened or written
};

const char* error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const { return kind_; }
  const char* kind_name() const { return error_kind_name(kind_); }

 private:
  ErrorKind kind_;
};

}  // namespace floorcert

#endif  // FLOORCERT_ERROR_HPP_
