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

#include "floorcert/error.hpp"

namespace floorcert {

const char* error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kSchema:
      return "schema";
    case ErrorKind::kRow:
      return "row";
    case ErrorKind::kEmptyPanel:
      return "empty-panel";
    case ErrorKind::kConfig:
      return "config";
    case ErrorKind::kContract:
      return "contract";
    case ErrorKind::kDomain:
      return "domain";
    case ErrorKind::kDependency:
      return "dependency";
    case ErrorKind::kIo:
      return "io";
  }
  return "unknown";
}

}  // namespace floorcert
