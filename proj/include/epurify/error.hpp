// Copyright 2026 The epurify Authors
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

#ifndef EPURIFY_ERROR_HPP_
#define EPURIFY_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace epurify {

enum class Errc {
  kDegreeMismatch,
  kZeroInverse,
  kOutOfRange,
  kDimensionMismatch,
  kLayoutMismatch,
  kRegisterNotFound,
  kNotBijective,
  kNormalizationViolated,
  kInvalidArgument,
  kIo,
  kParse,
};

std::string_view errc_name(Errc code);

/// Every library failure is reported through this type; `code()` is the
/// machine-readable part the CLI serializes.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace epurify

#endif  // EPURIFY_ERROR_HPP_
