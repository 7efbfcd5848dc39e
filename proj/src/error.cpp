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

#include "epurify/error.hpp"

namespace epurify {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::kDegreeMismatch: return "degree_mismatch";
    case Errc::kZeroInverse: return "zero_inverse";
    case Errc::kOutOfRange: return "out_of_range";
    case Errc::kDimensionMismatch: return "dimension_mismatch";
    case Errc::kLayoutMismatch: return "layout_mismatch";
    case Errc::kRegisterNotFound: return "register_not_found";
    case Errc::kNotBijective: return "not_bijective";
    case Errc::kNormalizationViolated: return "normalization_violated";
    case Errc::kInvalidArgument: return "invalid_argument";
    case Errc::kIo: return "io";
    case Errc::kParse: return "parse";
  }
  return "unknown";
}

}  // namespace epurify
