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

#ifndef EPURIFY_GF2N_HPP_
#define EPURIFY_GF2N_HPP_

#include <cstdint>

namespace epurify {

inline constexpr int kMaxFieldDegree = 16;

/// Reduction polynomial used for GF(2^n). Bit i is the coefficient of Z^i,
/// so the returned value has bit n set. Each entry is the numerically
/// smallest irreducible polynomial of its degree.
std::uint32_t irreducible_polynomial(int degree);

/// An element of GF(2^n) stored as a polynomial over GF(2): bit i of
/// `value` is the coefficient of Z^i. Elements of different degrees never
/// mix; every binary operation checks that.
class FieldElement {
 public:
  FieldElement(std::uint32_t value, int degree);

  static FieldElement zero(int degree) { return FieldElement(0, degree); }
  static FieldElement one(int degree) { return FieldElement(1, degree); }

  std::uint32_t value() const noexcept { return value_; }
  int degree() const noexcept { return degree_; }
  std::uint32_t order() const noexcept { return std::uint32_t{1} << degree_; }
  bool is_zero() const noexcept { return value_ == 0; }

  friend bool operator==(const FieldElement&, const FieldElement&) = default;

 private:
  std::uint32_t value_;
  int degree_;
};

FieldElement gf_add(const FieldElement& a, const FieldElement& b);
FieldElement gf_mul(const FieldElement& a, const FieldElement& b);
/// Throws Errc::kZeroInverse for a == 0.
FieldElement gf_inv(const FieldElement& a);

inline FieldElement operator+(const FieldElement& a, const FieldElement& b) {
  return gf_add(a, b);
}
inline FieldElement operator*(const FieldElement& a, const FieldElement& b) {
  return gf_mul(a, b);
}

// Raw-value forms used by the scrambling constructions' inner loops. No
// range checks beyond what the caller guarantees.
std::uint32_t gf_mul_raw(std::uint32_t a, std::uint32_t b, int degree) noexcept;
std::uint32_t gf_inv_raw(std::uint32_t a, int degree);

}  // namespace epurify

#endif  // EPURIFY_GF2N_HPP_
