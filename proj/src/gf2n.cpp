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

#include "epurify/gf2n.hpp"

#include <array>
#include <string>

#include "epurify/error.hpp"

namespace epurify {

namespace {

// Smallest irreducible polynomial of each degree 1..16.
constexpr std::array<std::uint32_t, kMaxFieldDegree + 1> kModulus = {
    0,       // unused
    0x2,     // Z
    0x7,     // Z^2 + Z + 1
    0xb,     // Z^3 + Z + 1
    0x13,    // Z^4 + Z + 1
    0x25,    // Z^5 + Z^2 + 1
    0x43,    // Z^6 + Z + 1
    0x83,    // Z^7 + Z + 1
    0x11b,   // Z^8 + Z^4 + Z^3 + Z + 1
    0x203,   // Z^9 + Z + 1
    0x409,   // Z^10 + Z^3 + 1
    0x805,   // Z^11 + Z^2 + 1
    0x1009,  // Z^12 + Z^3 + 1
    0x201b,  // Z^13 + Z^4 + Z^3 + Z + 1
    0x4021,  // Z^14 + Z^5 + 1
    0x8003,  // Z^15 + Z + 1
    0x1002b, // Z^16 + Z^5 + Z^3 + Z + 1
};

void check_degree(int degree) {
  if (degree < 1 || degree > kMaxFieldDegree) {
    throw Error(Errc::kOutOfRange,
                "field degree " + std::to_string(degree) +
                    " outside [1, " + std::to_string(kMaxFieldDegree) + "]");
  }
}

void check_same_degree(const FieldElement& a, const FieldElement& b) {
  if (a.degree() != b.degree()) {
    throw Error(Errc::kDegreeMismatch,
                "GF(2^" + std::to_string(a.degree()) + ") and GF(2^" +
                    std::to_string(b.degree()) + ") elements do not mix");
  }
}

}  // namespace

std::uint32_t irreducible_polynomial(int degree) {
  check_degree(degree);
  return kModulus[static_cast<std::size_t>(degree)];
}

FieldElement::FieldElement(std::uint32_t value, int degree)
    : value_(value), degree_(degree) {
  check_degree(degree);
  if (value >= (std::uint32_t{1} << degree)) {
    throw Error(Errc::kOutOfRange, "field element " + std::to_string(value) +
                                       " does not fit in " +
                                       std::to_string(degree) + " bits");
  }
}

std::uint32_t gf_mul_raw(std::uint32_t a, std::uint32_t b,
                         int degree) noexcept {
  const std::uint32_t modulus = kModulus[static_cast<std::size_t>(degree)];
  const std::uint32_t top = std::uint32_t{1} << degree;
  std::uint32_t product = 0;
  // Shift-and-add, reducing a*Z^i as we go so nothing exceeds 2^(n+1).
  while (b != 0) {
    if (b & 1u) product ^= a;
    b >>= 1;
    a <<= 1;
    if (a & top) a ^= modulus;
  }
  return product;
}

std::uint32_t gf_inv_raw(std::uint32_t a, int degree) {
  if (a == 0) throw Error(Errc::kZeroInverse, "zero has no inverse");
  // a^(2^n - 2) by square-and-multiply.
  std::uint32_t exponent = (std::uint32_t{1} << degree) - 2;
  std::uint32_t result = 1;
  std::uint32_t base = a;
  while (exponent != 0) {
    if (exponent & 1u) result = gf_mul_raw(result, base, degree);
    base = gf_mul_raw(base, base, degree);
    exponent >>= 1;
  }
  return result;
}

FieldElement gf_add(const FieldElement& a, const FieldElement& b) {
  check_same_degree(a, b);
  return FieldElement(a.value() ^ b.value(), a.degree());
}

FieldElement gf_mul(const FieldElement& a, const FieldElement& b) {
  check_same_degree(a, b);
  return FieldElement(gf_mul_raw(a.value(), b.value(), a.degree()),
                      a.degree());
}

FieldElement gf_inv(const FieldElement& a) {
  return FieldElement(gf_inv_raw(a.value(), a.degree()), a.degree());
}

}  // namespace epurify
