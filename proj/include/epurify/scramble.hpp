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

// Scrambling permutations: y-indexed bijections x -> g_y(x) o h_y(x) on
// X = G o H whose H-part collides for a fixed fraction of y. Three finite
// field constructions are provided, plus a tabulated form for arbitrary
// (possibly broken) function tables.
//
// Index conventions (all big-endian, leftmost string = most significant):
//   * x o y concatenation is x * |Y| + y.
//   * The combined output g o h is g * W + h.
//   * Multiplication table: Y index i is the field element i + 1.
//   * Linear function: Y index 0 is the bottom symbol, i + 1 is element i;
//     X index is x0 * 2^n + x1.
//   * Extended linear: Y index 0 is the bottom symbol; tuples of length k
//     follow all shorter tuples, y0 most significant within a length.

#ifndef EPURIFY_SCRAMBLE_HPP_
#define EPURIFY_SCRAMBLE_HPP_

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

namespace epurify {

struct ScrambleParams {
  std::uint64_t N = 0;  // |X|
  std::uint64_t K = 0;  // |Y|
  std::uint64_t W = 0;  // |H|
  std::uint64_t L = 0;  // |G|

  friend bool operator==(const ScrambleParams&, const ScrambleParams&) =
      default;
};

enum class Construction {
  kMultiplicationTable,
  kLinearFunction,
  kExtendedLinear,
  kTabulated,
};

struct ScrambleOutput {
  std::uint64_t g;
  std::uint64_t h;
};

class ScramblePerm {
 public:
  /// Wraps a K x N table of combined outputs (row y, column x, value g*W+h).
  /// The table is not required to be a valid scrambling permutation; that
  /// is what verify_scrambling is for.
  static ScramblePerm tabulated(ScrambleParams params,
                                std::vector<std::uint64_t> table,
                                std::string name);

  const ScrambleParams& params() const noexcept { return params_; }
  Construction construction() const noexcept { return construction_; }
  int field_degree() const noexcept { return degree_; }
  /// Split point l for the multiplication table, tuple length d for the
  /// extended construction, 2 for the linear construction.
  int shape() const noexcept { return shape_; }
  const std::string& name() const noexcept { return name_; }

  ScrambleOutput evaluate(std::uint64_t x, std::uint64_t y) const;
  std::uint64_t apply(std::uint64_t x, std::uint64_t y) const {
    const ScrambleOutput out = evaluate(x, y);
    return out.g * params_.W + out.h;
  }
  /// Recovers x from g o h; the table form throws on a non-bijective row.
  std::uint64_t invert(std::uint64_t gh, std::uint64_t y) const;

  /// Field elements encoded by Y index y. Empty means the bottom symbol.
  std::vector<std::uint32_t> decode_y(std::uint64_t y) const;
  std::string describe_y(std::uint64_t y) const;

  /// Full function table in the layout tabulated() expects.
  std::vector<std::uint64_t> table() const;

 private:
  ScramblePerm() = default;

  friend ScramblePerm make_multiplication_table(int n, int l);
  friend ScramblePerm make_linear_function(int n);
  friend ScramblePerm make_extended_linear(int n, int d);

  std::uint32_t element_mask() const noexcept {
    return (std::uint32_t{1} << degree_) - 1;
  }

  ScrambleParams params_;
  Construction construction_ = Construction::kTabulated;
  int degree_ = 0;
  int shape_ = 0;
  std::string name_;
  // Tabulated form only.
  std::shared_ptr<const std::vector<std::uint64_t>> table_;
  std::shared_ptr<const std::vector<std::uint64_t>> inverse_;
};

/// X = Y ∪ {0} = GF(2^n); g = top l bits of x*y, h = bottom n-l bits.
/// Requires 1 <= l < n <= 8.
ScramblePerm make_multiplication_table(int n, int l);
/// X = GF(2^n)^2, Y = GF(2^n) ∪ {⊥}. Requires 1 <= n <= 4.
ScramblePerm make_linear_function(int n);
/// X = GF(2^n)^d, Y = tuples of length 0..d-1. Requires d >= 2, n*d <= 12.
ScramblePerm make_extended_linear(int n, int d);

struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational reduced(std::uint64_t num, std::uint64_t den);
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const;
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// Index of the unordered pair {x1, x2}, x1 != x2, in a triangular array.
inline std::uint64_t pair_index(std::uint64_t x1, std::uint64_t x2) {
  if (x1 > x2) std::swap(x1, x2);
  return x2 * (x2 - 1) / 2 + x1;
}

struct VerificationReport {
  std::string construction;
  ScrambleParams params;
  std::vector<bool> bijective_per_y;
  bool all_bijective = false;
  bool roundtrip = false;
  /// |{y : h_y(x1) = h_y(x2)}| for every pair, indexed by pair_index.
  std::vector<std::uint32_t> pair_collisions;
  /// collision count -> number of pairs with that count.
  std::map<std::uint64_t, std::uint64_t> collision_histogram;
  bool uniform = false;
  /// Collision probability; the mean over pairs when not uniform.
  Rational measured_p;
  Rational expected_p;  // (L-1)/(N-1)
  bool p_matches = false;
  bool n_equals_wl = false;
  bool n_at_most_kl = false;

  bool passed() const {
    return all_bijective && roundtrip && uniform && p_matches &&
           n_equals_wl && n_at_most_kl;
  }
};

/// Exhaustive check of both scrambling conditions. Failures are reported in
/// the returned value. Requires N <= 4096.
VerificationReport verify_scrambling(const ScramblePerm& perm);

/// Symbolic row of the extended construction: for tuple length k, g = x_k and
/// h lists x_i + x_k*y_i for i < k followed by x_i for i > k.
struct CaseRow {
  std::string y;
  std::string g;
  std::vector<std::string> h;
};
std::vector<CaseRow> extended_linear_case_table(int d);

}  // namespace epurify

#endif  // EPURIFY_SCRAMBLE_HPP_
