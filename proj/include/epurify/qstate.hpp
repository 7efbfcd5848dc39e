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

// Sparse pure states of symmetric bipartite systems and the operations the
// purification protocols are built from.
//
// A state is sum_{a,b} amp(a,b) |a>^A |b>^B. Alice and Bob always share the
// same register layout; an index is the big-endian mixed-radix value of the
// register digits, so concatenating registers matches string concatenation.

#ifndef EPURIFY_QSTATE_HPP_
#define EPURIFY_QSTATE_HPP_

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "epurify/scramble.hpp"

namespace epurify {

using Index = std::uint64_t;
using Complex = std::complex<double>;

/// Amplitudes below this magnitude are dropped after every operation.
inline constexpr double kPruneThreshold = 1e-12;
/// Allowed deviation of the squared norm (and of ensemble weights) from 1.
inline constexpr double kNormTolerance = 1e-9;
/// Measurement branches less likely than this are folded into a residue.
inline constexpr double kBranchDropThreshold = 1e-15;
/// Singular values at or below this do not count toward the Schmidt rank.
inline constexpr double kRankThreshold = 1e-9;

struct Register {
  std::string name;
  Index dim = 0;

  friend bool operator==(const Register&, const Register&) = default;
};

/// Ordered named registers. Every register has dimension >= 2; the empty
/// layout has total dimension 1.
class RegisterLayout {
 public:
  RegisterLayout() = default;
  explicit RegisterLayout(std::vector<Register> registers);

  /// One register, or the empty layout when dim == 1.
  static RegisterLayout single(std::string name, Index dim);

  Index dim() const noexcept { return dim_; }
  bool empty() const noexcept { return registers_.empty(); }
  std::span<const Register> registers() const noexcept { return registers_; }

  std::optional<std::size_t> find(std::string_view name) const;
  /// Position of `name`; throws Errc::kRegisterNotFound.
  std::size_t position(std::string_view name) const;
  /// Product of the dimensions of the registers after `pos`.
  Index stride(std::size_t pos) const;
  Index digit(Index index, std::size_t pos) const;

  RegisterLayout without(std::string_view name) const;
  RegisterLayout concat(const RegisterLayout& tail) const;
  std::string describe() const;

  friend bool operator==(const RegisterLayout&, const RegisterLayout&) =
      default;

 private:
  std::vector<Register> registers_;
  Index dim_ = 1;
};

class SparseState {
 public:
  struct Entry {
    Index a;
    Index b;
    Complex amp;
  };

  /// Validates: indices in range and squared norm within kNormTolerance of 1.
  SparseState(RegisterLayout layout, std::vector<Entry> entries);
  /// Rescales the entries to unit norm; throws on a zero vector.
  static SparseState normalized(RegisterLayout layout,
                                std::vector<Entry> entries);

  const RegisterLayout& layout() const noexcept { return layout_; }
  const RegisterLayout& layout_a() const noexcept { return layout_; }
  const RegisterLayout& layout_b() const noexcept { return layout_; }
  Index dim() const noexcept { return layout_.dim(); }

  /// Sorted by (a, b), no duplicates, no pruned amplitudes.
  std::span<const Entry> entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  Complex amplitude(Index a, Index b) const;
  double norm_squared() const;

  /// Same amplitudes under another layout of equal total dimension.
  SparseState relabeled(RegisterLayout layout) const;
  SparseState flattened(std::string name) const {
    return relabeled(RegisterLayout::single(std::move(name), dim()));
  }

 private:
  SparseState() = default;
  void canonicalize();

  RegisterLayout layout_;
  std::vector<Entry> entries_;
};

struct EnsembleComponent {
  double probability;
  SparseState state;
};

/// A mixed state as a probabilistic mixture of pure states.
class Ensemble {
 public:
  explicit Ensemble(std::vector<EnsembleComponent> components);
  Ensemble(SparseState pure);  // NOLINT(google-explicit-constructor)

  std::span<const EnsembleComponent> components() const noexcept {
    return components_;
  }
  Index dim() const noexcept { return components_.front().state.dim(); }

 private:
  std::vector<EnsembleComponent> components_;
};

SparseState max_entangled(Index dim, std::string name = "X");
/// |Z_N>^A |Z_N>^B.
SparseState zero_product(Index dim, std::string name = "X");
/// Joint state on layout (first registers, then second registers).
SparseState tensor(const SparseState& first, const SparseState& second);

/// |<phi|Psi_N>|^2 = |sum_x amp(x,x)|^2 / N.
double fidelity(const SparseState& state);
double fidelity(const SparseState& state, Index dim);
/// Probability-weighted mean of component fidelities.
double fidelity(const Ensemble& ensemble);
double fidelity(const Ensemble& ensemble, Index dim);

/// Sum of diagonal amplitudes.
Complex diagonal_sum(const SparseState& state);
/// Squared length of the projection onto the diagonal subspace.
double fidelity_with_diagonal(const SparseState& state);
/// Normalized projection onto the diagonal subspace.
SparseState diagonal_part(const SparseState& state);

/// <first|second>; layouts must have equal dimension.
Complex inner_product(const SparseState& first, const SparseState& second);
/// |<first|second>|^2, insensitive to global phase.
double state_fidelity(const SparseState& first, const SparseState& second);
/// Pure-state trace distance sqrt(1 - |<first|second>|^2).
double trace_distance(const SparseState& first, const SparseState& second);

/// |a>|b> -> |perm[a]>|perm[b]>. Throws Errc::kNotBijective.
SparseState apply_permutation_both(const SparseState& state,
                                   std::span<const Index> perm);

/// |x>|y> -> |g_y(x)>|h_y(x)>|y> on both sides. Registers `x_register` (dim N)
/// and `y_register` (dim K) must be adjacent in that order; they become
/// G (dim L), H (dim W), Y (dim K).
SparseState apply_scramble_both(const SparseState& state,
                                const ScramblePerm& perm,
                                std::string_view x_register = "X",
                                std::string_view y_register = "Y");

/// Result of Alice and Bob measuring one register each and comparing.
struct OutcomeSplit {
  struct Branch {
    Index outcome;
    double probability;
    SparseState state;  // measured register removed, renormalized
  };
  std::vector<Branch> matches;
  double mismatch_probability = 0.0;
  /// Mass of matching branches dropped below kBranchDropThreshold.
  double residue = 0.0;
};

/// Alice applies the Fourier operator (entries w^{-xy}/sqrt(L)) to `reg`,
/// Bob its inverse, or both apply the Hadamard operator; both then measure
/// and compare. Computed without building the L^2 outcome superposition.
OutcomeSplit fourier_measure_compare(const SparseState& state,
                                     std::string_view reg, bool use_hadamard);

/// Computational-basis measurement of `reg` on both sides.
struct ComputationalSplit {
  struct Mismatch {
    Index outcome_a;
    Index outcome_b;
    double probability;
  };
  std::vector<OutcomeSplit::Branch> matches;
  std::vector<Mismatch> mismatches;
  double residue = 0.0;
};
ComputationalSplit measure_both(const SparseState& state, std::string_view reg);

/// Numerical rank of the amplitude matrix.
std::size_t schmidt_rank(const SparseState& state);
/// Tr_B |phi><phi| as a dense dim x dim matrix.
Eigen::MatrixXcd reduced_density_a(const SparseState& state);

/// sqrt(1-eps) Psi_N + sqrt(eps) |noise>, with |noise> a seeded random unit
/// vector orthogonal to Psi_N (inside the diagonal subspace when asked).
SparseState random_state_near_target(Index dim, double epsilon,
                                     bool diagonal_only, std::uint64_t seed);

/// (1 - eps') Psi_N + eps' |Z_N,Z_N> with eps' = eps N / (N - 1); fidelity
/// exactly 1 - eps.
Ensemble adversarial_mixture(Index dim, double epsilon);

}  // namespace epurify

#endif  // EPURIFY_QSTATE_HPP_
