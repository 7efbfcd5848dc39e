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

// The four purification protocols, run either exactly (every measurement
// branch enumerated) or as seeded single runs.
//
// Classical randomness (the permutation, the hash vectors) is chosen by a
// Randomness value; quantum measurement outcomes are always enumerated by
// run_exact and drawn once per call by sample_run. Both parties share one
// process and classical messages are transcript events.

#ifndef EPURIFY_PROTOCOLS_HPP_
#define EPURIFY_PROTOCOLS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "epurify/bounds.hpp"
#include "epurify/qstate.hpp"
#include "epurify/scramble.hpp"

namespace epurify {

/// One classical record. Kinds:
///   "permutation"      the permutation drawn by Alice
///   "hash_vectors"     r_1 .. r_s
///   "syndrome"         per-round parity differences measured by Bob
///   "labels"           measured labels of Alice and Bob
///   "compare"          matching Fourier/Hadamard outcome {g}
///   "compare_mismatch" differing Fourier/Hadamard outcomes (aggregated)
struct TranscriptEvent {
  std::string kind;
  std::vector<Index> values;

  friend bool operator==(const TranscriptEvent&, const TranscriptEvent&) =
      default;
};
using Transcript = std::vector<TranscriptEvent>;

const TranscriptEvent* find_event(const Transcript& transcript,
                                  std::string_view kind);

/// Squared weights of the hash stage decomposition: diagonal part,
/// off-diagonal part with zero syndrome, off-diagonal part with nonzero
/// syndrome.
struct LambdaWeights {
  double lambda0_sq = 0.0;
  double lambda1_sq = 0.0;
  double lambda2_sq = 0.0;
};

struct SuccessBranch {
  Transcript transcript;
  std::size_t component = 0;  // index into the input ensemble
  double probability = 0.0;
  SparseState state;
  double fidelity = 0.0;  // against Psi of the output dimension
  std::optional<LambdaWeights> lambdas;
};

struct FailBranch {
  Transcript transcript;
  std::size_t component = 0;
  double probability = 0.0;
  std::optional<LambdaWeights> lambdas;
};

struct OutcomeDistribution {
  std::string protocol;
  /// Numeric parameters: N, K (auxiliary), M (output), and protocol extras.
  std::map<std::string, double> metadata;
  Index output_dim = 0;
  std::vector<SuccessBranch> branches;
  std::vector<FailBranch> failures;
  double fail_probability = 0.0;
  /// Mass of branches dropped below kBranchDropThreshold.
  double residue = 0.0;

  double success_probability() const;
  /// fail + success + residue; 1 up to rounding.
  double total_probability() const;
  /// Fidelity of the unconditioned output, FAIL counted as fidelity 0.
  double mean_fidelity() const;
  /// Fidelity of the output conditioned on success.
  double success_fidelity() const;
};

enum class ProtocolKind {
  kRandomPermutation,
  kSimpleScrambling,
  kHashCompare,
  kCompleteScrambling,
};
std::string_view protocol_name(ProtocolKind kind);
/// Parses "random_permutation", "simple_scrambling", "hash_compare",
/// "complete_scrambling". Throws Errc::kInvalidArgument.
ProtocolKind parse_protocol(std::string_view name);

/// How the protocol's classical randomness is chosen.
struct Randomness {
  enum class Kind { kEnumerate, kExplicit, kSampled };
  Kind kind = Kind::kEnumerate;
  std::vector<Index> values;  // kExplicit: the permutation or r_1 .. r_s
  std::uint64_t seed = 0;     // kSampled

  static Randomness enumerate() { return {}; }
  static Randomness fixed(std::vector<Index> values) {
    return {Kind::kExplicit, std::move(values), 0};
  }
  static Randomness sampled(std::uint64_t seed) {
    return {Kind::kSampled, {}, seed};
  }
};

/// Largest N for which every permutation is enumerated.
inline constexpr Index kMaxEnumeratedPermutation = 6;
/// Largest N^s for which every hash vector tuple is enumerated.
inline constexpr Index kMaxEnumeratedHashTuples = Index{1} << 16;
inline constexpr unsigned kMaxHashRounds = 12;

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::kRandomPermutation;
  Index output_dim = 0;  // random permutation: M
  Index aux_dim = 1;     // random permutation: K, appended as Psi_K
  std::optional<ScramblePerm> perm;
  /// Unset: Hadamard exactly when L is a power of 2.
  std::optional<bool> use_hadamard;
  unsigned hash_rounds = 0;  // s
  Randomness randomness;

  static ProtocolSpec random_permutation(Index M, Randomness randomness,
                                         Index K = 1);
  static ProtocolSpec simple_scrambling(ScramblePerm perm,
                                        std::optional<bool> use_hadamard = {});
  static ProtocolSpec hash_compare(unsigned s, Randomness randomness);
  static ProtocolSpec complete_scrambling(ScramblePerm perm, unsigned s,
                                          Randomness randomness,
                                          std::optional<bool> use_hadamard = {});

  /// Input dimension the spec accepts, or 0 when any dimension works.
  Index input_dim() const;
  /// Output dimension for an input of dimension n.
  Index output_dim_for(Index n) const;
};

/// Every branch. Randomness::kSampled draws the randomness once from its
/// seed and enumerates the measurements given it.
OutcomeDistribution run_exact(const ProtocolSpec& spec, const Ensemble& input);

OutcomeDistribution random_permutation_protocol(const Ensemble& input, Index M,
                                                Randomness mode);
OutcomeDistribution simple_scrambling(const Ensemble& input,
                                      const ScramblePerm& perm,
                                      std::optional<bool> use_hadamard = {});
OutcomeDistribution hash_and_compare(const Ensemble& input, unsigned s,
                                     Randomness r);
OutcomeDistribution complete_scrambling(const Ensemble& input,
                                        const ScramblePerm& perm, unsigned s,
                                        Randomness r,
                                        std::optional<bool> use_hadamard = {});

struct RunRecord {
  std::string protocol;
  std::uint64_t seed = 0;
  std::size_t component = 0;
  Transcript transcript;
  std::optional<SparseState> outcome;  // empty means FAIL
  double fidelity = 0.0;               // 0 for FAIL
  std::optional<LambdaWeights> lambdas;

  bool failed() const { return !outcome.has_value(); }
};

/// One seeded run: draws the ensemble component, the randomness (unless the
/// spec fixes it) and one measurement outcome.
RunRecord sample_run(const ProtocolSpec& spec, const Ensemble& input,
                     std::uint64_t seed);
/// Recomputes the outcome a recorded transcript leads to. Throws
/// Errc::kInvalidArgument when the transcript is not a reachable branch.
RunRecord replay(const ProtocolSpec& spec, const Ensemble& input,
                 const RunRecord& record);

struct TrajectoryStage {
  std::string label;
  std::optional<SparseState> state;  // empty after FAIL
  /// Schmidt rank of the entanglement consumed by this stage (1 if none).
  Index aux_rank = 1;
};
/// State after every step of one seeded run on a pure input.
std::vector<TrajectoryStage> trace_trajectory(const ProtocolSpec& spec,
                                              const SparseState& input,
                                              std::uint64_t seed);

// ------------------------------------------------------ definition checks

enum class GeppKind { kAbsolute, kDeterministic, kProbabilistic };
std::string_view gepp_kind_name(GeppKind kind);

struct GeppReport {
  GeppKind kind = GeppKind::kAbsolute;
  bool input_ok = true;       // input fidelity >= 1 - eps
  bool fail_clause = false;   // failure probability within p
  bool fidelity_clause = false;
  double fail_probability = 0.0;
  double fail_limit = 0.0;
  /// Mixture fidelity (absolute, deterministic) or fraction of successes
  /// meeting 1 - delta (probabilistic).
  double fidelity_statistic = 0.0;
  double fidelity_limit = 0.0;
  std::string detail;

  bool passed() const { return input_ok && fail_clause && fidelity_clause; }
};

/// Exact evaluation. `input_fidelity` is the fidelity of the input the
/// distribution came from.
GeppReport check_gepp_definition(const OutcomeDistribution& dist,
                                 const GeppParams& params, GeppKind kind,
                                 double input_fidelity,
                                 double tolerance = 1e-9);

/// Sampled evaluation with Wilson intervals at `z` standard errors.
GeppReport check_gepp_definition(std::span<const RunRecord> runs,
                                 const GeppParams& params, GeppKind kind,
                                 double input_fidelity, double z = 4.0);

struct Interval {
  double lower;
  double upper;
};
Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z);

}  // namespace epurify

#endif  // EPURIFY_PROTOCOLS_HPP_
