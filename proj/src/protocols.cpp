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

#include "epurify/protocols.hpp"

#include <algorithm>
#include <bit>
#include <map>
#include <numeric>
#include <string>
#include <utility>

#include "epurify/error.hpp"
#include "epurify/rng.hpp"

namespace epurify {

namespace {

// A branch of one protocol step; an empty state means FAIL.
struct StepBranch {
  Transcript events;
  double probability;
  std::optional<SparseState> state;
};

struct Step {
  std::vector<StepBranch> branches;
  double residue = 0.0;
  std::vector<TrajectoryStage> stages;  // filled only when asked
  Index output_aux_rank = 1;            // entanglement the outcome consumed
  std::optional<LambdaWeights> lambdas;
};

// Terminal branches of one component under one choice of randomness.
struct Chain {
  std::vector<SuccessBranch> successes;
  std::vector<FailBranch> failures;
  double residue = 0.0;
};

std::string dims_message(const char* what, Index got, Index want) {
  return std::string(what) + " dimension " + std::to_string(got) +
         ", expected " + std::to_string(want);
}

bool hadamard_for(const ProtocolSpec& spec) {
  const Index L = spec.perm->params().L;
  return spec.use_hadamard.value_or(std::has_single_bit(L));
}

// ------------------------------------------------------------------ steps

Step permutation_step(const SparseState& x, Index inner_dim, Index aux_dim,
                      std::span<const Index> perm, bool keep_stages) {
  const Index n = x.dim();
  const Index measured = n / inner_dim;
  Step step;
  SparseState permuted = apply_permutation_both(x, perm);
  if (keep_stages) step.stages.push_back({"permute", permuted, 1});

  auto finish = [&](SparseState out) {
    if (aux_dim > 1) out = tensor(out, max_entangled(aux_dim, "Y"));
    return out;
  };
  step.output_aux_rank = aux_dim;
  if (measured == 1) {
    step.branches.push_back(
        {{}, 1.0, finish(permuted.relabeled(RegisterLayout::single("O", n)))});
    return step;
  }
  const RegisterLayout split_layout =
      RegisterLayout::single("O", inner_dim)
          .concat(RegisterLayout::single("R", measured));
  const ComputationalSplit split =
      measure_both(permuted.relabeled(split_layout), "R");
  for (const auto& m : split.matches) {
    step.branches.push_back({{{"labels", {m.outcome, m.outcome}}},
                             m.probability,
                             finish(m.state.relabeled(
                                 RegisterLayout::single("O", inner_dim)))});
  }
  for (const auto& m : split.mismatches) {
    step.branches.push_back({{{"labels", {m.outcome_a, m.outcome_b}}},
                             m.probability,
                             finish(zero_product(inner_dim, "O"))});
  }
  step.residue = split.residue;
  return step;
}

Step hash_step(const SparseState& x, std::span<const Index> r) {
  const std::size_t s = r.size();
  double weights[3] = {0.0, 0.0, 0.0};
  std::map<Index, double> syndrome_mass;
  std::vector<SparseState::Entry> kept;
  for (const auto& e : x.entries()) {
    const Index diff = e.a ^ e.b;
    Index syndrome = 0;
    for (std::size_t j = 0; j < s; ++j) {
      syndrome |= static_cast<Index>(std::popcount(diff & r[j]) & 1) << j;
    }
    const double w = std::norm(e.amp);
    if (diff == 0) {
      weights[0] += w;
    } else if (syndrome == 0) {
      weights[1] += w;
    } else {
      weights[2] += w;
    }
    if (syndrome == 0) {
      kept.push_back(e);
    } else {
      syndrome_mass[syndrome] += w;
    }
  }
  Step step;
  step.lambdas = LambdaWeights{weights[0], weights[1], weights[2]};
  step.output_aux_rank = Index{1} << s;
  const double success = weights[0] + weights[1];
  if (success >= kBranchDropThreshold) {
    step.branches.push_back(
        {{{"syndrome", std::vector<Index>(s, 0)}},
         success,
         SparseState::normalized(x.layout(), std::move(kept))});
  } else {
    step.residue += success;
  }
  for (const auto& [syndrome, mass] : syndrome_mass) {
    std::vector<Index> bits(s);
    for (std::size_t j = 0; j < s; ++j) bits[j] = (syndrome >> j) & 1;
    step.branches.push_back({{{"syndrome", std::move(bits)}}, mass, {}});
  }
  return step;
}

Step scramble_step(const SparseState& x, const ScramblePerm& perm,
                   bool use_hadamard, bool keep_stages) {
  const ScrambleParams& p = perm.params();
  if (x.dim() != p.N) {
    throw Error(Errc::kDimensionMismatch, dims_message("input", x.dim(), p.N));
  }
  if (p.K < 2) {
    throw Error(Errc::kInvalidArgument,
                "scrambling needs an auxiliary dimension of at least 2");
  }
  Step step;
  const SparseState joint =
      tensor(x.flattened("X"), max_entangled(p.K, "Y"));
  SparseState scrambled = apply_scramble_both(joint, perm, "X", "Y");
  if (keep_stages) {
    step.stages.push_back({"auxiliary", joint, p.K});
    step.stages.push_back({"scramble", scrambled, 1});
  }
  OutcomeSplit split = fourier_measure_compare(scrambled, "G", use_hadamard);
  for (auto& m : split.matches) {
    step.branches.push_back(
        {{{"compare", {m.outcome}}}, m.probability, std::move(m.state)});
  }
  if (split.mismatch_probability > 0.0) {
    step.branches.push_back(
        {{{"compare_mismatch", {}}}, split.mismatch_probability, {}});
  }
  step.residue = split.residue;
  return step;
}

// ------------------------------------------------------------ randomness

void validate_permutation(std::span<const Index> perm, Index n) {
  if (perm.size() != n) {
    throw Error(Errc::kDimensionMismatch,
                dims_message("permutation", perm.size(), n));
  }
  std::vector<bool> seen(n, false);
  for (const Index v : perm) {
    if (v >= n || seen[v]) {
      throw Error(Errc::kNotBijective, "values are not a permutation of [0, " +
                                           std::to_string(n) + ")");
    }
    seen[v] = true;
  }
}

void validate_hash_vectors(std::span<const Index> r, unsigned s, Index n) {
  if (r.size() != s) {
    throw Error(Errc::kInvalidArgument,
                "expected " + std::to_string(s) + " hash vectors, got " +
                    std::to_string(r.size()));
  }
  for (const Index v : r) {
    if (v >= n) {
      throw Error(Errc::kOutOfRange, "hash vector " + std::to_string(v) +
                                         " outside [0, " + std::to_string(n) +
                                         ")");
    }
  }
}

bool uses_permutation(ProtocolKind kind) {
  return kind == ProtocolKind::kRandomPermutation;
}
bool uses_hash(ProtocolKind kind) {
  return kind == ProtocolKind::kHashCompare ||
         kind == ProtocolKind::kCompleteScrambling;
}

std::vector<Index> draw_randomness(const ProtocolSpec& spec, Index n, Rng& rng) {
  if (uses_permutation(spec.kind)) return random_permutation(n, rng);
  if (uses_hash(spec.kind)) {
    std::vector<Index> r(spec.hash_rounds);
    for (auto& v : r) v = rng.below(n);
    return r;
  }
  return {};
}

struct Choice {
  std::vector<Index> values;
  double weight;
};

std::vector<Choice> randomness_choices(const ProtocolSpec& spec, Index n) {
  const Randomness& rand = spec.randomness;
  if (!uses_permutation(spec.kind) && !uses_hash(spec.kind)) {
    return {{{}, 1.0}};
  }
  if (rand.kind == Randomness::Kind::kExplicit) {
    if (uses_permutation(spec.kind)) {
      validate_permutation(rand.values, n);
    } else {
      validate_hash_vectors(rand.values, spec.hash_rounds, n);
    }
    return {{rand.values, 1.0}};
  }
  if (rand.kind == Randomness::Kind::kSampled) {
    Rng rng(rand.seed);
    return {{draw_randomness(spec, n, rng), 1.0}};
  }
  std::vector<Choice> out;
  if (uses_permutation(spec.kind)) {
    if (n > kMaxEnumeratedPermutation) {
      throw Error(Errc::kInvalidArgument,
                  "enumerating all permutations needs N <= " +
                      std::to_string(kMaxEnumeratedPermutation));
    }
    std::vector<Index> perm(n);
    std::iota(perm.begin(), perm.end(), Index{0});
    do {
      out.push_back({perm, 0.0});
    } while (std::next_permutation(perm.begin(), perm.end()));
  } else {
    Index count = 1;
    for (unsigned j = 0; j < spec.hash_rounds; ++j) {
      if (count > kMaxEnumeratedHashTuples / n) {
        throw Error(Errc::kInvalidArgument,
                    "enumerating all hash vectors needs N^s <= " +
                        std::to_string(kMaxEnumeratedHashTuples));
      }
      count *= n;
    }
    for (Index code = 0; code < count; ++code) {
      std::vector<Index> r(spec.hash_rounds);
      Index rest = code;
      for (unsigned j = 0; j < spec.hash_rounds; ++j) {
        r[j] = rest % n;
        rest /= n;
      }
      out.push_back({std::move(r), 0.0});
    }
  }
  const double weight = 1.0 / static_cast<double>(out.size());
  for (auto& c : out) c.weight = weight;
  return out;
}

// ------------------------------------------------------------ validation

void validate(const ProtocolSpec& spec, Index n) {
  switch (spec.kind) {
    case ProtocolKind::kRandomPermutation: {
      const Index M = spec.output_dim;
      const Index K = spec.aux_dim;
      if (K == 0 || M == 0 || M % K != 0 || n % (M / K) != 0 ||
          M / K > n) {
        throw Error(Errc::kInvalidArgument,
                    "random permutation needs K | M and (M/K) | N, got N=" +
                        std::to_string(n) + " M=" + std::to_string(M) +
                        " K=" + std::to_string(K));
      }
      break;
    }
    case ProtocolKind::kHashCompare:
    case ProtocolKind::kCompleteScrambling:
      if (!std::has_single_bit(n) || n < 2) {
        throw Error(Errc::kInvalidArgument,
                    "hash-and-compare needs N a power of 2, got " +
                        std::to_string(n));
      }
      if (spec.hash_rounds > kMaxHashRounds) {
        throw Error(Errc::kOutOfRange,
                    "at most " + std::to_string(kMaxHashRounds) +
                        " hash rounds");
      }
      if (spec.kind == ProtocolKind::kHashCompare) break;
      [[fallthrough]];
    case ProtocolKind::kSimpleScrambling:
      if (!spec.perm) {
        throw Error(Errc::kInvalidArgument, "scrambling needs a permutation");
      }
      if (spec.perm->params().N != n) {
        throw Error(Errc::kDimensionMismatch,
                    dims_message("input", n, spec.perm->params().N));
      }
      if (hadamard_for(spec) && !std::has_single_bit(spec.perm->params().L)) {
        throw Error(Errc::kInvalidArgument,
                    "Hadamard compare needs L a power of 2");
      }
      break;
  }
}

// ----------------------------------------------------------------- chains

TranscriptEvent randomness_event(const ProtocolSpec& spec,
                                 const std::vector<Index>& values) {
  return {uses_permutation(spec.kind) ? "permutation" : "hash_vectors", values};
}

Transcript joined(Transcript head, const Transcript& tail) {
  head.insert(head.end(), tail.begin(), tail.end());
  return head;
}

Chain run_chain(const ProtocolSpec& spec, const SparseState& x,
                const std::vector<Index>& randomness) {
  Transcript prefix;
  if (uses_permutation(spec.kind) || uses_hash(spec.kind)) {
    prefix.push_back(randomness_event(spec, randomness));
  }
  Chain chain;
  auto emit = [&](const Transcript& events, double probability,
                  std::optional<SparseState> state,
                  std::optional<LambdaWeights> lambdas) {
    if (state) {
      const double f = fidelity(*state);
      chain.successes.push_back({events, 0, probability, std::move(*state), f,
                                 lambdas});
    } else {
      chain.failures.push_back({events, 0, probability, lambdas});
    }
  };

  switch (spec.kind) {
    case ProtocolKind::kRandomPermutation: {
      Step step = permutation_step(x, spec.output_dim / spec.aux_dim,
                                   spec.aux_dim, randomness, false);
      for (auto& b : step.branches) {
        emit(joined(prefix, b.events), b.probability, std::move(b.state), {});
      }
      chain.residue = step.residue;
      break;
    }
    case ProtocolKind::kSimpleScrambling: {
      Step step = scramble_step(x, *spec.perm, hadamard_for(spec), false);
      for (auto& b : step.branches) {
        emit(b.events, b.probability, std::move(b.state), {});
      }
      chain.residue = step.residue;
      break;
    }
    case ProtocolKind::kHashCompare: {
      Step step = hash_step(x, randomness);
      for (auto& b : step.branches) {
        emit(joined(prefix, b.events), b.probability, std::move(b.state),
             step.lambdas);
      }
      chain.residue = step.residue;
      break;
    }
    case ProtocolKind::kCompleteScrambling: {
      Step hash = hash_step(x, randomness);
      chain.residue = hash.residue;
      for (auto& b : hash.branches) {
        const Transcript head = joined(prefix, b.events);
        if (!b.state) {
          emit(head, b.probability, {}, hash.lambdas);
          continue;
        }
        Step scramble =
            scramble_step(*b.state, *spec.perm, hadamard_for(spec), false);
        for (auto& c : scramble.branches) {
          emit(joined(head, c.events), b.probability * c.probability,
               std::move(c.state), hash.lambdas);
        }
        chain.residue += b.probability * scramble.residue;
      }
      break;
    }
  }
  return chain;
}

void fill_metadata(const ProtocolSpec& spec, Index n, OutcomeDistribution& d,
                   std::size_t choices) {
  auto& m = d.metadata;
  m["N"] = static_cast<double>(n);
  m["M"] = static_cast<double>(d.output_dim);
  m["randomness_choices"] = static_cast<double>(choices);
  switch (spec.kind) {
    case ProtocolKind::kRandomPermutation:
      m["K"] = static_cast<double>(spec.aux_dim);
      break;
    case ProtocolKind::kHashCompare:
      m["K"] = std::ldexp(1.0, static_cast<int>(spec.hash_rounds));
      break;
    case ProtocolKind::kSimpleScrambling:
    case ProtocolKind::kCompleteScrambling: {
      const ScrambleParams& p = spec.perm->params();
      const double S = uses_hash(spec.kind)
                           ? std::ldexp(1.0, static_cast<int>(spec.hash_rounds))
                           : 1.0;
      m["K"] = S * static_cast<double>(p.K);
      m["L"] = static_cast<double>(p.L);
      m["W"] = static_cast<double>(p.W);
      m["hadamard"] = hadamard_for(spec) ? 1.0 : 0.0;
      break;
    }
  }
  if (uses_hash(spec.kind)) {
    m["s"] = spec.hash_rounds;
    m["S"] = std::ldexp(1.0, static_cast<int>(spec.hash_rounds));
    m["epr_pairs"] = spec.hash_rounds;
  }
}

SparseState flat_input(const SparseState& state) {
  return state.flattened("X");
}

}  // namespace

// ------------------------------------------------------------- transcript

const TranscriptEvent* find_event(const Transcript& transcript,
                                  std::string_view kind) {
  for (const auto& e : transcript) {
    if (e.kind == kind) return &e;
  }
  return nullptr;
}

// ------------------------------------------------------------ distribution

double OutcomeDistribution::success_probability() const {
  double total = 0.0;
  for (const auto& b : branches) total += b.probability;
  return total;
}

double OutcomeDistribution::total_probability() const {
  return success_probability() + fail_probability + residue;
}

double OutcomeDistribution::mean_fidelity() const {
  double total = 0.0;
  for (const auto& b : branches) total += b.probability * b.fidelity;
  return total;
}

double OutcomeDistribution::success_fidelity() const {
  const double success = success_probability();
  return success > 0.0 ? mean_fidelity() / success : 0.0;
}

// ------------------------------------------------------------------ specs

std::string_view protocol_name(ProtocolKind kind) {
  switch (kind) {
    case ProtocolKind::kRandomPermutation:
      return "random_permutation";
    case ProtocolKind::kSimpleScrambling:
      return "simple_scrambling";
    case ProtocolKind::kHashCompare:
      return "hash_compare";
    case ProtocolKind::kCompleteScrambling:
      return "complete_scrambling";
  }
  return "unknown";
}

ProtocolKind parse_protocol(std::string_view name) {
  for (const ProtocolKind k :
       {ProtocolKind::kRandomPermutation, ProtocolKind::kSimpleScrambling,
        ProtocolKind::kHashCompare, ProtocolKind::kCompleteScrambling}) {
    if (protocol_name(k) == name) return k;
  }
  throw Error(Errc::kInvalidArgument,
              "unknown protocol '" + std::string(name) + "'");
}

ProtocolSpec ProtocolSpec::random_permutation(Index M, Randomness randomness,
                                              Index K) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::kRandomPermutation;
  spec.output_dim = M;
  spec.aux_dim = K;
  spec.randomness = std::move(randomness);
  return spec;
}

ProtocolSpec ProtocolSpec::simple_scrambling(ScramblePerm perm,
                                             std::optional<bool> use_hadamard) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::kSimpleScrambling;
  spec.perm = std::move(perm);
  spec.use_hadamard = use_hadamard;
  return spec;
}

ProtocolSpec ProtocolSpec::hash_compare(unsigned s, Randomness randomness) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::kHashCompare;
  spec.hash_rounds = s;
  spec.randomness = std::move(randomness);
  return spec;
}

ProtocolSpec ProtocolSpec::complete_scrambling(ScramblePerm perm, unsigned s,
                                               Randomness randomness,
                                               std::optional<bool> use_hadamard) {
  ProtocolSpec spec;
  spec.kind = ProtocolKind::kCompleteScrambling;
  spec.perm = std::move(perm);
  spec.hash_rounds = s;
  spec.randomness = std::move(randomness);
  spec.use_hadamard = use_hadamard;
  return spec;
}

Index ProtocolSpec::input_dim() const {
  return perm ? perm->params().N : 0;
}

Index ProtocolSpec::output_dim_for(Index n) const {
  switch (kind) {
    case ProtocolKind::kRandomPermutation:
      return output_dim;
    case ProtocolKind::kHashCompare:
      return n;
    case ProtocolKind::kSimpleScrambling:
    case ProtocolKind::kCompleteScrambling:
      return perm->params().W * perm->params().K;
  }
  return 0;
}

// -------------------------------------------------------------------- runs

OutcomeDistribution run_exact(const ProtocolSpec& spec, const Ensemble& input) {
  const Index n = input.dim();
  validate(spec, n);
  const std::vector<Choice> choices = randomness_choices(spec, n);
  OutcomeDistribution dist;
  dist.protocol = std::string(protocol_name(spec.kind));
  dist.output_dim = spec.output_dim_for(n);
  fill_metadata(spec, n, dist, choices.size());

  const auto components = input.components();
  for (std::size_t c = 0; c < components.size(); ++c) {
    const SparseState x = flat_input(components[c].state);
    for (const Choice& choice : choices) {
      const double scale = components[c].probability * choice.weight;
      Chain chain = run_chain(spec, x, choice.values);
      for (auto& b : chain.successes) {
        b.component = c;
        b.probability *= scale;
        dist.branches.push_back(std::move(b));
      }
      for (auto& f : chain.failures) {
        f.component = c;
        f.probability *= scale;
        dist.fail_probability += f.probability;
        dist.failures.push_back(std::move(f));
      }
      dist.residue += scale * chain.residue;
    }
  }
  return dist;
}

OutcomeDistribution random_permutation_protocol(const Ensemble& input, Index M,
                                                Randomness mode) {
  return run_exact(ProtocolSpec::random_permutation(M, std::move(mode)), input);
}

OutcomeDistribution simple_scrambling(const Ensemble& input,
                                      const ScramblePerm& perm,
                                      std::optional<bool> use_hadamard) {
  return run_exact(ProtocolSpec::simple_scrambling(perm, use_hadamard), input);
}

OutcomeDistribution hash_and_compare(const Ensemble& input, unsigned s,
                                     Randomness r) {
  return run_exact(ProtocolSpec::hash_compare(s, std::move(r)), input);
}

OutcomeDistribution complete_scrambling(const Ensemble& input,
                                        const ScramblePerm& perm, unsigned s,
                                        Randomness r,
                                        std::optional<bool> use_hadamard) {
  return run_exact(
      ProtocolSpec::complete_scrambling(perm, s, std::move(r), use_hadamard),
      input);
}

namespace {

std::size_t pick_component(const Ensemble& input, Rng& rng) {
  const auto components = input.components();
  double u = rng.uniform();
  for (std::size_t c = 0; c + 1 < components.size(); ++c) {
    u -= components[c].probability;
    if (u < 0.0) return c;
  }
  return components.size() - 1;
}

std::vector<Index> run_randomness(const ProtocolSpec& spec, Index n, Rng& rng) {
  if (spec.randomness.kind == Randomness::Kind::kExplicit) {
    return randomness_choices(spec, n).front().values;
  }
  return draw_randomness(spec, n, rng);
}

RunRecord record_from(const ProtocolSpec& spec, std::uint64_t seed,
                      std::size_t component, Chain& chain, double u) {
  RunRecord record;
  record.protocol = std::string(protocol_name(spec.kind));
  record.seed = seed;
  record.component = component;
  double total = 0.0;
  for (const auto& b : chain.successes) total += b.probability;
  for (const auto& f : chain.failures) total += f.probability;
  double target = u * total;
  for (auto& b : chain.successes) {
    target -= b.probability;
    if (target < 0.0) {
      record.transcript = std::move(b.transcript);
      record.fidelity = b.fidelity;
      record.lambdas = b.lambdas;
      record.outcome = std::move(b.state);
      return record;
    }
  }
  for (auto& f : chain.failures) {
    target -= f.probability;
    if (target < 0.0) {
      record.transcript = std::move(f.transcript);
      record.lambdas = f.lambdas;
      return record;
    }
  }
  // Rounding left target at zero; take the last listed branch.
  if (!chain.failures.empty()) {
    record.transcript = std::move(chain.failures.back().transcript);
    record.lambdas = chain.failures.back().lambdas;
  } else {
    SuccessBranch& b = chain.successes.back();
    record.transcript = std::move(b.transcript);
    record.fidelity = b.fidelity;
    record.lambdas = b.lambdas;
    record.outcome = std::move(b.state);
  }
  return record;
}

}  // namespace

RunRecord sample_run(const ProtocolSpec& spec, const Ensemble& input,
                     std::uint64_t seed) {
  const Index n = input.dim();
  validate(spec, n);
  Rng rng(seed);
  const std::size_t component = pick_component(input, rng);
  const std::vector<Index> randomness = run_randomness(spec, n, rng);
  Chain chain = run_chain(
      spec, flat_input(input.components()[component].state), randomness);
  for (auto& b : chain.successes) b.component = component;
  for (auto& f : chain.failures) f.component = component;
  return record_from(spec, seed, component, chain, rng.uniform());
}

RunRecord replay(const ProtocolSpec& spec, const Ensemble& input,
                 const RunRecord& record) {
  const Index n = input.dim();
  validate(spec, n);
  const auto components = input.components();
  if (record.component >= components.size()) {
    throw Error(Errc::kInvalidArgument, "recorded component out of range");
  }
  std::vector<Index> randomness;
  if (uses_permutation(spec.kind) || uses_hash(spec.kind)) {
    const TranscriptEvent* event =
        find_event(record.transcript,
                   uses_permutation(spec.kind) ? "permutation" : "hash_vectors");
    if (event == nullptr) {
      throw Error(Errc::kInvalidArgument, "transcript carries no randomness");
    }
    randomness = event->values;
    if (uses_permutation(spec.kind)) {
      validate_permutation(randomness, n);
    } else {
      validate_hash_vectors(randomness, spec.hash_rounds, n);
    }
  }
  Chain chain =
      run_chain(spec, flat_input(components[record.component].state), randomness);
  RunRecord out;
  out.protocol = std::string(protocol_name(spec.kind));
  out.seed = record.seed;
  out.component = record.component;
  for (auto& b : chain.successes) {
    if (b.transcript == record.transcript) {
      out.transcript = std::move(b.transcript);
      out.fidelity = b.fidelity;
      out.lambdas = b.lambdas;
      out.outcome = std::move(b.state);
      return out;
    }
  }
  for (auto& f : chain.failures) {
    if (f.transcript == record.transcript) {
      out.transcript = std::move(f.transcript);
      out.lambdas = f.lambdas;
      return out;
    }
  }
  throw Error(Errc::kInvalidArgument,
              "transcript does not match any branch of the protocol");
}

std::vector<TrajectoryStage> trace_trajectory(const ProtocolSpec& spec,
                                              const SparseState& input,
                                              std::uint64_t seed) {
  const Index n = input.dim();
  validate(spec, n);
  Rng rng(seed);
  const std::vector<Index> randomness = run_randomness(spec, n, rng);
  std::vector<TrajectoryStage> stages;
  stages.push_back({"input", flat_input(input), 1});

  // Follows one branch of `step` and reports whether the run continues.
  auto follow = [&](Step& step, const char* label) {
    stages.insert(stages.end(), step.stages.begin(), step.stages.end());
    double total = 0.0;
    for (const auto& b : step.branches) total += b.probability;
    double target = rng.uniform() * total;
    StepBranch* chosen = &step.branches.back();
    for (auto& b : step.branches) {
      target -= b.probability;
      if (target < 0.0) {
        chosen = &b;
        break;
      }
    }
    stages.push_back({label, chosen->state, step.output_aux_rank});
    return chosen->state;
  };

  const SparseState x = flat_input(input);
  switch (spec.kind) {
    case ProtocolKind::kRandomPermutation: {
      Step step = permutation_step(x, spec.output_dim / spec.aux_dim,
                                   spec.aux_dim, randomness, true);
      follow(step, "measure");
      break;
    }
    case ProtocolKind::kSimpleScrambling: {
      Step step = scramble_step(x, *spec.perm, hadamard_for(spec), true);
      follow(step, "compare");
      break;
    }
    case ProtocolKind::kHashCompare: {
      Step step = hash_step(x, randomness);
      follow(step, "hash");
      break;
    }
    case ProtocolKind::kCompleteScrambling: {
      Step hash = hash_step(x, randomness);
      const std::optional<SparseState> kept = follow(hash, "hash");
      if (kept) {
        Step step = scramble_step(*kept, *spec.perm, hadamard_for(spec), true);
        follow(step, "compare");
      }
      break;
    }
  }
  return stages;
}

}  // namespace epurify
