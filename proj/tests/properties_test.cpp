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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "epurify/bounds.hpp"
#include "epurify/protocols.hpp"
#include "epurify/rng.hpp"
#include "oracles.hpp"

namespace epurify {
namespace {

using Vec = std::vector<Complex>;

Vec random_vec(Rng& rng, std::size_t n) {
  Vec v(n);
  double norm = 0.0;
  for (auto& c : v) {
    c = Complex(rng.normal(), rng.normal());
    norm += std::norm(c);
  }
  for (auto& c : v) c /= std::sqrt(norm);
  return v;
}

// sqrt(1 - e) a + sqrt(e) w with w a random unit vector orthogonal to a.
Vec at_distance(const Vec& a, double e, Rng& rng) {
  Vec w = random_vec(rng, a.size());
  Complex proj = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) proj += std::conj(a[i]) * w[i];
  double norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    w[i] -= proj * a[i];
    norm += std::norm(w[i]);
  }
  Vec out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    out[i] = std::sqrt(1.0 - e) * a[i] + std::sqrt(e / norm) * w[i];
  }
  return out;
}

SparseState as_state(const Vec& v, Index n) {
  std::vector<SparseState::Entry> entries;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) entries.push_back({a, b, v[a * n + b]});
  }
  return SparseState::normalized(RegisterLayout::single("X", n), std::move(entries));
}

TEST(Properties, FidelityTriangleInequality) {
  Rng rng(101);
  const Index n = 3;
  int violations = 0;
  for (int i = 0; i < 2000; ++i) {
    const double e = 0.5 * rng.uniform();
    const double d = 0.5 * rng.uniform();
    const Vec a = random_vec(rng, n * n);
    const SparseState A = as_state(a, n);
    const SparseState B = as_state(at_distance(a, e, rng), n);
    const SparseState C = as_state(at_distance(a, d, rng), n);
    ASSERT_NEAR(state_fidelity(A, B), 1.0 - e, 1e-9);
    ASSERT_NEAR(state_fidelity(A, C), 1.0 - d, 1e-9);
    violations += state_fidelity(B, C) < 1.0 - 2.0 * (e + d) - 1e-12;
  }
  EXPECT_EQ(violations, 0);
}

TEST(Properties, TraceDistanceBound) {
  Rng rng(202);
  int violations = 0;
  for (int i = 0; i < 2000; ++i) {
    const Index n = 2 + rng.below(3);
    const SparseState A = as_state(random_vec(rng, n * n), n);
    const SparseState B = as_state(random_vec(rng, n * n), n);
    const double f = state_fidelity(A, B);
    const double d = trace_distance(A, B);
    violations += d > std::sqrt(1.0 - f) + 1e-9;
    EXPECT_NEAR(d, std::sqrt(1.0 - f), 1e-7);
  }
  EXPECT_EQ(violations, 0);
}

TEST(Properties, ProbabilityConservation) {
  Rng rng(303);
  for (int i = 0; i < 30; ++i) {
    const double eps = 0.45 * rng.uniform();
    const SparseState s = random_state_near_target(8, eps, rng.below(2), rng.next_u64());
    const ScramblePerm perm = make_multiplication_table(3, 1 + static_cast<int>(rng.below(2)));
    for (const OutcomeDistribution& d :
         {simple_scrambling(s, perm), hash_and_compare(s, 2, Randomness::enumerate()),
          complete_scrambling(s, perm, 1, Randomness::enumerate()),
          random_permutation_protocol(s, 4, Randomness::sampled(i))}) {
      EXPECT_NEAR(d.total_probability(), 1.0, 1e-9) << d.protocol;
      for (const auto& b : d.branches) EXPECT_NEAR(b.state.norm_squared(), 1.0, 1e-9);
    }
  }
}

TEST(Properties, AdversarialStateRespectsAbsoluteBound) {
  const double eps = 0.1;
  const Ensemble rho = adversarial_mixture(4, eps);
  const OutcomeDistribution rpp = random_permutation_protocol(rho, 2, Randomness::enumerate());
  EXPECT_NEAR(rpp.mean_fidelity(), absolute_upper_bound(4, 1, 2, eps), 1e-9);
  const ScramblePerm perm = make_multiplication_table(2, 1);
  const OutcomeDistribution ss = simple_scrambling(rho, perm);
  EXPECT_LE(ss.mean_fidelity(),
            absolute_upper_bound(4, perm.params().K, ss.output_dim, eps) + 1e-9);
  const OutcomeDistribution hc = hash_and_compare(rho, 1, Randomness::enumerate());
  EXPECT_LE(hc.mean_fidelity(), absolute_upper_bound(4, 2, 4, eps) + 1e-9);
}

TEST(Properties, HadamardMatchesFourierOnDiagonalInputs) {
  Rng rng(404);
  for (int i = 0; i < 20; ++i) {
    const int n = 2 + static_cast<int>(rng.below(3));
    const int l = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(n - 1)));
    const ScramblePerm perm = make_multiplication_table(n, l);
    const SparseState s =
        random_state_near_target(perm.params().N, 0.4 * rng.uniform(), true, rng.next_u64());
    const OutcomeDistribution f = simple_scrambling(s, perm, false);
    const OutcomeDistribution h = simple_scrambling(s, perm, true);
    EXPECT_NEAR(f.success_probability(), h.success_probability(), 1e-9);
    for (const auto& a : f.branches) {
      EXPECT_NEAR(state_fidelity(a.state, h.branches.front().state), 1.0, 1e-9);
    }
  }
}

TEST(Properties, SchmidtRankAlongSampledTrajectories) {
  Rng rng(505);
  const std::vector<ProtocolSpec> specs = {
      ProtocolSpec::random_permutation(2, Randomness::sampled(0)),
      ProtocolSpec::simple_scrambling(make_multiplication_table(2, 1)),
      ProtocolSpec::hash_compare(2, Randomness::sampled(0)),
      ProtocolSpec::complete_scrambling(make_multiplication_table(2, 1), 1,
                                        Randomness::sampled(0)),
  };
  int violations = 0;
  for (int i = 0; i < 200; ++i) {
    const ProtocolSpec& spec = specs[i % specs.size()];
    const SparseState s = random_state_near_target(4, 0.4 * rng.uniform(), false, i);
    const auto stages = trace_trajectory(spec, s, rng.next_u64());
    std::size_t rank = schmidt_rank(*stages.front().state);
    for (std::size_t k = 1; k < stages.size() && stages[k].state; ++k) {
      const std::size_t next = schmidt_rank(*stages[k].state);
      violations += next > rank * stages[k].aux_rank;
      rank = next;
    }
  }
  EXPECT_EQ(violations, 0);
}

}  // namespace
}  // namespace epurify
