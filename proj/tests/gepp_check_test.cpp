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
#include "epurify/error.hpp"
#include "epurify/protocols.hpp"

namespace epurify {
namespace {

TEST(Gepp, SimpleScramblingIsDeterministicallySuccessful) {
  const ScramblePerm perm = make_multiplication_table(3, 1);
  const ScrambleParams& p = perm.params();
  for (double eps : {0.05, 0.1, 0.3}) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const SparseState s = random_state_near_target(8, eps, true, seed);
      const GeppReport r =
          check_gepp_definition(simple_scrambling(s, perm),
                                simple_scrambling_params(p.N, p.K, p.W, eps),
                                GeppKind::kDeterministic, fidelity(s));
      EXPECT_TRUE(r.passed()) << r.detail;
    }
  }
}

TEST(Gepp, RandomPermutationIsAbsolutelySuccessful) {
  for (double eps : {0.05, 0.2}) {
    const SparseState s = random_state_near_target(4, eps, true, 3);
    const GeppReport r = check_gepp_definition(
        random_permutation_protocol(s, 2, Randomness::enumerate()),
        random_permutation_params(4, 1, 2, eps), GeppKind::kAbsolute, fidelity(s));
    EXPECT_TRUE(r.passed()) << r.detail;
    EXPECT_NEAR(r.fidelity_statistic, r.fidelity_limit, 1e-9);
  }
}

TEST(Gepp, PerfectFidelityIsUnreachable) {
  const SparseState s = random_state_near_target(8, 0.1, true, 1);
  const ScramblePerm perm = make_multiplication_table(3, 1);
  GeppParams params = simple_scrambling_params(8, 7, 4, 0.1);
  params.delta = 0.0;
  for (GeppKind kind : {GeppKind::kAbsolute, GeppKind::kDeterministic}) {
    EXPECT_FALSE(check_gepp_definition(simple_scrambling(s, perm), params, kind,
                                       fidelity(s))
                     .passed());
  }
  GeppParams rp = random_permutation_params(4, 1, 2, 0.1);
  rp.delta = 0.0;
  EXPECT_FALSE(check_gepp_definition(
                   random_permutation_protocol(random_state_near_target(4, 0.1, true, 2), 2,
                                               Randomness::enumerate()),
                   rp, GeppKind::kAbsolute, 0.9)
                   .passed());
}

TEST(Gepp, AbsoluteRejectsAnyFailure) {
  const SparseState s = random_state_near_target(8, 0.1, true, 1);
  GeppParams params = simple_scrambling_params(8, 7, 4, 0.1);
  params.delta = 1.0;
  const GeppReport r = check_gepp_definition(
      simple_scrambling(s, make_multiplication_table(3, 1)), params,
      GeppKind::kAbsolute, fidelity(s));
  EXPECT_FALSE(r.fail_clause);
}

TEST(Gepp, InputBelowThresholdFails) {
  const SparseState s = random_state_near_target(8, 0.1, true, 1);
  const GeppReport r = check_gepp_definition(
      simple_scrambling(s, make_multiplication_table(3, 1)),
      simple_scrambling_params(8, 7, 4, 0.05), GeppKind::kDeterministic, fidelity(s));
  EXPECT_FALSE(r.input_ok);
  EXPECT_FALSE(r.passed());
}

TEST(Gepp, DimensionMismatch) {
  const SparseState s = random_state_near_target(8, 0.1, true, 1);
  const OutcomeDistribution d = simple_scrambling(s, make_multiplication_table(3, 1));
  try {
    check_gepp_definition(d, simple_scrambling_params(8, 7, 2, 0.1),
                          GeppKind::kDeterministic, 0.9);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::kDimensionMismatch);
  }
  EXPECT_THROW(check_gepp_definition(d, simple_scrambling_params(8, 3, 4, 0.1),
                                     GeppKind::kDeterministic, 0.9),
               Error);
}

TEST(Gepp, ProbabilisticGroupsByRandomness) {
  // Two equally likely hash choices; only the first yields a good output.
  OutcomeDistribution d;
  d.output_dim = 2;
  d.metadata = {{"N", 2}, {"K", 2}};
  d.branches.push_back({{{"hash_vectors", {0}}}, 0, 0.5, max_entangled(2), 1.0, {}});
  d.branches.push_back({{{"hash_vectors", {1}}}, 0, 0.3, zero_product(2), 0.5, {}});
  d.fail_probability = 0.2;
  GeppParams params{2, 2, 2, 0.1, 0.1, 0.25, 0.4};
  GeppReport r = check_gepp_definition(d, params, GeppKind::kProbabilistic, 0.95);
  EXPECT_NEAR(r.fidelity_statistic, 0.5 / 0.8, 1e-12);
  EXPECT_TRUE(r.passed()) << r.detail;
  params.q = 0.3;
  EXPECT_FALSE(check_gepp_definition(d, params, GeppKind::kProbabilistic, 0.95)
                   .fidelity_clause);
  params.p = 0.1;
  EXPECT_FALSE(check_gepp_definition(d, params, GeppKind::kProbabilistic, 0.95)
                   .fail_clause);
}

TEST(Gepp, CompleteScramblingMeetsProbabilisticParameters) {
  const ScramblePerm perm = make_multiplication_table(3, 2);
  const ScrambleParams& sp = perm.params();
  for (double eps : {0.02, 0.05}) {
    const SparseState s = random_state_near_target(8, eps, false, 6);
    const OutcomeDistribution d =
        complete_scrambling(s, perm, 2, Randomness::enumerate());
    const GeppParams params = complete_scrambling_prediction(sp.N, sp.K, sp.W, 4, eps);
    const GeppReport r =
        check_gepp_definition(d, params, GeppKind::kProbabilistic, fidelity(s));
    EXPECT_TRUE(r.passed()) << r.detail;
  }
}

TEST(Gepp, SampledDeterministicCheck) {
  const ScramblePerm perm = make_multiplication_table(3, 1);
  const ProtocolSpec spec = ProtocolSpec::simple_scrambling(perm);
  const SparseState s = random_state_near_target(8, 0.1, true, 2);
  std::vector<RunRecord> runs;
  for (std::uint64_t i = 0; i < 2000; ++i) runs.push_back(sample_run(spec, s, i));
  const GeppReport r = check_gepp_definition(runs, simple_scrambling_params(8, 7, 4, 0.1),
                                             GeppKind::kDeterministic, fidelity(s));
  EXPECT_TRUE(r.passed()) << r.detail;
  EXPECT_NEAR(r.fail_probability, 1.0 / 17.5, 0.03);

  std::vector<RunRecord> failing(100);
  for (auto& f : failing) f.transcript = {{"compare_mismatch", {}}};
  const GeppReport bad = check_gepp_definition(
      failing, simple_scrambling_params(8, 7, 4, 0.1), GeppKind::kDeterministic, 0.9);
  EXPECT_FALSE(bad.fail_clause);
  EXPECT_FALSE(bad.fidelity_clause);
  EXPECT_THROW(check_gepp_definition(std::vector<RunRecord>{},
                                     simple_scrambling_params(8, 7, 4, 0.1),
                                     GeppKind::kDeterministic, 0.9),
               Error);
}

TEST(Gepp, WilsonInterval) {
  // Reference values for 8 of 10 at z = 1.96.
  const Interval i = wilson_interval(8, 10, 1.96);
  EXPECT_NEAR(i.lower, 0.4902, 1e-4);
  EXPECT_NEAR(i.upper, 0.9433, 1e-4);
  const Interval none = wilson_interval(0, 100, 4.0);
  EXPECT_EQ(none.lower, 0.0);
  EXPECT_GT(none.upper, 0.0);
  const Interval empty = wilson_interval(0, 0, 4.0);
  EXPECT_EQ(empty.lower, 0.0);
  EXPECT_EQ(empty.upper, 1.0);
}

TEST(Gepp, KindNames) {
  EXPECT_EQ(gepp_kind_name(GeppKind::kAbsolute), "absolute");
  EXPECT_EQ(gepp_kind_name(GeppKind::kDeterministic), "deterministic");
  EXPECT_EQ(gepp_kind_name(GeppKind::kProbabilistic), "probabilistic");
}

}  // namespace
}  // namespace epurify
