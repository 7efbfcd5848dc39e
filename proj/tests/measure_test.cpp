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

#include "epurify/error.hpp"
#include "epurify/qstate.hpp"
#include "epurify/rng.hpp"
#include "oracles.hpp"

namespace epurify {
namespace {

constexpr double kTol = 1e-9;

SparseState random_pure(const RegisterLayout& layout, Rng& rng, double density) {
  std::vector<SparseState::Entry> entries;
  for (Index a = 0; a < layout.dim(); ++a) {
    for (Index b = 0; b < layout.dim(); ++b) {
      if (rng.uniform() < density) {
        entries.push_back({a, b, Complex(rng.normal(), rng.normal())});
      }
    }
  }
  entries.push_back({0, 0, 1.0});
  return SparseState::normalized(layout, std::move(entries));
}

void expect_matches_oracle(const SparseState& s, std::string_view reg,
                           bool use_hadamard) {
  const std::size_t pos = s.layout().position(reg);
  const Index L = s.layout().registers()[pos].dim;
  const Eigen::MatrixXcd op_a = use_hadamard ? oracle::hadamard(L) : oracle::fourier(L);
  const Eigen::MatrixXcd op_b =
      use_hadamard ? oracle::hadamard(L) : Eigen::MatrixXcd(oracle::fourier(L).adjoint());
  const auto expected = oracle::measure_equal(s, pos, op_a, op_b);
  const OutcomeSplit got = fourier_measure_compare(s, reg, use_hadamard);
  double matched = 0.0;
  std::size_t j = 0;
  for (const auto& want : expected) {
    matched += want.probability;
    if (want.probability < 1e-15) continue;
    ASSERT_LT(j, got.matches.size());
    const auto& branch = got.matches[j++];
    EXPECT_EQ(branch.outcome, want.outcome);
    EXPECT_NEAR(branch.probability, want.probability, kTol);
    EXPECT_NEAR(oracle::overlap(oracle::dense(branch.state), want.state), 1.0, kTol);
  }
  EXPECT_EQ(j, got.matches.size());
  EXPECT_NEAR(got.mismatch_probability, 1.0 - matched, kTol);
}

TEST(FourierCompare, MatchesDenseOracleOnRandomStates) {
  Rng rng(2024);
  const std::vector<RegisterLayout> layouts = {
      RegisterLayout({{"G", 2}, {"H", 4}}),  RegisterLayout({{"H", 4}, {"G", 4}}),
      RegisterLayout({{"G", 3}, {"H", 5}}),  RegisterLayout({{"A", 2}, {"G", 8}, {"B", 2}}),
      RegisterLayout({{"G", 4}, {"H", 2}, {"Y", 3}}), RegisterLayout::single("G", 7),
  };
  for (const auto& layout : layouts) {
    for (int trial = 0; trial < 5; ++trial) {
      const SparseState s = random_pure(layout, rng, trial % 2 ? 0.3 : 1.0);
      SCOPED_TRACE(layout.describe());
      expect_matches_oracle(s, "G", false);
      const Index L = layout.registers()[layout.position("G")].dim;
      if ((L & (L - 1)) == 0) expect_matches_oracle(s, "G", true);
    }
  }
}

TEST(FourierCompare, PerfectCorrelation) {
  for (bool h : {false, true}) {
    const SparseState s = tensor(max_entangled(4, "G"), random_state_near_target(3, 0.2, false, 8));
    const OutcomeSplit split = fourier_measure_compare(s, "G", h);
    EXPECT_NEAR(split.mismatch_probability, 0.0, kTol);
    ASSERT_EQ(split.matches.size(), 4u);
    for (const auto& b : split.matches) EXPECT_NEAR(b.probability, 0.25, kTol);
  }
}

TEST(FourierCompare, DiagonalInputsGiveEqualPostStates) {
  const ScramblePerm perm = make_multiplication_table(3, 2);
  const SparseState in = apply_scramble_both(
      tensor(random_state_near_target(8, 0.3, true, 4), max_entangled(7, "Y")), perm);
  for (bool h : {false, true}) {
    const OutcomeSplit split = fourier_measure_compare(in, "G", h);
    ASSERT_FALSE(split.matches.empty());
    for (const auto& b : split.matches) {
      EXPECT_NEAR(state_fidelity(b.state, split.matches.front().state), 1.0, kTol);
    }
  }
}

TEST(FourierCompare, HadamardNeedsPowerOfTwo) {
  const SparseState s = max_entangled(3, "G");
  EXPECT_THROW(fourier_measure_compare(s, "G", true), Error);
  EXPECT_THROW(fourier_measure_compare(s, "Q", false), Error);
}

TEST(MeasureBoth, SplitsOnComputationalDigits) {
  Rng rng(5);
  const RegisterLayout layout({{"O", 2}, {"R", 3}});
  const SparseState s = random_pure(layout, rng, 1.0);
  const auto eye = Eigen::MatrixXcd::Identity(3, 3);
  const auto expected = oracle::measure_equal(s, 1, eye, eye);
  const ComputationalSplit got = measure_both(s, "R");
  double matched = 0.0;
  ASSERT_EQ(got.matches.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    matched += expected[i].probability;
    EXPECT_NEAR(got.matches[i].probability, expected[i].probability, kTol);
    EXPECT_NEAR(oracle::overlap(oracle::dense(got.matches[i].state), expected[i].state),
                1.0, kTol);
  }
  double mismatched = 0.0;
  for (const auto& m : got.mismatches) {
    EXPECT_NE(m.outcome_a, m.outcome_b);
    mismatched += m.probability;
  }
  EXPECT_NEAR(mismatched, 1.0 - matched, kTol);
  EXPECT_EQ(got.mismatches.size(), 6u);
}

}  // namespace
}  // namespace epurify
