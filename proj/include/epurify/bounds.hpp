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

// Closed-form predictions for the purification protocols. Functions marked
// "exact" return the value a simulation must reproduce; the others are
// one-sided guarantees.

#ifndef EPURIFY_BOUNDS_HPP_
#define EPURIFY_BOUNDS_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <string>

namespace epurify {

/// Protocol guarantee <N, K, M, eps, delta, p, q>: input dimension N,
/// auxiliary dimension K, output dimension M, input infidelity eps, output
/// infidelity delta, failure probability p, and the probability q of missing
/// the fidelity target given success.
struct GeppParams {
  std::uint64_t N = 0;
  std::uint64_t K = 1;
  std::uint64_t M = 0;
  double epsilon = 0.0;
  double delta = 0.0;
  std::optional<double> p;
  std::optional<double> q;
};

/// Largest mean output fidelity any never-failing protocol can reach from the
/// worst input of fidelity 1 - eps: 1 - ((M-K)/M)(N/(N-1)) eps. Requires
/// K <= M <= N K, M/K and N K/M integral, eps < 1.
double absolute_upper_bound(std::uint64_t N, std::uint64_t K, std::uint64_t M,
                            double epsilon);

/// Exact mean output fidelity of the random permutation protocol on a
/// diagonal input of fidelity 1 - eps (K = 1).
double random_permutation_fidelity(std::uint64_t N, std::uint64_t M,
                                   double epsilon);
/// Exact probability that the two measured labels differ when the input has
/// off-diagonal weight delta: (N-M)/(N-1) delta.
double random_permutation_mismatch(std::uint64_t N, std::uint64_t M,
                                   double off_diagonal_weight);
GeppParams random_permutation_params(std::uint64_t N, std::uint64_t K,
                                     std::uint64_t M, double epsilon);

struct SimpleScramblingPrediction {
  double success_probability;  // exact: 1 - eps N(L-1)/(L(N-1))
  double success_fidelity;     // exact: (1-eps) / success_probability
  double intermediate_bound;   // 1 - 2 eps (W-1)/(N-1)
  double published_bound;      // 1 - (2W/N) eps
};
/// Diagonal inputs of fidelity 1 - eps. Requires N = W L, eps < 1/2.
SimpleScramblingPrediction simple_scrambling_prediction(std::uint64_t N,
                                                        std::uint64_t L,
                                                        std::uint64_t W,
                                                        double epsilon);
/// <N, K, W K, eps, (2W/N) eps, eps>.
GeppParams simple_scrambling_params(std::uint64_t N, std::uint64_t K,
                                    std::uint64_t W, double epsilon);

struct HashComparePrediction {
  double fail_bound;               // eps
  double diagonal_fidelity_bound;  // 1 - 2 eps / sqrt(S)
  double confidence;               // 1 - 1/sqrt(S)
  double mean_lambda1_bound;       // eps / S
};
/// Requires S a power of 2 and eps < 1/2.
HashComparePrediction hash_compare_prediction(std::uint64_t S, double epsilon);

/// <N, S K, W K, eps, (4W/N + 4/sqrt(S)) eps, 2 eps + sqrt(2 eps / sqrt(S)),
/// 1/sqrt(S)>. Requires W | N and S a power of 2.
GeppParams complete_scrambling_prediction(std::uint64_t N, std::uint64_t K,
                                          std::uint64_t W, std::uint64_t S,
                                          double epsilon);
/// The same guarantee in its headline form for W/N = 2^-t and S = 2^(2t):
/// delta = eps / 2^(t-3), p = 2 eps + sqrt(2 eps / 2^t), q = 2^-t.
GeppParams complete_scrambling_headline(std::uint64_t N, std::uint64_t K,
                                        int t, double epsilon);

struct BoundEntry {
  std::map<std::string, double> inputs;
  double value = 0.0;
  std::string formula;
};
/// Named predictions, keyed "<protocol>.<quantity>".
using BoundSet = std::map<std::string, BoundEntry>;

BoundSet random_permutation_bounds(std::uint64_t N, std::uint64_t M,
                                   double epsilon);
BoundSet simple_scrambling_bounds(std::uint64_t N, std::uint64_t K,
                                  std::uint64_t W, std::uint64_t L,
                                  double epsilon);
BoundSet hash_compare_bounds(std::uint64_t S, double epsilon);
BoundSet complete_scrambling_bounds(std::uint64_t N, std::uint64_t K,
                                    std::uint64_t W, std::uint64_t S,
                                    double epsilon);

}  // namespace epurify

#endif  // EPURIFY_BOUNDS_HPP_
