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

#include "epurify/bounds.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "epurify/error.hpp"

namespace epurify {

namespace {

double as_real(std::uint64_t v) { return static_cast<double>(v); }

void require(bool condition, const std::string& message) {
  if (!condition) throw Error(Errc::kInvalidArgument, message);
}

// Bounds on probabilities and infidelities are capped at 1, where they stop
// saying anything.
double capped(double v) { return std::min(v, 1.0); }

void require_epsilon(double epsilon, double upper) {
  if (!(epsilon >= 0.0 && epsilon < upper)) {
    throw Error(Errc::kOutOfRange, "epsilon must lie in [0, " +
                                       std::to_string(upper) + ")");
  }
}

}  // namespace

double absolute_upper_bound(std::uint64_t N, std::uint64_t K, std::uint64_t M,
                            double epsilon) {
  require(N >= 2 && K >= 1, "need N >= 2 and K >= 1");
  require(K <= M && M <= N * K, "need K <= M <= N K");
  require(M % K == 0 && (N * K) % M == 0, "need M/K and N K/M integral");
  require_epsilon(epsilon, 1.0);
  return 1.0 - (as_real(M - K) / as_real(M)) * (as_real(N) / as_real(N - 1)) *
                   epsilon;
}

double random_permutation_fidelity(std::uint64_t N, std::uint64_t M,
                                   double epsilon) {
  return absolute_upper_bound(N, 1, M, epsilon);
}

double random_permutation_mismatch(std::uint64_t N, std::uint64_t M,
                                   double off_diagonal_weight) {
  require(N >= 2 && M >= 1 && N % M == 0, "need M | N and N >= 2");
  return as_real(N - M) / as_real(N - 1) * off_diagonal_weight;
}

GeppParams random_permutation_params(std::uint64_t N, std::uint64_t K,
                                     std::uint64_t M, double epsilon) {
  GeppParams params;
  params.N = N;
  params.K = K;
  params.M = M;
  params.epsilon = epsilon;
  params.delta = 1.0 - absolute_upper_bound(N, K, M, epsilon);
  params.p = 0.0;
  return params;
}

SimpleScramblingPrediction simple_scrambling_prediction(std::uint64_t N,
                                                        std::uint64_t L,
                                                        std::uint64_t W,
                                                        double epsilon) {
  require(N >= 2 && L >= 1 && W >= 1 && N == W * L, "need N = W L, N >= 2");
  require_epsilon(epsilon, 0.5);
  const double n = as_real(N);
  const double l = as_real(L);
  const double success =
      1.0 - epsilon * n * (l - 1.0) / (l * (n - 1.0));
  return {success, (1.0 - epsilon) / success,
          1.0 - 2.0 * epsilon * (as_real(W) - 1.0) / (n - 1.0),
          1.0 - 2.0 * as_real(W) / n * epsilon};
}

GeppParams simple_scrambling_params(std::uint64_t N, std::uint64_t K,
                                    std::uint64_t W, double epsilon) {
  require(W >= 1 && N % W == 0, "need W | N");
  GeppParams params;
  params.N = N;
  params.K = K;
  params.M = W * K;
  params.epsilon = epsilon;
  params.delta = 2.0 * as_real(W) / as_real(N) * epsilon;
  params.p = epsilon;
  return params;
}

HashComparePrediction hash_compare_prediction(std::uint64_t S, double epsilon) {
  require(S >= 1 && std::has_single_bit(S), "S must be a power of 2");
  require_epsilon(epsilon, 0.5);
  const double root = std::sqrt(as_real(S));
  return {epsilon, 1.0 - 2.0 * epsilon / root, 1.0 - 1.0 / root,
          epsilon / as_real(S)};
}

GeppParams complete_scrambling_prediction(std::uint64_t N, std::uint64_t K,
                                          std::uint64_t W, std::uint64_t S,
                                          double epsilon) {
  require(W >= 1 && N >= W && N % W == 0, "need W | N");
  require(S >= 1 && std::has_single_bit(S), "S must be a power of 2");
  require_epsilon(epsilon, 0.5);
  const double root = std::sqrt(as_real(S));
  GeppParams params;
  params.N = N;
  params.K = S * K;
  params.M = W * K;
  params.epsilon = epsilon;
  params.delta = capped((4.0 * as_real(W) / as_real(N) + 4.0 / root) * epsilon);
  params.p = capped(2.0 * epsilon + std::sqrt(2.0 * epsilon / root));
  params.q = 1.0 / root;
  return params;
}

GeppParams complete_scrambling_headline(std::uint64_t N, std::uint64_t K,
                                        int t, double epsilon) {
  require(t >= 1 && t < 32, "t out of range");
  const std::uint64_t scale = std::uint64_t{1} << t;
  require(N % scale == 0 && N > scale, "need 2^t < N with 2^t | N");
  require_epsilon(epsilon, 0.5);
  GeppParams params;
  params.N = N;
  params.K = scale * scale * K;
  params.M = N / scale * K;
  params.epsilon = epsilon;
  params.delta = capped(epsilon / std::ldexp(1.0, t - 3));
  params.p = capped(2.0 * epsilon + std::sqrt(2.0 * epsilon / as_real(scale)));
  params.q = 1.0 / as_real(scale);
  return params;
}

BoundSet random_permutation_bounds(std::uint64_t N, std::uint64_t M,
                                   double epsilon) {
  const std::map<std::string, double> inputs = {
      {"N", as_real(N)}, {"M", as_real(M)}, {"epsilon", epsilon}};
  BoundSet set;
  set["random_permutation.mean_fidelity"] = {
      inputs, random_permutation_fidelity(N, M, epsilon),
      "1 - ((M-1)/M)(N/(N-1)) eps  [exact, diagonal input]"};
  set["random_permutation.absolute_upper_bound"] = {
      inputs, absolute_upper_bound(N, 1, M, epsilon),
      "1 - ((M-K)/M)(N/(N-1)) eps with K = 1  [upper bound, any protocol]"};
  return set;
}

BoundSet simple_scrambling_bounds(std::uint64_t N, std::uint64_t K,
                                  std::uint64_t W, std::uint64_t L,
                                  double epsilon) {
  const SimpleScramblingPrediction p =
      simple_scrambling_prediction(N, L, W, epsilon);
  const std::map<std::string, double> inputs = {{"N", as_real(N)},
                                                {"K", as_real(K)},
                                                {"W", as_real(W)},
                                                {"L", as_real(L)},
                                                {"epsilon", epsilon}};
  BoundSet set;
  set["simple_scrambling.success_probability"] = {
      inputs, p.success_probability,
      "1 - eps N(L-1)/(L(N-1))  [exact, diagonal input]"};
  set["simple_scrambling.fail_probability"] = {
      inputs, 1.0 - p.success_probability,
      "eps N(L-1)/(L(N-1))  [exact, diagonal input]"};
  set["simple_scrambling.success_fidelity"] = {
      inputs, p.success_fidelity,
      "(1-eps) / (1 - eps N(L-1)/(L(N-1)))  [exact, diagonal input]"};
  set["simple_scrambling.fidelity_bound"] = {
      inputs, p.published_bound, "1 - (2W/N) eps  [lower bound]"};
  return set;
}

BoundSet hash_compare_bounds(std::uint64_t S, double epsilon) {
  const HashComparePrediction p = hash_compare_prediction(S, epsilon);
  const std::map<std::string, double> inputs = {{"S", as_real(S)},
                                                {"epsilon", epsilon}};
  BoundSet set;
  set["hash_compare.fail_bound"] = {inputs, p.fail_bound,
                                    "eps  [upper bound]"};
  set["hash_compare.success_fidelity_bound"] = {
      inputs, 1.0 - epsilon, "1 - eps  [lower bound, every success]"};
  set["hash_compare.diagonal_fidelity_bound"] = {
      inputs, p.diagonal_fidelity_bound,
      "1 - 2 eps / sqrt(S)  [lower bound, w.p. >= 1 - 1/sqrt(S)]"};
  set["hash_compare.confidence"] = {inputs, p.confidence, "1 - 1/sqrt(S)"};
  set["hash_compare.mean_lambda1_sq_bound"] = {inputs, p.mean_lambda1_bound,
                                               "eps / S  [upper bound]"};
  return set;
}

BoundSet complete_scrambling_bounds(std::uint64_t N, std::uint64_t K,
                                    std::uint64_t W, std::uint64_t S,
                                    double epsilon) {
  const GeppParams g = complete_scrambling_prediction(N, K, W, S, epsilon);
  const std::map<std::string, double> inputs = {{"N", as_real(N)},
                                                {"K", as_real(K)},
                                                {"W", as_real(W)},
                                                {"S", as_real(S)},
                                                {"epsilon", epsilon}};
  BoundSet set;
  set["complete_scrambling.fail_bound"] = {
      inputs, *g.p, "2 eps + sqrt(2 eps / sqrt(S))  [upper bound]"};
  set["complete_scrambling.fidelity_bound"] = {
      inputs, 1.0 - g.delta, "1 - (4W/N + 4/sqrt(S)) eps  [lower bound]"};
  set["complete_scrambling.good_fraction_bound"] = {
      inputs, 1.0 - *g.q,
      "1 - 1/sqrt(S)  [lower bound on successes meeting the fidelity bound]"};
  return set;
}

}  // namespace epurify
