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

// Acceptance gate: one PASS/FAIL line per criterion. Exit status is nonzero
// when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "epurify/bounds.hpp"
#include "epurify/protocols.hpp"
#include "epurify/rng.hpp"
#include "epurify/scramble.hpp"
#include "oracles.hpp"

namespace {

using namespace epurify;

constexpr double kExact = 1e-9;
constexpr double kSigmas = 4.0;
constexpr int kSampledRuns = 10000;

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  const char* id;
  const char* title;
  double time_limit_s;  // 0 means none
  std::function<Outcome()> body;
};

std::string fmt(const char* pattern, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, pattern, args...);
  return buf;
}

// Simple scrambling failure probability on diagonal inputs.
double scramble_fail(double N, double L, double eps) {
  return eps * N * (L - 1.0) / (L * (N - 1.0));
}

double bernoulli_sigma(double p, double n) { return std::sqrt(p * (1.0 - p) / n); }

Outcome ac1_scrambling() {
  std::vector<ScramblePerm> perms;
  for (int n = 2; n <= 4; ++n) {
    for (int l = 1; l < n; ++l) perms.push_back(make_multiplication_table(n, l));
  }
  for (int n = 1; n <= 2; ++n) perms.push_back(make_linear_function(n));
  for (int d = 2; d <= 4; ++d) perms.push_back(make_extended_linear(1, d));
  for (int d = 2; d <= 3; ++d) perms.push_back(make_extended_linear(2, d));
  Outcome out;
  int checked = 0;
  for (const ScramblePerm& perm : perms) {
    const ScrambleParams& p = perm.params();
    const VerificationReport r = verify_scrambling(perm);
    bool ok = r.all_bijective && r.roundtrip;
    for (const std::uint32_t hits : r.pair_collisions) {
      ok = ok && std::uint64_t{hits} * (p.N - 1) == p.K * (p.L - 1);
    }
    ok = ok && r.pair_collisions.size() == p.N * (p.N - 1) / 2;
    if (!ok) {
      out.pass = false;
      out.detail += perm.name() + " failed; ";
    }
    ++checked;
  }
  if (out.pass) out.detail = fmt("%d constructions, all pairs exact", checked);
  return out;
}

Outcome ac2_simple_exact() {
  const ScramblePerm perm = make_multiplication_table(3, 1);
  const double N = 8.0;
  const double L = 2.0;
  double worst_fail = 0.0;
  double worst_fid = 0.0;
  for (double eps : {0.05, 0.1, 0.3}) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const SparseState s = random_state_near_target(8, eps, true, derive_seed(2, seed));
      const OutcomeDistribution d = simple_scrambling(s, perm);
      const double fail = scramble_fail(N, L, eps);
      worst_fail = std::max(worst_fail, std::abs(d.fail_probability - fail));
      worst_fid = std::max(worst_fid,
                           std::abs(d.success_fidelity() - (1.0 - eps) / (1.0 - fail)));
    }
  }
  return {worst_fail < kExact && worst_fid < kExact,
          fmt("60 states, max |dfail| %.2e, max |dfid| %.2e", worst_fail, worst_fid)};
}

Outcome ac3_mixed_diagonal() {
  const ScramblePerm perm = make_multiplication_table(3, 1);
  const std::vector<double> weights{0.5, 0.3, 0.2};
  const std::vector<double> eps{0.05, 0.2, 0.35};
  std::vector<EnsembleComponent> comps;
  double mean_eps = 0.0;
  for (std::size_t i = 0; i < weights.size(); ++i) {
    comps.push_back({weights[i], random_state_near_target(8, eps[i], true, derive_seed(3, i))});
    mean_eps += weights[i] * eps[i];
  }
  const OutcomeDistribution d = simple_scrambling(Ensemble(comps), perm);
  const double fail = scramble_fail(8.0, 2.0, mean_eps);
  const double fid = (1.0 - mean_eps) / (1.0 - fail);
  const double e1 = std::abs(d.fail_probability - fail);
  const double e2 = std::abs(d.success_fidelity() - fid);
  return {e1 < kExact && e2 < kExact,
          fmt("|dfail| %.2e, |dfid| %.2e (mean eps %.3f)", e1, e2, mean_eps)};
}

Outcome ac4_tightness() {
  const double N = 4.0;
  const double M = 2.0;
  const double eps = 0.1;
  const Ensemble rho = adversarial_mixture(4, eps);
  const double input = fidelity(rho);
  const OutcomeDistribution d = random_permutation_protocol(rho, 2, Randomness::enumerate());
  const double want = 1.0 - ((M - 1.0) / M) * (N / (N - 1.0)) * eps;
  const double e1 = std::abs(input - (1.0 - eps));
  const double e2 = std::abs(d.mean_fidelity() - want);
  return {e1 < kExact && e2 < kExact,
          fmt("F(rho) err %.2e, mean output %.12f vs %.12f", e1, d.mean_fidelity(), want)};
}

Outcome ac5_mismatch() {
  const Index N = 4;
  const Index M = 2;
  Rng rng(5);
  double worst = 0.0;
  for (double delta : {0.0, 0.05, 0.3, 0.7, 1.0}) {
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<SparseState::Entry> diag;
      std::vector<SparseState::Entry> off;
      double dn = 0.0;
      double on = 0.0;
      for (Index a = 0; a < N; ++a) {
        for (Index b = 0; b < N; ++b) {
          const Complex z(rng.normal(), rng.normal());
          (a == b ? dn : on) += std::norm(z);
          (a == b ? diag : off).push_back({a, b, z});
        }
      }
      std::vector<SparseState::Entry> all;
      for (auto e : diag) all.push_back({e.a, e.b, e.amp * std::sqrt((1.0 - delta) / dn)});
      for (auto e : off) all.push_back({e.a, e.b, e.amp * std::sqrt(delta / on)});
      const SparseState s(RegisterLayout::single("X", N), all);
      const OutcomeDistribution d = random_permutation_protocol(s, M, Randomness::enumerate());
      double mismatch = 0.0;
      for (const auto& b : d.branches) {
        const TranscriptEvent* labels = find_event(b.transcript, "labels");
        if (labels && labels->values[0] != labels->values[1]) mismatch += b.probability;
      }
      const double want = static_cast<double>(N - M) / static_cast<double>(N - 1) * delta;
      worst = std::max(worst, std::abs(mismatch - want));
    }
  }
  return {worst < kExact, fmt("25 states, max |dmismatch| %.2e", worst)};
}

Outcome ac6_hash() {
  const double eps = 0.2;
  const unsigned s = 4;
  const double S = 16.0;
  const SparseState input = random_state_near_target(16, eps, false, 6);
  const ProtocolSpec spec = ProtocolSpec::hash_compare(s, Randomness::sampled(0));
  int fails = 0;
  double l1 = 0.0;
  double l1_sq = 0.0;
  double min_fid = 1.0;
  for (int i = 0; i < kSampledRuns; ++i) {
    const RunRecord r = sample_run(spec, input, derive_seed(6, i));
    const double v = r.lambdas->lambda1_sq;
    l1 += v;
    l1_sq += v * v;
    if (r.failed()) {
      ++fails;
    } else {
      min_fid = std::min(min_fid, r.fidelity);
    }
  }
  const double n = kSampledRuns;
  const double fail_rate = fails / n;
  const double fail_limit = eps + kSigmas * bernoulli_sigma(eps, n);
  const double mean = l1 / n;
  const double se = std::sqrt(std::max(0.0, l1_sq / n - mean * mean) / n);
  const double l1_limit = eps / S + kSigmas * se;
  const bool ok = fail_rate <= fail_limit && mean <= l1_limit && min_fid >= 1.0 - eps - kExact;
  return {ok, fmt("fail %.4f <= %.4f, mean l1^2 %.5f <= %.5f, min F %.4f >= %.4f", fail_rate,
                  fail_limit, mean, l1_limit, min_fid, 1.0 - eps)};
}

Outcome ac7_complete() {
  const double eps = 0.05;
  const ScramblePerm perm = make_multiplication_table(3, 2);
  const double N = 8.0;
  const double W = static_cast<double>(perm.params().W);
  const double S = 16.0;
  const double root = std::sqrt(S);
  const SparseState input = random_state_near_target(8, eps, false, 7);
  const ProtocolSpec spec =
      ProtocolSpec::complete_scrambling(perm, 4, Randomness::sampled(0));
  const double target = 1.0 - (4.0 * W / N + 4.0 / root) * eps;
  int fails = 0;
  int good = 0;
  for (int i = 0; i < kSampledRuns; ++i) {
    const RunRecord r = sample_run(spec, input, derive_seed(7, i));
    if (r.failed()) {
      ++fails;
    } else if (r.fidelity >= target) {
      ++good;
    }
  }
  const double n = kSampledRuns;
  const double p = 2.0 * eps + std::sqrt(2.0 * eps / root);
  const double fail_rate = fails / n;
  const double fail_limit = p + kSigmas * bernoulli_sigma(std::min(p, 1.0), n);
  const double successes = n - fails;
  const double q = 1.0 / root;
  const double fraction = good / successes;
  const double fraction_limit = 1.0 - q - kSigmas * bernoulli_sigma(q, successes);
  return {fail_rate <= fail_limit && fraction >= fraction_limit,
          fmt("fail %.4f <= %.4f, good fraction %.4f >= %.4f (F >= %.3f)", fail_rate,
              fail_limit, fraction, fraction_limit, target)};
}

// -------------------------------------------------------------- properties

SparseState random_layout_state(const RegisterLayout& layout, Rng& rng) {
  std::vector<SparseState::Entry> entries;
  for (Index a = 0; a < layout.dim(); ++a) {
    for (Index b = 0; b < layout.dim(); ++b) {
      if (rng.uniform() < 0.6) entries.push_back({a, b, Complex(rng.normal(), rng.normal())});
    }
  }
  entries.push_back({0, 0, 1.0});
  return SparseState::normalized(layout, std::move(entries));
}

std::vector<Complex> unit_vector(Rng& rng, std::size_t n) {
  std::vector<Complex> v(n);
  double norm = 0.0;
  for (auto& c : v) {
    c = Complex(rng.normal(), rng.normal());
    norm += std::norm(c);
  }
  for (auto& c : v) c /= std::sqrt(norm);
  return v;
}

std::vector<Complex> near(const std::vector<Complex>& a, double e, Rng& rng) {
  std::vector<Complex> w = unit_vector(rng, a.size());
  Complex proj = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) proj += std::conj(a[i]) * w[i];
  double norm = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    w[i] -= proj * a[i];
    norm += std::norm(w[i]);
  }
  for (std::size_t i = 0; i < a.size(); ++i) {
    w[i] = std::sqrt(1.0 - e) * a[i] + std::sqrt(e / norm) * w[i];
  }
  return w;
}

SparseState as_state(const std::vector<Complex>& v, Index n) {
  std::vector<SparseState::Entry> entries;
  for (Index a = 0; a < n; ++a) {
    for (Index b = 0; b < n; ++b) entries.push_back({a, b, v[a * n + b]});
  }
  return SparseState::normalized(RegisterLayout::single("X", n), std::move(entries));
}

Outcome ac8_properties() {
  Rng rng(8);
  std::ostringstream detail;
  bool pass = true;

  // Fused measure-and-compare against the dense oracle.
  double worst = 0.0;
  int branches = 0;
  const std::vector<RegisterLayout> layouts = {
      RegisterLayout({{"G", 2}, {"H", 4}}),          RegisterLayout({{"G", 4}, {"H", 4}}),
      RegisterLayout({{"H", 2}, {"G", 8}, {"Y", 2}}), RegisterLayout({{"G", 3}, {"H", 7}}),
      RegisterLayout({{"G", 5}, {"Y", 3}}),          RegisterLayout::single("G", 64),
  };
  for (const auto& layout : layouts) {
    const Index L = layout.registers()[layout.position("G")].dim;
    for (int trial = 0; trial < 4; ++trial) {
      const SparseState s = random_layout_state(layout, rng);
      for (bool h : {false, true}) {
        if (h && (L & (L - 1)) != 0) continue;
        const auto op_a = h ? oracle::hadamard(L) : oracle::fourier(L);
        const Eigen::MatrixXcd op_b =
            h ? oracle::hadamard(L) : Eigen::MatrixXcd(oracle::fourier(L).adjoint());
        const auto want = oracle::measure_equal(s, layout.position("G"), op_a, op_b);
        const OutcomeSplit got = fourier_measure_compare(s, "G", h);
        double matched = 0.0;
        for (const auto& w : want) {
          matched += w.probability;
          const auto it = std::find_if(got.matches.begin(), got.matches.end(),
                                       [&](const auto& b) { return b.outcome == w.outcome; });
          if (it == got.matches.end()) {
            worst = std::max(worst, w.probability);
            continue;
          }
          ++branches;
          worst = std::max(worst, std::abs(it->probability - w.probability));
          worst = std::max(worst,
                           std::abs(1.0 - oracle::overlap(oracle::dense(it->state), w.state)));
        }
        worst = std::max(worst, std::abs(got.mismatch_probability - (1.0 - matched)));
      }
    }
  }
  pass = pass && worst <= kExact;
  detail << fmt("oracle %d branches max err %.1e", branches, worst);

  // Triangle inequality and trace distance over fuzzed pure states.
  int triangle_bad = 0;
  int distance_bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const Index n = 2 + rng.below(3);
    const double e = 0.5 * rng.uniform();
    const double d = 0.5 * rng.uniform();
    const auto a = unit_vector(rng, n * n);
    const SparseState B = as_state(near(a, e, rng), n);
    const SparseState C = as_state(near(a, d, rng), n);
    triangle_bad += state_fidelity(B, C) < 1.0 - 2.0 * (e + d) - 1e-12;
    const SparseState A = as_state(a, n);
    const double f = state_fidelity(A, C);
    distance_bad += trace_distance(A, C) > std::sqrt(1.0 - f) + kExact;
  }
  pass = pass && triangle_bad == 0 && distance_bad == 0;
  detail << fmt("; triangle %d/1e4, D<=sqrt(1-F) %d/1e4 violations", triangle_bad,
                distance_bad);

  // Schmidt rank along sampled trajectories.
  const std::vector<ProtocolSpec> specs = {
      ProtocolSpec::random_permutation(2, Randomness::sampled(0)),
      ProtocolSpec::simple_scrambling(make_multiplication_table(3, 1)),
      ProtocolSpec::hash_compare(2, Randomness::sampled(0)),
      ProtocolSpec::complete_scrambling(make_multiplication_table(3, 2), 2,
                                        Randomness::sampled(0)),
  };
  int rank_bad = 0;
  for (int i = 0; i < 1000; ++i) {
    const ProtocolSpec& spec = specs[i % specs.size()];
    const Index n = spec.perm ? spec.perm->params().N : 4;
    const SparseState s =
        random_state_near_target(n, 0.45 * rng.uniform(), rng.below(2) == 0, rng.next_u64());
    const auto stages = trace_trajectory(spec, s, rng.next_u64());
    std::size_t rank = schmidt_rank(*stages.front().state);
    for (std::size_t k = 1; k < stages.size() && stages[k].state; ++k) {
      const std::size_t next = schmidt_rank(*stages[k].state);
      rank_bad += next > rank * stages[k].aux_rank;
      rank = next;
    }
  }
  pass = pass && rank_bad == 0;
  detail << fmt("; rank increases %d/1e3", rank_bad);

  // Hadamard and Fourier agree on diagonal inputs.
  double hf = 0.0;
  for (int n = 2; n <= 4; ++n) {
    for (int l = 1; l < n; ++l) {
      const ScramblePerm perm = make_multiplication_table(n, l);
      const SparseState s =
          random_state_near_target(perm.params().N, 0.3, true, derive_seed(88, n * 8 + l));
      const OutcomeDistribution f = simple_scrambling(s, perm, false);
      const OutcomeDistribution h = simple_scrambling(s, perm, true);
      hf = std::max(hf, std::abs(f.success_probability() - h.success_probability()));
      for (const auto& a : f.branches) {
        for (const auto& b : h.branches) {
          hf = std::max(hf, std::abs(1.0 - state_fidelity(a.state, b.state)));
        }
      }
    }
  }
  pass = pass && hf <= kExact;
  detail << fmt("; Hadamard vs Fourier max err %.1e", hf);
  return {pass, detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"AC1", "scrambling permutations", 10.0, ac1_scrambling},
      {"AC2", "simple scrambling exact formulas", 30.0, ac2_simple_exact},
      {"AC3", "mixed diagonal states", 0.0, ac3_mixed_diagonal},
      {"AC4", "absolute bound tightness", 5.0, ac4_tightness},
      {"AC5", "off-diagonal mismatch", 0.0, ac5_mismatch},
      {"AC6", "hash and compare statistics", 60.0, ac6_hash},
      {"AC7", "complete scrambling end to end", 0.0, ac7_complete},
      {"AC8", "property suites", 0.0, ac8_properties},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.body();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0.0 && secs >= c.time_limit_s) {
      o.pass = false;
      o.detail += fmt("; over time limit %.0f s", c.time_limit_s);
    }
    failed += !o.pass;
    std::printf("%s %s  %s: %s  [%.2f s]\n", c.id, o.pass ? "PASS" : "FAIL", c.title,
                o.detail.c_str(), secs);
  }
  std::printf("%zu criteria, %d failed\n", criteria.size(), failed);
  return failed == 0 ? 0 : 1;
}
