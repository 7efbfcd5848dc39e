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

// Checks of the three success definitions. Input fidelity is read as a lower
// bound 1 - eps in every definition.

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "epurify/error.hpp"
#include "epurify/protocols.hpp"

namespace epurify {

namespace {

void require_matching(const OutcomeDistribution& dist, const GeppParams& params) {
  auto meta = [&](const char* key) {
    const auto it = dist.metadata.find(key);
    return it == dist.metadata.end() ? -1.0 : it->second;
  };
  if (meta("N") != static_cast<double>(params.N) ||
      dist.output_dim != params.M ||
      meta("K") != static_cast<double>(params.K)) {
    std::ostringstream os;
    os << "distribution has <N, K, M> = <" << meta("N") << ", " << meta("K")
       << ", " << dist.output_dim << ">, parameters <" << params.N << ", "
       << params.K << ", " << params.M << ">";
    throw Error(Errc::kDimensionMismatch, os.str());
  }
}

// Randomness transcript event of a branch; empty when the protocol has none.
std::vector<Index> randomness_key(const Transcript& transcript) {
  for (const char* kind : {"permutation", "hash_vectors"}) {
    if (const TranscriptEvent* e = find_event(transcript, kind)) {
      return e->values;
    }
  }
  return {};
}

std::string describe(const GeppReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << gepp_kind_name(r.kind) << ": fail " << r.fail_probability
     << " (limit " << r.fail_limit << "), fidelity statistic "
     << r.fidelity_statistic << " (limit " << r.fidelity_limit << ")";
  if (!r.input_ok) os << ", input fidelity below 1 - eps";
  return os.str();
}

}  // namespace

std::string_view gepp_kind_name(GeppKind kind) {
  switch (kind) {
    case GeppKind::kAbsolute:
      return "absolute";
    case GeppKind::kDeterministic:
      return "deterministic";
    case GeppKind::kProbabilistic:
      return "probabilistic";
  }
  return "unknown";
}

Interval wilson_interval(std::uint64_t hits, std::uint64_t trials, double z) {
  if (trials == 0) return {0.0, 1.0};
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(hits) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half =
      z / denom * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

GeppReport check_gepp_definition(const OutcomeDistribution& dist,
                                 const GeppParams& params, GeppKind kind,
                                 double input_fidelity, double tolerance) {
  require_matching(dist, params);
  GeppReport r;
  r.kind = kind;
  r.input_ok = input_fidelity >= 1.0 - params.epsilon - tolerance;
  r.fail_probability = dist.fail_probability;
  r.fidelity_limit = 1.0 - params.delta;
  switch (kind) {
    case GeppKind::kAbsolute:
      r.fail_limit = 0.0;
      r.fidelity_statistic = dist.mean_fidelity();
      break;
    case GeppKind::kDeterministic:
      r.fail_limit = params.p.value_or(0.0);
      r.fidelity_statistic = dist.success_fidelity();
      break;
    case GeppKind::kProbabilistic: {
      r.fail_limit = params.p.value_or(0.0);
      // Output conditioned on the protocol's randomness, then the weight of
      // the randomness values whose output meets the target.
      std::map<std::vector<Index>, std::pair<double, double>> groups;
      for (const auto& b : dist.branches) {
        auto& [weight, weighted_fidelity] = groups[randomness_key(b.transcript)];
        weight += b.probability;
        weighted_fidelity += b.probability * b.fidelity;
      }
      double good = 0.0;
      double total = 0.0;
      for (const auto& [key, group] : groups) {
        total += group.first;
        if (group.second / group.first >= r.fidelity_limit - tolerance) {
          good += group.first;
        }
      }
      r.fidelity_statistic = total > 0.0 ? good / total : 0.0;
      r.fidelity_limit = 1.0 - params.q.value_or(0.0);
      break;
    }
  }
  r.fail_clause = r.fail_probability <= r.fail_limit + tolerance;
  r.fidelity_clause = r.fidelity_statistic >= r.fidelity_limit - tolerance;
  r.detail = describe(r);
  return r;
}

GeppReport check_gepp_definition(std::span<const RunRecord> runs,
                                 const GeppParams& params, GeppKind kind,
                                 double input_fidelity, double z) {
  if (runs.empty()) {
    throw Error(Errc::kInvalidArgument, "no runs to evaluate");
  }
  GeppReport r;
  r.kind = kind;
  r.input_ok = input_fidelity >= 1.0 - params.epsilon - 1e-9;
  std::uint64_t fails = 0;
  std::uint64_t good = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  const double target = 1.0 - params.delta;
  for (const auto& run : runs) {
    if (run.outcome && run.outcome->dim() != params.M) {
      throw Error(Errc::kDimensionMismatch,
                  "run output dimension " + std::to_string(run.outcome->dim()) +
                      ", expected " + std::to_string(params.M));
    }
    if (run.failed()) {
      ++fails;
      if (kind != GeppKind::kAbsolute) continue;
    }
    sum += run.fidelity;
    sum_sq += run.fidelity * run.fidelity;
    if (!run.failed() && run.fidelity >= target - 1e-9) ++good;
  }
  const std::uint64_t n = runs.size();
  r.fail_probability = static_cast<double>(fails) / static_cast<double>(n);
  r.fail_limit = kind == GeppKind::kAbsolute ? 0.0 : params.p.value_or(0.0);
  r.fail_clause = wilson_interval(fails, n, z).lower <= r.fail_limit;

  const std::uint64_t counted = kind == GeppKind::kAbsolute ? n : n - fails;
  if (kind == GeppKind::kProbabilistic) {
    r.fidelity_statistic =
        counted ? static_cast<double>(good) / static_cast<double>(counted) : 0.0;
    r.fidelity_limit = 1.0 - params.q.value_or(0.0);
    r.fidelity_clause =
        counted > 0 && wilson_interval(good, counted, z).upper >= r.fidelity_limit;
  } else {
    r.fidelity_limit = target;
    if (counted == 0) {
      r.fidelity_clause = false;
    } else {
      const double m = static_cast<double>(counted);
      const double mean = sum / m;
      const double var = std::max(0.0, sum_sq / m - mean * mean);
      r.fidelity_statistic = mean;
      r.fidelity_clause = mean + z * std::sqrt(var / m) >= target - 1e-9;
    }
  }
  r.detail = describe(r);
  return r;
}

}  // namespace epurify
