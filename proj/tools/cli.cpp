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

#include "cli.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <exception>
#include <functional>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "epurify/bounds.hpp"
#include "epurify/error.hpp"
#include "epurify/rng.hpp"

namespace epurify::cli {

namespace {

constexpr double kExactSlack = 1e-9;
constexpr double kSigmas = 4.0;

// ------------------------------------------------------------------ config

template <typename T>
void read_key(const Json& json, const char* key, T& field) {
  if (json.contains(key)) field = json.at(key).get<T>();
}

bool is_scrambling(ProtocolKind kind) {
  return kind == ProtocolKind::kSimpleScrambling ||
         kind == ProtocolKind::kCompleteScrambling;
}

Index power_of_two(int n) {
  if (n < 1 || n > 30) {
    throw Error(Errc::kOutOfRange, "n must lie in [1, 30]");
  }
  return Index{1} << n;
}

// Input dimension implied by the configuration alone.
Index configured_dim(const ExperimentConfig& config) {
  const ProtocolKind kind = parse_protocol(config.protocol);
  if (is_scrambling(kind)) return build_perm(config).params().N;
  if (config.dim != 0) return config.dim;
  return power_of_two(config.n);
}

std::string timestamp_utc() {
  const std::time_t now =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

Json header(const char* command) {
  return {{"schema", kSchema}, {"command", command}};
}

void stamp(Json& report, const ExperimentConfig& config, double seconds) {
  if (config.no_timestamp) return;
  report["wall_time_s"] = seconds;
  report["generated_at"] = timestamp_utc();
}

// ------------------------------------------------------------------ checks

struct Check {
  std::string quantity;
  double simulated;
  double predicted;
  std::string relation;  // equal | at_most | at_least
  double slack;
  bool applies;

  bool ok() const {
    if (!applies) return true;
    if (relation == "equal") return std::abs(simulated - predicted) <= slack;
    if (relation == "at_most") return simulated <= predicted + slack;
    return simulated >= predicted - slack;
  }
};

Json check_json(const Check& c) {
  const double dev = std::abs(c.simulated - c.predicted);
  return {{"quantity", c.quantity},
          {"simulated", c.simulated},
          {"predicted", c.predicted},
          {"relation", c.relation},
          {"slack", c.slack},
          {"abs_deviation", dev},
          {"rel_deviation",
           c.predicted != 0.0 ? Json(dev / std::abs(c.predicted)) : Json(nullptr)},
          {"applies", c.applies},
          {"ok", c.ok()}};
}

struct InputFacts {
  Index dim;
  std::size_t components;
  double fidelity;
  double epsilon;
  bool diagonal;
  double off_diagonal;
};

InputFacts facts_of(const Ensemble& input) {
  InputFacts f{input.dim(), input.components().size(), fidelity(input), 0.0,
               true, 0.0};
  f.epsilon = std::max(0.0, 1.0 - f.fidelity);
  for (const auto& c : input.components()) {
    const double diag = fidelity_with_diagonal(c.state);
    f.off_diagonal += c.probability * (1.0 - diag);
    if (diag < 1.0 - 1e-12) f.diagonal = false;
  }
  return f;
}

Json facts_json(const InputFacts& f) {
  return {{"dim", f.dim},
          {"components", f.components},
          {"fidelity", f.fidelity},
          {"epsilon", f.epsilon},
          {"diagonal", f.diagonal},
          {"off_diagonal_weight", f.off_diagonal}};
}

// Theory for one protocol at the input's epsilon.
struct Theory {
  BoundSet bounds;
  std::optional<GeppParams> params;
  GeppKind kind = GeppKind::kDeterministic;
  bool gepp_applies = false;
};

Theory theory_for(const ProtocolSpec& spec, const InputFacts& f,
                  bool enumerate_all) {
  Theory th;
  const Index N = f.dim;
  const bool pure = f.components == 1;
  try {
    switch (spec.kind) {
      case ProtocolKind::kRandomPermutation:
        th.bounds = random_permutation_bounds(N, spec.output_dim / spec.aux_dim,
                                              f.epsilon);
        th.params = random_permutation_params(N, spec.aux_dim, spec.output_dim,
                                              f.epsilon);
        th.kind = GeppKind::kAbsolute;
        th.gepp_applies = f.diagonal && enumerate_all;
        break;
      case ProtocolKind::kSimpleScrambling: {
        const ScrambleParams& p = spec.perm->params();
        th.bounds = simple_scrambling_bounds(N, p.K, p.W, p.L, f.epsilon);
        th.params = simple_scrambling_params(N, p.K, p.W, f.epsilon);
        th.kind = GeppKind::kDeterministic;
        th.gepp_applies = f.diagonal;
        break;
      }
      case ProtocolKind::kHashCompare: {
        const Index S = Index{1} << spec.hash_rounds;
        th.bounds = hash_compare_bounds(S, f.epsilon);
        th.params = GeppParams{N, S, N, f.epsilon, f.epsilon, f.epsilon, {}};
        th.kind = GeppKind::kDeterministic;
        th.gepp_applies = pure;
        break;
      }
      case ProtocolKind::kCompleteScrambling: {
        const ScrambleParams& p = spec.perm->params();
        const Index S = Index{1} << spec.hash_rounds;
        th.bounds = complete_scrambling_bounds(N, p.K, p.W, S, f.epsilon);
        th.params = complete_scrambling_prediction(N, p.K, p.W, S, f.epsilon);
        th.kind = GeppKind::kProbabilistic;
        th.gepp_applies = pure && enumerate_all;
        break;
      }
    }
  } catch (const Error&) {
    // Outside the formulas' domain (for instance eps >= 1/2): no theory.
    th.bounds.clear();
    th.params.reset();
    th.gepp_applies = false;
  }
  return th;
}

double bound_value(const Theory& th, const std::string& id) {
  const auto it = th.bounds.find(id);
  return it == th.bounds.end() ? std::nan("") : it->second.value;
}

bool has(const Theory& th, const std::string& id) {
  return th.bounds.count(id) > 0;
}

// ------------------------------------------------------------ exact runs

double mismatch_probability(const OutcomeDistribution& dist) {
  double total = 0.0;
  for (const auto& b : dist.branches) {
    const TranscriptEvent* e = find_event(b.transcript, "labels");
    if (e != nullptr && e->values.size() == 2 && e->values[0] != e->values[1]) {
      total += b.probability;
    }
  }
  return total;
}

std::vector<Check> exact_checks(const ProtocolSpec& spec,
                                const Ensemble& input,
                                const OutcomeDistribution& dist,
                                const InputFacts& f, const Theory& th,
                                bool enumerate_all) {
  std::vector<Check> checks;
  const bool pure = f.components == 1;
  switch (spec.kind) {
    case ProtocolKind::kRandomPermutation: {
      checks.push_back({"fail_probability", dist.fail_probability, 0.0, "equal",
                        kExactSlack, true});
      if (has(th, "random_permutation.mean_fidelity")) {
        checks.push_back({"mean_fidelity", dist.mean_fidelity(),
                          bound_value(th, "random_permutation.mean_fidelity"),
                          "equal", kExactSlack, f.diagonal && enumerate_all});
      }
      const Index inner = spec.output_dim / spec.aux_dim;
      if (inner < f.dim) {
        checks.push_back({"mismatch_probability", mismatch_probability(dist),
                          random_permutation_mismatch(f.dim, inner, f.off_diagonal),
                          "equal", kExactSlack, enumerate_all});
      }
      break;
    }
    case ProtocolKind::kSimpleScrambling:
      if (has(th, "simple_scrambling.fail_probability")) {
        checks.push_back({"fail_probability", dist.fail_probability,
                          bound_value(th, "simple_scrambling.fail_probability"),
                          "equal", kExactSlack, f.diagonal});
        checks.push_back({"success_fidelity", dist.success_fidelity(),
                          bound_value(th, "simple_scrambling.success_fidelity"),
                          "equal", kExactSlack, f.diagonal});
        checks.push_back({"success_fidelity_bound", dist.success_fidelity(),
                          bound_value(th, "simple_scrambling.fidelity_bound"),
                          "at_least", kExactSlack, f.diagonal});
      }
      break;
    case ProtocolKind::kHashCompare: {
      if (!has(th, "hash_compare.fail_bound")) break;
      checks.push_back({"fail_probability", dist.fail_probability,
                        bound_value(th, "hash_compare.fail_bound"), "at_most",
                        kExactSlack, true});
      double min_fidelity = 1.0;
      for (const auto& b : dist.branches) {
        min_fidelity = std::min(min_fidelity, b.fidelity);
      }
      // One lambda triple per (component, randomness) pair, carried by every
      // branch of that pair.
      std::map<std::pair<std::size_t, std::vector<Index>>, double> lambda1;
      auto note = [&](const Transcript& t, std::size_t c,
                      const std::optional<LambdaWeights>& l) {
        const TranscriptEvent* r = find_event(t, "hash_vectors");
        if (l && r) lambda1[{c, r->values}] = l->lambda1_sq;
      };
      for (const auto& b : dist.branches) {
        note(b.transcript, b.component, b.lambdas);
      }
      for (const auto& b : dist.failures) {
        note(b.transcript, b.component, b.lambdas);
      }
      double mean_lambda1 = 0.0;
      for (const auto& [key, value] : lambda1) {
        mean_lambda1 += input.components()[key.first].probability * value;
      }
      mean_lambda1 /= dist.metadata.at("randomness_choices");
      checks.push_back({"min_success_fidelity", min_fidelity, 1.0 - f.epsilon,
                        "at_least", kExactSlack,
                        pure && !dist.branches.empty()});
      checks.push_back({"mean_lambda1_sq", mean_lambda1,
                        bound_value(th, "hash_compare.mean_lambda1_sq_bound"),
                        "at_most", kExactSlack, enumerate_all});
      break;
    }
    case ProtocolKind::kCompleteScrambling:
      if (!has(th, "complete_scrambling.fail_bound")) break;
      checks.push_back({"fail_probability", dist.fail_probability,
                        bound_value(th, "complete_scrambling.fail_bound"),
                        "at_most", kExactSlack, pure && enumerate_all});
      if (f.diagonal) {
        const ScrambleParams& p = spec.perm->params();
        const SimpleScramblingPrediction s =
            simple_scrambling_prediction(f.dim, p.L, p.W,
                                         std::min(f.epsilon, 0.4999999));
        checks.push_back({"diagonal_fail_probability", dist.fail_probability,
                          1.0 - s.success_probability, "equal", kExactSlack,
                          f.epsilon < 0.5});
      }
      break;
  }
  return checks;
}

Json cap_branches(Json dist_json, std::uint64_t max_branches) {
  for (const char* key : {"branches", "failures"}) {
    const std::size_t count = dist_json[key].size();
    if (count > max_branches) {
      dist_json[key] = Json::array();
      dist_json[std::string(key) + "_omitted"] = count;
    }
  }
  return dist_json;
}

// ---------------------------------------------------------- sampled runs

std::vector<RunRecord> sample_many(const ProtocolSpec& spec,
                                   const Ensemble& input, std::uint64_t seed,
                                   std::uint64_t runs, unsigned threads) {
  std::vector<std::optional<RunRecord>> slots(runs);
  unsigned workers = threads ? threads : std::thread::hardware_concurrency();
  workers = static_cast<unsigned>(
      std::clamp<std::uint64_t>(workers, 1, std::max<std::uint64_t>(runs, 1)));
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::uint64_t i = w; i < runs; i += workers) {
          slots[i] = sample_run(spec, input, derive_seed(seed, i));
        }
      } catch (...) {
        const std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  std::vector<RunRecord> out;
  out.reserve(runs);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

struct Moments {
  std::uint64_t count = 0;
  double sum = 0.0;
  double sum_sq = 0.0;
  double min = 1.0;

  void add(double v) {
    ++count;
    sum += v;
    sum_sq += v * v;
    min = std::min(min, v);
  }
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
  double stderr_of_mean() const {
    if (count < 2) return 0.0;
    const double n = static_cast<double>(count);
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    return std::sqrt(var / n);
  }
  Json json() const {
    return {{"count", count},
            {"mean", mean()},
            {"stderr", stderr_of_mean()},
            {"min", count ? Json(min) : Json(nullptr)}};
  }
};

double bernoulli_sigma(double p, std::uint64_t n) {
  return n ? std::sqrt(std::max(0.0, p * (1.0 - p)) / static_cast<double>(n))
           : 0.0;
}

// ----------------------------------------------------------------- inputs

std::vector<Index> parse_index_list(const std::string& text) {
  std::vector<Index> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  return out;
}

}  // namespace

void apply_config_json(const Json& json, ExperimentConfig& c) {
  static const std::vector<std::string> kKeys = {
      "protocol",     "construction", "n",        "t",          "d",
      "s_rounds",     "epsilon",      "input",    "diagonal_only",
      "mode",         "runs",         "seed",     "out",        "format",
      "no_timestamp", "replay",       "dim",      "out_dim",    "aux_dim",
      "hadamard",     "randomness",   "emit_runs", "include_states",
      "threads",      "max_branches", "sweep_epsilon", "sweep_t", "table",
      "schema"};
  if (!json.is_object()) throw Error(Errc::kParse, "config must be an object");
  for (const auto& item : json.items()) {
    if (std::find(kKeys.begin(), kKeys.end(), item.key()) == kKeys.end()) {
      throw Error(Errc::kInvalidArgument,
                  "unknown config key '" + item.key() + "'");
    }
  }
  try {
    read_key(json, "protocol", c.protocol);
    read_key(json, "construction", c.construction);
    read_key(json, "n", c.n);
    read_key(json, "t", c.t);
    read_key(json, "d", c.d);
    read_key(json, "s_rounds", c.s_rounds);
    read_key(json, "epsilon", c.epsilon);
    read_key(json, "input", c.input);
    read_key(json, "diagonal_only", c.diagonal_only);
    read_key(json, "mode", c.mode);
    read_key(json, "runs", c.runs);
    if (json.contains("seed") && !json.at("seed").is_null()) {
      c.seed = json.at("seed").get<std::uint64_t>();
    }
    read_key(json, "out", c.out);
    read_key(json, "format", c.format);
    read_key(json, "no_timestamp", c.no_timestamp);
    read_key(json, "replay", c.replay);
    read_key(json, "dim", c.dim);
    read_key(json, "out_dim", c.out_dim);
    read_key(json, "aux_dim", c.aux_dim);
    read_key(json, "hadamard", c.hadamard);
    read_key(json, "randomness", c.randomness);
    read_key(json, "emit_runs", c.emit_runs);
    read_key(json, "include_states", c.include_states);
    read_key(json, "threads", c.threads);
    read_key(json, "max_branches", c.max_branches);
    read_key(json, "sweep_epsilon", c.sweep_epsilon);
    read_key(json, "sweep_t", c.sweep_t);
    read_key(json, "table", c.table);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, std::string("config: ") + e.what());
  }
}

Json config_to_json(const ExperimentConfig& c) {
  return {{"protocol", c.protocol},
          {"construction", c.construction},
          {"n", c.n},
          {"t", c.t},
          {"d", c.d},
          {"s_rounds", c.s_rounds},
          {"epsilon", c.epsilon},
          {"input", c.input},
          {"diagonal_only", c.diagonal_only},
          {"mode", c.mode},
          {"runs", c.runs},
          {"seed", c.seed ? Json(*c.seed) : Json(nullptr)},
          {"dim", c.dim},
          {"out_dim", c.out_dim},
          {"aux_dim", c.aux_dim},
          {"hadamard", c.hadamard},
          {"randomness", c.randomness}};
}

ScramblePerm build_perm(const ExperimentConfig& c) {
  if (c.construction == "multiplication_table") {
    return make_multiplication_table(c.n, c.t);
  }
  if (c.construction == "linear_function") return make_linear_function(c.n);
  if (c.construction == "extended_linear") return make_extended_linear(c.n, c.d);
  throw Error(Errc::kInvalidArgument,
              "unknown construction '" + c.construction +
                  "' (multiplication_table, linear_function, extended_linear)");
}

ProtocolSpec build_spec(const ExperimentConfig& c) {
  const ProtocolKind kind = parse_protocol(c.protocol);
  if (c.mode != "exact" && c.mode != "sample") {
    throw Error(Errc::kInvalidArgument, "mode must be exact or sample");
  }
  std::optional<bool> hadamard;
  if (c.hadamard == "on") {
    hadamard = true;
  } else if (c.hadamard == "off") {
    hadamard = false;
  } else if (c.hadamard != "auto") {
    throw Error(Errc::kInvalidArgument, "hadamard must be auto, on or off");
  }
  Randomness randomness = c.randomness.empty()
                              ? Randomness::enumerate()
                              : Randomness::fixed(c.randomness);
  switch (kind) {
    case ProtocolKind::kRandomPermutation:
      return ProtocolSpec::random_permutation(c.out_dim, std::move(randomness),
                                              c.aux_dim);
    case ProtocolKind::kSimpleScrambling:
      return ProtocolSpec::simple_scrambling(build_perm(c), hadamard);
    case ProtocolKind::kHashCompare:
      return ProtocolSpec::hash_compare(c.s_rounds, std::move(randomness));
    case ProtocolKind::kCompleteScrambling:
      return ProtocolSpec::complete_scrambling(build_perm(c), c.s_rounds,
                                               std::move(randomness), hadamard);
  }
  throw Error(Errc::kInvalidArgument, "unknown protocol");
}

Ensemble build_input(const ExperimentConfig& c) {
  if (c.input == "max-entangled") return max_entangled(configured_dim(c));
  if (c.input == "near-target") {
    return random_state_near_target(configured_dim(c), c.epsilon,
                                    c.diagonal_only, c.seed.value_or(0));
  }
  if (c.input == "adversarial-mix") {
    return adversarial_mixture(configured_dim(c), c.epsilon);
  }
  return ensemble_from_json(read_json_file(c.input));
}

Json protocol_report(const ExperimentConfig& config, bool& ok) {
  const auto start = std::chrono::steady_clock::now();
  if (config.mode == "sample" && !config.seed) {
    throw Error(Errc::kInvalidArgument, "sample mode needs --seed");
  }
  const ProtocolSpec spec = build_spec(config);
  const Ensemble input = build_input(config);
  const InputFacts f = facts_of(input);
  const bool enumerate_all = config.randomness.empty();
  const Theory th = theory_for(spec, f, enumerate_all || config.mode == "sample");

  Json report = header("protocol run");
  report["config"] = config_to_json(config);
  report["input"] = facts_json(f);
  std::vector<Check> checks;
  std::optional<GeppReport> gepp;

  if (config.mode == "exact") {
    const OutcomeDistribution dist = run_exact(spec, input);
    report["summary"] = {{"fail_probability", dist.fail_probability},
                         {"success_probability", dist.success_probability()},
                         {"mean_fidelity", dist.mean_fidelity()},
                         {"success_fidelity", dist.success_fidelity()},
                         {"residue", dist.residue},
                         {"output_dim", dist.output_dim}};
    report["distribution"] =
        cap_branches(to_json(dist, config.include_states), config.max_branches);
    checks = exact_checks(spec, input, dist, f, th, enumerate_all);
    checks.push_back({"total_probability", dist.total_probability(), 1.0,
                      "equal", kExactSlack, true});
    if (th.params) {
      gepp = check_gepp_definition(dist, *th.params, th.kind, f.fidelity);
    }
  } else {
    const std::vector<RunRecord> runs = sample_many(
        spec, input, *config.seed, config.runs, config.threads);
    const std::uint64_t n = runs.size();
    std::uint64_t fails = 0;
    Moments all_fidelity;
    Moments success_fidelity;
    Moments lambda[3];
    std::uint64_t good = 0;
    const double target =
        th.params ? 1.0 - th.params->delta : std::nan("");
    for (const auto& r : runs) {
      if (r.failed()) ++fails;
      all_fidelity.add(r.fidelity);
      if (!r.failed()) {
        success_fidelity.add(r.fidelity);
        if (r.fidelity >= target - kExactSlack) ++good;
      }
      if (r.lambdas) {
        lambda[0].add(r.lambdas->lambda0_sq);
        lambda[1].add(r.lambdas->lambda1_sq);
        lambda[2].add(r.lambdas->lambda2_sq);
      }
    }
    const double fail_rate =
        static_cast<double>(fails) / static_cast<double>(std::max<std::uint64_t>(n, 1));
    const Interval ci = wilson_interval(fails, n, kSigmas);
    const std::uint64_t successes = n - fails;
    const double good_fraction =
        successes ? static_cast<double>(good) / static_cast<double>(successes)
                  : 0.0;
    report["summary"] = {
        {"runs", n},
        {"fail_probability", fail_rate},
        {"fail_interval", {ci.lower, ci.upper}},
        {"success_probability", 1.0 - fail_rate},
        {"mean_fidelity", all_fidelity.mean()},
        {"success_fidelity", success_fidelity.mean()},
        {"fidelity_all", all_fidelity.json()},
        {"fidelity_success", success_fidelity.json()},
        {"good_fraction", good_fraction},
        {"confidence_z", kSigmas}};
    if (lambda[0].count) {
      report["summary"]["lambda0_sq"] = lambda[0].json();
      report["summary"]["lambda1_sq"] = lambda[1].json();
      report["summary"]["lambda2_sq"] = lambda[2].json();
    }
    const bool pure = f.components == 1;
    switch (spec.kind) {
      case ProtocolKind::kRandomPermutation:
        checks.push_back({"fail_probability", fail_rate, 0.0, "equal", 0.0, true});
        if (has(th, "random_permutation.mean_fidelity")) {
          checks.push_back(
              {"mean_fidelity", all_fidelity.mean(),
               bound_value(th, "random_permutation.mean_fidelity"), "equal",
               kSigmas * all_fidelity.stderr_of_mean() + kExactSlack, f.diagonal});
        }
        break;
      case ProtocolKind::kSimpleScrambling:
        if (has(th, "simple_scrambling.fail_probability")) {
          const double b = bound_value(th, "simple_scrambling.fail_probability");
          checks.push_back({"fail_probability", fail_rate, b, "equal",
                            kSigmas * bernoulli_sigma(b, n) + kExactSlack,
                            f.diagonal});
          checks.push_back(
              {"success_fidelity", success_fidelity.mean(),
               bound_value(th, "simple_scrambling.success_fidelity"), "equal",
               kSigmas * success_fidelity.stderr_of_mean() + kExactSlack,
               f.diagonal && successes > 1});
        }
        break;
      case ProtocolKind::kHashCompare:
        if (has(th, "hash_compare.fail_bound")) {
          const double b = bound_value(th, "hash_compare.fail_bound");
          checks.push_back({"fail_probability", fail_rate, b, "at_most",
                            kSigmas * bernoulli_sigma(b, n), true});
          checks.push_back(
              {"mean_lambda1_sq", lambda[1].mean(),
               bound_value(th, "hash_compare.mean_lambda1_sq_bound"), "at_most",
               kSigmas * lambda[1].stderr_of_mean(), lambda[1].count > 1});
          checks.push_back({"min_success_fidelity", success_fidelity.min,
                            1.0 - f.epsilon, "at_least", kExactSlack,
                            pure && successes > 0});
        }
        break;
      case ProtocolKind::kCompleteScrambling:
        if (has(th, "complete_scrambling.fail_bound")) {
          const double b = bound_value(th, "complete_scrambling.fail_bound");
          const double q = 1.0 - bound_value(th, "complete_scrambling.good_fraction_bound");
          checks.push_back({"fail_probability", fail_rate, b, "at_most",
                            kSigmas * bernoulli_sigma(std::min(b, 1.0), n),
                            pure});
          checks.push_back({"good_fraction", good_fraction, 1.0 - q, "at_least",
                            kSigmas * bernoulli_sigma(q, successes),
                            pure && successes > 0});
        }
        break;
    }
    if (th.params) {
      gepp = check_gepp_definition(std::span<const RunRecord>(runs),
                                   *th.params, th.kind, f.fidelity, kSigmas);
    }
    if (config.emit_runs) {
      Json list = Json::array();
      for (const auto& r : runs) list.push_back(to_json(r, config.include_states));
      report["runs"] = std::move(list);
    }
  }

  report["theory"] = to_json(th.bounds);
  Json check_list = Json::array();
  ok = true;
  for (const auto& c : checks) {
    check_list.push_back(check_json(c));
    ok = ok && c.ok();
  }
  report["checks"] = std::move(check_list);
  if (gepp) {
    Json g = to_json(*gepp);
    g["params"] = to_json(*th.params);
    g["applies"] = th.gepp_applies;
    report["gepp"] = std::move(g);
    if (th.gepp_applies) ok = ok && gepp->passed();
  } else {
    report["gepp"] = nullptr;
  }
  report["passed"] = ok;
  stamp(report, config,
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count());
  return report;
}

namespace {

// ----------------------------------------------------------------- output

std::string csv_field(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return "";
  if (v.is_number_float()) {
    std::ostringstream os;
    os << std::setprecision(15) << v.get<double>();
    return os.str();
  }
  return v.dump();
}

std::string csv_table(const std::vector<std::string>& columns,
                      const std::vector<Json>& rows) {
  std::ostringstream os;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    os << (i ? "," : "") << columns[i];
  }
  os << '\n';
  for (const auto& row : rows) {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      os << (i ? "," : "");
      if (row.contains(columns[i])) os << csv_field(row.at(columns[i]));
    }
    os << '\n';
  }
  return os.str();
}

std::string transcript_text(const Json& transcript) {
  std::string out;
  for (const auto& e : transcript) {
    if (!out.empty()) out += ' ';
    out += e.at("kind").get<std::string>();
    out += '=';
    std::string values;
    for (const auto& v : e.at("values")) {
      if (!values.empty()) values += ':';
      values += std::to_string(v.get<Index>());
    }
    out += values;
  }
  return out;
}

void emit(const ExperimentConfig& config, const std::string& text,
          std::ostream& out) {
  if (config.out.empty()) {
    out << text;
  } else {
    write_text_file(config.out, text);
  }
}

std::string json_text(const Json& json) { return json.dump(2) + "\n"; }

std::string protocol_csv(const Json& report) {
  std::vector<Json> rows;
  if (report.contains("runs")) {
    std::size_t i = 0;
    for (const auto& r : report.at("runs")) {
      Json row = {{"index", i++},
                  {"seed", r.at("seed")},
                  {"component", r.at("component")},
                  {"failed", r.at("failed")},
                  {"fidelity", r.at("fidelity")},
                  {"transcript", transcript_text(r.at("transcript"))}};
      if (!r.at("lambdas").is_null()) {
        for (const auto& [k, v] : r.at("lambdas").items()) row[k] = v;
      }
      rows.push_back(std::move(row));
    }
    return csv_table({"index", "seed", "component", "failed", "fidelity",
                      "lambda0_sq", "lambda1_sq", "lambda2_sq", "transcript"},
                     rows);
  }
  if (report.contains("distribution")) {
    const Json& d = report.at("distribution");
    for (const auto& b : d.at("branches")) {
      rows.push_back({{"outcome", "success"},
                      {"component", b.at("component")},
                      {"probability", b.at("probability")},
                      {"fidelity", b.at("fidelity")},
                      {"transcript", transcript_text(b.at("transcript"))}});
    }
    for (const auto& b : d.at("failures")) {
      rows.push_back({{"outcome", "FAIL"},
                      {"component", b.at("component")},
                      {"probability", b.at("probability")},
                      {"transcript", transcript_text(b.at("transcript"))}});
    }
    return csv_table(
        {"outcome", "component", "probability", "fidelity", "transcript"}, rows);
  }
  std::vector<Json> check_rows(report.at("checks").begin(),
                               report.at("checks").end());
  return csv_table({"quantity", "simulated", "predicted", "relation", "slack",
                    "applies", "ok"},
                   check_rows);
}

// --------------------------------------------------------------- commands

int cmd_scramble_verify(const ExperimentConfig& config, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ScramblePerm perm = build_perm(config);
  const VerificationReport report = verify_scrambling(perm);
  Json json = header("scramble verify");
  json["name"] = perm.name();
  json["report"] = to_json(report);
  if (perm.construction() == Construction::kExtendedLinear) {
    Json rows = Json::array();
    for (const auto& row : extended_linear_case_table(perm.shape())) {
      rows.push_back({{"y", row.y}, {"g", row.g}, {"h", row.h}});
    }
    json["case_table"] = std::move(rows);
  }
  json["passed"] = report.passed();
  stamp(json, config,
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count());
  if (config.format == "csv") {
    std::vector<Json> rows;
    for (const auto& [count, pairs] : report.collision_histogram) {
      rows.push_back({{"collisions", count},
                      {"pairs", pairs},
                      {"expected_p", report.expected_p.str()},
                      {"measured_p", report.measured_p.str()}});
    }
    emit(config,
         csv_table({"collisions", "pairs", "expected_p", "measured_p"}, rows),
         out);
  } else {
    emit(config, json_text(json), out);
  }
  return report.passed() ? kExitOk : kExitCheckFailed;
}

int cmd_protocol_replay(const ExperimentConfig& config, std::ostream& out) {
  const Json file = read_json_file(config.replay);
  Json record_json = file;
  if (file.contains("runs")) {
    if (file.at("runs").empty()) {
      throw Error(Errc::kInvalidArgument, "report holds no runs");
    }
    record_json = file.at("runs").at(0);
  }
  const RunRecord recorded = run_record_from_json(record_json);
  const ProtocolSpec spec = build_spec(config);
  if (recorded.protocol != protocol_name(spec.kind)) {
    throw Error(Errc::kInvalidArgument,
                "record is for " + recorded.protocol + ", config runs " +
                    std::string(protocol_name(spec.kind)));
  }
  const RunRecord replayed = replay(spec, build_input(config), recorded);
  bool same = replayed.failed() == recorded.failed() &&
              replayed.transcript == recorded.transcript &&
              replayed.fidelity == recorded.fidelity;
  if (same && recorded.outcome && replayed.outcome) {
    same = state_to_json(*recorded.outcome) == state_to_json(*replayed.outcome);
  }
  Json json = header("protocol replay");
  json["record"] = to_json(replayed, config.include_states);
  json["reproduced"] = same;
  emit(config, json_text(json), out);
  return same ? kExitOk : kExitCheckFailed;
}

int cmd_protocol_run(const ExperimentConfig& config, std::ostream& out) {
  if (!config.replay.empty()) return cmd_protocol_replay(config, out);
  bool ok = true;
  const Json report = protocol_report(config, ok);
  emit(config, config.format == "csv" ? protocol_csv(report) : json_text(report),
       out);
  return ok ? kExitOk : kExitCheckFailed;
}

int cmd_protocol_sweep(const ExperimentConfig& config, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<int> ts =
      config.sweep_t.empty() ? std::vector<int>{config.t} : config.sweep_t;
  const std::vector<double> epsilons = config.sweep_epsilon.empty()
                                           ? std::vector<double>{config.epsilon}
                                           : config.sweep_epsilon;
  std::vector<Json> rows;
  std::vector<std::string> columns = {"t", "epsilon", "input_fidelity",
                                      "fail_probability", "success_fidelity",
                                      "mean_fidelity", "passed"};
  bool all_ok = true;
  for (const int t : ts) {
    for (const double eps : epsilons) {
      ExperimentConfig point = config;
      point.t = t;
      point.epsilon = eps;
      point.no_timestamp = true;
      point.emit_runs = false;
      bool ok = true;
      const Json report = protocol_report(point, ok);
      all_ok = all_ok && ok;
      Json row = {{"t", t},
                  {"epsilon", eps},
                  {"input_fidelity", report["input"]["fidelity"]},
                  {"fail_probability", report["summary"]["fail_probability"]},
                  {"success_fidelity", report["summary"]["success_fidelity"]},
                  {"mean_fidelity", report["summary"]["mean_fidelity"]},
                  {"passed", ok}};
      for (const auto& c : report["checks"]) {
        const std::string q = c["quantity"].get<std::string>();
        row["predicted_" + q] = c["predicted"];
        row["ok_" + q] = c["ok"];
        for (const std::string& col : {"predicted_" + q, "ok_" + q}) {
          if (std::find(columns.begin(), columns.end(), col) == columns.end()) {
            columns.push_back(col);
          }
        }
      }
      rows.push_back(std::move(row));
    }
  }
  if (config.format == "csv") {
    emit(config, csv_table(columns, rows), out);
  } else {
    Json json = header("protocol sweep");
    json["config"] = config_to_json(config);
    json["rows"] = rows;
    json["passed"] = all_ok;
    stamp(json, config,
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
              .count());
    emit(config, json_text(json), out);
  }
  return all_ok ? kExitOk : kExitCheckFailed;
}

int cmd_bounds_table(const ExperimentConfig& config, bool format_given,
                     std::ostream& out) {
  const std::vector<double> epsilons = config.sweep_epsilon.empty()
                                           ? std::vector<double>{config.epsilon}
                                           : config.sweep_epsilon;
  std::vector<Json> rows;
  std::vector<std::string> columns;
  if (config.table == "absolute") {
    const Index N = config.dim ? config.dim : power_of_two(config.n);
    const Index K = config.aux_dim;
    columns = {"N", "K", "M", "epsilon", "upper_bound", "improvement"};
    for (const double eps : epsilons) {
      for (Index M = K; M <= N * K; M *= 2) {
        if ((N * K) % M != 0) continue;
        const double bound = absolute_upper_bound(N, K, M, eps);
        rows.push_back({{"N", N},
                        {"K", K},
                        {"M", M},
                        {"epsilon", eps},
                        {"upper_bound", bound},
                        {"improvement", bound - (1.0 - eps)}});
      }
    }
  } else if (config.table == "scrambling") {
    const Index N = power_of_two(config.n);
    const Index K = N - 1;
    std::vector<int> ts = config.sweep_t;
    if (ts.empty()) {
      for (int t = 1; t < config.n; ++t) ts.push_back(t);
    }
    columns = {"n", "t", "epsilon", "N", "K", "W", "L", "M",
               "absolute_upper_bound", "simple_success_probability",
               "simple_success_fidelity", "simple_fidelity_bound",
               "simple_delta", "headline_simple_delta", "S", "complete_delta",
               "complete_p", "complete_q", "headline_complete_delta",
               "headline_consistent"};
    for (const int t : ts) {
      if (t < 1 || t >= config.n) {
        throw Error(Errc::kOutOfRange, "t must lie in [1, n)");
      }
      const Index L = Index{1} << t;
      const Index W = N / L;
      const Index S = L * L;
      for (const double eps : epsilons) {
        const SimpleScramblingPrediction s =
            simple_scrambling_prediction(N, L, W, eps);
        const GeppParams simple = simple_scrambling_params(N, K, W, eps);
        const GeppParams complete =
            complete_scrambling_prediction(N, K, W, S, eps);
        const GeppParams headline = complete_scrambling_headline(N, K, t, eps);
        const bool consistent =
            std::abs(complete.delta - headline.delta) <= 1e-12 &&
            std::abs(*complete.p - *headline.p) <= 1e-12 &&
            std::abs(*complete.q - *headline.q) <= 1e-12 &&
            complete.K == headline.K && complete.M == headline.M;
        rows.push_back({{"n", config.n},
                        {"t", t},
                        {"epsilon", eps},
                        {"N", N},
                        {"K", K},
                        {"W", W},
                        {"L", L},
                        {"M", W * K},
                        {"absolute_upper_bound",
                         absolute_upper_bound(N, K, W * K, eps)},
                        {"simple_success_probability", s.success_probability},
                        {"simple_success_fidelity", s.success_fidelity},
                        {"simple_fidelity_bound", s.published_bound},
                        {"simple_delta", simple.delta},
                        {"headline_simple_delta", eps / static_cast<double>(L)},
                        {"S", S},
                        {"complete_delta", complete.delta},
                        {"complete_p", *complete.p},
                        {"complete_q", *complete.q},
                        {"headline_complete_delta", headline.delta},
                        {"headline_consistent", consistent}});
      }
    }
  } else {
    throw Error(Errc::kInvalidArgument, "table must be scrambling or absolute");
  }
  if (format_given && config.format == "json") {
    Json json = header("bounds table");
    json["table"] = config.table;
    json["rows"] = rows;
    emit(config, json_text(json), out);
  } else {
    emit(config, csv_table(columns, rows), out);
  }
  return kExitOk;
}

int cmd_state_make(const ExperimentConfig& config, std::ostream& out) {
  const Index N = config.dim ? config.dim : power_of_two(config.n);
  Json json;
  if (config.input == "max-entangled") {
    json = state_to_json(max_entangled(N));
  } else if (config.input == "near-target") {
    json = state_to_json(random_state_near_target(
        N, config.epsilon, config.diagonal_only, config.seed.value_or(0)));
  } else if (config.input == "adversarial-mix") {
    json = ensemble_to_json(adversarial_mixture(N, config.epsilon));
  } else {
    throw Error(Errc::kInvalidArgument,
                "state make needs max-entangled, near-target or adversarial-mix");
  }
  Json doc = {{"schema", kSchema}};
  doc.update(json);
  emit(config, json_text(doc), out);
  return kExitOk;
}

Json error_json(const std::string& code, const std::string& message) {
  return {{"schema", kSchema}, {"error", {{"code", code}, {"message", message}}}};
}

// ------------------------------------------------------------------ flags

enum Group : unsigned {
  kConstruction = 1,
  kProtocolFlags = 2,
  kSampling = 4,
  kOutput = 8,
  kSweep = 16,
  kStateFlags = 32,
  kTable = 64,
};

struct Flags {
  ExperimentConfig values;
  std::uint64_t seed = 0;
  std::string randomness;
  std::string sweep_epsilon;
  std::string sweep_t;
  std::string config_file;
  std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>>
      overlays;
};

template <typename T>
void add(CLI::App* cmd, Flags& flags, const std::string& name, T ExperimentConfig::*member,
         const std::string& help) {
  CLI::Option* opt = cmd->add_option(name, flags.values.*member, help);
  flags.overlays.push_back(
      {opt, [member, &flags](ExperimentConfig& c) { c.*member = flags.values.*member; }});
}

void add_flag(CLI::App* cmd, Flags& flags, const std::string& name,
              bool ExperimentConfig::*member, const std::string& help) {
  CLI::Option* opt = cmd->add_flag(name, flags.values.*member, help);
  flags.overlays.push_back(
      {opt, [member, &flags](ExperimentConfig& c) { c.*member = flags.values.*member; }});
}

void register_flags(CLI::App* cmd, Flags& flags, unsigned groups) {
  using C = ExperimentConfig;
  cmd->add_option("--config", flags.config_file,
                  "JSON config file; flags override its values");
  if (groups & (kConstruction | kProtocolFlags | kStateFlags | kTable)) {
    add(cmd, flags, "--n", &C::n, "field degree / log2 of the dimension");
  }
  if (groups & (kConstruction | kTable)) {
    add(cmd, flags, "--t", &C::t, "split l of the multiplication table");
  }
  if (groups & kConstruction) {
    add(cmd, flags, "--construction", &C::construction,
        "multiplication_table | linear_function | extended_linear");
    add(cmd, flags, "--d", &C::d, "tuple length of the extended construction");
  }
  if (groups & (kProtocolFlags | kStateFlags | kTable)) {
    add(cmd, flags, "--epsilon", &C::epsilon, "input infidelity");
    add(cmd, flags, "--dim", &C::dim, "input dimension when not fixed by n");
  }
  if (groups & (kProtocolFlags | kStateFlags)) {
    add(cmd, flags, "--input", &C::input,
        "max-entangled | near-target | adversarial-mix | state file");
    add_flag(cmd, flags, "--diagonal-only", &C::diagonal_only,
             "near-target noise inside the diagonal subspace");
    CLI::Option* seed = cmd->add_option("--seed", flags.seed, "RNG seed");
    flags.overlays.push_back(
        {seed, [&flags](ExperimentConfig& c) { c.seed = flags.seed; }});
  }
  if (groups & kProtocolFlags) {
    add(cmd, flags, "--protocol", &C::protocol,
        "random_permutation | simple_scrambling | hash_compare | "
        "complete_scrambling");
    add(cmd, flags, "--s-rounds", &C::s_rounds, "hash rounds s (S = 2^s)");
    add(cmd, flags, "--mode", &C::mode, "exact | sample");
    add(cmd, flags, "--runs", &C::runs, "runs in sample mode");
    add(cmd, flags, "--out-dim", &C::out_dim, "random permutation output M");
    add(cmd, flags, "--aux-dim", &C::aux_dim, "random permutation auxiliary K");
    add(cmd, flags, "--hadamard", &C::hadamard, "auto | on | off");
    add(cmd, flags, "--threads", &C::threads, "worker threads (0 = all cores)");
    add(cmd, flags, "--max-branches", &C::max_branches,
        "largest branch list written to the report");
    add_flag(cmd, flags, "--emit-runs", &C::emit_runs,
             "include every run record in sample mode");
    add_flag(cmd, flags, "--states", &C::include_states,
             "include post-states in the report");
    CLI::Option* r = cmd->add_option(
        "--randomness", flags.randomness,
        "explicit permutation or hash vectors, comma separated");
    flags.overlays.push_back({r, [&flags](ExperimentConfig& c) {
                                c.randomness = parse_index_list(flags.randomness);
                              }});
    add(cmd, flags, "--replay", &C::replay, "run record to replay");
  }
  if (groups & kTable) {
    add(cmd, flags, "--table", &C::table, "scrambling | absolute");
    add(cmd, flags, "--aux-dim", &C::aux_dim, "auxiliary K for absolute-bound rows");
  }
  if (groups & (kSweep | kTable)) {
    CLI::Option* e = cmd->add_option("--sweep-epsilon", flags.sweep_epsilon,
                                     "comma-separated epsilon grid");
    flags.overlays.push_back({e, [&flags](ExperimentConfig& c) {
                                c.sweep_epsilon.clear();
                                std::stringstream ss(flags.sweep_epsilon);
                                std::string item;
                                while (std::getline(ss, item, ',')) {
                                  if (!item.empty()) c.sweep_epsilon.push_back(std::stod(item));
                                }
                              }});
    CLI::Option* t = cmd->add_option("--sweep-t", flags.sweep_t,
                                     "comma-separated t grid");
    flags.overlays.push_back({t, [&flags](ExperimentConfig& c) {
                                c.sweep_t.clear();
                                for (const Index v : parse_index_list(flags.sweep_t)) {
                                  c.sweep_t.push_back(static_cast<int>(v));
                                }
                              }});
  }
  add(cmd, flags, "--out", &C::out, "output path (default stdout)");
  add(cmd, flags, "--format", &C::format, "json | csv");
  add_flag(cmd, flags, "--no-timestamp", &C::no_timestamp,
           "omit wall time and timestamp");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err) {
  CLI::App app{"Entanglement purification protocol simulator", "epurify"};
  app.require_subcommand(1);
  CLI::App* scramble = app.add_subcommand("scramble", "scrambling permutations");
  scramble->require_subcommand(1);
  CLI::App* verify = scramble->add_subcommand("verify", "verify a construction");
  CLI::App* protocol = app.add_subcommand("protocol", "run protocols");
  protocol->require_subcommand(1);
  CLI::App* prun = protocol->add_subcommand("run", "run one configuration");
  CLI::App* sweep = protocol->add_subcommand("sweep", "sweep t and epsilon");
  CLI::App* bounds = app.add_subcommand("bounds", "closed-form predictions");
  bounds->require_subcommand(1);
  CLI::App* table = bounds->add_subcommand("table", "prediction table");
  CLI::App* state = app.add_subcommand("state", "input states");
  state->require_subcommand(1);
  CLI::App* make = state->add_subcommand("make", "write a state file");

  Flags f_verify, f_run, f_sweep, f_table, f_make;
  register_flags(verify, f_verify, kConstruction | kOutput);
  register_flags(prun, f_run, kConstruction | kProtocolFlags | kSampling | kOutput);
  register_flags(sweep, f_sweep,
                 kConstruction | kProtocolFlags | kSampling | kOutput | kSweep);
  register_flags(table, f_table, kTable | kOutput);
  register_flags(make, f_make, kStateFlags | kOutput);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    std::ostringstream os;
    app.exit(e, os, os);
    err << json_text(error_json("usage", os.str()));
    return kExitUsage;
  }

  Flags* flags = nullptr;
  CLI::App* chosen = nullptr;
  for (auto [cmd, fl] : {std::pair{verify, &f_verify}, std::pair{prun, &f_run},
                         std::pair{sweep, &f_sweep}, std::pair{table, &f_table},
                         std::pair{make, &f_make}}) {
    if (cmd->parsed()) {
      chosen = cmd;
      flags = fl;
    }
  }
  try {
    ExperimentConfig config;
    bool format_given = false;
    if (!flags->config_file.empty()) {
      const Json file = read_json_file(flags->config_file);
      apply_config_json(file, config);
      format_given = file.contains("format");
    }
    for (auto& [opt, overlay] : flags->overlays) {
      if (opt->count() > 0) {
        overlay(config);
        if (opt->get_name() == "--format") format_given = true;
      }
    }
    if (config.format != "json" && config.format != "csv") {
      throw Error(Errc::kInvalidArgument, "format must be json or csv");
    }
    if (chosen == verify) return cmd_scramble_verify(config, out);
    if (chosen == prun) return cmd_protocol_run(config, out);
    if (chosen == sweep) return cmd_protocol_sweep(config, out);
    if (chosen == table) return cmd_bounds_table(config, format_given, out);
    return cmd_state_make(config, out);
  } catch (const Error& e) {
    err << json_text(error_json(std::string(errc_name(e.code())), e.what()));
    return kExitUsage;
  } catch (const std::exception& e) {
    err << json_text(error_json("invalid_argument", e.what()));
    return kExitUsage;
  }
}

}  // namespace epurify::cli
