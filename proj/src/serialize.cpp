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

#include "epurify/serialize.hpp"

#include <fstream>
#include <sstream>

#include "epurify/error.hpp"

namespace epurify {

namespace {

Json layout_to_json(const RegisterLayout& layout) {
  Json out = Json::array();
  for (const auto& r : layout.registers()) {
    out.push_back({{"name", r.name}, {"dim", r.dim}});
  }
  return out;
}

RegisterLayout layout_from_json(const Json& json) {
  std::vector<Register> regs;
  for (const auto& r : json) {
    regs.push_back({r.at("name").get<std::string>(), r.at("dim").get<Index>()});
  }
  return RegisterLayout(std::move(regs));
}

// Runs `body`, turning JSON library errors into Errc::kParse.
template <typename F>
auto parsing(const char* what, F&& body) {
  try {
    return body();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, std::string("malformed ") + what + ": " + e.what());
  }
}

Json lambdas_or_null(const std::optional<LambdaWeights>& lambdas) {
  return lambdas ? to_json(*lambdas) : Json(nullptr);
}

}  // namespace

Json state_to_json(const SparseState& state) {
  Json amps = Json::array();
  for (const auto& e : state.entries()) {
    amps.push_back({e.a, e.b, e.amp.real(), e.amp.imag()});
  }
  return {{"dim", state.dim()},
          {"layout_a", layout_to_json(state.layout_a())},
          {"layout_b", layout_to_json(state.layout_b())},
          {"amps", std::move(amps)}};
}

SparseState state_from_json(const Json& json) {
  RegisterLayout layout_a;
  RegisterLayout layout_b;
  Index dim = 0;
  std::vector<SparseState::Entry> entries;
  parsing("state", [&] {
    dim = json.at("dim").get<Index>();
    if (json.contains("layout_a")) {
      layout_a = layout_from_json(json.at("layout_a"));
      layout_b = json.contains("layout_b")
                     ? layout_from_json(json.at("layout_b"))
                     : layout_a;
    } else {
      layout_a = layout_b = RegisterLayout::single("X", dim);
    }
    for (const auto& row : json.at("amps")) {
      if (!row.is_array() || row.size() != 4) {
        throw Error(Errc::kParse, "amplitude rows must be [a, b, re, im]");
      }
      entries.push_back({row[0].get<Index>(), row[1].get<Index>(),
                         Complex(row[2].get<double>(), row[3].get<double>())});
    }
    return 0;
  });
  if (!(layout_a == layout_b)) {
    throw Error(Errc::kLayoutMismatch,
                "layouts differ: " + layout_a.describe() + " vs " +
                    layout_b.describe());
  }
  if (layout_a.dim() != dim) {
    throw Error(Errc::kDimensionMismatch,
                "dim " + std::to_string(dim) + " but layout " +
                    layout_a.describe());
  }
  return SparseState(std::move(layout_a), std::move(entries));
}

Json ensemble_to_json(const Ensemble& ensemble) {
  Json components = Json::array();
  for (const auto& c : ensemble.components()) {
    components.push_back(
        {{"probability", c.probability}, {"state", state_to_json(c.state)}});
  }
  return {{"components", std::move(components)}};
}

Ensemble ensemble_from_json(const Json& json) {
  if (!json.is_object()) throw Error(Errc::kParse, "expected a JSON object");
  if (!json.contains("components")) return Ensemble(state_from_json(json));
  std::vector<EnsembleComponent> components;
  parsing("ensemble", [&] {
    for (const auto& c : json.at("components")) {
      components.push_back(
          {c.at("probability").get<double>(), state_from_json(c.at("state"))});
    }
    return 0;
  });
  return Ensemble(std::move(components));
}

Json transcript_to_json(const Transcript& transcript) {
  Json out = Json::array();
  for (const auto& e : transcript) {
    out.push_back({{"kind", e.kind}, {"values", e.values}});
  }
  return out;
}

Transcript transcript_from_json(const Json& json) {
  return parsing("transcript", [&] {
    Transcript out;
    for (const auto& e : json) {
      out.push_back({e.at("kind").get<std::string>(),
                     e.at("values").get<std::vector<Index>>()});
    }
    return out;
  });
}

Json to_json(const LambdaWeights& lambdas) {
  return {{"lambda0_sq", lambdas.lambda0_sq},
          {"lambda1_sq", lambdas.lambda1_sq},
          {"lambda2_sq", lambdas.lambda2_sq}};
}

Json to_json(const VerificationReport& report) {
  Json histogram = Json::array();
  for (const auto& [count, pairs] : report.collision_histogram) {
    histogram.push_back({{"collisions", count}, {"pairs", pairs}});
  }
  Json bijective = Json::array();
  for (const bool b : report.bijective_per_y) bijective.push_back(b);
  return {{"construction", report.construction},
          {"params",
           {{"N", report.params.N},
            {"K", report.params.K},
            {"W", report.params.W},
            {"L", report.params.L}}},
          {"all_bijective", report.all_bijective},
          {"bijective_per_y", std::move(bijective)},
          {"roundtrip", report.roundtrip},
          {"collision_histogram", std::move(histogram)},
          {"uniform", report.uniform},
          {"measured_p", report.measured_p.str()},
          {"expected_p", report.expected_p.str()},
          {"p_matches", report.p_matches},
          {"n_equals_wl", report.n_equals_wl},
          {"n_at_most_kl", report.n_at_most_kl},
          {"passed", report.passed()}};
}

Json to_json(const OutcomeDistribution& dist, bool include_states) {
  Json branches = Json::array();
  for (const auto& b : dist.branches) {
    Json j = {{"transcript", transcript_to_json(b.transcript)},
              {"component", b.component},
              {"probability", b.probability},
              {"fidelity", b.fidelity},
              {"lambdas", lambdas_or_null(b.lambdas)}};
    if (include_states) j["state"] = state_to_json(b.state);
    branches.push_back(std::move(j));
  }
  Json failures = Json::array();
  for (const auto& f : dist.failures) {
    failures.push_back({{"transcript", transcript_to_json(f.transcript)},
                        {"component", f.component},
                        {"probability", f.probability},
                        {"lambdas", lambdas_or_null(f.lambdas)}});
  }
  Json metadata = Json::object();
  for (const auto& [k, v] : dist.metadata) metadata[k] = v;
  return {{"protocol", dist.protocol},
          {"metadata", std::move(metadata)},
          {"output_dim", dist.output_dim},
          {"success_probability", dist.success_probability()},
          {"fail_probability", dist.fail_probability},
          {"residue", dist.residue},
          {"mean_fidelity", dist.mean_fidelity()},
          {"success_fidelity", dist.success_fidelity()},
          {"branches", std::move(branches)},
          {"failures", std::move(failures)}};
}

Json to_json(const RunRecord& record, bool include_state) {
  Json j = {{"protocol", record.protocol},
            {"seed", record.seed},
            {"component", record.component},
            {"transcript", transcript_to_json(record.transcript)},
            {"failed", record.failed()},
            {"fidelity", record.fidelity},
            {"lambdas", lambdas_or_null(record.lambdas)}};
  if (include_state) {
    j["outcome"] = record.outcome ? state_to_json(*record.outcome)
                                  : Json("FAIL");
  }
  return j;
}

RunRecord run_record_from_json(const Json& json) {
  RunRecord record;
  parsing("run record", [&] {
    record.protocol = json.at("protocol").get<std::string>();
    record.seed = json.at("seed").get<std::uint64_t>();
    record.component = json.value("component", std::size_t{0});
    record.transcript = transcript_from_json(json.at("transcript"));
    record.fidelity = json.value("fidelity", 0.0);
    if (json.contains("lambdas") && !json.at("lambdas").is_null()) {
      const Json& l = json.at("lambdas");
      record.lambdas = LambdaWeights{l.at("lambda0_sq").get<double>(),
                                     l.at("lambda1_sq").get<double>(),
                                     l.at("lambda2_sq").get<double>()};
    }
    return 0;
  });
  if (json.contains("outcome") && json.at("outcome").is_object()) {
    record.outcome = state_from_json(json.at("outcome"));
  }
  return record;
}

Json to_json(const GeppParams& params) {
  return {{"N", params.N},
          {"K", params.K},
          {"M", params.M},
          {"epsilon", params.epsilon},
          {"delta", params.delta},
          {"p", params.p ? Json(*params.p) : Json(nullptr)},
          {"q", params.q ? Json(*params.q) : Json(nullptr)}};
}

Json to_json(const GeppReport& report) {
  return {{"kind", std::string(gepp_kind_name(report.kind))},
          {"passed", report.passed()},
          {"input_ok", report.input_ok},
          {"fail_clause", report.fail_clause},
          {"fidelity_clause", report.fidelity_clause},
          {"fail_probability", report.fail_probability},
          {"fail_limit", report.fail_limit},
          {"fidelity_statistic", report.fidelity_statistic},
          {"fidelity_limit", report.fidelity_limit},
          {"detail", report.detail}};
}

Json to_json(const BoundSet& bounds) {
  Json out = Json::object();
  for (const auto& [id, entry] : bounds) {
    Json inputs = Json::object();
    for (const auto& [k, v] : entry.inputs) inputs[k] = v;
    out[id] = {{"inputs", std::move(inputs)},
               {"value", entry.value},
               {"formula", entry.formula}};
  }
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::kIo, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::kParse, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::kIo, "cannot write " + path.string());
  out << text;
  if (!out) throw Error(Errc::kIo, "write failed for " + path.string());
}

}  // namespace epurify
