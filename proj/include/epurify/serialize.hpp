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

// JSON forms of states, reports and run records.
//
// State file:
//   {"dim": N, "layout_a": [{"name": "X", "dim": N}], "layout_b": [...],
//    "amps": [[a, b, re, im], ...]}
// Ensemble file:
//   {"components": [{"probability": p, "state": <state>}, ...]}

#ifndef EPURIFY_SERIALIZE_HPP_
#define EPURIFY_SERIALIZE_HPP_

#include <filesystem>
#include <string>

#include <json.hpp>

#include "epurify/bounds.hpp"
#include "epurify/protocols.hpp"
#include "epurify/qstate.hpp"
#include "epurify/scramble.hpp"

namespace epurify {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchema = "epurify/1";

Json state_to_json(const SparseState& state);
/// Throws Errc::kParse on malformed input, Errc::kLayoutMismatch when the two
/// layouts differ, Errc::kNormalizationViolated on a non-unit state.
SparseState state_from_json(const Json& json);

Json ensemble_to_json(const Ensemble& ensemble);
/// Accepts an ensemble file or a single state file.
Ensemble ensemble_from_json(const Json& json);

Json transcript_to_json(const Transcript& transcript);
Transcript transcript_from_json(const Json& json);

Json to_json(const VerificationReport& report);
Json to_json(const OutcomeDistribution& dist, bool include_states);
Json to_json(const RunRecord& record, bool include_state = true);
RunRecord run_record_from_json(const Json& json);
Json to_json(const GeppParams& params);
Json to_json(const GeppReport& report);
Json to_json(const BoundSet& bounds);
Json to_json(const LambdaWeights& lambdas);

/// Throws Errc::kIo or Errc::kParse.
Json read_json_file(const std::filesystem::path& path);
/// Throws Errc::kIo.
void write_text_file(const std::filesystem::path& path,
                     const std::string& text);

}  // namespace epurify

#endif  // EPURIFY_SERIALIZE_HPP_
