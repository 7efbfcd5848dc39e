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

#ifndef EPURIFY_TOOLS_CLI_HPP_
#define EPURIFY_TOOLS_CLI_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "epurify/protocols.hpp"
#include "epurify/serialize.hpp"

namespace epurify::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitUsage = 2;

struct ExperimentConfig {
  std::string protocol = "simple_scrambling";
  std::string construction = "multiplication_table";
  int n = 3;
  int t = 1;  // split l of the multiplication table
  int d = 2;
  unsigned s_rounds = 4;
  double epsilon = 0.1;
  /// max-entangled | near-target | adversarial-mix | path to a state file.
  std::string input = "near-target";
  bool diagonal_only = false;
  std::string mode = "exact";  // exact | sample
  std::uint64_t runs = 1000;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string format = "json";  // json | csv
  bool no_timestamp = false;
  std::string replay;
  Index dim = 0;      // input dimension when no construction fixes it
  Index out_dim = 2;  // random permutation M
  Index aux_dim = 1;  // random permutation K
  std::string hadamard = "auto";  // auto | on | off
  /// Explicit permutation or hash vectors; empty means enumerate (exact
  /// mode) or draw per run (sample mode).
  std::vector<Index> randomness;
  bool emit_runs = false;
  bool include_states = false;
  unsigned threads = 0;
  std::uint64_t max_branches = 4096;
  std::vector<double> sweep_epsilon;
  std::vector<int> sweep_t;
  std::string table = "scrambling";  // bounds table: scrambling | absolute
};

/// Keys are the field names above.
void apply_config_json(const Json& json, ExperimentConfig& config);
Json config_to_json(const ExperimentConfig& config);

ScramblePerm build_perm(const ExperimentConfig& config);
/// Throws Errc::kInvalidArgument on inconsistent settings.
ProtocolSpec build_spec(const ExperimentConfig& config);
Ensemble build_input(const ExperimentConfig& config);

/// Runs the protocol described by `config` and returns the report; `ok` is
/// false when an applicable theory check fails.
Json protocol_report(const ExperimentConfig& config, bool& ok);

/// Entry point; argv[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace epurify::cli

#endif  // EPURIFY_TOOLS_CLI_HPP_
