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

// Measure-and-compare primitives. Both work on the register digit of each
// entry plus the "rest" index (all other registers), so a branch's
// post-state is a direct regrouping of the input entries.

#include <algorithm>
#include <bit>
#include <cmath>
#include <map>
#include <numbers>

#include "epurify/error.hpp"
#include "epurify/qstate.hpp"

namespace epurify {

namespace {

struct SplitEntry {
  Index rest_a;
  Index rest_b;
  Index digit_a;
  Index digit_b;
  Complex amp;
};

struct RegisterView {
  Index dim;
  Index low;  // stride of the register
  RegisterLayout rest_layout;

  Index rest(Index index) const {
    return (index / (dim * low)) * low + index % low;
  }
  Index digit(Index index) const { return (index / low) % dim; }
};

RegisterView view_of(const SparseState& state, std::string_view reg) {
  const RegisterLayout& layout = state.layout();
  const std::size_t pos = layout.position(reg);
  return {layout.registers()[pos].dim, layout.stride(pos),
          layout.without(reg)};
}

std::vector<SplitEntry> split_entries(const SparseState& state,
                                      const RegisterView& view) {
  std::vector<SplitEntry> out;
  out.reserve(state.size());
  for (const auto& e : state.entries()) {
    out.push_back({view.rest(e.a), view.rest(e.b), view.digit(e.a),
                   view.digit(e.b), e.amp});
  }
  std::sort(out.begin(), out.end(), [](const SplitEntry& l, const SplitEntry& r) {
    return l.rest_a != r.rest_a ? l.rest_a < r.rest_a : l.rest_b < r.rest_b;
  });
  return out;
}

}  // namespace

OutcomeSplit fourier_measure_compare(const SparseState& state,
                                     std::string_view reg, bool use_hadamard) {
  const RegisterView view = view_of(state, reg);
  const Index L = view.dim;
  if (use_hadamard && !std::has_single_bit(L)) {
    throw Error(Errc::kInvalidArgument,
                "Hadamard compare needs a power-of-2 register, got dimension " +
                    std::to_string(L));
  }
  const std::vector<SplitEntry> entries = split_entries(state, view);

  std::vector<Complex> roots(L);
  for (Index k = 0; k < L; ++k) {
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) /
                         static_cast<double>(L);
    roots[k] = Complex(std::cos(angle), std::sin(angle));
  }
  const double scale = 1.0 / static_cast<double>(L);

  // Outcome g on both sides carries amp * w^{g (b - a)} / L (Fourier) or
  // amp * (-1)^{g . (a xor b)} / L (Hadamard) into |rest_a, rest_b>.
  std::vector<std::vector<SparseState::Entry>> per_outcome(L);
  std::vector<double> mass(L, 0.0);
  std::size_t begin = 0;
  while (begin < entries.size()) {
    std::size_t end = begin;
    while (end < entries.size() && entries[end].rest_a == entries[begin].rest_a &&
           entries[end].rest_b == entries[begin].rest_b) {
      ++end;
    }
    for (Index g = 0; g < L; ++g) {
      Complex sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) {
        const SplitEntry& e = entries[i];
        if (use_hadamard) {
          const bool odd = std::popcount(g & (e.digit_a ^ e.digit_b)) & 1;
          sum += odd ? -e.amp : e.amp;
        } else {
          const Index diff = (e.digit_b + L - e.digit_a) % L;
          sum += e.amp * roots[(g * diff) % L];
        }
      }
      sum *= scale;
      if (std::abs(sum) >= kPruneThreshold) {
        per_outcome[g].push_back({entries[begin].rest_a, entries[begin].rest_b, sum});
        mass[g] += std::norm(sum);
      }
    }
    begin = end;
  }

  OutcomeSplit split;
  double matched = 0.0;
  for (Index g = 0; g < L; ++g) {
    matched += mass[g];
    if (mass[g] < kBranchDropThreshold) {
      split.residue += mass[g];
      continue;
    }
    split.matches.push_back(
        {g, mass[g],
         SparseState::normalized(view.rest_layout, std::move(per_outcome[g]))});
  }
  split.mismatch_probability = std::max(0.0, state.norm_squared() - matched);
  return split;
}

ComputationalSplit measure_both(const SparseState& state, std::string_view reg) {
  const RegisterView view = view_of(state, reg);
  std::map<Index, std::vector<SparseState::Entry>> same;
  std::map<Index, double> same_mass;
  std::map<std::pair<Index, Index>, double> different;
  for (const auto& e : state.entries()) {
    const Index da = view.digit(e.a);
    const Index db = view.digit(e.b);
    if (da == db) {
      same[da].push_back({view.rest(e.a), view.rest(e.b), e.amp});
      same_mass[da] += std::norm(e.amp);
    } else {
      different[{da, db}] += std::norm(e.amp);
    }
  }
  ComputationalSplit split;
  for (auto& [digit, entries] : same) {
    const double p = same_mass[digit];
    if (p < kBranchDropThreshold) {
      split.residue += p;
      continue;
    }
    split.matches.push_back(
        {digit, p, SparseState::normalized(view.rest_layout, std::move(entries))});
  }
  for (const auto& [digits, p] : different) {
    split.mismatches.push_back({digits.first, digits.second, p});
  }
  return split;
}

}  // namespace epurify
