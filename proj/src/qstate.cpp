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

#include "epurify/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <unordered_map>

#include "epurify/error.hpp"
#include "epurify/rng.hpp"

namespace epurify {

namespace {

constexpr Index kMaxDim = Index{1} << 40;

bool entry_less(const SparseState::Entry& l, const SparseState::Entry& r) {
  return l.a != r.a ? l.a < r.a : l.b < r.b;
}

void require_same_dim(const SparseState& first, const SparseState& second) {
  if (first.dim() != second.dim()) {
    throw Error(Errc::kDimensionMismatch,
                "states of dimension " + std::to_string(first.dim()) +
                    " and " + std::to_string(second.dim()));
  }
}

}  // namespace

// ---------------------------------------------------------------- layout

RegisterLayout::RegisterLayout(std::vector<Register> registers)
    : registers_(std::move(registers)) {
  std::set<std::string> names;
  for (const Register& r : registers_) {
    if (r.dim < 2) {
      throw Error(Errc::kInvalidArgument,
                  "register '" + r.name + "' has dimension < 2");
    }
    if (!names.insert(r.name).second) {
      throw Error(Errc::kInvalidArgument, "duplicate register '" + r.name + "'");
    }
    if (dim_ > kMaxDim / r.dim) {
      throw Error(Errc::kOutOfRange, "layout dimension overflow");
    }
    dim_ *= r.dim;
  }
}

RegisterLayout RegisterLayout::single(std::string name, Index dim) {
  if (dim == 0) throw Error(Errc::kInvalidArgument, "dimension 0");
  if (dim == 1) return RegisterLayout();
  return RegisterLayout({Register{std::move(name), dim}});
}

std::optional<std::size_t> RegisterLayout::find(std::string_view name) const {
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    if (registers_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t RegisterLayout::position(std::string_view name) const {
  if (auto pos = find(name)) return *pos;
  throw Error(Errc::kRegisterNotFound, "no register '" + std::string(name) +
                                           "' in layout " + describe());
}

Index RegisterLayout::stride(std::size_t pos) const {
  Index s = 1;
  for (std::size_t i = pos + 1; i < registers_.size(); ++i) {
    s *= registers_[i].dim;
  }
  return s;
}

Index RegisterLayout::digit(Index index, std::size_t pos) const {
  return (index / stride(pos)) % registers_[pos].dim;
}

RegisterLayout RegisterLayout::without(std::string_view name) const {
  const std::size_t pos = position(name);
  std::vector<Register> rest = registers_;
  rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(pos));
  return RegisterLayout(std::move(rest));
}

RegisterLayout RegisterLayout::concat(const RegisterLayout& tail) const {
  std::vector<Register> all = registers_;
  all.insert(all.end(), tail.registers_.begin(), tail.registers_.end());
  return RegisterLayout(std::move(all));
}

std::string RegisterLayout::describe() const {
  std::string out = "[";
  for (std::size_t i = 0; i < registers_.size(); ++i) {
    if (i) out += ", ";
    out += registers_[i].name + ":" + std::to_string(registers_[i].dim);
  }
  return out + "]";
}

// ---------------------------------------------------------------- states

SparseState::SparseState(RegisterLayout layout, std::vector<Entry> entries)
    : layout_(std::move(layout)), entries_(std::move(entries)) {
  canonicalize();
  const double norm = norm_squared();
  if (std::abs(norm - 1.0) > kNormTolerance) {
    throw Error(Errc::kNormalizationViolated,
                "normalization violated: squared norm " + std::to_string(norm));
  }
}

SparseState SparseState::normalized(RegisterLayout layout,
                                    std::vector<Entry> entries) {
  SparseState state;
  state.layout_ = std::move(layout);
  state.entries_ = std::move(entries);
  state.canonicalize();
  const double norm = state.norm_squared();
  if (!(norm > 0.0)) {
    throw Error(Errc::kNormalizationViolated, "cannot normalize a zero vector");
  }
  const double scale = 1.0 / std::sqrt(norm);
  for (Entry& e : state.entries_) e.amp *= scale;
  // Rescaling may push entries under the prune threshold.
  std::erase_if(state.entries_,
                [](const Entry& e) { return std::abs(e.amp) < kPruneThreshold; });
  return state;
}

void SparseState::canonicalize() {
  const Index dim = layout_.dim();
  for (const Entry& e : entries_) {
    if (e.a >= dim || e.b >= dim) {
      throw Error(Errc::kOutOfRange,
                  "amplitude index (" + std::to_string(e.a) + "," +
                      std::to_string(e.b) + ") outside dimension " +
                      std::to_string(dim));
    }
  }
  std::sort(entries_.begin(), entries_.end(), entry_less);
  std::vector<Entry> merged;
  merged.reserve(entries_.size());
  for (const Entry& e : entries_) {
    if (!merged.empty() && merged.back().a == e.a && merged.back().b == e.b) {
      merged.back().amp += e.amp;
    } else {
      merged.push_back(e);
    }
  }
  std::erase_if(merged,
                [](const Entry& e) { return std::abs(e.amp) < kPruneThreshold; });
  entries_ = std::move(merged);
}

Complex SparseState::amplitude(Index a, Index b) const {
  const Entry key{a, b, {}};
  auto it = std::lower_bound(entries_.begin(), entries_.end(), key, entry_less);
  if (it != entries_.end() && it->a == a && it->b == b) return it->amp;
  return {};
}

double SparseState::norm_squared() const {
  double total = 0.0;
  for (const Entry& e : entries_) total += std::norm(e.amp);
  return total;
}

SparseState SparseState::relabeled(RegisterLayout layout) const {
  if (layout.dim() != dim()) {
    throw Error(Errc::kDimensionMismatch,
                "cannot relabel dimension " + std::to_string(dim()) + " as " +
                    layout.describe());
  }
  SparseState out = *this;
  out.layout_ = std::move(layout);
  return out;
}

Ensemble::Ensemble(std::vector<EnsembleComponent> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw Error(Errc::kInvalidArgument, "empty ensemble");
  }
  double total = 0.0;
  for (const EnsembleComponent& c : components_) {
    if (!(c.probability >= 0.0)) {
      throw Error(Errc::kInvalidArgument, "negative ensemble weight");
    }
    if (c.state.dim() != components_.front().state.dim()) {
      throw Error(Errc::kDimensionMismatch, "ensemble components differ in dimension");
    }
    total += c.probability;
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw Error(Errc::kNormalizationViolated,
                "ensemble weights sum to " + std::to_string(total));
  }
}

Ensemble::Ensemble(SparseState pure)
    : components_{EnsembleComponent{1.0, std::move(pure)}} {}

SparseState max_entangled(Index dim, std::string name) {
  if (dim == 0) throw Error(Errc::kInvalidArgument, "dimension 0");
  std::vector<SparseState::Entry> entries;
  entries.reserve(dim);
  const double amp = 1.0 / std::sqrt(static_cast<double>(dim));
  for (Index i = 0; i < dim; ++i) entries.push_back({i, i, amp});
  return SparseState::normalized(RegisterLayout::single(std::move(name), dim),
                                 std::move(entries));
}

SparseState zero_product(Index dim, std::string name) {
  return SparseState(RegisterLayout::single(std::move(name), dim),
                     {{0, 0, 1.0}});
}

SparseState tensor(const SparseState& first, const SparseState& second) {
  const Index inner = second.dim();
  std::vector<SparseState::Entry> entries;
  entries.reserve(first.size() * second.size());
  for (const auto& f : first.entries()) {
    for (const auto& s : second.entries()) {
      entries.push_back({f.a * inner + s.a, f.b * inner + s.b, f.amp * s.amp});
    }
  }
  return SparseState::normalized(first.layout().concat(second.layout()),
                                 std::move(entries));
}

// ---------------------------------------------------------------- fidelity

Complex diagonal_sum(const SparseState& state) {
  Complex sum = 0.0;
  for (const auto& e : state.entries()) {
    if (e.a == e.b) sum += e.amp;
  }
  return sum;
}

double fidelity(const SparseState& state) {
  return std::norm(diagonal_sum(state)) / static_cast<double>(state.dim());
}

double fidelity(const SparseState& state, Index dim) {
  if (state.dim() != dim) {
    throw Error(Errc::kDimensionMismatch,
                "state has dimension " + std::to_string(state.dim()) +
                    ", expected " + std::to_string(dim));
  }
  return fidelity(state);
}

double fidelity(const Ensemble& ensemble) {
  double total = 0.0;
  for (const auto& c : ensemble.components()) {
    total += c.probability * fidelity(c.state);
  }
  return total;
}

double fidelity(const Ensemble& ensemble, Index dim) {
  double total = 0.0;
  for (const auto& c : ensemble.components()) {
    total += c.probability * fidelity(c.state, dim);
  }
  return total;
}

double fidelity_with_diagonal(const SparseState& state) {
  double total = 0.0;
  for (const auto& e : state.entries()) {
    if (e.a == e.b) total += std::norm(e.amp);
  }
  return total;
}

SparseState diagonal_part(const SparseState& state) {
  std::vector<SparseState::Entry> diag;
  for (const auto& e : state.entries()) {
    if (e.a == e.b) diag.push_back(e);
  }
  return SparseState::normalized(state.layout(), std::move(diag));
}

Complex inner_product(const SparseState& first, const SparseState& second) {
  require_same_dim(first, second);
  // Both entry lists are sorted by (a, b); merge.
  Complex sum = 0.0;
  auto l = first.entries().begin();
  auto r = second.entries().begin();
  while (l != first.entries().end() && r != second.entries().end()) {
    if (entry_less(*l, *r)) {
      ++l;
    } else if (entry_less(*r, *l)) {
      ++r;
    } else {
      sum += std::conj(l->amp) * r->amp;
      ++l;
      ++r;
    }
  }
  return sum;
}

double state_fidelity(const SparseState& first, const SparseState& second) {
  return std::min(1.0, std::norm(inner_product(first, second)));
}

double trace_distance(const SparseState& first, const SparseState& second) {
  return std::sqrt(std::max(0.0, 1.0 - state_fidelity(first, second)));
}

// ---------------------------------------------------------------- unitaries

SparseState apply_permutation_both(const SparseState& state,
                                   std::span<const Index> perm) {
  if (perm.size() != state.dim()) {
    throw Error(Errc::kDimensionMismatch,
                "permutation of size " + std::to_string(perm.size()) +
                    " on dimension " + std::to_string(state.dim()));
  }
  std::vector<bool> hit(perm.size(), false);
  for (const Index v : perm) {
    if (v >= perm.size() || hit[v]) {
      throw Error(Errc::kNotBijective, "map is not a permutation");
    }
    hit[v] = true;
  }
  std::vector<SparseState::Entry> entries;
  entries.reserve(state.size());
  for (const auto& e : state.entries()) {
    entries.push_back({perm[e.a], perm[e.b], e.amp});
  }
  return SparseState(state.layout(), std::move(entries));
}

SparseState apply_scramble_both(const SparseState& state,
                                const ScramblePerm& perm,
                                std::string_view x_register,
                                std::string_view y_register) {
  const RegisterLayout& layout = state.layout();
  const std::size_t xpos = layout.position(x_register);
  const std::size_t ypos = layout.position(y_register);
  const ScrambleParams& p = perm.params();
  const auto regs = layout.registers();
  if (ypos != xpos + 1 || regs[xpos].dim != p.N || regs[ypos].dim != p.K) {
    throw Error(Errc::kLayoutMismatch,
                "scramble needs adjacent " + std::string(x_register) + ":" +
                    std::to_string(p.N) + ", " + std::string(y_register) +
                    ":" + std::to_string(p.K) + " registers, got " +
                    layout.describe());
  }
  // x*K + y and (g*W + h)*K + y occupy the same digit range, so only the
  // joint digit changes.
  const Index low = layout.stride(ypos);
  const Index block = p.N * p.K;
  auto relabel = [&](Index index) {
    const Index high = index / (block * low);
    const Index joint = (index / low) % block;
    const Index rest = index % low;
    const Index x = joint / p.K;
    const Index y = joint % p.K;
    const Index moved = perm.apply(x, y) * p.K + y;
    return (high * block + moved) * low + rest;
  };
  std::vector<SparseState::Entry> entries;
  entries.reserve(state.size());
  for (const auto& e : state.entries()) {
    entries.push_back({relabel(e.a), relabel(e.b), e.amp});
  }
  std::vector<Register> out_regs(regs.begin(), regs.begin() + static_cast<std::ptrdiff_t>(xpos));
  out_regs.push_back({"G", p.L});
  if (p.W > 1) out_regs.push_back({"H", p.W});
  out_regs.push_back({std::string(y_register), p.K});
  out_regs.insert(out_regs.end(), regs.begin() + static_cast<std::ptrdiff_t>(ypos) + 1, regs.end());
  return SparseState(RegisterLayout(std::move(out_regs)), std::move(entries));
}

// ---------------------------------------------------------------- rank

std::size_t schmidt_rank(const SparseState& state) {
  // Restrict to the occupied rows and columns.
  std::vector<Index> rows;
  std::vector<Index> cols;
  for (const auto& e : state.entries()) {
    rows.push_back(e.a);
    cols.push_back(e.b);
  }
  std::sort(rows.begin(), rows.end());
  rows.erase(std::unique(rows.begin(), rows.end()), rows.end());
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  if (rows.empty()) return 0;
  auto locate = [](const std::vector<Index>& v, Index key) {
    return static_cast<Eigen::Index>(
        std::lower_bound(v.begin(), v.end(), key) - v.begin());
  };
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(
      static_cast<Eigen::Index>(rows.size()),
      static_cast<Eigen::Index>(cols.size()));
  for (const auto& e : state.entries()) {
    m(locate(rows, e.a), locate(cols, e.b)) = e.amp;
  }
  Eigen::BDCSVD<Eigen::MatrixXcd> svd(m);
  const auto& sv = svd.singularValues();
  std::size_t rank = 0;
  for (Eigen::Index i = 0; i < sv.size(); ++i) {
    if (sv(i) > kRankThreshold) ++rank;
  }
  return rank;
}

Eigen::MatrixXcd reduced_density_a(const SparseState& state) {
  const auto dim = static_cast<Eigen::Index>(state.dim());
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(dim, dim);
  // rho_{a,a'} = sum_b amp(a,b) conj(amp(a',b)); group entries by b.
  std::unordered_map<Index, std::vector<const SparseState::Entry*>> by_b;
  for (const auto& e : state.entries()) by_b[e.b].push_back(&e);
  for (const auto& [b, column] : by_b) {
    for (const auto* l : column) {
      for (const auto* r : column) {
        rho(static_cast<Eigen::Index>(l->a), static_cast<Eigen::Index>(r->a)) +=
            l->amp * std::conj(r->amp);
      }
    }
  }
  return rho;
}

// ---------------------------------------------------------------- generators

SparseState random_state_near_target(Index dim, double epsilon,
                                     bool diagonal_only, std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon < 1.0)) {
    throw Error(Errc::kOutOfRange, "epsilon must lie in [0, 1)");
  }
  if (dim == 0) throw Error(Errc::kInvalidArgument, "dimension 0");
  if (epsilon == 0.0) return max_entangled(dim);
  if (dim < 2) {
    throw Error(Errc::kInvalidArgument,
                "no state orthogonal to the target exists for dimension 1");
  }
  Rng rng(seed);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(dim));
  // Gaussian noise, then remove the component along Psi_N.
  std::vector<SparseState::Entry> noise;
  if (diagonal_only) {
    for (Index x = 0; x < dim; ++x) {
      noise.push_back({x, x, Complex(rng.normal(), rng.normal())});
    }
  } else {
    for (Index a = 0; a < dim; ++a) {
      for (Index b = 0; b < dim; ++b) {
        noise.push_back({a, b, Complex(rng.normal(), rng.normal())});
      }
    }
  }
  Complex overlap = 0.0;  // <Psi_N|noise>
  for (const auto& e : noise) {
    if (e.a == e.b) overlap += e.amp * inv_sqrt_n;
  }
  double norm = 0.0;
  for (auto& e : noise) {
    if (e.a == e.b) e.amp -= overlap * inv_sqrt_n;
    norm += std::norm(e.amp);
  }
  const double noise_scale = std::sqrt(epsilon / norm);
  const double target_scale = std::sqrt(1.0 - epsilon) * inv_sqrt_n;
  for (auto& e : noise) {
    e.amp *= noise_scale;
    if (e.a == e.b) e.amp += target_scale;
  }
  return SparseState::normalized(RegisterLayout::single("X", dim),
                                 std::move(noise));
}

Ensemble adversarial_mixture(Index dim, double epsilon) {
  if (dim < 2) throw Error(Errc::kInvalidArgument, "dimension must be >= 2");
  const double weight = epsilon * static_cast<double>(dim) /
                        static_cast<double>(dim - 1);
  if (!(weight >= 0.0 && weight <= 1.0)) {
    throw Error(Errc::kOutOfRange,
                "epsilon * N / (N - 1) must lie in [0, 1]");
  }
  return Ensemble({{1.0 - weight, max_entangled(dim)},
                   {weight, zero_product(dim)}});
}

}  // namespace epurify
