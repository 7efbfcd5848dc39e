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

#include "epurify/scramble.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "epurify/error.hpp"
#include "epurify/gf2n.hpp"

namespace epurify {

namespace {

constexpr std::uint64_t kMaxVerifiedN = 4096;

std::uint64_t pow2(int bits) { return std::uint64_t{1} << bits; }

struct TupleY {
  int k;
  std::uint64_t offset;
};

TupleY split_tuple_index(std::uint64_t y, int n, int d) {
  std::uint64_t base = 0;
  for (int k = 0; k < d; ++k) {
    const std::uint64_t count = pow2(k * n);
    if (y < base + count) return {k, y - base};
    base += count;
  }
  throw Error(Errc::kOutOfRange, "Y index " + std::to_string(y) + " too large");
}

void check_index(std::uint64_t value, std::uint64_t bound, const char* what) {
  if (value >= bound) {
    throw Error(Errc::kOutOfRange, std::string(what) + " index " +
                                       std::to_string(value) +
                                       " outside [0, " +
                                       std::to_string(bound) + ")");
  }
}

}  // namespace

ScramblePerm make_multiplication_table(int n, int l) {
  if (n < 2 || n > 8 || l < 1 || l >= n) {
    throw Error(Errc::kOutOfRange,
                "multiplication table needs 1 <= l < n <= 8, got n=" +
                    std::to_string(n) + " l=" + std::to_string(l));
  }
  ScramblePerm perm;
  perm.construction_ = Construction::kMultiplicationTable;
  perm.degree_ = n;
  perm.shape_ = l;
  perm.params_ = {pow2(n), pow2(n) - 1, pow2(n - l), pow2(l)};
  perm.name_ = "multiplication-table(n=" + std::to_string(n) +
               ",l=" + std::to_string(l) + ")";
  return perm;
}

ScramblePerm make_linear_function(int n) {
  if (n < 1 || n > 4) {
    throw Error(Errc::kOutOfRange,
                "linear function needs 1 <= n <= 4, got n=" + std::to_string(n));
  }
  ScramblePerm perm;
  perm.construction_ = Construction::kLinearFunction;
  perm.degree_ = n;
  perm.shape_ = 2;
  perm.params_ = {pow2(2 * n), pow2(n) + 1, pow2(n), pow2(n)};
  perm.name_ = "linear-function(n=" + std::to_string(n) + ")";
  return perm;
}

ScramblePerm make_extended_linear(int n, int d) {
  if (n < 1 || d < 2 || n * d > 12) {
    throw Error(Errc::kOutOfRange,
                "extended linear needs n >= 1, d >= 2, n*d <= 12, got n=" +
                    std::to_string(n) + " d=" + std::to_string(d));
  }
  ScramblePerm perm;
  perm.construction_ = Construction::kExtendedLinear;
  perm.degree_ = n;
  perm.shape_ = d;
  perm.params_ = {pow2(d * n), (pow2(d * n) - 1) / (pow2(n) - 1),
                  pow2((d - 1) * n), pow2(n)};
  perm.name_ = "extended-linear(n=" + std::to_string(n) +
               ",d=" + std::to_string(d) + ")";
  return perm;
}

ScramblePerm ScramblePerm::tabulated(ScrambleParams params,
                                     std::vector<std::uint64_t> table,
                                     std::string name) {
  if (params.N == 0 || params.K == 0 || params.W == 0 || params.L == 0 ||
      table.size() != params.N * params.K) {
    throw Error(Errc::kInvalidArgument,
                "table size does not match K*N for " + name);
  }
  // Inverse rows are filled where the row is injective; a sentinel of N marks
  // a missing preimage.
  std::vector<std::uint64_t> inverse(params.N * params.K, params.N);
  for (std::uint64_t y = 0; y < params.K; ++y) {
    for (std::uint64_t x = 0; x < params.N; ++x) {
      const std::uint64_t out = table[y * params.N + x];
      if (out < params.N) inverse[y * params.N + out] = x;
    }
  }
  ScramblePerm perm;
  perm.construction_ = Construction::kTabulated;
  perm.params_ = params;
  perm.name_ = std::move(name);
  perm.table_ = std::make_shared<const std::vector<std::uint64_t>>(std::move(table));
  perm.inverse_ =
      std::make_shared<const std::vector<std::uint64_t>>(std::move(inverse));
  return perm;
}

ScrambleOutput ScramblePerm::evaluate(std::uint64_t x, std::uint64_t y) const {
  check_index(x, params_.N, "X");
  check_index(y, params_.K, "Y");
  const std::uint32_t mask = element_mask();
  switch (construction_) {
    case Construction::kMultiplicationTable: {
      const std::uint32_t product = gf_mul_raw(
          static_cast<std::uint32_t>(x), static_cast<std::uint32_t>(y + 1),
          degree_);
      const int low_bits = degree_ - shape_;
      return {product >> low_bits, product & ((1u << low_bits) - 1)};
    }
    case Construction::kLinearFunction: {
      const std::uint32_t x0 = static_cast<std::uint32_t>(x >> degree_);
      const std::uint32_t x1 = static_cast<std::uint32_t>(x) & mask;
      if (y == 0) return {x1, x0};
      const std::uint32_t e = static_cast<std::uint32_t>(y - 1);
      return {x0, gf_mul_raw(x0, e, degree_) ^ x1};
    }
    case Construction::kExtendedLinear: {
      const int n = degree_;
      const int d = shape_;
      const TupleY ty = split_tuple_index(y, n, d);
      const int k = ty.k;
      auto x_at = [&](int i) {
        return static_cast<std::uint32_t>(x >> ((d - 1 - i) * n)) & mask;
      };
      auto y_at = [&](int i) {
        return static_cast<std::uint32_t>(ty.offset >> ((k - 1 - i) * n)) &
               mask;
      };
      const std::uint32_t pivot = x_at(k);
      std::uint64_t h = 0;
      for (int i = 0; i < d; ++i) {
        if (i == k) continue;
        std::uint32_t component = x_at(i);
        if (i < k) component ^= gf_mul_raw(pivot, y_at(i), n);
        h = (h << n) | component;
      }
      return {pivot, h};
    }
    case Construction::kTabulated: {
      const std::uint64_t out = (*table_)[y * params_.N + x];
      return {out / params_.W, out % params_.W};
    }
  }
  throw Error(Errc::kInvalidArgument, "unknown construction");
}

std::uint64_t ScramblePerm::invert(std::uint64_t gh, std::uint64_t y) const {
  check_index(gh, params_.N, "G o H");
  check_index(y, params_.K, "Y");
  const std::uint32_t mask = element_mask();
  const std::uint64_t g = gh / params_.W;
  const std::uint64_t h = gh % params_.W;
  switch (construction_) {
    case Construction::kMultiplicationTable: {
      const std::uint32_t inv_y =
          gf_inv_raw(static_cast<std::uint32_t>(y + 1), degree_);
      return gf_mul_raw(static_cast<std::uint32_t>(gh), inv_y, degree_);
    }
    case Construction::kLinearFunction: {
      if (y == 0) return (h << degree_) | g;
      const std::uint32_t e = static_cast<std::uint32_t>(y - 1);
      const std::uint32_t x1 =
          static_cast<std::uint32_t>(h) ^
          gf_mul_raw(static_cast<std::uint32_t>(g), e, degree_);
      return (g << degree_) | x1;
    }
    case Construction::kExtendedLinear: {
      const int n = degree_;
      const int d = shape_;
      const TupleY ty = split_tuple_index(y, n, d);
      const int k = ty.k;
      const std::uint32_t pivot = static_cast<std::uint32_t>(g);
      std::uint64_t x = 0;
      for (int i = 0; i < d; ++i) {
        std::uint32_t component;
        if (i == k) {
          component = pivot;
        } else {
          const int slot = i < k ? i : i - 1;
          component =
              static_cast<std::uint32_t>(h >> ((d - 2 - slot) * n)) & mask;
          if (i < k) {
            const std::uint32_t yi =
                static_cast<std::uint32_t>(ty.offset >> ((k - 1 - i) * n)) &
                mask;
            component ^= gf_mul_raw(pivot, yi, n);
          }
        }
        x = (x << n) | component;
      }
      return x;
    }
    case Construction::kTabulated: {
      const std::uint64_t x = (*inverse_)[y * params_.N + gh];
      if (x >= params_.N) {
        throw Error(Errc::kNotBijective, name_ + ": row " + std::to_string(y) +
                                             " has no preimage for " +
                                             std::to_string(gh));
      }
      return x;
    }
  }
  throw Error(Errc::kInvalidArgument, "unknown construction");
}

std::vector<std::uint32_t> ScramblePerm::decode_y(std::uint64_t y) const {
  check_index(y, params_.K, "Y");
  switch (construction_) {
    case Construction::kMultiplicationTable:
      return {static_cast<std::uint32_t>(y + 1)};
    case Construction::kLinearFunction:
      if (y == 0) return {};
      return {static_cast<std::uint32_t>(y - 1)};
    case Construction::kExtendedLinear: {
      const TupleY ty = split_tuple_index(y, degree_, shape_);
      std::vector<std::uint32_t> out;
      for (int i = 0; i < ty.k; ++i) {
        out.push_back(static_cast<std::uint32_t>(
                          ty.offset >> ((ty.k - 1 - i) * degree_)) &
                      element_mask());
      }
      return out;
    }
    case Construction::kTabulated:
      return {static_cast<std::uint32_t>(y)};
  }
  return {};
}

std::string ScramblePerm::describe_y(std::uint64_t y) const {
  const std::vector<std::uint32_t> parts = decode_y(y);
  if (parts.empty()) return "bottom";
  std::ostringstream os;
  os << '<';
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) os << ',';
    os << parts[i];
  }
  os << '>';
  return os.str();
}

std::vector<std::uint64_t> ScramblePerm::table() const {
  std::vector<std::uint64_t> out(params_.N * params_.K);
  for (std::uint64_t y = 0; y < params_.K; ++y) {
    for (std::uint64_t x = 0; x < params_.N; ++x) {
      out[y * params_.N + x] = apply(x, y);
    }
  }
  return out;
}

Rational Rational::reduced(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw Error(Errc::kInvalidArgument, "zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  if (g == 0) return {0, 1};
  return {num / g, den / g};
}

std::string Rational::str() const {
  return std::to_string(num) + "/" + std::to_string(den);
}

VerificationReport verify_scrambling(const ScramblePerm& perm) {
  const ScrambleParams& p = perm.params();
  if (p.N > kMaxVerifiedN || p.N < 2) {
    throw Error(Errc::kOutOfRange, "exhaustive verification needs 2 <= N <= " +
                                       std::to_string(kMaxVerifiedN));
  }
  VerificationReport report;
  report.construction = perm.name();
  report.params = p;
  report.bijective_per_y.assign(p.K, false);
  report.pair_collisions.assign(p.N * (p.N - 1) / 2, 0);
  report.roundtrip = true;

  std::vector<std::uint8_t> seen(p.N);
  std::vector<std::vector<std::uint64_t>> buckets;
  for (std::uint64_t y = 0; y < p.K; ++y) {
    std::fill(seen.begin(), seen.end(), 0);
    bool bijective = true;
    std::uint64_t h_range = p.W;
    std::vector<ScrambleOutput> outs(p.N);
    for (std::uint64_t x = 0; x < p.N; ++x) {
      outs[x] = perm.evaluate(x, y);
      const std::uint64_t combined = outs[x].g * p.W + outs[x].h;
      if (outs[x].g >= p.L || outs[x].h >= p.W || seen[combined]) {
        bijective = false;
      } else {
        seen[combined] = 1;
      }
      h_range = std::max(h_range, outs[x].h + 1);
    }
    report.bijective_per_y[y] = bijective;
    if (bijective) {
      for (std::uint64_t x = 0; x < p.N && report.roundtrip; ++x) {
        if (perm.invert(outs[x].g * p.W + outs[x].h, y) != x) {
          report.roundtrip = false;
        }
      }
    } else {
      report.roundtrip = false;
    }
    // Every pair inside one h-bucket collides for this y.
    buckets.assign(h_range, {});
    for (std::uint64_t x = 0; x < p.N; ++x) buckets[outs[x].h].push_back(x);
    for (const auto& bucket : buckets) {
      for (std::size_t i = 0; i < bucket.size(); ++i) {
        for (std::size_t j = 0; j < i; ++j) {
          ++report.pair_collisions[pair_index(bucket[i], bucket[j])];
        }
      }
    }
  }

  report.all_bijective = std::all_of(report.bijective_per_y.begin(),
                                     report.bijective_per_y.end(),
                                     [](bool b) { return b; });
  std::uint64_t total = 0;
  for (const std::uint32_t c : report.pair_collisions) {
    ++report.collision_histogram[c];
    total += c;
  }
  const std::uint64_t pairs = report.pair_collisions.size();
  report.uniform = report.collision_histogram.size() == 1;
  report.measured_p = report.uniform
                          ? Rational::reduced(report.pair_collisions[0], p.K)
                          : Rational::reduced(total, pairs * p.K);
  report.expected_p = Rational::reduced(p.L - 1, p.N - 1);
  report.p_matches = report.uniform && report.measured_p == report.expected_p;
  report.n_equals_wl = p.N == p.W * p.L;
  report.n_at_most_kl = p.N <= p.K * p.L;
  return report;
}

std::vector<CaseRow> extended_linear_case_table(int d) {
  if (d < 2) throw Error(Errc::kOutOfRange, "tuple length must be >= 2");
  std::vector<CaseRow> rows;
  for (int k = 0; k < d; ++k) {
    CaseRow row;
    if (k == 0) {
      row.y = "bottom";
    } else {
      row.y = "<";
      for (int i = 0; i < k; ++i) {
        if (i) row.y += ",";
        row.y += "y" + std::to_string(i);
      }
      row.y += ">";
    }
    const std::string pivot = "x" + std::to_string(k);
    row.g = pivot;
    for (int i = 0; i < d; ++i) {
      if (i == k) continue;
      const std::string xi = "x" + std::to_string(i);
      row.h.push_back(i < k ? xi + "+" + pivot + "*y" + std::to_string(i) : xi);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace epurify
