// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "xicor/errors.hpp"
#include "xicor/rng.hpp"

namespace xicor {

/// n >= 2 finite (x, y) pairs.
class PairedSample {
 public:
  PairedSample(std::vector<double> xs, std::vector<double> ys)
      : xs_(std::move(xs)), ys_(std::move(ys)) {
    if (xs_.size() != ys_.size()) {
      throw_usage("x and y have different lengths (" + std::to_string(xs_.size()) + " vs " +
                  std::to_string(ys_.size()) + ")");
    }
    if (xs_.size() < 2) {
      throw_degenerate("need n ≥ 2 observations, got " + std::to_string(xs_.size()));
    }
    for (std::size_t i = 0; i < xs_.size(); ++i) {
      if (!std::isfinite(xs_[i]) || !std::isfinite(ys_[i])) {
        throw_usage("non-finite value in observation " + std::to_string(i));
      }
    }
  }

  std::span<const double> xs() const noexcept { return xs_; }
  std::span<const double> ys() const noexcept { return ys_; }
  std::size_t size() const noexcept { return xs_.size(); }

 private:
  std::vector<double> xs_;
  std::vector<double> ys_;
};

struct OrderedSample {
  std::vector<double> y_ordered;
  /// xs[permutation[i]] is nondecreasing in i.
  std::vector<std::size_t> permutation;
  std::uint64_t tie_seed = 0;
};

/*!
  Sorts the pairs by X. Runs of equal X are shuffled uniformly with a
  generator seeded from tie_seed, so the result is a deterministic function
  of (sample, tie_seed).
*/
inline OrderedSample order_by_x(const PairedSample& s, std::uint64_t tie_seed) {
  const auto xs = s.xs();
  const auto ys = s.ys();
  OrderedSample out;
  out.tie_seed = tie_seed;
  out.permutation.resize(s.size());
  std::iota(out.permutation.begin(), out.permutation.end(), std::size_t{0});
  std::stable_sort(out.permutation.begin(), out.permutation.end(),
                   [&](std::size_t a, std::size_t b) { return xs[a] < xs[b]; });

  bool seeded = false;
  Rng rng;
  for (std::size_t begin = 0; begin < out.permutation.size();) {
    std::size_t end = begin + 1;
    while (end < out.permutation.size() &&
           xs[out.permutation[end]] == xs[out.permutation[begin]]) {
      ++end;
    }
    if (end - begin > 1) {
      if (!seeded) {
        rng = make_rng(tie_seed);
        seeded = true;
      }
      std::shuffle(out.permutation.begin() + static_cast<std::ptrdiff_t>(begin),
                   out.permutation.begin() + static_cast<std::ptrdiff_t>(end), rng);
    }
    begin = end;
  }

  out.y_ordered.resize(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) out.y_ordered[i] = ys[out.permutation[i]];
  return out;
}

inline bool has_ties(std::span<const double> values) {
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  return std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end();
}

/// R_i = #{j : y_j <= y_i}; ties share the largest rank of their group.
inline std::vector<std::size_t> ranks(std::span<const double> ys) {
  std::vector<std::size_t> order(ys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return ys[a] < ys[b]; });
  std::vector<std::size_t> out(ys.size());
  for (std::size_t begin = 0; begin < order.size();) {
    std::size_t end = begin + 1;
    while (end < order.size() && ys[order[end]] == ys[order[begin]]) ++end;
    for (std::size_t k = begin; k < end; ++k) out[order[k]] = end;
    begin = end;
  }
  return out;
}

/// Average ranks (1-based); ties share the mean of the positions they span.
inline std::vector<double> mid_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> out(values.size());
  for (std::size_t begin = 0; begin < order.size();) {
    std::size_t end = begin + 1;
    while (end < order.size() && values[order[end]] == values[order[begin]]) ++end;
    const double mid = 0.5 * (static_cast<double>(begin + 1) + static_cast<double>(end));
    for (std::size_t k = begin; k < end; ++k) out[order[k]] = mid;
    begin = end;
  }
  return out;
}

}  // namespace xicor
