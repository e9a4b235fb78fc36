// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xicor/cdf.hpp"
#include "xicor/compensated_sum.hpp"
#include "xicor/errors.hpp"
#include "xicor/kernels.hpp"
#include "xicor/sample.hpp"

namespace xicor {

enum class Variant { plugin, rank, simplified, chatterjee, pearson, spearman };

inline std::string_view to_string(Variant v) noexcept {
  switch (v) {
    case Variant::plugin:
      return "plugin";
    case Variant::rank:
      return "rank";
    case Variant::simplified:
      return "simplified";
    case Variant::chatterjee:
      return "chatterjee";
    case Variant::pearson:
      return "pearson";
    case Variant::spearman:
      return "spearman";
  }
  return "unknown";
}

inline std::optional<Variant> parse_variant(std::string_view text) noexcept {
  for (Variant v : {Variant::plugin, Variant::rank, Variant::simplified, Variant::chatterjee,
                    Variant::pearson, Variant::spearman}) {
    if (text == to_string(v)) return v;
  }
  return std::nullopt;
}

struct CoefficientResult {
  double xi = 0.0;
  /// Mean kernel value over X-consecutive pairs.
  double zeta = 0.0;
  /// chi for plugin/rank, C_h for simplified, (n^2-1)/(3n^2) for chatterjee.
  double normalization = 0.0;
  Variant variant = Variant::plugin;
  std::size_t n = 0;
  std::uint64_t tie_seed = 0;
};

namespace detail {

/// sum_{i=1}^{n-1} h(u[i], u[i+1]).
template <typename H>
double consecutive_sum(std::span<const double> u, const H& h) {
  CompensatedSum<double> total;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) total += h(u[i], u[i + 1]);
  return total.value();
}

/// sum_i sum_j h(u_i, u_j) over all ordered pairs, diagonal included. Uses
/// the symmetry of h (validated for every registered kernel) to visit each
/// unordered pair once.
template <typename H>
double all_pairs_sum(std::span<const double> u, const H& h) {
  CompensatedSum<double> total;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double ui = u[i];
    CompensatedSum<double> row;
    for (std::size_t j = 0; j < i; ++j) row += h(ui, u[j]);
    total += 2.0 * row.value();
    total += h(ui, ui);
  }
  return total.value();
}

inline double ratio_coefficient(double zeta, double normalization) {
  return normalization == 0.0 ? 1.0 : 1.0 - zeta / normalization;
}

/// Shared core of the plugin and rank variants: u holds F(Y_i) in sample order.
inline CoefficientResult mapped_coefficient(const PairedSample& s, const Kernel& k,
                                            std::span<const double> u, std::uint64_t tie_seed,
                                            Variant variant) {
  const OrderedSample ordered = order_by_x(s, tie_seed);
  std::vector<double> u_ordered(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) u_ordered[i] = u[ordered.permutation[i]];

  const double n = static_cast<double>(s.size());
  CoefficientResult r;
  k.visit([&](const auto& h) {
    r.zeta = consecutive_sum(u_ordered, h) / n;
    r.normalization = all_pairs_sum(u, h) / (n * n);
    return 0;
  });
  r.xi = ratio_coefficient(r.zeta, r.normalization);
  r.variant = variant;
  r.n = s.size();
  r.tie_seed = tie_seed;
  return r;
}

inline std::vector<double> scaled_ranks(std::span<const double> ys) {
  const auto r = ranks(ys);
  const double n = static_cast<double>(ys.size());
  std::vector<double> u(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) u[i] = static_cast<double>(r[i]) / n;
  return u;
}

inline double correlation(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  CompensatedSum<double> sa, sb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
  }
  const double ma = sa.value() / n;
  const double mb = sb.value() / n;
  CompensatedSum<double> sab, saa, sbb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab += da * db;
    saa += da * da;
    sbb += db * db;
  }
  if (!(saa.value() > 0.0) || !(sbb.value() > 0.0)) {
    throw_degenerate("correlation undefined: zero variance");
  }
  return sab.value() / std::sqrt(saa.value() * sbb.value());
}

}  // namespace detail

/// xi^(h,F)_n: ordering by X, F applied to Y, chi summed over all n^2 pairs.
inline CoefficientResult xi_plugin(const PairedSample& s, const Kernel& k, const DistMap& f,
                                   std::uint64_t tie_seed = 0) {
  const auto u = f.apply(s.ys());
  return detail::mapped_coefficient(s, k, u, tie_seed, Variant::plugin);
}

/// Rank-based xi: the plugin coefficient with F the empirical CDF of Y.
inline CoefficientResult xi_rank(const PairedSample& s, const Kernel& k,
                                 std::uint64_t tie_seed = 0) {
  const auto u = detail::scaled_ranks(s.ys());
  return detail::mapped_coefficient(s, k, u, tie_seed, Variant::rank);
}

/// Rank-based xi with chi replaced by the constant C_h; O(n log n).
inline CoefficientResult xi_simplified_with_constant(const PairedSample& s, const Kernel& k,
                                                     double c_h, std::uint64_t tie_seed = 0) {
  if (!(c_h > 0.0)) {
    throw Error(ErrorKind::numeric,
                "normalization constant C_h must be > 0 (got " + detail::format_number(c_h) + ")");
  }
  const auto u = detail::scaled_ranks(s.ys());
  const OrderedSample ordered = order_by_x(s, tie_seed);
  std::vector<double> u_ordered(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) u_ordered[i] = u[ordered.permutation[i]];

  CoefficientResult r;
  r.zeta = k.visit([&](const auto& h) { return detail::consecutive_sum(u_ordered, h); }) /
           static_cast<double>(s.size());
  r.normalization = c_h;
  r.xi = 1.0 - r.zeta / c_h;
  r.variant = Variant::simplified;
  r.n = s.size();
  r.tie_seed = tie_seed;
  return r;
}

inline CoefficientResult xi_simplified(const PairedSample& s, const Kernel& k,
                                       std::uint64_t tie_seed = 0,
                                       double quadrature_tol = 1e-10) {
  return xi_simplified_with_constant(s, k, normalization_constant(k, quadrature_tol), tie_seed);
}

/// The classical rank coefficient 1 - 3 sum|R_{i+1} - R_i| / (n^2 - 1); X must have no ties.
inline CoefficientResult chatterjee_reference(const PairedSample& s, std::uint64_t tie_seed = 0) {
  if (has_ties(s.xs())) {
    throw_degenerate("X has ties; the (n^2-1)/3 normalization needs distinct X (use xi_rank)");
  }
  const OrderedSample ordered = order_by_x(s, tie_seed);
  const auto r = ranks(ordered.y_ordered);
  std::size_t gaps = 0;
  for (std::size_t i = 0; i + 1 < r.size(); ++i) {
    gaps += r[i + 1] > r[i] ? r[i + 1] - r[i] : r[i] - r[i + 1];
  }
  const double n = static_cast<double>(s.size());
  const double sum = static_cast<double>(gaps);
  CoefficientResult out;
  out.xi = 1.0 - 3.0 * sum / (n * n - 1.0);
  out.zeta = sum / (n * n);
  out.normalization = (n * n - 1.0) / (3.0 * n * n);
  out.variant = Variant::chatterjee;
  out.n = s.size();
  out.tie_seed = tie_seed;
  return out;
}

inline double pearson(const PairedSample& s) { return detail::correlation(s.xs(), s.ys()); }

/// Pearson correlation of mid-ranks.
inline double spearman(const PairedSample& s) {
  const auto rx = mid_ranks(s.xs());
  const auto ry = mid_ranks(s.ys());
  return detail::correlation(rx, ry);
}

/// A complete recipe for one coefficient: variant, kernel and F.
struct EstimatorConfig {
  Variant variant = Variant::simplified;
  Kernel kernel = make_kernel(PowerKernel{1.0});
  DistMapSpec f;
  double quadrature_tol = 1e-10;

  /// Resolves C_h once so repeated estimates skip the quadrature.
  std::optional<double> cached_ch;

  EstimatorConfig& prepare() {
    if (variant == Variant::simplified && !cached_ch) {
      cached_ch = normalization_constant(kernel, quadrature_tol);
    }
    return *this;
  }

  std::string label() const {
    switch (variant) {
      case Variant::plugin:
        return "plugin," + kernel.name() + "," + f.describe();
      case Variant::rank:
      case Variant::simplified:
        return std::string(to_string(variant)) + "," + kernel.name();
      default:
        return std::string(to_string(variant));
    }
  }
};

/// Parses `VARIANT[,KERNEL[,F]]`, e.g. `plugin,power:2,std-normal` or `pearson`.
inline EstimatorConfig parse_method_spec(std::string_view spec) {
  EstimatorConfig cfg;
  const auto first = spec.find(',');
  const auto variant = parse_variant(spec.substr(0, first));
  if (!variant) throw_usage("unknown variant in method '" + std::string(spec) + "'");
  cfg.variant = *variant;
  if (first == std::string_view::npos) return cfg;
  const std::string_view rest = spec.substr(first + 1);
  const auto second = rest.find(',');
  cfg.kernel = parse_kernel_spec(rest.substr(0, second));
  if (second != std::string_view::npos) cfg.f = parse_distmap_spec(rest.substr(second + 1));
  return cfg;
}

inline CoefficientResult estimate(const PairedSample& s, const EstimatorConfig& cfg,
                                  std::uint64_t tie_seed = 0) {
  switch (cfg.variant) {
    case Variant::plugin:
      return xi_plugin(s, cfg.kernel, cfg.f.resolve(s.ys()), tie_seed);
    case Variant::rank:
      return xi_rank(s, cfg.kernel, tie_seed);
    case Variant::simplified:
      return cfg.cached_ch ? xi_simplified_with_constant(s, cfg.kernel, *cfg.cached_ch, tie_seed)
                           : xi_simplified(s, cfg.kernel, tie_seed, cfg.quadrature_tol);
    case Variant::chatterjee:
      return chatterjee_reference(s, tie_seed);
    case Variant::pearson:
    case Variant::spearman: {
      CoefficientResult r;
      r.xi = cfg.variant == Variant::pearson ? pearson(s) : spearman(s);
      r.variant = cfg.variant;
      r.n = s.size();
      r.tie_seed = tie_seed;
      return r;
    }
  }
  throw_usage("unsupported variant");
}

}  // namespace xicor
