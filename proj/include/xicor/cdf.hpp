// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xicor/compensated_sum.hpp"
#include "xicor/errors.hpp"
#include "xicor/kernels.hpp"

namespace xicor {

/// Phi(t). erfc keeps the lower tail accurate where 1 - erf would cancel.
inline double std_normal_cdf(double t) noexcept {
  return 0.5 * std::erfc(-t / std::numbers::sqrt2);
}

/// 1 - Phi(t), without cancellation for large t.
inline double std_normal_sf(double t) noexcept {
  return 0.5 * std::erfc(t / std::numbers::sqrt2);
}

enum class DistMapKind { std_normal, fitted_normal, uniform, empirical };

/// A monotone map F from the reals into [0,1], applied to Y before the kernel.
class DistMap {
 public:
  static DistMap std_normal() { return DistMap(DistMapKind::std_normal); }

  static DistMap fitted_normal(double mu, double sigma) {
    if (!std::isfinite(mu) || !std::isfinite(sigma)) {
      throw_usage("normal map parameters must be finite");
    }
    if (!(sigma > 0.0)) throw_usage("normal map: σ must be > 0");
    DistMap m(DistMapKind::fitted_normal);
    m.a_ = mu;
    m.b_ = sigma;
    return m;
  }

  static DistMap uniform(double a, double b) {
    if (!std::isfinite(a) || !std::isfinite(b)) throw_usage("uniform map bounds must be finite");
    if (!(b > a)) throw_usage("uniform map: need b > a");
    DistMap m(DistMapKind::uniform);
    m.a_ = a;
    m.b_ = b;
    return m;
  }

  static DistMap empirical(std::vector<double> values) {
    if (values.empty()) throw_degenerate("empirical map needs at least one value");
    std::sort(values.begin(), values.end());
    DistMap m(DistMapKind::empirical);
    m.sorted_ = std::make_shared<const std::vector<double>>(std::move(values));
    return m;
  }

  DistMapKind kind() const noexcept { return kind_; }

  /// Mean for fitted_normal, lower bound for uniform.
  double mu() const noexcept { return a_; }
  /// Scale for fitted_normal, upper bound for uniform.
  double sigma() const noexcept { return b_; }

  std::span<const double> sorted_values() const noexcept {
    if (!sorted_) return {};
    return *sorted_;
  }

  double operator()(double t) const noexcept {
    switch (kind_) {
      case DistMapKind::std_normal:
        return std_normal_cdf(t);
      case DistMapKind::fitted_normal:
        return std_normal_cdf((t - a_) / b_);
      case DistMapKind::uniform:
        return std::clamp((t - a_) / (b_ - a_), 0.0, 1.0);
      case DistMapKind::empirical: {
        const auto& v = *sorted_;
        const auto count = std::upper_bound(v.begin(), v.end(), t) - v.begin();
        return static_cast<double>(count) / static_cast<double>(v.size());
      }
    }
    return 0.0;
  }

  std::vector<double> apply(std::span<const double> ys) const {
    std::vector<double> out(ys.size());
    std::transform(ys.begin(), ys.end(), out.begin(), [this](double y) { return (*this)(y); });
    return out;
  }

  std::string describe() const {
    switch (kind_) {
      case DistMapKind::std_normal:
        return "std-normal";
      case DistMapKind::fitted_normal:
        return "normal(" + detail::format_number(a_) + "," + detail::format_number(b_) + ")";
      case DistMapKind::uniform:
        return "uniform:" + detail::format_number(a_) + "," + detail::format_number(b_);
      case DistMapKind::empirical:
        return "empirical";
    }
    return {};
  }

 private:
  explicit DistMap(DistMapKind kind) : kind_(kind) {}

  DistMapKind kind_;
  double a_ = 0.0;
  double b_ = 1.0;
  std::shared_ptr<const std::vector<double>> sorted_;
};

/// Normal map with the sample mean and the n-1 standard deviation.
inline DistMap fit_normal_map(std::span<const double> ys) {
  if (ys.size() < 2) throw_degenerate("degenerate Y: need at least 2 values to fit a normal map");
  CompensatedSum<double> sum;
  for (double y : ys) sum += y;
  const double mean = sum.value() / static_cast<double>(ys.size());
  CompensatedSum<double> ss;
  for (double y : ys) ss += (y - mean) * (y - mean);
  const double sd = std::sqrt(ss.value() / static_cast<double>(ys.size() - 1));
  if (!(sd > 0.0)) throw_degenerate("degenerate Y: sample standard deviation is zero");
  return DistMap::fitted_normal(mean, sd);
}

inline DistMap empirical_map(std::span<const double> ys) {
  return DistMap::empirical(std::vector<double>(ys.begin(), ys.end()));
}

/*!
  A DistMap recipe that may still need data: `fit-normal` and `empirical` are
  resolved against the Y sample they will be applied to.
*/
struct DistMapSpec {
  DistMapKind kind = DistMapKind::std_normal;
  double a = 0.0;
  double b = 1.0;
  std::optional<double> mu_override;
  std::optional<double> sigma_override;

  DistMap resolve(std::span<const double> ys) const {
    switch (kind) {
      case DistMapKind::std_normal:
        return DistMap::std_normal();
      case DistMapKind::uniform:
        return DistMap::uniform(a, b);
      case DistMapKind::empirical:
        return empirical_map(ys);
      case DistMapKind::fitted_normal: {
        if (mu_override && sigma_override) return DistMap::fitted_normal(*mu_override, *sigma_override);
        const DistMap fitted = fit_normal_map(ys);
        return DistMap::fitted_normal(mu_override.value_or(fitted.mu()),
                                      sigma_override.value_or(fitted.sigma()));
      }
    }
    return DistMap::std_normal();
  }

  std::string describe() const {
    switch (kind) {
      case DistMapKind::std_normal:
        return "std-normal";
      case DistMapKind::fitted_normal:
        return "fit-normal";
      case DistMapKind::uniform:
        return "uniform:" + detail::format_number(a) + "," + detail::format_number(b);
      case DistMapKind::empirical:
        return "empirical";
    }
    return {};
  }
};

/// Parses `std-normal`, `fit-normal`, `empirical` or `uniform:A,B`.
inline DistMapSpec parse_distmap_spec(std::string_view spec) {
  DistMapSpec out;
  if (spec == "std-normal") return out;
  if (spec == "fit-normal") {
    out.kind = DistMapKind::fitted_normal;
    return out;
  }
  if (spec == "empirical") {
    out.kind = DistMapKind::empirical;
    return out;
  }
  if (spec.substr(0, 8) == "uniform:") {
    const std::string_view args = spec.substr(8);
    const auto comma = args.find(',');
    const auto a = comma == std::string_view::npos ? std::nullopt
                                                    : detail::parse_real(args.substr(0, comma));
    const auto b = comma == std::string_view::npos ? std::nullopt
                                                    : detail::parse_real(args.substr(comma + 1));
    if (!a || !b) throw_usage("distribution spec '" + std::string(spec) + "': expected uniform:A,B");
    // Validates a < b.
    (void)DistMap::uniform(*a, *b);
    out.kind = DistMapKind::uniform;
    out.a = *a;
    out.b = *b;
    return out;
  }
  throw_usage("unknown distribution spec '" + std::string(spec) +
              "' (expected std-normal, fit-normal, empirical or uniform:A,B)");
}

}  // namespace xicor
