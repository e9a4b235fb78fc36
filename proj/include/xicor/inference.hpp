// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "xicor/cdf.hpp"
#include "xicor/compensated_sum.hpp"
#include "xicor/errors.hpp"
#include "xicor/estimator.hpp"
#include "xicor/kernels.hpp"
#include "xicor/sample.hpp"

namespace xicor {

enum class VarianceSource { closed_form_power, ustat_plugin, ustat_rank };

inline std::string_view to_string(VarianceSource s) noexcept {
  switch (s) {
    case VarianceSource::closed_form_power:
      return "closed_form_power";
    case VarianceSource::ustat_plugin:
      return "ustat_plugin";
    case VarianceSource::ustat_rank:
      return "ustat_rank";
  }
  return "unknown";
}

/// U-statistic estimates of E h12, E h12^2 and E h12 h13 with u_i = F(Y_i).
struct KernelMoments {
  double m = 0.0;
  double q = 0.0;
  double r = 0.0;
};

struct VarianceEstimate {
  double sigma2 = 0.0;
  VarianceSource source = VarianceSource::closed_form_power;
  std::optional<KernelMoments> components;
};

struct TestResult {
  double z = 0.0;
  VarianceEstimate sigma2_used;
  double p_one_sided = 1.0;
  double p_two_sided = 1.0;
  Variant variant = Variant::simplified;
  CoefficientResult coefficient;
  /// Duplicate Y values seen while the caller declared Y continuous.
  bool ties_with_continuous_flag = false;
};

/*!
  Null variance of sqrt(n) * xi for h = |y-z|^gamma and continuous Y:

    1 + (g+2)^2 { (g+1)/(4(2g+1)) - 1/(2g+3) - Gamma(g+2)^2/Gamma(2g+4) }

  The gamma ratio goes through lgamma. Past gamma = 150 the brace is a
  difference of quantities far below double resolution of the result.
*/
inline double sigma2_power_closed_form(double gamma) {
  if (!std::isfinite(gamma) || !(gamma > 0.0)) throw_usage("power kernel: γ must be > 0");
  if (gamma > 150.0) {
    throw Error(ErrorKind::numeric, "closed-form variance is unreliable for γ > 150");
  }
  const double gamma_ratio =
      std::exp(2.0 * std::lgamma(gamma + 2.0) - std::lgamma(2.0 * gamma + 4.0));
  const double brace =
      (gamma + 1.0) / (4.0 * (2.0 * gamma + 1.0)) - 1.0 / (2.0 * gamma + 3.0) - gamma_ratio;
  return 1.0 + (gamma + 2.0) * (gamma + 2.0) * brace;
}

/*!
  m = sum_{i!=j} h_ij / (n(n-1)),  q = sum_{i!=j} h_ij^2 / (n(n-1)),
  r = sum_i (S_i^2 - sum_{j!=i} h_ij^2) / (n(n-1)(n-2))  with S_i = sum_{j!=i} h_ij.

  The r numerator equals the sum of h_ij h_ik over distinct (i, j, k), so all
  three are unbiased and the whole pass is O(n^2).
*/
inline KernelMoments kernel_moments(std::span<const double> u, const Kernel& k) {
  const std::size_t n = u.size();
  if (n < 3) throw_degenerate("need n ≥ 3 for variance");
  CompensatedSum<double> m_sum, q_sum, r_sum;
  k.visit([&](const auto& h) {
    for (std::size_t i = 0; i < n; ++i) {
      CompensatedSum<double> row, row_sq;
      for (std::size_t j = 0; j < n; ++j) {
        if (j == i) continue;
        const double hij = h(u[i], u[j]);
        row += hij;
        row_sq += hij * hij;
      }
      const double s = row.value();
      const double s2 = row_sq.value();
      m_sum += s;
      q_sum += s2;
      r_sum += s * s - s2;
    }
    return 0;
  });
  const double nn = static_cast<double>(n);
  KernelMoments out;
  out.m = m_sum.value() / (nn * (nn - 1.0));
  out.q = q_sum.value() / (nn * (nn - 1.0));
  out.r = r_sum.value() / (nn * (nn - 1.0) * (nn - 2.0));
  return out;
}

inline double variance_from_moments(const KernelMoments& mom) {
  if (!(mom.m > 0.0)) throw_degenerate("degenerate Y under F: all kernel values are zero");
  const double sigma2 = (mom.q - 2.0 * mom.r + mom.m * mom.m) / (mom.m * mom.m);
  if (!(sigma2 > 0.0)) {
    throw Error(ErrorKind::numeric,
                "variance estimate is not positive (" + detail::format_number(sigma2) + ")",
                sigma2);
  }
  return sigma2;
}

inline VarianceEstimate sigma2_ustat(std::span<const double> ys, const Kernel& k, const DistMap& f,
                                     VarianceSource source = VarianceSource::ustat_plugin) {
  if (ys.size() < 3) throw_degenerate("need n ≥ 3 for variance");
  const auto u = f.apply(ys);
  VarianceEstimate est;
  est.components = kernel_moments(u, k);
  est.sigma2 = variance_from_moments(*est.components);
  est.source = source;
  return est;
}

struct TestOptions {
  Variant variant = Variant::simplified;
  /// Required for the plugin variant; rank variants use the empirical CDF.
  std::optional<DistMap> f;
  std::uint64_t tie_seed = 0;
  /// Caller asserts Y is continuous; enables the closed-form power variance.
  bool continuous_y = false;
};

/*!
  CLT-based test of independence: z = sqrt(n) xi / sigma. Large xi signals
  dependence, so the one-sided upper-tail p-value is the decision output.
*/
inline TestResult independence_test(const PairedSample& s, const Kernel& k,
                                    const TestOptions& opts) {
  if (s.size() < 3) throw_degenerate("need n ≥ 3 for variance");

  TestResult out;
  out.variant = opts.variant;
  const bool rank_based = opts.variant == Variant::rank || opts.variant == Variant::simplified ||
                          opts.variant == Variant::chatterjee;
  const Kernel kernel = opts.variant == Variant::chatterjee ? make_kernel(PowerKernel{1.0}) : k;

  switch (opts.variant) {
    case Variant::plugin:
      if (!opts.f) throw_usage("the plugin variant needs a distribution map F");
      out.coefficient = xi_plugin(s, kernel, *opts.f, opts.tie_seed);
      break;
    case Variant::rank:
      out.coefficient = xi_rank(s, kernel, opts.tie_seed);
      break;
    case Variant::simplified:
      out.coefficient = xi_simplified(s, kernel, opts.tie_seed);
      break;
    case Variant::chatterjee:
      out.coefficient = chatterjee_reference(s, opts.tie_seed);
      break;
    default:
      throw_usage("independence test is defined for plugin, rank, simplified and chatterjee");
  }

  if (opts.continuous_y) out.ties_with_continuous_flag = has_ties(s.ys());

  const auto gamma = kernel.power_exponent();
  if (rank_based && gamma && opts.continuous_y) {
    out.sigma2_used.sigma2 = sigma2_power_closed_form(*gamma);
    out.sigma2_used.source = VarianceSource::closed_form_power;
  } else if (rank_based) {
    out.sigma2_used = sigma2_ustat(s.ys(), kernel, empirical_map(s.ys()), VarianceSource::ustat_rank);
  } else {
    out.sigma2_used = sigma2_ustat(s.ys(), kernel, *opts.f, VarianceSource::ustat_plugin);
  }

  const double n = static_cast<double>(s.size());
  out.z = std::sqrt(n) * out.coefficient.xi / std::sqrt(out.sigma2_used.sigma2);
  out.p_one_sided = std_normal_sf(out.z);
  out.p_two_sided = 2.0 * std_normal_sf(std::abs(out.z));
  return out;
}

}  // namespace xicor
