// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>

#include "xicor/errors.hpp"
#include "xicor/quadrature.hpp"

namespace xicor {

/// h(y,z) = |y-z|^gamma, gamma > 0.
struct PowerKernel {
  double gamma = 1.0;
};

/// h(y,z) = 1 - exp(-beta |y-z|), beta > 0.
struct ExpKernel {
  double beta = 1.0;
};

/// h(y,z) = (e^y - e^z)^2.
struct ExpSquaredKernel {};

/// h(y,z) = e^{|y-z|} - 1. Same coefficient as 1 - e^{|y-z|} (the sign cancels
/// in zeta/chi) while staying nonnegative.
struct ExpGrowthKernel {};

struct CustomKernel {
  std::string name;
  std::function<double(double, double)> fn;
};

using KernelId =
    std::variant<PowerKernel, ExpKernel, ExpSquaredKernel, ExpGrowthKernel, CustomKernel>;

namespace eval {

// Concrete evaluators handed to hot loops by Kernel::visit.

struct AbsDiff {
  double scale;
  double operator()(double y, double z) const noexcept { return scale * std::abs(y - z); }
};

struct SquaredDiff {
  double scale;
  double operator()(double y, double z) const noexcept {
    const double d = y - z;
    return scale * (d * d);
  }
};

struct CubedAbsDiff {
  double scale;
  double operator()(double y, double z) const noexcept {
    const double d = std::abs(y - z);
    return scale * (d * d * d);
  }
};

struct PowAbsDiff {
  double gamma;
  double scale;
  double operator()(double y, double z) const noexcept {
    return scale * std::pow(std::abs(y - z), gamma);
  }
};

struct SaturatingExp {
  double beta;
  double scale;
  double operator()(double y, double z) const noexcept {
    return scale * -std::expm1(-beta * std::abs(y - z));
  }
};

struct ExpSquared {
  double scale;
  double operator()(double y, double z) const noexcept {
    const double d = std::exp(y) - std::exp(z);
    return scale * (d * d);
  }
};

struct ExpGrowth {
  double scale;
  double operator()(double y, double z) const noexcept {
    return scale * std::expm1(std::abs(y - z));
  }
};

struct Custom {
  const std::function<double(double, double)>* fn;
  double scale;
  double operator()(double y, double z) const { return scale * (*fn)(y, z); }
};

}  // namespace eval

namespace detail {

inline std::string format_number(double value) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) return std::to_string(value);
  return std::string(buf, end);
}

/// Strict decimal parse; the whole token must be consumed.
inline std::optional<double> parse_real(std::string_view text) {
  if (text.empty()) return std::nullopt;
  std::string owned(text);
  char* end = nullptr;
  const double value = std::strtod(owned.c_str(), &end);
  if (end != owned.c_str() + owned.size()) return std::nullopt;
  return value;
}

inline double exp_kernel_constant(double beta) {
  if (beta < 0.5) {
    // 2 * sum_{k>=1} (-1)^{k+1} beta^k / (k! (k+1) (k+2)); the closed form cancels badly here.
    double term = 1.0;
    double total = 0.0;
    for (int k = 1; k <= 30; ++k) {
      term *= beta / k;
      const double sign = (k % 2 == 1) ? 1.0 : -1.0;
      total += sign * term / ((k + 1.0) * (k + 2.0));
    }
    return 2.0 * total;
  }
  const double inv = 1.0 / beta;
  return 1.0 - 2.0 * inv + 2.0 * inv * inv - 2.0 * inv * inv * std::exp(-beta);
}

}  // namespace detail

class Kernel;
inline Kernel make_kernel(const KernelId& id);

/*!
  An immutable bivariate function h on [0,1]^2 with its metadata.

  Evaluation is dispatched once per loop through visit(), which hands the
  caller a concrete evaluator so inner loops avoid per-call indirection.
  operator() goes through the same evaluators, so both paths agree bit for
  bit.
*/
class Kernel {
 public:
  const KernelId& id() const noexcept { return id_; }
  const std::string& name() const noexcept { return name_; }
  const std::map<std::string, double>& params() const noexcept { return params_; }
  std::optional<double> closed_form_ch() const noexcept { return closed_form_ch_; }
  std::optional<double> lipschitz() const noexcept { return lipschitz_; }
  double scale() const noexcept { return scale_; }

  /// Exponent when this is a power kernel.
  std::optional<double> power_exponent() const noexcept {
    if (const auto* p = std::get_if<PowerKernel>(&id_)) return p->gamma;
    return std::nullopt;
  }

  /// c * h. The coefficient is unchanged for any c > 0.
  Kernel scaled(double c) const {
    if (!(c > 0.0) || !std::isfinite(c)) throw_usage("kernel scale must be positive and finite");
    Kernel k = *this;
    k.scale_ *= c;
    if (k.closed_form_ch_) *k.closed_form_ch_ *= c;
    if (k.lipschitz_) *k.lipschitz_ *= c;
    k.name_ = detail::format_number(c) + "*" + name_;
    return k;
  }

  template <typename Visitor>
  decltype(auto) visit(Visitor&& visitor) const {
    return std::visit(
        [&](const auto& id) -> decltype(auto) {
          using T = std::decay_t<decltype(id)>;
          if constexpr (std::is_same_v<T, PowerKernel>) {
            if (id.gamma == 1.0) return visitor(eval::AbsDiff{scale_});
            if (id.gamma == 2.0) return visitor(eval::SquaredDiff{scale_});
            if (id.gamma == 3.0) return visitor(eval::CubedAbsDiff{scale_});
            return visitor(eval::PowAbsDiff{id.gamma, scale_});
          } else if constexpr (std::is_same_v<T, ExpKernel>) {
            return visitor(eval::SaturatingExp{id.beta, scale_});
          } else if constexpr (std::is_same_v<T, ExpSquaredKernel>) {
            return visitor(eval::ExpSquared{scale_});
          } else if constexpr (std::is_same_v<T, ExpGrowthKernel>) {
            return visitor(eval::ExpGrowth{scale_});
          } else {
            return visitor(eval::Custom{&id.fn, scale_});
          }
        },
        id_);
  }

  double operator()(double y, double z) const {
    return visit([&](const auto& h) { return h(y, z); });
  }

 private:
  friend Kernel make_kernel(const KernelId& id);

  KernelId id_;
  std::string name_;
  std::map<std::string, double> params_;
  std::optional<double> closed_form_ch_;
  std::optional<double> lipschitz_;
  double scale_ = 1.0;
};

namespace detail {

inline void validate_on_grid(const Kernel& k, const std::string& name) {
  constexpr int points = 101;
  constexpr double tol = 1e-12;
  for (int i = 0; i < points; ++i) {
    const double y = i / double(points - 1);
    if (std::abs(k(y, y)) > tol) {
      throw_usage("kernel '" + name + "' is not zero on the diagonal at " + format_number(y));
    }
    for (int j = 0; j < points; ++j) {
      const double z = j / double(points - 1);
      const double h = k(y, z);
      if (!std::isfinite(h)) throw_usage("kernel '" + name + "' is not finite on [0,1]^2");
      if (h < -tol) throw_usage("kernel '" + name + "' takes negative values");
      if (std::abs(h - k(z, y)) > tol) throw_usage("kernel '" + name + "' is not symmetric");
    }
  }
}

}  // namespace detail

inline Kernel make_kernel(const KernelId& id) {
  Kernel k;
  k.id_ = id;
  std::visit(
      [&](const auto& spec) {
        using T = std::decay_t<decltype(spec)>;
        if constexpr (std::is_same_v<T, PowerKernel>) {
          if (!std::isfinite(spec.gamma)) throw_usage("power kernel: γ must be finite");
          if (!(spec.gamma > 0.0)) throw_usage("power kernel: γ must be > 0");
          const double g = spec.gamma;
          k.name_ = "power:" + detail::format_number(g);
          k.params_["gamma"] = g;
          k.closed_form_ch_ = 2.0 / ((g + 1.0) * (g + 2.0));
          if (g >= 1.0) k.lipschitz_ = g;
        } else if constexpr (std::is_same_v<T, ExpKernel>) {
          if (!std::isfinite(spec.beta)) throw_usage("exp kernel: β must be finite");
          if (!(spec.beta > 0.0)) throw_usage("exp kernel: β must be > 0");
          k.name_ = "exp:" + detail::format_number(spec.beta);
          k.params_["beta"] = spec.beta;
          k.closed_form_ch_ = detail::exp_kernel_constant(spec.beta);
          k.lipschitz_ = spec.beta;
        } else if constexpr (std::is_same_v<T, ExpSquaredKernel>) {
          const double e = std::numbers::e;
          k.name_ = "expsq";
          k.closed_form_ch_ = (e * e - 1.0) - 2.0 * (e - 1.0) * (e - 1.0);
          k.lipschitz_ = 2.0 * e * e;
        } else if constexpr (std::is_same_v<T, ExpGrowthKernel>) {
          k.name_ = "expgrowth";
          k.closed_form_ch_ = 2.0 * std::numbers::e - 5.0;
          k.lipschitz_ = std::numbers::e;
        } else {
          if (!spec.fn) throw_usage("custom kernel '" + spec.name + "' has no function");
          k.name_ = spec.name.empty() ? std::string("custom") : spec.name;
        }
      },
      id);
  if (std::holds_alternative<CustomKernel>(id)) detail::validate_on_grid(k, k.name_);
  return k;
}

inline Kernel make_custom_kernel(std::string name, std::function<double(double, double)> fn) {
  return make_kernel(CustomKernel{std::move(name), std::move(fn)});
}

/// Parses `power:GAMMA`, `exp:BETA`, `expsq` or `expgrowth`.
inline Kernel parse_kernel_spec(std::string_view spec) {
  const auto colon = spec.find(':');
  const std::string_view head = spec.substr(0, colon);
  const std::string_view arg = colon == std::string_view::npos ? std::string_view{}
                                                                : spec.substr(colon + 1);
  auto number = [&](const char* what) {
    const auto value = detail::parse_real(arg);
    if (!value) {
      throw_usage("kernel spec '" + std::string(spec) + "': expected a number for " + what);
    }
    return *value;
  };
  if (head == "power") return make_kernel(PowerKernel{number("γ")});
  if (head == "exp") return make_kernel(ExpKernel{number("β")});
  if (colon == std::string_view::npos) {
    if (head == "expsq") return make_kernel(ExpSquaredKernel{});
    if (head == "expgrowth") return make_kernel(ExpGrowthKernel{});
  }
  throw_usage("unknown kernel spec '" + std::string(spec) +
              "' (expected power:GAMMA, exp:BETA, expsq or expgrowth)");
}

/// Quadrature of h over the unit square, ignoring any closed form.
inline QuadratureResult integrate_kernel(const Kernel& k, double quadrature_tol) {
  QuadratureOptions options;
  options.abs_tol = quadrature_tol;
  return k.visit([&](const auto& h) { return integrate_unit_square(h, options); });
}

/// C_h = integral of h over [0,1]^2: closed form when known, quadrature otherwise.
inline double normalization_constant(const Kernel& k, double quadrature_tol = 1e-10) {
  if (!(quadrature_tol > 0.0)) throw_usage("quadrature tolerance must be > 0");
  if (const auto c = k.closed_form_ch()) return *c;
  return integrate_kernel(k, quadrature_tol).value;
}

}  // namespace xicor
