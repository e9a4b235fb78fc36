// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <queue>
#include <sstream>
#include <vector>

#include "xicor/compensated_sum.hpp"
#include "xicor/errors.hpp"

namespace xicor {

/// Gauss-Legendre nodes and weights on [-1, 1].
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Newton iteration on P_n from the Tricomi initial guesses.
inline GaussLegendreRule gauss_legendre(int order) {
  if (order < 1) throw_usage("Gauss-Legendre order must be >= 1");
  GaussLegendreRule rule;
  rule.nodes.resize(static_cast<std::size_t>(order));
  rule.weights.resize(static_cast<std::size_t>(order));
  const int half = (order + 1) / 2;
  for (int i = 0; i < half; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (order + 0.5));
    double dp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0;
      double p1 = z;
      for (int k = 2; k <= order; ++k) {
        const double pk = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = pk;
      }
      dp = order * (z * p1 - p0) / (z * z - 1.0);
      const double dz = p1 / dp;
      z -= dz;
      if (std::abs(dz) < 1e-16) break;
    }
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(order - 1 - i);
    const double w = 2.0 / ((1.0 - z * z) * dp * dp);
    rule.nodes[lo] = -z;
    rule.nodes[hi] = z;
    rule.weights[lo] = w;
    rule.weights[hi] = w;
  }
  return rule;
}

struct QuadratureOptions {
  double abs_tol = 1e-10;
  int order = 8;
  std::size_t max_panels = std::size_t{1} << 20;
};

struct QuadratureResult {
  double value = 0.0;
  double error_estimate = 0.0;
  std::size_t panels = 0;
};

namespace detail {

template <typename F>
double tensor_rule(const F& f, const GaussLegendreRule& rule, double x0, double y0,
                   double size) {
  const double half = 0.5 * size;
  double total = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double x = x0 + half * (rule.nodes[i] + 1.0);
    double row = 0.0;
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const double y = y0 + half * (rule.nodes[j] + 1.0);
      row += rule.weights[j] * f(x, y);
    }
    total += rule.weights[i] * row;
  }
  return total * half * half;
}

struct Panel {
  double x0;
  double y0;
  double size;
  double coarse;
  double child[4];
  double fine;
  double error;

  bool operator<(const Panel& other) const { return error < other.error; }
};

template <typename F>
Panel make_panel(const F& f, const GaussLegendreRule& rule, double x0, double y0,
                 double size, double coarse) {
  Panel p{x0, y0, size, coarse, {}, 0.0, 0.0};
  const double h = 0.5 * size;
  p.child[0] = tensor_rule(f, rule, x0, y0, h);
  p.child[1] = tensor_rule(f, rule, x0 + h, y0, h);
  p.child[2] = tensor_rule(f, rule, x0, y0 + h, h);
  p.child[3] = tensor_rule(f, rule, x0 + h, y0 + h, h);
  p.fine = (p.child[0] + p.child[1]) + (p.child[2] + p.child[3]);
  p.error = std::abs(p.fine - p.coarse);
  return p;
}

}  // namespace detail

/*!
  Integrates f over [0,1]^2 with tensor-product Gauss-Legendre panels.

  Each panel carries the difference between its one-panel estimate and the
  sum over its four quadrants. The panel with the largest difference is
  bisected in both directions until the summed differences fall below
  abs_tol. Exceeding max_panels raises a numeric Error carrying the last
  estimate.
*/
template <typename F>
QuadratureResult integrate_unit_square(const F& f, const QuadratureOptions& options) {
  if (!(options.abs_tol > 0.0) || !std::isfinite(options.abs_tol)) {
    throw_usage("quadrature tolerance must be a positive finite number");
  }
  const GaussLegendreRule rule = gauss_legendre(options.order);

  std::priority_queue<detail::Panel> active;
  active.push(detail::make_panel(f, rule, 0.0, 0.0, 1.0,
                                 detail::tensor_rule(f, rule, 0.0, 0.0, 1.0)));
  double error_total = active.top().error;
  double value_total = active.top().fine;
  std::vector<detail::Panel> settled;

  while (error_total > options.abs_tol) {
    if (active.size() + settled.size() >= options.max_panels) {
      std::ostringstream msg;
      msg << "quadrature did not converge within " << options.max_panels
          << " panels (estimate " << value_total << ", error " << error_total << ")";
      throw Error(ErrorKind::numeric, msg.str(), value_total);
    }
    const detail::Panel parent = active.top();
    active.pop();
    error_total -= parent.error;
    value_total -= parent.fine;
    const double h = 0.5 * parent.size;
    const double offsets[4][2] = {{0, 0}, {h, 0}, {0, h}, {h, h}};
    for (int c = 0; c < 4; ++c) {
      auto child = detail::make_panel(f, rule, parent.x0 + offsets[c][0],
                                      parent.y0 + offsets[c][1], h, parent.child[c]);
      error_total += child.error;
      value_total += child.fine;
      // Panels whose refinement is exact to rounding never need revisiting.
      if (child.error == 0.0) {
        settled.push_back(child);
      } else {
        active.push(child);
      }
    }
  }

  CompensatedSum<double> value;
  CompensatedSum<double> error;
  QuadratureResult result;
  result.panels = active.size() + settled.size();
  for (const auto& p : settled) value += p.fine;
  while (!active.empty()) {
    value += active.top().fine;
    error += active.top().error;
    active.pop();
  }
  result.value = value.value();
  result.error_estimate = error.value();
  return result;
}

}  // namespace xicor
