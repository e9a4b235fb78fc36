// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "xicor/cdf.hpp"
#include "xicor/compensated_sum.hpp"
#include "xicor/errors.hpp"
#include "xicor/estimator.hpp"
#include "xicor/kernels.hpp"
#include "xicor/rng.hpp"
#include "xicor/sample.hpp"

namespace xicor {

/// Y = f(X) + sigma E with X ~ Unif[-1,1], E ~ N(0,1).
enum class Model { linear, quadratic, sinusoidal };

inline std::string_view to_string(Model m) noexcept {
  switch (m) {
    case Model::linear:
      return "linear";
    case Model::quadratic:
      return "quadratic";
    case Model::sinusoidal:
      return "sinusoidal";
  }
  return "unknown";
}

inline Model parse_model(std::string_view text) {
  for (Model m : {Model::linear, Model::quadratic, Model::sinusoidal}) {
    if (text == to_string(m)) return m;
  }
  throw_usage("unknown model '" + std::string(text) + "' (expected linear, quadratic or sinusoidal)");
}

inline double model_signal(Model m, double x) noexcept {
  switch (m) {
    case Model::linear:
      return x;
    case Model::quadratic:
      return x * x;
    case Model::sinusoidal:
      return std::sin(2.0 * std::numbers::pi * x);
  }
  return 0.0;
}

/// Noise magnitude. The pure-noise level (Y = E) is a separate state rather
/// than a floating infinity so f(x) + sigma E never meets inf * 0.
class NoiseLevel {
 public:
  constexpr NoiseLevel() = default;

  static NoiseLevel finite(double sigma) {
    if (!std::isfinite(sigma) || sigma < 0.0) throw_usage("noise level σ must be finite and ≥ 0");
    NoiseLevel s;
    s.value_ = sigma;
    return s;
  }

  static constexpr NoiseLevel pure_noise() {
    NoiseLevel s;
    s.pure_noise_ = true;
    return s;
  }

  /// Accepts a nonnegative number or `inf`.
  static NoiseLevel parse(std::string_view text) {
    if (text == "inf" || text == "Inf" || text == "infinity") return pure_noise();
    const auto v = detail::parse_real(text);
    if (!v) throw_usage("cannot parse noise level '" + std::string(text) + "'");
    return finite(*v);
  }

  constexpr bool is_pure_noise() const noexcept { return pure_noise_; }
  constexpr double value() const noexcept { return value_; }

  std::string to_string() const { return pure_noise_ ? "inf" : detail::format_number(value_); }

  /// One draw of Y given X = x.
  double draw_y(Model m, double x, double e) const noexcept {
    if (pure_noise_) return e;
    if (value_ == 0.0) return model_signal(m, x);
    return model_signal(m, x) + value_ * e;
  }

 private:
  double value_ = 0.0;
  bool pure_noise_ = false;
};

struct ModelSpec {
  Model model = Model::linear;
  NoiseLevel sigma;
  std::size_t n = 100;
  std::uint64_t seed = 0;
};

/// Deterministic in spec.seed: x_i then e_i are drawn in index order.
inline PairedSample generate(const ModelSpec& spec) {
  if (spec.n < 2) throw_usage("model sample size must be ≥ 2");
  Rng rng = make_rng(spec.seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> xs(spec.n), ys(spec.n);
  for (std::size_t i = 0; i < spec.n; ++i) {
    xs[i] = unif(rng);
    ys[i] = spec.sigma.draw_y(spec.model, xs[i], normal(rng));
  }
  return PairedSample(std::move(xs), std::move(ys));
}

/// Mean and standard deviation of one coefficient over replicates. sd uses
/// the n-1 denominator and is only meaningful when reps >= 2.
struct RepSummary {
  double mean = 0.0;
  double sd = 0.0;
  std::size_t reps = 0;
  std::vector<double> per_rep;

  bool has_sd() const noexcept { return reps >= 2; }
};

inline RepSummary summarize(std::vector<double> values) {
  RepSummary s;
  s.reps = values.size();
  if (values.empty()) return s;
  CompensatedSum<double> sum;
  for (double v : values) sum += v;
  s.mean = sum.value() / static_cast<double>(values.size());
  if (values.size() >= 2) {
    CompensatedSum<double> ss;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(ss.value() / static_cast<double>(values.size() - 1));
  }
  s.per_rep = std::move(values);
  return s;
}

/// Seed for replicate `rep` of a run started from base_seed.
inline std::uint64_t replicate_seed(std::uint64_t base_seed, std::size_t rep) noexcept {
  return derive_seed(base_seed, rep);
}

inline unsigned default_workers() noexcept {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/*!
  Runs body(rep) for rep in [0, reps) on up to `workers` threads. Results
  must be written by rep index; the first failure (lowest rep index) is
  rethrown with the index attached.
*/
inline void for_each_replicate(std::size_t reps, unsigned workers,
                               const std::function<void(std::size_t)>& body) {
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::optional<std::size_t> failed_rep;
  std::exception_ptr failure;

  auto run = [&] {
    for (std::size_t rep = next++; rep < reps; rep = next++) {
      try {
        body(rep);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failed_rep || rep < *failed_rep) {
          failed_rep = rep;
          failure = std::current_exception();
        }
      }
    }
  };

  const unsigned count = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(reps)));
  if (count == 1) {
    run();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(count);
    for (unsigned w = 0; w < count; ++w) pool.emplace_back(run);
  }

  if (failure) {
    const std::string prefix = "rep " + std::to_string(*failed_rep) + ": ";
    try {
      std::rethrow_exception(failure);
    } catch (const Error& e) {
      throw e.with_context(prefix);
    } catch (const std::exception& e) {
      throw Error(ErrorKind::numeric, prefix + e.what());
    }
  }
}

/// Optional hook to observe each replicate's sample (e.g. to dump it to disk).
using SampleObserver =
    std::function<void(std::size_t rep, std::uint64_t seed, const PairedSample& sample,
                        const std::vector<CoefficientResult>& results)>;

/*!
  Evaluates several estimators on the same `reps` generated samples. The
  sample for replicate k is generated from replicate_seed(base_seed, k),
  which is also its tie-break seed, so results do not depend on `workers`.
*/
inline std::vector<RepSummary> replicate_many(const ModelSpec& spec,
                                              std::vector<EstimatorConfig> methods,
                                              std::size_t reps, std::uint64_t base_seed,
                                              unsigned workers = default_workers(),
                                              const SampleObserver& observer = {}) {
  if (reps < 1) throw_usage("reps must be ≥ 1");
  for (auto& m : methods) m.prepare();
  std::vector<std::vector<double>> values(methods.size(), std::vector<double>(reps));
  std::mutex observer_mutex;

  for_each_replicate(reps, workers, [&](std::size_t rep) {
    ModelSpec s = spec;
    s.seed = replicate_seed(base_seed, rep);
    const PairedSample sample = generate(s);
    std::vector<CoefficientResult> results;
    results.reserve(methods.size());
    for (std::size_t k = 0; k < methods.size(); ++k) {
      results.push_back(estimate(sample, methods[k], s.seed));
      values[k][rep] = results.back().xi;
    }
    if (observer) {
      std::lock_guard lock(observer_mutex);
      observer(rep, s.seed, sample, results);
    }
  });

  std::vector<RepSummary> out;
  out.reserve(methods.size());
  for (auto& v : values) out.push_back(summarize(std::move(v)));
  return out;
}

inline RepSummary replicate(const ModelSpec& spec, const EstimatorConfig& method, std::size_t reps,
                            std::uint64_t base_seed, unsigned workers = default_workers()) {
  return replicate_many(spec, {method}, reps, base_seed, workers).front();
}

struct PopulationLimit {
  double zeta_hat = 0.0;
  double chi_hat = 0.0;
  double xi_hat = 0.0;
  /// Standard error of xi_hat from batch means (ratio linearized).
  double mc_std_err = 0.0;
  std::size_t draws = 0;
};

/*!
  Monte Carlo estimate of the population zeta, chi and xi.

  zeta: x ~ Unif[-1,1], then y, z drawn independently from the conditional
  law N(f(x), sigma^2). chi: y and z come from independent fresh x draws, so
  the two estimates share no randomness.
*/
inline PopulationLimit population_oracle(Model model, NoiseLevel sigma, const Kernel& k,
                                         const DistMap& f, std::size_t draws, std::uint64_t seed,
                                         std::size_t batches = 40) {
  if (draws < 10000) throw_usage("population oracle needs at least 10^4 draws");
  if (batches < 30) throw_usage("population oracle needs at least 30 batches");
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  std::normal_distribution<double> normal(0.0, 1.0);

  std::vector<double> zeta_b(batches), chi_b(batches);
  std::vector<std::size_t> size_b(batches);
  k.visit([&](const auto& h) {
    for (std::size_t b = 0; b < batches; ++b) {
      const std::size_t count = draws / batches + (b < draws % batches ? 1 : 0);
      CompensatedSum<double> zs, cs;
      for (std::size_t i = 0; i < count; ++i) {
        const double x = unif(rng);
        const double y = sigma.draw_y(model, x, normal(rng));
        const double z = sigma.draw_y(model, x, normal(rng));
        zs += h(f(y), f(z));
        const double x1 = unif(rng);
        const double y1 = sigma.draw_y(model, x1, normal(rng));
        const double x2 = unif(rng);
        const double z2 = sigma.draw_y(model, x2, normal(rng));
        cs += h(f(y1), f(z2));
      }
      zeta_b[b] = zs.value() / static_cast<double>(count);
      chi_b[b] = cs.value() / static_cast<double>(count);
      size_b[b] = count;
    }
    return 0;
  });

  CompensatedSum<double> zt, ct;
  for (std::size_t b = 0; b < batches; ++b) {
    zt += zeta_b[b] * static_cast<double>(size_b[b]);
    ct += chi_b[b] * static_cast<double>(size_b[b]);
  }
  PopulationLimit out;
  out.draws = draws;
  out.zeta_hat = zt.value() / static_cast<double>(draws);
  out.chi_hat = ct.value() / static_cast<double>(draws);

  const double nb = static_cast<double>(batches);
  auto batch_se = [&](auto&& value_of) {
    CompensatedSum<double> mean_sum;
    for (std::size_t b = 0; b < batches; ++b) mean_sum += value_of(b);
    const double mean = mean_sum.value() / nb;
    CompensatedSum<double> ss;
    for (std::size_t b = 0; b < batches; ++b) ss += (value_of(b) - mean) * (value_of(b) - mean);
    return std::sqrt(ss.value() / (nb - 1.0) / nb);
  };

  const double chi_se = batch_se([&](std::size_t b) { return chi_b[b]; });
  if (!(out.chi_hat > 0.0) || out.chi_hat < 10.0 * chi_se) {
    throw Error(ErrorKind::numeric, "normalization indistinguishable from 0", out.chi_hat);
  }
  const double ratio = out.zeta_hat / out.chi_hat;
  out.xi_hat = 1.0 - ratio;
  out.mc_std_err =
      batch_se([&](std::size_t b) { return (zeta_b[b] - ratio * chi_b[b]) / out.chi_hat; });
  return out;
}

/// "mean (100*sd)" with three and two decimals; sd is left out when reps < 2.
inline std::string format_cell(const RepSummary& s) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(3) << s.mean;
  if (s.has_sd()) out << " (" << std::setprecision(2) << 100.0 * s.sd << ")";
  return out.str();
}

struct TableRow {
  std::string method;
  std::string kernel;
  /// One summary per (sigma, n) column, sigma-major.
  std::vector<RepSummary> cells;
};

/// Table-shaped CSV: one row per (method, kernel), one column per (sigma, n).
inline void write_table_csv(std::ostream& out, const std::vector<NoiseLevel>& sigmas,
                            const std::vector<std::size_t>& ns, const std::vector<TableRow>& rows) {
  out << "method,kernel";
  for (const auto& s : sigmas) {
    for (std::size_t n : ns) out << ",sigma=" << s.to_string() << " n=" << n;
  }
  out << "\n";
  for (const auto& row : rows) {
    out << row.method << "," << row.kernel;
    for (const auto& cell : row.cells) out << "," << format_cell(cell);
    out << "\n";
  }
}

/// Method and kernel columns for a table row.
inline std::pair<std::string, std::string> table_labels(const EstimatorConfig& cfg) {
  switch (cfg.variant) {
    case Variant::plugin:
      return {"plugin[" + cfg.f.describe() + "]", cfg.kernel.name()};
    case Variant::rank:
    case Variant::simplified:
      return {std::string(to_string(cfg.variant)), cfg.kernel.name()};
    default:
      return {std::string(to_string(cfg.variant)), ""};
  }
}

}  // namespace xicor
