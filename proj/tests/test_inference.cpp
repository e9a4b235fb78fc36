// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xicor/inference.hpp"
#include "xicor/rng.hpp"

namespace xicor {
namespace {

/// Values on the 1/64 grid: every kernel value, square and product is exact.
std::vector<double> dyadic_values(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> d(0, 64);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng) / 64.0;
  return v;
}

TEST(ClosedForm, GammaOneIsTwoFifths) { EXPECT_NEAR(sigma2_power_closed_form(1.0), 0.4, 1e-12); }

TEST(ClosedForm, GammaTwoIsOne) { EXPECT_NEAR(sigma2_power_closed_form(2.0), 1.0, 1e-12); }

TEST(ClosedForm, GammaHalfAgreesWithMonteCarloMoments) {
  // sigma^2 = (q - 2r + m^2) / m^2 with U, V, W iid uniform; 100 batches.
  const double gamma = 0.5;
  constexpr int batches = 100;
  constexpr int per_batch = 100000;
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::vector<double> estimates;
  for (int b = 0; b < batches; ++b) {
    double m = 0.0, q = 0.0, r = 0.0;
    for (int i = 0; i < per_batch; ++i) {
      const double u = unif(rng), v = unif(rng), w = unif(rng);
      const double h12 = std::pow(std::abs(u - v), gamma);
      const double h13 = std::pow(std::abs(u - w), gamma);
      m += h12;
      q += h12 * h12;
      r += h12 * h13;
    }
    m /= per_batch;
    q /= per_batch;
    r /= per_batch;
    estimates.push_back((q - 2.0 * r + m * m) / (m * m));
  }
  double mean = 0.0;
  for (double e : estimates) mean += e;
  mean /= batches;
  double ss = 0.0;
  for (double e : estimates) ss += (e - mean) * (e - mean);
  const double se = std::sqrt(ss / (batches - 1) / batches);
  const double closed = sigma2_power_closed_form(gamma);
  EXPECT_GT(closed, 0.0);
  EXPECT_NEAR(closed, mean, 3.0 * se) << "se=" << se;
}

TEST(ClosedForm, DomainAndRange) {
  EXPECT_THROW(sigma2_power_closed_form(0.0), Error);
  try {
    sigma2_power_closed_form(151.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::numeric);
  }
  for (double g : {0.1, 0.5, 1.5, 3.0, 10.0, 100.0}) {
    const double s = sigma2_power_closed_form(g);
    EXPECT_TRUE(std::isfinite(s)) << g;
    EXPECT_GT(s, 0.0) << g;
  }
}

TEST(KernelMoments, HandExampleThreePoints) {
  // Pairs: |0.1-0.5| = 0.4, |0.1-0.9| = 0.8, |0.5-0.9| = 0.4.
  // m = 2(0.4+0.8+0.4)/6 = 8/15, q = 2(0.16+0.64+0.16)/6 = 8/25,
  // r = 2(0.4*0.8 + 0.4*0.4 + 0.8*0.4)/6 = 4/15, so sigma^2 = 1/4.
  const std::vector<double> ys{0.1, 0.5, 0.9};
  const auto est = sigma2_ustat(ys, make_kernel(PowerKernel{1.0}), DistMap::uniform(0.0, 1.0));
  ASSERT_TRUE(est.components.has_value());
  EXPECT_NEAR(est.components->m, 8.0 / 15.0, 1e-15);
  EXPECT_NEAR(est.components->q, 8.0 / 25.0, 1e-15);
  EXPECT_NEAR(est.components->r, 4.0 / 15.0, 1e-15);
  EXPECT_NEAR(est.sigma2, 0.25, 1e-14);
  const auto brute = oracle::brute_force_moments({0.1, 0.5, 0.9}, make_kernel(PowerKernel{1.0}));
  EXPECT_NEAR(brute.m, est.components->m, 1e-15);
  EXPECT_NEAR(brute.q, est.components->q, 1e-15);
  EXPECT_NEAR(brute.r, est.components->r, 1e-15);
}

TEST(KernelMoments, RowSumEqualsBruteForceExactlyOnDyadicInputs) {
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + trial % 28;
    const auto u = dyadic_values(rng, n);
    for (const auto& k : {make_kernel(PowerKernel{1.0}), make_kernel(PowerKernel{2.0})}) {
      const auto fast = kernel_moments(u, k);
      const auto slow = oracle::brute_force_moments(u, k);
      ASSERT_EQ(fast.m, slow.m) << k.name() << " n=" << n;
      ASSERT_EQ(fast.q, slow.q);
      ASSERT_EQ(fast.r, slow.r);
    }
  }
}

TEST(KernelMoments, RowSumMatchesBruteForceOnGeneralInputs) {
  std::mt19937_64 rng(67);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 3 + trial % 28;
    const auto u = oracle::uniform_values(rng, n);
    for (const auto& k : {make_kernel(PowerKernel{0.5}), make_kernel(ExpKernel{2.0}),
                          make_kernel(ExpSquaredKernel{})}) {
      const auto fast = kernel_moments(u, k);
      const auto slow = oracle::brute_force_moments(u, k);
      ASSERT_NEAR(fast.m, slow.m, 1e-12 * std::abs(slow.m));
      ASSERT_NEAR(fast.q, slow.q, 1e-12 * std::abs(slow.q));
      ASSERT_NEAR(fast.r, slow.r, 1e-12 * std::abs(slow.r));
    }
  }
}

TEST(KernelMoments, InvariantUnderRelabelling) {
  std::mt19937_64 rng(68);
  auto u = dyadic_values(rng, 25);
  const Kernel k = make_kernel(PowerKernel{1.0});
  const auto a = kernel_moments(u, k);
  std::shuffle(u.begin(), u.end(), rng);
  const auto b = kernel_moments(u, k);
  EXPECT_EQ(a.m, b.m);
  EXPECT_EQ(a.q, b.q);
  EXPECT_EQ(a.r, b.r);
}

TEST(KernelMoments, ErrorPaths) {
  const Kernel k = make_kernel(PowerKernel{1.0});
  try {
    sigma2_ustat(std::vector<double>{1.0, 1.0, 1.0}, k, DistMap::std_normal());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    EXPECT_NE(std::string(e.what()).find("degenerate Y under F"), std::string::npos);
  }
  EXPECT_THROW(sigma2_ustat(std::vector<double>{1.0, 2.0}, k, DistMap::std_normal()), Error);
}

TEST(KernelMoments, UstatConvergesToClosedForm) {
  const Kernel k = make_kernel(PowerKernel{1.0});
  for (int rep = 0; rep < 20; ++rep) {
    std::mt19937_64 rng(500 + rep);
    const auto ys = oracle::uniform_values(rng, 5000);
    const auto est = sigma2_ustat(ys, k, empirical_map(ys), VarianceSource::ustat_rank);
    EXPECT_NEAR(est.sigma2, sigma2_power_closed_form(1.0), 0.05) << "rep " << rep;
  }
}

TEST(IndependenceTest, ZArithmeticContract) {
  std::mt19937_64 rng(70);
  const auto xs = oracle::normal_values(rng, 400);
  const auto ys = oracle::normal_values(rng, 400);
  TestOptions opts;
  opts.continuous_y = true;
  const auto t = independence_test(PairedSample(xs, ys), make_kernel(PowerKernel{1.0}), opts);
  EXPECT_EQ(t.sigma2_used.source, VarianceSource::closed_form_power);
  EXPECT_NEAR(t.z, std::sqrt(400.0) * t.coefficient.xi / std::sqrt(0.4), 1e-12);
  EXPECT_NEAR(t.p_one_sided, 1.0 - std_normal_cdf(t.z), 1e-15);
  EXPECT_NEAR(t.p_two_sided, 2.0 * (1.0 - std_normal_cdf(std::abs(t.z))), 1e-15);
  EXPECT_FALSE(t.ties_with_continuous_flag);
}

TEST(IndependenceTest, IdentityIsExtreme) {
  std::mt19937_64 rng(71);
  const auto xs = oracle::normal_values(rng, 1000);
  TestOptions opts;
  opts.continuous_y = true;
  EXPECT_LT(independence_test(PairedSample(xs, xs), make_kernel(PowerKernel{1.0}), opts).p_one_sided,
            1e-6);
  opts.continuous_y = false;
  EXPECT_LT(independence_test(PairedSample(xs, xs), make_kernel(PowerKernel{1.0}), opts).p_one_sided,
            1e-6);
}

TEST(IndependenceTest, VarianceSourceSelection) {
  std::mt19937_64 rng(72);
  const auto xs = oracle::normal_values(rng, 50);
  const auto ys = oracle::normal_values(rng, 50);
  const PairedSample s(xs, ys);
  TestOptions opts;
  opts.variant = Variant::rank;
  EXPECT_EQ(independence_test(s, make_kernel(PowerKernel{2.0}), opts).sigma2_used.source,
            VarianceSource::ustat_rank);
  opts.continuous_y = true;
  EXPECT_EQ(independence_test(s, make_kernel(PowerKernel{2.0}), opts).sigma2_used.source,
            VarianceSource::closed_form_power);
  EXPECT_EQ(independence_test(s, make_kernel(ExpKernel{1.0}), opts).sigma2_used.source,
            VarianceSource::ustat_rank);
  opts.variant = Variant::plugin;
  EXPECT_THROW(independence_test(s, make_kernel(PowerKernel{1.0}), opts), Error);
  opts.f = DistMap::std_normal();
  const auto t = independence_test(s, make_kernel(PowerKernel{1.0}), opts);
  EXPECT_EQ(t.sigma2_used.source, VarianceSource::ustat_plugin);
  EXPECT_TRUE(t.sigma2_used.components.has_value());
  opts.variant = Variant::pearson;
  EXPECT_THROW(independence_test(s, make_kernel(PowerKernel{1.0}), opts), Error);
}

TEST(IndependenceTest, FlagsTiesDeclaredContinuous) {
  const PairedSample s({1.0, 2.0, 3.0, 4.0}, {1.0, 1.0, 2.0, 3.0});
  TestOptions opts;
  opts.continuous_y = true;
  EXPECT_TRUE(independence_test(s, make_kernel(PowerKernel{1.0}), opts).ties_with_continuous_flag);
}

TEST(IndependenceTest, TooFewObservations) {
  const PairedSample s({1.0, 2.0}, {2.0, 1.0});
  try {
    independence_test(s, make_kernel(PowerKernel{1.0}), TestOptions{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
  }
}

TEST(IndependenceTest, NullLevelAndVariance) {
  constexpr int reps = 2000;
  constexpr std::size_t n = 1000;
  const Kernel k = make_kernel(PowerKernel{1.0});
  TestOptions opts;
  opts.continuous_y = true;
  int rejections = 0;
  double sum = 0.0, sum_sq = 0.0;
  for (int rep = 0; rep < reps; ++rep) {
    std::mt19937_64 rng(derive_seed(424242, rep));
    const auto xs = oracle::normal_values(rng, n);
    const auto ys = oracle::normal_values(rng, n);
    const auto t = independence_test(PairedSample(xs, ys), k, opts);
    rejections += t.p_one_sided < 0.05;
    const double scaled = std::sqrt(static_cast<double>(n)) * t.coefficient.xi;
    sum += scaled;
    sum_sq += scaled * scaled;
  }
  const double rate = rejections / double(reps);
  const double var = (sum_sq - sum * sum / reps) / (reps - 1);
  EXPECT_NEAR(rate, 0.05, 0.015);
  EXPECT_GE(var, 0.35);
  EXPECT_LE(var, 0.45);
}

}  // namespace
}  // namespace xicor
