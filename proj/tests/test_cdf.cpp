// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "xicor/cdf.hpp"

namespace xicor {
namespace {

TEST(StdNormalCdf, CenterIsOneHalf) { EXPECT_EQ(std_normal_cdf(0.0), 0.5); }

TEST(StdNormalCdf, UpperQuantileAgainstSeriesOracle) {
  const double oracle = static_cast<double>(oracle::normal_cdf(1.959964L));
  EXPECT_NEAR(std_normal_cdf(1.959964), oracle, 1e-15);
  EXPECT_NEAR(std_normal_cdf(1.959964), 0.975, 1e-6);
}

TEST(StdNormalCdf, AbsoluteErrorBelow1e12OnGrid) {
  for (int i = -500; i <= 500; ++i) {
    const double t = i / 100.0;
    const double expected = static_cast<double>(oracle::normal_cdf(t));
    ASSERT_NEAR(std_normal_cdf(t), expected, 1e-12) << "t=" << t;
  }
}

TEST(StdNormalCdf, ReflectionSumsToOne) {
  for (double t : {0.1, 0.5, 1.0, 2.5, 4.0, 7.5}) {
    EXPECT_NEAR(std_normal_cdf(t) + std_normal_cdf(-t), 1.0, 1e-14) << t;
    EXPECT_NEAR(std_normal_sf(t), std_normal_cdf(-t), 1e-300);
  }
}

TEST(StdNormalCdf, OpenUnitRangeOnModerateInputs) {
  // Beyond |t| of about 8.3 the upper tail rounds to exactly 1 in double.
  double previous = 0.0;
  for (int i = -800; i <= 800; ++i) {
    const double v = std_normal_cdf(i / 100.0);
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    if (i <= 600) {
      ASSERT_GT(v, previous);
    } else {
      ASSERT_GE(v, previous);
    }
    previous = v;
  }
}

TEST(FitNormalMap, TwoPointSample) {
  const std::vector<double> ys{-1.0, 1.0};
  const DistMap f = fit_normal_map(ys);
  EXPECT_EQ(f.kind(), DistMapKind::fitted_normal);
  EXPECT_EQ(f.mu(), 0.0);
  EXPECT_DOUBLE_EQ(f.sigma(), std::sqrt(2.0));
  EXPECT_EQ(f(0.0), 0.5);
}

TEST(FitNormalMap, ConstantSampleIsDegenerate) {
  const std::vector<double> ys{5.0, 5.0, 5.0};
  try {
    fit_normal_map(ys);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::degenerate);
    EXPECT_NE(std::string(e.what()).find("degenerate Y"), std::string::npos);
  }
  EXPECT_THROW(fit_normal_map(std::vector<double>{1.0}), Error);
}

TEST(FitNormalMap, StrictlyIncreasingOnProbeGrid) {
  const std::vector<double> ys{3.0, 7.5, -2.0, 4.4, 0.1};
  const DistMap f = fit_normal_map(ys);
  double previous = -1.0;
  for (int i = -100; i <= 100; ++i) {
    const double v = f(i / 5.0);
    ASSERT_GT(v, previous);
    previous = v;
  }
}

TEST(EmpiricalMap, CountsValuesAtOrBelow) {
  const DistMap f = empirical_map(std::vector<double>{3.0, 1.0, 2.0});
  EXPECT_DOUBLE_EQ(f(2.0), 2.0 / 3.0);
  EXPECT_EQ(f(0.5), 0.0);
  EXPECT_EQ(f(3.0), 1.0);
  EXPECT_EQ(f(10.0), 1.0);
}

TEST(EmpiricalMap, DuplicatesTakeTheMaximumCount) {
  const DistMap f = empirical_map(std::vector<double>{2.0, 2.0, 1.0});
  EXPECT_EQ(f(2.0), 1.0);
  EXPECT_DOUBLE_EQ(f(1.0), 1.0 / 3.0);
}

TEST(EmpiricalMap, NondecreasingOnSortedProbes) {
  std::mt19937_64 rng(3);
  const auto ys = oracle::normal_values(rng, 200);
  const DistMap f = empirical_map(ys);
  double previous = 0.0;
  for (int i = -400; i <= 400; ++i) {
    const double v = f(i / 100.0);
    ASSERT_GE(v, previous);
    ASSERT_LE(v, 1.0);
    previous = v;
  }
}

TEST(UniformMap, ClampsAndScales) {
  const DistMap f = DistMap::uniform(0.0, 1.0);
  EXPECT_EQ(f(0.25), 0.25);
  EXPECT_EQ(f(-3.0), 0.0);
  EXPECT_EQ(f(3.0), 1.0);
  EXPECT_EQ(DistMap::uniform(2.0, 4.0)(3.0), 0.5);
  EXPECT_THROW(DistMap::uniform(1.0, 1.0), Error);
}

TEST(DistMapSpec, ParsesGrammarAndResolves) {
  const std::vector<double> ys{1.0, 2.0, 4.0};
  EXPECT_EQ(parse_distmap_spec("std-normal").resolve(ys).kind(), DistMapKind::std_normal);
  EXPECT_EQ(parse_distmap_spec("empirical").resolve(ys)(2.0), 2.0 / 3.0);
  const auto u = parse_distmap_spec("uniform:0,8").resolve(ys);
  EXPECT_EQ(u(2.0), 0.25);
  const auto fitted = parse_distmap_spec("fit-normal").resolve(ys);
  EXPECT_DOUBLE_EQ(fitted.mu(), 7.0 / 3.0);
  for (const char* bad : {"normal", "uniform:1", "uniform:2,1", "uniform:a,b", ""}) {
    EXPECT_THROW(parse_distmap_spec(bad), Error) << bad;
  }
}

TEST(DistMapSpec, FitNormalOverrides) {
  DistMapSpec spec = parse_distmap_spec("fit-normal");
  spec.mu_override = 10.0;
  const std::vector<double> ys{1.0, 3.0};
  const DistMap f = spec.resolve(ys);
  EXPECT_EQ(f.mu(), 10.0);
  EXPECT_DOUBLE_EQ(f.sigma(), std::sqrt(2.0));
  spec.sigma_override = 0.5;
  EXPECT_EQ(spec.resolve(ys).sigma(), 0.5);
  // Both overridden: no fit needed, so even constant data resolves.
  EXPECT_NO_THROW(spec.resolve(std::vector<double>{2.0, 2.0}));
}

TEST(DistMap, Deterministic) {
  const std::vector<double> ys{0.3, -1.2, 2.2, 0.0};
  const DistMap a = fit_normal_map(ys);
  const DistMap b = fit_normal_map(ys);
  for (double t : {-2.0, 0.0, 0.7}) EXPECT_EQ(a(t), b(t));
}

}  // namespace
}  // namespace xicor
