// Copyright 2026 The wpcr Authors
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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "wpcr/priors.hpp"

namespace wpcr {
namespace {

const MetricSpace kLine = MetricSpace::hypercube(1);

EmpiricalMeasure uniform_sample(std::size_t n, std::uint64_t seed) {
  SeededRng rng(seed);
  return sample_iid(Law(UniformLaw{}), kLine, n, rng);
}

ExtendedGammaPrior affine_egp(double a) {
  // beta(z) = 1 + 0.5 z on [0,1]: L = 0.5, beta0 = 1, beta1 = 1.5.
  return make_egp(a, Law(UniformLaw{}), BetaFunction::affine(1.0, 0.5, 1.0, 1.5),
                  0.5, 1.0, 1.5, kLine, 64);
}

TEST(DpPredictive, Weights) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  const auto none = dp_predictive(dp, EmpiricalMeasure());
  ASSERT_EQ(none.parts.size(), 1u);
  EXPECT_EQ(none.coefficients[0], 1.0);

  const auto one = dp_predictive(dp, EmpiricalMeasure({Point{0.3}}));
  EXPECT_DOUBLE_EQ(one.coefficients[0], 0.5);
  EXPECT_DOUBLE_EQ(one.coefficients[1], 0.5);

  const DirichletProcessPrior dp2{2.0, Law(DiscreteMeasure::dirac(Point{0.9}))};
  const auto pred = dp_predictive(dp2, uniform_sample(8, 1));
  EXPECT_DOUBLE_EQ(pred.coefficients[0], 0.2);
  EXPECT_DOUBLE_EQ(pred.coefficients[1], 0.8);
  ASSERT_TRUE(pred.all_discrete());
  const auto d = pred.as_discrete();
  EXPECT_NEAR(d.mass_where([](const Point& x) { return x[0] == 0.9; }), 0.2,
              1e-15);
}

TEST(DpPosteriorSample, TruncationContract) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  const auto sample = uniform_sample(5, 2);
  SeededRng rng(3);
  const auto one = dp_posterior_sample(dp, sample, 1, kLine, rng);
  EXPECT_EQ(one.measure.size(), 1u);
  EXPECT_DOUBLE_EQ(one.measure.weights()[0], 1.0);
  const auto many = dp_posterior_sample(dp, sample, 100, kLine, rng);
  double s = 0;
  for (double w : many.measure.weights()) s += w;
  EXPECT_NEAR(s, 1.0, 1e-14);
  EXPECT_NEAR(many.tail_bound, std::pow(6.0 / 7.0, 100), 1e-18);
  EXPECT_THROW(dp_posterior_sample(dp, sample, 0, kLine, rng),
               InvalidParameter);
}

// Conjugacy: E P(A) = (q H(A) + n e_n(A)) / (q + n) and
// Var P(A) = m (1 - m) / (q + n + 1).
TEST(DpPosteriorSample, MeanAndVarianceOnACell) {
  const DirichletProcessPrior dp{1.5, Law(UniformLaw{})};
  const auto sample = uniform_sample(6, 9);
  const double n = 6.0;
  const double na = static_cast<double>(std::count_if(
      sample.sample().begin(), sample.sample().end(),
      [](const Point& x) { return x[0] < 0.4; }));
  const double m = (dp.q * 0.4 + na) / (dp.q + n);
  const double var = m * (1 - m) / (dp.q + n + 1);
  const int draws = 10000;
  for (int method = 0; method < 2; ++method) {
    SeededRng rng(100 + method);
    double s = 0.0, s2 = 0.0;
    for (int k = 0; k < draws; ++k) {
      const auto d = method == 0
                         ? dp_posterior_sample(dp, sample, 300, kLine, rng)
                         : dp_posterior_sample_split(dp, sample, 300, kLine,
                                                     rng);
      const double pa =
          d.measure.mass_where([](const Point& x) { return x[0] < 0.4; });
      s += pa;
      s2 += pa * pa;
    }
    const double mean = s / draws;
    const double v = s2 / draws - mean * mean;
    EXPECT_NEAR(mean, m, 4.0 * std::sqrt(var / draws)) << method;
    // The sample variance of a [0,1] variable has sd <= 1/(2 sqrt(draws)).
    EXPECT_NEAR(v, var, 4.0 * 0.5 / std::sqrt(draws)) << method;
  }
}

TEST(LatentDensity, ConstantBetaNormalization) {
  for (double a : {1.0, 2.5, 0.7}) {
    for (std::size_t n : {1u, 4u, 30u, 200u}) {
      for (double c : {1.0, 2.0, 0.5}) {
        const auto egp = make_egp(a, Law(UniformLaw{}), BetaFunction::constant(c),
                                  0.0, c, c, kLine, 8);
        const auto f = egp_latent_density(egp, uniform_sample(n, n));
        const double z = std::beta(a, static_cast<double>(n)) / std::pow(c, a);
        EXPECT_NEAR(f.z() / z, 1.0, 1e-8) << a << " " << n << " " << c;
      }
    }
  }
}

TEST(LatentDensity, ClosedFormAndSampleIndependence) {
  const auto egp = make_egp(1.0, Law(UniformLaw{}), BetaFunction::constant(1.0),
                            0.0, 1.0, 1.0, kLine, 8);
  const auto f = egp_latent_density(egp, uniform_sample(1, 4));
  const auto g = egp_latent_density(egp, uniform_sample(1, 5));
  for (double u : {0.0, 0.3, 1.0, 7.0, 1e3}) {
    EXPECT_NEAR(f.density(u), 1.0 / ((1 + u) * (1 + u)), 1e-9);
    EXPECT_DOUBLE_EQ(f.density(u), g.density(u));
  }
}

TEST(LatentDensity, IntegratesToOne) {
  SeededRng rng(12);
  for (int rep = 0; rep < 10; ++rep) {
    const auto egp = affine_egp(rng.uniform(0.5, 3.0));
    const auto f = egp_latent_density(egp, uniform_sample(1 + rng.index(60), rep));
    QuadratureOptions opt;
    opt.rel_tol = 1e-10;
    opt.max_panels = 20000;
    EXPECT_NEAR(LatentDensityProfile::integrate_over_u(
                    [&](double u) { return f.density(u); }, opt),
                1.0, 1e-6);
    EXPECT_NEAR(f.expect([](double) { return 1.0; }), 1.0, 1e-10);
  }
}

TEST(EgpPredictive, ConstantBetaIsDirichletPredictive) {
  const double a = 2.0;
  const auto alpha = DiscreteMeasure::uniform(
      {Point{0.1}, Point{0.35}, Point{0.8}});
  ExtendedGammaPrior egp;
  egp.a = a;
  egp.alpha_shape = alpha;
  egp.beta = BetaFunction::constant(1.7);
  egp.beta0 = egp.beta1 = 1.7;
  const auto sample = uniform_sample(12, 8);
  const auto pred = egp_predictive(egp, sample);
  const auto dp = dp_predictive(DirichletProcessPrior{a, Law(alpha)}, sample)
                      .as_discrete();
  EXPECT_NEAR(wasserstein_1d(pred.measure, dp, 1.0), 0.0, 1e-6);
  ASSERT_EQ(pred.measure.size(), dp.size());
  for (std::size_t i = 0; i < dp.size(); ++i) {
    EXPECT_NEAR(pred.measure.weights()[i], dp.weights()[i], 1e-9);
  }
}

TEST(EgpPredictive, AtomWeightsMatchCrmForm) {
  const auto egp = affine_egp(1.3);
  std::vector<Point> xs = {Point{0.2}, Point{0.2}, Point{0.9}, Point{0.5},
                           Point{0.2}};
  const EmpiricalMeasure sample(xs);
  const auto pred = egp_predictive(egp, sample);
  const auto f = egp_latent_density(egp, sample);
  QuadratureOptions opt;
  opt.rel_tol = 1e-11;
  opt.max_panels = 20000;
  const double n = 5.0;
  for (auto [x, nj] : {std::pair{0.2, 3.0}, std::pair{0.9, 1.0}}) {
    const double b = egp.beta(Point{x});
    // w_j = n_j int u / (u + beta(X_j)) f(u) du, weight = w_j / n.
    const double wj = nj * LatentDensityProfile::integrate_over_u(
                               [&](double u) { return u / (u + b) * f.density(u); },
                               opt);
    const double consolidated = nj * f.zeta(b);
    EXPECT_NEAR(consolidated, wj / n, 1e-9);
    const double in_measure = pred.measure.mass_where(
        [&](const Point& p) { return p[0] == x; });
    // x = 0.2 may coincide with no alpha grid atom, so the mass is the atom's.
    EXPECT_NEAR(in_measure, wj / n, 1e-8);
  }
}

TEST(EgpPredictive, TotalMassIsOne) {
  SeededRng rng(77);
  for (int rep = 0; rep < 12; ++rep) {
    const double c1 = rng.uniform(-1.0, 1.0);
    const double b0 = 0.5 + rng.uniform();
    const auto egp = make_egp(
        rng.uniform(0.5, 3.0), Law(UniformLaw{}),
        BetaFunction::sinusoidal(b0 + std::abs(c1), c1, 1.0, b0,
                                 b0 + 2 * std::abs(c1)),
        2 * M_PI * std::abs(c1), b0, b0 + 2 * std::abs(c1), kLine, 50);
    validate(egp, kLine);
    const auto pred = egp_predictive(egp, uniform_sample(3 + rng.index(40), rep));
    EXPECT_NEAR(pred.raw_mass, 1.0, 1e-6);
  }
}

TEST(EgpL1, TrivialCasesAndBound) {
  const auto flat = make_egp(1.0, Law(UniformLaw{}), BetaFunction::constant(2.0),
                             0.0, 2.0, 2.0, kLine, 16);
  const auto x = uniform_sample(20, 1), y = uniform_sample(20, 2);
  const auto c = egp_l1_distance(flat, x, y, kLine);
  EXPECT_NEAR(c.l1, 0.0, 1e-12);
  EXPECT_EQ(c.bound, 0.0);

  const auto egp = affine_egp(1.0);
  EXPECT_NEAR(egp_l1_distance(egp, x, x, kLine).l1, 0.0, 1e-12);
  for (int rep = 0; rep < 10; ++rep) {
    const auto r = egp_l1_distance(egp, uniform_sample(20, 10 + rep),
                                   uniform_sample(20, 50 + rep), kLine);
    EXPECT_GT(r.l1, 0.0);
    EXPECT_LE(r.l1, r.bound + 1e-6);
  }
  EXPECT_THROW(egp_l1_distance(egp, x, uniform_sample(3, 1), kLine),
               InvalidInput);
}

TEST(EgpLipschitz, Formula) {
  ExtendedGammaPrior p;
  p.a = 1.0;
  p.L = 1.0;
  p.beta0 = 1.0;
  p.beta1 = 2.0;
  EXPECT_DOUBLE_EQ(egp_lipschitz_constant(p, 1, 1.0), 10.0);
  p.L = 0.0;
  EXPECT_DOUBLE_EQ(egp_lipschitz_constant(p, 7, 1.0), 1.0);
  p.L = 0.3;
  EXPECT_GT(egp_lipschitz_constant(p, 5, 1.0), egp_lipschitz_constant(p, 50, 1.0));
}

TEST(EgpValidation, RejectsBadSpecs) {
  auto egp = affine_egp(1.0);
  EXPECT_NO_THROW(validate(egp, kLine));
  egp.L = 0.1;  // true constant is 0.5
  EXPECT_THROW(validate(egp, kLine), InvalidParameter);
  egp = affine_egp(1.0);
  egp.beta1 = 1.2;
  EXPECT_THROW(validate(egp, kLine), InvalidParameter);
  egp = affine_egp(1.0);
  egp.a = 0.0;
  EXPECT_THROW(validate(egp, kLine), InvalidParameter);
  EXPECT_THROW(validate(DirichletProcessPrior{0.0, Law(UniformLaw{})}, kLine),
               InvalidParameter);
}

}  // namespace
}  // namespace wpcr
