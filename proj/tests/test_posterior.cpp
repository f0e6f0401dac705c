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
#include <numeric>
#include <vector>

#include <gtest/gtest.h>

#include "wpcr/posterior.hpp"

namespace wpcr {
namespace {

const MetricSpace kLine = MetricSpace::hypercube(1);

TEST(FiniteDimPosterior, DirichletConjugacy) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  const auto cov = DeltaCovering::grid(kLine, 2);
  SeededRng rng(1);
  const std::vector<std::size_t> counts = {3, 1};
  const auto fdp = finite_dim_posterior(PriorSpec(dp), cov,
                                        std::span<const std::size_t>(counts), rng);
  ASSERT_EQ(fdp.kind, FiniteDimPosterior::Kind::kDirichlet);
  EXPECT_DOUBLE_EQ(fdp.concentration[0], 3.5);
  EXPECT_DOUBLE_EQ(fdp.concentration[1], 1.5);
  EXPECT_EQ(fdp.n, 4u);
}

TEST(FiniteDimPosterior, ZeroCountsGivePrior) {
  const DirichletProcessPrior dp{2.0, Law(UniformLaw{})};
  const auto cov = DeltaCovering::grid(kLine, 4);
  SeededRng rng(2);
  const std::vector<std::size_t> counts(4, 0);
  const auto fdp = finite_dim_posterior(PriorSpec(dp), cov,
                                        std::span<const std::size_t>(counts), rng);
  for (std::size_t j = 0; j < 4; ++j) {
    EXPECT_DOUBLE_EQ(fdp.concentration[j], fdp.prior_concentration[j]);
    EXPECT_DOUBLE_EQ(fdp.concentration[j], 0.5);
  }
}

TEST(FiniteDimPosterior, FromDiscretizedSample) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  const auto cov = DeltaCovering::grid(kLine, 2);
  SeededRng rng(3);
  const std::vector<Point> eta = {Point{0.25}, Point{0.25}, Point{0.75}};
  const auto fdp = finite_dim_posterior(PriorSpec(dp), cov,
                                        std::span<const Point>(eta), rng);
  EXPECT_EQ(fdp.counts, (std::vector<std::size_t>{2, 1}));
}

TEST(FiniteDimPosterior, SampledPointsOnSimplex) {
  const DirichletProcessPrior dp{0.7, Law(TruncatedGaussianLaw{{0.3}, {0.2}})};
  const auto cov = DeltaCovering::grid(kLine, 8);
  SeededRng rng(4);
  const auto xi = sample_iid(Law(UniformLaw{}), kLine, 40, rng);
  const auto counts = cell_counts(cov, xi.sample());
  FiniteDimOptions opt;
  for (bool importance : {false, true}) {
    opt.force_importance = importance;
    const auto fdp = finite_dim_posterior(
        PriorSpec(dp), cov, std::span<const std::size_t>(counts), rng, opt);
    for (int k = 0; k < 50; ++k) {
      const auto p = fdp.sample(rng);
      double s = 0.0;
      for (double x : p) {
        EXPECT_GE(x, 0.0);
        s += x;
      }
      EXPECT_NEAR(s, 1.0, 1e-12);
    }
  }
}

TEST(FiniteDimPosterior, ImportancePathMatchesDirichlet) {
  const DirichletProcessPrior dp{4.0, Law(UniformLaw{})};
  const auto cov = DeltaCovering::grid(kLine, 3);
  SeededRng rng(5);
  const std::vector<std::size_t> counts = {2, 3, 1};
  FiniteDimOptions opt;
  opt.force_importance = true;
  opt.prior_draws = 20000;
  const auto is = finite_dim_posterior(PriorSpec(dp), cov,
                                       std::span<const std::size_t>(counts), rng, opt);
  ASSERT_GE(is.ess, 200.0);
  const auto exact = finite_dim_posterior(
      PriorSpec(dp), cov, std::span<const std::size_t>(counts), rng);
  const auto mi = posterior_moments(is);
  const auto me = posterior_moments(exact);
  for (std::size_t j = 0; j < 3; ++j) {
    const double se = std::sqrt(me.v[j] / is.ess);
    EXPECT_NEAR(mi.m[j], me.m[j], 3.0 * se);
    EXPECT_NEAR(mi.v[j], me.v[j], 0.15 * me.v[j]);
  }
}

TEST(FiniteDimPosterior, ConstantBetaEgpMatchesDirichletMean) {
  // Normalized gamma weights with constant beta are Dirichlet(a alpha(A_j)),
  // so the posterior mean is (a alpha(A_j) + nu_j) / (a + n).
  const double a = 2.0;
  const auto egp = make_egp(a, Law(UniformLaw{}), BetaFunction::constant(3.0),
                            0.0, 3.0, 3.0, kLine, 64);
  const auto cov = DeltaCovering::grid(kLine, 4);
  SeededRng rng(6);
  const std::vector<std::size_t> counts = {1, 0, 2, 1};
  FiniteDimOptions opt;
  opt.prior_draws = 20000;
  const auto fdp = finite_dim_posterior(
      PriorSpec(egp), cov, std::span<const std::size_t>(counts), rng, opt);
  ASSERT_EQ(fdp.kind, FiniteDimPosterior::Kind::kWeightedDraws);
  const auto pm = posterior_moments(fdp);
  for (std::size_t j = 0; j < 4; ++j) {
    const double m = (a * 0.25 + static_cast<double>(counts[j])) / (a + 4.0);
    const double v = m * (1.0 - m) / (a + 4.0 + 1.0);
    EXPECT_NEAR(pm.m[j], m, 4.0 * std::sqrt(v / fdp.ess));
  }
}

TEST(FiniteDimPosterior, StrictModeRejectsLowEss) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  const auto cov = DeltaCovering::grid(kLine, 4);
  SeededRng rng(7);
  const std::vector<std::size_t> counts = {30, 0, 0, 30};
  FiniteDimOptions opt;
  opt.force_importance = true;
  opt.prior_draws = 40;
  const auto lenient = finite_dim_posterior(
      PriorSpec(dp), cov, std::span<const std::size_t>(counts), rng, opt);
  EXPECT_TRUE(lenient.degenerate);
  opt.strict = true;
  try {
    finite_dim_posterior(PriorSpec(dp), cov,
                         std::span<const std::size_t>(counts), rng, opt);
    FAIL() << "expected DegenerateWeights";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kDegenerateWeights);
  }
}

TEST(PosteriorMoments, DpClosedForms) {
  // q = 1, H(A_j) = 0.5, n = 2, phi_j = 0.5: m = (0.5 + 1) / 3.
  const std::vector<double> qh = {0.5, 0.5};
  const std::vector<std::size_t> counts = {1, 1};
  const auto pm = dirichlet_moments(qh, counts);
  EXPECT_DOUBLE_EQ(pm.m[0], 0.5);
  EXPECT_DOUBLE_EQ(pm.v[0], 1.5 * 1.5 / (9.0 * 4.0));
  EXPECT_DOUBLE_EQ(pm.phi[0] + pm.phi[1], 1.0);
}

TEST(PosteriorMoments, DpVarianceAtMostOneOverN) {
  SeededRng rng(8);
  for (double q : {0.1, 1.0, 10.0}) {
    for (std::size_t n : {1u, 7u, 100u}) {
      const auto cov = DeltaCovering::grid(kLine, 5);
      const auto xi = sample_iid(Law(UniformLaw{}), kLine, n, rng);
      const auto counts = cell_counts(cov, xi.sample());
      std::vector<double> qh(5, q / 5.0);
      const auto pm = dirichlet_moments(qh, counts);
      for (std::size_t j = 0; j < 5; ++j) {
        EXPECT_GE(pm.m[j], 0.0);
        EXPECT_LE(pm.m[j], 1.0);
        EXPECT_LE(pm.v[j], 1.0 / static_cast<double>(n));
        EXPECT_LE(pm.v[j], 0.25);
      }
    }
  }
}

TEST(PosteriorMoments, MarginalQuadratureMatchesBetaConjugacy) {
  // Posterior of Beta(a, b) under t^x (1-t)^y is Beta(a + x, b + y).
  for (double a : {0.05, 0.5, 1.0, 3.0}) {
    for (double b : {0.3, 2.0}) {
      for (std::size_t n : {0u, 3u, 50u, 500u}) {
        for (double phi : {0.0, 0.2, 1.0}) {
          const auto mm = marginal_posterior_moments(BetaMarginal{a, b}, n, phi);
          const double A = a + static_cast<double>(n) * phi;
          const double B = b + static_cast<double>(n) * (1.0 - phi);
          const double m = A / (A + B);
          const double v = A * B / ((A + B) * (A + B) * (A + B + 1.0));
          EXPECT_NEAR(mm.m, m, 1e-9 * m + 1e-13) << a << " " << b << " " << n;
          EXPECT_NEAR(mm.v, v, 1e-7 * v + 1e-14) << a << " " << b << " " << n;
        }
      }
    }
  }
}

TEST(PosteriorMoments, DegenerateMarginal) {
  const auto mm = marginal_posterior_moments(DiracMarginal{0.3}, 10, 0.7);
  EXPECT_EQ(mm.m, 0.3);
  EXPECT_EQ(mm.v, 0.0);
}

TEST(PosteriorMoments, MarginalPathAgreesWithDirichletPath) {
  const DirichletProcessPrior dp{1.5, Law(TruncatedGaussianLaw{{0.5}, {0.3}})};
  const auto cov = DeltaCovering::grid(kLine, 6);
  SeededRng rng(9);
  const auto xi = sample_iid(Law(UniformLaw{}), kLine, 30, rng);
  const auto counts = cell_counts(cov, xi.sample());
  const auto fdp = finite_dim_posterior(
      PriorSpec(dp), cov, std::span<const std::size_t>(counts), rng);
  const auto a = posterior_moments(fdp);
  const auto b = posterior_moments_marginal(fdp);
  for (std::size_t j = 0; j < 6; ++j) {
    EXPECT_NEAR(a.m[j], b.m[j], 1e-10);
    EXPECT_NEAR(a.v[j], b.v[j], 1e-10);
  }
  EXPECT_NEAR(a.mean_abs_dev_sum, b.mean_abs_dev_sum, 1e-9);
}

TEST(MvBounds, CeilingsHold) {
  SeededRng rng(10);
  const auto r = mv_bounds_dp(1.0, 2, 100, 200, rng);
  EXPECT_TRUE(r.pass());
  EXPECT_DOUBLE_EQ(r.ceiling_m, 0.02);
  EXPECT_DOUBLE_EQ(r.ceiling_v, 0.2);
  EXPECT_LE(r.mean_abs_dev_sum.mean * 100.0 / 2.0, 1.0);
}

TEST(MvBounds, ZeroMassPriorHasNoBias) {
  SeededRng rng(11);
  const auto r = mv_bounds_dp(0.0, 4, 50, 100, rng);
  EXPECT_EQ(r.mean_abs_dev_sum.mean, 0.0);
  EXPECT_TRUE(r.pass());
}

TEST(MvBounds, RejectsSmallPlans) {
  SeededRng rng(12);
  EXPECT_THROW(mv_bounds_dp(1.0, 2, 10, 50, rng), InvalidSamplePlan);
}

TEST(GcRate, SingleDrawOracle) {
  // E W_1(delta_xi, U[0,1]) = E[(xi^2 + (1 - xi)^2) / 2] = 1/3.
  SeededRng rng(13);
  const std::size_t grid[] = {1};
  const auto r = gc_rate(Law(UniformLaw{}), 1.0, grid, 20000, kLine, rng);
  EXPECT_NEAR(r.rows[0].estimate.mean, 1.0 / 3.0, 3.0 * r.rows[0].estimate.se);
}

TEST(GcRate, PointMassTruth) {
  SeededRng rng(14);
  const std::size_t grid[] = {4, 16};
  const auto r = gc_rate(Law(DiscreteMeasure::dirac(Point{0.4})), 2.0, grid,
                         10, kLine, rng);
  for (const auto& row : r.rows) EXPECT_EQ(row.estimate.mean, 0.0);
}

TEST(GcRate, RootNSlope) {
  SeededRng rng(15);
  const std::size_t grid[] = {64, 128, 256, 512, 1024, 2048, 4096, 8192};
  const auto r = gc_rate(Law(UniformLaw{}), 1.0, grid, 200, kLine, rng);
  EXPECT_NEAR(r.slope, -0.5, 0.07);
}

TEST(GcRate, MultiDimensionalUsesGrid) {
  SeededRng rng(16);
  const auto square = MetricSpace::hypercube(2);
  const std::size_t grid[] = {8, 32};
  MonteCarloOptions opt;
  opt.resolution = 16;
  const auto r = gc_rate(Law(UniformLaw{}), 1.0, grid, 20, square, rng, opt);
  EXPECT_GT(r.rows[0].estimate.mean, r.rows[1].estimate.mean);
}

TEST(GcRate, RejectsBadGrid) {
  SeededRng rng(17);
  const std::size_t grid[] = {8, 8};
  EXPECT_THROW(gc_rate(Law(UniformLaw{}), 1.0, grid, 5, kLine, rng),
               InvalidSamplePlan);
}

TEST(Contraction, DecreasesAndHasNegativeSlope) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(18);
  const std::size_t grid[] = {16, 64, 256, 1024};
  const auto r = estimate_contraction(dp, Law(UniformLaw{}), grid, 60, 20, 1.0,
                                      kLine, rng);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    EXPECT_LE(r.rows[i].estimate.mean,
              r.rows[i - 1].estimate.mean + 2.0 * r.rows[i].estimate.se);
  }
  EXPECT_LE(r.slope, -0.2);
  EXPECT_LT(r.tail_bound, 1e-15);
}

TEST(Contraction, SmallMassTracksGlivenkoCantelli) {
  // With q -> 0 and H = p0 the posterior is a reweighting of e_n; its
  // distance to p0 stays within a constant factor of W(e_n, p0).
  const DirichletProcessPrior dp{1e-3, Law(UniformLaw{})};
  SeededRng rng(19);
  const std::size_t grid[] = {64, 256};
  const auto c = estimate_contraction(dp, Law(UniformLaw{}), grid, 100, 20, 1.0,
                                      kLine, rng);
  const auto g = gc_rate(Law(UniformLaw{}), 1.0, grid, 100, kLine, rng);
  for (std::size_t i = 0; i < 2; ++i) {
    const double ratio = c.rows[i].estimate.mean / g.rows[i].estimate.mean;
    EXPECT_GT(ratio, 0.9);
    EXPECT_LT(ratio, 1.6);
  }
}

TEST(Markov, MassBelowCeiling) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(20);
  const std::size_t grid[] = {256};
  const auto c = estimate_contraction(dp, Law(UniformLaw{}), grid, 50, 40, 1.0,
                                      kLine, rng);
  const double ms[] = {1.0, 2.0, 5.0, 10.0};
  const auto rows = markov_pcr_check(c, ms);
  ASSERT_EQ(rows.size(), 4u);
  for (const auto& r : rows) EXPECT_TRUE(r.pass) << r.blowup;
  EXPECT_EQ(rows[0].ceiling, 1.0);
}

TEST(Markov, DegenerateDistancesGiveZeroMass) {
  ContractionReport c;
  c.replications = 2;
  c.draws = 3;
  c.rows = {{10, {0.0, 0.0}}};
  c.distances = {std::vector<double>(6, 0.0)};
  const double ms[] = {2.0, 5.0, 10.0};
  for (const auto& r : markov_pcr_check(c, ms)) {
    EXPECT_EQ(r.mass.mean, 0.0);
    EXPECT_TRUE(r.pass);
  }
}

TEST(Decomposition, TermsBelowCeilings) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(21);
  const auto r = decompose_five_terms(dp, Law(UniformLaw{}), 64, 0.1, 1.0, 60,
                                      20, kLine, rng);
  EXPECT_EQ(r.cells, 5u);
  EXPECT_EQ(r.estimator, "upper-bound estimator");
  for (const auto& t : r.terms) {
    EXPECT_TRUE(t.pass) << t.name << " " << t.value.mean << " " << t.ceiling;
    EXPECT_GE(t.value.mean, 0.0);
  }
  EXPECT_TRUE(r.t4_deterministic);
  EXPECT_LE(r.t4_max, 0.2);
  EXPECT_TRUE(r.eps_pass);
  EXPECT_DOUBLE_EQ(r.l_n, 64.0 / 65.0);
  EXPECT_GE(r.theorem_bound, r.eps.mean);
}

TEST(Decomposition, SingleCell) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(22);
  const auto r = decompose_five_terms(dp, Law(UniformLaw{}), 16, 1.0, 1.0, 20,
                                      5, kLine, rng);
  EXPECT_EQ(r.cells, 1u);
  // One cell: Sigma* and the discretized empirical measure coincide.
  EXPECT_NEAR(r.terms[2].value.mean, 0.0, 1e-12);
  EXPECT_TRUE(r.pass());
}

TEST(Decomposition, IndependentOfThreadCount) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(23);
  MonteCarloOptions one, three;
  three.threads = 3;
  const auto a = decompose_five_terms(dp, Law(UniformLaw{}), 32, 0.1, 1.0, 12,
                                      4, kLine, rng, one);
  const auto b = decompose_five_terms(dp, Law(UniformLaw{}), 32, 0.1, 1.0, 12,
                                      4, kLine, rng, three);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_EQ(a.terms[k].value.mean, b.terms[k].value.mean);
    EXPECT_EQ(a.terms[k].value.se, b.terms[k].value.se);
  }
  EXPECT_EQ(a.eps.mean, b.eps.mean);
}

TEST(Decomposition, SquareUsesTransportSolver) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(24);
  const auto square = MetricSpace::hypercube(2);
  MonteCarloOptions opt;
  opt.resolution = 8;
  const auto r = decompose_five_terms(dp, Law(UniformLaw{}), 16, 0.36, 1.0, 10,
                                      3, square, rng, opt);
  EXPECT_EQ(r.cells, 4u);
  EXPECT_TRUE(r.t4_deterministic);
  EXPECT_TRUE(r.terms[1].pass);
}

TEST(Lipschitz, DirichletProcessConstant) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(25);
  for (std::size_t n : {5u, 20u}) {
    const auto r = estimate_predictive_lipschitz(PriorSpec(dp), n, 30,
                                                 Law(UniformLaw{}), kLine, rng);
    EXPECT_TRUE(r.pass);
    EXPECT_DOUBLE_EQ(r.constant, static_cast<double>(n) / (1.0 + n));
    EXPECT_EQ(r.pairs_used, 30u);
  }
}

TEST(Lipschitz, DegeneratePairsExcluded) {
  const DirichletProcessPrior dp{1.0, Law(UniformLaw{})};
  SeededRng rng(26);
  EXPECT_THROW(estimate_predictive_lipschitz(
                   PriorSpec(dp), 3, 5,
                   Law(DiscreteMeasure::dirac(Point{0.5})), kLine, rng),
               InvalidSamplePlan);
}

TEST(Lipschitz, ExtendedGammaBelowConstant) {
  const auto egp = make_egp(1.0, Law(UniformLaw{}),
                            BetaFunction::affine(1.0, 0.5, 1.0, 1.5), 0.5, 1.0,
                            1.5, kLine, 64);
  SeededRng rng(27);
  const auto r = estimate_predictive_lipschitz(PriorSpec(egp), 5, 10,
                                               Law(UniformLaw{}), kLine, rng);
  EXPECT_TRUE(r.pass);
  EXPECT_GT(r.max_ratio, 0.0);
}

TEST(Parallel, LowestIndexExceptionWins) {
  try {
    parallel_for(20, 4, [](std::size_t i) {
      if (i == 7 || i == 13) throw InvalidInput("index " + std::to_string(i));
    });
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("index 7"), std::string::npos);
  }
}

}  // namespace
}  // namespace wpcr
