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

// Discretized posteriors on the simplex of cell masses, their moments, and
// Monte Carlo estimators of the contraction rate and of the five summands
// that bound it.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <variant>
#include <vector>

#include "wpcr/bounds.hpp"
#include "wpcr/error.hpp"
#include "wpcr/measures.hpp"
#include "wpcr/metric.hpp"
#include "wpcr/parallel.hpp"
#include "wpcr/priors.hpp"
#include "wpcr/quadrature.hpp"
#include "wpcr/rng.hpp"
#include "wpcr/transport.hpp"

namespace wpcr {

struct MonteCarloOptions {
  std::size_t threads = 1;
  std::size_t truncation = 1000;  // stick-breaking cap K
  std::size_t resolution = 64;    // grid for multi-D targets
};

// Finite-dimensional posterior ----------------------------------------------

struct FiniteDimOptions {
  std::size_t prior_draws = 4000;
  double ess_threshold = 50.0;
  bool strict = false;
  bool force_importance = false;  // use reweighting even for the DP
};

struct FiniteDimPosterior {
  enum class Kind { kDirichlet, kWeightedDraws };
  Kind kind = Kind::kDirichlet;
  std::vector<std::size_t> counts;
  std::size_t n = 0;
  std::vector<double> prior_concentration;  // q H(A_j), Dirichlet kind
  std::vector<double> concentration;        // q H(A_j) + nu_j
  std::vector<std::vector<double>> draws;   // prior simplex points
  std::vector<double> weights;              // self-normalized
  double ess = 0.0;
  bool degenerate = false;

  std::size_t cells() const noexcept { return counts.size(); }

  /// One point of the simplex from the posterior.
  std::vector<double> sample(SeededRng& rng) const {
    if (kind == Kind::kDirichlet) return rng.dirichlet(concentration);
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
      acc += weights[k];
      if (u < acc) return draws[k];
    }
    return draws.back();
  }
};

namespace detail {

/// Cell masses of an EGP draw: Gamma(a w_k) / beta(z_k) summed per cell,
/// normalized in the log domain.
inline std::vector<double> egp_prior_cell_draw(const ExtendedGammaPrior& prior,
                                               const DeltaCovering& cov,
                                               SeededRng& rng) {
  const auto& atoms = prior.alpha_shape.support();
  const auto& w = prior.alpha_shape.weights();
  std::vector<double> logs(atoms.size());
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    logs[k] = rng.log_gamma_variate(prior.a * w[k]) -
              std::log(prior.beta(atoms[k]));
    top = std::max(top, logs[k]);
  }
  std::vector<double> cell(cov.size(), 0.0);
  double total = 0.0;
  for (std::size_t k = 0; k < atoms.size(); ++k) {
    const double e = std::exp(logs[k] - top);
    cell[cov.cell_of(atoms[k])] += e;
    total += e;
  }
  for (double& c : cell) c /= total;
  return cell;
}

inline std::vector<double> dp_prior_cell_draw(const std::vector<double>& qh,
                                              SeededRng& rng) {
  return rng.dirichlet(qh);
}

}  // namespace detail

/// Posterior of the cell-mass vector given the counts nu_j. The DP gives the
/// exact Dirichlet(qH(A_j) + nu_j); otherwise prior draws are reweighted by
/// prod_j p_j^{nu_j}.
inline FiniteDimPosterior finite_dim_posterior(
    const PriorSpec& prior, const DeltaCovering& cov,
    std::span<const std::size_t> counts, SeededRng& rng,
    const FiniteDimOptions& opt = {}) {
  if (counts.size() != cov.size()) {
    throw InvalidInput("counts must have one entry per cell");
  }
  FiniteDimPosterior out;
  out.counts.assign(counts.begin(), counts.end());
  out.n = std::accumulate(counts.begin(), counts.end(), std::size_t{0});

  const auto* dp = std::get_if<DirichletProcessPrior>(&prior);
  std::vector<double> qh;
  if (dp) {
    qh = cell_masses(dp->base, cov);
    for (double& h : qh) h *= dp->q;
    out.prior_concentration = qh;
  }
  if (dp && !opt.force_importance) {
    out.kind = FiniteDimPosterior::Kind::kDirichlet;
    out.concentration.resize(qh.size());
    for (std::size_t j = 0; j < qh.size(); ++j) {
      out.concentration[j] = qh[j] + static_cast<double>(counts[j]);
      if (counts[j] > 0 && qh[j] == 0.0) {
        throw InvalidInput("data in a cell of zero base mass");
      }
    }
    out.ess = std::numeric_limits<double>::infinity();
    return out;
  }

  if (opt.prior_draws == 0) throw InvalidParameter("prior_draws must be >= 1");
  out.kind = FiniteDimPosterior::Kind::kWeightedDraws;
  out.draws.reserve(opt.prior_draws);
  std::vector<double> logw(opt.prior_draws);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < opt.prior_draws; ++k) {
    SeededRng r = rng.substream(k);
    std::vector<double> p =
        dp ? detail::dp_prior_cell_draw(qh, r)
           : detail::egp_prior_cell_draw(std::get<ExtendedGammaPrior>(prior),
                                         cov, r);
    double lw = 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      if (counts[j] == 0) continue;
      lw += p[j] > 0.0 ? static_cast<double>(counts[j]) * std::log(p[j])
                       : -std::numeric_limits<double>::infinity();
    }
    logw[k] = lw;
    top = std::max(top, lw);
    out.draws.push_back(std::move(p));
  }
  if (!std::isfinite(top)) {
    throw DegenerateWeights("every prior draw has zero likelihood");
  }
  out.weights.resize(logw.size());
  double total = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    out.weights[k] = std::exp(logw[k] - top);
    total += out.weights[k];
  }
  double sq = 0.0;
  for (double& w : out.weights) {
    w /= total;
    sq += w * w;
  }
  out.ess = 1.0 / sq;
  out.degenerate = out.ess < opt.ess_threshold;
  if (out.degenerate && opt.strict) {
    throw DegenerateWeights("effective sample size " + std::to_string(out.ess) +
                            " below threshold " +
                            std::to_string(opt.ess_threshold));
  }
  return out;
}

/// Overload taking the discretized sample itself.
inline FiniteDimPosterior finite_dim_posterior(
    const PriorSpec& prior, const DeltaCovering& cov,
    std::span<const Point> discretized_sample, SeededRng& rng,
    const FiniteDimOptions& opt = {}) {
  const std::vector<std::size_t> counts = cell_counts(cov, discretized_sample);
  return finite_dim_posterior(prior, cov, std::span<const std::size_t>(counts),
                              rng, opt);
}

// Moments ---------------------------------------------------------------------

struct PosteriorMoments {
  std::vector<double> m;    // posterior mean of p(A_j)
  std::vector<double> v;    // posterior variance of p(A_j)
  std::vector<double> phi;  // empirical fraction nu_j / n
  double mean_abs_dev_sum = 0.0;  // sum_j |phi_j - m_j|
  double sqrt_var_sum = 0.0;      // sum_j sqrt(v_j)
};

namespace detail {

inline void finish_moments(PosteriorMoments& pm) {
  pm.mean_abs_dev_sum = 0.0;
  pm.sqrt_var_sum = 0.0;
  for (std::size_t j = 0; j < pm.m.size(); ++j) {
    pm.v[j] = std::max(0.0, pm.v[j]);
    pm.mean_abs_dev_sum += std::abs(pm.phi[j] - pm.m[j]);
    pm.sqrt_var_sum += std::sqrt(pm.v[j]);
  }
}

inline std::vector<double> fractions(std::span<const std::size_t> counts) {
  const double n = static_cast<double>(
      std::accumulate(counts.begin(), counts.end(), std::size_t{0}));
  std::vector<double> phi(counts.size(), 0.0);
  if (n == 0.0) return phi;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    phi[j] = static_cast<double>(counts[j]) / n;
  }
  return phi;
}

}  // namespace detail

/// Closed-form Dirichlet moments from prior concentrations qH_j and counts.
/// q = 0 is allowed: then m_j = phi_j.
inline PosteriorMoments dirichlet_moments(std::span<const double> prior_conc,
                                          std::span<const std::size_t> counts) {
  PosteriorMoments pm;
  pm.phi = detail::fractions(counts);
  double total = 0.0;
  for (std::size_t j = 0; j < counts.size(); ++j) {
    total += prior_conc[j] + static_cast<double>(counts[j]);
  }
  pm.m.resize(counts.size());
  pm.v.resize(counts.size());
  for (std::size_t j = 0; j < counts.size(); ++j) {
    const double a = prior_conc[j] + static_cast<double>(counts[j]);
    pm.m[j] = a / total;
    pm.v[j] = a * (total - a) / (total * total * (total + 1.0));
  }
  detail::finish_moments(pm);
  return pm;
}

/// Moments of the finite-dimensional posterior: closed forms for the
/// Dirichlet kind, weighted sums for reweighted draws.
inline PosteriorMoments posterior_moments(const FiniteDimPosterior& fdp) {
  if (fdp.kind == FiniteDimPosterior::Kind::kDirichlet) {
    return dirichlet_moments(fdp.prior_concentration, fdp.counts);
  }
  PosteriorMoments pm;
  pm.phi = detail::fractions(fdp.counts);
  const std::size_t nc = fdp.cells();
  pm.m.assign(nc, 0.0);
  pm.v.assign(nc, 0.0);
  std::vector<long double> s1(nc, 0.0L), s2(nc, 0.0L);
  for (std::size_t k = 0; k < fdp.draws.size(); ++k) {
    for (std::size_t j = 0; j < nc; ++j) {
      s1[j] += fdp.weights[k] * fdp.draws[k][j];
      s2[j] += fdp.weights[k] * fdp.draws[k][j] * fdp.draws[k][j];
    }
  }
  for (std::size_t j = 0; j < nc; ++j) {
    pm.m[j] = static_cast<double>(s1[j]);
    pm.v[j] = static_cast<double>(s2[j] - s1[j] * s1[j]);
  }
  detail::finish_moments(pm);
  return pm;
}

struct BetaMarginal {
  double a = 1.0;
  double b = 1.0;
};
struct DiracMarginal {
  double t0 = 0.0;
};
struct DrawsMarginal {
  std::vector<double> t;  // equally weighted prior draws of p(A_j)
};
using MarginalLaw = std::variant<BetaMarginal, DiracMarginal, DrawsMarginal>;

struct MarginalMoments {
  double m = 0.0;
  double v = 0.0;
};

namespace detail {

/// int_0^1 t^{A+r} (1-t)^{B} dt * exp(-shift) for r = 0, 1, 2 by adaptive
/// quadrature. Power substitutions near each endpoint remove the
/// singularities when A or B is in (-1, 0].
inline std::array<double, 3> beta_power_integrals(double A, double B,
                                                  double shift) {
  QuadratureOptions opt;
  opt.rel_tol = 1e-12;
  opt.max_panels = 20000;
  std::array<double, 3> out{};
  for (int r = 0; r < 3; ++r) {
    const double ar = A + r;
    // t = u^k on [0, 1/2], 1 - t = u^k on [1/2, 1]; logs are taken in u so
    // that u^k underflowing to 0 does not produce inf - inf.
    const double kl = std::max(1.0, 2.0 / (ar + 1.0));
    const double kr = std::max(1.0, 2.0 / (B + 1.0));
    const double ul = std::pow(0.5, 1.0 / kl);
    const double ur = std::pow(0.5, 1.0 / kr);
    auto left = [&](double u) {
      if (u <= 0.0) return 0.0;
      const double lu = std::log(u);
      return std::exp(ar * kl * lu + B * std::log1p(-std::pow(u, kl)) - shift +
                      std::log(kl) + (kl - 1.0) * lu);
    };
    auto right = [&](double u) {
      if (u <= 0.0) return 0.0;
      const double lu = std::log(u);
      return std::exp(ar * std::log1p(-std::pow(u, kr)) + B * kr * lu - shift +
                      std::log(kr) + (kr - 1.0) * lu);
    };
    out[r] = integrate(left, 0.0, ul, opt).value +
             integrate(right, 0.0, ur, opt).value;
  }
  return out;
}

}  // namespace detail

/// Ratio-of-integrals moments of a marginal prior law of p(A_j) under the
/// Bernoulli-type likelihood t^{n phi} (1 - t)^{n (1 - phi)}.
inline MarginalMoments marginal_posterior_moments(const MarginalLaw& law,
                                                  std::size_t n, double phi) {
  if (!(phi >= 0.0 && phi <= 1.0)) {
    throw InvalidParameter("phi must lie in [0, 1]");
  }
  const double x = static_cast<double>(n) * phi;
  const double y = static_cast<double>(n) * (1.0 - phi);
  return std::visit(
      [&](const auto& l) -> MarginalMoments {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiracMarginal>) {
          return {l.t0, 0.0};
        } else if constexpr (std::is_same_v<T, BetaMarginal>) {
          if (!(l.a > 0.0 && l.b > 0.0)) {
            throw InvalidParameter("Beta marginal needs a, b > 0");
          }
          const double A = l.a - 1.0 + x;
          const double B = l.b - 1.0 + y;
          double shift = 0.0;
          if (A > 0.0 && B > 0.0) {
            const double t = A / (A + B);
            shift = A * std::log(t) + B * std::log1p(-t);
          }
          const auto I = detail::beta_power_integrals(A, B, shift);
          if (!(I[0] > 0.0) || !std::isfinite(I[0])) {
            throw NumericFailure("marginal posterior normalizer underflowed");
          }
          const double m = I[1] / I[0];
          return {m, std::max(0.0, I[2] / I[0] - m * m)};
        } else {
          if (l.t.empty()) throw InvalidInput("no marginal draws");
          std::vector<double> lw(l.t.size());
          double top = -std::numeric_limits<double>::infinity();
          for (std::size_t k = 0; k < l.t.size(); ++k) {
            const double t = l.t[k];
            double v = 0.0;
            if (x > 0.0) v += t > 0.0 ? x * std::log(t) : -INFINITY;
            if (y > 0.0) v += t < 1.0 ? y * std::log1p(-t) : -INFINITY;
            lw[k] = v;
            top = std::max(top, v);
          }
          if (!std::isfinite(top)) {
            throw DegenerateWeights("all marginal draws have zero likelihood");
          }
          long double s0 = 0, s1 = 0, s2 = 0;
          for (std::size_t k = 0; k < l.t.size(); ++k) {
            const long double w = std::exp(lw[k] - top);
            s0 += w;
            s1 += w * l.t[k];
            s2 += w * l.t[k] * l.t[k];
          }
          const double m = static_cast<double>(s1 / s0);
          return {m, std::max(0.0, static_cast<double>(s2 / s0) - m * m)};
        }
      },
      law);
}

/// Marginal law of p(A_j) under the prior of a finite-dimensional posterior.
inline MarginalLaw prior_marginal(const FiniteDimPosterior& fdp,
                                  std::size_t j) {
  if (fdp.kind == FiniteDimPosterior::Kind::kDirichlet) {
    const double a = fdp.prior_concentration[j];
    double total = 0.0;
    for (double c : fdp.prior_concentration) total += c;
    const double b = total - a;
    if (a <= 0.0) return DiracMarginal{0.0};
    if (b <= 0.0) return DiracMarginal{1.0};
    return BetaMarginal{a, b};
  }
  DrawsMarginal d;
  d.t.reserve(fdp.draws.size());
  for (const auto& p : fdp.draws) d.t.push_back(p[j]);
  return d;
}

/// Moments computed cell by cell from the prior marginals.
inline PosteriorMoments posterior_moments_marginal(
    const FiniteDimPosterior& fdp) {
  PosteriorMoments pm;
  pm.phi = detail::fractions(fdp.counts);
  pm.m.resize(fdp.cells());
  pm.v.resize(fdp.cells());
  for (std::size_t j = 0; j < fdp.cells(); ++j) {
    const MarginalMoments mm =
        marginal_posterior_moments(prior_marginal(fdp, j), fdp.n, pm.phi[j]);
    pm.m[j] = mm.m;
    pm.v[j] = mm.v;
  }
  detail::finish_moments(pm);
  return pm;
}

// Moment ceilings for the DP ------------------------------------------------

struct MvReport {
  double q = 0.0;
  std::size_t cells = 0;
  std::size_t n = 0;
  std::size_t replications = 0;
  Estimate mean_abs_dev_sum;  // M_n
  Estimate sqrt_var_sum;      // V_n
  Estimate combined;          // M_n + V_n
  double ceiling_m = 0.0;     // qN/n
  double ceiling_v = 0.0;     // N/sqrt(n)
  double ceiling_mv = 0.0;    // (q+1)N/sqrt(n)
  bool pass_m = false;
  bool pass_v = false;
  bool pass_mv = false;
  bool pass() const { return pass_m && pass_v && pass_mv; }
};

/// Monte Carlo over data replications xi ~ p0 on [0,1] with N equal cells.
inline MvReport mv_bounds_dp(double q, std::size_t cells, std::size_t n,
                             std::size_t replications, const SeededRng& rng,
                             const Law& base = UniformLaw{},
                             const Law& p0 = UniformLaw{},
                             std::size_t threads = 1) {
  if (!(q >= 0.0) || !std::isfinite(q)) {
    throw InvalidParameter("q must be nonnegative and finite");
  }
  if (cells == 0) throw InvalidParameter("N must be >= 1");
  if (n == 0) throw InvalidParameter("n must be >= 1");
  if (replications < 100) {
    throw InvalidSamplePlan("mv_bounds_dp needs at least 100 replications");
  }
  const MetricSpace space = MetricSpace::hypercube(1);
  validate_law(base, space);
  validate_law(p0, space);
  const DeltaCovering cov = DeltaCovering::grid(space, cells);
  std::vector<double> qh = cell_masses(base, cov);
  for (double& h : qh) h *= q;

  std::vector<double> ms(replications), vs(replications), mvs(replications);
  parallel_for(replications, threads, [&](std::size_t r) {
    SeededRng local = rng.substream(r);
    const EmpiricalMeasure xi = sample_iid(p0, space, n, local);
    const auto counts = cell_counts(cov, xi.sample());
    const PosteriorMoments pm = dirichlet_moments(qh, counts);
    ms[r] = pm.mean_abs_dev_sum;
    vs[r] = pm.sqrt_var_sum;
    mvs[r] = ms[r] + vs[r];
  });
  MvReport out;
  out.q = q;
  out.cells = cov.size();
  out.n = n;
  out.replications = replications;
  out.mean_abs_dev_sum = mean_and_se(ms);
  out.sqrt_var_sum = mean_and_se(vs);
  out.combined = mean_and_se(mvs);
  const double nn = static_cast<double>(n);
  const double nc = static_cast<double>(cov.size());
  out.ceiling_m = q * nc / nn;
  out.ceiling_v = nc / std::sqrt(nn);
  out.ceiling_mv = (q + 1.0) * nc / std::sqrt(nn);
  out.pass_m = out.mean_abs_dev_sum.mean <=
               out.ceiling_m + 3.0 * out.mean_abs_dev_sum.se;
  out.pass_v =
      out.sqrt_var_sum.mean <= out.ceiling_v + 3.0 * out.sqrt_var_sum.se;
  out.pass_mv = out.combined.mean <= out.ceiling_mv + 3.0 * out.combined.se;
  return out;
}

// Distances to a fixed law ----------------------------------------------------

/// W_p from discrete measures to a fixed law: exact on [0,1], otherwise
/// against a grid discretization with `resolution` cells per axis.
class LawTarget {
 public:
  LawTarget(Law law, const MetricSpace& space, std::size_t resolution = 64)
      : law_(std::move(law)), space_(space) {
    validate_law(law_, space_);
    exact_ = space_.is_hypercube() && space_.dim() == 1;
    if (!exact_) {
      if (resolution == 0) throw InvalidParameter("resolution must be >= 1");
      fine_ = discretize_law(law_, space_, resolution);
    }
  }

  bool exact() const noexcept { return exact_; }
  const Law& law() const noexcept { return law_; }
  const MetricSpace& space() const noexcept { return space_; }

  double distance(const DiscreteMeasure& mu, double p) const {
    if (exact_) return wasserstein_1d(mu, law_, p);
    return wasserstein_value(mu, fine_, p, space_);
  }

 private:
  Law law_;
  MetricSpace space_;
  bool exact_ = false;
  DiscreteMeasure fine_;
};

// Glivenko-Cantelli rate ------------------------------------------------------

struct RateRow {
  std::size_t n = 0;
  Estimate estimate;
};

struct GcReport {
  std::vector<RateRow> rows;
  double slope = 0.0;
};

namespace detail {

inline void check_grid(std::span<const std::size_t> n_grid) {
  if (n_grid.empty()) throw InvalidSamplePlan("empty n grid");
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    if (n_grid[i] == 0) throw InvalidSamplePlan("n must be >= 1");
    if (i > 0 && n_grid[i] <= n_grid[i - 1]) {
      throw InvalidSamplePlan("n grid must be strictly increasing");
    }
  }
}

inline double fitted_slope(const std::vector<RateRow>& rows) {
  std::vector<double> x, y;
  for (const RateRow& r : rows) {
    if (r.estimate.mean > 0.0) {
      x.push_back(static_cast<double>(r.n));
      y.push_back(r.estimate.mean);
    }
  }
  if (x.size() < 2) return 0.0;
  return loglog_slope(x, y);
}

/// Smallest stick count whose expected leftover (c/(c+1))^K is below 1e-16,
/// capped at `cap`.
inline std::size_t stick_count(double c, std::size_t cap) {
  const double k = std::ceil(std::log(1e-16) / std::log(c / (c + 1.0)));
  if (!std::isfinite(k)) return cap;
  return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(k, 2.0)),
                                 2, std::max<std::size_t>(cap, 2));
}

}  // namespace detail

/// E[W_p(e_n, p0)] per n by Monte Carlo.
inline GcReport gc_rate(const Law& p0, double p,
                        std::span<const std::size_t> n_grid,
                        std::size_t replications, const MetricSpace& space,
                        const SeededRng& rng,
                        const MonteCarloOptions& opt = {}) {
  detail::check_order(p);
  detail::check_grid(n_grid);
  if (replications == 0) throw InvalidSamplePlan("replications must be >= 1");
  const LawTarget target(p0, space, opt.resolution);
  GcReport out;
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const SeededRng base = rng.substream(n_grid[i]);
    std::vector<double> d(replications);
    parallel_for(replications, opt.threads, [&](std::size_t r) {
      SeededRng local = base.substream(r);
      const EmpiricalMeasure e = sample_iid(p0, space, n_grid[i], local);
      d[r] = target.distance(e.as_discrete(), p);
    });
    out.rows.push_back({n_grid[i], mean_and_se(d)});
  }
  out.slope = detail::fitted_slope(out.rows);
  return out;
}

// Contraction -----------------------------------------------------------------

struct ContractionReport {
  double p = 1.0;
  std::vector<RateRow> rows;  // epsilon_n per n
  double slope = 0.0;
  std::size_t replications = 0;
  std::size_t draws = 0;
  double tail_bound = 0.0;  // stick-breaking leftover of the prior part
  // distances[i][r * draws + d] = W_p(draw d of replication r, p0) at n_i.
  std::vector<std::vector<double>> distances;
  std::vector<std::vector<double>> per_replication;  // eps per replication
};

/// For each n: xi ~ p0, posterior draws of the DP by the split sampler, and
/// eps_r = (mean_d W_p(draw, p0)^p)^{1/p}; eps_n is the mean over r.
inline ContractionReport estimate_contraction(
    const DirichletProcessPrior& prior, const Law& p0,
    std::span<const std::size_t> n_grid, std::size_t replications,
    std::size_t posterior_draws, double p, const MetricSpace& space,
    const SeededRng& rng, const MonteCarloOptions& opt = {}) {
  detail::check_order(p);
  detail::check_grid(n_grid);
  validate(prior, space);
  if (replications == 0 || posterior_draws == 0) {
    throw InvalidSamplePlan("replications and draws must be >= 1");
  }
  const LawTarget target(p0, space, opt.resolution);
  const std::size_t k = detail::stick_count(prior.q, opt.truncation);
  ContractionReport out;
  out.p = p;
  out.replications = replications;
  out.draws = posterior_draws;
  out.tail_bound =
      std::pow(prior.q / (prior.q + 1.0), static_cast<double>(k));
  for (std::size_t i = 0; i < n_grid.size(); ++i) {
    const SeededRng base = rng.substream(n_grid[i]);
    std::vector<double> dist(replications * posterior_draws);
    std::vector<double> eps(replications);
    parallel_for(replications, opt.threads, [&](std::size_t r) {
      SeededRng local = base.substream(r);
      const EmpiricalMeasure xi = sample_iid(p0, space, n_grid[i], local);
      long double acc = 0.0L;
      for (std::size_t d = 0; d < posterior_draws; ++d) {
        const StickBreakingDraw draw =
            dp_posterior_sample_split(prior, xi, k, space, local);
        const double w = target.distance(draw.measure, p);
        dist[r * posterior_draws + d] = w;
        acc += detail::pow_p(w, p);
      }
      eps[r] = detail::root_p(acc / static_cast<long double>(posterior_draws),
                              p);
    });
    out.rows.push_back({n_grid[i], mean_and_se(eps)});
    out.distances.push_back(std::move(dist));
    out.per_replication.push_back(std::move(eps));
  }
  out.slope = detail::fitted_slope(out.rows);
  return out;
}

struct MarkovRow {
  std::size_t n = 0;
  double blowup = 1.0;  // M in {W >= M eps_n}
  Estimate mass;        // posterior mass averaged over replications
  double ceiling = 1.0;
  bool pass = false;
};

/// Posterior mass of {W_p(draw, p0) >= M eps_n} averaged over data
/// replications, against the Markov ceiling 1/M.
inline std::vector<MarkovRow> markov_pcr_check(
    const ContractionReport& report, std::span<const double> blowup_sequence) {
  std::vector<MarkovRow> out;
  for (double m : blowup_sequence) {
    if (!(m > 0.0)) throw InvalidParameter("blow-up factors must be positive");
  }
  for (std::size_t i = 0; i < report.rows.size(); ++i) {
    const double eps = report.rows[i].estimate.mean;
    for (double m : blowup_sequence) {
      std::vector<double> mass(report.replications);
      for (std::size_t r = 0; r < report.replications; ++r) {
        std::size_t hits = 0;
        for (std::size_t d = 0; d < report.draws; ++d) {
          if (report.distances[i][r * report.draws + d] >= m * eps &&
              report.distances[i][r * report.draws + d] > 0.0) {
            ++hits;
          }
        }
        mass[r] = static_cast<double>(hits) /
                  static_cast<double>(report.draws);
      }
      MarkovRow row;
      row.n = report.rows[i].n;
      row.blowup = m;
      row.mass = mean_and_se(mass);
      row.ceiling = std::min(1.0, 1.0 / m);
      row.pass = row.mass.mean <= row.ceiling + 3.0 * row.mass.se;
      out.push_back(row);
    }
  }
  return out;
}

// Five-term decomposition -----------------------------------------------------

struct TermEstimate {
  std::string name;
  Estimate value;
  double ceiling = 0.0;
  double ceiling_se = 0.0;
  bool pass = false;
};

struct DecompositionReport {
  std::string estimator = "upper-bound estimator";
  std::size_t n = 0;
  double delta = 0.0;
  double q = 0.0;
  double p = 1.0;
  std::size_t cells = 0;
  std::size_t replications = 0;
  std::size_t draws = 0;
  double l_n = 0.0;
  double diameter = 0.0;
  std::array<TermEstimate, 5> terms;
  Estimate eps;        // W between posterior law and the Dirac at p0
  Estimate term_sum;   // T1 + ... + T5 per replication
  bool eps_pass = false;
  Estimate mean_abs_dev_sum;
  Estimate sqrt_var_sum;
  double t4_max = 0.0;            // largest T4 over replications
  bool t4_deterministic = false;  // T4 <= 2 delta on every replication
  double theorem_bound = 0.0;     // assembled from gc, L_n, delta, M, V

  bool pass() const {
    for (const auto& t : terms) {
      if (!t.pass) return false;
    }
    return eps_pass && t4_deterministic;
  }
};

namespace detail {

/// Per-cell pieces of a DP posterior draw in the gamma-process form. Cell j
/// carries a prior part g_j Q_j with g_j ~ Gamma(qH_j) and
/// Q_j ~ DP(qH_j, H(. | A_j)), plus the data atoms in A_j with Exp(1)
/// weights. The same U_j = (g_j + sum E_i) / total drive the posterior, the
/// Gamma* and the Sigma* draws.
struct CellDraw {
  std::vector<Point> prior_atoms;
  std::vector<double> prior_weights;  // Q_j weights, sum 1
  double prior_gamma = 0.0;           // g_j
  double data_mass = 0.0;             // sum of E_i over the cell
};

}  // namespace detail

/// Monte Carlo estimates of the five summands of the contraction bound for
/// a DP prior, coupled through shared random numbers. Every outer distance
/// between posterior laws is estimated by a coupling, so each term is an
/// upper-bound estimator.
inline DecompositionReport decompose_five_terms(
    const DirichletProcessPrior& prior, const Law& p0, std::size_t n,
    double delta, double p, std::size_t replications,
    std::size_t posterior_draws, const MetricSpace& space,
    const SeededRng& rng, const MonteCarloOptions& opt = {}) {
  detail::check_order(p);
  validate(prior, space);
  if (n == 0) throw InvalidSamplePlan("n must be >= 1");
  if (replications < 2 || posterior_draws == 0) {
    throw InvalidSamplePlan("need >= 2 replications and >= 1 draw");
  }
  const DeltaCovering cov = build_delta_covering(space, delta);
  const std::size_t nc = cov.size();
  const LawTarget target(p0, space, opt.resolution);
  std::vector<double> h = cell_masses(prior.base, cov);
  std::vector<double> qh(nc);
  for (std::size_t j = 0; j < nc; ++j) qh[j] = prior.q * h[j];
  std::vector<std::size_t> sticks(nc, 0);
  for (std::size_t j = 0; j < nc; ++j) {
    if (qh[j] > 0.0) sticks[j] = detail::stick_count(qh[j], opt.truncation);
  }
  std::vector<Point> reps(nc);
  for (std::size_t j = 0; j < nc; ++j) reps[j] = cov.representative(j);

  struct Rep {
    std::array<double, 5> t{};
    double eps = 0.0;
    double m = 0.0;
    double v = 0.0;
  };
  std::vector<Rep> res(replications);
  const SeededRng data_rng = rng.substream(1);

  parallel_for(replications, opt.threads, [&](std::size_t r) {
    SeededRng local = data_rng.substream(r);
    const EmpiricalMeasure xi = sample_iid(p0, space, n, local);
    const auto& xs = xi.sample();
    std::vector<std::size_t> cell_of(n);
    for (std::size_t i = 0; i < n; ++i) cell_of[i] = cov.cell_of(xs[i]);
    std::vector<std::size_t> counts(nc, 0);
    for (std::size_t c : cell_of) ++counts[c];

    const DiscreteMeasure e_xi = xi.as_discrete();
    const DiscreteMeasure e_eta = pushforward(e_xi, cov);
    const PosteriorMoments pm = dirichlet_moments(qh, counts);
    Rep& out = res[r];
    out.m = pm.mean_abs_dev_sum;
    out.v = pm.sqrt_var_sum;
    out.t[3] = wasserstein_value(e_eta, e_xi, p, space);
    out.t[4] = target.distance(e_xi, p);

    long double acc1 = 0, acc2 = 0, acc3 = 0, acc_eps = 0;
    std::vector<detail::CellDraw> cd(nc);
    std::vector<double> e(n);
    for (std::size_t d = 0; d < posterior_draws; ++d) {
      long double total = 0.0L;
      for (std::size_t j = 0; j < nc; ++j) {
        detail::CellDraw& c = cd[j];
        c.data_mass = 0.0;
        c.prior_atoms.clear();
        c.prior_weights.clear();
        c.prior_gamma = 0.0;
        if (qh[j] > 0.0) {
          c.prior_gamma = local.gamma(qh[j]);
          const DiscreteMeasure qj = detail::stick_breaking(
              qh[j], sticks[j],
              [&] { return sample_in_cell(prior.base, cov, j, local); },
              local);
          c.prior_atoms = qj.support();
          c.prior_weights = qj.weights();
        }
        total += c.prior_gamma;
      }
      for (std::size_t i = 0; i < n; ++i) {
        e[i] = local.exponential();
        cd[cell_of[i]].data_mass += e[i];
        total += e[i];
      }
      const double tot = static_cast<double>(total);

      std::vector<Point> post_pts, gam_pts, sig_pts;
      std::vector<double> post_w, gam_w, sig_w;
      for (std::size_t j = 0; j < nc; ++j) {
        const detail::CellDraw& c = cd[j];
        const double u = (c.prior_gamma + c.data_mass) / tot;
        if (!(u > 0.0)) continue;
        for (std::size_t k = 0; k < c.prior_atoms.size(); ++k) {
          post_pts.push_back(c.prior_atoms[k]);
          post_w.push_back(c.prior_gamma * c.prior_weights[k] / tot);
          gam_pts.push_back(c.prior_atoms[k]);
          gam_w.push_back(u * c.prior_weights[k]);
        }
        if (c.prior_atoms.empty()) {
          // Data in a cell of zero base mass: the within-cell law is not
          // defined by the prior, so it collapses onto the representative.
          gam_pts.push_back(reps[j]);
          gam_w.push_back(u);
        }
        sig_pts.push_back(reps[j]);
        sig_w.push_back(u);
      }
      for (std::size_t i = 0; i < n; ++i) {
        post_pts.push_back(xs[i]);
        post_w.push_back(e[i] / tot);
      }
      const DiscreteMeasure post =
          DiscreteMeasure::normalized(std::move(post_pts), std::move(post_w));
      const DiscreteMeasure gam =
          DiscreteMeasure::normalized(std::move(gam_pts), std::move(gam_w));
      const DiscreteMeasure sig =
          DiscreteMeasure::normalized(std::move(sig_pts), std::move(sig_w));
      acc1 += detail::pow_p(wasserstein_value(post, gam, p, space), p);
      acc2 += detail::pow_p(wasserstein_value(gam, sig, p, space), p);
      acc3 += detail::pow_p(wasserstein_value(sig, e_eta, p, space), p);
      acc_eps += detail::pow_p(target.distance(post, p), p);
    }
    const long double dd = static_cast<long double>(posterior_draws);
    out.t[0] = detail::root_p(acc1 / dd, p);
    out.t[1] = detail::root_p(acc2 / dd, p);
    out.t[2] = detail::root_p(acc3 / dd, p);
    out.eps = detail::root_p(acc_eps / dd, p);
  });

  DecompositionReport rep;
  rep.n = n;
  rep.delta = delta;
  rep.q = prior.q;
  rep.p = p;
  rep.cells = nc;
  rep.replications = replications;
  rep.draws = posterior_draws;
  rep.diameter = space.diameter();
  rep.l_n = static_cast<double>(n) / (prior.q + static_cast<double>(n));

  std::vector<double> col(replications);
  auto column = [&](auto get) {
    for (std::size_t r = 0; r < replications; ++r) col[r] = get(res[r]);
    return mean_and_se(col);
  };
  static const char* kNames[5] = {"T1", "T2", "T3", "T4", "T5"};
  for (std::size_t k = 0; k < 5; ++k) {
    rep.terms[k].name = kNames[k];
    rep.terms[k].value = column([k](const Rep& x) { return x.t[k]; });
  }
  rep.eps = column([](const Rep& x) { return x.eps; });
  rep.term_sum = column([](const Rep& x) {
    return x.t[0] + x.t[1] + x.t[2] + x.t[3] + x.t[4];
  });
  rep.mean_abs_dev_sum = column([](const Rep& x) { return x.m; });
  rep.sqrt_var_sum = column([](const Rep& x) { return x.v; });
  const Estimate mv = column([](const Rep& x) { return x.m + x.v; });

  // An independent Glivenko-Cantelli run supplies the fifth ceiling.
  const std::size_t gc_n[1] = {n};
  const GcReport gc = gc_rate(p0, p, gc_n, replications, space,
                              rng.substream(2), opt);
  const Estimate gc_est = gc.rows.front().estimate;

  const double diam = rep.diameter;
  rep.terms[0].ceiling = 2.0 * rep.l_n * delta;
  rep.terms[1].ceiling = 2.0 * delta;
  const double half = 0.5 * mv.mean;
  rep.terms[2].ceiling = diam * std::pow(half, 1.0 / p);
  rep.terms[2].ceiling_se =
      half > 0.0 ? diam / p * std::pow(half, 1.0 / p - 1.0) * 0.5 * mv.se : 0.0;
  rep.terms[3].ceiling = 2.0 * delta;
  rep.terms[4].ceiling = gc_est.mean;
  rep.terms[4].ceiling_se = gc_est.se;
  for (TermEstimate& t : rep.terms) {
    const double se = std::hypot(t.value.se, t.ceiling_se);
    t.pass = t.value.mean <= t.ceiling + 3.0 * se;
  }
  rep.t4_max = 0.0;
  for (const Rep& x : res) rep.t4_max = std::max(rep.t4_max, x.t[3]);
  rep.t4_deterministic = rep.t4_max <= 2.0 * delta;
  rep.eps_pass = rep.eps.mean <=
                 rep.term_sum.mean + 3.0 * std::hypot(rep.eps.se, rep.term_sum.se);
  rep.theorem_bound =
      theorem_bound(gc_est.mean, rep.l_n, delta, rep.mean_abs_dev_sum.mean,
                    rep.sqrt_var_sum.mean, diam, p);
  return rep;
}

// Predictive Lipschitz constant -----------------------------------------------

struct LipschitzReport {
  std::size_t n = 0;
  std::size_t pairs = 0;       // pairs requested
  std::size_t pairs_used = 0;  // pairs with W_1(e_x, e_y) >= 1e-9
  double max_ratio = 0.0;
  double constant = 0.0;  // n/(q+n) for the DP, the EGP constant otherwise
  bool pass = false;
};

/// max over random dataset pairs of W_1(pred(x), pred(y)) / W_1(e_x, e_y).
inline LipschitzReport estimate_predictive_lipschitz(
    const PriorSpec& prior, std::size_t n, std::size_t pair_count,
    const Law& data_law, const MetricSpace& space, const SeededRng& rng,
    const MonteCarloOptions& opt = {}, double slack = 1e-8) {
  if (pair_count == 0) throw InvalidSamplePlan("pair_count must be >= 1");
  if (n == 0) throw InvalidParameter("n must be >= 1");
  validate(prior, space);
  validate_law(data_law, space);
  const bool one_d = space.is_hypercube() && space.dim() == 1;

  std::vector<double> ratio(pair_count, -1.0);
  const auto* dp = std::get_if<DirichletProcessPrior>(&prior);
  // Off the unit interval a continuous base is discretized; the shared base
  // part cancels in W_1, so the ratio is unaffected.
  DirichletProcessPrior dp_work;
  if (dp) {
    dp_work = *dp;
    if (!one_d && !is_discrete(dp_work.base)) {
      dp_work.base = discretize_law(dp_work.base, space, opt.resolution);
    }
  }
  parallel_for(pair_count, opt.threads, [&](std::size_t k) {
    SeededRng local = rng.substream(k);
    const EmpiricalMeasure x = sample_iid(data_law, space, n, local);
    const EmpiricalMeasure y = sample_iid(data_law, space, n, local);
    const double den =
        wasserstein_value(x.as_discrete(), y.as_discrete(), 1.0, space);
    if (den < 1e-9) return;
    double num = 0.0;
    if (dp) {
      const Mixture a = dp_predictive(dp_work, x);
      const Mixture b = dp_predictive(dp_work, y);
      if (one_d) {
        num = wasserstein1_1d(a, b);
      } else {
        num = wasserstein_value(a.as_discrete(), b.as_discrete(), 1.0, space);
      }
    } else {
      const auto& egp = std::get<ExtendedGammaPrior>(prior);
      num = wasserstein_value(egp_predictive(egp, x).measure,
                              egp_predictive(egp, y).measure, 1.0, space);
    }
    ratio[k] = num / den;
  });
  LipschitzReport out;
  out.n = n;
  out.pairs = pair_count;
  for (double r : ratio) {
    if (r < 0.0) continue;
    ++out.pairs_used;
    out.max_ratio = std::max(out.max_ratio, r);
  }
  if (out.pairs_used == 0) {
    throw InvalidSamplePlan("every dataset pair was degenerate");
  }
  const double nn = static_cast<double>(n);
  out.constant =
      dp ? nn / (dp->q + nn)
         : egp_lipschitz_constant(std::get<ExtendedGammaPrior>(prior), n,
                                  space.diameter());
  out.pass = out.max_ratio <= out.constant + slack;
  return out;
}

}  // namespace wpcr
