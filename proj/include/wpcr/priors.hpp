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

// Dirichlet process and normalized extended Gamma process priors: exact
// predictive distributions, posterior sampling for the Dirichlet process,
// the extended-Gamma latent density and its Lipschitz constants.

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "wpcr/error.hpp"
#include "wpcr/measures.hpp"
#include "wpcr/metric.hpp"
#include "wpcr/quadrature.hpp"
#include "wpcr/rng.hpp"
#include "wpcr/transport.hpp"

namespace wpcr {

// Dirichlet process ---------------------------------------------------------

struct DirichletProcessPrior {
  double q = 1.0;
  Law base = UniformLaw{};
};

inline void validate(const DirichletProcessPrior& prior,
                     const MetricSpace& space) {
  if (!(prior.q > 0.0) || !std::isfinite(prior.q)) {
    throw InvalidParameter("DP total mass q must be positive and finite");
  }
  validate_law(prior.base, space);
}

/// q/(q+n) H + n/(q+n) e_n. Discrete whenever H is.
inline Mixture dp_predictive(const DirichletProcessPrior& prior,
                             const EmpiricalMeasure& sample) {
  if (sample.empty()) return Mixture{{1.0}, {prior.base}};
  const double n = static_cast<double>(sample.n());
  return Mixture{{prior.q / (prior.q + n), n / (prior.q + n)},
                 {prior.base, Law(sample.as_discrete())}};
}

struct StickBreakingDraw {
  DiscreteMeasure measure;
  double tail_bound = 0.0;  // expected mass beyond K sticks, (q'/(q'+1))^K
};

namespace detail {

inline Point draw_updated_base(const DirichletProcessPrior& prior,
                               const EmpiricalMeasure& sample,
                               const MetricSpace& space, SeededRng& rng) {
  const double n = static_cast<double>(sample.n());
  if (sample.empty() || rng.uniform() * (prior.q + n) < prior.q) {
    return sample_from(prior.base, space, rng);
  }
  return sample.sample()[rng.index(sample.n())];
}

/// Truncated stick-breaking draw from DP(c, law).
inline DiscreteMeasure stick_breaking(double c, std::size_t k,
                                      const std::function<Point()>& atom,
                                      SeededRng& rng) {
  std::vector<Point> pts;
  std::vector<double> w;
  pts.reserve(k);
  w.reserve(k);
  double remaining = 1.0;
  for (std::size_t i = 0; i + 1 < k; ++i) {
    const double v = rng.beta(1.0, c);
    pts.push_back(atom());
    w.push_back(remaining * v);
    remaining *= 1.0 - v;
  }
  pts.push_back(atom());
  w.push_back(remaining);
  return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

}  // namespace detail

/// Posterior draw by stick-breaking from DP(q + n, (qH + n e_n)/(q + n)),
/// truncated at K sticks with the leftover folded into the last atom.
inline StickBreakingDraw dp_posterior_sample(const DirichletProcessPrior& prior,
                                             const EmpiricalMeasure& sample,
                                             std::size_t truncation,
                                             const MetricSpace& space,
                                             SeededRng& rng) {
  if (truncation == 0) throw InvalidParameter("truncation K must be >= 1");
  const double qn = prior.q + static_cast<double>(sample.n());
  StickBreakingDraw out;
  out.measure = detail::stick_breaking(
      qn, truncation,
      [&] { return detail::draw_updated_base(prior, sample, space, rng); },
      rng);
  out.tail_bound = std::pow(qn / (qn + 1.0), static_cast<double>(truncation));
  return out;
}

/// Posterior draw in the conjugate split form
///   (G0 * Q + sum_i E_i delta_{x_i}) / (G0 + sum_i E_i),
/// G0 ~ Gamma(q), E_i ~ Exp(1), Q ~ DP(q, H) by stick-breaking with K sticks.
/// Only Q is truncated, and its tail (q/(q+1))^K is tiny for moderate q.
inline StickBreakingDraw dp_posterior_sample_split(
    const DirichletProcessPrior& prior, const EmpiricalMeasure& sample,
    std::size_t truncation, const MetricSpace& space, SeededRng& rng) {
  if (truncation == 0) throw InvalidParameter("truncation K must be >= 1");
  const double g0 = rng.gamma(prior.q);
  const DiscreteMeasure q = detail::stick_breaking(
      prior.q, truncation,
      [&] { return sample_from(prior.base, space, rng); }, rng);
  std::vector<Point> pts = q.support();
  std::vector<double> w;
  w.reserve(pts.size() + sample.n());
  for (double x : q.weights()) w.push_back(g0 * x);
  for (const Point& x : sample.sample()) {
    pts.push_back(x);
    w.push_back(rng.exponential());
  }
  StickBreakingDraw out;
  out.measure = DiscreteMeasure::normalized(std::move(pts), std::move(w));
  out.tail_bound =
      std::pow(prior.q / (prior.q + 1.0), static_cast<double>(truncation));
  return out;
}

// Extended Gamma process ----------------------------------------------------

/// The scale function beta of the Levy intensity s^-1 e^{-s beta(x)} ds
/// alpha(dx). Affine and sinusoidal forms act on the first coordinate and
/// are clipped to [lo, hi].
struct BetaFunction {
  enum class Kind { kConstant, kAffine, kSinusoidal, kCustom };
  Kind kind = Kind::kConstant;
  double c0 = 1.0;
  double c1 = 0.0;
  double frequency = 1.0;
  double lo = 0.0;
  double hi = std::numeric_limits<double>::infinity();
  std::function<double(const Point&)> custom;

  static BetaFunction constant(double c) {
    BetaFunction b;
    b.c0 = c;
    return b;
  }
  static BetaFunction affine(double c0, double c1, double lo, double hi) {
    BetaFunction b;
    b.kind = Kind::kAffine;
    b.c0 = c0;
    b.c1 = c1;
    b.lo = lo;
    b.hi = hi;
    return b;
  }
  /// c0 + c1 sin(2 pi frequency x_0), clipped.
  static BetaFunction sinusoidal(double c0, double c1, double frequency,
                                 double lo, double hi) {
    BetaFunction b = affine(c0, c1, lo, hi);
    b.kind = Kind::kSinusoidal;
    b.frequency = frequency;
    return b;
  }
  static BetaFunction from(std::function<double(const Point&)> f) {
    BetaFunction b;
    b.kind = Kind::kCustom;
    b.custom = std::move(f);
    return b;
  }

  double operator()(const Point& x) const {
    switch (kind) {
      case Kind::kConstant: return c0;
      case Kind::kAffine: return std::clamp(c0 + c1 * x[0], lo, hi);
      case Kind::kSinusoidal:
        return std::clamp(
            c0 + c1 * std::sin(2.0 * std::numbers::pi * frequency * x[0]), lo,
            hi);
      case Kind::kCustom: return custom(x);
    }
    return c0;
  }
};

/// alpha = a * alpha_shape with alpha_shape a probability measure.
struct ExtendedGammaPrior {
  double a = 1.0;
  DiscreteMeasure alpha_shape;
  BetaFunction beta;
  double L = 0.0;
  double beta0 = 1.0;
  double beta1 = 1.0;
};

/// Builds the prior, discretizing an atomless alpha shape on a midpoint grid
/// with `resolution` cells per axis.
inline ExtendedGammaPrior make_egp(double a, const Law& alpha_shape,
                                   BetaFunction beta, double L, double beta0,
                                   double beta1, const MetricSpace& space,
                                   std::size_t resolution = 256) {
  validate_law(alpha_shape, space);
  ExtendedGammaPrior p;
  p.a = a;
  p.alpha_shape = discretize_law(alpha_shape, space, resolution);
  p.beta = std::move(beta);
  p.L = L;
  p.beta0 = beta0;
  p.beta1 = beta1;
  return p;
}

/// Parameter checks plus spot checks of the beta bounds and Lipschitz
/// constant on a deterministic set of points.
inline void validate(const ExtendedGammaPrior& prior,
                     const MetricSpace& space) {
  if (!(prior.a > 0.0) || !std::isfinite(prior.a)) {
    throw InvalidParameter("EGP mass a must be positive and finite");
  }
  if (!(prior.beta0 > 0.0) || !(prior.beta1 >= prior.beta0) ||
      !std::isfinite(prior.beta1)) {
    throw InvalidParameter("need 0 < beta0 <= beta1 < inf");
  }
  if (!(prior.L >= 0.0) || !std::isfinite(prior.L)) {
    throw InvalidParameter("beta Lipschitz constant L must be >= 0");
  }
  if (prior.alpha_shape.empty()) throw InvalidParameter("alpha has no atoms");
  validate_law(Law(prior.alpha_shape), space);
  using K = BetaFunction::Kind;
  if ((prior.beta.kind == K::kAffine || prior.beta.kind == K::kSinusoidal) &&
      !space.is_hypercube()) {
    throw InvalidParameter("affine and sinusoidal beta need a hypercube");
  }
  if (prior.beta.kind == K::kCustom && !prior.beta.custom) {
    throw InvalidParameter("custom beta has no function");
  }
  std::vector<Point> pts = prior.alpha_shape.support();
  SeededRng rng(0x5eed);
  for (int i = 0; i < 256; ++i) {
    pts.push_back(sample_from(Law(UniformLaw{}), space, rng));
  }
  const double slack = 1e-12 * std::max(1.0, prior.beta1);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double b = prior.beta(pts[i]);
    if (!(b >= prior.beta0 - slack && b <= prior.beta1 + slack)) {
      throw InvalidParameter("beta leaves [beta0, beta1] at a sampled point");
    }
    const Point& y = pts[(i * 7 + 3) % pts.size()];
    if (std::abs(b - prior.beta(y)) >
        prior.L * space.metric(pts[i], y) + slack) {
      throw InvalidParameter("beta violates its Lipschitz constant L");
    }
  }
}

/// Density of the latent variable U_n given the sample,
///   f(u) = u^{n-1} exp(-int log(u + beta(z)) [alpha + n e_n](dz)) / Z,
/// integrated in the log domain after u = t / (1 - t). The upper half is
/// parametrized by s = 1 - t so the polynomial tail stays resolvable.
class LatentDensityProfile {
 public:
  LatentDensityProfile(const ExtendedGammaPrior& prior,
                       const EmpiricalMeasure& sample, double tol = 1e-10)
      : n_(sample.n()) {
    if (n_ == 0) throw InvalidParameter("latent density needs n >= 1");
    std::vector<std::pair<double, double>> raw;
    for (std::size_t k = 0; k < prior.alpha_shape.size(); ++k) {
      raw.emplace_back(prior.beta(prior.alpha_shape.support()[k]),
                       prior.a * prior.alpha_shape.weights()[k]);
    }
    for (const Point& x : sample.sample()) raw.emplace_back(prior.beta(x), 1.0);
    std::sort(raw.begin(), raw.end());
    for (const auto& [b, c] : raw) {
      if (!terms_.empty() && terms_.back().first == b) {
        terms_.back().second += c;
      } else {
        terms_.emplace_back(b, c);
      }
    }
    normalize(tol);
  }

  std::size_t n() const noexcept { return n_; }
  double log_z() const noexcept { return log_z_; }
  double z() const noexcept { return std::exp(log_z_); }

  /// log of the unnormalized integrand u^{n-1} prod (u + b)^{-c}.
  double log_unnormalized(double u) const {
    double s = static_cast<double>(n_ - 1) * std::log(u);
    if (n_ == 1) s = 0.0;
    for (const auto& [b, c] : terms_) s -= c * std::log(u + b);
    return s;
  }

  double density(double u) const {
    if (!(u >= 0.0)) return 0.0;
    return std::exp(log_unnormalized(u) - log_z_);
  }

  /// E[h(U_n)] by the stored quadrature rule.
  template <class H>
  double expect(H&& h) const {
    long double acc = 0.0L;
    for (const auto& [u, w] : nodes_) acc += w * h(u);
    return static_cast<double>(acc);
  }

  /// zeta(b) = n^{-1} E[U / (U + b)].
  double zeta(double b) const {
    return expect([b](double u) { return u / (u + b); }) /
           static_cast<double>(n_);
  }

  /// Integral of f over the two halves in the t / s parametrizations.
  template <class G>
  static double integrate_over_u(G&& g, const QuadratureOptions& opt) {
    auto lower = [&](double t) {
      const double omt = 1.0 - t;
      return g(t / omt) / (omt * omt);
    };
    auto upper = [&](double s) { return g((1.0 - s) / s) / (s * s); };
    return integrate(lower, 0.0, 0.5, opt).value +
           integrate(upper, 0.0, 0.5, opt).value;
  }

 private:
  // log integrand on each half, including the Jacobian.
  double g_lower(double t) const {
    const double omt = 1.0 - t;
    return log_unnormalized(t / omt) - 2.0 * std::log(omt);
  }
  double g_upper(double s) const {
    return log_unnormalized((1.0 - s) / s) - 2.0 * std::log(s);
  }

  template <class G>
  static double peak(G&& g) {
    double best = -std::numeric_limits<double>::infinity();
    double arg = 0.25;
    const int m = 512;
    for (int i = 1; i < m; ++i) {
      const double x = 0.5 * i / m;
      const double v = g(x);
      if (v > best) {
        best = v;
        arg = x;
      }
    }
    // Golden-section refinement inside the neighbouring grid cells.
    double lo = std::max(1e-300, arg - 0.5 / m);
    double hi = std::min(0.5, arg + 0.5 / m);
    const double r = 0.5 * (std::sqrt(5.0) - 1.0);
    for (int it = 0; it < 60; ++it) {
      const double x1 = hi - r * (hi - lo);
      const double x2 = lo + r * (hi - lo);
      if (g(x1) > g(x2)) hi = x2; else lo = x1;
    }
    return std::max(best, g(0.5 * (lo + hi)));
  }

  void normalize(double tol) {
    const double shift = std::max(peak([&](double t) { return g_lower(t); }),
                                  peak([&](double s) { return g_upper(s); }));
    if (!std::isfinite(shift)) {
      throw NumericFailure("latent density has no finite peak");
    }
    QuadratureOptions opt;
    opt.rel_tol = std::min(tol, 1e-8);
    opt.max_panels = 20000;
    PanelList lower, upper;
    auto fl = [&](double t) { return std::exp(g_lower(t) - shift); };
    auto fu = [&](double s) { return std::exp(g_upper(s) - shift); };
    QuadratureResult rl, ru;
    try {
      rl = integrate(fl, 0.0, 0.5, opt, &lower);
      ru = integrate(fu, 0.0, 0.5, opt, &upper);
    } catch (const NumericFailure& e) {
      throw NumericFailure(std::string("latent density normalization: ") +
                           e.what() + " (n=" + std::to_string(n_) + ")");
    }
    const double mass = rl.value + ru.value;
    if (!(mass > 0.0)) throw NumericFailure("latent density integrates to 0");
    log_z_ = shift + std::log(mass);
    for_each_node(lower, [&](double t, double w) {
      nodes_.emplace_back(t / (1.0 - t), w * fl(t) / mass);
    });
    for_each_node(upper, [&](double s, double w) {
      nodes_.emplace_back((1.0 - s) / s, w * fu(s) / mass);
    });
  }

  std::size_t n_;
  std::vector<std::pair<double, double>> terms_;  // (beta value, mass)
  double log_z_ = 0.0;
  std::vector<std::pair<double, double>> nodes_;  // (u, probability weight)
};

inline LatentDensityProfile egp_latent_density(const ExtendedGammaPrior& prior,
                                               const EmpiricalMeasure& sample,
                                               double tol = 1e-10) {
  return LatentDensityProfile(prior, sample, tol);
}

struct EgpPredictive {
  DiscreteMeasure measure;
  double raw_mass = 0.0;  // total mass before the final renormalization
};

/// zeta(z) [alpha + n e_n](dz) over supp(alpha) and the sample atoms.
inline EgpPredictive egp_predictive(const ExtendedGammaPrior& prior,
                                    const EmpiricalMeasure& sample,
                                    double tol = 1e-10) {
  const LatentDensityProfile f(prior, sample, tol);
  std::vector<Point> pts;
  std::vector<double> w;
  long double mass = 0.0L;
  for (std::size_t k = 0; k < prior.alpha_shape.size(); ++k) {
    const Point& z = prior.alpha_shape.support()[k];
    pts.push_back(z);
    w.push_back(prior.a * prior.alpha_shape.weights()[k] * f.zeta(prior.beta(z)));
    mass += w.back();
  }
  const DiscreteMeasure e = sample.as_discrete();
  const double n = static_cast<double>(sample.n());
  for (std::size_t j = 0; j < e.size(); ++j) {
    const Point& x = e.support()[j];
    // n e_n({x_j}) = n_j.
    pts.push_back(x);
    w.push_back(n * e.weights()[j] * f.zeta(prior.beta(x)));
    mass += w.back();
  }
  if (std::abs(static_cast<double>(mass) - 1.0) > 1e-6) {
    throw NumericFailure("EGP predictive mass " +
                         std::to_string(static_cast<double>(mass)) +
                         " differs from 1 by more than 1e-6");
  }
  return {DiscreteMeasure::normalized(std::move(pts), std::move(w)),
          static_cast<double>(mass)};
}

struct L1Comparison {
  double l1 = 0.0;
  double bound = 0.0;
};

inline double egp_l1_factor(const ExtendedGammaPrior& prior) {
  return 2.0 * std::pow(prior.beta1, prior.a) * prior.a * prior.L /
         std::pow(prior.beta0, prior.a + 1.0);
}

/// L1 distance between the latent densities at x and y, and its bound
/// (2 beta1^a a L / beta0^{a+1}) W_1(e_n^x, e_n^y).
inline L1Comparison egp_l1_distance(const ExtendedGammaPrior& prior,
                                    const EmpiricalMeasure& x,
                                    const EmpiricalMeasure& y,
                                    const MetricSpace& space,
                                    double tol = 1e-10) {
  if (x.n() != y.n()) throw InvalidInput("samples differ in size");
  const LatentDensityProfile fx(prior, x, tol);
  const LatentDensityProfile fy(prior, y, tol);
  QuadratureOptions opt;
  opt.rel_tol = 1e-9;
  opt.abs_tol = 1e-11;
  opt.max_panels = 20000;
  L1Comparison out;
  out.l1 = LatentDensityProfile::integrate_over_u(
      [&](double u) { return std::abs(fx.density(u) - fy.density(u)); }, opt);
  out.bound = egp_l1_factor(prior) *
              wasserstein_value(x.as_discrete(), y.as_discrete(), 1.0, space);
  return out;
}

/// [1 + L diam / beta0] + [a/n + 1] diam (2 beta1^a a L / beta0^{a+1}).
inline double egp_lipschitz_constant(const ExtendedGammaPrior& prior,
                                     std::size_t n, double diameter) {
  if (n == 0) throw InvalidParameter("n must be >= 1");
  return (1.0 + prior.L * diameter / prior.beta0) +
         (prior.a / static_cast<double>(n) + 1.0) * diameter *
             egp_l1_factor(prior);
}

using PriorSpec = std::variant<DirichletProcessPrior, ExtendedGammaPrior>;

inline void validate(const PriorSpec& prior, const MetricSpace& space) {
  std::visit([&](const auto& p) { validate(p, space); }, prior);
}

}  // namespace wpcr
