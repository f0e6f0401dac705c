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

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "wpcr/error.hpp"
#include "wpcr/parallel.hpp"
#include "wpcr/quadrature.hpp"

namespace wpcr {

/// gc + 2 (2 + L_n) delta + diam * (0.5 (M_n + V_n))^{1/p}.
inline double theorem_bound(double gc, double l_n, double delta, double m_n,
                            double v_n, double diam, double p) {
  const double in[] = {gc, l_n, delta, m_n, v_n, diam};
  for (double x : in) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw InvalidParameter("theorem_bound inputs must be finite and >= 0");
    }
  }
  if (!(p >= 1.0)) throw InvalidParameter("order p must be >= 1");
  return gc + 2.0 * (2.0 + l_n) * delta +
         diam * std::pow(0.5 * (m_n + v_n), 1.0 / p);
}

// Rate exponents ----------------------------------------------------------------

struct RateExponents {
  double d = 1.0;
  double s = 0.0;
  double alpha = 0.5;
  double p = 1.0;
  double beta_opt = 0.0;
  double rate_exponent = 0.0;

  /// Recommended schedule delta_n = n^{-beta_opt}.
  double delta(double n) const { return std::pow(n, -beta_opt); }
};

inline RateExponents corollary_rate(double d, double s, double alpha,
                                    double p) {
  if (!(d > 0.0) || !(s >= 0.0) || !(alpha > 0.0) || !(p >= 1.0) ||
      !std::isfinite(d) || !std::isfinite(s) || !std::isfinite(alpha) ||
      !std::isfinite(p)) {
    throw InvalidParameter("need d > 0, s >= 0, alpha > 0 and p >= 1");
  }
  if (!(alpha > s * d)) {
    throw HypothesisViolated("rate hypothesis alpha > s*d fails: alpha = " +
                             std::to_string(alpha) + ", s*d = " +
                             std::to_string(s * d));
  }
  RateExponents r;
  r.d = d;
  r.s = s;
  r.alpha = alpha;
  r.p = p;
  r.beta_opt = (alpha + p * s) / (d + p);
  r.rate_exponent = (alpha - d * s) / (d + p);
  return r;
}

struct CorollaryPath {
  std::vector<double> n;
  std::vector<double> delta;
  std::vector<double> bound;
  double slope = 0.0;
};

/// theorem_bound without the gc term along delta_n = n^{-beta_opt}, with
/// L_n = l_scale n^s, N = ceil(diam / (2 delta))^d cells and the moment
/// ceiling M_n + V_n = c N n^{-alpha}.
inline CorollaryPath corollary_bound_path(const RateExponents& r,
                                          std::span<const double> n_grid,
                                          double c = 2.0, double diam = 1.0,
                                          double l_scale = 1.0) {
  if (n_grid.size() < 2) throw InvalidSamplePlan("need at least two n values");
  CorollaryPath out;
  for (double n : n_grid) {
    if (!(n >= 1.0)) throw InvalidSamplePlan("n must be >= 1");
    const double delta = std::min(r.delta(n), diam);
    const double cells =
        std::pow(std::ceil(diam / (2.0 * delta)), r.d);
    const double mv = c * cells * std::pow(n, -r.alpha);
    out.n.push_back(n);
    out.delta.push_back(delta);
    out.bound.push_back(theorem_bound(0.0, l_scale * std::pow(n, r.s), delta,
                                      mv, 0.0, diam, r.p));
  }
  out.slope = loglog_slope(out.n, out.bound);
  return out;
}

// Concentration of Bernoulli-type posteriors --------------------------------

struct ChiUniform {};
struct ChiBeta {
  double a = 1.0;
  double b = 1.0;
};
struct ChiDiscrete {
  std::vector<double> atoms;  // in [0, 1]
  std::vector<double> weights;
};
using ChiLaw = std::variant<ChiUniform, ChiBeta, ChiDiscrete>;

namespace detail {

/// p log(p/t) + (1-p) log((1-p)/(1-t)), i.e. H(p,t) - H(p,p), with the
/// conventions 0 log 0 = 0 and +inf when t hits a boundary p does not.
inline double bernoulli_kl(double p, double t) {
  if (t <= 0.0) return p > 0.0 ? std::numeric_limits<double>::infinity()
                               : 0.0;
  if (t >= 1.0) return p < 1.0 ? std::numeric_limits<double>::infinity()
                               : 0.0;
  // Extended precision keeps g(h) - 2h^2 resolvable down to h ~ 1e-4.
  long double k = 0.0L;
  const long double h = static_cast<long double>(t) - p;
  if (p > 0.0) k -= p * std::log1p(h / p);
  if (p < 1.0) k -= (1.0L - p) * std::log1p(-h / (1.0L - p));
  return std::max(static_cast<double>(k), 0.0);
}

inline double chi_cdf(const ChiLaw& chi, double x, bool inclusive = true) {
  if (x < 0.0) return 0.0;
  if (x >= 1.0 && inclusive) return 1.0;
  return std::visit(
      [&](const auto& c) -> double {
        using T = std::decay_t<decltype(c)>;
        if constexpr (std::is_same_v<T, ChiUniform>) {
          return std::min(x, 1.0);
        } else if constexpr (std::is_same_v<T, ChiBeta>) {
          return boost::math::ibeta(c.a, c.b, std::min(x, 1.0));
        } else {
          double s = 0.0;
          for (std::size_t k = 0; k < c.atoms.size(); ++k) {
            if (inclusive ? c.atoms[k] <= x : c.atoms[k] < x) s += c.weights[k];
          }
          return s;
        }
      },
      chi);
}

/// chi([p, p + h] intersected with [0, 1]).
inline double window_mass(const ChiLaw& chi, double p, double h) {
  const double q = std::min(p + h, 1.0);
  if (const auto* be = std::get_if<ChiBeta>(&chi)) {
    // h* can be ~1e-13 or smaller, far below what a CDF difference near
    // 1/2 resolves; narrow interior windows integrate the density instead.
    if (p <= 0.0) return boost::math::ibeta(be->a, be->b, q);
    if (q >= 1.0) return boost::math::ibetac(be->a, be->b, p);
    const double room = std::min(p, 1.0 - q);
    if (q - p <= 0.01 * room) {
      const double c = 0.5 * (p + q);
      const double w = 0.5 * (q - p);
      double s = 0.0;
      for (int i = 0; i < 8; ++i) {
        const double x = i == 7 ? 0.0 : kXgk[i];
        const double f1 = boost::math::ibeta_derivative(be->a, be->b, c - w * x);
        const double f2 = boost::math::ibeta_derivative(be->a, be->b, c + w * x);
        s += kWgk[i] * (i == 7 ? f1 : f1 + f2);
      }
      return s * w;
    }
    if (q <= 0.5) {
      return boost::math::ibeta(be->a, be->b, q) -
             boost::math::ibeta(be->a, be->b, p);
    }
    return boost::math::ibetac(be->a, be->b, p) -
           boost::math::ibetac(be->a, be->b, q);
  }
  return chi_cdf(chi, q, true) - chi_cdf(chi, p, false);
}

inline void validate_chi(const ChiLaw& chi) {
  if (const auto* b = std::get_if<ChiBeta>(&chi)) {
    if (!(b->a > 0.0 && b->b > 0.0)) {
      throw InvalidParameter("Beta parameters must be positive");
    }
  }
  if (const auto* d = std::get_if<ChiDiscrete>(&chi)) {
    if (d->atoms.empty() || d->atoms.size() != d->weights.size()) {
      throw InvalidParameter("discrete chi needs matching atoms and weights");
    }
    double s = 0.0;
    for (std::size_t k = 0; k < d->atoms.size(); ++k) {
      if (!(d->atoms[k] >= 0.0 && d->atoms[k] <= 1.0) ||
          !(d->weights[k] >= 0.0)) {
        throw InvalidParameter("discrete chi atoms must lie in [0, 1]");
      }
      s += d->weights[k];
    }
    if (std::abs(s - 1.0) > 1e-9) {
      throw InvalidParameter("discrete chi weights must sum to 1");
    }
  }
}

template <class F>
double golden_min(F&& f, double lo, double hi, int iters = 80) {
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < iters; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = f(d);
    }
  }
  return std::min({fc, fd, f(lo), f(hi)});
}

}  // namespace detail

/// phi(h) = inf_p chi([p, p + h]); g(h) = inf_{|p - t| >= h} H(p,t) - H(p,p);
/// h*(h) = min(h, g (g - 2h^2) / 2); psi(h) = phi(h*).
class DFProfile {
 public:
  /// `grid` is the coarse p-grid for Beta windows. Their mass is unimodal
  /// in p (the density is unimodal, U-shaped or monotone), so a coarse grid
  /// plus golden-section refinement finds the infimum.
  explicit DFProfile(ChiLaw chi, std::size_t grid = 64)
      : chi_(std::move(chi)), grid_(std::max<std::size_t>(grid, 16)) {
    detail::validate_chi(chi_);
  }

  const ChiLaw& chi() const noexcept { return chi_; }

  /// The window start ranges over [0, 1 - h]; past 1 - h the window is
  /// clipped by the unit interval and its mass would vanish for any atomless
  /// chi.
  double phi(double h) const {
    if (!(h > 0.0)) return 0.0;
    if (h >= 1.0) return 1.0;
    const double top = 1.0 - h;
    if (const auto* d = std::get_if<ChiDiscrete>(&chi_)) {
      std::vector<double> ev = {0.0, top};
      for (double x : d->atoms) {
        for (double e : {x, x - h}) {
          if (e > 0.0 && e < top) ev.push_back(e);
        }
      }
      std::sort(ev.begin(), ev.end());
      double best = 1.0;
      for (std::size_t k = 0; k < ev.size(); ++k) {
        best = std::min(best, detail::window_mass(chi_, ev[k], h));
        if (k + 1 < ev.size()) {
          best = std::min(best,
                          detail::window_mass(chi_, 0.5 * (ev[k] + ev[k + 1]), h));
        }
      }
      return best;
    }
    if (std::holds_alternative<ChiUniform>(chi_)) return h;
    // Beta: grid then golden-section refinement around the incumbent.
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= grid_; ++k) {
      const double p = top * static_cast<double>(k) / static_cast<double>(grid_);
      const double m = detail::window_mass(chi_, p, h);
      if (m < best) {
        best = m;
        arg = k;
      }
    }
    const double step = top / static_cast<double>(grid_);
    const double lo = std::max(0.0, (static_cast<double>(arg) - 1.0) * step);
    const double hi = std::min(top, (static_cast<double>(arg) + 1.0) * step);
    return std::min(best, detail::golden_min(
                              [&](double p) {
                                return detail::window_mass(chi_, p, h);
                              },
                              lo, hi));
  }

  /// Two-stage grid over p with t = p + h; by symmetry of H under
  /// (p, t) -> (1 - p, 1 - t) and monotonicity of H(p, .) away from p this
  /// covers the whole constraint set.
  double g(double h) const {
    if (!(h > 0.0)) return 0.0;
    if (h >= 1.0) return std::numeric_limits<double>::infinity();
    const double top = 1.0 - h;
    auto f = [&](double p) { return detail::bernoulli_kl(p, p + h); };
    constexpr std::size_t kCoarse = 400;
    std::size_t arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= kCoarse; ++k) {
      const double v = f(top * static_cast<double>(k) / kCoarse);
      if (v < best) {
        best = v;
        arg = k;
      }
    }
    const double step = top / kCoarse;
    const double lo = std::max(0.0, (static_cast<double>(arg) - 1.0) * step);
    const double hi = std::min(top, (static_cast<double>(arg) + 1.0) * step);
    for (std::size_t k = 0; k <= kCoarse; ++k) {
      best = std::min(best, f(lo + (hi - lo) * static_cast<double>(k) / kCoarse));
    }
    return std::min(best, detail::golden_min(f, lo, hi));
  }

  double h_star(double h) const {
    const double gh = g(h);
    return std::max(0.0, std::min(h, 0.5 * gh * (gh - 2.0 * h * h)));
  }

  /// Throws UnsupportedMeasure when atoms leave a window of zero mass.
  double psi(double h) const {
    const double v = phi(h_star(h));
    if (!(v > 0.0)) {
      throw UnsupportedMeasure("chi leaves a window of zero mass at h = " +
                               std::to_string(h));
    }
    return v;
  }

 private:
  ChiLaw chi_;
  std::size_t grid_;
};

/// R(n, p, h): chi-integral of t^{np} (1-t)^{n(1-p)} over the window
/// [p - h, p + h] divided by the same over its complement in [0, 1].
inline double df_ratio(const ChiLaw& chi, double n, double p, double h) {
  detail::validate_chi(chi);
  if (!(n >= 0.0) || !(p >= 0.0 && p <= 1.0) || !(h > 0.0)) {
    throw InvalidParameter("df_ratio needs n >= 0, p in [0,1], h > 0");
  }
  const double lo = p - h;
  const double hi = p + h;
  if (const auto* d = std::get_if<ChiDiscrete>(&chi)) {
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> lw(d->atoms.size());
    for (std::size_t k = 0; k < d->atoms.size(); ++k) {
      lw[k] = d->weights[k] > 0.0
                  ? std::log(d->weights[k]) - n * detail::bernoulli_kl(p, d->atoms[k])
                  : -std::numeric_limits<double>::infinity();
      top = std::max(top, lw[k]);
    }
    if (!std::isfinite(top)) throw NumericFailure("df_ratio underflow");
    long double in = 0.0L, out = 0.0L;
    for (std::size_t k = 0; k < d->atoms.size(); ++k) {
      const long double w = std::exp(static_cast<long double>(lw[k] - top));
      (d->atoms[k] >= lo && d->atoms[k] <= hi ? in : out) += w;
    }
    if (out == 0.0L) return std::numeric_limits<double>::infinity();
    return static_cast<double>(in / out);
  }
  double a = 1.0, b = 1.0;
  if (const auto* be = std::get_if<ChiBeta>(&chi)) {
    a = be->a;
    b = be->b;
  }
  // The tilted law is Beta(np + a, n(1-p) + b); the common normalizer
  // cancels in the ratio.
  const double A = n * p + a;
  const double B = n * (1.0 - p) + b;
  const double below = lo > 0.0 ? boost::math::ibeta(A, B, lo) : 0.0;
  const double above = hi < 1.0 ? boost::math::ibetac(A, B, hi) : 0.0;
  const double outside = below + above;
  if (outside == 0.0) return std::numeric_limits<double>::infinity();
  double inside = 0.0;
  if (lo <= 0.0 && hi >= 1.0) {
    inside = 1.0;
  } else if (lo <= 0.0) {
    inside = boost::math::ibeta(A, B, hi);
  } else if (hi >= 1.0) {
    inside = boost::math::ibetac(A, B, lo);
  } else {
    inside = 1.0 - outside;
    if (inside < 0.5) {
      inside = boost::math::ibeta(A, B, hi) - boost::math::ibeta(A, B, lo);
    }
  }
  if (!(inside > 0.0)) {
    throw NumericFailure("df_ratio numerator underflowed");
  }
  return inside / outside;
}

struct DfMomentBound {
  double h_opt = 0.0;
  double bound = 0.0;        // h + e^{-2 n h^2} / psi(h) at h_opt
  double ratio_bound = 0.0;  // h + 1 / R(n, phi_hat, h) at h_opt
};

/// Minimizes h + e^{-2 n h^2} / psi(h) over h in (0, 1/4): a log grid
/// followed by golden-section refinement.
inline DfMomentBound df_moment_bound(const DFProfile& prof, double n,
                                     double phi_hat) {
  if (!(n >= 1.0)) throw InvalidParameter("n must be >= 1");
  if (!(phi_hat >= 0.0 && phi_hat <= 1.0)) {
    throw InvalidParameter("phi_hat must lie in [0, 1]");
  }
  // Below h ~ 1e-4 the excess g - 2h^2 is lost to rounding and psi
  // vanishes; such h are far from the minimizer anyway.
  auto objective = [&](double h) {
    const double ps = prof.phi(prof.h_star(h));
    if (!(ps > 0.0)) return std::numeric_limits<double>::infinity();
    return h + std::exp(-2.0 * n * h * h) / ps;
  };
  constexpr int kGrid = 120;
  const double lmin = std::log(1e-4);
  const double lmax = std::log(0.25 * (1.0 - 1e-9));
  int arg = 0;
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k <= kGrid; ++k) {
    const double h = std::exp(lmin + (lmax - lmin) * k / kGrid);
    const double v = objective(h);
    if (v < best) {
      best = v;
      arg = k;
    }
  }
  const double step = (lmax - lmin) / kGrid;
  double a = lmin + std::max(0, arg - 1) * step;
  double b = lmin + std::min(kGrid, arg + 1) * step;
  const double r = 0.5 * (std::sqrt(5.0) - 1.0);
  double c = b - r * (b - a), d = a + r * (b - a);
  double fc = objective(std::exp(c)), fd = objective(std::exp(d));
  for (int i = 0; i < 60; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - r * (b - a);
      fc = objective(std::exp(c));
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + r * (b - a);
      fd = objective(std::exp(d));
    }
  }
  DfMomentBound out;
  out.h_opt = std::exp(lmin + arg * step);
  out.bound = best;
  const double hx = std::exp(fc < fd ? c : d);
  if (std::min(fc, fd) < best) {
    out.h_opt = hx;
    out.bound = std::min(fc, fd);
  }
  out.ratio_bound =
      out.h_opt + 1.0 / df_ratio(prof.chi(), n, phi_hat, out.h_opt);
  return out;
}

}  // namespace wpcr
