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

// Finitely supported probability measures, empirical measures, the named
// continuous sampling laws, and the operations on them used throughout:
// i.i.d. sampling, pushforward through a covering, cell masses.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "wpcr/error.hpp"
#include "wpcr/metric.hpp"
#include "wpcr/rng.hpp"

namespace wpcr {

inline constexpr double kDedupTolerance = 1e-12;

/// Finitely supported probability measure in canonical form: atoms sorted,
/// duplicates merged, zero-weight atoms dropped, weights summing to 1.
class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;

  /// Weights must be nonnegative and sum to 1 within 1e-9.
  DiscreteMeasure(std::vector<Point> support, std::vector<double> weights) {
    const double total = check_weights(support, weights);
    if (std::abs(total - 1.0) > 1e-9) {
      throw InvalidInput("weights must sum to 1 (got " +
                         std::to_string(total) + ")");
    }
    canonicalize(std::move(support), std::move(weights), total);
  }

  /// Normalizes an arbitrary positive finite mass vector.
  static DiscreteMeasure normalized(std::vector<Point> support,
                                    std::vector<double> masses) {
    const double total = check_weights(support, masses);
    if (!(total > 0.0)) throw InvalidInput("total mass must be positive");
    DiscreteMeasure m;
    m.canonicalize(std::move(support), std::move(masses), total);
    return m;
  }

  static DiscreteMeasure dirac(const Point& x) {
    return DiscreteMeasure({x}, {1.0});
  }

  static DiscreteMeasure uniform(std::vector<Point> support) {
    const std::size_t n = support.size();
    if (n == 0) throw InvalidInput("uniform measure needs atoms");
    return normalized(std::move(support), std::vector<double>(n, 1.0));
  }

  bool empty() const noexcept { return support_.empty(); }
  std::size_t size() const noexcept { return support_.size(); }
  const std::vector<Point>& support() const noexcept { return support_; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  template <class Pred>
  double mass_where(Pred&& pred) const {
    double m = 0.0;
    for (std::size_t i = 0; i < support_.size(); ++i) {
      if (pred(support_[i])) m += weights_[i];
    }
    return m;
  }

 private:
  static double check_weights(const std::vector<Point>& support,
                              const std::vector<double>& weights) {
    if (support.size() != weights.size()) {
      throw InvalidInput("support and weights differ in length");
    }
    if (support.empty()) throw InvalidInput("measure has empty support");
    long double total = 0.0L;
    for (double w : weights) {
      if (!(w >= 0.0) || !std::isfinite(w)) {
        throw InvalidInput("weights must be finite and nonnegative");
      }
      total += w;
    }
    return static_cast<double>(total);
  }

  static bool near(const Point& a, const Point& b) {
    if (a.dim() != b.dim()) return false;
    if (a.is_label()) return a.label_value() == b.label_value();
    for (std::size_t k = 0; k < a.dim(); ++k) {
      if (std::abs(a[k] - b[k]) > kDedupTolerance) return false;
    }
    return true;
  }

  void canonicalize(std::vector<Point> support, std::vector<double> weights,
                    double total) {
    std::vector<std::size_t> order(support.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a,
                                                     std::size_t b) {
      return support[a] < support[b];
    });
    std::vector<long double> acc;
    for (std::size_t idx : order) {
      if (weights[idx] == 0.0) continue;
      if (!support_.empty() && near(support_.back(), support[idx])) {
        acc.back() += weights[idx];
      } else {
        support_.push_back(support[idx]);
        acc.push_back(weights[idx]);
      }
    }
    weights_.resize(acc.size());
    for (std::size_t i = 0; i < acc.size(); ++i) {
      weights_[i] = static_cast<double>(acc[i] / total);
    }
  }

  std::vector<Point> support_;
  std::vector<double> weights_;
};

/// Equal-weight measure of an ordered sample; keeps the raw sample so that
/// per-observation operations (discretization, quotient distances) stay
/// available.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(std::vector<Point> sample)
      : sample_(std::move(sample)) {}

  std::size_t n() const noexcept { return sample_.size(); }
  bool empty() const noexcept { return sample_.empty(); }
  const std::vector<Point>& sample() const noexcept { return sample_; }

  DiscreteMeasure as_discrete() const {
    return DiscreteMeasure::uniform(sample_);
  }

 private:
  std::vector<Point> sample_;
};

// Named laws ---------------------------------------------------------------

/// Uniform law on the hypercube (Lebesgue) or on the labels of a finite space.
struct UniformLaw {};

/// Independent per-axis Gaussians truncated to [0,1].
struct TruncatedGaussianLaw {
  std::vector<double> mean;
  std::vector<double> sd;
};

/// atom_mass * atoms + (1 - atom_mass) * uniform.
struct AtomsUniformLaw {
  DiscreteMeasure atoms;
  double atom_mass = 0.0;
};

using Law =
    std::variant<DiscreteMeasure, UniformLaw, TruncatedGaussianLaw,
                 AtomsUniformLaw>;

inline bool is_discrete(const Law& law) {
  return std::holds_alternative<DiscreteMeasure>(law);
}

inline bool is_atomless(const Law& law) {
  return std::holds_alternative<UniformLaw>(law) ||
         std::holds_alternative<TruncatedGaussianLaw>(law);
}

namespace detail {

inline double std_normal_cdf(double z) {
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

inline double std_normal_quantile(double p) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

struct TruncatedAxis {
  double mean;
  double sd;
  double lo_cdf;
  double mass;

  TruncatedAxis(double m, double s)
      : mean(m), sd(s), lo_cdf(std_normal_cdf(-m / s)),
        mass(std_normal_cdf((1.0 - m) / s) - std_normal_cdf(-m / s)) {}

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return (std_normal_cdf((x - mean) / sd) - lo_cdf) / mass;
  }

  double quantile(double t) const {
    const double x = mean + sd * std_normal_quantile(lo_cdf + t * mass);
    return std::clamp(x, 0.0, 1.0);
  }
};

}  // namespace detail

/// Checks that `law` is a probability law on `space`.
inline void validate_law(const Law& law, const MetricSpace& space) {
  auto check_atoms = [&](const DiscreteMeasure& m) {
    if (m.empty()) throw InvalidParameter("discrete law has no atoms");
    for (const Point& x : m.support()) {
      if (!space.contains(x)) {
        throw InvalidParameter("law has an atom outside the space");
      }
    }
  };
  std::visit(
      [&](const auto& l) {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          check_atoms(l);
        } else if constexpr (std::is_same_v<T, TruncatedGaussianLaw>) {
          if (!space.is_hypercube()) {
            throw InvalidParameter("truncated Gaussian needs a hypercube");
          }
          if (l.mean.size() != space.dim() || l.sd.size() != space.dim()) {
            throw InvalidParameter("truncated Gaussian needs one mean and sd "
                                   "per axis");
          }
          for (double s : l.sd) {
            if (!(s > 0.0)) throw InvalidParameter("sd must be positive");
          }
        } else if constexpr (std::is_same_v<T, AtomsUniformLaw>) {
          check_atoms(l.atoms);
          if (!(l.atom_mass >= 0.0 && l.atom_mass <= 1.0)) {
            throw InvalidParameter("atom_mass must lie in [0, 1]");
          }
        }
      },
      law);
}

namespace detail {

inline Point sample_uniform(const MetricSpace& space, SeededRng& rng) {
  if (space.is_finite()) return Point::label(rng.index(space.size()));
  std::array<double, kMaxDim> c{};
  for (std::size_t a = 0; a < space.dim(); ++a) c[a] = rng.uniform();
  return Point(std::span<const double>(c.data(), space.dim()));
}

inline Point sample_atoms(const DiscreteMeasure& m, SeededRng& rng) {
  double u = rng.uniform();
  const auto& w = m.weights();
  for (std::size_t i = 0; i + 1 < w.size(); ++i) {
    if (u < w[i]) return m.support()[i];
    u -= w[i];
  }
  return m.support().back();
}

}  // namespace detail

inline Point sample_from(const Law& law, const MetricSpace& space,
                         SeededRng& rng) {
  return std::visit(
      [&](const auto& l) -> Point {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          return detail::sample_atoms(l, rng);
        } else if constexpr (std::is_same_v<T, UniformLaw>) {
          return detail::sample_uniform(space, rng);
        } else if constexpr (std::is_same_v<T, TruncatedGaussianLaw>) {
          std::array<double, kMaxDim> c{};
          for (std::size_t a = 0; a < space.dim(); ++a) {
            c[a] = detail::TruncatedAxis(l.mean[a], l.sd[a])
                       .quantile(rng.uniform());
          }
          return Point(std::span<const double>(c.data(), space.dim()));
        } else {
          if (rng.uniform() < l.atom_mass) {
            return detail::sample_atoms(l.atoms, rng);
          }
          return detail::sample_uniform(space, rng);
        }
      },
      law);
}

/// n i.i.d. draws from `law`; deterministic given the generator state.
inline EmpiricalMeasure sample_iid(const Law& law, const MetricSpace& space,
                                   std::size_t n, SeededRng& rng) {
  if (n == 0) throw InvalidParameter("sample size must be >= 1");
  validate_law(law, space);
  std::vector<Point> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) xs.push_back(sample_from(law, space, rng));
  return EmpiricalMeasure(std::move(xs));
}

/// law(A_j), analytic for the named laws on grid cells.
inline double cell_mass(const Law& law, const DeltaCovering& cov,
                        std::size_t j) {
  const MetricSpace& space = cov.space();
  auto uniform_mass = [&]() {
    if (space.is_finite()) {
      return static_cast<double>(cov.members(j).size()) /
             static_cast<double>(space.size());
    }
    return std::pow(1.0 / static_cast<double>(cov.cells_per_axis()),
                    static_cast<double>(space.dim()));
  };
  auto atoms_mass = [&](const DiscreteMeasure& m) {
    return m.mass_where([&](const Point& x) { return cov.cell_of(x) == j; });
  };
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          return atoms_mass(l);
        } else if constexpr (std::is_same_v<T, UniformLaw>) {
          return uniform_mass();
        } else if constexpr (std::is_same_v<T, TruncatedGaussianLaw>) {
          const auto [lo, hi] = cov.box(j);
          double m = 1.0;
          for (std::size_t a = 0; a < space.dim(); ++a) {
            const detail::TruncatedAxis ax(l.mean[a], l.sd[a]);
            m *= ax.cdf(hi[a]) - ax.cdf(lo[a]);
          }
          return m;
        } else {
          return l.atom_mass * atoms_mass(l.atoms) +
                 (1.0 - l.atom_mass) * uniform_mass();
        }
      },
      law);
}

inline std::vector<double> cell_masses(const Law& law,
                                       const DeltaCovering& cov) {
  std::vector<double> out(cov.size());
  for (std::size_t j = 0; j < cov.size(); ++j) out[j] = cell_mass(law, cov, j);
  return out;
}

/// Draw from law(. | A_j). Requires law(A_j) > 0.
inline Point sample_in_cell(const Law& law, const DeltaCovering& cov,
                            std::size_t j, SeededRng& rng) {
  const MetricSpace& space = cov.space();
  auto uniform_in_cell = [&]() -> Point {
    if (space.is_finite()) {
      const auto& mem = cov.members(j);
      return Point::label(mem[rng.index(mem.size())]);
    }
    const auto [lo, hi] = cov.box(j);
    std::array<double, kMaxDim> c{};
    for (std::size_t a = 0; a < space.dim(); ++a) {
      c[a] = rng.uniform(lo[a], hi[a]);
    }
    return Point(std::span<const double>(c.data(), space.dim()));
  };
  auto atoms_in_cell = [&](const DiscreteMeasure& m) -> Point {
    const double total =
        m.mass_where([&](const Point& x) { return cov.cell_of(x) == j; });
    if (!(total > 0.0)) throw InvalidInput("cell carries no atom mass");
    double u = rng.uniform() * total;
    const Point* last = nullptr;
    for (std::size_t i = 0; i < m.size(); ++i) {
      if (cov.cell_of(m.support()[i]) != j) continue;
      last = &m.support()[i];
      if (u < m.weights()[i]) return *last;
      u -= m.weights()[i];
    }
    return *last;
  };
  return std::visit(
      [&](const auto& l) -> Point {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          return atoms_in_cell(l);
        } else if constexpr (std::is_same_v<T, UniformLaw>) {
          return uniform_in_cell();
        } else if constexpr (std::is_same_v<T, TruncatedGaussianLaw>) {
          const auto [lo, hi] = cov.box(j);
          std::array<double, kMaxDim> c{};
          for (std::size_t a = 0; a < space.dim(); ++a) {
            const detail::TruncatedAxis ax(l.mean[a], l.sd[a]);
            const double flo = ax.cdf(lo[a]);
            const double fhi = ax.cdf(hi[a]);
            c[a] = std::clamp(ax.quantile(flo + rng.uniform() * (fhi - flo)),
                              lo[a], std::nextafter(hi[a], lo[a]));
          }
          return Point(std::span<const double>(c.data(), space.dim()));
        } else {
          const double atoms =
              l.atom_mass * cell_mass(Law(l.atoms), cov, j);
          const double unif =
              (1.0 - l.atom_mass) * cell_mass(UniformLaw{}, cov, j);
          if (rng.uniform() * (atoms + unif) < atoms) {
            return atoms_in_cell(l.atoms);
          }
          return uniform_in_cell();
        }
      },
      law);
}

/// CDF of a law on [0,1] (1-D hypercube only).
inline double cdf_1d(const Law& law, double x) {
  auto atoms_cdf = [&](const DiscreteMeasure& m) {
    return m.mass_where([&](const Point& p) { return p[0] <= x; });
  };
  auto unif = [&] { return std::clamp(x, 0.0, 1.0); };
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          return atoms_cdf(l);
        } else if constexpr (std::is_same_v<T, UniformLaw>) {
          return unif();
        } else if constexpr (std::is_same_v<T, TruncatedGaussianLaw>) {
          return detail::TruncatedAxis(l.mean[0], l.sd[0]).cdf(x);
        } else {
          return l.atom_mass * atoms_cdf(l.atoms) + (1.0 - l.atom_mass) * unif();
        }
      },
      law);
}

/// Left-continuous quantile inf{x : F(x) >= t} of a law on [0,1].
inline double quantile_1d(const Law& law, double t) {
  auto atoms_q = [&](const DiscreteMeasure& m) {
    double acc = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) {
      acc += m.weights()[i];
      if (acc >= t) return m.support()[i][0];
    }
    return m.support().back()[0];
  };
  return std::visit(
      [&](const auto& l) -> double {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, DiscreteMeasure>) {
          return atoms_q(l);
        } else if constexpr (std::is_same_v<T, UniformLaw>) {
          return std::clamp(t, 0.0, 1.0);
        } else if constexpr (std::is_same_v<T, TruncatedGaussianLaw>) {
          return detail::TruncatedAxis(l.mean[0], l.sd[0]).quantile(t);
        } else {
          // Bisection on the mixed CDF.
          double lo = 0.0;
          double hi = 1.0;
          for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (cdf_1d(law, mid) >= t) hi = mid; else lo = mid;
          }
          return hi;
        }
      },
      law);
}

/// Cell-centre discretization of a law on a grid with `per_axis` cells per
/// axis (identity for discrete laws and finite spaces' uniform law).
inline DiscreteMeasure discretize_law(const Law& law, const MetricSpace& space,
                                      std::size_t per_axis) {
  if (const auto* m = std::get_if<DiscreteMeasure>(&law)) return *m;
  if (space.is_finite()) {
    std::vector<Point> pts;
    std::vector<double> w;
    const double u = 1.0 / static_cast<double>(space.size());
    const auto* a = std::get_if<AtomsUniformLaw>(&law);
    const double keep = a ? 1.0 - a->atom_mass : 1.0;
    for (std::size_t i = 0; i < space.size(); ++i) {
      pts.push_back(Point::label(i));
      w.push_back(keep * u);
    }
    if (a) {
      for (std::size_t i = 0; i < a->atoms.size(); ++i) {
        pts.push_back(a->atoms.support()[i]);
        w.push_back(a->atom_mass * a->atoms.weights()[i]);
      }
    }
    return DiscreteMeasure::normalized(std::move(pts), std::move(w));
  }
  const auto cov = DeltaCovering::grid(space, per_axis);
  std::vector<Point> pts;
  std::vector<double> w;
  pts.reserve(cov.size());
  w.reserve(cov.size());
  for (std::size_t j = 0; j < cov.size(); ++j) {
    pts.push_back(cov.representative(j));
    w.push_back(cell_mass(law, cov, j));
  }
  if (const auto* a = std::get_if<AtomsUniformLaw>(&law)) {
    // Keep the atoms exact rather than smearing them onto cell centres.
    for (std::size_t j = 0; j < cov.size(); ++j) {
      w[j] = (1.0 - a->atom_mass) * cell_mass(UniformLaw{}, cov, j);
    }
    for (std::size_t i = 0; i < a->atoms.size(); ++i) {
      pts.push_back(a->atoms.support()[i]);
      w.push_back(a->atom_mass * a->atoms.weights()[i]);
    }
  }
  return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

/// Sum_j measure(A_j) delta_{a_j}.
inline DiscreteMeasure pushforward(const DiscreteMeasure& measure,
                                   const DeltaCovering& cov) {
  std::map<std::size_t, double> by_cell;
  for (std::size_t i = 0; i < measure.size(); ++i) {
    by_cell[cov.cell_of(measure.support()[i])] += measure.weights()[i];
  }
  std::vector<Point> pts;
  std::vector<double> w;
  pts.reserve(by_cell.size());
  w.reserve(by_cell.size());
  for (const auto& [j, m] : by_cell) {
    pts.push_back(cov.representative(j));
    w.push_back(m);
  }
  return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

/// Finite mixture sum_k w_k * m_k of discrete measures.
inline DiscreteMeasure mix(std::span<const double> coefficients,
                           std::span<const DiscreteMeasure> parts) {
  if (coefficients.size() != parts.size() || parts.empty()) {
    throw InvalidInput("mixture needs one coefficient per component");
  }
  std::vector<Point> pts;
  std::vector<double> w;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    if (coefficients[k] < 0.0) throw InvalidInput("negative mixture weight");
    for (std::size_t i = 0; i < parts[k].size(); ++i) {
      pts.push_back(parts[k].support()[i]);
      w.push_back(coefficients[k] * parts[k].weights()[i]);
    }
  }
  return DiscreteMeasure::normalized(std::move(pts), std::move(w));
}

/// Finite mixture sum_k coefficient_k * part_k of laws; the predictive of a
/// Dirichlet process with an atomless base measure is the typical instance.
struct Mixture {
  std::vector<double> coefficients;
  std::vector<Law> parts;

  bool all_discrete() const {
    return std::all_of(parts.begin(), parts.end(),
                       [](const Law& l) { return is_discrete(l); });
  }

  /// Collapses to one DiscreteMeasure; throws if a part is not discrete.
  DiscreteMeasure as_discrete() const {
    std::vector<DiscreteMeasure> ms;
    for (const Law& l : parts) {
      const auto* m = std::get_if<DiscreteMeasure>(&l);
      if (!m) throw UnsupportedMeasure("mixture has an atomless component");
      ms.push_back(*m);
    }
    return mix(coefficients, ms);
  }
};

inline double cdf_1d(const Mixture& m, double x) {
  double f = 0.0;
  for (std::size_t k = 0; k < m.parts.size(); ++k) {
    if (m.coefficients[k] > 0.0) f += m.coefficients[k] * cdf_1d(m.parts[k], x);
  }
  return f;
}

}  // namespace wpcr
