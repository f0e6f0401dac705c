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

// Concrete totally bounded metric spaces (the unit hypercube with the
// Euclidean metric, and finite spaces given by a distance matrix), their
// delta-partitions and the discretization map sending a point to the
// representative of its cell.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "wpcr/error.hpp"

namespace wpcr {

inline constexpr std::size_t kMaxDim = 8;

/// A point of either space family. Hypercube points carry up to kMaxDim
/// inline coordinates; finite-space points carry an integer label. The tag
/// is `dim() == 0` for labels.
class Point {
 public:
  Point() = default;

  Point(std::initializer_list<double> coords)
      : Point(std::span<const double>(coords.begin(), coords.size())) {}

  explicit Point(std::span<const double> coords) {
    if (coords.empty() || coords.size() > kMaxDim) {
      throw InvalidInput("point dimension must be in [1, " +
                         std::to_string(kMaxDim) + "]");
    }
    dim_ = static_cast<std::uint32_t>(coords.size());
    std::copy(coords.begin(), coords.end(), x_.begin());
  }

  static Point scalar(double x) { return Point{x}; }

  static Point label(std::size_t id) {
    Point p;
    p.label_ = id;
    return p;
  }

  bool is_label() const noexcept { return dim_ == 0; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t label_value() const noexcept { return label_; }
  std::span<const double> coords() const noexcept { return {x_.data(), dim_}; }
  double operator[](std::size_t a) const noexcept { return x_[a]; }

  friend bool operator==(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return false;
    if (a.dim_ == 0) return a.label_ == b.label_;
    return std::equal(a.x_.begin(), a.x_.begin() + a.dim_, b.x_.begin());
  }

  /// Lexicographic order; labels sort before coordinate points.
  friend bool operator<(const Point& a, const Point& b) noexcept {
    if (a.dim_ != b.dim_) return a.dim_ < b.dim_;
    if (a.dim_ == 0) return a.label_ < b.label_;
    return std::lexicographical_compare(a.x_.begin(), a.x_.begin() + a.dim_,
                                        b.x_.begin(), b.x_.begin() + b.dim_);
  }

 private:
  std::array<double, kMaxDim> x_{};
  std::uint32_t dim_ = 0;
  std::size_t label_ = 0;
};

/// Totally bounded metric space: unit hypercube [0,1]^dim with the Euclidean
/// metric, or a finite set with a symmetric distance matrix. Copies are cheap.
class MetricSpace {
 public:
  enum class Kind { kHypercube, kFinite };

  static MetricSpace hypercube(std::size_t dim) {
    if (dim == 0 || dim > kMaxDim) {
      throw InvalidParameter("hypercube dimension must be in [1, " +
                             std::to_string(kMaxDim) + "]");
    }
    MetricSpace s;
    s.kind_ = Kind::kHypercube;
    s.dim_ = dim;
    s.diameter_ = std::sqrt(static_cast<double>(dim));
    return s;
  }

  static MetricSpace finite(std::vector<std::string> labels,
                            std::vector<std::vector<double>> dist) {
    const std::size_t n = labels.size();
    if (n == 0) throw InvalidParameter("finite space needs at least one point");
    if (dist.size() != n) {
      throw InvalidParameter("distance matrix size does not match labels");
    }
    double diam = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (dist[i].size() != n) {
        throw InvalidParameter("distance matrix must be square");
      }
      if (dist[i][i] != 0.0) {
        throw InvalidParameter("distance matrix diagonal must be zero");
      }
      for (std::size_t j = 0; j < n; ++j) {
        const double d = dist[i][j];
        if (!(d >= 0.0) || !std::isfinite(d)) {
          throw InvalidParameter("distances must be finite and nonnegative");
        }
        if (d != dist[j][i]) {
          throw InvalidParameter("distance matrix must be symmetric");
        }
        diam = std::max(diam, d);
      }
    }
    const double slack = 1e-12 * std::max(1.0, diam);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) {
        for (std::size_t k = 0; k < n; ++k) {
          if (dist[i][k] > dist[i][j] + dist[j][k] + slack) {
            throw InvalidParameter("distance matrix violates the triangle "
                                   "inequality at (" + std::to_string(i) +
                                   ", " + std::to_string(j) + ", " +
                                   std::to_string(k) + ")");
          }
        }
      }
    }
    MetricSpace s;
    s.kind_ = Kind::kFinite;
    s.finite_ = std::make_shared<const FiniteData>(
        FiniteData{std::move(labels), std::move(dist)});
    s.diameter_ = diam;
    return s;
  }

  Kind kind() const noexcept { return kind_; }
  bool is_hypercube() const noexcept { return kind_ == Kind::kHypercube; }
  bool is_finite() const noexcept { return kind_ == Kind::kFinite; }

  /// Hypercube dimension; 0 for finite spaces.
  std::size_t dim() const noexcept { return dim_; }

  /// Number of points of a finite space; 0 for the hypercube.
  std::size_t size() const noexcept {
    return finite_ ? finite_->labels.size() : 0;
  }

  const std::vector<std::string>& labels() const {
    static const std::vector<std::string> kEmpty;
    return finite_ ? finite_->labels : kEmpty;
  }

  const std::vector<std::vector<double>>& distances() const {
    static const std::vector<std::vector<double>> kEmpty;
    return finite_ ? finite_->dist : kEmpty;
  }

  double diameter() const noexcept { return diameter_; }

  bool contains(const Point& x) const noexcept {
    if (is_finite()) return x.is_label() && x.label_value() < size();
    if (x.dim() != dim_) return false;
    for (double c : x.coords()) {
      if (!(c >= 0.0 && c <= 1.0)) return false;
    }
    return true;
  }

  void require(const Point& x) const {
    if (!contains(x)) throw InvalidInput("point lies outside the space");
  }

  double metric(const Point& x, const Point& y) const {
    if (is_finite()) return finite_->dist[x.label_value()][y.label_value()];
    if (dim_ == 1) return std::abs(x[0] - y[0]);
    double s = 0.0;
    for (std::size_t a = 0; a < dim_; ++a) {
      const double d = x[a] - y[a];
      s += d * d;
    }
    return std::sqrt(s);
  }

 private:
  struct FiniteData {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> dist;
  };

  Kind kind_ = Kind::kHypercube;
  std::size_t dim_ = 0;
  double diameter_ = 0.0;
  std::shared_ptr<const FiniteData> finite_;
};

/// Partition {A_j} of the space into N cells of diameter at most 2*delta,
/// with one representative per cell. Immutable once built.
///
/// Hypercube cells are the half-open boxes of a uniform grid with k cells per
/// axis (the upper face of the cube is closed), numbered with axis 0 varying
/// fastest; representatives are box centres. Finite-space cells are built
/// greedily in label order and represented by their smallest label.
class DeltaCovering {
 public:
  const MetricSpace& space() const noexcept { return space_; }
  double delta() const noexcept { return delta_; }
  std::size_t size() const noexcept { return size_; }

  /// Cells per axis of a hypercube grid (0 for finite spaces).
  std::size_t cells_per_axis() const noexcept { return per_axis_; }

  /// Index l(x) of the cell containing x.
  std::size_t cell_of(const Point& x) const {
    space_.require(x);
    if (space_.is_finite()) return finite_cell_[x.label_value()];
    std::size_t j = 0;
    std::size_t stride = 1;
    for (std::size_t a = 0; a < space_.dim(); ++a) {
      j += axis_index(x[a]) * stride;
      stride *= per_axis_;
    }
    return j;
  }

  bool contains(std::size_t j, const Point& x) const {
    return space_.contains(x) && cell_of(x) == j;
  }

  Point representative(std::size_t j) const {
    if (space_.is_finite()) return Point::label(finite_rep_[j]);
    std::array<double, kMaxDim> c{};
    for (std::size_t a = 0; a < space_.dim(); ++a) {
      const std::size_t i = j % per_axis_;
      j /= per_axis_;
      c[a] = (static_cast<double>(i) + 0.5) / static_cast<double>(per_axis_);
    }
    return Point(std::span<const double>(c.data(), space_.dim()));
  }

  /// Discretization map x -> representative of the cell of x.
  Point map(const Point& x) const { return representative(cell_of(x)); }

  /// Lower and upper corners of hypercube cell j.
  std::pair<std::vector<double>, std::vector<double>> box(std::size_t j) const {
    std::vector<double> lo(space_.dim());
    std::vector<double> hi(space_.dim());
    const double k = static_cast<double>(per_axis_);
    for (std::size_t a = 0; a < space_.dim(); ++a) {
      const std::size_t i = j % per_axis_;
      j /= per_axis_;
      lo[a] = static_cast<double>(i) / k;
      hi[a] = static_cast<double>(i + 1) / k;
    }
    return {lo, hi};
  }

  /// Labels belonging to finite-space cell j.
  const std::vector<std::size_t>& members(std::size_t j) const {
    return finite_members_.at(j);
  }

  /// Uniform grid with `per_axis` cells per axis; delta is set to half the
  /// cell diameter.
  static DeltaCovering grid(const MetricSpace& space, std::size_t per_axis) {
    if (!space.is_hypercube()) {
      throw InvalidParameter("grid coverings exist only for the hypercube");
    }
    if (per_axis == 0) throw InvalidParameter("cells per axis must be >= 1");
    double n = 1.0;
    for (std::size_t a = 0; a < space.dim(); ++a) {
      n *= static_cast<double>(per_axis);
    }
    if (n > 1e8) throw InvalidParameter("covering would exceed 1e8 cells");
    DeltaCovering c;
    c.space_ = space;
    c.per_axis_ = per_axis;
    c.size_ = static_cast<std::size_t>(n);
    c.delta_ = 0.5 * space.diameter() / static_cast<double>(per_axis);
    return c;
  }

  friend DeltaCovering build_delta_covering(const MetricSpace& space,
                                            double delta);

 private:
  std::size_t axis_index(double x) const noexcept {
    const auto i = static_cast<std::size_t>(x * static_cast<double>(per_axis_));
    return std::min(i, per_axis_ - 1);
  }

  MetricSpace space_;
  double delta_ = 0.0;
  std::size_t size_ = 0;
  std::size_t per_axis_ = 0;
  std::vector<std::size_t> finite_cell_;
  std::vector<std::size_t> finite_rep_;
  std::vector<std::vector<std::size_t>> finite_members_;
};

/// Builds a partition with cell diameters at most 2*delta. For the hypercube
/// the per-axis cell count ceil(sqrt(dim) / (2 delta)) is rounded up, so the
/// bound is never violated. For finite spaces each new cell collects the
/// unassigned points within delta of its seed, so delta below the smallest
/// positive distance yields singleton cells.
inline DeltaCovering build_delta_covering(const MetricSpace& space,
                                          double delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw InvalidParameter("delta must be positive and finite");
  }
  if (space.is_hypercube()) {
    if (delta > space.diameter()) {
      throw InvalidParameter("delta exceeds the diameter of the space");
    }
    const double k = std::ceil(space.diameter() / (2.0 * delta));
    DeltaCovering c = DeltaCovering::grid(space, static_cast<std::size_t>(k));
    c.delta_ = delta;
    return c;
  }
  if (space.diameter() > 0.0 && delta > space.diameter()) {
    throw InvalidParameter("delta exceeds the diameter of the space");
  }
  const std::size_t n = space.size();
  const auto& d = space.distances();
  DeltaCovering c;
  c.space_ = space;
  c.delta_ = delta;
  c.finite_cell_.assign(n, n);
  for (std::size_t seed = 0; seed < n; ++seed) {
    if (c.finite_cell_[seed] != n) continue;
    const std::size_t j = c.finite_rep_.size();
    c.finite_rep_.push_back(seed);
    c.finite_members_.emplace_back();
    for (std::size_t x = seed; x < n; ++x) {
      if (c.finite_cell_[x] == n && d[seed][x] <= delta) {
        c.finite_cell_[x] = j;
        c.finite_members_[j].push_back(x);
      }
    }
  }
  c.size_ = c.finite_rep_.size();
  return c;
}

/// Componentwise discretization eta_i = T(xi_i).
inline std::vector<Point> discretize(const DeltaCovering& cov,
                                     std::span<const Point> sample) {
  std::vector<Point> out;
  out.reserve(sample.size());
  for (const Point& x : sample) out.push_back(cov.map(x));
  return out;
}

/// nu(j) = #{i : sample_i in A_j}.
inline std::vector<std::size_t> cell_counts(const DeltaCovering& cov,
                                            std::span<const Point> sample) {
  std::vector<std::size_t> counts(cov.size(), 0);
  for (const Point& x : sample) ++counts[cov.cell_of(x)];
  return counts;
}

}  // namespace wpcr
