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

#include "wpcr/metric.hpp"
#include "wpcr/rng.hpp"

namespace wpcr {
namespace {

MetricSpace three_points() {
  return MetricSpace::finite({"a", "b", "c"},
                             {{0, 1, 2}, {1, 0, 1}, {2, 1, 0}});
}

TEST(MetricSpace, HypercubeDiameter) {
  EXPECT_DOUBLE_EQ(MetricSpace::hypercube(1).diameter(), 1.0);
  EXPECT_DOUBLE_EQ(MetricSpace::hypercube(4).diameter(), 2.0);
  EXPECT_THROW(MetricSpace::hypercube(0), InvalidParameter);
}

TEST(MetricSpace, FiniteValidation) {
  EXPECT_NO_THROW(three_points());
  EXPECT_THROW(MetricSpace::finite({"a", "b"}, {{0, 1}, {2, 0}}),
               InvalidParameter);
  EXPECT_THROW(MetricSpace::finite({"a", "b"}, {{1, 1}, {1, 0}}),
               InvalidParameter);
  EXPECT_THROW(MetricSpace::finite({"a", "b", "c"},
                                   {{0, 1, 5}, {1, 0, 1}, {5, 1, 0}}),
               InvalidParameter);
  EXPECT_DOUBLE_EQ(three_points().diameter(), 2.0);
}

TEST(MetricSpace, AxiomsOnSampledTriples) {
  const auto s = MetricSpace::hypercube(3);
  SeededRng rng(7);
  auto draw = [&] {
    return Point{rng.uniform(), rng.uniform(), rng.uniform()};
  };
  for (int k = 0; k < 1000; ++k) {
    const Point x = draw(), y = draw(), z = draw();
    EXPECT_EQ(s.metric(x, x), 0.0);
    EXPECT_EQ(s.metric(x, y), s.metric(y, x));
    EXPECT_LE(s.metric(x, z), s.metric(x, y) + s.metric(y, z) + 1e-15);
  }
}

TEST(DeltaCovering, OneDimensionalQuarter) {
  const auto cov = build_delta_covering(MetricSpace::hypercube(1), 0.25);
  ASSERT_EQ(cov.size(), 2u);
  EXPECT_DOUBLE_EQ(cov.representative(0)[0], 0.25);
  EXPECT_DOUBLE_EQ(cov.representative(1)[0], 0.75);
  EXPECT_EQ(cov.cell_of(Point{0.4999}), 0u);
  EXPECT_EQ(cov.cell_of(Point{0.5}), 1u);
  EXPECT_EQ(cov.cell_of(Point{1.0}), 1u);
  EXPECT_DOUBLE_EQ(cov.map(Point{0.3})[0], 0.25);
}

TEST(DeltaCovering, Errors) {
  const auto s = MetricSpace::hypercube(2);
  EXPECT_THROW(build_delta_covering(s, 0.0), InvalidParameter);
  EXPECT_THROW(build_delta_covering(s, -1.0), InvalidParameter);
  EXPECT_THROW(build_delta_covering(s, 10.0), InvalidParameter);
  const auto cov = build_delta_covering(s, 0.1);
  EXPECT_THROW(cov.cell_of(Point{1.5, 0.2}), InvalidInput);
  EXPECT_THROW(cov.cell_of(Point{0.5}), InvalidInput);
}

TEST(DeltaCovering, FiniteSpaces) {
  const auto s = three_points();
  const auto whole = build_delta_covering(s, 2.0);
  EXPECT_EQ(whole.size(), 1u);
  const auto single = build_delta_covering(s, 0.5);
  EXPECT_EQ(single.size(), 3u);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_EQ(single.representative(j).label_value(), j);
  }
  const auto mid = build_delta_covering(s, 1.0);
  EXPECT_EQ(mid.size(), 2u);  // {a, b}, {c}
  EXPECT_EQ(mid.cell_of(Point::label(1)), 0u);
}

TEST(DeltaCovering, PartitionAndContraction) {
  SeededRng rng(11);
  for (std::size_t dim : {1u, 2u, 3u}) {
    const auto s = MetricSpace::hypercube(dim);
    for (double delta : {0.3, 0.1, 0.037}) {
      const auto cov = build_delta_covering(s, delta);
      for (int k = 0; k < 10000 / static_cast<int>(dim); ++k) {
        std::vector<double> c(dim);
        for (double& v : c) v = rng.uniform();
        const Point x(c);
        const std::size_t j = cov.cell_of(x);
        ASSERT_LT(j, cov.size());
        EXPECT_TRUE(cov.contains(j, x));
        EXPECT_FALSE(cov.contains((j + 1) % cov.size(), x) &&
                     cov.size() > 1);
        EXPECT_LE(s.metric(x, cov.map(x)), 2.0 * delta);
        EXPECT_TRUE(cov.contains(j, cov.representative(j)));
      }
      // Cell diameter is the box diagonal.
      const double side = 1.0 / static_cast<double>(cov.cells_per_axis());
      EXPECT_LE(side * std::sqrt(static_cast<double>(dim)), 2.0 * delta);
    }
  }
}

TEST(DeltaCovering, CoveringNumberScaling) {
  const auto s = MetricSpace::hypercube(2);
  const std::vector<double> deltas = {0.1, 0.05, 0.025};
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (double d : deltas) {
    const double x = std::log(1.0 / d);
    const double y = std::log(static_cast<double>(
        build_delta_covering(s, d).size()));
    sx += x; sy += y; sxx += x * x; sxy += x * y;
  }
  const double k = static_cast<double>(deltas.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  EXPECT_NEAR(slope, 2.0, 0.2);
}

TEST(Discretize, CountsAndFixedPoints) {
  const auto cov = build_delta_covering(MetricSpace::hypercube(1), 0.25);
  const std::vector<Point> xs = {Point{0.1}, Point{0.6}, Point{0.9}};
  const auto counts = cell_counts(cov, xs);
  EXPECT_EQ(counts, (std::vector<std::size_t>{1, 2}));
  EXPECT_EQ(cell_counts(cov, std::vector<Point>{}),
            (std::vector<std::size_t>{0, 0}));
  const auto eta = discretize(cov, xs);
  EXPECT_DOUBLE_EQ(eta[0][0], 0.25);
  EXPECT_DOUBLE_EQ(eta[2][0], 0.75);
  EXPECT_EQ(cov.map(cov.representative(1)), cov.representative(1));
  EXPECT_THROW(discretize(cov, std::vector<Point>{Point{2.0}}), InvalidInput);
}

}  // namespace
}  // namespace wpcr
