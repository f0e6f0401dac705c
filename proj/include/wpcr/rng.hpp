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

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

namespace wpcr {

namespace detail {

// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

}  // namespace detail

/// Counter-based generator: the k-th output is a pure function of
/// (seed, stream, k), so replications keyed by stream id reproduce the same
/// draws regardless of which worker runs them or in what order.
///
/// All variate generators are implemented here rather than borrowed from
/// <random>, whose distribution algorithms are implementation-defined.
class SeededRng {
 public:
  using result_type = std::uint64_t;

  explicit SeededRng(std::uint64_t seed = 0, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream),
        key_(detail::mix64(seed ^ detail::mix64(stream + detail::kGolden))) {}

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }
  std::uint64_t counter() const noexcept { return counter_; }

  /// Independent child stream; `id` is hashed together with this stream id.
  SeededRng substream(std::uint64_t id) const {
    return SeededRng(seed_, detail::mix64(stream_ * detail::kGolden + id + 1));
  }

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    ++counter_;
    return detail::mix64(key_ + counter_ * detail::kGolden);
  }

  /// Uniform on the open interval (0, 1).
  double uniform() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * uniform();
  }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) noexcept {
    return static_cast<std::size_t>(uniform() * static_cast<double>(n)) %
           (n == 0 ? 1 : n);
  }

  double normal() noexcept {
    // Box-Muller without caching the second variate.
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential() noexcept { return -std::log(uniform()); }

  /// log of a Gamma(shape, 1) variate. Working in logs keeps tiny shapes
  /// (e.g. q * H(A) for a small cell) from underflowing to zero.
  double log_gamma_variate(double shape) noexcept {
    if (shape < 1.0) {
      // Gamma(a) = Gamma(a + 1) * U^(1/a)
      const double boosted = log_gamma_variate(shape + 1.0);
      return boosted + std::log(uniform()) / shape;
    }
    // Marsaglia-Tsang.
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = 0.0;
      double v = 0.0;
      do {
        x = normal();
        v = 1.0 + c * x;
      } while (v <= 0.0);
      v = v * v * v;
      const double u = uniform();
      if (u < 1.0 - 0.0331 * x * x * x * x ||
          std::log(u) < 0.5 * x * x + d * (1.0 - v + std::log(v))) {
        return std::log(d * v);
      }
    }
  }

  double gamma(double shape) noexcept {
    return std::exp(log_gamma_variate(shape));
  }

  double beta(double a, double b) noexcept {
    const double la = log_gamma_variate(a);
    const double lb = log_gamma_variate(b);
    const double m = std::max(la, lb);
    const double ea = std::exp(la - m);
    const double eb = std::exp(lb - m);
    return ea / (ea + eb);
  }

  /// Dirichlet draw; entries with zero concentration get weight zero.
  std::vector<double> dirichlet(std::span<const double> concentration) {
    std::vector<double> logs(concentration.size(),
                             -std::numeric_limits<double>::infinity());
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < concentration.size(); ++j) {
      if (concentration[j] > 0.0) {
        logs[j] = log_gamma_variate(concentration[j]);
        top = std::max(top, logs[j]);
      }
    }
    std::vector<double> out(concentration.size(), 0.0);
    double total = 0.0;
    for (std::size_t j = 0; j < out.size(); ++j) {
      if (concentration[j] > 0.0) {
        out[j] = std::exp(logs[j] - top);
        total += out[j];
      }
    }
    for (double& w : out) w /= total;
    return out;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace wpcr
