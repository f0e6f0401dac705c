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

// Globally adaptive Gauss-Kronrod (7/15) integration on finite intervals.
// The panel with the largest error estimate is bisected until the summed
// estimate meets max(abs_tol, rel_tol * |I|) or the panel budget runs out.

#pragma once

#include <algorithm>
#include <cmath>
#include <queue>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "wpcr/error.hpp"

namespace wpcr {

struct QuadratureOptions {
  double rel_tol = 1e-10;
  double abs_tol = 0.0;
  std::size_t max_panels = 4000;
};

struct QuadratureResult {
  double value = 0.0;
  double error = 0.0;  // estimated absolute error
  double l1 = 0.0;     // integral of |f|
  std::size_t panels = 0;
};

/// Final panel endpoints of an adaptive run, for reuse as a fixed rule.
using PanelList = std::vector<std::pair<double, double>>;

namespace detail {

inline constexpr double kXgk[8] = {
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0};
inline constexpr double kWgk[8] = {
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
inline constexpr double kWg[4] = {
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Panel {
  double a;
  double b;
  double value;
  double error;
  double l1;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double a, double b) {
  const double c = 0.5 * (a + b);
  const double h = 0.5 * (b - a);
  const double fc = f(c);
  double k = fc * kWgk[7];
  double g = fc * kWg[3];
  double l1 = std::abs(fc) * kWgk[7];
  for (int i = 0; i < 7; ++i) {
    const double f1 = f(c - h * kXgk[i]);
    const double f2 = f(c + h * kXgk[i]);
    k += kWgk[i] * (f1 + f2);
    l1 += kWgk[i] * (std::abs(f1) + std::abs(f2));
    if (i % 2 == 1) g += kWg[i / 2] * (f1 + f2);
  }
  return {a, b, k * h, std::abs((k - g) * h), l1 * std::abs(h)};
}

}  // namespace detail

/// Integral of f over [a, b]. Throws NumericFailure when the tolerance is
/// not met within the panel budget or the integrand is not finite.
template <class F>
QuadratureResult integrate(F&& f, double a, double b,
                           const QuadratureOptions& opt = {},
                           PanelList* panels_out = nullptr) {
  QuadratureResult r;
  if (a == b) return r;
  if (panels_out) panels_out->clear();
  std::priority_queue<detail::Panel> heap;
  heap.push(detail::gk15(f, a, b));
  double value = heap.top().value;
  double error = heap.top().error;
  double frozen_error = 0.0;  // panels too narrow to split further
  std::vector<detail::Panel> done;
  std::size_t panels = 1;
  auto target = [&] { return std::max(opt.abs_tol, opt.rel_tol * std::abs(value)); };
  while (!heap.empty() && error + frozen_error > target()) {
    if (panels >= opt.max_panels) {
      throw NumericFailure(
          "quadrature did not converge on [" + std::to_string(a) + ", " +
          std::to_string(b) + "] after " + std::to_string(panels) +
          " panels: error estimate " + std::to_string(error + frozen_error) +
          ", value " + std::to_string(value));
    }
    const detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      error -= worst.error;
      frozen_error += worst.error;
      done.push_back(worst);
      continue;
    }
    const detail::Panel left = detail::gk15(f, worst.a, mid);
    const detail::Panel right = detail::gk15(f, mid, worst.b);
    value += left.value + right.value - worst.value;
    error += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++panels;
  }
  // Re-sum from the panels to shed the drift of the running updates.
  r.value = 0.0;
  r.error = 0.0;
  r.l1 = 0.0;
  for (const auto& p : done) {
    if (panels_out) panels_out->emplace_back(p.a, p.b);
    r.value += p.value;
    r.error += p.error;
    r.l1 += p.l1;
  }
  while (!heap.empty()) {
    if (panels_out) panels_out->emplace_back(heap.top().a, heap.top().b);
    r.value += heap.top().value;
    r.error += heap.top().error;
    r.l1 += heap.top().l1;
    heap.pop();
  }
  r.panels = panels;
  if (!std::isfinite(r.value) || !std::isfinite(r.error)) {
    throw NumericFailure("quadrature produced a non-finite value on [" +
                         std::to_string(a) + ", " + std::to_string(b) + "]");
  }
  return r;
}

/// Applies the 15-point Kronrod rule on each panel: calls
/// visit(node, weight) for every node.
template <class V>
void for_each_node(const PanelList& panels, V&& visit) {
  for (const auto& [a, b] : panels) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    visit(c, detail::kWgk[7] * h);
    for (int i = 0; i < 7; ++i) {
      visit(c - h * detail::kXgk[i], detail::kWgk[i] * h);
      visit(c + h * detail::kXgk[i], detail::kWgk[i] * h);
    }
  }
}

/// Sum of integrals over consecutive breakpoint intervals; the absolute
/// tolerance is shared in proportion to interval length.
template <class F>
QuadratureResult integrate_pieces(F&& f, std::span<const double> breaks,
                                  const QuadratureOptions& opt = {}) {
  QuadratureResult total;
  if (breaks.size() < 2) return total;
  const double span = breaks.back() - breaks.front();
  for (std::size_t k = 0; k + 1 < breaks.size(); ++k) {
    if (!(breaks[k + 1] > breaks[k])) continue;
    QuadratureOptions o = opt;
    o.abs_tol = opt.abs_tol * (breaks[k + 1] - breaks[k]) / span;
    const QuadratureResult r = integrate(f, breaks[k], breaks[k + 1], o);
    total.value += r.value;
    total.error += r.error;
    total.l1 += r.l1;
    total.panels += r.panels;
  }
  return total;
}

}  // namespace wpcr
