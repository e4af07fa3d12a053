// Copyright 2026 The spatialtomo Authors
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

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <queue>
#include <vector>

#include "spatialtomo/errors.hpp"
#include "spatialtomo/linalg.hpp"

namespace spatialtomo {

struct QuadratureOptions {
  std::size_t max_nodes = 20'000'000;
  // Initial panels span this many local oscillation periods.
  double periods_per_panel = 1.0;
};

struct QuadratureResult {
  cplx value;
  double error_estimate = 0.0;  // interior estimate + truncated-tail bound
  double cutoff = 0.0;          // integration range is [-cutoff, cutoff]
  std::size_t nodes = 0;
};

namespace detail {

struct Panel {
  double lo;
  double hi;
  cplx value;
  double error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gk15(F& f, double lo, double hi, std::size_t& nodes) {
  double err = 0.0;
  const cplx v = boost::math::quadrature::gauss_kronrod<double, 15>::integrate(
      f, lo, hi, 0, 0.0, &err);
  nodes += 15;
  return {lo, hi, v, err};
}

}  // namespace detail

// Smallest cutoff (found by doubling from `start`) whose tail bound is below
// `budget`. tail_bound(Q) must bound |integral over |q| > Q|.
inline double choose_cutoff(const std::function<double(double)>& tail_bound, double start,
                            double budget) {
  double q = start;
  for (int i = 0; i < 200 && !(tail_bound(q) < budget); ++i) q *= 2.0;
  return q;
}

// Adaptive Gauss-Kronrod integration of a complex oscillatory integrand over
// [-cutoff, cutoff]. Initial panels are sized from the local angular rate
// omega(q) so each covers at most `periods_per_panel` oscillations; panels
// are then bisected worst-first until the summed error estimate drops below
// abs_tol. Throws QuadratureError once the node budget is spent.
template <class F, class Rate>
QuadratureResult integrate_oscillatory(F f, Rate omega, double cutoff, double abs_tol,
                                       const QuadratureOptions& opts = {}) {
  QuadratureResult res;
  res.cutoff = cutoff;
  std::priority_queue<detail::Panel> heap;
  cplx total{0.0, 0.0};
  double total_err = 0.0;

  const double span = 2.0 * std::numbers::pi * opts.periods_per_panel;
  const double max_width = cutoff / 4.0;
  double t = -cutoff;
  while (t < cutoff) {
    double w = span / omega(t);
    w = std::min(w, span / omega(std::min(t + w, cutoff)));
    w = std::min(w, max_width);
    const double hi = std::min(t + w, cutoff);
    auto p = detail::gk15(f, t, hi, res.nodes);
    total += p.value;
    total_err += p.error;
    heap.push(p);
    t = hi;
    if (res.nodes > opts.max_nodes)
      throw QuadratureError("quadrature node budget exhausted while building panels",
                            total.real(), total.imag(), total_err);
  }

  while (total_err > abs_tol && !heap.empty()) {
    if (res.nodes > opts.max_nodes)
      throw QuadratureError("quadrature did not converge within node budget", total.real(),
                            total.imag(), total_err);
    detail::Panel worst = heap.top();
    heap.pop();
    const double mid = 0.5 * (worst.lo + worst.hi);
    auto left = detail::gk15(f, worst.lo, mid, res.nodes);
    auto right = detail::gk15(f, mid, worst.hi, res.nodes);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
  }

  // Re-sum from the panels to shed accumulated cancellation error.
  total = {0.0, 0.0};
  total_err = 0.0;
  while (!heap.empty()) {
    total += heap.top().value;
    total_err += heap.top().error;
    heap.pop();
  }
  res.value = total;
  res.error_estimate = total_err;
  return res;
}

}  // namespace spatialtomo
