// Copyright 2026 The kickflow Authors
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

// Brute-force references used only by the test suites. Nothing here calls
// the dynamic-programming or transfer code it is compared against.
#ifndef KICKFLOW_TESTS_ORACLES_HPP
#define KICKFLOW_TESTS_ORACLES_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

#include "kickflow/numerics.hpp"
#include "kickflow/potential.hpp"
#include "kickflow/zerotemp.hpp"

namespace kickflow::oracle {

/// Calls visit(path) for every path from the real point (m, x) to node
/// `target` of slice n whose interior positions are grid nodes.
inline void for_each_path(const Grid& grid, std::int64_t m, std::int64_t n, double x,
                          std::size_t target, const std::function<void(const LatticePath&)>& visit) {
  const std::size_t interior = static_cast<std::size_t>(n - m - 1);
  const std::size_t g = grid.size();
  std::vector<std::size_t> idx(interior, 0);
  LatticePath path;
  path.m = m;
  path.positions.assign(static_cast<std::size_t>(n - m + 1), 0.0);
  path.positions.front() = x;
  path.positions.back() = grid.node(target, n);
  while (true) {
    for (std::size_t t = 0; t < interior; ++t)
      path.positions[t + 1] = grid.node(idx[t], m + 1 + static_cast<std::int64_t>(t));
    visit(path);
    std::size_t t = interior;
    while (t > 0) {
      --t;
      if (++idx[t] < g) break;
      idx[t] = 0;
      if (t == 0) return;
    }
    if (interior == 0) return;
  }
}

/// Plain action sum, written out independently of kickflow::action.
inline double path_action(const PotentialField& f, const LatticePath& p) {
  double a = 0.0;
  for (std::size_t i = 1; i < p.positions.size(); ++i) {
    const double d = p.positions[i] - p.positions[i - 1];
    a += d * d / 2.0 + f.eval(p.m + static_cast<std::int64_t>(i), p.positions[i]);
  }
  return a;
}

struct BruteMin {
  double value = std::numeric_limits<double>::infinity();
  LatticePath path;
};

/// Exhaustive minimum; ties keep the lexicographically first path in
/// (gamma_{n-1}, gamma_{n-2}, ...) order, i.e. leftmost predecessors.
inline BruteMin min_over_paths(const PotentialField& f, const Grid& grid, std::int64_t m,
                               std::int64_t n, double x, std::size_t target) {
  BruteMin best;
  for_each_path(grid, m, n, x, target, [&](const LatticePath& p) {
    const double a = path_action(f, p);
    if (a < best.value) {
      best.value = a;
      best.path = p;
    }
  });
  return best;
}

/// ln of the rectangle-rule integral over interior nodes of
/// prod g_kappa(increment) exp(-F_k / kappa), i.e. ln Zhat.
inline double log_zhat(const PotentialField& f, const Grid& grid, std::int64_t m, std::int64_t n,
                       double x, std::size_t target, double kappa) {
  std::vector<double> terms;
  const double log_norm = -0.5 * std::log(2.0 * std::numbers::pi * kappa);
  const double log_h = std::log(grid.h());
  for_each_path(grid, m, n, x, target, [&](const LatticePath& p) {
    double t = static_cast<double>(n - m - 1) * log_h;
    for (std::size_t i = 1; i < p.positions.size(); ++i) {
      const double d = p.positions[i] - p.positions[i - 1];
      t += log_norm - d * d / (2.0 * kappa) -
           f.eval(p.m + static_cast<std::int64_t>(i), p.positions[i]) / kappa;
    }
    terms.push_back(t);
  });
  double mx = -std::numeric_limits<double>::infinity();
  for (double t : terms) mx = std::max(mx, t);
  double s = 0.0;
  for (double t : terms) s += std::exp(t - mx);
  return mx + std::log(s);
}

/// Time-k marginal by summing path weights exp(-A / kappa).
inline std::vector<double> marginal(const PotentialField& f, const Grid& grid, std::int64_t m,
                                    std::int64_t n, double x, std::size_t target, double kappa,
                                    std::int64_t k) {
  std::vector<double> logw;
  std::vector<std::size_t> node_at_k;
  for_each_path(grid, m, n, x, target, [&](const LatticePath& p) {
    logw.push_back(-path_action(f, p) / kappa);
    node_at_k.push_back(grid.nearest(p.at(k), k));
  });
  double mx = -std::numeric_limits<double>::infinity();
  for (double t : logw) mx = std::max(mx, t);
  std::vector<double> out(grid.size(), 0.0);
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    const double w = std::exp(logw[i] - mx);
    out[node_at_k[i]] += w;
    total += w;
  }
  for (double& v : out) v /= total;
  return out;
}

inline PotentialField make_field(PotentialKind kind, std::uint64_t seed, TimeWindow t,
                                 SpaceWindow s, double level = 0.0) {
  PotentialSpec spec;
  spec.kind = kind;
  spec.level = level;
  spec.master_seed = seed;
  return sample_potential(spec, t, s);
}

}  // namespace kickflow::oracle

#endif  // KICKFLOW_TESTS_ORACLES_HPP
