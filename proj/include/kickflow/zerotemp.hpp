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

#ifndef KICKFLOW_ZEROTEMP_HPP
#define KICKFLOW_ZEROTEMP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kickflow/numerics.hpp"
#include "kickflow/potential.hpp"

namespace kickflow {

/// A finite path gamma: [m, n] -> R.
struct LatticePath {
  std::int64_t m = 0;
  std::vector<double> positions;

  std::int64_t n() const { return m + static_cast<std::int64_t>(positions.size()) - 1; }
  double at(std::int64_t k) const { return positions.at(static_cast<std::size_t>(k - m)); }
  std::size_t size() const { return positions.size(); }
};

struct ActionDecomposition {
  double kinetic = 0.0;
  double potential = 0.0;
  double total = 0.0;
};

/// I = 1/2 sum (gamma_k - gamma_{k-1})^2, H = sum_{k=m+1}^n F_k(gamma_k).
/// The starting point gamma_m carries no potential.
inline ActionDecomposition action(const PotentialField& field, const LatticePath& path) {
  if (path.positions.empty()) throw std::invalid_argument("action: empty path");
  ActionDecomposition a;
  for (std::size_t i = 1; i < path.positions.size(); ++i) {
    const double d = path.positions[i] - path.positions[i - 1];
    a.kinetic += 0.5 * d * d;
    a.potential += field.eval(path.m + static_cast<std::int64_t>(i), path.positions[i]);
  }
  a.total = a.kinetic + a.potential;
  return a;
}

namespace detail {

/// F_k at every node of slice k.
inline std::vector<double> potential_on_slice(const PotentialField& field, const Grid& grid,
                                              std::int64_t k) {
  std::vector<double> f(grid.size());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = field.eval(k, grid.node(i, k));
  return f;
}

/// kinetic[d + G - 1] = (d h + u)^2 / 2 for node offsets d in [-(G-1), G-1].
inline std::vector<double> kinetic_table(const Grid& grid) {
  const auto g = static_cast<std::int64_t>(grid.size());
  std::vector<double> kin(static_cast<std::size_t>(2 * g - 1));
  for (std::int64_t d = -(g - 1); d <= g - 1; ++d) {
    const double s = grid.step(d);
    kin[static_cast<std::size_t>(d + g - 1)] = 0.5 * s * s;
  }
  return kin;
}

/// The one min-plus kernel used by every zero-temperature computation.
///   forward  (transpose = false): out[a] = min_b in[b] + cost[(a - b) + G - 1]
///   backward (transpose = true):  out[a] = min_b in[b] + cost[(b - a) + G - 1]
/// Ties resolve to the smallest b. Returns the number of interior outputs
/// whose optimal b sits on the window edge.
inline std::size_t min_plus_convolve(std::span<const double> in, std::span<const double> cost,
                                     bool transpose, std::span<double> out,
                                     std::span<std::int32_t> arg) {
  const auto g = static_cast<std::int64_t>(in.size());
  std::size_t edge_hits = 0;
  for (std::int64_t a = 0; a < g; ++a) {
    double best = kInf;
    std::int32_t best_b = -1;
    for (std::int64_t b = 0; b < g; ++b) {
      if (in[static_cast<std::size_t>(b)] == kInf) continue;
      const std::int64_t d = transpose ? b - a : a - b;
      const double c = in[static_cast<std::size_t>(b)] + cost[static_cast<std::size_t>(d + g - 1)];
      if (c < best) {
        best = c;
        best_b = static_cast<std::int32_t>(b);
      }
    }
    out[static_cast<std::size_t>(a)] = best;
    arg[static_cast<std::size_t>(a)] = best_b;
    if (a > 0 && a < g - 1 && best_b >= 0 && (best_b == 0 || best_b == g - 1)) ++edge_hits;
  }
  return edge_hits;
}

}  // namespace detail

/// y -> A^{m,n}(x, y) over the nodes of slice n, with backpointers.
struct MinActionSlice {
  GridFn values;
  std::int64_t m = 0;
  std::int64_t n = 0;
  double source = 0.0;
  // predecessor[k - m - 2][i]: optimal node at k - 1 for node i at k, k = m+2..n.
  std::vector<std::vector<std::int32_t>> predecessor;
  std::size_t boundary_hits = 0;

  bool boundary_warning() const { return boundary_hits > 0; }
};

/// Forward min-plus recursion from the real source point (m, x):
/// V_{m+1}(y) = (y - x)^2 / 2 + F_{m+1}(y),
/// V_k(y) = min_w [V_{k-1}(w) + (y - w)^2 / 2] + F_k(y).
inline MinActionSlice min_action_slice(const PotentialField& field, std::int64_t m,
                                       std::int64_t n, double x, const Grid& grid) {
  if (n <= m) throw std::invalid_argument("min_action_slice: need n > m");
  if (!std::isfinite(x)) throw std::invalid_argument("min_action_slice: non-finite source");
  const std::size_t g = grid.size();
  MinActionSlice out{GridFn(grid, m + 1), m, n, x, {}, 0};
  {
    const auto f = detail::potential_on_slice(field, grid, m + 1);
    for (std::size_t i = 0; i < g; ++i) {
      const double d = grid.node(i, m + 1) - x;
      out.values[i] = 0.5 * d * d + f[i];
    }
  }
  const auto kin = detail::kinetic_table(grid);
  std::vector<double> next(g);
  for (std::int64_t k = m + 2; k <= n; ++k) {
    std::vector<std::int32_t> arg(g);
    out.boundary_hits += detail::min_plus_convolve(out.values.values, kin, false, next, arg);
    const auto f = detail::potential_on_slice(field, grid, k);
    for (std::size_t i = 0; i < g; ++i) next[i] += f[i];
    out.values.values.swap(next);
    out.values.k = k;
    out.predecessor.push_back(std::move(arg));
  }
  return out;
}

/// Finite minimizer from (m, x) to the node y of slice n. Intermediate
/// positions are grid nodes; endpoints are exact.
inline LatticePath minimizer_from(const MinActionSlice& slice, const Grid& grid,
                                  std::size_t target) {
  LatticePath path;
  path.m = slice.m;
  const auto len = static_cast<std::size_t>(slice.n - slice.m + 1);
  path.positions.assign(len, 0.0);
  std::size_t i = target;
  path.positions[len - 1] = grid.node(i, slice.n);
  for (std::int64_t k = slice.n; k >= slice.m + 2; --k) {
    i = static_cast<std::size_t>(slice.predecessor[static_cast<std::size_t>(k - slice.m - 2)][i]);
    path.positions[static_cast<std::size_t>(k - 1 - slice.m)] = grid.node(i, k - 1);
  }
  path.positions[0] = slice.source;
  return path;
}

inline std::size_t require_node(const Grid& grid, double y, std::int64_t k, const char* who) {
  const auto idx = grid.find_node(y, k);
  if (!idx)
    throw std::invalid_argument(std::string(who) + ": point " + std::to_string(y) +
                                " is not a grid node at time " + std::to_string(k));
  return *idx;
}

inline LatticePath minimizer(const PotentialField& field, std::int64_t m, std::int64_t n,
                             double x, double y, const Grid& grid) {
  const std::size_t target = require_node(grid, y, n, "minimizer");
  return minimizer_from(min_action_slice(field, m, n, x, grid), grid, target);
}

/// A^{m,n}(x, y) for a node y.
inline double min_action(const PotentialField& field, std::int64_t m, std::int64_t n, double x,
                         double y, const Grid& grid) {
  const std::size_t target = require_node(grid, y, n, "min_action");
  return min_action_slice(field, m, n, x, grid).values[target];
}

/// Backward value table W_k(w) = min over grid paths from (k, w) of
/// [A^{k,n}(path) + U(path_n)], for k = first..n, with W_n = terminal.
struct ValueTable {
  Grid grid;
  std::int64_t first = 0;
  std::int64_t last = 0;
  std::vector<std::vector<double>> values;        // values[k - first]
  std::vector<std::vector<std::int32_t>> choice;  // choice[k - first][w]: successor node, k < last
  std::size_t boundary_hits = 0;

  std::span<const double> at(std::int64_t k) const {
    return values.at(static_cast<std::size_t>(k - first));
  }
  GridFn slice(std::int64_t k) const {
    const auto v = at(k);
    return GridFn(grid, k, std::vector<double>(v.begin(), v.end()));
  }
};

/// Min-plus recursion run backward from terminal data at time n down to
/// time `first`; +inf entries mark excluded terminal nodes.
inline ValueTable backward_min_plus(const PotentialField& field, const Grid& grid,
                                    std::int64_t first, std::int64_t n,
                                    std::span<const double> terminal) {
  if (first > n) throw std::invalid_argument("backward_min_plus: first > n");
  if (terminal.size() != grid.size())
    throw std::invalid_argument("backward_min_plus: terminal size mismatch");
  const std::size_t g = grid.size();
  ValueTable t{grid, first, n, {}, {}, 0};
  t.values.resize(static_cast<std::size_t>(n - first + 1));
  t.choice.resize(static_cast<std::size_t>(n - first));
  t.values.back().assign(terminal.begin(), terminal.end());
  const auto kin = detail::kinetic_table(grid);
  std::vector<double> in(g);
  for (std::int64_t k = n - 1; k >= first; --k) {
    const auto& above = t.values[static_cast<std::size_t>(k + 1 - first)];
    const auto f = detail::potential_on_slice(field, grid, k + 1);
    for (std::size_t i = 0; i < g; ++i) in[i] = above[i] == kInf ? kInf : above[i] + f[i];
    auto& cur = t.values[static_cast<std::size_t>(k - first)];
    auto& arg = t.choice[static_cast<std::size_t>(k - first)];
    cur.resize(g);
    arg.resize(g);
    t.boundary_hits += detail::min_plus_convolve(in, kin, true, cur, arg);
  }
  return t;
}

/// Terminal data of a point target: 0 at node `target`, +inf elsewhere.
inline std::vector<double> point_terminal(const Grid& grid, std::size_t target) {
  std::vector<double> t(grid.size(), kInf);
  t.at(target) = 0.0;
  return t;
}

struct FirstStep {
  double value = kInf;
  std::int32_t node = -1;  // optimal node at time n + 1
};

/// min_w [(w - x)^2 / 2 + F_{n+1}(w) + W_{n+1}(w)] for a real start x at
/// time n, leftmost minimizing node.
inline FirstStep first_step(const PotentialField& field, const ValueTable& table,
                            std::int64_t n, double x) {
  const Grid& grid = table.grid;
  const auto w = table.at(n + 1);
  FirstStep best;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (w[i] == kInf) continue;
    const double pos = grid.node(i, n + 1);
    const double d = pos - x;
    const double c = 0.5 * d * d + field.eval(n + 1, pos) + w[i];
    if (c < best.value) {
      best.value = c;
      best.node = static_cast<std::int32_t>(i);
    }
  }
  return best;
}

/// Backward table toward the point (N, vN) on the frame-v version of grid.
inline ValueTable table_to_target(const PotentialField& field, const Grid& frame,
                                  std::int64_t first, std::int64_t big_n, double target) {
  const std::size_t idx = require_node(frame, target, big_n, "target");
  return backward_min_plus(field, frame, first, big_n, point_terminal(frame, idx));
}

struct SpaceTimePoint {
  std::int64_t n = 0;
  double x = 0.0;
};

struct LadderTrace {
  std::vector<std::int64_t> horizons;
  std::vector<double> values;
  double max_increment = 0.0;
  bool converged = false;
  std::optional<std::int64_t> converged_at;
};

/// Convergence over a horizon ladder: converged once two consecutive
/// increments fall below tol.
inline LadderTrace make_trace(std::vector<std::int64_t> horizons, std::vector<double> values,
                              double tol) {
  LadderTrace tr{std::move(horizons), std::move(values), 0.0, false, std::nullopt};
  int run = 0;
  for (std::size_t i = 1; i < tr.values.size(); ++i) {
    const double inc = std::abs(tr.values[i] - tr.values[i - 1]);
    tr.max_increment = std::max(tr.max_increment, inc);
    run = inc < tol ? run + 1 : 0;
    if (run >= 2 && !tr.converged) {
      tr.converged = true;
      tr.converged_at = tr.horizons[i];
    }
  }
  return tr;
}

struct BusemannValue {
  double value = 0.0;
  std::size_t boundary_hits = 0;
};

/// B_v^N(p1, p2) = A^{n1,N}(x1, vN) - A^{n2,N}(x2, vN) on the frame-v grid.
inline BusemannValue busemann_zero(const PotentialField& field, SpaceTimePoint p1,
                                   SpaceTimePoint p2, double v, std::int64_t big_n,
                                   const Grid& grid) {
  if (big_n <= std::max(p1.n, p2.n))
    throw std::invalid_argument("busemann_zero: need N > max(n1, n2)");
  const Grid frame = grid.with_frame(v);
  const auto table =
      table_to_target(field, frame, std::min(p1.n, p2.n) + 1, big_n, v * static_cast<double>(big_n));
  const double a1 = first_step(field, table, p1.n, p1.x).value;
  const double a2 = first_step(field, table, p2.n, p2.x).value;
  return {a1 - a2, table.boundary_hits};
}

inline LadderTrace busemann_ladder(const PotentialField& field, SpaceTimePoint p1,
                                   SpaceTimePoint p2, double v,
                                   const std::vector<std::int64_t>& horizons, const Grid& grid,
                                   double tol) {
  std::vector<double> values;
  for (auto big_n : horizons) values.push_back(busemann_zero(field, p1, p2, v, big_n, grid).value);
  return make_trace(horizons, std::move(values), tol);
}

/// u_{v;0}(n, x) = x - gamma_{n+1}, gamma the minimizer from (n, x) to (N, vN).
inline double inviscid_velocity(const PotentialField& field, std::int64_t n, double x, double v,
                                std::int64_t big_n, const Grid& grid) {
  if (big_n <= n) throw std::invalid_argument("inviscid_velocity: need N > n");
  const Grid frame = grid.with_frame(v);
  const double target = v * static_cast<double>(big_n);
  if (big_n == n + 1) {
    require_node(frame, target, big_n, "inviscid_velocity");
    return x - target;
  }
  const auto table = table_to_target(field, frame, n + 1, big_n, target);
  const auto step = first_step(field, table, n, x);
  return x - frame.node(static_cast<std::size_t>(step.node), n + 1);
}

/// u_{v;0}(n, .) at every node of slice n of the frame-v grid.
inline GridFn inviscid_velocity_profile(const PotentialField& field, std::int64_t n, double v,
                                        std::int64_t big_n, const Grid& grid) {
  if (big_n <= n + 1) throw std::invalid_argument("inviscid_velocity_profile: need N > n + 1");
  const Grid frame = grid.with_frame(v);
  const auto table = table_to_target(field, frame, n + 1, big_n, v * static_cast<double>(big_n));
  GridFn u(frame, n);
  for (std::size_t i = 0; i < frame.size(); ++i) {
    const double x = frame.node(i, n);
    const auto step = first_step(field, table, n, x);
    u[i] = x - frame.node(static_cast<std::size_t>(step.node), n + 1);
  }
  return u;
}

inline LadderTrace inviscid_velocity_ladder(const PotentialField& field, std::int64_t n,
                                            double x, double v,
                                            const std::vector<std::int64_t>& horizons,
                                            const Grid& grid, double tol) {
  std::vector<double> values;
  for (auto big_n : horizons) values.push_back(inviscid_velocity(field, n, x, v, big_n, grid));
  return make_trace(horizons, std::move(values), tol);
}

/// max over nodes x of slice n of
/// |B((n,x),(n0,x0)) - min_y [B((m,y),(n0,x0)) + A^{n,m}(x,y)]|
/// with finite-N Busemann values on the frame-v grid; requires n < m < N.
inline double busemann_variational_residual(const PotentialField& field, double v,
                                            std::int64_t big_n, std::int64_t n, std::int64_t m,
                                            SpaceTimePoint anchor, const Grid& grid) {
  if (!(n < m && m < big_n) || anchor.n >= big_n)
    throw std::invalid_argument("busemann_variational_residual: need n < m < N, n0 < N");
  const Grid frame = grid.with_frame(v);
  const auto table = table_to_target(field, frame, std::min(n, anchor.n + 1), big_n,
                                     v * static_cast<double>(big_n));
  const double a0 = first_step(field, table, anchor.n, anchor.x).value;
  const auto wm = table.at(m);
  const auto wn = table.at(n);
  double worst = 0.0;
  for (std::size_t i = 0; i < frame.size(); ++i) {
    if (wn[i] == kInf) continue;
    const double x = frame.node(i, n);
    const double lhs = wn[i] - a0;
    const auto slice = min_action_slice(field, n, m, x, frame);
    double rhs = kInf;
    for (std::size_t j = 0; j < frame.size(); ++j)
      if (wm[j] != kInf) rhs = std::min(rhs, wm[j] - a0 + slice.values[j]);
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

}  // namespace kickflow

#endif  // KICKFLOW_ZEROTEMP_HPP
