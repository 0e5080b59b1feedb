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

#ifndef KICKFLOW_GIBBS_HPP
#define KICKFLOW_GIBBS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

#include "kickflow/errors.hpp"
#include "kickflow/numerics.hpp"
#include "kickflow/potential.hpp"
#include "kickflow/rng.hpp"
#include "kickflow/zerotemp.hpp"

namespace kickflow {

// Conventions. ln Zhat^{m,n}_{x,y} integrates the product of Gaussian kernels
// g_kappa and Boltzmann factors exp(-F_k / kappa), k = m+1..n, over interior
// positions (rectangle rule, weight h per node). The partition function of
// the action carries one factor sqrt(2 pi kappa) per kernel:
//   ln Z = ln Zhat + (n - m) / 2 * ln(2 pi kappa).
// The unweighted grid sum Ztilde = sum over grid paths of exp(-A / kappa)
// satisfies ln Z = ln Ztilde + (n - m - 1) ln h.

inline double zhat_to_z(double log_zhat, std::int64_t steps, double kappa) {
  return log_zhat + 0.5 * static_cast<double>(steps) * std::log(2.0 * std::numbers::pi * kappa);
}

inline double z_to_ztilde(double log_z, std::int64_t steps, double h) {
  return log_z - static_cast<double>(steps - 1) * std::log(h);
}

namespace detail {

inline void require_kappa(double kappa) {
  if (!(kappa > 0.0) || !std::isfinite(kappa))
    throw std::domain_error("kappa must be finite and > 0");
}

/// lk[d + G - 1] = ln g_kappa(d h + u) for node offsets d.
inline std::vector<double> log_kernel_table(const Grid& grid, double kappa) {
  const auto g = static_cast<std::int64_t>(grid.size());
  std::vector<double> lk(static_cast<std::size_t>(2 * g - 1));
  for (std::int64_t d = -(g - 1); d <= g - 1; ++d)
    lk[static_cast<std::size_t>(d + g - 1)] = gauss_log_kernel(grid.step(d), kappa);
  return lk;
}

/// Log-domain counterpart of min_plus_convolve:
///   out[a] = ln h + LSE_b (in[b] + lk[d]),  d = a - b (or b - a if transpose).
/// The exponential sum is restricted to offsets whose kernel term can reach
/// within 746 of the maximum; every omitted term underflows to exactly 0, so
/// the result equals the dense sum in ascending b order.
inline void log_convolve(std::span<const double> in, const Grid& grid, double kappa,
                         std::span<const double> lk, bool transpose, std::span<double> out) {
  const auto g = static_cast<std::int64_t>(in.size());
  const double log_h = std::log(grid.h());
  double in_max = -kInf;
  for (double v : in) in_max = std::max(in_max, v);
  if (in_max == -kInf) {
    std::fill(out.begin(), out.end(), -kInf);
    return;
  }
  const double l0 = -0.5 * std::log(2.0 * std::numbers::pi * kappa);
  const double h = grid.h();
  const double u = grid.frame_velocity();
  for (std::int64_t a = 0; a < g; ++a) {
    double mx = -kInf;
    for (std::int64_t b = 0; b < g; ++b) {
      const std::int64_t d = transpose ? b - a : a - b;
      mx = std::max(mx, in[static_cast<std::size_t>(b)] + lk[static_cast<std::size_t>(d + g - 1)]);
    }
    if (mx == -kInf) {
      out[static_cast<std::size_t>(a)] = -kInf;
      continue;
    }
    // Kernel terms below mx - in_max - 746 cannot contribute.
    const double slack = std::max(0.0, l0 - (mx - in_max - 746.0));
    const double r = std::sqrt(2.0 * kappa * slack);
    // offsets d with |d h + u| <= r, widened by one node each way
    const auto d_lo = static_cast<std::int64_t>(std::floor((-r - u) / h)) - 1;
    const auto d_hi = static_cast<std::int64_t>(std::ceil((r - u) / h)) + 1;
    std::int64_t b_lo, b_hi;
    if (transpose) {
      b_lo = a + d_lo;
      b_hi = a + d_hi;
    } else {
      b_lo = a - d_hi;
      b_hi = a - d_lo;
    }
    b_lo = std::max<std::int64_t>(b_lo, 0);
    b_hi = std::min<std::int64_t>(b_hi, g - 1);
    double sum = 0.0;
    for (std::int64_t b = b_lo; b <= b_hi; ++b) {
      const std::int64_t d = transpose ? b - a : a - b;
      sum += std::exp(in[static_cast<std::size_t>(b)] + lk[static_cast<std::size_t>(d + g - 1)] - mx);
    }
    out[static_cast<std::size_t>(a)] = log_h + mx + std::log(sum);
  }
}

inline std::vector<double> scaled_potential(const PotentialField& field, const Grid& grid,
                                            std::int64_t k, double kappa) {
  auto f = potential_on_slice(field, grid, k);
  for (double& v : f) v /= kappa;
  return f;
}

inline void check_slice(std::span<const double> values, const char* who) {
  bool any = false;
  for (double v : values) {
    if (std::isnan(v)) throw std::runtime_error(std::string(who) + ": NaN in log slice");
    any = any || v != -kInf;
  }
  if (!any) throw EmptySliceError(std::string(who) + ": numerically empty slice", 1.0);
}

}  // namespace detail

/// y -> ln Zhat^{m,k}_{x,y; kappa} on slice k.
struct LogPartitionSlice {
  std::int64_t m = 0;
  double source = 0.0;
  double kappa = 0.0;
  GridFn log_zhat;

  std::int64_t k() const { return log_zhat.k; }
};

/// All forward slices L_k, k = m+1..n, from the real source (m, x):
///   L_{m+1}(y) = ln g(y - x) - F_{m+1}(y) / kappa
///   L_k(y) = ln h + LSE_w [L_{k-1}(w) + ln g(y - w)] - F_k(y) / kappa.
inline std::vector<GridFn> forward_log_slices(const PotentialField& field, std::int64_t m,
                                              double x, std::int64_t n, double kappa,
                                              const Grid& grid) {
  detail::require_kappa(kappa);
  if (n <= m) throw std::invalid_argument("forward_slice: need n > m");
  const std::size_t g = grid.size();
  std::vector<GridFn> out;
  out.reserve(static_cast<std::size_t>(n - m));
  {
    GridFn first(grid, m + 1, Scale::log);
    const auto f = detail::scaled_potential(field, grid, m + 1, kappa);
    for (std::size_t i = 0; i < g; ++i)
      first[i] = gauss_log_kernel(grid.node(i, m + 1) - x, kappa) - f[i];
    out.push_back(std::move(first));
  }
  const auto lk = detail::log_kernel_table(grid, kappa);
  for (std::int64_t k = m + 2; k <= n; ++k) {
    GridFn next(grid, k, Scale::log);
    detail::log_convolve(out.back().values, grid, kappa, lk, false, next.values);
    const auto f = detail::scaled_potential(field, grid, k, kappa);
    for (std::size_t i = 0; i < g; ++i) next[i] -= f[i];
    out.push_back(std::move(next));
  }
  detail::check_slice(out.back().values, "forward_slice");
  return out;
}

inline LogPartitionSlice forward_slice(const PotentialField& field, std::int64_t m, double x,
                                       std::int64_t n, double kappa, const Grid& grid) {
  auto all = forward_log_slices(field, m, x, n, kappa, grid);
  return {m, x, kappa, std::move(all.back())};
}

/// Backward log table R_k(w) = ln Zhat^{k,n}_{w,y} toward the point terminal
/// (n, y), for k = first..n-1.
struct LogTable {
  Grid grid;
  std::int64_t first = 0;
  std::int64_t last = 0;  // terminal time n
  std::size_t target = 0;
  double kappa = 0.0;
  std::vector<std::vector<double>> values;  // values[k - first], k < last

  std::span<const double> at(std::int64_t k) const {
    return values.at(static_cast<std::size_t>(k - first));
  }
};

inline LogTable backward_log_table(const PotentialField& field, const Grid& grid,
                                   std::int64_t first, std::int64_t n, std::size_t target,
                                   double kappa) {
  detail::require_kappa(kappa);
  if (first >= n) throw std::invalid_argument("backward_log_table: need first < n");
  const std::size_t g = grid.size();
  LogTable t{grid, first, n, target, kappa, {}};
  t.values.resize(static_cast<std::size_t>(n - first));
  {
    auto& top = t.values.back();
    top.resize(g);
    const double y = grid.node(target, n);
    const double fy = field.eval(n, y) / kappa;
    for (std::size_t j = 0; j < g; ++j)
      top[j] = gauss_log_kernel(grid.step(static_cast<std::int64_t>(target) - static_cast<std::int64_t>(j)),
                                kappa) -
               fy;
  }
  const auto lk = detail::log_kernel_table(grid, kappa);
  std::vector<double> in(g);
  for (std::int64_t k = n - 2; k >= first; --k) {
    const auto& above = t.values[static_cast<std::size_t>(k + 1 - first)];
    const auto f = detail::scaled_potential(field, grid, k + 1, kappa);
    for (std::size_t i = 0; i < g; ++i) in[i] = above[i] - f[i];
    auto& cur = t.values[static_cast<std::size_t>(k - first)];
    cur.resize(g);
    detail::log_convolve(in, grid, kappa, lk, true, cur);
  }
  return t;
}

/// ln Zhat^{n,N}_{x,y} for a real start x at time n using a backward table
/// toward (N, y).
inline double log_zhat_from(const PotentialField& field, const LogTable& t, std::int64_t n,
                            double x) {
  const Grid& grid = t.grid;
  const double kappa = t.kappa;
  if (n + 1 == t.last) {
    const double y = grid.node(t.target, t.last);
    return gauss_log_kernel(y - x, kappa) - field.eval(t.last, y) / kappa;
  }
  const auto r = t.at(n + 1);
  std::vector<double> terms(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double pos = grid.node(i, n + 1);
    terms[i] = gauss_log_kernel(pos - x, kappa) - field.eval(n + 1, pos) / kappa + r[i];
  }
  const double lse = logsumexp(terms);
  return lse == -kInf ? -kInf : std::log(grid.h()) + lse;
}

/// ln Z^{m,n}_{x,y; kappa}; y must be a node of slice n.
inline double log_partition(const PotentialField& field, std::int64_t m, std::int64_t n,
                            double x, double y, double kappa, const Grid& grid) {
  const std::size_t target = require_node(grid, y, n, "log_partition");
  const auto slice = forward_slice(field, m, x, n, kappa, grid);
  return zhat_to_z(slice.log_zhat[target], n - m, kappa);
}

/// Time-k marginal of the point-to-point polymer measure from (m, x) to the
/// node y of slice n, m < k < n.
inline SliceDistribution polymer_marginal(const PotentialField& field, std::int64_t m,
                                          std::int64_t n, double x, double y, double kappa,
                                          const Grid& grid, std::int64_t k) {
  if (!(m < k && k < n)) throw std::invalid_argument("polymer_marginal: need m < k < n");
  const std::size_t target = require_node(grid, y, n, "polymer_marginal");
  const auto fwd = forward_log_slices(field, m, x, k, kappa, grid);
  const auto bwd = backward_log_table(field, grid, k, n, target, kappa);
  const auto& l = fwd.back();
  const auto r = bwd.at(k);
  std::vector<double> logw(grid.size());
  for (std::size_t i = 0; i < logw.size(); ++i) logw[i] = l[i] + r[i];
  auto p = normalize_log(logw);
  SliceDistribution dist{grid, k, std::move(p)};
  if (dist.total() == 0.0) {
    throw EmptySliceError("polymer_marginal: empty marginal; widen the window", 1.0);
  }
  return dist;
}

/// Exact draw from the grid polymer measure mu^{m,n}_{x,y; kappa} by
/// backward sampling: gamma_n = y and gamma_k ~ exp(L_k(w)) g(gamma_{k+1} - w).
template <class Rng>
LatticePath sample_path_with(const std::vector<GridFn>& forward, std::int64_t m, double x,
                             std::int64_t n, std::size_t target, double kappa, const Grid& grid,
                             Rng& rng) {
  LatticePath path;
  path.m = m;
  path.positions.assign(static_cast<std::size_t>(n - m + 1), 0.0);
  path.positions.back() = grid.node(target, n);
  path.positions.front() = x;
  std::size_t next = target;
  std::vector<double> logw(grid.size());
  std::vector<double> cdf(grid.size());
  for (std::int64_t k = n - 1; k >= m + 1; --k) {
    const auto& l = forward[static_cast<std::size_t>(k - m - 1)];
    for (std::size_t i = 0; i < grid.size(); ++i)
      logw[i] = l[i] + gauss_log_kernel(grid.step(static_cast<std::int64_t>(next) -
                                                  static_cast<std::int64_t>(i)),
                                        kappa);
    const auto p = normalize_log(logw);
    double acc = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) cdf[i] = (acc += p[i]);
    const double u = rng.uniform() * acc;
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    std::size_t pick = static_cast<std::size_t>(it - cdf.begin());
    if (pick >= p.size()) pick = p.size() - 1;
    while (p[pick] == 0.0 && pick > 0) --pick;
    next = pick;
    path.positions[static_cast<std::size_t>(k - m)] = grid.node(pick, k);
  }
  return path;
}

inline LatticePath sample_path(const PotentialField& field, std::int64_t m, std::int64_t n,
                               double x, double y, double kappa, const Grid& grid,
                               rng::Stream& rng) {
  const std::size_t target = require_node(grid, y, n, "sample_path");
  if (n == m + 1) return LatticePath{m, {x, grid.node(target, n)}};
  const auto fwd = forward_log_slices(field, m, x, n - 1, kappa, grid);
  return sample_path_with(fwd, m, x, n, target, kappa, grid, rng);
}

/// ln G^N = ln Z^{n1,N}(x1, vN) - ln Z^{n2,N}(x2, vN) on the frame-v grid.
inline double g_ratio(const PotentialField& field, SpaceTimePoint p1, SpaceTimePoint p2,
                      double v, double kappa, std::int64_t big_n, const Grid& grid) {
  if (big_n <= std::max(p1.n, p2.n)) throw std::invalid_argument("g_ratio: need N > max(n1, n2)");
  const Grid frame = grid.with_frame(v);
  const std::size_t target =
      require_node(frame, v * static_cast<double>(big_n), big_n, "g_ratio");
  const std::int64_t first = std::min(p1.n, p2.n) + 1;
  double z1, z2;
  if (first == big_n) {
    LogTable t{frame, first, big_n, target, kappa, {}};
    z1 = log_zhat_from(field, t, p1.n, p1.x);
    z2 = log_zhat_from(field, t, p2.n, p2.x);
  } else {
    const auto t = backward_log_table(field, frame, first, big_n, target, kappa);
    z1 = log_zhat_from(field, t, p1.n, p1.x);
    z2 = log_zhat_from(field, t, p2.n, p2.x);
  }
  return zhat_to_z(z1, big_n - p1.n, kappa) - zhat_to_z(z2, big_n - p2.n, kappa);
}

inline LadderTrace g_ratio_ladder(const PotentialField& field, SpaceTimePoint p1,
                                  SpaceTimePoint p2, double v, double kappa,
                                  const std::vector<std::int64_t>& horizons, const Grid& grid,
                                  double tol) {
  std::vector<double> values;
  for (auto big_n : horizons) values.push_back(g_ratio(field, p1, p2, v, kappa, big_n, grid));
  return make_trace(horizons, std::move(values), tol);
}

/// u_{v;kappa}(n, x) = sum_w (x - w) mu(gamma_{n+1} = w) for the polymer from
/// (n, x) to (N, vN) on the frame-v grid.
inline double viscous_velocity_from(const PotentialField& field, const LogTable& t,
                                    std::int64_t n, double x) {
  const Grid& grid = t.grid;
  const auto r = t.at(n + 1);
  std::vector<double> logw(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double pos = grid.node(i, n + 1);
    logw[i] = gauss_log_kernel(pos - x, t.kappa) - field.eval(n + 1, pos) / t.kappa + r[i];
  }
  const auto p = normalize_log(logw);
  double u = 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    u += p[i] * (x - grid.node(i, n + 1));
    total += p[i];
  }
  if (total == 0.0) throw EmptySliceError("viscous_velocity: empty marginal", 1.0);
  return u;
}

inline double viscous_velocity(const PotentialField& field, std::int64_t n, double x, double v,
                               double kappa, std::int64_t big_n, const Grid& grid) {
  if (big_n <= n) throw std::invalid_argument("viscous_velocity: need N > n");
  detail::require_kappa(kappa);
  const Grid frame = grid.with_frame(v);
  const double target = v * static_cast<double>(big_n);
  const std::size_t idx = require_node(frame, target, big_n, "viscous_velocity");
  if (big_n == n + 1) return x - target;
  const auto t = backward_log_table(field, frame, n + 1, big_n, idx, kappa);
  return viscous_velocity_from(field, t, n, x);
}

/// u_{v;kappa}(n, .) at every node of slice n of the frame-v grid.
inline GridFn viscous_velocity_profile(const PotentialField& field, std::int64_t n, double v,
                                       double kappa, std::int64_t big_n, const Grid& grid) {
  if (big_n <= n + 1) throw std::invalid_argument("viscous_velocity_profile: need N > n + 1");
  const Grid frame = grid.with_frame(v);
  const std::size_t idx =
      require_node(frame, v * static_cast<double>(big_n), big_n, "viscous_velocity_profile");
  const auto t = backward_log_table(field, frame, n + 1, big_n, idx, kappa);
  GridFn u(frame, n);
  for (std::size_t i = 0; i < frame.size(); ++i)
    u[i] = viscous_velocity_from(field, t, n, frame.node(i, n));
  return u;
}

/// Sigma^{m,n}: distance in quadratic variation from the straight line with
/// the same endpoints.
inline double sigma_stat(const LatticePath& path) {
  if (path.size() < 2) throw std::invalid_argument("sigma_stat: path needs >= 2 points");
  double q = 0.0;
  for (std::size_t i = 1; i < path.size(); ++i) {
    const double d = path.positions[i] - path.positions[i - 1];
    q += d * d;
  }
  const double span = path.positions.back() - path.positions.front();
  const double steps = static_cast<double>(path.size() - 1);
  return std::sqrt(std::max(0.0, q - span * span / steps));
}

/// s with gamma in E_s: floor(Sigma / sqrt(n - m)).
inline std::int64_t band_index(const LatticePath& path) {
  const double steps = static_cast<double>(path.size() - 1);
  return static_cast<std::int64_t>(std::floor(sigma_stat(path) / std::sqrt(steps)));
}

struct FreeEnergyRecord {
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  double kappa = 0.0;
  double p = 0.0;
};

/// p_n(kappa) = kappa ln Z^{0,n}_{0,0;kappa}, or -A^{0,n}(0,0) when kappa = 0.
inline FreeEnergyRecord free_energy(const PotentialField& field, std::int64_t n, double kappa,
                                    const Grid& grid, std::uint64_t seed = 0) {
  if (!(kappa >= 0.0)) throw std::domain_error("free_energy: kappa must be >= 0");
  FreeEnergyRecord rec{seed, n, kappa, 0.0};
  if (kappa == 0.0)
    rec.p = -min_action(field, 0, n, 0.0, 0.0, grid);
  else
    rec.p = kappa * log_partition(field, 0, n, 0.0, 0.0, kappa, grid);
  return rec;
}

}  // namespace kickflow

#endif  // KICKFLOW_GIBBS_HPP
