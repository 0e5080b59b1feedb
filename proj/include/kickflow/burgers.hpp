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

#ifndef KICKFLOW_BURGERS_HPP
#define KICKFLOW_BURGERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "kickflow/gibbs.hpp"
#include "kickflow/numerics.hpp"
#include "kickflow/potential.hpp"
#include "kickflow/zerotemp.hpp"

namespace kickflow {

struct SecantSlopes {
  double left = 0.0;
  double right = 0.0;
};

/// Secant slopes of U over [1/8, 3/8] and [5/8, 7/8] of the window. The
/// outer eighths are skipped because window truncation bends the edges.
inline SecantSlopes secant_slopes(const GridFn& U) {
  const std::size_t g = U.size();
  const std::size_t a = g / 8, b = 3 * g / 8, c = 5 * g / 8, d = 7 * g / 8;
  return {(U[b] - U[a]) / (U.position(b) - U.position(a)),
          (U[d] - U[c]) / (U.position(d) - U.position(c))};
}

/// Velocity potential U at one time slice, optionally with declared
/// asymptotic slopes (v-, v+).
struct PotentialProfile {
  GridFn U;
  std::optional<SecantSlopes> slopes;

  /// Finite values and, when slopes are declared, secant slopes within tol.
  bool valid(double tol) const {
    for (double v : U.values)
      if (!std::isfinite(v)) return false;
    if (!slopes) return true;
    const auto s = secant_slopes(U);
    return std::abs(s.left - slopes->left) <= tol && std::abs(s.right - slopes->right) <= tol;
  }
};

/// Velocity u at one time slice; x - u(x) should be nondecreasing.
struct VelocityProfile {
  GridFn u;
};

/// [Psi^{m,n}_0 U](x) = min over grid paths from (m, x) of U(gamma_n) + A^{m,n}.
/// Runs the zero-temperature backward DP with U as terminal data.
inline PotentialProfile inviscid_step(const PotentialField& field, const PotentialProfile& U,
                                      std::int64_t m, std::int64_t n, const Grid& grid) {
  if (n <= m) throw std::invalid_argument("inviscid_step: need n > m");
  if (U.U.k != n || !(U.U.grid == grid))
    throw std::invalid_argument("inviscid_step: terminal data must live on slice n of grid");
  auto table = backward_min_plus(field, grid, m, n, U.U.values);
  return {GridFn(grid, m, std::move(table.values.front())), U.slopes};
}

/// Phi^{m,n}_kappa U = -kappa ln Xi^{m,n}_kappa exp(-U / kappa), evaluated as a
/// backward log-domain transfer started from the log density -U / kappa.
inline PotentialProfile viscous_step(const PotentialField& field, const PotentialProfile& U,
                                     std::int64_t m, std::int64_t n, double kappa,
                                     const Grid& grid) {
  detail::require_kappa(kappa);
  if (n <= m) throw std::invalid_argument("viscous_step: need n > m");
  if (U.U.k != n || !(U.U.grid == grid))
    throw std::invalid_argument("viscous_step: terminal data must live on slice n of grid");
  const std::size_t g = grid.size();
  std::vector<double> cur(g);
  for (std::size_t i = 0; i < g; ++i) cur[i] = -U.U[i] / kappa;
  const auto lk = detail::log_kernel_table(grid, kappa);
  std::vector<double> in(g);
  for (std::int64_t k = n - 1; k >= m; --k) {
    const auto f = detail::scaled_potential(field, grid, k + 1, kappa);
    for (std::size_t i = 0; i < g; ++i) in[i] = cur[i] - f[i];
    detail::log_convolve(in, grid, kappa, lk, true, cur);
  }
  detail::check_slice(cur, "viscous_step");
  GridFn out(grid, m);
  for (std::size_t i = 0; i < g; ++i) out[i] = -kappa * cur[i];
  return {std::move(out), U.slopes};
}

/// u = dU/dx by centred differences, one-sided at the two edge nodes.
inline VelocityProfile velocity_of(const PotentialProfile& U) {
  const GridFn& f = U.U;
  const std::size_t g = f.size();
  const double h = f.grid.h();
  GridFn u(f.grid, f.k);
  for (std::size_t i = 1; i + 1 < g; ++i) u[i] = (f[i + 1] - f[i - 1]) / (2.0 * h);
  u[0] = (f[1] - f[0]) / h;
  u[g - 1] = (f[g - 1] - f[g - 2]) / h;
  return {std::move(u)};
}

/// Largest decrease of x - u(x) between neighbouring nodes (0 if monotone).
inline double check_monotone(const VelocityProfile& v) {
  const GridFn& u = v.u;
  double worst = 0.0;
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double a = u.position(i) - u[i];
    const double b = u.position(i + 1) - u[i + 1];
    worst = std::max(worst, a - b);
  }
  return worst;
}

/// Jump threshold theta_J = 10 x the median one-step increment of x - u
/// (10 h if that median is 0).
inline double jump_threshold(const VelocityProfile& v) {
  const GridFn& u = v.u;
  std::vector<double> inc;
  inc.reserve(u.size());
  for (std::size_t i = 0; i + 1 < u.size(); ++i)
    inc.push_back(std::abs((u.position(i + 1) - u[i + 1]) - (u.position(i) - u[i])));
  if (inc.empty()) return kInf;
  auto mid = inc.begin() + static_cast<std::ptrdiff_t>(inc.size() / 2);
  std::nth_element(inc.begin(), mid, inc.end());
  const double med = *mid;
  return 10.0 * (med > 0.0 ? med : u.grid.h());
}

/// Nodes adjacent to a jump of x - u.
inline std::vector<bool> jump_nodes(const VelocityProfile& v) {
  const GridFn& u = v.u;
  const double theta = jump_threshold(v);
  std::vector<bool> jump(u.size(), false);
  for (std::size_t i = 0; i + 1 < u.size(); ++i) {
    const double inc = std::abs((u.position(i + 1) - u[i + 1]) - (u.position(i) - u[i]));
    if (inc > theta) jump[i] = jump[i + 1] = true;
  }
  return jump;
}

/// Weighted L1 distance h sum w(x_i) |u1 - u2| with a triangular weight of
/// the given half-width centred on the frame, skipping jump nodes of either
/// profile.
inline double g_metric(const VelocityProfile& a, const VelocityProfile& b,
                       double weight_halfwidth) {
  if (!(a.u.grid == b.u.grid) || a.u.k != b.u.k)
    throw std::invalid_argument("g_metric: profiles on different slices");
  if (!(weight_halfwidth > 0.0)) throw std::invalid_argument("g_metric: half-width must be > 0");
  const auto ja = jump_nodes(a);
  const auto jb = jump_nodes(b);
  const Grid& grid = a.u.grid;
  const double centre = grid.frame_velocity() * static_cast<double>(a.u.k);
  double s = 0.0;
  for (std::size_t i = 0; i < a.u.size(); ++i) {
    if (ja[i] || jb[i]) continue;
    const double w = std::max(0.0, 1.0 - std::abs(a.u.position(i) - centre) / weight_halfwidth);
    s += w * std::abs(a.u[i] - b.u[i]);
  }
  return grid.h() * s;
}

/// sum of the triangular weights over the nodes (h sum w = c-shift response).
inline double g_metric_weight_sum(const Grid& grid, std::int64_t k, double weight_halfwidth) {
  const double centre = grid.frame_velocity() * static_cast<double>(k);
  double s = 0.0;
  for (std::size_t i = 0; i < grid.size(); ++i)
    s += std::max(0.0, 1.0 - std::abs(grid.node(i, k) - centre) / weight_halfwidth);
  return s;
}

}  // namespace kickflow

#endif  // KICKFLOW_BURGERS_HPP
