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

#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "kickflow/zerotemp.hpp"
#include "oracles.hpp"

namespace kickflow {
namespace {

using oracle::make_field;

PotentialField cosine_field(std::uint64_t seed, std::int64_t last = 40) {
  return make_field(PotentialKind::cosine_mixture, seed, {-5, last}, {-60, 60});
}

PotentialField shot_field(std::uint64_t seed, std::int64_t last = 40) {
  return make_field(PotentialKind::shot_noise, seed, {-5, last}, {-60, 60});
}

TEST(Action, Examples) {
  auto zero = make_field(PotentialKind::zero, 0, {0, 4}, {-5, 5});
  LatticePath p{0, {0.0, 0.5, 1.0, 1.5, 2.0}};
  EXPECT_DOUBLE_EQ(action(zero, p).total, 0.5);
  auto c = make_field(PotentialKind::constant, 0, {0, 4}, {-5, 5}, 1.0);
  const auto a = action(c, p);
  EXPECT_DOUBLE_EQ(a.kinetic, 0.5);
  EXPECT_DOUBLE_EQ(a.potential, 4.0);
  EXPECT_DOUBLE_EQ(a.total, 4.5);
  auto f = cosine_field(7);
  LatticePath q{2, {0.3, -0.2, 1.1}};
  const double hand = 0.5 * 0.25 + f.eval(3, -0.2) + 0.5 * 1.69 + f.eval(4, 1.1);
  EXPECT_NEAR(action(f, q).total, hand, 1e-14);
  EXPECT_THROW(action(f, LatticePath{}), std::invalid_argument);
}

TEST(MinAction, ZeroFieldIsParabola) {
  auto zero = make_field(PotentialKind::zero, 0, {0, 4}, {-10, 10});
  Grid g(-4.0, 4.0, 0.25);
  auto slice = min_action_slice(zero, 0, 4, 0.0, g);
  for (double y : {-2.0, -1.0, 0.0, 1.0, 2.0, 3.0})
    EXPECT_EQ(slice.values[*g.find_node(y, 4)], y * y / 8.0) << y;
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double y = g.node(i, 4);
    EXPECT_GE(slice.values[i], y * y / 8.0 - 1e-14);
  }
  auto c = make_field(PotentialKind::constant, 0, {0, 4}, {-10, 10}, -0.75);
  auto sc = min_action_slice(c, 0, 4, 0.0, g);
  for (std::size_t i = 0; i < g.size(); ++i)
    EXPECT_NEAR(sc.values[i], slice.values[i] - 3.0, 1e-13);
}

TEST(MinAction, MatchesEnumeration) {
  Grid g(-1.75, 1.75, 0.25);
  ASSERT_EQ(g.size(), 15u);
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    for (auto f : {cosine_field(seed), shot_field(seed)}) {
      const double x = 0.1;
      auto slice = min_action_slice(f, 2, 5, x, g);
      for (std::size_t t = 0; t < g.size(); t += 3) {
        auto brute = oracle::min_over_paths(f, g, 2, 5, x, t);
        EXPECT_NEAR(slice.values[t], brute.value, 1e-12);
        auto path = minimizer_from(slice, g, t);
        EXPECT_EQ(path.positions, brute.path.positions);
      }
    }
  }
}

TEST(Minimizer, ZeroFieldStraightLine) {
  auto zero = make_field(PotentialKind::zero, 0, {0, 4}, {-10, 10});
  Grid g(-4.0, 4.0, 0.25);
  auto path = minimizer(zero, 0, 4, 0.0, 2.0, g);
  EXPECT_EQ(path.positions, (std::vector<double>{0.0, 0.5, 1.0, 1.5, 2.0}));
  EXPECT_THROW(minimizer(zero, 0, 4, 0.0, 0.1, g), std::invalid_argument);
  EXPECT_THROW(min_action(zero, 0, 4, 0.0, 0.1, g), std::invalid_argument);
}

TEST(Minimizer, ActionEqualsValueAndRestricts) {
  Grid g(-8.0, 8.0, 0.05);
  for (std::uint64_t seed : {4u, 5u}) {
    auto f = shot_field(seed);
    auto slice = min_action_slice(f, 0, 12, 0.37, g);
    const std::size_t target = *g.find_node(1.0, 12);
    auto path = minimizer_from(slice, g, target);
    EXPECT_NEAR(action(f, path).total, slice.values[target], 1e-12);
    // Restriction: optimal pieces of an optimal path.
    for (std::int64_t k : {3, 7}) {
      const double mid = path.at(k);
      const double left = min_action(f, 0, k, 0.37, mid, g);
      const double right = min_action(f, k, 12, mid, 1.0, g);
      EXPECT_NEAR(left + right, slice.values[target], 1e-11);
    }
  }
}

TEST(MinAction, BelowRandomGridPaths) {
  Grid g(-3.0, 3.0, 0.1);
  auto f = cosine_field(11);
  auto slice = min_action_slice(f, 0, 6, 0.0, g);
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, g.size() - 1);
  for (int trial = 0; trial < 2000; ++trial) {
    LatticePath p{0, {0.0}};
    std::size_t last = 0;
    for (std::int64_t k = 1; k <= 6; ++k) {
      last = pick(rng);
      p.positions.push_back(g.node(last, k));
    }
    EXPECT_LE(slice.values[last], action(f, p).total + 1e-12);
  }
}

TEST(MinAction, ForwardAndBackwardRoutesAgree) {
  Grid g(-6.0, 6.0, 0.05);
  auto f = shot_field(8);
  const std::size_t target = *g.find_node(0.5, 15);
  auto table = backward_min_plus(f, g, 4, 15, point_terminal(g, target));
  for (double x : {-1.013, 0.0, 0.77}) {
    const double fwd = min_action(f, 3, 15, x, g.node(target, 15), g);
    EXPECT_NEAR(first_step(f, table, 3, x).value, fwd, 1e-11);
  }
}

TEST(MinAction, ShearIdentity) {
  // With eta_k = gamma_k + v k:
  // A_{F^v}(x, y) = A_F(x + v m, y + v n) - v (y + v n - x - v m) + (n - m) v^2 / 2.
  Grid g(-5.0, 5.0, 0.05);
  auto f = cosine_field(12);
  for (double v : {-0.7, 0.3, 1.0}) {
    auto fv = shear(f, v);
    const Grid frame = g.with_frame(v);
    const std::int64_t m = 1, n = 9;
    const double x = 0.21;
    auto lhs = min_action_slice(fv, m, n, x, g);
    auto rhs = min_action_slice(f, m, n, x + v * m, frame);
    for (std::size_t i = 0; i < g.size(); i += 11) {
      const double y = g.node(i, n);
      const double yv = frame.node(i, n);
      const double expect = rhs.values[i] - v * (yv - x - v * m) + (n - m) * v * v / 2.0;
      EXPECT_NEAR(lhs.values[i], expect, 1e-10) << v << " " << y;
    }
  }
}

TEST(MinAction, ShiftCovariance) {
  auto f = shot_field(13);
  const std::int64_t dn = 3;
  const double dx = 0.4;
  auto fs = shift(f, dn, dx);
  Grid g(-4.0, 4.0, 0.05);
  Grid gs(-4.0 + dx, 4.0 + dx, 0.05);
  auto a = min_action_slice(fs, 0, 8, 0.15, g);
  auto b = min_action_slice(f, dn, 8 + dn, 0.15 + dx, gs);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(a.values[i], b.values[i], 1e-10);
}

TEST(Busemann, ZeroFieldAndCocycle) {
  auto zero = make_field(PotentialKind::zero, 0, {0, 16}, {-10, 10});
  Grid g(-2.0, 2.0, 1.0 / 16.0);
  auto b = busemann_zero(zero, {0, 0.0}, {0, 1.0}, 0.0, 16, g);
  EXPECT_NEAR(b.value, -1.0 / 32.0, 1e-14);
  auto f = shot_field(14);
  Grid wide(-8.0, 8.0, 0.05);
  SpaceTimePoint p1{0, 0.3}, p2{2, -0.6}, p3{1, 1.05};
  for (double v : {0.0, 0.5}) {
    const double b12 = busemann_zero(f, p1, p2, v, 30, wide).value;
    const double b23 = busemann_zero(f, p2, p3, v, 30, wide).value;
    const double b13 = busemann_zero(f, p1, p3, v, 30, wide).value;
    const double b21 = busemann_zero(f, p2, p1, v, 30, wide).value;
    EXPECT_EQ(b12, -b21);
    EXPECT_NEAR(b12 + b23, b13, 1e-12);
    EXPECT_EQ(busemann_zero(f, p1, p1, v, 30, wide).value, 0.0);
  }
  EXPECT_THROW(busemann_zero(f, p1, p2, 0.0, 2, wide), std::invalid_argument);
}

TEST(Busemann, VariationalResidual) {
  auto f = cosine_field(15);
  Grid g(-4.0, 4.0, 0.1);
  EXPECT_LT(busemann_variational_residual(f, 0.0, 20, 2, 5, {1, 0.25}, g), 1e-10);
  EXPECT_LT(busemann_variational_residual(f, 0.4, 20, 3, 6, {0, -0.5}, g), 1e-10);
}

TEST(InviscidVelocity, ZeroAndConstantField) {
  Grid g(-6.0, 6.0, 1.0 / 16.0);
  auto zero = make_field(PotentialKind::zero, 0, {0, 8}, {-20, 20});
  auto c = make_field(PotentialKind::constant, 0, {0, 8}, {-20, 20}, 2.5);
  EXPECT_NEAR(inviscid_velocity(zero, 0, 1.0, 0.5, 8, g), -0.375, 1e-14);
  EXPECT_NEAR(inviscid_velocity(c, 0, 1.0, 0.5, 8, g), -0.375, 1e-14);
  EXPECT_NEAR(inviscid_velocity(zero, 7, 1.0, 0.5, 8, g), -3.0, 1e-14);
  auto prof = inviscid_velocity_profile(zero, 0, 0.0, 8, g);
  EXPECT_NEAR(prof[*g.find_node(2.0, 0)], 0.25, 1e-14);
}

TEST(InviscidVelocity, MatchesBruteFirstStep) {
  Grid g(-1.75, 1.75, 0.25);
  for (std::uint64_t seed : {21u, 22u, 23u, 24u}) {
    auto f = cosine_field(seed);
    for (double x : {-0.6, 0.0, 0.45}) {
      auto brute = oracle::min_over_paths(f, g, 0, 3, x, *g.find_node(0.0, 3));
      EXPECT_DOUBLE_EQ(inviscid_velocity(f, 0, x, 0.0, 3, g), x - brute.path.at(1));
    }
  }
}

TEST(Ladder, ConvergenceFlag) {
  auto tr = make_trace({1, 2, 3, 4, 5}, {0.0, 1.0, 1.05, 1.06, 1.061}, 0.02);
  EXPECT_TRUE(tr.converged);
  EXPECT_EQ(*tr.converged_at, 5);
  EXPECT_DOUBLE_EQ(tr.max_increment, 1.0);
  auto no = make_trace({1, 2, 3}, {0.0, 1.0, 2.0}, 0.02);
  EXPECT_FALSE(no.converged);
}

}  // namespace
}  // namespace kickflow
