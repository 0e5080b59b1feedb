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

// Acceptance run: one PASS/FAIL line per criterion, exit status 0 iff all pass.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kickflow/burgers.hpp"
#include "kickflow/experiments.hpp"
#include "kickflow/gibbs.hpp"
#include "kickflow/report.hpp"
#include "kickflow/zerotemp.hpp"
#include "oracles.hpp"

namespace {

using namespace kickflow;

struct Outcome {
  bool passed = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    passed = passed && ok;
    if (!detail.empty()) detail += "; ";
    detail += (ok ? "" : "FAILED ") + what;
  }
};

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

PotentialField field_for(PotentialKind kind, std::uint64_t seed, TimeWindow t = {-2, 40}) {
  return oracle::make_field(kind, seed, t, {-60, 60});
}

const PotentialKind kRandomKinds[] = {PotentialKind::cosine_mixture, PotentialKind::shot_noise};

// 1. Closed-form zero-potential suite.
Outcome closed_form_zero() {
  Outcome o;
  auto zero = field_for(PotentialKind::zero, 0);
  {
    Grid g(-4.0, 4.0, 0.25);
    const double a = min_action(zero, 0, 4, 0.0, 2.0, g);
    o.require(a == 0.5, "A(0,2) over 4 steps = " + num(a));
  }
  {
    // Compared over +-6 sqrt(n kappa); the grid extends to +-9 sqrt(n kappa)
    // so edge truncation stays out of the comparison window.
    const double kappa = 0.5;
    const std::int64_t n = 8;
    const double w = 6.0 * std::sqrt(n * kappa);
    Grid g(-1.5 * w, 1.5 * w, 0.02);
    double worst = 0.0;
    for (double x : {0.0, 0.3}) {
      auto s = forward_slice(zero, 0, x, n, kappa, g);
      for (std::size_t i = 0; i < g.size(); ++i) {
        const double y = g.node(i, n);
        if (std::abs(y - x) > w) continue;
        const double var = n * kappa;
        const double exact = -(y - x) * (y - x) / (2.0 * var) - 0.5 * std::log(2.0 * std::numbers::pi * var);
        worst = std::max(worst, std::abs(s.log_zhat[i] - exact));
      }
    }
    o.require(worst <= 1e-6, "max |ln Zhat - ln g| = " + num(worst));
  }
  {
    const double kappa = 0.4;
    Grid g(-10.0, 12.0, 0.02);
    double worst = 0.0;
    for (std::int64_t k : {2, 4, 6}) {
      auto d = polymer_marginal(zero, 0, 8, 0.0, 2.0, kappa, g, k);
      const double mean = 2.0 * k / 8.0;
      const double var = kappa * k * (8.0 - k) / 8.0;
      worst = std::max({worst, std::abs(d.mean() - mean) / std::max(1.0, std::abs(mean)),
                        std::abs(d.variance() - var) / var});
    }
    o.require(worst <= 0.01, "bridge moments max relative error = " + num(worst));
  }
  return o;
}

// 2. Exact identities on every sampled realization.
Outcome exact_identities() {
  Outcome o;
  double shear_a = 0, shear_z = 0, shift_err = 0, semigroup = 0, op_cocycle = 0, busemann = 0;
  double sandwich_low = kInf, sandwich_excess = -kInf;
  Grid g(-5.0, 5.0, 0.05);
  for (auto kind : kRandomKinds) {
    for (std::uint64_t seed = 0; seed < 6; ++seed) {
      auto f = field_for(kind, 100 + seed);
      const std::int64_t m = 1, n = 9;
      const double x = 0.21;
      for (double v : {-0.6, 0.45}) {
        const Grid frame = g.with_frame(v);
        auto fv = shear(f, v);
        auto a_l = min_action_slice(fv, m, n, x, g);
        auto a_r = min_action_slice(f, m, n, x + v * m, frame);
        auto z_l = forward_slice(fv, m, x, n, 0.3, g);
        auto z_r = forward_slice(f, m, x + v * m, n, 0.3, frame);
        for (std::size_t i = 0; i < g.size(); ++i) {
          const double eta = frame.node(i, n);
          const double drift = v * (eta - x - v * m) - (n - m) * v * v / 2.0;
          shear_a = std::max(shear_a, std::abs(a_l.values[i] - (a_r.values[i] - drift)));
          shear_z = std::max(shear_z, std::abs(z_l.log_zhat[i] - (z_r.log_zhat[i] + drift / 0.3)));
        }
      }
      {
        const std::int64_t dn = 3;
        const double dx = 0.4;
        auto fs = shift(f, dn, dx);
        Grid gs(-5.0 + dx, 5.0 + dx, 0.05);
        auto a = min_action_slice(fs, 0, 8, 0.15, g);
        auto b = min_action_slice(f, dn, 8 + dn, 0.15 + dx, gs);
        auto za = forward_slice(fs, 0, 0.15, 8, 0.3, g);
        auto zb = forward_slice(f, dn, 0.15 + dx, 8 + dn, 0.3, gs);
        for (std::size_t i = 0; i < g.size(); ++i)
          shift_err = std::max({shift_err, std::abs(a.values[i] - b.values[i]),
                            std::abs(za.log_zhat[i] - zb.log_zhat[i])});
      }
      {
        const std::size_t target = *g.find_node(0.5, n);
        auto fwd = forward_log_slices(f, m, -0.23, n, 0.3, g);
        auto bwd = backward_log_table(f, g, m + 1, n, target, 0.3);
        const double full = fwd.back()[target];
        semigroup = std::max(semigroup, std::abs(log_zhat_from(f, bwd, m, -0.23) - full));
        for (std::int64_t k = m + 1; k < n; ++k) {
          GridFn sum(g, k, Scale::log);
          const auto r = bwd.at(k);
          for (std::size_t i = 0; i < g.size(); ++i) sum[i] = fwd[static_cast<std::size_t>(k - m - 1)][i] + r[i];
          semigroup = std::max(semigroup, std::abs(log_integral(sum) - full));
        }
      }
      {
        GridFn U(g, 9);
        for (std::size_t i = 0; i < g.size(); ++i) U[i] = 0.5 * U.position(i) * U.position(i);
        const PotentialProfile P{U, std::nullopt};
        for (double kappa : {0.0, 0.25}) {
          auto step = [&](const PotentialProfile& p, std::int64_t a, std::int64_t b) {
            return kappa == 0.0 ? inviscid_step(f, p, a, b, g) : viscous_step(f, p, a, b, kappa, g);
          };
          auto direct = step(P, 2, 9);
          auto composed = step(step(P, 5, 9), 2, 5);
          for (std::size_t i = 0; i < g.size(); ++i)
            op_cocycle = std::max(op_cocycle, std::abs(direct.U[i] - composed.U[i]) /
                                                  std::max(1.0, std::abs(direct.U[i])));
        }
      }
      {
        SpaceTimePoint p1{0, 0.3}, p2{2, -0.6}, p3{1, 1.05};
        const double v = 0.25;
        const std::int64_t big_n = 16;
        auto b = [&](SpaceTimePoint a, SpaceTimePoint c) { return busemann_zero(f, a, c, v, big_n, g).value; };
        auto lg = [&](SpaceTimePoint a, SpaceTimePoint c) { return g_ratio(f, a, c, v, 0.3, big_n, g); };
        busemann = std::max({busemann, std::abs(b(p1, p2) + b(p2, p3) - b(p1, p3)),
                             std::abs(b(p1, p2) + b(p2, p1)), std::abs(lg(p1, p2) + lg(p2, p3) - lg(p1, p3)),
                             std::abs(lg(p1, p2) + lg(p2, p1)), std::abs(b(p1, p1)), std::abs(lg(p1, p1))});
      }
      {
        const double a = min_action(f, 0, 6, 0.0, 0.5, g);
        const double log_g = std::log(static_cast<double>(g.size()));
        for (double kappa : {0.4, 0.1, 0.02}) {
          const double lzt = z_to_ztilde(log_partition(f, 0, 6, 0.0, 0.5, kappa, g), 6, g.h());
          const double gap = kappa * lzt + a;
          sandwich_low = std::min(sandwich_low, gap);
          sandwich_excess = std::max(sandwich_excess, gap - kappa * 5.0 * log_g);
        }
      }
    }
  }
  o.require(shear_a <= 1e-10, "shear A " + num(shear_a));
  o.require(shear_z <= 1e-9, "shear ln Zhat " + num(shear_z));
  o.require(shift_err <= 1e-10, "shift " + num(shift_err));
  o.require(semigroup <= 1e-10, "transfer semigroup " + num(semigroup));
  o.require(op_cocycle <= 1e-10, "operator cocycle " + num(op_cocycle));
  o.require(busemann <= 1e-9, "Busemann/G cocycle+antisymmetry " + num(busemann));
  o.require(sandwich_low >= 0.0 && sandwich_excess <= 0.0,
            "sandwich min " + num(sandwich_low) + ", max excess " + num(sandwich_excess));
  return o;
}

// 3. Dynamic programs against exhaustive enumeration.
Outcome brute_force() {
  Outcome o;
  Grid g(-1.75, 1.75, 0.25);
  double dmin = 0, dlog = 0, dmarg = 0, tv = 0;
  for (auto kind : kRandomKinds) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      auto f = field_for(kind, 200 + seed);
      const std::int64_t m = 2, n = 5;
      const double x = 0.1, kappa = 0.4;
      auto slice = min_action_slice(f, m, n, x, g);
      auto zs = forward_slice(f, m, x, n, kappa, g);
      for (std::size_t t = 0; t < g.size(); ++t) {
        dmin = std::max(dmin, std::abs(slice.values[t] - oracle::min_over_paths(f, g, m, n, x, t).value));
        const double lz = oracle::log_zhat(f, g, m, n, x, t, kappa);
        dlog = std::max(dlog, std::abs(zs.log_zhat[t] - lz) / std::max(1.0, std::abs(lz)));
      }
      const std::size_t target = *g.find_node(0.25, n);
      const auto fwd = forward_log_slices(f, m, x, n - 1, kappa, g);
      rng::Stream rng(rng::derive_seed(seed, 0, rng::kTagSampler));
      std::vector<std::vector<double>> counts(2, std::vector<double>(g.size(), 0.0));
      const int samples = 100000;
      for (int s = 0; s < samples; ++s) {
        auto p = sample_path_with(fwd, m, x, n, target, kappa, g, rng);
        for (std::int64_t k = m + 1; k < n; ++k)
          counts[static_cast<std::size_t>(k - m - 1)][*g.find_node(p.at(k), k)] += 1.0 / samples;
      }
      for (std::int64_t k = m + 1; k < n; ++k) {
        auto d = polymer_marginal(f, m, n, x, g.node(target, n), kappa, g, k);
        auto b = oracle::marginal(f, g, m, n, x, target, kappa, k);
        for (std::size_t i = 0; i < g.size(); ++i) dmarg = std::max(dmarg, std::abs(d.p[i] - b[i]));
        tv = std::max(tv, total_variation(counts[static_cast<std::size_t>(k - m - 1)], b));
      }
    }
  }
  o.require(dmin <= 1e-12, "min-action " + num(dmin));
  o.require(dlog <= 1e-12, "log-partition " + num(dlog));
  o.require(dmarg <= 1e-12, "marginal " + num(dmarg));
  o.require(tv < 0.02, "sampler TV " + num(tv));
  return o;
}

/// Runs the experiment and requires every check in its report.
Outcome experiment(const std::string& name, const std::string& config, int jobs = 1) {
  Outcome o;
  const RunConfig c = parse_config(Json::parse(config));
  const Report r = run_experiment(name, c, jobs);
  for (const auto& check : r.checks) o.require(check.passed, check.name + " [" + check.detail + "]");
  return o;
}

const char* kShotSharp =
    R"("potential": {"kind": "smoothed-shot-noise", "intensity": 4, "bump_width": 0.4,
                     "amplitude_lo": 1, "amplitude_hi": 2})";

std::string zero_temperature_config() {
  return std::string(R"({"experiment": "zero_temperature_limit", )") + kShotSharp + R"(,
    "grid": {"x_lo": -8, "x_hi": 8, "h": 0.04},
    "run": {"m": 0, "x": 0, "horizon": 20, "velocity": 0, "kappas": [0.4, 0.2, 0.1, 0.05],
            "seed_count": 32, "master_seed": 1},
    "tolerances": {"vote_fraction": 0.8, "max_inversions": 0, "gap_ratio": 3}})";
}

std::string limit_config(const char* name) {
  return std::string(R"({"experiment": ")") + name + R"(", )" + kShotSharp + R"(,
    "grid": {"x_lo": -8, "x_hi": 8, "h": 0.04},
    "run": {"n": 0, "horizon": 20, "horizons": [10, 15, 20], "anchors": [[0, -1], [0, 1]],
            "velocity": 0, "kappas": [0.4, 0.2, 0.1, 0.05], "seed_count": 32, "master_seed": 1},
    "tolerances": {"vote_fraction": 0.8, "spearman_min": 0.8}})";
}

const char* kShapeConfig = R"({"experiment": "shape",
    "potential": {"kind": "cosine-mixture"},
    "grid": {"x_lo": -24, "x_hi": 24, "h": 0.08},
    "run": {"n": 200, "velocities": [-1, -0.5, 0, 0.5, 1], "kappas": [0.2],
            "seed_count": 20, "master_seed": 1},
    "tolerances": {"identity": 1e-9, "shape_z": 5}})";

const char* kConcentrationConfig = R"({"experiment": "concentration",
    "potential": {"kind": "smoothed-shot-noise"},
    "grid": {"x_lo": -24, "x_hi": 24, "h": 0.08},
    "run": {"n_list": [25, 50, 100, 200], "kappas": [0, 0.2], "seed_count": 64, "master_seed": 1},
    "tolerances": {"beta_max": 0.75}})";

// 9. Rows do not depend on the number of worker threads.
Outcome reproducibility() {
  Outcome o;
  const std::vector<std::pair<std::string, std::string>> cases{
      {"shape", R"({"experiment": "shape", "potential": {"kind": "cosine-mixture"},
                   "grid": {"x_lo": -6, "x_hi": 6, "h": 0.1},
                   "run": {"n": 20, "velocities": [-0.5, 0, 0.5], "kappas": [0, 0.3], "seed_count": 9}})"},
      {"concentration", R"({"experiment": "concentration", "potential": {"kind": "smoothed-shot-noise"},
                   "grid": {"x_lo": -6, "x_hi": 6, "h": 0.1},
                   "run": {"n_list": [5, 10, 20], "kappas": [0, 0.3], "seed_count": 9}})"},
      {"zero_temperature_limit", R"({"experiment": "zero_temperature_limit",
                   "potential": {"kind": "smoothed-shot-noise"}, "grid": {"x_lo": -5, "x_hi": 5, "h": 0.1},
                   "run": {"horizon": 10, "kappas": [0.4, 0.1], "seed_count": 9}})"},
      {"inviscid_limit", R"({"experiment": "inviscid_limit", "potential": {"kind": "cosine-mixture"},
                   "grid": {"x_lo": -5, "x_hi": 5, "h": 0.1},
                   "run": {"horizon": 10, "velocity": 0.3, "kappas": [0.4, 0.1], "seed_count": 9}})"},
      {"busemann_limit", R"({"experiment": "busemann_limit", "potential": {"kind": "cosine-mixture"},
                   "grid": {"x_lo": -5, "x_hi": 5, "h": 0.1},
                   "run": {"horizons": [6, 10], "kappas": [0.4, 0.1], "seed_count": 9}})"},
      {"overlap", R"({"experiment": "overlap", "potential": {"kind": "smoothed-shot-noise"},
                   "grid": {"x_lo": -5, "x_hi": 5, "h": 0.1},
                   "run": {"horizon": 10, "kappas": [0.3], "seed_count": 9}})"},
  };
  for (const auto& [name, cfg] : cases) {
    const RunConfig c = parse_config(Json::parse(cfg));
    const Report a = run_experiment(name, c, 1);
    const Report b = run_experiment(name, c, 8);
    const bool same = a.rows_json().dump() == b.rows_json().dump() && rows_to_csv(a.rows) == rows_to_csv(b.rows);
    o.require(same && !a.rows.empty(), name + " rows " + (same ? "identical" : "differ"));
  }
  return o;
}

struct Criterion {
  int id;
  const char* title;
  double budget_seconds;
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "closed-form zero-potential suite", 30, closed_form_zero},
      {2, "exact per-realization identities", 0, exact_identities},
      {3, "brute-force oracle equivalence", 60, brute_force},
      {4, "zero-temperature limit", 600, [] { return experiment("zero_temperature_limit", zero_temperature_config()); }},
      {5, "inviscid limit", 600, [] { return experiment("inviscid_limit", limit_config("inviscid_limit")); }},
      {6, "Busemann limit", 600, [] { return experiment("busemann_limit", limit_config("busemann_limit")); }},
      {7, "shape function", 900, [] { return experiment("shape", kShapeConfig); }},
      {8, "concentration scaling", 1200, [] { return experiment("concentration", kConcentrationConfig); }},
      {9, "reproducibility across -j 1 and -j 8", 0, reproducibility},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.passed = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.budget_seconds > 0) o.require(secs < c.budget_seconds, "runtime " + num(secs) + " s < " + num(c.budget_seconds) + " s");
    std::printf("%s criterion %d (%s): %s [%.1f s]\n", o.passed ? "PASS" : "FAIL", c.id, c.title,
                o.detail.c_str(), secs);
    std::fflush(stdout);
    failed += !o.passed;
  }
  std::printf("%s: %d of %zu criteria passed\n", failed ? "FAIL" : "PASS",
              static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed ? 1 : 0;
}
