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

#ifndef KICKFLOW_EXPERIMENTS_HPP
#define KICKFLOW_EXPERIMENTS_HPP

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "kickflow/burgers.hpp"
#include "kickflow/config.hpp"
#include "kickflow/gibbs.hpp"
#include "kickflow/numerics.hpp"
#include "kickflow/potential.hpp"
#include "kickflow/stats.hpp"
#include "kickflow/zerotemp.hpp"

namespace kickflow {

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

/// Self-describing experiment output. Rows are a pure function of the
/// config; wall-clock time is kept outside them.
struct Report {
  std::string experiment;
  std::string theorem;
  Json config;
  std::string config_hash;
  std::vector<Json> rows;
  Json summary = Json::object();
  std::vector<Check> checks;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;

  bool passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
  }

  void check(std::string name, bool ok, std::string detail) {
    checks.push_back({std::move(name), ok, std::move(detail)});
  }

  Json rows_json() const {
    Json a = Json::array();
    for (const auto& r : rows) a.push_back(r);
    return a;
  }

  Json to_json() const {
    Json j;
    j["experiment"] = experiment;
    j["theorem"] = theorem;
    j["config_hash"] = config_hash;
    j["config"] = config;
    j["rows"] = rows_json();
    j["summary"] = summary;
    Json cs = Json::array();
    for (const auto& c : checks) cs.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    j["checks"] = cs;
    j["warnings"] = warnings;
    j["passed"] = passed();
    j["wall_seconds"] = wall_seconds;
    return j;
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

inline Report start_report(std::string name, std::string theorem, const RunConfig& c) {
  Report r;
  r.experiment = std::move(name);
  r.theorem = std::move(theorem);
  r.config = config_to_json(c);
  r.config_hash = config_hash(c);
  return r;
}

/// The minimizer and global-solution results behind the limit experiments
/// assume a finite dependence range.
inline void warn_if_infinite_range(Report& rep, const RunConfig& c) {
  if (!c.potential.finite_range())
    rep.warnings.push_back("potential '" + std::string(to_string(c.potential.kind)) +
                           "' has infinite dependence range; use smoothed-shot-noise for this experiment");
}

inline Json base_row(std::uint64_t seed, double kappa, double v, std::int64_t n, const Grid& g) {
  Json r;
  r["seed"] = seed;
  r["kappa"] = kappa;
  r["v"] = v;
  r["n"] = n;
  r["grid"] = g.signature();
  return r;
}

/// The realization used for seed `seed`; `cell` separates independent
/// draws within one seed.
inline PotentialField realize(const RunConfig& c, std::uint64_t seed, std::int64_t cell,
                              TimeWindow time, const std::vector<Grid>& frames) {
  PotentialSpec spec = c.potential;
  spec.master_seed = rng::derive_seed(c.run.master_seed, static_cast<std::int64_t>(seed),
                                      rng::kTagRealization, cell);
  double lo = kInf, hi = -kInf;
  for (const auto& g : frames) {
    const auto [a, b] = g.extent(time.first, time.last);
    lo = std::min(lo, a);
    hi = std::max(hi, b);
  }
  return sample_potential(spec, time, {lo - 1.0, hi + 1.0});
}

inline std::vector<double> descending_positive(std::vector<double> kappas, const char* field) {
  std::vector<double> out;
  for (double k : kappas)
    if (k > 0.0) out.push_back(k);
  std::sort(out.begin(), out.end(), std::greater<>());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  if (out.empty()) throw ConfigError(field, "needs at least one kappa > 0");
  return out;
}

inline void require(bool ok, const char* field, const char* what) {
  if (!ok) throw ConfigError(field, what);
}

inline bool degenerate_kind(const PotentialSpec& s) {
  return s.kind == PotentialKind::zero || s.kind == PotentialKind::constant;
}

/// Fraction of seeds whose flag is set.
inline double fraction(const std::vector<bool>& flags) {
  if (flags.empty()) return 0.0;
  return static_cast<double>(std::count(flags.begin(), flags.end(), true)) /
         static_cast<double>(flags.size());
}

/// Residual slack for identities between values of size |scale|.
inline double slack(double tol, double scale) { return tol * std::max(1.0, std::abs(scale)); }

}  // namespace detail

/// alpha_kappa(v) from kappa ln Z^{0,n}(0, vn) / n, computed directly on the
/// frame-v grid and through the sheared potential at slope 0.
inline Report run_shape(const RunConfig& c, int jobs) {
  auto rep = detail::start_report(
      "shape", "shape function: kappa ln Z(0, vn) / n -> alpha_kappa(v) = alpha_{0;kappa} - v^2/2", c);
  const auto& run = c.run;
  detail::require(run.n >= 1, "run.n", "shape needs n >= 1");
  detail::require(!run.kappas.empty(), "run.kappas", "shape needs kappas");
  detail::require(std::find(run.velocities.begin(), run.velocities.end(), 0.0) != run.velocities.end(),
                  "run.velocities", "shape needs v = 0 among the velocities");
  const Grid base = c.grid.make().with_frame(0.0);
  const std::int64_t n = run.n;
  std::vector<Grid> frames;
  for (double v : run.velocities) frames.push_back(base.with_frame(v));

  struct Cell {
    double direct, sheared;
  };
  auto per_seed = parallel_map(run.seeds.size(), jobs, [&](std::size_t s) {
    const auto field = detail::realize(c, run.seeds[s], 0, {0, n}, frames);
    std::vector<Cell> cells;
    for (double kappa : run.kappas) {
      for (std::size_t iv = 0; iv < run.velocities.size(); ++iv) {
        const double v = run.velocities[iv];
        const double y = v * static_cast<double>(n);
        const auto sheared_field = shear(field, v);
        const double drift = 0.5 * static_cast<double>(n) * v * v;
        Cell cell{};
        if (kappa > 0.0) {
          cell.direct = kappa * log_partition(field, 0, n, 0.0, y, kappa, frames[iv]);
          cell.sheared = kappa * log_partition(sheared_field, 0, n, 0.0, 0.0, kappa, base) - drift;
        } else {
          cell.direct = -min_action(field, 0, n, 0.0, y, frames[iv]);
          cell.sheared = -min_action(sheared_field, 0, n, 0.0, 0.0, base) - drift;
        }
        cells.push_back(cell);
      }
    }
    return cells;
  });

  const std::size_t nv = run.velocities.size();
  const std::size_t iv0 =
      static_cast<std::size_t>(std::find(run.velocities.begin(), run.velocities.end(), 0.0) -
                               run.velocities.begin());
  double worst_route = 0.0;
  for (std::size_t s = 0; s < run.seeds.size(); ++s)
    for (std::size_t ik = 0; ik < run.kappas.size(); ++ik)
      for (std::size_t iv = 0; iv < nv; ++iv) {
        const auto& cell = per_seed[s][ik * nv + iv];
        const double v = run.velocities[iv];
        Json row = detail::base_row(run.seeds[s], run.kappas[ik], v, n, frames[iv]);
        row["p_direct"] = cell.direct;
        row["p_sheared"] = cell.sheared;
        row["route_diff"] = cell.direct - cell.sheared;
        row["alpha"] = cell.direct / static_cast<double>(n);
        worst_route = std::max(worst_route, std::abs(cell.direct - cell.sheared));
        rep.rows.push_back(std::move(row));
      }
  rep.check("shear route agreement", worst_route <= c.tolerances.identity,
            "max |direct - sheared| = " + detail::fmt(worst_route));

  Json estimates = Json::array();
  const double nn = static_cast<double>(n);
  for (std::size_t ik = 0; ik < run.kappas.size(); ++ik) {
    const double kappa = run.kappas[ik];
    Json est;
    est["kappa"] = kappa;
    est["v"] = run.velocities;
    Json alpha = Json::array(), alpha_se = Json::array(), dev = Json::array(), dev_se = Json::array();
    double worst_z = 0.0;
    bool degenerate_ok = true;
    for (std::size_t iv = 0; iv < nv; ++iv) {
      const double v = run.velocities[iv];
      std::vector<double> a, d;
      for (std::size_t s = 0; s < run.seeds.size(); ++s) {
        const double pv = per_seed[s][ik * nv + iv].direct;
        const double p0 = per_seed[s][ik * nv + iv0].direct;
        a.push_back(pv / nn);
        d.push_back((pv - p0) / nn + 0.5 * v * v);
      }
      const double dm = stats::mean(d), dse = stats::standard_error(d);
      alpha.push_back(stats::mean(a));
      alpha_se.push_back(stats::standard_error(a));
      dev.push_back(dm);
      dev_se.push_back(dse);
      if (iv == iv0) continue;
      if (dse > 0.0)
        worst_z = std::max(worst_z, std::abs(dm) / dse);
      else if (std::abs(dm) > c.tolerances.identity)
        degenerate_ok = false;
    }
    est["alpha"] = alpha;
    est["alpha_stderr"] = alpha_se;
    est["alpha_0"] = alpha[iv0];
    est["quadratic_deviation"] = dev;
    est["quadratic_deviation_stderr"] = dev_se;
    est["max_z"] = worst_z;
    estimates.push_back(est);
    rep.check("quadratic shape kappa=" + detail::fmt(kappa),
              degenerate_ok && worst_z < c.tolerances.shape_z,
              "max |alpha(v) - alpha(0) + v^2/2| / stderr = " + detail::fmt(worst_z));
    if (detail::degenerate_kind(c.potential)) {
      // alpha + v^2/2 + c = (kappa / n) (n/2 ln(2 pi kappa) - 1/2 ln(2 pi n kappa)).
      const double two_pi = 2.0 * std::numbers::pi;
      const double level = c.potential.kind == PotentialKind::constant ? c.potential.level : 0.0;
      double worst = 0.0;
      for (std::size_t iv = 0; iv < nv; ++iv) {
        const double v = run.velocities[iv];
        double expect = -0.5 * v * v - level;
        if (kappa > 0.0)
          expect += kappa / nn * (0.5 * nn * std::log(two_pi * kappa) - 0.5 * std::log(two_pi * nn * kappa));
        worst = std::max(worst, std::abs(alpha[iv].get<double>() - expect));
      }
      rep.check("closed form kappa=" + detail::fmt(kappa), worst <= c.tolerances.closed_form,
                "max |alpha - closed form| = " + detail::fmt(worst));
    }
  }
  rep.summary["estimates"] = estimates;
  return rep;
}

/// Seed-to-seed spread of p_n(kappa) against n, fitted as sd ~ C n^beta.
inline Report run_concentration(const RunConfig& c, int jobs) {
  auto rep = detail::start_report(
      "concentration", "free-energy concentration: sd p_n(kappa) = O(sqrt(n) ln^{3/2} n)", c);
  const auto& run = c.run;
  detail::require(!run.n_list.empty(), "run.n_list", "concentration needs n_list");
  detail::require(!run.kappas.empty(), "run.kappas", "concentration needs kappas");
  for (auto n : run.n_list) detail::require(n >= 1, "run.n_list", "entries must be >= 1");
  const Grid grid = c.grid.make();
  const double log_g = std::log(static_cast<double>(grid.size()));

  struct Cell {
    double p, sandwich;
  };
  auto per_seed = parallel_map(run.seeds.size(), jobs, [&](std::size_t s) {
    std::vector<Cell> cells;
    for (auto n : run.n_list) {
      const auto field = detail::realize(c, run.seeds[s], n, {0, n}, {grid});
      const double a = min_action(field, 0, n, 0.0, 0.0, grid);
      for (double kappa : run.kappas) {
        if (kappa == 0.0) {
          cells.push_back({-a, 0.0});
          continue;
        }
        const double lz = log_partition(field, 0, n, 0.0, 0.0, kappa, grid);
        cells.push_back({kappa * lz, kappa * z_to_ztilde(lz, n, grid.h()) + a});
      }
    }
    return cells;
  });

  const std::size_t nk = run.kappas.size();
  bool sandwich_ok = true;
  double worst_excess = 0.0;
  for (std::size_t s = 0; s < run.seeds.size(); ++s)
    for (std::size_t in = 0; in < run.n_list.size(); ++in)
      for (std::size_t ik = 0; ik < nk; ++ik) {
        const auto n = run.n_list[in];
        const double kappa = run.kappas[ik];
        const auto& cell = per_seed[s][in * nk + ik];
        Json row = detail::base_row(run.seeds[s], kappa, 0.0, n, grid);
        row["p"] = cell.p;
        row["sandwich_gap"] = cell.sandwich;
        if (kappa > 0.0) {
          const double upper = kappa * static_cast<double>(n - 1) * log_g;
          const double tol = detail::slack(c.tolerances.identity, cell.p);
          if (cell.sandwich < -tol || cell.sandwich > upper + tol) sandwich_ok = false;
          worst_excess = std::max({worst_excess, -cell.sandwich, cell.sandwich - upper});
        }
        rep.rows.push_back(std::move(row));
      }
  rep.check("log-sum-exp sandwich", sandwich_ok,
            "max excess outside [0, kappa (n-1) ln G] = " + detail::fmt(worst_excess));

  Json fits = Json::array();
  const bool degenerate = detail::degenerate_kind(c.potential);
  for (std::size_t ik = 0; ik < nk; ++ik) {
    const double kappa = run.kappas[ik];
    std::vector<double> sds, log_n, log_sd;
    for (std::size_t in = 0; in < run.n_list.size(); ++in) {
      std::vector<double> p;
      for (std::size_t s = 0; s < run.seeds.size(); ++s) p.push_back(per_seed[s][in * nk + ik].p);
      const double sd = stats::sample_sd(p);
      sds.push_back(sd);
      if (sd > 0.0) {
        log_n.push_back(std::log(static_cast<double>(run.n_list[in])));
        log_sd.push_back(std::log(sd));
      }
    }
    Json fit;
    fit["kappa"] = kappa;
    fit["n"] = run.n_list;
    fit["sd"] = sds;
    if (degenerate) {
      const bool zero = std::all_of(sds.begin(), sds.end(), [](double v) { return v == 0.0; });
      rep.check("degenerate fluctuations kappa=" + detail::fmt(kappa), zero,
                "sd over seeds must vanish for a non-random potential");
    } else if (log_n.size() >= 2 && run.seeds.size() >= 2) {
      const auto f = stats::linear_fit(log_n, log_sd);
      // Delta method: Var(ln sd) ~ 1 / (2 (S - 1)) for a near-Gaussian sample.
      const double var_log_sd = 1.0 / (2.0 * static_cast<double>(run.seeds.size() - 1));
      const double se = std::sqrt(var_log_sd / f.sxx);
      const double upper = f.slope + 1.96 * se;
      fit["beta"] = f.slope;
      fit["beta_stderr"] = se;
      fit["beta_upper95"] = upper;
      fit["log_C"] = f.intercept;
      rep.check("fluctuation exponent kappa=" + detail::fmt(kappa), upper < c.tolerances.beta_max,
                "beta = " + detail::fmt(f.slope) + ", upper 95% = " + detail::fmt(upper));
    }
    fits.push_back(fit);
  }
  rep.summary["fits"] = fits;
  return rep;
}

namespace detail {

/// Trend vote: a seed passes when its sequence (ordered by decreasing kappa)
/// has at most max_inversions rises.
inline void vote_nonincreasing(Report& rep, const std::string& name,
                               const std::vector<std::vector<double>>& per_seed,
                               const Tolerances& tol) {
  std::vector<bool> ok;
  for (const auto& seq : per_seed)
    ok.push_back(stats::inversions(seq, 1e-12) <= static_cast<std::size_t>(tol.max_inversions));
  const double frac = fraction(ok);
  rep.check(name, frac >= tol.vote_fraction,
            detail::fmt(frac) + " of seeds within " + std::to_string(tol.max_inversions) +
                " inversion(s); need " + detail::fmt(tol.vote_fraction));
}

/// Trend vote: a seed passes when Spearman(kappa, distance) >= spearman_min,
/// or when every distance is already within `flat`.
inline void vote_spearman(Report& rep, const std::string& name, const std::vector<double>& kappas,
                          const std::vector<std::vector<double>>& per_seed, double flat,
                          const Tolerances& tol, Json& summary) {
  std::vector<bool> ok;
  Json rhos = Json::array();
  for (const auto& d : per_seed) {
    const bool settled = std::all_of(d.begin(), d.end(), [&](double x) { return x <= flat; });
    const double rho = d.size() >= 2 ? stats::spearman(kappas, d) : 0.0;
    rhos.push_back(rho);
    ok.push_back(settled || rho >= tol.spearman_min);
  }
  summary["spearman"] = rhos;
  const double frac = fraction(ok);
  rep.check(name, frac >= tol.vote_fraction,
            detail::fmt(frac) + " of seeds with Spearman >= " + detail::fmt(tol.spearman_min) +
                "; need " + detail::fmt(tol.vote_fraction));
}

}  // namespace detail

/// Polymer marginals from (m, x) to (N, vN) concentrate on the minimizer.
inline Report run_zero_temperature_limit(const RunConfig& c, int jobs) {
  auto rep = detail::start_report(
      "zero_temperature_limit",
      "zero-temperature limit: polymer measures concentrate on minimizers as kappa -> 0", c);
  detail::warn_if_infinite_range(rep, c);
  const auto& run = c.run;
  const std::int64_t m = run.m, big_n = run.horizon;
  detail::require(big_n >= m + 2, "run.horizon", "zero_temperature_limit needs horizon >= m + 2");
  const auto kappas = detail::descending_positive(run.kappas, "run.kappas");
  const double v = run.velocity;
  const Grid frame = c.grid.make().with_frame(v);
  const double h = frame.h();
  const std::int64_t k = m + (big_n - m) / 2;
  const double log_g = std::log(static_cast<double>(frame.size()));
  const std::size_t target = require_node(frame, v * static_cast<double>(big_n), big_n, "run.horizon");

  struct Cell {
    double mass2, mass5, escape5, gap_tilde, gap_z, leak;
  };
  struct Seed {
    double action, minimizer_k;
    std::size_t hits;
    std::vector<Cell> cells;
  };
  auto per_seed = parallel_map(run.seeds.size(), jobs, [&](std::size_t s) {
    const auto field = detail::realize(c, run.seeds[s], 0, {m, big_n}, {frame});
    const auto slice = min_action_slice(field, m, big_n, run.x, frame);
    const auto path = minimizer_from(slice, frame, target);
    Seed out{slice.values[target], path.at(k), slice.boundary_hits, {}};
    for (double kappa : kappas) {
      const auto fwd = forward_log_slices(field, m, run.x, big_n, kappa, frame);
      const auto bwd = backward_log_table(field, frame, k, big_n, target, kappa);
      std::vector<double> logw(frame.size());
      const auto& l = fwd[static_cast<std::size_t>(k - m - 1)];
      const auto r = bwd.at(k);
      for (std::size_t i = 0; i < logw.size(); ++i) logw[i] = l[i] + r[i];
      SliceDistribution dist{frame, k, normalize_log(logw)};
      if (dist.total() == 0.0) throw EmptySliceError("zero_temperature_limit: empty marginal", 1.0);
      double escape = 0.0;
      for (std::size_t i = 0; i < dist.p.size(); ++i)
        if (std::abs(dist.position(i) - out.minimizer_k) > 5.0 * h * (1.0 + 1e-9)) escape += dist.p[i];
      const double lz = zhat_to_z(fwd.back()[target], big_n - m, kappa);
      const double lzt = z_to_ztilde(lz, big_n - m, h);
      out.cells.push_back({dist.mass_near(out.minimizer_k, 2.0 * h * (1.0 + 1e-9)),
                           dist.mass_near(out.minimizer_k, 5.0 * h * (1.0 + 1e-9)), escape,
                           kappa * lzt + out.action, std::abs(kappa * lz + out.action),
                           boundary_leak(dist, 3)});
    }
    return out;
  });

  bool sandwich_ok = true;
  std::vector<std::vector<double>> escapes, gaps;
  std::vector<double> ratio_tilde, ratio_z;
  for (std::size_t s = 0; s < run.seeds.size(); ++s) {
    const auto& sd = per_seed[s];
    std::vector<double> esc, gap;
    for (std::size_t ik = 0; ik < kappas.size(); ++ik) {
      const auto& cell = sd.cells[ik];
      Json row = detail::base_row(run.seeds[s], kappas[ik], v, big_n, frame);
      row["k"] = k;
      row["minimizer_k"] = sd.minimizer_k;
      row["action"] = sd.action;
      row["mass_2h"] = cell.mass2;
      row["mass_5h"] = cell.mass5;
      row["escape_5h"] = cell.escape5;
      row["gap_tilde"] = cell.gap_tilde;
      row["gap_z"] = cell.gap_z;
      row["boundary_leak"] = cell.leak;
      row["boundary_hits"] = sd.hits;
      rep.rows.push_back(std::move(row));
      const double upper = kappas[ik] * static_cast<double>(big_n - m - 1) * log_g;
      const double tol = detail::slack(c.tolerances.identity, sd.action);
      if (cell.gap_tilde < -tol || cell.gap_tilde > upper + tol) sandwich_ok = false;
      esc.push_back(cell.escape5);
      gap.push_back(cell.gap_tilde);
    }
    escapes.push_back(esc);
    gaps.push_back(gap);
    ratio_tilde.push_back(sd.cells.front().gap_tilde / sd.cells.back().gap_tilde);
    ratio_z.push_back(sd.cells.front().gap_z / sd.cells.back().gap_z);
  }
  rep.check("log-sum-exp sandwich", sandwich_ok, "0 <= kappa ln Ztilde + A <= kappa (N-m-1) ln G");
  detail::vote_nonincreasing(rep, "escaping mass nonincreasing", escapes, c.tolerances);
  detail::vote_nonincreasing(rep, "gap nonincreasing", gaps, c.tolerances);
  if (kappas.size() >= 2) {
    const double worst_tilde = *std::min_element(ratio_tilde.begin(), ratio_tilde.end());
    const double worst_z = *std::min_element(ratio_z.begin(), ratio_z.end());
    rep.check("gap shrink ratio (grid sum)", worst_tilde >= c.tolerances.gap_ratio,
              "min over seeds of gap(kappa_max) / gap(kappa_min) = " + detail::fmt(worst_tilde));
    rep.check("gap shrink ratio (Z)", worst_z >= c.tolerances.gap_ratio,
              "min over seeds of |kappa ln Z + A| ratio = " + detail::fmt(worst_z));
    rep.summary["gap_ratio_tilde"] = ratio_tilde;
    rep.summary["gap_ratio_z"] = ratio_z;
  }
  rep.summary["kappas"] = kappas;
  rep.summary["time"] = k;
  return rep;
}

/// Weighted L1 distance between viscous and inviscid velocity profiles on
/// the same realization, along the kappa ladder.
inline Report run_inviscid_limit(const RunConfig& c, int jobs) {
  auto rep = detail::start_report(
      "inviscid_limit", "inviscid limit: u_{v;kappa}(n, .) -> u_{v;0}(n, .) as kappa -> 0", c);
  detail::warn_if_infinite_range(rep, c);
  const auto& run = c.run;
  const std::int64_t n = run.n, big_n = run.horizon;
  detail::require(big_n >= n + 2, "run.horizon", "inviscid_limit needs horizon >= n + 2");
  const auto kappas = detail::descending_positive(run.kappas, "run.kappas");
  const double v = run.velocity;
  const Grid grid = c.grid.make();
  const Grid frame = grid.with_frame(v);
  const double hw = c.tolerances.weight_halfwidth;

  struct Seed {
    double mono0;
    std::vector<double> dist, mono;
  };
  auto per_seed = parallel_map(run.seeds.size(), jobs, [&](std::size_t s) {
    const auto field = detail::realize(c, run.seeds[s], 0, {n, big_n}, {frame});
    const VelocityProfile u0{inviscid_velocity_profile(field, n, v, big_n, grid)};
    Seed out{check_monotone(u0), {}, {}};
    for (double kappa : kappas) {
      const VelocityProfile uk{viscous_velocity_profile(field, n, v, kappa, big_n, grid)};
      out.dist.push_back(g_metric(uk, u0, hw));
      out.mono.push_back(check_monotone(uk));
    }
    return out;
  });

  double worst_mono = 0.0;
  std::vector<std::vector<double>> dists;
  for (std::size_t s = 0; s < run.seeds.size(); ++s) {
    const auto& sd = per_seed[s];
    Json row0 = detail::base_row(run.seeds[s], 0.0, v, n, frame);
    row0["distance"] = 0.0;
    row0["monotone_violation"] = sd.mono0;
    rep.rows.push_back(std::move(row0));
    worst_mono = std::max(worst_mono, sd.mono0);
    for (std::size_t ik = 0; ik < kappas.size(); ++ik) {
      Json row = detail::base_row(run.seeds[s], kappas[ik], v, n, frame);
      row["distance"] = sd.dist[ik];
      row["monotone_violation"] = sd.mono[ik];
      rep.rows.push_back(std::move(row));
      worst_mono = std::max(worst_mono, sd.mono[ik]);
    }
    dists.push_back(sd.dist);
  }
  rep.check("profiles monotone", worst_mono <= 1e-9,
            "max decrease of x - u = " + detail::fmt(worst_mono));
  detail::vote_spearman(rep, "distance decreases with kappa", kappas, dists,
                        c.tolerances.identity, c.tolerances, rep.summary);
  rep.summary["kappas"] = kappas;
  rep.summary["weight_halfwidth"] = hw;
  return rep;
}

/// -kappa ln G^N against the zero-temperature Busemann value B^N.
inline Report run_busemann_limit(const RunConfig& c, int jobs) {
  auto rep = detail::start_report(
      "busemann_limit", "inviscid limit for Busemann functions: -kappa ln G_{v;kappa} -> B_v", c);
  detail::warn_if_infinite_range(rep, c);
  const auto& run = c.run;
  detail::require(!run.horizons.empty(), "run.horizons", "busemann_limit needs horizons");
  auto horizons = run.horizons;
  std::sort(horizons.begin(), horizons.end());
  const auto kappas = detail::descending_positive(run.kappas, "run.kappas");
  const SpaceTimePoint p1 = run.anchors.at(0), p2 = run.anchors.at(1);
  const std::int64_t n_lo = std::min(p1.n, p2.n), n_hi = std::max(p1.n, p2.n);
  detail::require(horizons.front() > n_hi, "run.horizons", "horizons must exceed the anchor times");
  const SpaceTimePoint p3{n_hi, 0.5 * (p1.x + p2.x)};
  const std::int64_t big_n = horizons.back();
  const double v = run.velocity;
  const Grid grid = c.grid.make();
  const Grid frame = grid.with_frame(v);
  const std::size_t target = require_node(frame, v * static_cast<double>(big_n), big_n, "run.horizons");

  struct Cell {
    double log_g, cocycle, antisym;
  };
  struct Seed {
    std::vector<double> ladder;
    bool converged;
    double b_cocycle, b_antisym;
    std::vector<Cell> cells;
  };
  auto per_seed = parallel_map(run.seeds.size(), jobs, [&](std::size_t s) {
    const auto field = detail::realize(c, run.seeds[s], 0, {n_lo, big_n}, {frame});
    Seed out{};
    for (auto hz : horizons) out.ladder.push_back(busemann_zero(field, p1, p2, v, hz, grid).value);
    out.converged = make_trace(horizons, out.ladder, c.tolerances.ladder_tol).converged;
    const double b13 = busemann_zero(field, p1, p3, v, big_n, grid).value;
    const double b32 = busemann_zero(field, p3, p2, v, big_n, grid).value;
    const double b21 = busemann_zero(field, p2, p1, v, big_n, grid).value;
    out.b_cocycle = std::abs(b13 + b32 - out.ladder.back());
    out.b_antisym = std::abs(out.ladder.back() + b21);
    for (double kappa : kappas) {
      const auto t = backward_log_table(field, frame, n_lo + 1, big_n, target, kappa);
      auto log_z = [&](SpaceTimePoint p) {
        return zhat_to_z(log_zhat_from(field, t, p.n, p.x), big_n - p.n, kappa);
      };
      const double z1 = log_z(p1), z2 = log_z(p2), z3 = log_z(p3);
      const double g12 = g_ratio(field, p1, p2, v, kappa, big_n, grid);
      const double g21 = g_ratio(field, p2, p1, v, kappa, big_n, grid);
      out.cells.push_back({z1 - z2, std::abs((z1 - z3) + (z3 - z2) - g12), std::abs(g12 + g21)});
    }
    return out;
  });

  double worst_identity = 0.0;
  std::vector<std::vector<double>> diffs;
  Json ladders = Json::array();
  std::size_t converged = 0;
  for (std::size_t s = 0; s < run.seeds.size(); ++s) {
    const auto& sd = per_seed[s];
    const double b = sd.ladder.back();
    worst_identity = std::max({worst_identity, sd.b_cocycle / std::max(1.0, std::abs(b)),
                               sd.b_antisym / std::max(1.0, std::abs(b))});
    converged += sd.converged;
    ladders.push_back(sd.ladder);
    std::vector<double> d;
    for (std::size_t ik = 0; ik < kappas.size(); ++ik) {
      const auto& cell = sd.cells[ik];
      const double diff = std::abs(-kappas[ik] * cell.log_g - b);
      Json row = detail::base_row(run.seeds[s], kappas[ik], v, big_n, frame);
      row["busemann"] = b;
      row["log_g"] = cell.log_g;
      row["difference"] = diff;
      row["ladder_converged"] = sd.converged;
      row["g_cocycle_residual"] = cell.cocycle;
      row["g_antisymmetry_residual"] = cell.antisym;
      row["b_cocycle_residual"] = sd.b_cocycle;
      row["b_antisymmetry_residual"] = sd.b_antisym;
      rep.rows.push_back(std::move(row));
      worst_identity = std::max({worst_identity, cell.cocycle / std::max(1.0, std::abs(cell.log_g)),
                                 cell.antisym / std::max(1.0, std::abs(cell.log_g))});
      d.push_back(diff);
    }
    diffs.push_back(d);
  }
  rep.check("cocycle and antisymmetry", worst_identity <= c.tolerances.identity,
            "max relative residual = " + detail::fmt(worst_identity));
  detail::vote_spearman(rep, "difference decreases with kappa", kappas, diffs,
                        c.tolerances.identity, c.tolerances, rep.summary);
  rep.summary["kappas"] = kappas;
  rep.summary["horizons"] = horizons;
  rep.summary["busemann_ladders"] = ladders;
  rep.summary["ladders_converged"] = converged;
  return rep;
}

/// Total variation between time-k marginals of polymers from two sources to
/// a common endpoint. Diagnostic only.
inline Report run_overlap(const RunConfig& c, int jobs) {
  auto rep = detail::start_report(
      "overlap", "polymers from different sources to a common endpoint overlap (diagnostic)", c);
  const auto& run = c.run;
  const std::int64_t m = run.m, big_n = run.horizon;
  detail::require(big_n >= m + 2, "run.horizon", "overlap needs horizon >= m + 2");
  const auto kappas = detail::descending_positive(run.kappas, "run.kappas");
  const double kappa = kappas.front();
  const double v = run.velocity;
  const Grid frame = c.grid.make().with_frame(v);
  const double y = v * static_cast<double>(big_n);
  const std::size_t target = require_node(frame, y, big_n, "run.horizon");
  const double x1 = run.sources[0], x2 = run.sources[1];

  auto per_seed = parallel_map(run.seeds.size(), jobs, [&](std::size_t s) {
    const auto field = detail::realize(c, run.seeds[s], 0, {m, big_n}, {frame});
    const auto f1 = forward_log_slices(field, m, x1, big_n - 1, kappa, frame);
    const auto f2 = forward_log_slices(field, m, x2, big_n - 1, kappa, frame);
    const auto bwd = backward_log_table(field, frame, m + 1, big_n, target, kappa);
    std::vector<std::pair<double, double>> out;  // (tv, normalization error)
    std::vector<double> a(frame.size()), b(frame.size());
    for (std::int64_t k = m + 1; k < big_n; ++k) {
      const auto r = bwd.at(k);
      const auto& l1 = f1[static_cast<std::size_t>(k - m - 1)];
      const auto& l2 = f2[static_cast<std::size_t>(k - m - 1)];
      for (std::size_t i = 0; i < a.size(); ++i) {
        a[i] = l1[i] + r[i];
        b[i] = l2[i] + r[i];
      }
      const auto p1 = normalize_log(a), p2 = normalize_log(b);
      double t1 = 0.0, t2 = 0.0;
      for (std::size_t i = 0; i < p1.size(); ++i) {
        t1 += p1[i];
        t2 += p2[i];
      }
      out.push_back({total_variation(p1, p2), std::max(std::abs(t1 - 1.0), std::abs(t2 - 1.0))});
    }
    return out;
  });

  const bool degenerate = detail::degenerate_kind(c.potential);
  double worst_norm = 0.0, worst_rel = 0.0, worst_same = 0.0;
  for (std::size_t s = 0; s < run.seeds.size(); ++s) {
    for (std::int64_t k = m + 1; k < big_n; ++k) {
      const auto [tv, norm] = per_seed[s][static_cast<std::size_t>(k - m - 1)];
      Json row = detail::base_row(run.seeds[s], kappa, v, big_n, frame);
      row["k"] = k;
      row["tv"] = tv;
      worst_norm = std::max(worst_norm, norm);
      if (x1 == x2) worst_same = std::max(worst_same, tv);
      if (degenerate) {
        const double span = static_cast<double>(big_n - m);
        const double t = static_cast<double>(k - m) / span;
        const double sigma = std::sqrt(kappa * static_cast<double>(k - m) *
                                       static_cast<double>(big_n - k) / span);
        const double cf = std::erf(std::abs((x1 - x2) * (1.0 - t)) / (2.0 * std::sqrt(2.0) * sigma));
        row["tv_closed_form"] = cf;
        worst_rel = std::max(worst_rel, std::abs(tv - cf) / std::max(cf, 1e-300));
      }
      rep.rows.push_back(std::move(row));
    }
  }
  rep.check("marginals normalized", worst_norm <= 1e-12,
            "max |sum p - 1| = " + detail::fmt(worst_norm));
  if (x1 == x2) rep.check("identical sources", worst_same == 0.0, "max tv = " + detail::fmt(worst_same));
  if (degenerate && x1 != x2)
    rep.check("Gaussian bridge closed form", worst_rel <= c.tolerances.overlap_rel,
              "max relative tv error = " + detail::fmt(worst_rel));
  rep.summary["kappa"] = kappa;
  return rep;
}

struct ExperimentInfo {
  std::string name;
  std::string theorem;
  std::function<Report(const RunConfig&, int)> run;
};

inline const std::vector<ExperimentInfo>& experiment_registry() {
  static const std::vector<ExperimentInfo> registry{
      {"shape", "shape function alpha_kappa(v) = alpha_{0;kappa} - v^2/2", run_shape},
      {"concentration", "free-energy fluctuations O(sqrt(n) ln^{3/2} n)", run_concentration},
      {"zero_temperature_limit", "polymer measures concentrate on minimizers as kappa -> 0",
       run_zero_temperature_limit},
      {"inviscid_limit", "viscous stationary velocities converge to the inviscid one",
       run_inviscid_limit},
      {"busemann_limit", "-kappa ln G_{v;kappa} converges to the Busemann function",
       run_busemann_limit},
      {"overlap", "polymers with a common endpoint overlap (diagnostic)", run_overlap},
  };
  return registry;
}

inline const ExperimentInfo& find_experiment(const std::string& name) {
  for (const auto& e : experiment_registry())
    if (e.name == name) return e;
  throw ConfigError("experiment", "unknown experiment '" + name + "'");
}

/// Runs one experiment and stamps the wall-clock time.
inline Report run_experiment(const std::string& name, const RunConfig& c, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  Report r = find_experiment(name).run(c, jobs);
  r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace kickflow

#endif  // KICKFLOW_EXPERIMENTS_HPP
