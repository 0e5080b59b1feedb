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

#ifndef KICKFLOW_CONFIG_HPP
#define KICKFLOW_CONFIG_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kickflow/errors.hpp"
#include "kickflow/numerics.hpp"
#include "kickflow/potential.hpp"
#include "kickflow/zerotemp.hpp"

namespace kickflow {

using Json = nlohmann::ordered_json;

struct GridConfig {
  double x_lo = -8.0;
  double x_hi = 8.0;
  double h = 0.05;
  double frame_velocity = 0.0;

  Grid make() const { return Grid(x_lo, x_hi, h, frame_velocity); }
};

struct RunBlock {
  std::int64_t m = 0;
  double x = 0.0;
  std::int64_t n = 0;
  std::int64_t horizon = 0;
  std::vector<std::int64_t> horizons;
  std::vector<std::int64_t> n_list;
  std::vector<double> kappas;
  std::vector<double> velocities{0.0};
  double velocity = 0.0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t master_seed = 1;
  std::vector<SpaceTimePoint> anchors{{0, -1.0}, {0, 1.0}};
  std::vector<double> sources{-1.0, 1.0};
};

/// Thresholds for the statistical checks; identities use `identity`.
struct Tolerances {
  double identity = 1e-9;
  double closed_form = 1e-6;
  double shape_z = 5.0;
  double beta_max = 0.75;
  double vote_fraction = 0.5;
  std::int64_t max_inversions = 1;
  double spearman_min = 0.8;
  double gap_ratio = 3.0;
  double ladder_tol = 1e-6;
  double weight_halfwidth = 0.0;  // 0 selects a quarter of the window
  double overlap_rel = 0.01;
};

struct RunConfig {
  std::vector<std::string> experiments;
  PotentialSpec potential;
  GridConfig grid;
  RunBlock run;
  Tolerances tolerances;
  std::string output_dir = "kickflow-out";
};

namespace detail {

/// Walks one JSON object, records consumed keys and rejects the rest.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_number()) throw ConfigError(field(key), "expected a number");
    return v.get<double>();
  }

  std::int64_t integer(const std::string& key, std::int64_t def) {
    if (!has(key)) return def;
    return as_integer(j_.at(key), field(key));
  }

  std::string string(const std::string& key, std::string def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_string()) throw ConfigError(field(key), "expected a string");
    return v.get<std::string>();
  }

  std::vector<double> numbers(const std::string& key, std::vector<double> def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) throw ConfigError(field(key), "expected an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }

  std::vector<std::int64_t> integers(const std::string& key, std::vector<std::int64_t> def) {
    if (!has(key)) return def;
    const auto& v = j_.at(key);
    if (!v.is_array()) throw ConfigError(field(key), "expected an array of integers");
    std::vector<std::int64_t> out;
    for (const auto& e : v) out.push_back(as_integer(e, field(key)));
    return out;
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw ConfigError(field(it.key()), "unknown key");
  }

  static std::int64_t as_integer(const Json& v, const std::string& where) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d == std::floor(d) && std::abs(d) < 9e15) return static_cast<std::int64_t>(d);
    }
    throw ConfigError(where, "expected an integer");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

inline PotentialSpec parse_potential(const Json& j) {
  ObjectReader r(j, "potential");
  PotentialSpec s;
  if (!r.has("kind")) throw ConfigError("potential.kind", "required");
  s.kind = parse_potential_kind(r.string("kind", ""));
  s.level = r.number("level", s.level);
  s.count = static_cast<int>(r.integer("count", s.count));
  s.amplitude_max = r.number("amplitude_max", s.amplitude_max);
  s.wavenumber_lo = r.number("wavenumber_lo", s.wavenumber_lo);
  s.wavenumber_hi = r.number("wavenumber_hi", s.wavenumber_hi);
  s.intensity = r.number("intensity", s.intensity);
  s.bump_width = r.number("bump_width", s.bump_width);
  s.amplitude_lo = r.number("amplitude_lo", s.amplitude_lo);
  s.amplitude_hi = r.number("amplitude_hi", s.amplitude_hi);
  r.finish();
  s.validate();
  return s;
}

}  // namespace detail

/// Names accepted by the experiment selector, in registry order.
inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"shape",          "concentration",
                                              "zero_temperature_limit", "inviscid_limit",
                                              "busemann_limit", "overlap"};
  return names;
}

/// Parses and validates a run configuration; errors name the field path.
inline RunConfig parse_config(const Json& j) {
  RunConfig c;
  detail::ObjectReader root(j, "");
  if (!root.has("experiment")) throw ConfigError("experiment", "required");
  {
    const auto& e = root.raw("experiment");
    if (e.is_string()) {
      c.experiments.push_back(e.get<std::string>());
    } else if (e.is_array() && !e.empty()) {
      for (const auto& x : e) {
        if (!x.is_string()) throw ConfigError("experiment", "expected names");
        c.experiments.push_back(x.get<std::string>());
      }
    } else {
      throw ConfigError("experiment", "expected a name or a non-empty array of names");
    }
    const auto& names = experiment_names();
    for (const auto& name : c.experiments)
      if (std::find(names.begin(), names.end(), name) == names.end())
        throw ConfigError("experiment", "unknown experiment '" + name + "'");
  }
  if (!root.has("potential")) throw ConfigError("potential", "required");
  c.potential = detail::parse_potential(root.raw("potential"));

  if (root.has("grid")) {
    detail::ObjectReader g(root.raw("grid"), "grid");
    c.grid.x_lo = g.number("x_lo", c.grid.x_lo);
    c.grid.x_hi = g.number("x_hi", c.grid.x_hi);
    c.grid.h = g.number("h", c.grid.h);
    c.grid.frame_velocity = g.number("frame_velocity", c.grid.frame_velocity);
    g.finish();
  }
  (void)c.grid.make();

  if (root.has("run")) {
    detail::ObjectReader r(root.raw("run"), "run");
    auto& b = c.run;
    b.m = r.integer("m", b.m);
    b.x = r.number("x", b.x);
    b.n = r.integer("n", b.n);
    b.horizon = r.integer("horizon", b.horizon);
    b.horizons = r.integers("horizons", b.horizons);
    b.n_list = r.integers("n_list", b.n_list);
    b.kappas = r.numbers("kappas", b.kappas);
    b.velocities = r.numbers("velocities", b.velocities);
    b.velocity = r.number("velocity", b.velocity);
    b.master_seed = static_cast<std::uint64_t>(r.integer("master_seed", 1));
    if (r.has("seeds")) {
      for (auto s : r.integers("seeds", {})) {
        if (s < 0) throw ConfigError("run.seeds", "seeds must be >= 0");
        b.seeds.push_back(static_cast<std::uint64_t>(s));
      }
      if (r.has("seed_count") &&
          r.integer("seed_count", 0) != static_cast<std::int64_t>(b.seeds.size()))
        throw ConfigError("run.seed_count", "disagrees with run.seeds");
    } else {
      const auto count = r.integer("seed_count", 4);
      if (count < 1) throw ConfigError("run.seed_count", "must be >= 1");
      for (std::int64_t s = 0; s < count; ++s) b.seeds.push_back(static_cast<std::uint64_t>(s));
    }
    if (b.seeds.empty()) throw ConfigError("run.seeds", "must not be empty");
    if (r.has("anchors")) {
      const auto& a = r.raw("anchors");
      if (!a.is_array() || a.size() != 2) throw ConfigError("run.anchors", "expected [[n, x], [n, x]]");
      b.anchors.clear();
      for (const auto& p : a) {
        if (!p.is_array() || p.size() != 2 || !p[1].is_number())
          throw ConfigError("run.anchors", "expected [[n, x], [n, x]]");
        b.anchors.push_back({detail::ObjectReader::as_integer(p[0], "run.anchors"), p[1].get<double>()});
      }
    }
    b.sources = r.numbers("sources", b.sources);
    if (b.sources.size() != 2) throw ConfigError("run.sources", "expected two source points");
    for (double k : b.kappas)
      if (!(k >= 0.0) || !std::isfinite(k)) throw ConfigError("run.kappas", "kappa must be finite and >= 0");
    for (double v : b.velocities)
      if (!std::isfinite(v)) throw ConfigError("run.velocities", "must be finite");
    r.finish();
  } else {
    for (std::uint64_t s = 0; s < 4; ++s) c.run.seeds.push_back(s);
  }

  if (root.has("tolerances")) {
    detail::ObjectReader t(root.raw("tolerances"), "tolerances");
    auto& o = c.tolerances;
    o.identity = t.number("identity", o.identity);
    o.closed_form = t.number("closed_form", o.closed_form);
    o.shape_z = t.number("shape_z", o.shape_z);
    o.beta_max = t.number("beta_max", o.beta_max);
    o.vote_fraction = t.number("vote_fraction", o.vote_fraction);
    o.max_inversions = t.integer("max_inversions", o.max_inversions);
    o.spearman_min = t.number("spearman_min", o.spearman_min);
    o.gap_ratio = t.number("gap_ratio", o.gap_ratio);
    o.ladder_tol = t.number("ladder_tol", o.ladder_tol);
    o.weight_halfwidth = t.number("weight_halfwidth", o.weight_halfwidth);
    o.overlap_rel = t.number("overlap_rel", o.overlap_rel);
    t.finish();
    if (!(o.vote_fraction >= 0.0 && o.vote_fraction <= 1.0))
      throw ConfigError("tolerances.vote_fraction", "must lie in [0, 1]");
    if (o.max_inversions < 0) throw ConfigError("tolerances.max_inversions", "must be >= 0");
    if (!(o.weight_halfwidth >= 0.0))
      throw ConfigError("tolerances.weight_halfwidth", "must be >= 0");
  }
  if (c.tolerances.weight_halfwidth == 0.0)
    c.tolerances.weight_halfwidth = 0.25 * (c.grid.x_hi - c.grid.x_lo);
  c.output_dir = root.string("output_dir", c.output_dir);
  root.finish();
  return c;
}

/// The configuration with every default filled in.
inline Json config_to_json(const RunConfig& c) {
  Json j;
  if (c.experiments.size() == 1)
    j["experiment"] = c.experiments.front();
  else
    j["experiment"] = c.experiments;
  Json p = spec_to_json(c.potential);
  p.erase("master_seed");
  j["potential"] = p;
  j["grid"] = {{"x_lo", c.grid.x_lo},
               {"x_hi", c.grid.x_hi},
               {"h", c.grid.h},
               {"frame_velocity", c.grid.frame_velocity}};
  const auto& b = c.run;
  Json anchors = Json::array();
  for (const auto& a : b.anchors) anchors.push_back({a.n, a.x});
  j["run"] = {{"m", b.m},
              {"x", b.x},
              {"n", b.n},
              {"horizon", b.horizon},
              {"horizons", b.horizons},
              {"n_list", b.n_list},
              {"kappas", b.kappas},
              {"velocities", b.velocities},
              {"velocity", b.velocity},
              {"seeds", b.seeds},
              {"seed_count", b.seeds.size()},
              {"master_seed", b.master_seed},
              {"anchors", anchors},
              {"sources", b.sources}};
  const auto& t = c.tolerances;
  j["tolerances"] = {{"identity", t.identity},
                     {"closed_form", t.closed_form},
                     {"shape_z", t.shape_z},
                     {"beta_max", t.beta_max},
                     {"vote_fraction", t.vote_fraction},
                     {"max_inversions", t.max_inversions},
                     {"spearman_min", t.spearman_min},
                     {"gap_ratio", t.gap_ratio},
                     {"ladder_tol", t.ladder_tol},
                     {"weight_halfwidth", t.weight_halfwidth},
                     {"overlap_rel", t.overlap_rel}};
  j["output_dir"] = c.output_dir;
  return j;
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot read " + path);
  Json j;
  try {
    j = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Hash of the materialized config without output_dir; keys report reproducibility.
inline std::string config_hash(const RunConfig& c) {
  Json j = config_to_json(c);
  j.erase("output_dir");
  return hex64(fnv1a(j.dump()));
}

}  // namespace kickflow

#endif  // KICKFLOW_CONFIG_HPP
