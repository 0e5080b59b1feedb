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

#ifndef KICKFLOW_POTENTIAL_HPP
#define KICKFLOW_POTENTIAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "kickflow/errors.hpp"
#include "kickflow/rng.hpp"

namespace kickflow {

enum class PotentialKind { zero, constant, cosine_mixture, shot_noise };

inline std::string_view to_string(PotentialKind kind) {
  switch (kind) {
    case PotentialKind::zero: return "zero";
    case PotentialKind::constant: return "constant";
    case PotentialKind::cosine_mixture: return "cosine-mixture";
    case PotentialKind::shot_noise: return "smoothed-shot-noise";
  }
  return "zero";
}

inline PotentialKind parse_potential_kind(std::string_view name) {
  if (name == "zero") return PotentialKind::zero;
  if (name == "constant") return PotentialKind::constant;
  if (name == "cosine-mixture") return PotentialKind::cosine_mixture;
  if (name == "smoothed-shot-noise") return PotentialKind::shot_noise;
  throw ConfigError("potential.kind", "unknown kind '" + std::string(name) + "'");
}

/// Law of the kick potential F_k(x).
///
/// cosine-mixture: F_k(x) = sum_j a_j cos(q_j x + phi_j) with J independent
///   terms per slice, a_j ~ U[0, amplitude_max], q_j ~ U[wavenumber_lo,
///   wavenumber_hi], phi_j ~ U[0, 2 pi). Stationary in x through the uniform
///   phases; infinite dependence range.
/// smoothed-shot-noise: Poisson bump centres with the given intensity per
///   unit length, each bump s * a * cos^2(pi (x - c) / w) on |x - c| < w / 2
///   with a ~ U[amplitude_lo, amplitude_hi] and a fair random sign s. The
///   bump is C^1 and the dependence range is exactly w.
struct PotentialSpec {
  PotentialKind kind = PotentialKind::zero;
  double level = 0.0;
  int count = 3;
  double amplitude_max = 1.0;
  double wavenumber_lo = 0.5;
  double wavenumber_hi = 2.0;
  double intensity = 1.0;
  double bump_width = 1.0;
  double amplitude_lo = 0.5;
  double amplitude_hi = 1.0;
  std::uint64_t master_seed = 0;

  double dependence_range() const {
    switch (kind) {
      case PotentialKind::cosine_mixture:
        return std::numeric_limits<double>::infinity();
      case PotentialKind::shot_noise: return bump_width;
      default: return 0.0;
    }
  }

  bool finite_range() const { return std::isfinite(dependence_range()); }

  void validate() const {
    auto finite_nonneg = [](double v, const char* field) {
      if (!std::isfinite(v) || v < 0.0)
        throw ConfigError(field, "must be finite and nonnegative");
    };
    switch (kind) {
      case PotentialKind::zero: break;
      case PotentialKind::constant:
        if (!std::isfinite(level))
          throw ConfigError("potential.level", "must be finite");
        break;
      case PotentialKind::cosine_mixture:
        if (count < 1) throw ConfigError("potential.count", "must be >= 1");
        finite_nonneg(amplitude_max, "potential.amplitude_max");
        finite_nonneg(wavenumber_lo, "potential.wavenumber_lo");
        finite_nonneg(wavenumber_hi, "potential.wavenumber_hi");
        if (wavenumber_hi < wavenumber_lo)
          throw ConfigError("potential.wavenumber_hi",
                            "must be >= potential.wavenumber_lo");
        break;
      case PotentialKind::shot_noise:
        finite_nonneg(intensity, "potential.intensity");
        if (!std::isfinite(bump_width) || bump_width <= 0.0)
          throw ConfigError("potential.bump_width", "must be finite and > 0");
        finite_nonneg(amplitude_lo, "potential.amplitude_lo");
        finite_nonneg(amplitude_hi, "potential.amplitude_hi");
        if (amplitude_hi < amplitude_lo)
          throw ConfigError("potential.amplitude_hi",
                            "must be >= potential.amplitude_lo");
        // Knuth sampling in poisson() is only accurate for small means.
        if (intensity * bump_width > 50.0)
          throw ConfigError("potential.intensity",
                            "intensity * bump_width must be <= 50");
        break;
    }
  }
};

struct TimeWindow {
  std::int64_t first = 0;
  std::int64_t last = 0;
  bool contains(std::int64_t k) const { return k >= first && k <= last; }
  std::int64_t size() const { return last - first + 1; }
};

struct SpaceWindow {
  double lo = 0.0;
  double hi = 0.0;
  bool contains(double x) const { return x >= lo && x <= hi; }
};

struct CosineTerm {
  double amplitude;
  double wavenumber;
  double phase;
};

struct Bump {
  double center;
  double amplitude;  // signed
};

/// Coefficients of one time slice F_k(.).
struct SliceCoefficients {
  std::int64_t k = 0;
  std::uint64_t stream_key = 0;
  std::vector<CosineTerm> cosines;
  std::vector<Bump> bumps;  // sorted by centre
  double bound = 0.0;       // sup_x |F_k(x)|
};

namespace detail {

inline double bump_shape(double s) {
  const double c = std::cos(std::numbers::pi * s);
  return c * c;
}

inline double eval_slice(const PotentialSpec& spec, const SliceCoefficients& s,
                         double x) {
  switch (spec.kind) {
    case PotentialKind::zero: return 0.0;
    case PotentialKind::constant: return spec.level;
    case PotentialKind::cosine_mixture: {
      double sum = 0.0;
      for (const auto& t : s.cosines)
        sum += t.amplitude * std::cos(t.wavenumber * x + t.phase);
      return sum;
    }
    case PotentialKind::shot_noise: {
      const double w = spec.bump_width;
      const double half = 0.5 * w;
      auto it = std::lower_bound(
          s.bumps.begin(), s.bumps.end(), x - half,
          [](const Bump& b, double v) { return b.center < v; });
      double sum = 0.0;
      for (; it != s.bumps.end() && it->center <= x + half; ++it) {
        const double u = (x - it->center) / w;
        if (std::abs(u) < 0.5) sum += it->amplitude * bump_shape(u);
      }
      return sum;
    }
  }
  return 0.0;
}

inline double slice_bound(const PotentialSpec& spec, const SliceCoefficients& s) {
  switch (spec.kind) {
    case PotentialKind::zero: return 0.0;
    case PotentialKind::constant: return std::abs(spec.level);
    case PotentialKind::cosine_mixture: {
      double b = 0.0;
      for (const auto& t : s.cosines) b += std::abs(t.amplitude);
      return b;
    }
    case PotentialKind::shot_noise: {
      // Bumps covering a common point are pairwise closer than w; anchor at
      // the leftmost of them.
      double best = 0.0;
      for (std::size_t i = 0; i < s.bumps.size(); ++i) {
        double b = 0.0;
        for (std::size_t j = i;
             j < s.bumps.size() &&
             s.bumps[j].center - s.bumps[i].center < spec.bump_width;
             ++j)
          b += std::abs(s.bumps[j].amplitude);
        best = std::max(best, b);
      }
      return best;
    }
  }
  return 0.0;
}

/// Coefficients of slice k, valid for x in [lo, hi]. For shot noise the
/// bumps of every unit cell (of length w) meeting [lo - w, hi + w] are drawn
/// from a per-cell stream, so values on [lo, hi] do not depend on the window.
inline SliceCoefficients generate_slice(const PotentialSpec& spec,
                                        std::uint64_t master, std::int64_t k,
                                        double lo, double hi) {
  SliceCoefficients out;
  out.k = k;
  switch (spec.kind) {
    case PotentialKind::zero:
    case PotentialKind::constant:
      out.stream_key = rng::derive_seed(master, k, 0);
      break;
    case PotentialKind::cosine_mixture: {
      out.stream_key = rng::derive_seed(master, k, rng::kTagCosine);
      rng::Stream stream(out.stream_key);
      out.cosines.reserve(static_cast<std::size_t>(spec.count));
      for (int j = 0; j < spec.count; ++j) {
        CosineTerm t;
        t.amplitude = stream.uniform(0.0, spec.amplitude_max);
        t.wavenumber = stream.uniform(spec.wavenumber_lo, spec.wavenumber_hi);
        t.phase = stream.uniform(0.0, 2.0 * std::numbers::pi);
        out.cosines.push_back(t);
      }
      break;
    }
    case PotentialKind::shot_noise: {
      out.stream_key = rng::derive_seed(master, k, rng::kTagShot);
      const double w = spec.bump_width;
      const auto first_cell = static_cast<std::int64_t>(std::floor((lo - w) / w));
      const auto last_cell = static_cast<std::int64_t>(std::floor((hi + w) / w));
      const double mean = spec.intensity * w;
      for (std::int64_t c = first_cell; c <= last_cell; ++c) {
        rng::Stream stream(rng::derive_seed(out.stream_key, c, rng::kTagShot));
        const int n = stream.poisson(mean);
        for (int i = 0; i < n; ++i) {
          Bump b;
          b.center = (static_cast<double>(c) + stream.uniform()) * w;
          const double a = stream.uniform(spec.amplitude_lo, spec.amplitude_hi);
          b.amplitude = stream.uniform() < 0.5 ? -a : a;
          out.bumps.push_back(b);
        }
      }
      std::stable_sort(out.bumps.begin(), out.bumps.end(),
                       [](const Bump& a, const Bump& b) { return a.center < b.center; });
      break;
    }
  }
  out.bound = slice_bound(spec, out);
  return out;
}

struct Realization {
  PotentialSpec spec;
  TimeWindow time;
  SpaceWindow space;
  std::vector<SliceCoefficients> slices;  // slices[k - time.first]
};

}  // namespace detail

/// A realization of the kick potential, stored as analytic coefficients.
///
/// Shifted and sheared views share the coefficients and evaluate
/// F_{k + dt}(x + shear * k + dx) on the underlying realization. Immutable.
class PotentialField {
 public:
  PotentialField() = default;
  explicit PotentialField(std::shared_ptr<const detail::Realization> base)
      : base_(std::move(base)) {}

  const PotentialSpec& spec() const { return base_->spec; }

  /// Time window in this view's coordinates.
  TimeWindow time_window() const {
    return {base_->time.first - dt_, base_->time.last - dt_};
  }
  /// Generated coverage of the underlying realization.
  const SpaceWindow& coverage() const { return base_->space; }

  std::int64_t time_offset() const { return dt_; }
  double space_offset() const { return dx_; }
  double shear_velocity() const { return shear_; }
  bool is_view() const { return dt_ != 0 || dx_ != 0.0 || shear_ != 0.0; }

  bool covers(std::int64_t k, double x) const {
    return base_->time.contains(k + dt_) && base_->space.contains(map_x(k, x));
  }

  double eval(std::int64_t k, double x) const {
    const std::int64_t kb = k + dt_;
    const double xb = map_x(k, x);
    if (!base_->time.contains(kb) || !base_->space.contains(xb))
      throw std::out_of_range("potential evaluated outside generated coverage at k=" +
                              std::to_string(k) + ", x=" + std::to_string(x));
    return detail::eval_slice(base_->spec, slice_at(kb), xb);
  }

  /// Coefficients of the underlying slice seen at time k of this view.
  const SliceCoefficients& coefficients(std::int64_t k) const {
    const std::int64_t kb = k + dt_;
    if (!base_->time.contains(kb))
      throw std::out_of_range("time index outside potential window");
    return slice_at(kb);
  }

  /// sup_x |F_k(x)| over the slice, from the coefficients.
  double bound(std::int64_t k) const { return coefficients(k).bound; }

  double bound() const {
    double b = 0.0;
    for (const auto& s : base_->slices) b = std::max(b, s.bound);
    return b;
  }

  PotentialField shifted(std::int64_t dn, double dx) const {
    PotentialField out = *this;
    out.dt_ = dt_ + dn;
    out.dx_ = dx_ + dx + shear_ * static_cast<double>(dn);
    return out;
  }

  PotentialField sheared(double v) const {
    PotentialField out = *this;
    out.shear_ = shear_ + v;
    return out;
  }

  /// The view x -> F_{k + dt}(x + shear k + dx), set verbatim.
  PotentialField with_transform(std::int64_t dt, double dx, double shear) const {
    PotentialField out = *this;
    out.dt_ = dt;
    out.dx_ = dx;
    out.shear_ = shear;
    return out;
  }

  const detail::Realization& realization() const { return *base_; }

 private:
  double map_x(std::int64_t k, double x) const {
    return x + shear_ * static_cast<double>(k) + dx_;
  }
  const SliceCoefficients& slice_at(std::int64_t kb) const {
    return base_->slices[static_cast<std::size_t>(kb - base_->time.first)];
  }

  std::shared_ptr<const detail::Realization> base_;
  std::int64_t dt_ = 0;
  double dx_ = 0.0;
  double shear_ = 0.0;
};

inline PotentialField sample_potential(const PotentialSpec& spec,
                                       TimeWindow time_window,
                                       SpaceWindow space_window) {
  spec.validate();
  if (time_window.last < time_window.first)
    throw ConfigError("time_window", "empty time window");
  if (!(space_window.hi >= space_window.lo) || !std::isfinite(space_window.lo) ||
      !std::isfinite(space_window.hi))
    throw ConfigError("space_window", "empty or non-finite space window");
  auto real = std::make_shared<detail::Realization>();
  real->spec = spec;
  real->time = time_window;
  real->space = space_window;
  real->slices.reserve(static_cast<std::size_t>(time_window.size()));
  for (std::int64_t k = time_window.first; k <= time_window.last; ++k)
    real->slices.push_back(detail::generate_slice(spec, spec.master_seed, k,
                                                  space_window.lo, space_window.hi));
  return PotentialField(std::move(real));
}

/// theta^{dn, dx}: eval(shift(f, dn, dx), k, x) == eval(f, k + dn, x + dx).
inline PotentialField shift(const PotentialField& field, std::int64_t dn, double dx) {
  return field.shifted(dn, dx);
}

/// L^v: eval(shear(f, v), k, x) == eval(f, k, x + v k).
inline PotentialField shear(const PotentialField& field, double v) {
  return field.sheared(v);
}

/// sup of |F_k| over the unit cell [j, j + 1], by uniform refinement until
/// two successive levels agree to 1e-9.
inline double local_max(const PotentialField& field, std::int64_t k, std::int64_t j) {
  const double a = static_cast<double>(j);
  if (!field.covers(k, a) || !field.covers(k, a + 1.0))
    throw std::out_of_range("local_max cell outside potential coverage");
  auto level_max = [&](int level) {
    const std::int64_t n = std::int64_t{1} << level;
    double best = 0.0;
    for (std::int64_t i = 0; i <= n; ++i)
      best = std::max(best, std::abs(field.eval(k, a + static_cast<double>(i) /
                                                           static_cast<double>(n))));
    return best;
  };
  int level = 8;
  double prev = level_max(level);
  while (level < 24) {
    ++level;
    const double cur = level_max(level);
    if (std::abs(cur - prev) < 1e-9) return cur;
    prev = cur;
  }
  return prev;
}

struct MomentEstimate {
  double mean = 0.0;
  double standard_error = 0.0;
};

/// Monte Carlo estimate of lambda(beta) = E exp(-beta F_k(0)) from
/// `sample_count` independently drawn slices of the field's law.
inline MomentEstimate moment_diagnostic(const PotentialField& field, double beta,
                                        std::size_t sample_count) {
  if (!(beta >= 0.0)) throw std::domain_error("moment_diagnostic: beta must be >= 0");
  if (sample_count == 0) throw std::invalid_argument("moment_diagnostic: no samples");
  const PotentialSpec& spec = field.spec();
  const std::uint64_t master = rng::derive_seed(spec.master_seed, 0, rng::kTagMoment);
  // Accumulate deviations from the first draw so a degenerate law returns
  // its value exactly.
  double first = 0.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t i = 0; i < sample_count; ++i) {
    const auto slice =
        detail::generate_slice(spec, master, static_cast<std::int64_t>(i), -1.0, 1.0);
    const double value = std::exp(-beta * detail::eval_slice(spec, slice, 0.0));
    if (i == 0) first = value;
    const double d = value - first;
    sum += d;
    sum_sq += d * d;
  }
  const double n = static_cast<double>(sample_count);
  MomentEstimate est;
  est.mean = first + sum / n;
  if (sample_count > 1) {
    const double var = std::max(0.0, (sum_sq - sum * sum / n) / (n - 1.0));
    est.standard_error = std::sqrt(var / n);
  }
  return est;
}

// ---------------------------------------------------------------------------
// JSON coefficient dump / restore.

inline nlohmann::ordered_json spec_to_json(const PotentialSpec& s) {
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(s.kind));
  j["level"] = s.level;
  j["count"] = s.count;
  j["amplitude_max"] = s.amplitude_max;
  j["wavenumber_lo"] = s.wavenumber_lo;
  j["wavenumber_hi"] = s.wavenumber_hi;
  j["intensity"] = s.intensity;
  j["bump_width"] = s.bump_width;
  j["amplitude_lo"] = s.amplitude_lo;
  j["amplitude_hi"] = s.amplitude_hi;
  j["master_seed"] = s.master_seed;
  return j;
}

inline PotentialSpec spec_from_json(const nlohmann::ordered_json& j) {
  PotentialSpec s;
  s.kind = parse_potential_kind(j.at("kind").get<std::string>());
  s.level = j.value("level", s.level);
  s.count = j.value("count", s.count);
  s.amplitude_max = j.value("amplitude_max", s.amplitude_max);
  s.wavenumber_lo = j.value("wavenumber_lo", s.wavenumber_lo);
  s.wavenumber_hi = j.value("wavenumber_hi", s.wavenumber_hi);
  s.intensity = j.value("intensity", s.intensity);
  s.bump_width = j.value("bump_width", s.bump_width);
  s.amplitude_lo = j.value("amplitude_lo", s.amplitude_lo);
  s.amplitude_hi = j.value("amplitude_hi", s.amplitude_hi);
  s.master_seed = j.value("master_seed", s.master_seed);
  return s;
}

inline nlohmann::ordered_json dump_coefficients(const PotentialField& field) {
  const auto& r = field.realization();
  nlohmann::ordered_json j;
  j["spec"] = spec_to_json(r.spec);
  j["time_window"] = {r.time.first, r.time.last};
  j["space_window"] = {r.space.lo, r.space.hi};
  nlohmann::ordered_json slices = nlohmann::ordered_json::array();
  for (const auto& s : r.slices) {
    nlohmann::ordered_json js;
    js["k"] = s.k;
    js["stream_key"] = s.stream_key;
    nlohmann::ordered_json cos = nlohmann::ordered_json::array();
    for (const auto& t : s.cosines) cos.push_back({t.amplitude, t.wavenumber, t.phase});
    js["cosines"] = std::move(cos);
    nlohmann::ordered_json bumps = nlohmann::ordered_json::array();
    for (const auto& b : s.bumps) bumps.push_back({b.center, b.amplitude});
    js["bumps"] = std::move(bumps);
    slices.push_back(std::move(js));
  }
  j["slices"] = std::move(slices);
  if (field.is_view())
    j["view"] = {{"time_offset", field.time_offset()},
                 {"space_offset", field.space_offset()},
                 {"shear", field.shear_velocity()}};
  return j;
}

inline PotentialField restore_coefficients(const nlohmann::ordered_json& j) {
  auto real = std::make_shared<detail::Realization>();
  real->spec = spec_from_json(j.at("spec"));
  real->spec.validate();
  real->time = {j.at("time_window").at(0).get<std::int64_t>(),
                j.at("time_window").at(1).get<std::int64_t>()};
  real->space = {j.at("space_window").at(0).get<double>(),
                 j.at("space_window").at(1).get<double>()};
  for (const auto& js : j.at("slices")) {
    SliceCoefficients s;
    s.k = js.at("k").get<std::int64_t>();
    s.stream_key = js.at("stream_key").get<std::uint64_t>();
    for (const auto& t : js.at("cosines"))
      s.cosines.push_back({t.at(0).get<double>(), t.at(1).get<double>(),
                           t.at(2).get<double>()});
    for (const auto& b : js.at("bumps"))
      s.bumps.push_back({b.at(0).get<double>(), b.at(1).get<double>()});
    s.bound = detail::slice_bound(real->spec, s);
    real->slices.push_back(std::move(s));
  }
  if (static_cast<std::int64_t>(real->slices.size()) != real->time.size())
    throw ConfigError("slices", "slice count does not match time_window");
  PotentialField field(std::move(real));
  if (j.contains("view")) {
    const auto& v = j["view"];
    field = field.with_transform(v.at("time_offset").get<std::int64_t>(),
                                 v.at("space_offset").get<double>(),
                                 v.at("shear").get<double>());
  }
  return field;
}

}  // namespace kickflow

#endif  // KICKFLOW_POTENTIAL_HPP
