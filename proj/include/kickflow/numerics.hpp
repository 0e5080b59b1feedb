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

#ifndef KICKFLOW_NUMERICS_HPP
#define KICKFLOW_NUMERICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kickflow/errors.hpp"

namespace kickflow {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Uniform spatial lattice, optionally moving: at time k node i sits at
/// x_lo + i h + frame_velocity k.
class Grid {
 public:
  Grid(double x_lo, double x_hi, double h, double frame_velocity = 0.0)
      : x_lo_(x_lo), x_hi_(x_hi), h_(h), frame_velocity_(frame_velocity) {
    if (!std::isfinite(h) || h <= 0.0) throw ConfigError("grid.h", "must be > 0");
    if (!std::isfinite(x_lo)) throw ConfigError("grid.x_lo", "must be finite");
    if (!std::isfinite(x_hi) || x_hi <= x_lo)
      throw ConfigError("grid.x_hi", "must be finite and > grid.x_lo");
    if (!std::isfinite(frame_velocity))
      throw ConfigError("grid.frame_velocity", "must be finite");
    size_ = static_cast<std::size_t>(std::floor((x_hi - x_lo) / h + 1e-9)) + 1;
    if (size_ < 3) throw ConfigError("grid.h", "grid must have at least 3 nodes");
  }

  double x_lo() const { return x_lo_; }
  double x_hi() const { return x_hi_; }
  double h() const { return h_; }
  double frame_velocity() const { return frame_velocity_; }
  std::size_t size() const { return size_; }

  /// Position of node i at reference time (frame offset excluded).
  double reference(std::size_t i) const { return x_lo_ + static_cast<double>(i) * h_; }

  double node(std::size_t i, std::int64_t k) const {
    return reference(i) + frame_velocity_ * static_cast<double>(k);
  }

  /// Node index whose position at time k equals x up to 1e-9 h.
  std::optional<std::size_t> find_node(double x, std::int64_t k) const {
    const double r = (x - frame_velocity_ * static_cast<double>(k) - x_lo_) / h_;
    const double i = std::round(r);
    if (i < 0.0 || i >= static_cast<double>(size_)) return std::nullopt;
    const auto idx = static_cast<std::size_t>(i);
    if (std::abs(node(idx, k) - x) > 1e-9 * h_) return std::nullopt;
    return idx;
  }

  /// Index of the node nearest to x at time k (clamped to the window).
  std::size_t nearest(double x, std::int64_t k) const {
    const double r = std::round((x - frame_velocity_ * static_cast<double>(k) - x_lo_) / h_);
    return static_cast<std::size_t>(std::clamp(r, 0.0, static_cast<double>(size_ - 1)));
  }

  /// Node displacement node(i, k) - node(j, k - 1) for offset d = i - j.
  double step(std::int64_t offset) const {
    return static_cast<double>(offset) * h_ + frame_velocity_;
  }

  Grid with_frame(double velocity) const { return Grid(x_lo_, x_hi_, h_, velocity); }

  /// Lowest and highest node positions over times [m, n].
  std::pair<double, double> extent(std::int64_t m, std::int64_t n) const {
    const double a = frame_velocity_ * static_cast<double>(m);
    const double b = frame_velocity_ * static_cast<double>(n);
    return {reference(0) + std::min(a, b), reference(size_ - 1) + std::max(a, b)};
  }

  std::string signature() const {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g:%.17g:%.17g:%.17g", x_lo_, x_hi_, h_,
                  frame_velocity_);
    return buf;
  }

  friend bool operator==(const Grid& a, const Grid& b) {
    return a.x_lo_ == b.x_lo_ && a.x_hi_ == b.x_hi_ && a.h_ == b.h_ &&
           a.frame_velocity_ == b.frame_velocity_;
  }

 private:
  double x_lo_;
  double x_hi_;
  double h_;
  double frame_velocity_;
  std::size_t size_ = 0;
};

enum class Scale { linear, log };

/// A function sampled on the nodes of one time slice of a grid.
struct GridFn {
  Grid grid;
  std::int64_t k = 0;
  std::vector<double> values;
  Scale scale = Scale::linear;

  GridFn(Grid g, std::int64_t time, std::vector<double> v, Scale s = Scale::linear)
      : grid(std::move(g)), k(time), values(std::move(v)), scale(s) {
    if (values.size() != grid.size())
      throw std::invalid_argument("GridFn: value count does not match grid size");
  }
  GridFn(Grid g, std::int64_t time, Scale s = Scale::linear)
      : GridFn(g, time, std::vector<double>(g.size(), s == Scale::log ? -kInf : 0.0), s) {}

  std::size_t size() const { return values.size(); }
  double position(std::size_t i) const { return grid.node(i, k); }
  double operator[](std::size_t i) const { return values[i]; }
  double& operator[](std::size_t i) { return values[i]; }

  bool has_nan() const {
    return std::any_of(values.begin(), values.end(), [](double v) { return std::isnan(v); });
  }
};

/// ln g_kappa(dx) for the centred Gaussian kernel of variance kappa.
inline double gauss_log_kernel(double dx, double kappa) {
  if (!(kappa > 0.0)) throw std::domain_error("gauss_log_kernel: kappa must be > 0");
  return -dx * dx / (2.0 * kappa) - 0.5 * std::log(2.0 * std::numbers::pi * kappa);
}

/// log(sum exp(v)) accumulated against the running maximum in ascending
/// index order. -inf entries are skipped; all -inf gives -inf.
inline double logsumexp(std::span<const double> values) {
  double mx = -kInf;
  double acc = 0.0;
  for (double v : values) {
    if (v == -kInf) continue;
    if (v > mx) {
      acc = acc * std::exp(mx - v) + 1.0;
      mx = v;
    } else {
      acc += std::exp(v - mx);
    }
  }
  return mx == -kInf ? -kInf : mx + std::log(acc);
}

/// Rectangle rule in the log domain: ln(h sum_i exp(values_i)).
inline double log_integral(const GridFn& f) {
  if (f.scale != Scale::log) throw std::invalid_argument("log_integral: expects log-scale values");
  const double lse = logsumexp(f.values);
  return lse == -kInf ? -kInf : std::log(f.grid.h()) + lse;
}

/// Normalized probabilities exp(v_i - logsumexp(v)), two-pass.
inline std::vector<double> normalize_log(std::span<const double> logw) {
  double mx = -kInf;
  for (double v : logw) mx = std::max(mx, v);
  std::vector<double> p(logw.size(), 0.0);
  if (mx == -kInf) return p;
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    p[i] = logw[i] == -kInf ? 0.0 : std::exp(logw[i] - mx);
    total += p[i];
  }
  for (double& v : p) v /= total;
  return p;
}

/// Probability vector over the nodes of one time slice.
struct SliceDistribution {
  Grid grid;
  std::int64_t k = 0;
  std::vector<double> p;

  double position(std::size_t i) const { return grid.node(i, k); }

  double total() const {
    double s = 0.0;
    for (double v : p) s += v;
    return s;
  }
  double mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) m += p[i] * position(i);
    return m;
  }
  double variance() const {
    const double mu = mean();
    double v = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      const double d = position(i) - mu;
      v += p[i] * d * d;
    }
    return v;
  }
  std::size_t argmax() const {
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
  }
  /// Mass on nodes within `radius` of position x.
  double mass_near(double x, double radius) const {
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
      if (std::abs(position(i) - x) <= radius) s += p[i];
    return s;
  }
};

/// Mass within margin_cells nodes of either window edge.
inline double boundary_leak(const SliceDistribution& dist, std::size_t margin_cells) {
  if (margin_cells < 1) throw std::invalid_argument("boundary_leak: margin must be >= 1");
  const std::size_t g = dist.p.size();
  double s = 0.0;
  for (std::size_t i = 0; i < g; ++i)
    if (i < margin_cells || i + margin_cells >= g) s += dist.p[i];
  return s;
}

inline double total_variation(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw std::invalid_argument("total_variation: size mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return 0.5 * s;
}

}  // namespace kickflow

#endif  // KICKFLOW_NUMERICS_HPP
