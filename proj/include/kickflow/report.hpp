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

#ifndef KICKFLOW_REPORT_HPP
#define KICKFLOW_REPORT_HPP

#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "kickflow/experiments.hpp"
#include "kickflow/gibbs.hpp"
#include "kickflow/numerics.hpp"
#include "kickflow/zerotemp.hpp"

namespace kickflow {

namespace detail {

inline std::string csv_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string csv_cell(const Json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  if (v.is_number_float()) return csv_number(v.get<double>());
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_null()) return "";
  return v.dump();
}

inline void write_file(const std::filesystem::path& p, const std::string& body) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + p.string());
  out << body;
  if (!out) throw std::runtime_error("write failed for " + p.string());
}

}  // namespace detail

/// Rows as CSV; the header comes from the first row's keys.
inline std::string rows_to_csv(const std::vector<Json>& rows) {
  std::ostringstream os;
  if (rows.empty()) return "";
  std::vector<std::string> keys;
  for (auto it = rows.front().begin(); it != rows.front().end(); ++it) keys.push_back(it.key());
  for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
  os << "\n";
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < keys.size(); ++i)
      os << (i ? "," : "") << (r.contains(keys[i]) ? detail::csv_cell(r.at(keys[i])) : "");
    os << "\n";
  }
  return os.str();
}

/// Hash of the report rows; equal across parallelism degrees.
inline std::string rows_hash(const Report& r) { return hex64(fnv1a(r.rows_json().dump())); }

inline std::string report_text(const Report& r) {
  std::ostringstream os;
  os << "experiment: " << r.experiment << "\n"
     << "checks:     " << r.theorem << "\n"
     << "config:     " << r.config_hash << "\n"
     << "rows:       " << r.rows.size() << " (hash " << rows_hash(r) << ")\n"
     << "wall clock: " << detail::fmt(r.wall_seconds) << " s\n\n";
  for (const auto& c : r.checks) os << (c.passed ? "PASS " : "FAIL ") << c.name << ": " << c.detail << "\n";
  for (const auto& w : r.warnings) os << "WARN " << w << "\n";
  os << "\nsummary:\n" << r.summary.dump(2) << "\n";
  return os.str();
}

inline std::string utc_timestamp() {
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y%m%dT%H%M%SZ", &tm);
  return buf;
}

struct WrittenReport {
  std::filesystem::path json, csv, text;
};

/// Writes {experiment}-{timestamp}-{config-hash}.{json,csv,txt} under dir.
inline WrittenReport write_report(const Report& r, const std::filesystem::path& dir,
                                  const std::string& timestamp) {
  std::filesystem::create_directories(dir);
  const std::string stem = r.experiment + "-" + timestamp + "-" + r.config_hash;
  WrittenReport w{dir / (stem + ".json"), dir / (stem + ".csv"), dir / (stem + ".txt")};
  detail::write_file(w.json, r.to_json().dump(2) + "\n");
  detail::write_file(w.csv, rows_to_csv(r.rows));
  detail::write_file(w.text, report_text(r));
  return w;
}

/// Path as CSV (k, x).
inline std::string path_to_csv(const LatticePath& p) {
  std::ostringstream os;
  os << "k,x\n";
  for (std::size_t i = 0; i < p.size(); ++i)
    os << p.m + static_cast<std::int64_t>(i) << "," << detail::csv_number(p.positions[i]) << "\n";
  return os.str();
}

/// Grid slice or profile as CSV (x, value).
inline std::string slice_to_csv(const GridFn& f) {
  std::ostringstream os;
  os << "x,value\n";
  for (std::size_t i = 0; i < f.size(); ++i)
    os << detail::csv_number(f.position(i)) << "," << detail::csv_number(f[i]) << "\n";
  return os.str();
}

inline std::string free_energy_to_csv(const std::vector<FreeEnergyRecord>& recs) {
  std::ostringstream os;
  os << "seed,n,kappa,p\n";
  for (const auto& r : recs)
    os << r.seed << "," << r.n << "," << detail::csv_number(r.kappa) << "," << detail::csv_number(r.p) << "\n";
  return os.str();
}

/// One JSON line per orbit step: {"k": .., "x": [..], "value": [..]}.
inline std::string orbit_to_jsonl(const std::vector<GridFn>& orbit) {
  std::ostringstream os;
  for (const auto& f : orbit) {
    Json j;
    j["k"] = f.k;
    std::vector<double> xs(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) xs[i] = f.position(i);
    j["x"] = xs;
    j["value"] = f.values;
    os << j.dump() << "\n";
  }
  return os.str();
}

}  // namespace kickflow

#endif  // KICKFLOW_REPORT_HPP
