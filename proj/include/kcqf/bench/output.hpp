// Copyright 2026 The KCQF Authors.
//
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

#ifndef KCQF_BENCH_OUTPUT_HPP
#define KCQF_BENCH_OUTPUT_HPP

#include <kcqf/bench/diagnostics.hpp>
#include <kcqf/bench/runner.hpp>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * \file
 * \brief CSV reports and plot-data files.
 *
 * A report CSV has two sections, each led by its header:
 *
 * \code
 * k,filter,d,e_rms
 * 1,kcqf,2,3.14159
 * ...
 * filter,d,e_rms_bar,cpu_seconds,degenerate_steps
 * kcqf,2,4.9,0.0012,0
 * \endcode
 *
 * Numbers use 6 significant digits, lines end in `\n`, and `d` is empty for filters without key
 * conditions. A failed filter gets no per-step rows and `nan` in its summary row.
 */

namespace kcqf::bench {

inline constexpr const char* kStepHeader = "k,filter,d,e_rms";
inline constexpr const char* kSummaryHeader = "filter,d,e_rms_bar,cpu_seconds,degenerate_steps";

/// Six significant digits, `%.6g`.
inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

inline std::string format_d(const FilterResult& f) { return f.kind == FilterKind::kcqf ? std::to_string(f.d) : ""; }

inline std::string csv_string(const RunReport& report) {
  std::string out = std::string(kStepHeader) + "\n";
  for (const FilterResult& f : report.filters) {
    if (!f.ok()) {
      continue;
    }
    const std::string id(filter_id(f.kind));
    for (std::size_t k = 0; k < f.erms.aggregate.size(); ++k) {
      out += std::to_string(k + 1) + "," + id + "," + format_d(f) + "," + format_number(f.erms.aggregate[k]) + "\n";
    }
  }
  out += std::string(kSummaryHeader) + "\n";
  for (const FilterResult& f : report.filters) {
    const double bar = f.ok() ? f.erms.mean : std::numeric_limits<double>::quiet_NaN();
    out += std::string(filter_id(f.kind)) + "," + format_d(f) + "," + format_number(bar) + "," +
           format_number(f.cpu_seconds) + "," + std::to_string(f.degenerate_steps) + "\n";
  }
  return out;
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open '" + path + "' for writing");
  }
  out << text;
  out.flush();
  if (!out) {
    throw std::runtime_error("write to '" + path + "' failed");
  }
}

inline void emit_csv(const RunReport& report, const std::string& path) { write_text(path, csv_string(report)); }

/// Parsed form of a report CSV.
struct CsvReport {
  struct StepRow {
    int k = 0;
    std::string filter;
    int d = 0;  ///< 0 when empty
    double e_rms = 0.0;
  };
  struct SummaryRow {
    std::string filter;
    int d = 0;
    double e_rms_bar = 0.0;
    double cpu_seconds = 0.0;
    long degenerate_steps = 0;
  };
  std::vector<StepRow> steps;
  std::vector<SummaryRow> summary;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) {
    fields.push_back(field);
  }
  if (!line.empty() && line.back() == ',') {
    fields.emplace_back();
  }
  return fields;
}

inline double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size()) {
    throw std::invalid_argument("parse_csv: bad number '" + s + "'");
  }
  return v;
}

inline int parse_d(const std::string& s) { return s.empty() ? 0 : std::stoi(s); }

}  // namespace detail

inline CsvReport parse_csv_string(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kStepHeader) {
    throw std::invalid_argument("parse_csv: missing per-step header");
  }
  CsvReport out;
  bool summary = false;
  while (std::getline(in, line)) {
    if (line == kSummaryHeader) {
      summary = true;
      continue;
    }
    const std::vector<std::string> f = detail::split_fields(line);
    if (!summary) {
      if (f.size() != 4) {
        throw std::invalid_argument("parse_csv: bad per-step row '" + line + "'");
      }
      out.steps.push_back({std::stoi(f[0]), f[1], detail::parse_d(f[2]), detail::parse_double(f[3])});
    } else {
      if (f.size() != 5) {
        throw std::invalid_argument("parse_csv: bad summary row '" + line + "'");
      }
      out.summary.push_back({f[0], detail::parse_d(f[1]), detail::parse_double(f[2]), detail::parse_double(f[3]),
                             std::stol(f[4])});
    }
  }
  if (!summary) {
    throw std::invalid_argument("parse_csv: missing summary header");
  }
  return out;
}

inline CsvReport parse_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open '" + path + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_string(buf.str());
}

// Plot data -------------------------------------------------------------------------------------

inline const std::vector<std::string>& figure_ids() {
  static const std::vector<std::string> ids{"fig1", "fig2", "fig3", "fig4", "fig5a", "fig5b", "fig6"};
  return ids;
}

inline void check_figure_id(const std::string& id) {
  if (std::find(figure_ids().begin(), figure_ids().end(), id) == figure_ids().end()) {
    throw std::invalid_argument("unknown figure id '" + id + "'; valid ids: fig1, fig2, fig3, fig4, fig5a, fig5b, fig6");
  }
}

/// `k,<label>,...` with one E_rms(k) column per successful filter.
inline std::string curves_string(const RunReport& report) {
  std::vector<const FilterResult*> cols;
  for (const FilterResult& f : report.filters) {
    if (f.ok()) {
      cols.push_back(&f);
    }
  }
  std::string out = "k";
  for (const FilterResult* f : cols) {
    out += "," + f->label;
  }
  out += "\n";
  const std::size_t horizon = cols.empty() ? 0 : cols.front()->erms.aggregate.size();
  for (std::size_t k = 0; k < horizon; ++k) {
    out += std::to_string(k + 1);
    for (const FilterResult* f : cols) {
      out += "," + format_number(f->erms.aggregate[k]);
    }
    out += "\n";
  }
  return out;
}

inline std::string cpu_string(const RunReport& report) {
  std::string out = "filter,cpu_seconds\n";
  for (const FilterResult& f : report.filters) {
    if (f.ok()) {
      out += f.label + "," + format_number(f.cpu_seconds) + "\n";
    }
  }
  return out;
}

inline std::string sweep_string(const std::vector<SweepPoint>& sweep) {
  std::string out = "sample_count,e_rms_bar\n";
  for (const SweepPoint& p : sweep) {
    out += std::to_string(p.sample_count) + "," + format_number(p.e_rms_bar) + "\n";
  }
  return out;
}

inline std::string density_string(const DensityPair& pair, const std::string& header) {
  std::string out = header + "\n";
  for (std::size_t i = 0; i < pair.x.size(); ++i) {
    out += format_number(pair.x[i]) + "," + format_number(pair.first[i]) + "," + format_number(pair.second[i]) + "\n";
  }
  return out;
}

/// Writes preformatted text to `<dir>/<id>.csv` and returns the path.
inline std::string emit_plotdata(const std::string& id, const std::string& text, const std::string& dir) {
  check_figure_id(id);
  std::filesystem::create_directories(dir);
  const std::string path = (std::filesystem::path(dir) / (id + ".csv")).string();
  write_text(path, text);
  return path;
}

inline std::string emit_plotdata(const RunReport& report, const std::string& id, const std::string& dir) {
  check_figure_id(id);
  if (id == "fig1" || id == "fig2") {
    return emit_plotdata(id, curves_string(report), dir);
  }
  if (id == "fig3") {
    return emit_plotdata(id, cpu_string(report), dir);
  }
  throw std::invalid_argument("emit_plotdata: " + id + " is not built from a run report");
}

inline std::string emit_plotdata(const std::vector<SweepPoint>& sweep, const std::string& id, const std::string& dir) {
  if (id != "fig4" && id != "fig6") {
    check_figure_id(id);
    throw std::invalid_argument("emit_plotdata: " + id + " is not a sample-count sweep");
  }
  return emit_plotdata(id, sweep_string(sweep), dir);
}

inline std::string emit_plotdata(const DensityPair& pair, const std::string& id, const std::string& dir) {
  if (id == "fig5a") {
    return emit_plotdata(id, density_string(pair, "w,empirical,gaussian"), dir);
  }
  if (id == "fig5b") {
    return emit_plotdata(id, density_string(pair, "x2,given_x1,given_x1_x0"), dir);
  }
  check_figure_id(id);
  throw std::invalid_argument("emit_plotdata: " + id + " is not a density figure");
}

}  // namespace kcqf::bench

#endif  // KCQF_BENCH_OUTPUT_HPP
