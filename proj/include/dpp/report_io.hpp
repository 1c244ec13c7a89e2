#pragma once

#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dpp/diagnostics.hpp"
#include "dpp/errors.hpp"

namespace dpp {

/// Decimal rendering with 9 significant digits, the format used by every
/// numeric column and report value.
inline std::string format_sig9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

/// The value a 9-significant-digit rendering parses back to. Reported f_max
/// and intercept values are pre-rounded this way so re-checking a written CSV
/// against a written report reproduces the in-process verdict bit for bit.
inline double round_sig9(double v) {
  return std::strtod(format_sig9(v).c_str(), nullptr);
}

inline constexpr const char* kNormCsvHeader =
    "step,time,norm_V,norm_L2,bound,margin,dissipation_rate,p_diff_integral";

/// One CSV row per recorded step (the t = 0 record included), with the bound
/// value and margin computed from the report's f_max and intercept.
inline std::string write_norm_csv(const NormSeries& series,
                                  const BoundReport& report) {
  if (series.empty()) throw Error("cannot write an empty norm series");
  std::string out = kNormCsvHeader;
  out += '\n';
  for (std::size_t i = 0; i < series.size(); ++i) {
    const NormRecord& r = series[i];
    const double bound = report.intercept + r.time * report.f_max;
    const double margin =
        i < report.margins.size() ? report.margins[i] : bound - r.norm_v;
    out += std::to_string(r.step);
    out += ',';
    out += format_sig9(r.time);
    out += ',';
    out += format_sig9(r.norm_v);
    out += ',';
    out += format_sig9(r.norm_l2);
    out += ',';
    out += format_sig9(bound);
    out += ',';
    out += format_sig9(margin);
    out += ',';
    out += format_sig9(r.dissipation);
    out += ',';
    out += format_sig9(r.p_diff);
    out += '\n';
  }
  return out;
}

/// Parses a document produced by write_norm_csv. The header must match
/// exactly; bound and margin columns are ignored (they are recomputed when
/// re-checking).
inline NormSeries read_norm_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kNormCsvHeader) {
    throw Error("norm CSV header mismatch");
  }
  NormSeries series;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<double> cols;
    while (std::getline(row, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str()) {
        throw Error("malformed CSV value '" + cell + "' on line " +
                    std::to_string(lineno));
      }
      cols.push_back(v);
    }
    if (cols.size() != 8) {
      throw Error("expected 8 CSV columns on line " + std::to_string(lineno));
    }
    NormRecord r;
    r.step = static_cast<int>(cols[0]);
    r.time = cols[1];
    r.norm_v = cols[2];
    r.norm_l2 = cols[3];
    r.dissipation = cols[6];
    r.p_diff = cols[7];
    series.push_back(r);
  }
  if (series.empty()) throw Error("norm CSV contains no records");
  return series;
}

inline std::string write_bound_report_json(const BoundReport& report,
                                           int records) {
  nlohmann::json j;
  j["f_max"] = round_sig9(report.f_max);
  j["f_max_mode"] = to_string(report.mode);
  j["intercept"] = round_sig9(report.intercept);
  j["tolerance"] = report.tolerance;
  j["pass"] = report.pass;
  if (report.first_violation_step >= 0) {
    j["first_violation_step"] = report.first_violation_step;
  } else {
    j["first_violation_step"] = nullptr;
  }
  j["min_margin"] = round_sig9(report.min_margin);
  j["records"] = records;
  return j.dump(2) + "\n";
}

}  // namespace dpp
