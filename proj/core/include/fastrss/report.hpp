/*
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Tabular reports: one row per (scenario, AP, mode), plus the paired
// normal-vs-monitor comparison layout.

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fastrss/metrics.hpp"

namespace fastrss {

struct ReportRow {
  std::string scenario;
  std::string bssid;
  std::string ssid;
  CaptureMode mode = CaptureMode::monitor;
  double avg_pps = 0.0;
  double miss_rate_pct = 0.0;
  double availability_pct = 0.0;
  std::size_t n_sessions = 0;

  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

class ReportFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ReportTable {
  std::vector<ReportRow> rows;

  /// scenario,bssid,ssid,mode,avg_pps,miss_rate_pct,availability_pct,n_sessions
  std::string to_csv() const;
  std::string to_json() const;
  static ReportTable from_csv(std::string_view text);
  static ReportTable from_json(std::string_view text);
};

ReportRow make_report_row(std::string scenario, const AggregateStats& stats);

/// One row per aggregate, in input order.
ReportTable comparison_report(std::string_view scenario, std::span<const AggregateStats> stats);

struct ModeCell {
  double avg_pps = 0.0;
  double miss_rate_pct = 0.0;

  friend bool operator==(const ModeCell&, const ModeCell&) = default;
};

struct ComparisonRow {
  std::string scenario;
  std::string bssid;
  std::string ssid;
  std::optional<ModeCell> normal;
  std::optional<ModeCell> monitor;

  friend bool operator==(const ComparisonRow&, const ComparisonRow&) = default;
};

struct ComparisonTable {
  std::vector<ComparisonRow> rows;

  /// scenario,bssid,ssid,normal_avg_pps,normal_miss_rate_pct,monitor_avg_pps,monitor_miss_rate_pct
  std::string to_csv() const;
  std::string to_json() const;
};

/// Pivots a mixed-mode report into paired columns keyed by (scenario, bssid).
ComparisonTable pair_modes(const ReportTable& report);

class KeyMismatch : public std::runtime_error {
 public:
  KeyMismatch(std::vector<std::string> offenders);
  const std::vector<std::string>& offenders() const noexcept { return offenders_; }

 private:
  std::vector<std::string> offenders_;
};

/// Side-by-side merge of a normal-mode and a monitor-mode report. Both must
/// cover the same (scenario, bssid) keys; otherwise KeyMismatch lists every
/// key present on only one side.
ComparisonTable compare_reports(const ReportTable& normal, const ReportTable& monitor);

}  // namespace fastrss
