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

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fastrss/capture_ingest.hpp"

namespace fastrss {

enum class MetricsErrc {
  zero_duration,
  empty_intervals,
  heterogeneous_sessions,
  invalid_argument,
};

class MetricsError : public std::runtime_error {
 public:
  MetricsError(MetricsErrc code, const std::string& what);
  MetricsErrc code() const noexcept { return code_; }

 private:
  MetricsErrc code_;
};

enum class CaptureMode { monitor, normal };

std::string_view to_string(CaptureMode mode) noexcept;
std::optional<CaptureMode> parse_capture_mode(std::string_view text) noexcept;

inline constexpr std::int64_t kTimeUnitUs = 1024;
inline constexpr std::int64_t kMonitorIntervalUs = 100 * kTimeUnitUs;   // 102.4 ms
inline constexpr std::int64_t kNormalIntervalUs = 1000 * kTimeUnitUs;   // 1.024 s

/// Nominal spacing between RSS reports for a mode.
constexpr std::int64_t nominal_interval_us(CaptureMode mode) noexcept {
  return mode == CaptureMode::monitor ? kMonitorIntervalUs : kNormalIntervalUs;
}

/// 9.765625 pps in monitor mode, 0.9765625 pps in normal mode. Both are
/// exact in binary floating point.
constexpr double theoretical_max_pps(CaptureMode mode) noexcept {
  return 1e6 / static_cast<double>(nominal_interval_us(mode));
}

/// Packets per second over the configured session length.
double average_rate(const ApSeries& series);

/// 100 * (1 - rate / max), clamped to [0, 100].
double miss_rate(double avg_rate_pps, CaptureMode mode);

/// Gaps between consecutive measurements, in milliseconds.
std::vector<double> inter_arrival(const ApSeries& series);

struct HistogramBin {
  double lower_edge_ms = 0.0;
  std::size_t count = 0;
  double pdf = 0.0;
  double cdf = 0.0;
};

struct DistributionTable {
  double bin_width_ms = 100.0;
  std::vector<HistogramBin> bins;

  std::size_t total_count() const noexcept;
  /// Bin containing value_ms, or nullptr past the last bin.
  const HistogramBin* bin_at(double value_ms) const noexcept;
  /// lower_edge_ms,count,pdf,cdf with a header line.
  std::string to_csv() const;
};

/// Bins [k*w, (k+1)*w) from 0 through the largest interval, empty bins
/// included.
DistributionTable interval_histogram(std::span<const double> intervals_ms,
                                     double bin_width_ms = 100.0);

/// Percentage of the floor(duration / window) windows, tiled from the
/// session start, that contain at least one measurement.
double window_availability(const ApSeries& series, double window_s = 1.0);

/// max(0, round(interval / nominal) - 1), rounding half away from zero.
long long estimate_missed_packets(double interval_ms, double nominal_interval_ms);

struct SessionStats {
  MacAddress bssid;
  std::string ssid;
  CaptureMode mode = CaptureMode::monitor;
  double avg_rate_pps = 0.0;
  double miss_rate_pct = 0.0;
  double availability_pct = 0.0;
  std::vector<double> intervals_ms;
  std::size_t n_packets = 0;
  double duration_s = 0.0;
};

SessionStats compute_session_stats(const ApSeries& series, CaptureMode mode,
                                   double window_s = 1.0);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample standard deviation, 0 for a single session
};

struct AggregateStats {
  MacAddress bssid;
  std::string ssid;
  CaptureMode mode = CaptureMode::monitor;
  MeanStd avg_rate_pps;
  MeanStd miss_rate_pct;
  MeanStd availability_pct;
  std::size_t n_sessions = 0;
};

/// Averages per-session scalars. Sessions must share bssid and mode.
AggregateStats aggregate_sessions(std::span<const SessionStats> sessions);

}  // namespace fastrss
