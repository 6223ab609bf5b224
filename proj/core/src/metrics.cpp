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

#include "fastrss/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace fastrss {

MetricsError::MetricsError(MetricsErrc code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

std::string_view to_string(CaptureMode mode) noexcept {
  return mode == CaptureMode::monitor ? "monitor" : "normal";
}

std::optional<CaptureMode> parse_capture_mode(std::string_view text) noexcept {
  if (text == "monitor") return CaptureMode::monitor;
  if (text == "normal") return CaptureMode::normal;
  return std::nullopt;
}

double average_rate(const ApSeries& series) {
  if (!(series.session_duration_s > 0.0)) {
    throw MetricsError(MetricsErrc::zero_duration, "ZeroDuration: session duration must be > 0");
  }
  return static_cast<double>(series.measurements.size()) / series.session_duration_s;
}

double miss_rate(double avg_rate_pps, CaptureMode mode) {
  if (avg_rate_pps < 0.0) {
    throw MetricsError(MetricsErrc::invalid_argument, "negative measurement rate");
  }
  const double pct = 100.0 * (1.0 - avg_rate_pps / theoretical_max_pps(mode));
  return std::clamp(pct, 0.0, 100.0);
}

std::vector<double> inter_arrival(const ApSeries& series) {
  std::vector<double> out;
  const auto& ms = series.measurements;
  if (ms.size() < 2) return out;
  out.reserve(ms.size() - 1);
  for (std::size_t i = 1; i < ms.size(); ++i) {
    out.push_back(static_cast<double>(ms[i].capture_time_us - ms[i - 1].capture_time_us) / 1000.0);
  }
  return out;
}

std::size_t DistributionTable::total_count() const noexcept {
  std::size_t total = 0;
  for (const auto& bin : bins) total += bin.count;
  return total;
}

const HistogramBin* DistributionTable::bin_at(double value_ms) const noexcept {
  if (value_ms < 0.0 || bins.empty()) return nullptr;
  const auto k = static_cast<std::size_t>(std::floor(value_ms / bin_width_ms));
  return k < bins.size() ? &bins[k] : nullptr;
}

std::string DistributionTable::to_csv() const {
  std::string out = "lower_edge_ms,count,pdf,cdf\n";
  char line[128];
  for (const auto& bin : bins) {
    std::snprintf(line, sizeof line, "%.17g,%zu,%.17g,%.17g\n", bin.lower_edge_ms, bin.count,
                  bin.pdf, bin.cdf);
    out += line;
  }
  return out;
}

DistributionTable interval_histogram(std::span<const double> intervals_ms, double bin_width_ms) {
  if (!(bin_width_ms > 0.0)) {
    throw MetricsError(MetricsErrc::invalid_argument, "bin width must be > 0");
  }
  if (intervals_ms.empty()) {
    throw MetricsError(MetricsErrc::empty_intervals, "EmptyIntervals: no inter-arrival gaps");
  }
  const double largest = *std::max_element(intervals_ms.begin(), intervals_ms.end());
  if (*std::min_element(intervals_ms.begin(), intervals_ms.end()) < 0.0) {
    throw MetricsError(MetricsErrc::invalid_argument, "negative inter-arrival gap");
  }
  DistributionTable table;
  table.bin_width_ms = bin_width_ms;
  const auto n_bins = static_cast<std::size_t>(std::floor(largest / bin_width_ms)) + 1;
  table.bins.resize(n_bins);
  for (std::size_t k = 0; k < n_bins; ++k) {
    table.bins[k].lower_edge_ms = static_cast<double>(k) * bin_width_ms;
  }
  for (double v : intervals_ms) {
    const auto k = std::min(static_cast<std::size_t>(std::floor(v / bin_width_ms)), n_bins - 1);
    ++table.bins[k].count;
  }
  const double total = static_cast<double>(intervals_ms.size());
  std::size_t running = 0;
  for (auto& bin : table.bins) {
    running += bin.count;
    bin.pdf = static_cast<double>(bin.count) / total;
    bin.cdf = static_cast<double>(running) / total;
  }
  return table;
}

double window_availability(const ApSeries& series, double window_s) {
  if (!(window_s > 0.0) || series.session_duration_s < window_s) {
    throw MetricsError(MetricsErrc::invalid_argument,
                       "availability needs 0 < window <= session duration");
  }
  const auto window_us = std::llround(window_s * 1e6);
  const auto duration_us = std::llround(series.session_duration_s * 1e6);
  const long long n_windows = duration_us / window_us;
  std::vector<bool> hit(static_cast<std::size_t>(n_windows), false);
  for (const auto& m : series.measurements) {
    const long long rel = m.capture_time_us - series.session_start_us;
    if (rel < 0 || rel >= n_windows * window_us) continue;
    hit[static_cast<std::size_t>(rel / window_us)] = true;
  }
  const auto covered = std::count(hit.begin(), hit.end(), true);
  return 100.0 * static_cast<double>(covered) / static_cast<double>(n_windows);
}

long long estimate_missed_packets(double interval_ms, double nominal_interval_ms) {
  if (!(interval_ms > 0.0) || !(nominal_interval_ms > 0.0)) {
    throw MetricsError(MetricsErrc::invalid_argument, "intervals must be positive");
  }
  return std::max(0LL, std::llround(interval_ms / nominal_interval_ms) - 1);
}

SessionStats compute_session_stats(const ApSeries& series, CaptureMode mode, double window_s) {
  SessionStats stats;
  stats.bssid = series.bssid;
  stats.ssid = series.ssid;
  stats.mode = mode;
  stats.n_packets = series.measurements.size();
  stats.duration_s = series.session_duration_s;
  stats.avg_rate_pps = average_rate(series);
  stats.miss_rate_pct = miss_rate(stats.avg_rate_pps, mode);
  stats.availability_pct = window_availability(series, window_s);
  stats.intervals_ms = inter_arrival(series);
  return stats;
}

namespace {

template <typename Field>
MeanStd summarize(std::span<const SessionStats> sessions, Field field) {
  MeanStd out;
  const double first = field(sessions.front());
  if (std::all_of(sessions.begin(), sessions.end(),
                  [&](const SessionStats& s) { return field(s) == first; })) {
    out.mean = first;
    return out;
  }
  const auto n = static_cast<double>(sessions.size());
  for (const auto& s : sessions) out.mean += field(s);
  out.mean /= n;
  if (sessions.size() > 1) {
    double ss = 0.0;
    for (const auto& s : sessions) ss += (field(s) - out.mean) * (field(s) - out.mean);
    out.std = std::sqrt(ss / (n - 1.0));
  }
  return out;
}

}  // namespace

AggregateStats aggregate_sessions(std::span<const SessionStats> sessions) {
  if (sessions.empty()) {
    throw MetricsError(MetricsErrc::invalid_argument, "no sessions to aggregate");
  }
  for (const auto& s : sessions) {
    if (s.bssid != sessions.front().bssid || s.mode != sessions.front().mode) {
      throw MetricsError(MetricsErrc::heterogeneous_sessions,
                         "HeterogeneousSessions: " + s.bssid.to_string() + "/" +
                             std::string(to_string(s.mode)) + " vs " +
                             sessions.front().bssid.to_string() + "/" +
                             std::string(to_string(sessions.front().mode)));
    }
  }
  AggregateStats agg;
  agg.bssid = sessions.front().bssid;
  agg.ssid = sessions.back().ssid;
  agg.mode = sessions.front().mode;
  agg.n_sessions = sessions.size();
  agg.avg_rate_pps = summarize(sessions, [](const SessionStats& s) { return s.avg_rate_pps; });
  agg.miss_rate_pct = summarize(sessions, [](const SessionStats& s) { return s.miss_rate_pct; });
  agg.availability_pct =
      summarize(sessions, [](const SessionStats& s) { return s.availability_pct; });
  return agg;
}

}  // namespace fastrss
