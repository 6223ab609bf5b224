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
#include "fastrss/metrics.hpp"

namespace fastrss {

enum class SimulationErrc {
  invalid_config,
  target_exceeds_maximum,
  unknown_preset,
};

class SimulationError : public std::runtime_error {
 public:
  SimulationError(SimulationErrc code, const std::string& what);
  SimulationErrc code() const noexcept { return code_; }

 private:
  SimulationErrc code_;
};

/// Two-state Gilbert-Elliott loss. The chain advances once per scheduled
/// beacon; in the bad state a beacon is lost with probability loss_in_bad.
struct BurstLoss {
  double p_good_to_bad = 0.0;
  double p_bad_to_good = 1.0;
  double loss_in_bad = 1.0;

  /// p_gb / (p_gb + p_bg) * loss_in_bad.
  double stationary_loss() const noexcept;
  /// Expected number of consecutive scheduled beacons spent in the bad state.
  double mean_burst_length() const noexcept { return 1.0 / p_bad_to_good; }

  friend bool operator==(const BurstLoss&, const BurstLoss&) = default;
};

struct LossModel {
  double bernoulli_p = 0.0;
  std::optional<BurstLoss> burst;

  /// Independent composition: 1 - (1 - bernoulli) * (1 - stationary burst).
  double total_loss() const noexcept;

  friend bool operator==(const LossModel&, const LossModel&) = default;
};

/// Burst model with the given stationary loss and mean burst length, losing
/// every beacon while bad.
BurstLoss burst_for_loss(double stationary_loss, double mean_burst_length);

struct ApConfig {
  MacAddress bssid;
  std::string ssid;
  int channel = 6;
  double rssi_mean_dbm = -60.0;
  double rssi_jitter_db = 3.0;
  /// Offset of the first scheduled beacon from session start.
  std::int64_t phase_us = 0;
  LossModel loss;

  friend bool operator==(const ApConfig&, const ApConfig&) = default;
};

struct ScenarioConfig {
  /// Mode-independent scenario key used in reports, e.g. "cpu-80-ralink".
  std::string name = "custom";
  CaptureMode mode = CaptureMode::monitor;
  double duration_s = 200.0;
  int n_sessions = 10;
  std::vector<ApConfig> aps;
  /// Uniform timing jitter bound, applied as +/- around the schedule.
  std::int64_t timing_jitter_us = 2000;
  std::uint64_t seed = 42;

  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

/// Throws SimulationError(invalid_config) naming the first violated rule.
void validate(const ScenarioConfig& config);

/// floor(duration / nominal interval) beacons per AP and session.
std::int64_t scheduled_beacons(const ScenarioConfig& config);

struct ApGroundTruth {
  MacAddress bssid;
  std::size_t scheduled = 0;
  std::size_t delivered = 0;
  std::vector<std::size_t> drop_indices;

  friend bool operator==(const ApGroundTruth&, const ApGroundTruth&) = default;
};

struct GroundTruth {
  std::vector<ApGroundTruth> aps;

  std::size_t scheduled() const noexcept;
  std::size_t delivered() const noexcept;
  std::size_t dropped() const noexcept;

  friend bool operator==(const GroundTruth&, const GroundTruth&) = default;
};

struct SimulatedSession {
  std::vector<RssMeasurement> timeline;
  GroundTruth truth;
};

/// Deterministic in (config, session_index). Each AP draws from its own
/// stream derived from (seed, session_index, AP position).
SimulatedSession simulate_timeline(const ScenarioConfig& config, int session_index);

/// Independent loss probability that makes the expected rate target_pps.
double calibrate_loss(double target_pps, CaptureMode mode);

/// Presets are "<family>,<mode>[,<vendor>]": families traffic,
/// distance-strong, distance-weak, cpu-50, cpu-80; modes normal, monitor;
/// vendors atheros, ralink (cpu families only).
ScenarioConfig scenario_preset(std::string_view name);
std::vector<std::string> preset_names();

/// Radiotap-linktype capture of the timeline, one beacon per measurement.
PcapFile synthesize_capture(std::span<const RssMeasurement> timeline,
                            const ScenarioConfig& config);
Bytes emit_pcap(std::span<const RssMeasurement> timeline, const ScenarioConfig& config);

std::string scenario_to_json(const ScenarioConfig& config);
ScenarioConfig scenario_from_json(std::string_view text);

}  // namespace fastrss
