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

#include "fastrss/beacon_simulator.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "json.hpp"

namespace fastrss {

SimulationError::SimulationError(SimulationErrc code, const std::string& what)
    : std::runtime_error(what), code_(code) {}

double BurstLoss::stationary_loss() const noexcept {
  const double denom = p_good_to_bad + p_bad_to_good;
  if (denom <= 0.0) return 0.0;
  return p_good_to_bad / denom * loss_in_bad;
}

double LossModel::total_loss() const noexcept {
  const double burst_loss = burst ? burst->stationary_loss() : 0.0;
  return 1.0 - (1.0 - bernoulli_p) * (1.0 - burst_loss);
}

BurstLoss burst_for_loss(double stationary_loss, double mean_burst_length) {
  if (stationary_loss < 0.0 || stationary_loss >= 1.0 || mean_burst_length < 1.0) {
    throw SimulationError(SimulationErrc::invalid_config,
                          "burst loss needs 0 <= loss < 1 and mean burst length >= 1");
  }
  BurstLoss burst;
  burst.p_bad_to_good = 1.0 / mean_burst_length;
  burst.p_good_to_bad = stationary_loss * burst.p_bad_to_good / (1.0 - stationary_loss);
  burst.loss_in_bad = 1.0;
  if (burst.p_good_to_bad > 1.0) {
    throw SimulationError(SimulationErrc::invalid_config,
                          "stationary loss unreachable with that burst length");
  }
  return burst;
}

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

[[noreturn]] void invalid(const std::string& what) {
  throw SimulationError(SimulationErrc::invalid_config, "InvalidConfig: " + what);
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Raw engine output mapped to [0, 1) by hand so draws do not depend on the
// standard library's distribution implementations.
class UnitStream {
 public:
  UnitStream(std::uint64_t seed, int session_index, std::size_t ap_index)
      : engine_(splitmix64(splitmix64(splitmix64(seed) ^ static_cast<std::uint64_t>(session_index)) ^
                           (0x5bd1e995ULL + ap_index))) {}

  double next() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

 private:
  std::mt19937_64 engine_;
};

std::int64_t duration_us(const ScenarioConfig& config) {
  return std::llround(config.duration_s * 1e6);
}

}  // namespace

void validate(const ScenarioConfig& config) {
  if (!(config.duration_s > 0.0) || !std::isfinite(config.duration_s)) {
    invalid("duration_s must be > 0");
  }
  if (config.n_sessions < 1) invalid("n_sessions must be >= 1");
  if (config.aps.empty()) invalid("at least one AP is required");
  if (config.timing_jitter_us < 0) invalid("timing_jitter_us must be >= 0");
  const std::int64_t interval = nominal_interval_us(config.mode);
  std::set<MacAddress> seen;
  for (const auto& ap : config.aps) {
    const std::string who = "AP " + ap.bssid.to_string() + ": ";
    if (!seen.insert(ap.bssid).second) invalid(who + "duplicate bssid");
    if (ap.ssid.size() > kMaxSsidLength) invalid(who + "ssid longer than 32 bytes");
    if (!mhz_from_channel(ap.channel)) invalid(who + "channel outside 1..11");
    if (!(ap.rssi_mean_dbm >= kMinRssiDbm && ap.rssi_mean_dbm <= kMaxRssiDbm)) {
      invalid(who + "rssi_mean_dbm outside [-120, 0]");
    }
    if (!(ap.rssi_jitter_db >= 0.0)) invalid(who + "rssi_jitter_db must be >= 0");
    if (ap.phase_us < 0 || ap.phase_us + 2 * config.timing_jitter_us >= interval) {
      invalid(who + "phase plus twice the timing jitter must stay below the nominal interval");
    }
    if (!is_probability(ap.loss.bernoulli_p)) invalid(who + "bernoulli_p outside [0, 1]");
    if (const auto& b = ap.loss.burst) {
      if (!is_probability(b->p_good_to_bad) || !is_probability(b->p_bad_to_good) ||
          !is_probability(b->loss_in_bad)) {
        invalid(who + "burst probabilities outside [0, 1]");
      }
      if (b->p_good_to_bad + b->p_bad_to_good <= 0.0) {
        invalid(who + "burst chain needs p_good_to_bad + p_bad_to_good > 0");
      }
    }
  }
}

std::int64_t scheduled_beacons(const ScenarioConfig& config) {
  return duration_us(config) / nominal_interval_us(config.mode);
}

std::size_t GroundTruth::scheduled() const noexcept {
  std::size_t n = 0;
  for (const auto& ap : aps) n += ap.scheduled;
  return n;
}

std::size_t GroundTruth::delivered() const noexcept {
  std::size_t n = 0;
  for (const auto& ap : aps) n += ap.delivered;
  return n;
}

std::size_t GroundTruth::dropped() const noexcept {
  std::size_t n = 0;
  for (const auto& ap : aps) n += ap.drop_indices.size();
  return n;
}

SimulatedSession simulate_timeline(const ScenarioConfig& config, int session_index) {
  validate(config);
  const std::int64_t interval = nominal_interval_us(config.mode);
  const std::int64_t n_scheduled = scheduled_beacons(config);
  const std::int64_t jitter = config.timing_jitter_us;

  SimulatedSession session;
  for (std::size_t a = 0; a < config.aps.size(); ++a) {
    const ApConfig& ap = config.aps[a];
    UnitStream rng(config.seed, session_index, a);
    const auto& burst = ap.loss.burst;
    bool bad = false;
    if (burst) {
      const double p_bad = burst->p_good_to_bad / (burst->p_good_to_bad + burst->p_bad_to_good);
      bad = rng.next() < p_bad;
    }

    ApGroundTruth truth;
    truth.bssid = ap.bssid;
    truth.scheduled = static_cast<std::size_t>(n_scheduled);
    for (std::int64_t k = 0; k < n_scheduled; ++k) {
      // fixed draw count per beacon keeps streams aligned across parameter changes
      const double u_jitter = rng.next();
      const double u_bernoulli = rng.next();
      const double u_burst = rng.next();
      const double u_transition = rng.next();
      const double u_rssi = rng.next();

      bool lost = u_bernoulli < ap.loss.bernoulli_p;
      if (burst) {
        lost = (bad && u_burst < burst->loss_in_bad) || lost;
        bad = bad ? !(u_transition < burst->p_bad_to_good) : u_transition < burst->p_good_to_bad;
      }
      if (lost) {
        truth.drop_indices.push_back(static_cast<std::size_t>(k));
        continue;
      }
      const auto offset =
          static_cast<std::int64_t>(std::floor(u_jitter * static_cast<double>(2 * jitter + 1))) -
          jitter;
      RssMeasurement m;
      m.capture_time_us = ap.phase_us + k * interval + jitter + offset;
      m.bssid = ap.bssid;
      m.ssid = ap.ssid;
      m.channel = ap.channel;
      const double rssi = ap.rssi_mean_dbm + (2.0 * u_rssi - 1.0) * ap.rssi_jitter_db;
      m.rssi_dbm = std::clamp(static_cast<int>(std::lround(rssi)), kMinRssiDbm, kMaxRssiDbm);
      session.timeline.push_back(std::move(m));
      ++truth.delivered;
    }
    session.truth.aps.push_back(std::move(truth));
  }
  std::stable_sort(session.timeline.begin(), session.timeline.end(),
                   [](const RssMeasurement& x, const RssMeasurement& y) {
                     return x.capture_time_us < y.capture_time_us;
                   });
  return session;
}

double calibrate_loss(double target_pps, CaptureMode mode) {
  const double max_pps = theoretical_max_pps(mode);
  if (!(target_pps >= 0.0)) {
    throw SimulationError(SimulationErrc::invalid_config, "target rate must be >= 0");
  }
  if (target_pps > max_pps) {
    throw SimulationError(SimulationErrc::target_exceeds_maximum,
                          "TargetExceedsMaximum: " + std::to_string(target_pps) + " pps > " +
                              std::to_string(max_pps) + " pps");
  }
  return 1.0 - target_pps / max_pps;
}

namespace {

struct PresetAp {
  const char* ssid;
  int channel;
  double rssi_dbm;
  std::int64_t phase_us;
};

MacAddress preset_bssid(int index) {
  MacAddress mac{{0x02, 0x00, 0x5e, 0x10, 0x00, static_cast<std::uint8_t>(index)}};
  return mac;
}

// Mean burst lengths for the CPU-load transients: long runs in monitor mode
// put gaps at ~5-6 beacon intervals, short runs in normal mode push single
// reports out to the ~2 s lobe.
constexpr double kMonitorBurstLength = 5.0;
constexpr double kNormalBurstLength = 1.5;

struct CpuCell {
  double normal_pps;
  double monitor_pps;
};

}  // namespace

ScenarioConfig scenario_preset(std::string_view name) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= name.size()) {
    const std::size_t comma = name.find(',', start);
    const std::size_t end = comma == std::string_view::npos ? name.size() : comma;
    parts.emplace_back(name.substr(start, end - start));
    start = end + 1;
  }
  auto unknown = [&]() -> SimulationError {
    return SimulationError(SimulationErrc::unknown_preset, "UnknownPreset: " + std::string(name));
  };
  if (parts.size() < 2) throw unknown();
  const auto mode = parse_capture_mode(parts[1]);
  if (!mode) throw unknown();
  const std::string& family = parts[0];
  const bool cpu = family == "cpu-50" || family == "cpu-80";
  if (parts.size() != (cpu ? 3u : 2u)) throw unknown();

  ScenarioConfig config;
  config.mode = *mode;
  config.duration_s = 200.0;
  config.n_sessions = 10;
  config.timing_jitter_us = 2000;
  config.seed = 42;

  auto add_ap = [&](int index, const PresetAp& preset, LossModel loss) {
    ApConfig ap;
    ap.bssid = preset_bssid(index);
    ap.ssid = preset.ssid;
    ap.channel = preset.channel;
    ap.rssi_mean_dbm = preset.rssi_dbm;
    ap.rssi_jitter_db = 3.0;
    ap.phase_us = preset.phase_us;
    ap.loss = std::move(loss);
    config.aps.push_back(std::move(ap));
  };
  auto independent = [&](double pps) {
    LossModel loss;
    loss.bernoulli_p = calibrate_loss(pps, *mode);
    return loss;
  };

  if (family == "traffic") {
    // four routers; interference loss modelled as independent
    static constexpr double normal_pps[] = {0.90, 0.91, 0.91, 0.91};
    static constexpr double monitor_pps[] = {4.76, 7.40, 7.42, 8.29};
    static constexpr PresetAp aps[] = {
        {"AP1", 1, -58.0, 0},
        {"AP2", 6, -63.0, 24'000},
        {"AP3", 11, -66.0, 48'000},
        {"AP4", 6, -70.0, 72'000},
    };
    config.name = "traffic";
    for (int i = 0; i < 4; ++i) {
      add_ap(i + 1, aps[i], independent(*mode == CaptureMode::normal ? normal_pps[i] : monitor_pps[i]));
    }
  } else if (family == "distance-strong" || family == "distance-weak") {
    const bool weak = family == "distance-weak";
    const double pps = *mode == CaptureMode::normal ? (weak ? 0.57 : 0.91) : (weak ? 9.22 : 9.68);
    config.name = family;
    add_ap(1, {"HallwayAP", 6, weak ? -80.0 : -60.0, 10'000}, independent(pps));
  } else if (cpu) {
    const std::string& vendor = parts[2];
    CpuCell cell;
    if (vendor == "atheros") {
      cell = family == "cpu-50" ? CpuCell{0.96, 8.76} : CpuCell{0.86, 7.80};
    } else if (vendor == "ralink") {
      cell = family == "cpu-50" ? CpuCell{0.76, 8.19} : CpuCell{0.69, 5.05};
    } else {
      throw unknown();
    }
    const bool monitor = *mode == CaptureMode::monitor;
    LossModel loss;
    loss.burst = burst_for_loss(calibrate_loss(monitor ? cell.monitor_pps : cell.normal_pps, *mode),
                                monitor ? kMonitorBurstLength : kNormalBurstLength);
    config.name = family + "-" + vendor;
    // weak-signal hallway position
    add_ap(1, {"HallwayAP", 6, -80.0, 10'000}, std::move(loss));
  } else {
    throw unknown();
  }
  validate(config);
  return config;
}

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const char* family : {"traffic", "distance-strong", "distance-weak"}) {
    for (const char* mode : {"normal", "monitor"}) {
      names.push_back(std::string(family) + "," + mode);
    }
  }
  for (const char* family : {"cpu-50", "cpu-80"}) {
    for (const char* mode : {"normal", "monitor"}) {
      for (const char* vendor : {"atheros", "ralink"}) {
        names.push_back(std::string(family) + "," + mode + "," + vendor);
      }
    }
  }
  return names;
}

PcapFile synthesize_capture(std::span<const RssMeasurement> timeline,
                            const ScenarioConfig& config) {
  PcapFile file;
  file.meta.link_type = LinkType::ieee80211_radiotap;
  file.meta.timestamp_resolution = TimestampResolution::micro;
  file.meta.byte_order = ByteOrder::little_endian;

  std::map<MacAddress, std::uint16_t> sequence;
  std::map<MacAddress, const ApConfig*> ap_by_bssid;
  for (const auto& ap : config.aps) ap_by_bssid[ap.bssid] = &ap;

  file.records.reserve(timeline.size());
  for (const auto& m : timeline) {
    BeaconFrame frame;
    frame.mac.source = m.bssid;
    frame.mac.bssid = m.bssid;
    std::uint16_t& seq = sequence[m.bssid];
    frame.mac.sequence_number = seq;
    seq = static_cast<std::uint16_t>((seq + 1) & 0x0fff);
    frame.body.ap_timestamp = static_cast<std::uint64_t>(std::max<std::int64_t>(m.capture_time_us, 0));
    frame.body.beacon_interval_tu = 100;
    frame.body.capability = 0x0401;  // ESS, short slot time
    frame.body.ssid = m.ssid;
    if (const auto it = ap_by_bssid.find(m.bssid); it != ap_by_bssid.end()) {
      // DS parameter set
      frame.body.extra_elements.push_back({3, Bytes{static_cast<std::uint8_t>(it->second->channel)}});
    }

    RadiotapInfo info;
    info.antenna_signal_dbm = m.rssi_dbm;
    if (m.channel) info.channel_mhz = mhz_from_channel(*m.channel);
    file.records.push_back(make_record(m.capture_time_us, encode_beacon(frame, info)));
  }
  return file;
}

Bytes emit_pcap(std::span<const RssMeasurement> timeline, const ScenarioConfig& config) {
  const PcapFile file = synthesize_capture(timeline, config);
  return write_pcap(file.meta, file.records);
}

namespace {

using json = nlohmann::ordered_json;

json loss_to_json(const LossModel& loss) {
  json out{{"bernoulli_p", loss.bernoulli_p}};
  if (loss.burst) {
    out["burst"] = {{"p_good_to_bad", loss.burst->p_good_to_bad},
                    {"p_bad_to_good", loss.burst->p_bad_to_good},
                    {"loss_in_bad", loss.burst->loss_in_bad}};
  } else {
    out["burst"] = nullptr;
  }
  return out;
}

LossModel loss_from_json(const json& j) {
  LossModel loss;
  loss.bernoulli_p = j.value("bernoulli_p", 0.0);
  if (j.contains("burst") && !j.at("burst").is_null()) {
    const auto& b = j.at("burst");
    loss.burst = BurstLoss{b.at("p_good_to_bad").get<double>(), b.at("p_bad_to_good").get<double>(),
                           b.value("loss_in_bad", 1.0)};
  }
  return loss;
}

}  // namespace

std::string scenario_to_json(const ScenarioConfig& config) {
  json aps = json::array();
  for (const auto& ap : config.aps) {
    aps.push_back({{"bssid", ap.bssid.to_string()},
                   {"ssid", ap.ssid},
                   {"channel", ap.channel},
                   {"rssi_mean_dbm", ap.rssi_mean_dbm},
                   {"rssi_jitter_db", ap.rssi_jitter_db},
                   {"phase_us", ap.phase_us},
                   {"loss", loss_to_json(ap.loss)}});
  }
  const json doc{{"name", config.name},
                 {"mode", to_string(config.mode)},
                 {"duration_s", config.duration_s},
                 {"n_sessions", config.n_sessions},
                 {"timing_jitter_us", config.timing_jitter_us},
                 {"seed", config.seed},
                 {"aps", aps}};
  return doc.dump(2) + '\n';
}

ScenarioConfig scenario_from_json(std::string_view text) {
  ScenarioConfig config;
  try {
    const auto doc = json::parse(text);
    config.name = doc.value("name", std::string("custom"));
    const auto mode = parse_capture_mode(doc.at("mode").get<std::string>());
    if (!mode) invalid("mode must be monitor or normal");
    config.mode = *mode;
    config.duration_s = doc.value("duration_s", 200.0);
    config.n_sessions = doc.value("n_sessions", 10);
    config.timing_jitter_us = doc.value("timing_jitter_us", std::int64_t{2000});
    config.seed = doc.value("seed", std::uint64_t{42});
    for (const auto& a : doc.at("aps")) {
      ApConfig ap;
      const auto bssid = MacAddress::parse(a.at("bssid").get<std::string>());
      if (!bssid) invalid("bad bssid " + a.at("bssid").dump());
      ap.bssid = *bssid;
      ap.ssid = a.value("ssid", std::string());
      ap.channel = a.value("channel", 6);
      ap.rssi_mean_dbm = a.value("rssi_mean_dbm", -60.0);
      ap.rssi_jitter_db = a.value("rssi_jitter_db", 3.0);
      ap.phase_us = a.value("phase_us", std::int64_t{0});
      if (a.contains("loss")) ap.loss = loss_from_json(a.at("loss"));
      config.aps.push_back(std::move(ap));
    }
  } catch (const json::exception& e) {
    invalid(std::string("scenario JSON: ") + e.what());
  }
  validate(config);
  return config;
}

}  // namespace fastrss
