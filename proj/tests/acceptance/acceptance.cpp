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

// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fastrss/beacon_simulator.hpp"
#include "fastrss/capture_ingest.hpp"
#include "fastrss/frame_codec.hpp"
#include "fastrss/metrics.hpp"
#include "test_support.hpp"

namespace {

using namespace fastrss;

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

// Published (pps, miss %) cells, both modes, all four tables.
struct PublishedCell {
  const char* label;
  CaptureMode mode;
  double pps;
  double miss_pct;
};

constexpr PublishedCell kPublished[] = {
    {"traffic AP1 normal", CaptureMode::normal, 0.90, 7.50},
    {"traffic AP2 normal", CaptureMode::normal, 0.91, 7.09},
    {"traffic AP3 normal", CaptureMode::normal, 0.91, 6.93},
    {"traffic AP4 normal", CaptureMode::normal, 0.91, 7.03},
    {"traffic AP1 monitor", CaptureMode::monitor, 4.76, 51.25},
    {"traffic AP2 monitor", CaptureMode::monitor, 7.40, 24.22},
    {"traffic AP3 monitor", CaptureMode::monitor, 7.42, 24.06},
    {"traffic AP4 monitor", CaptureMode::monitor, 8.29, 15.10},
    {"distance strong normal", CaptureMode::normal, 0.91, 7.04},
    {"distance weak normal", CaptureMode::normal, 0.57, 41.67},
    {"distance strong monitor", CaptureMode::monitor, 9.68, 0.86},
    {"distance weak monitor", CaptureMode::monitor, 9.22, 5.63},
    {"cpu-50 atheros normal", CaptureMode::normal, 0.96, 2.17},
    {"cpu-50 ralink normal", CaptureMode::normal, 0.76, 21.92},
    {"cpu-80 atheros normal", CaptureMode::normal, 0.86, 11.86},
    {"cpu-80 ralink normal", CaptureMode::normal, 0.69, 29.45},
    {"cpu-50 atheros monitor", CaptureMode::monitor, 8.76, 10.28},
    {"cpu-50 ralink monitor", CaptureMode::monitor, 8.19, 16.13},
    {"cpu-80 atheros monitor", CaptureMode::monitor, 7.80, 20.17},
    {"cpu-80 ralink monitor", CaptureMode::monitor, 5.05, 48.30},
};

Outcome criterion_miss_rate_tables() {
  Outcome out;
  double worst = 0.0;
  for (const auto& cell : kPublished) {
    const double err = std::abs(miss_rate(cell.pps, cell.mode) - cell.miss_pct);
    worst = std::max(worst, err);
    out.require(err <= 0.5, fmt("%s off by %.3f pp", cell.label, err));
  }
  if (out.pass) out.detail = fmt("%zu cells, worst %.3f pp", std::size(kPublished), worst);
  return out;
}

ApSeries series_for(const std::vector<RssMeasurement>& timeline, const MacAddress& bssid,
                    double duration_s) {
  ApSeries s;
  s.bssid = bssid;
  s.session_duration_s = duration_s;
  for (const auto& m : timeline) {
    if (m.bssid == bssid) s.measurements.push_back(m);
  }
  return s;
}

Outcome criterion_lossless_oracle() {
  Outcome out;
  ScenarioConfig config;
  config.mode = CaptureMode::monitor;
  config.timing_jitter_us = 0;
  config.aps.push_back(ApConfig{.bssid = testing::mac("02:00:00:00:00:01"), .ssid = "AP1"});
  const auto session = simulate_timeline(config, 0);
  const auto series = series_for(session.timeline, config.aps[0].bssid, 200.0);
  const SessionStats st = compute_session_stats(series, CaptureMode::monitor);
  out.require(st.n_packets == 1953, fmt("%zu measurements", st.n_packets));
  out.require(std::abs(st.avg_rate_pps - 9.765) < 1e-9, fmt("rate %.6f", st.avg_rate_pps));
  out.require(st.miss_rate_pct <= 0.01, fmt("miss %.4f%%", st.miss_rate_pct));
  bool exact = true;
  for (std::size_t i = 1; i < series.measurements.size(); ++i) {
    exact &= series.measurements[i].capture_time_us - series.measurements[i - 1].capture_time_us ==
             102'400;
  }
  out.require(exact, "gap other than 102.4 ms");
  out.require(st.availability_pct == 100.0, fmt("availability %.3f", st.availability_pct));
  if (out.pass) out.detail = "1953 packets, 9.765 pps, gaps 102.4 ms";
  return out;
}

double mean_rate(const ScenarioConfig& config, std::size_t ap_index) {
  double sum = 0.0;
  for (int s = 0; s < config.n_sessions; ++s) {
    const auto session = simulate_timeline(config, s);
    sum += average_rate(series_for(session.timeline, config.aps[ap_index].bssid, config.duration_s));
  }
  return sum / config.n_sessions;
}

Outcome criterion_scenario_reproduction() {
  struct Target {
    const char* preset;
    std::size_t ap;
    double pps;
  };
  static constexpr Target kTargets[] = {
      {"traffic,normal", 0, 0.90},          {"traffic,normal", 1, 0.91},
      {"traffic,normal", 2, 0.91},          {"traffic,normal", 3, 0.91},
      {"traffic,monitor", 0, 4.76},         {"traffic,monitor", 1, 7.40},
      {"traffic,monitor", 2, 7.42},         {"traffic,monitor", 3, 8.29},
      {"distance-strong,normal", 0, 0.91},  {"distance-weak,normal", 0, 0.57},
      {"distance-strong,monitor", 0, 9.68}, {"distance-weak,monitor", 0, 9.22},
      {"cpu-50,normal,atheros", 0, 0.96},   {"cpu-50,normal,ralink", 0, 0.76},
      {"cpu-80,normal,atheros", 0, 0.86},   {"cpu-80,normal,ralink", 0, 0.69},
      {"cpu-50,monitor,atheros", 0, 8.76},  {"cpu-50,monitor,ralink", 0, 8.19},
      {"cpu-80,monitor,atheros", 0, 7.80},  {"cpu-80,monitor,ralink", 0, 5.05},
  };
  Outcome out;
  double worst_normal = 0.0, worst_monitor = 0.0;
  for (const auto& t : kTargets) {
    const ScenarioConfig config = scenario_preset(t.preset);
    const double tol = config.mode == CaptureMode::normal ? 0.15 : 0.30;
    const double err = std::abs(mean_rate(config, t.ap) - t.pps);
    (config.mode == CaptureMode::normal ? worst_normal : worst_monitor) =
        std::max(config.mode == CaptureMode::normal ? worst_normal : worst_monitor, err);
    out.require(err <= tol, fmt("%s AP%zu off by %.3f pps", t.preset, t.ap + 1, err));
  }
  if (out.pass) {
    out.detail = fmt("%zu cells, worst %.3f pps normal, %.3f pps monitor", std::size(kTargets),
                     worst_normal, worst_monitor);
  }
  return out;
}

DistributionTable pooled_histogram(const ScenarioConfig& config) {
  std::vector<double> gaps;
  for (int s = 0; s < config.n_sessions; ++s) {
    const auto session = simulate_timeline(config, s);
    const auto g = inter_arrival(series_for(session.timeline, config.aps[0].bssid, config.duration_s));
    gaps.insert(gaps.end(), g.begin(), g.end());
  }
  return interval_histogram(gaps, 100.0);
}

std::size_t mass(const DistributionTable& table, double lo_ms, double hi_ms) {
  std::size_t n = 0;
  for (const auto& bin : table.bins) {
    if (bin.lower_edge_ms >= lo_ms && bin.lower_edge_ms < hi_ms) n += bin.count;
  }
  return n;
}

ScenarioConfig lossless(ScenarioConfig config) {
  for (auto& ap : config.aps) ap.loss = LossModel{};
  return config;
}

Outcome criterion_histogram_lobes() {
  Outcome out;
  const ScenarioConfig weak = scenario_preset("distance-weak,normal");
  const auto weak_hist = pooled_histogram(weak);
  const std::size_t lobe2 = mass(weak_hist, 2000, 2100);
  const std::size_t lobe1 = mass(weak_hist, 1000, 1100);
  out.require(lobe2 > 0, "distance-weak/normal has no mass in [2000,2100)");
  std::size_t other_max = 0;
  for (const auto& bin : weak_hist.bins) {
    if (bin.lower_edge_ms != 1000.0) other_max = std::max(other_max, bin.count);
  }
  out.require(lobe1 > other_max, "distance-weak/normal [1000,1100) lobe does not dominate");
  out.require(mass(pooled_histogram(lossless(weak)), 2000, 2100) == 0,
              "lossless normal run has mass in [2000,2100)");

  const ScenarioConfig cpu = scenario_preset("cpu-80,monitor,ralink");
  const std::size_t burst = mass(pooled_histogram(cpu), 500, 600);
  out.require(burst > 0, "cpu-80/monitor has no mass in [500,600)");
  out.require(mass(pooled_histogram(lossless(cpu)), 500, 600) == 0,
              "lossless monitor run has mass in [500,600)");
  if (out.pass) {
    out.detail = fmt("weak/normal [1000,1100)=%zu [2000,2100)=%zu; cpu-80/monitor [500,600)=%zu",
                     lobe1, lobe2, burst);
  }
  return out;
}

Outcome criterion_pipeline_identity() {
  Outcome out;
  std::mt19937_64 rng(2024);
  int mismatches = 0;
  for (int iter = 0; iter < 1000; ++iter) {
    ScenarioConfig config;
    config.mode = rng() % 2 ? CaptureMode::monitor : CaptureMode::normal;
    config.duration_s = 1.0 + static_cast<double>(rng() % 20);
    config.seed = rng();
    config.timing_jitter_us = static_cast<std::int64_t>(rng() % 3000);
    const int n_aps = 1 + static_cast<int>(rng() % 4);
    for (int a = 0; a < n_aps; ++a) {
      ApConfig ap;
      ap.bssid = MacAddress{{0x02, 0x11, static_cast<std::uint8_t>(rng()),
                             static_cast<std::uint8_t>(rng()), static_cast<std::uint8_t>(rng()),
                             static_cast<std::uint8_t>(a)}};
      ap.ssid = std::string(rng() % 33, static_cast<char>('a' + rng() % 26));
      ap.channel = 1 + static_cast<int>(rng() % 11);
      ap.rssi_mean_dbm = -static_cast<double>(rng() % 121);
      ap.rssi_jitter_db = static_cast<double>(rng() % 10);
      ap.phase_us = static_cast<std::int64_t>(rng() % 50'000);
      ap.loss.bernoulli_p = static_cast<double>(rng() % 100) / 100.0;
      config.aps.push_back(ap);
    }
    const auto timeline = simulate_timeline(config, iter).timeline;
    const PcapFile back = read_pcap(emit_pcap(timeline, config));
    const Extraction ex = extract_measurements(back.meta, back.records);
    if (ex.measurements != timeline) ++mismatches;
  }
  out.require(mismatches == 0, fmt("%d of 1000 timelines differ after the round trip", mismatches));

  std::vector<PcapRecord> records;
  for (int i = 0; i < 200; ++i) {
    fastrss::Bytes payload(rng() % 300);
    for (auto& b : payload) b = static_cast<std::uint8_t>(rng());
    records.push_back(make_record(1'700'000'000'000'000 + i * 102'400, std::move(payload)));
  }
  for (auto order : {ByteOrder::little_endian, ByteOrder::big_endian}) {
    for (auto res : {TimestampResolution::micro, TimestampResolution::nano}) {
      const CaptureMeta meta{LinkType::ieee80211_radiotap, res, order};
      const fastrss::Bytes bytes = write_pcap(meta, records);
      const PcapFile file = read_pcap(bytes);
      out.require(write_pcap(file.meta, file.records) == bytes,
                  fmt("pcap round trip not byte-identical (%s, %s)",
                      order == ByteOrder::little_endian ? "le" : "be",
                      res == TimestampResolution::micro ? "us" : "ns"));
    }
  }
  if (out.pass) out.detail = "1000 timelines identical; 4 pcap variants byte-identical";
  return out;
}

Outcome criterion_normal_emulation() {
  Outcome out;
  ScenarioConfig config;
  config.mode = CaptureMode::monitor;
  config.timing_jitter_us = 0;
  config.aps.push_back(ApConfig{.bssid = testing::mac("02:00:00:00:00:01"), .ssid = "NetB"});
  const auto timeline = simulate_timeline(config, 0).timeline;
  const PcapFile file = read_pcap(emit_pcap(timeline, config));
  const auto ms = extract_measurements(file.meta, file.records).measurements;

  CardFilter filter;
  filter.ssid = "NetB";
  filter.channel = 6;
  filter.report_interval_tu = 1000;
  filter.session_duration_us = 200'000'000;
  const auto filtered = apply_card_filters(ms, filter);

  const auto raw = demux_by_ap(ms, 200.0);
  const auto thin = demux_by_ap(filtered, 200.0);
  const double raw_rate = raw.empty() ? 0.0 : average_rate(raw[0]);
  const double rate = thin.empty() ? 0.0 : average_rate(thin[0]);
  const double avail = thin.empty() ? 0.0 : window_availability(thin[0]);
  out.require(rate >= 0.95 && rate <= 0.9766, fmt("filtered rate %.4f pps", rate));
  out.require(avail >= 95.0, fmt("filtered availability %.2f%%", avail));
  out.require(std::abs(raw_rate - 9.765) < 1e-9, fmt("unfiltered rate %.4f pps", raw_rate));
  if (out.pass) {
    out.detail = fmt("%.4f pps (%.1f%% available) vs %.4f pps unfiltered", rate, avail, raw_rate);
  }
  return out;
}

Outcome criterion_availability() {
  Outcome out;
  double got[2] = {0, 0}, oracle[2] = {0, 0};
  for (auto mode : {CaptureMode::monitor, CaptureMode::normal}) {
    ScenarioConfig config;
    config.mode = mode;
    config.seed = 7;
    config.aps.push_back(ApConfig{.bssid = testing::mac("02:00:00:00:00:01"), .ssid = "AP1"});
    config.aps[0].loss.bernoulli_p = 0.5;
    double sum = 0.0;
    for (int s = 0; s < config.n_sessions; ++s) {
      const auto session = simulate_timeline(config, s);
      sum += window_availability(series_for(session.timeline, config.aps[0].bssid, 200.0));
    }
    // schedule with timing jitter ignored; the jitter bound is far below a window
    std::vector<long long> schedule;
    for (long long k = 0; k < scheduled_beacons(config); ++k) {
      schedule.push_back(k * nominal_interval_us(mode) + config.timing_jitter_us);
    }
    const int i = mode == CaptureMode::monitor ? 0 : 1;
    got[i] = sum / config.n_sessions;
    oracle[i] = testing::binomial_availability(schedule, 0.5, 1'000'000, 200'000'000);
  }
  out.require(got[0] >= 99.5, fmt("monitor availability %.3f%%", got[0]));
  out.require(got[1] <= 55.0, fmt("normal availability %.3f%%", got[1]));
  out.require(oracle[0] >= 99.5 && oracle[1] <= 55.0, "binomial oracle outside thresholds");
  if (out.pass) {
    out.detail = fmt("monitor %.2f%% (oracle %.2f%%), normal %.2f%% (oracle %.2f%%)", got[0],
                     oracle[0], got[1], oracle[1]);
  }
  return out;
}

Outcome criterion_fuzz() {
  Outcome out;
  std::mt19937_64 rng(99);
  std::size_t values = 0, typed = 0, other = 0;
  const fastrss::Bytes seed_frame = [] {
    BeaconFrame f;
    f.body.ssid = "seed";
    RadiotapInfo info;
    info.antenna_signal_dbm = -60;
    info.channel_mhz = 2437;
    return encode_beacon(f, info);
  }();
  for (int i = 0; i < 100'000; ++i) {
    fastrss::Bytes input;
    if (i % 2 == 0) {
      input.resize(rng() % 128);
      for (auto& b : input) b = static_cast<std::uint8_t>(rng());
    } else {
      // mutate a valid frame so parsing reaches deeper states
      input = seed_frame;
      const int flips = 1 + static_cast<int>(rng() % 4);
      for (int f = 0; f < flips; ++f) input[rng() % input.size()] = static_cast<std::uint8_t>(rng());
      input.resize(rng() % (input.size() + 1));
    }
    try {
      const RadiotapInfo info = decode_radiotap(input);
      decode_beacon(ByteView(input).subspan(info.header_length));
      ++values;
    } catch (const CodecError&) {
      ++typed;
    } catch (...) {
      ++other;
    }
  }
  out.require(other == 0, fmt("%zu untyped exceptions", other));
  if (out.pass) out.detail = fmt("100000 inputs: %zu decoded, %zu typed errors", values, typed);
  return out;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"miss-rate formula matches published tables", criterion_miss_rate_tables},
      {"lossless monitor oracle", criterion_lossless_oracle},
      {"scenario presets reproduce published rates", criterion_scenario_reproduction},
      {"histogram lobes", criterion_histogram_lobes},
      {"pipeline identity", criterion_pipeline_identity},
      {"normal-mode emulation by card filter", criterion_normal_emulation},
      {"one-second availability at 50% loss", criterion_availability},
      {"codec fuzz totality", criterion_fuzz},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto start = std::chrono::steady_clock::now();
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception& e) {
      outcome.pass = false;
      outcome.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("[%s] %zu. %s (%.2fs): %s\n", outcome.pass ? "PASS" : "FAIL", i + 1,
                criteria[i].first, secs, outcome.detail.c_str());
    failures += !outcome.pass;
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures,
              criteria.size());
  return failures == 0 ? 0 : 1;
}
