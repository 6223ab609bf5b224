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

#include <benchmark/benchmark.h>

#include "fastrss/beacon_simulator.hpp"
#include "fastrss/capture_ingest.hpp"
#include "fastrss/frame_codec.hpp"
#include "fastrss/metrics.hpp"

namespace {

using namespace fastrss;

ScenarioConfig monitor_scenario() { return scenario_preset("traffic,monitor"); }

void BM_DecodeBeacon(benchmark::State& state) {
  BeaconFrame frame;
  frame.mac.source = frame.mac.bssid = *MacAddress::parse("02:00:5e:10:00:01");
  frame.body.ssid = "HallwayAP";
  frame.body.extra_elements.push_back({3, Bytes{6}});
  RadiotapInfo info;
  info.antenna_signal_dbm = -63;
  info.channel_mhz = 2437;
  const Bytes bytes = encode_beacon(frame, info);
  for (auto _ : state) {
    const RadiotapInfo rt = decode_radiotap(bytes);
    benchmark::DoNotOptimize(decode_beacon(ByteView(bytes).subspan(rt.header_length)));
  }
  state.SetBytesProcessed(static_cast<std::int64_t>(state.iterations() * bytes.size()));
}
BENCHMARK(BM_DecodeBeacon);

void BM_SimulateSession(benchmark::State& state) {
  const ScenarioConfig config = monitor_scenario();
  for (auto _ : state) benchmark::DoNotOptimize(simulate_timeline(config, 0));
}
BENCHMARK(BM_SimulateSession)->Unit(benchmark::kMillisecond);

void BM_ExtractMeasurements(benchmark::State& state) {
  const ScenarioConfig config = monitor_scenario();
  const PcapFile file = synthesize_capture(simulate_timeline(config, 0).timeline, config);
  for (auto _ : state) benchmark::DoNotOptimize(extract_measurements(file.meta, file.records));
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * file.records.size()));
}
BENCHMARK(BM_ExtractMeasurements)->Unit(benchmark::kMillisecond);

void BM_SessionStats(benchmark::State& state) {
  const ScenarioConfig config = monitor_scenario();
  const auto series = demux_by_ap(simulate_timeline(config, 0).timeline, config.duration_s);
  for (auto _ : state) {
    for (const auto& s : series) {
      const SessionStats st = compute_session_stats(s, config.mode);
      benchmark::DoNotOptimize(interval_histogram(st.intervals_ms));
    }
  }
}
BENCHMARK(BM_SessionStats)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
