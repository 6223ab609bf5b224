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

#include "commands.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "fastrss/beacon_simulator.hpp"
#include "fastrss/capture_ingest.hpp"
#include "fastrss/report.hpp"
#include "json.hpp"

namespace fs = std::filesystem;

namespace fastrss::cli {

namespace {

using json = nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string join(const std::vector<std::string>& args) {
  std::string out;
  for (const auto& a : args) {
    if (!out.empty()) out += ' ';
    out += a;
  }
  return out;
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string compact_bssid(const MacAddress& mac) {
  std::string s = mac.to_string();
  s.erase(std::remove(s.begin(), s.end(), ':'), s.end());
  return s;
}

std::string report_text(const ReportTable& table, OutputFormat format) {
  return format == OutputFormat::json ? table.to_json() : table.to_csv();
}

const char* extension(OutputFormat format) {
  return format == OutputFormat::json ? ".json" : ".csv";
}

/// Start of the capture session: first timestamp floored to a whole second.
std::int64_t capture_session_start(const std::vector<PcapRecord>& records) {
  const auto first = std::min_element(records.begin(), records.end(),
                                       [](const PcapRecord& a, const PcapRecord& b) {
                                         return a.ts_us < b.ts_us;
                                       });
  return first->ts_us / 1'000'000 * 1'000'000;
}

std::int64_t capture_last_timestamp(const std::vector<PcapRecord>& records) {
  std::int64_t last = 0;
  for (const auto& r : records) last = std::max(last, r.ts_us);
  return last;
}

class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, std::string_view contents) {
    write_file_atomic(dir_ / name, contents);
    names_.push_back(name);
  }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<fs::path> paths() const {
    std::vector<fs::path> out;
    for (const auto& n : names_) out.push_back(dir_ / n);
    return out;
  }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

void finish_manifest(OutputSet& outputs, RunManifest manifest, const std::string& name) {
  manifest.output_paths = outputs.names();
  outputs.write(name, manifest.to_json());
}

void warn(CommandResult& result, std::ostream& log, std::string message) {
  log << "warning: " << message << '\n';
  result.warnings.push_back(std::move(message));
}

}  // namespace

std::string sha256_hex(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_Digest(data.data(), data.size(), digest, &length, EVP_sha256(), nullptr);
  std::string hex;
  char buf[3];
  for (unsigned int i = 0; i < length; ++i) {
    std::snprintf(buf, sizeof buf, "%02x", digest[i]);
    hex += buf;
  }
  return hex;
}

void write_file_atomic(const fs::path& path, std::string_view contents) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

std::string RunManifest::to_json() const {
  json doc{{"tool", "fastrss"},
           {"tool_version", tool_version},
           {"command_line", command_line},
           {"config_digest", config_digest}};
  doc["seed"] = seed ? json(*seed) : json(nullptr);
  doc["outputs"] = output_paths;
  return doc.dump(2) + '\n';
}

CommandResult cmd_analyze(const AnalyzeOptions& options, std::ostream& log) {
  CommandResult result;
  std::string bytes;
  PcapFile capture;
  try {
    bytes = read_file(options.pcap_path);
    capture = read_pcap(ByteView(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  } catch (const CaptureError& e) {
    log << "error: " << options.pcap_path.string() << ": " << e.what() << '\n';
    result.exit_code = kExitParse;
    return result;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    result.exit_code = kExitParse;
    return result;
  }

  const Extraction extraction = extract_measurements(capture.meta, capture.records);
  const DecodeStats& st = extraction.stats;
  log << "records=" << st.total << " beacons=" << st.beacons
      << " skipped_non_beacon=" << st.skipped_non_beacon << " errors=" << st.errors
      << " missing_signal=" << st.missing_signal << '\n';

  OutputSet outputs(options.out_dir);
  RunManifest manifest;
  manifest.command_line = join(options.invocation);
  const std::string config_text =
      "analyze;mode=" + std::string(to_string(options.mode)) +
      ";duration_s=" + (options.duration_s ? number(*options.duration_s) : "auto") +
      ";window_s=" + number(options.window_s) + ";bin_width_ms=" + number(options.bin_width_ms) +
      ";start_us=" + (options.start_us ? std::to_string(*options.start_us) : "auto") +
      ";scenario=" + options.scenario +
      ";format=" + (options.format == OutputFormat::json ? "json" : "csv") + "\n";
  manifest.config_digest = sha256_hex(config_text + bytes);

  ReportTable report;
  const std::string report_name = std::string("report") + extension(options.format);
  if (extraction.measurements.empty()) {
    warn(result, log, "no beacon measurements in " + options.pcap_path.string());
    outputs.write(report_name, report_text(report, options.format));
    finish_manifest(outputs, manifest, "manifest.json");
    result.outputs = outputs.paths();
    result.exit_code = kExitNoData;
    return result;
  }

  const std::int64_t start_us = options.start_us.value_or(capture_session_start(capture.records));
  double duration_s = 0.0;
  if (options.duration_s) {
    duration_s = *options.duration_s;
  } else {
    const auto span_us = capture_last_timestamp(capture.records) - start_us;
    duration_s = std::max(std::ceil(static_cast<double>(span_us) / 1e6), std::ceil(options.window_s));
  }
  if (!(duration_s >= options.window_s) || !(options.window_s > 0.0) ||
      !(options.bin_width_ms > 0.0)) {
    log << "error: need 0 < window-s <= duration-s and bin-width-ms > 0\n";
    result.exit_code = kExitUsage;
    return result;
  }

  const auto series = demux_by_ap(extraction.measurements, duration_s, start_us);
  bool mismatch = false;
  for (const auto& s : series) {
    const SessionStats stats = compute_session_stats(s, options.mode, options.window_s);
    if (stats.avg_rate_pps > theoretical_max_pps(options.mode) * (1.0 + 1e-9)) mismatch = true;
    const AggregateStats agg = aggregate_sessions(std::span(&stats, 1));
    report.rows.push_back(make_report_row(options.scenario, agg));
    if (stats.intervals_ms.empty()) {
      warn(result, log, "AP " + s.bssid.to_string() + " has fewer than 2 samples; no histogram");
      continue;
    }
    const auto histogram = interval_histogram(stats.intervals_ms, options.bin_width_ms);
    outputs.write("histogram_" + compact_bssid(s.bssid) + ".csv", histogram.to_csv());
  }
  if (mismatch) {
    warn(result, log,
         "measured rate exceeds the " + std::string(to_string(options.mode)) +
             "-mode theoretical maximum; miss-rate clamped to 0 (capture mode mislabeled?)");
  }
  log << "aps=" << series.size() << " duration_s=" << duration_s << " start_us=" << start_us << '\n';
  outputs.write(report_name, report_text(report, options.format));
  finish_manifest(outputs, manifest, "manifest.json");
  result.outputs = outputs.paths();
  return result;
}

CommandResult cmd_filter(const FilterOptions& options, std::ostream& log) {
  CommandResult result;
  std::string bytes;
  PcapFile capture;
  try {
    bytes = read_file(options.pcap_path);
    capture = read_pcap(ByteView(reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()));
  } catch (const std::exception& e) {
    log << "error: " << options.pcap_path.string() << ": " << e.what() << '\n';
    result.exit_code = kExitParse;
    return result;
  }
  if (options.interval_tu < 100) {
    log << "error: --interval-tu must be >= 100\n";
    result.exit_code = kExitUsage;
    return result;
  }

  const Extraction extraction = extract_measurements(capture.meta, capture.records);
  CardFilter filter;
  filter.ssid = options.ssid;
  filter.channel = options.channel;
  filter.report_interval_tu = options.interval_tu;
  if (!capture.records.empty()) {
    filter.window_origin_us = options.start_us.value_or(capture_session_start(capture.records));
  }
  if (options.duration_s) filter.session_duration_us = std::llround(*options.duration_s * 1e6);

  std::vector<std::size_t> keep;
  for (std::size_t i : select_card_filtered(extraction.measurements, filter)) {
    keep.push_back(extraction.source_records[i]);
  }
  std::sort(keep.begin(), keep.end());
  std::vector<PcapRecord> kept;
  kept.reserve(keep.size());
  for (std::size_t i : keep) kept.push_back(capture.records[i]);

  const Bytes out = write_pcap(capture.meta, kept);
  OutputSet outputs(options.out_path.parent_path());
  outputs.write(options.out_path.filename().string(),
                std::string_view(reinterpret_cast<const char*>(out.data()), out.size()));

  RunManifest manifest;
  manifest.command_line = join(options.invocation);
  const std::string config_text =
      "filter;ssid=" + options.ssid.value_or("*") +
      ";channel=" + (options.channel ? std::to_string(*options.channel) : "*") +
      ";interval_tu=" + std::to_string(options.interval_tu) +
      ";duration_s=" + (options.duration_s ? number(*options.duration_s) : "none") +
      ";start_us=" + (options.start_us ? std::to_string(*options.start_us) : "auto") + "\n";
  manifest.config_digest = sha256_hex(config_text + bytes);
  finish_manifest(outputs, manifest, options.out_path.filename().string() + ".manifest.json");
  result.outputs = outputs.paths();

  log << "kept " << kept.size() << " of " << extraction.measurements.size() << " measurements\n";
  if (kept.empty()) {
    warn(result, log, "no measurements passed the card filters");
    result.exit_code = kExitNoData;
  }
  return result;
}

CommandResult cmd_simulate(const SimulateOptions& options, std::ostream& log) {
  CommandResult result;
  ScenarioConfig config;
  try {
    if (options.preset.has_value() == options.config_path.has_value()) {
      log << "error: give exactly one of --preset or --config\n";
      result.exit_code = kExitUsage;
      return result;
    }
    config = options.preset ? scenario_preset(*options.preset)
                            : scenario_from_json(read_file(*options.config_path));
    if (options.seed) config.seed = *options.seed;
    if (options.n_sessions) config.n_sessions = *options.n_sessions;
    validate(config);
  } catch (const SimulationError& e) {
    log << "error: " << e.what() << '\n';
    result.exit_code = e.code() == SimulationErrc::unknown_preset ? kExitUsage : kExitParse;
    return result;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    result.exit_code = kExitParse;
    return result;
  }
  if (!(options.window_s > 0.0) || options.window_s > config.duration_s ||
      !(options.bin_width_ms > 0.0)) {
    log << "error: need 0 < window-s <= duration and bin-width-ms > 0\n";
    result.exit_code = kExitUsage;
    return result;
  }

  const std::string scenario_json = scenario_to_json(config);
  OutputSet outputs(options.out_dir);
  outputs.write("scenario.json", scenario_json);

  std::vector<std::vector<SessionStats>> per_ap(config.aps.size());
  std::vector<std::vector<double>> pooled(config.aps.size());
  std::string truth = "session,bssid,scheduled,delivered,dropped,drop_indices\n";
  for (int s = 0; s < config.n_sessions; ++s) {
    const SimulatedSession session = simulate_timeline(config, s);
    const Bytes pcap = emit_pcap(session.timeline, config);
    char name[32];
    std::snprintf(name, sizeof name, "session_%02d.pcap", s);
    outputs.write(name, std::string_view(reinterpret_cast<const char*>(pcap.data()), pcap.size()));

    for (const auto& ap : session.truth.aps) {
      truth += std::to_string(s) + ',' + ap.bssid.to_string() + ',' + std::to_string(ap.scheduled) +
               ',' + std::to_string(ap.delivered) + ',' + std::to_string(ap.drop_indices.size()) + ',';
      for (std::size_t i = 0; i < ap.drop_indices.size(); ++i) {
        truth += (i ? " " : "") + std::to_string(ap.drop_indices[i]);
      }
      truth += '\n';
    }
    for (std::size_t a = 0; a < config.aps.size(); ++a) {
      ApSeries series;
      series.bssid = config.aps[a].bssid;
      series.ssid = config.aps[a].ssid;
      series.session_duration_s = config.duration_s;
      for (const auto& m : session.timeline) {
        if (m.bssid == series.bssid) series.measurements.push_back(m);
      }
      SessionStats stats = compute_session_stats(series, config.mode, options.window_s);
      pooled[a].insert(pooled[a].end(), stats.intervals_ms.begin(), stats.intervals_ms.end());
      per_ap[a].push_back(std::move(stats));
    }
  }
  outputs.write("ground_truth.csv", truth);

  std::vector<AggregateStats> aggregates;
  for (std::size_t a = 0; a < config.aps.size(); ++a) {
    aggregates.push_back(aggregate_sessions(per_ap[a]));
    if (pooled[a].empty()) {
      warn(result, log, "AP " + config.aps[a].bssid.to_string() + " produced no intervals");
      continue;
    }
    outputs.write("histogram_" + compact_bssid(config.aps[a].bssid) + ".csv",
                  interval_histogram(pooled[a], options.bin_width_ms).to_csv());
  }
  const ReportTable report = comparison_report(config.name, aggregates);
  outputs.write(std::string("report") + extension(options.format), report_text(report, options.format));

  RunManifest manifest;
  manifest.command_line = join(options.invocation);
  manifest.seed = config.seed;
  manifest.config_digest =
      sha256_hex(scenario_json + "window_s=" + number(options.window_s) +
                 ";bin_width_ms=" + number(options.bin_width_ms) +
                 ";format=" + (options.format == OutputFormat::json ? "json" : "csv") + "\n");
  finish_manifest(outputs, manifest, "manifest.json");
  result.outputs = outputs.paths();

  for (const auto& row : report.rows) {
    log << row.scenario << ' ' << row.bssid << ' ' << to_string(row.mode) << " avg_pps=" << row.avg_pps
        << " miss_rate_pct=" << row.miss_rate_pct << " availability_pct=" << row.availability_pct
        << '\n';
  }
  return result;
}

namespace {

ReportTable load_report(const fs::path& path) {
  const std::string text = read_file(path);
  return path.extension() == ".json" ? ReportTable::from_json(text) : ReportTable::from_csv(text);
}

}  // namespace

CommandResult cmd_compare(const CompareOptions& options, std::ostream& log) {
  CommandResult result;
  ComparisonTable table;
  std::string inputs;
  try {
    inputs = read_file(options.normal_report) + read_file(options.monitor_report);
    table = compare_reports(load_report(options.normal_report), load_report(options.monitor_report));
  } catch (const KeyMismatch& e) {
    log << "error: reports cover different keys:\n";
    for (const auto& o : e.offenders()) log << "  " << o << '\n';
    result.exit_code = kExitParse;
    return result;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    result.exit_code = kExitParse;
    return result;
  }
  const OutputFormat format =
      options.format.value_or(options.out_path.extension() == ".json" ? OutputFormat::json
                                                                      : OutputFormat::csv);
  OutputSet outputs(options.out_path.parent_path());
  outputs.write(options.out_path.filename().string(),
                format == OutputFormat::json ? table.to_json() : table.to_csv());
  RunManifest manifest;
  manifest.command_line = join(options.invocation);
  manifest.config_digest = sha256_hex("compare\n" + inputs);
  finish_manifest(outputs, manifest, options.out_path.filename().string() + ".manifest.json");
  result.outputs = outputs.paths();
  return result;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> invocation(argv, argv + argc);

  CLI::App app{"Beacon-frame RSS measurement availability toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  const std::vector<std::string> modes{"monitor", "normal"};
  const std::vector<std::string> formats{"csv", "json"};
  std::string analyze_mode = "monitor";
  std::string analyze_format = "csv";
  std::string simulate_format = "csv";
  std::string compare_format;
  auto to_format = [](const std::string& s) {
    return s == "json" ? OutputFormat::json : OutputFormat::csv;
  };

  AnalyzeOptions analyze;
  auto* analyze_cmd = app.add_subcommand("analyze", "Per-AP rate, miss-rate, availability and histograms");
  analyze_cmd->add_option("pcap", analyze.pcap_path, "Capture file")->required();
  analyze_cmd->add_option("--mode", analyze_mode, "Capture mode")
      ->check(CLI::IsMember(modes))
      ->capture_default_str();
  analyze_cmd->add_option("--duration-s", analyze.duration_s, "Configured session length");
  analyze_cmd->add_option("--window-s", analyze.window_s, "Availability window")->capture_default_str();
  analyze_cmd->add_option("--bin-width-ms", analyze.bin_width_ms, "Histogram bin width")
      ->capture_default_str();
  analyze_cmd->add_option("--format", analyze_format, "Report format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
  analyze_cmd->add_option("--start-us", analyze.start_us, "Session start timestamp");
  analyze_cmd->add_option("--scenario", analyze.scenario, "Scenario label for report rows");
  analyze_cmd->add_option("--out", analyze.out_dir, "Output directory")->capture_default_str();

  FilterOptions filter;
  auto* filter_cmd = app.add_subcommand("filter", "Emulate normal-mode card filters on a monitor capture");
  filter_cmd->add_option("pcap", filter.pcap_path, "Capture file")->required();
  filter_cmd->add_option("--ssid", filter.ssid, "Keep only this SSID");
  filter_cmd->add_option("--channel", filter.channel, "Keep only this channel")->check(CLI::Range(1, 11));
  filter_cmd->add_option("--interval-tu", filter.interval_tu, "Report interval in TU")
      ->capture_default_str();
  filter_cmd->add_option("--duration-s", filter.duration_s, "Session length bounding report windows");
  filter_cmd->add_option("--start-us", filter.start_us, "Report window origin");
  filter_cmd->add_option("--out", filter.out_path, "Output pcap")->required();

  SimulateOptions simulate;
  auto* simulate_cmd = app.add_subcommand("simulate", "Run a scenario and write pcaps, ground truth and report");
  simulate_cmd->add_option("--preset", simulate.preset, "Preset name, e.g. traffic,monitor");
  simulate_cmd->add_option("--config", simulate.config_path, "Scenario JSON file");
  simulate_cmd->add_option("--seed", simulate.seed, "Override the scenario seed");
  simulate_cmd->add_option("--sessions", simulate.n_sessions, "Override the session count")
      ->check(CLI::PositiveNumber);
  simulate_cmd->add_option("--window-s", simulate.window_s, "Availability window")->capture_default_str();
  simulate_cmd->add_option("--bin-width-ms", simulate.bin_width_ms, "Histogram bin width")
      ->capture_default_str();
  simulate_cmd->add_option("--format", simulate_format, "Report format")
      ->check(CLI::IsMember(formats))
      ->capture_default_str();
  simulate_cmd->add_option("--out", simulate.out_dir, "Output directory")->required();
  bool list_presets = false;
  auto* presets_cmd = app.add_subcommand("presets", "List scenario presets");
  presets_cmd->callback([&] { list_presets = true; });

  CompareOptions compare;
  auto* compare_cmd = app.add_subcommand("compare", "Side-by-side normal vs monitor table");
  compare_cmd->add_option("normal_report", compare.normal_report, "Normal-mode report")->required();
  compare_cmd->add_option("monitor_report", compare.monitor_report, "Monitor-mode report")->required();
  compare_cmd->add_option("--format", compare_format, "Output format (default from --out extension)")
      ->check(CLI::IsMember(formats));
  compare_cmd->add_option("--out", compare.out_path, "Output file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kToolVersion << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    CommandResult result;
    if (analyze_cmd->parsed()) {
      analyze.invocation = invocation;
      analyze.mode = *parse_capture_mode(analyze_mode);
      analyze.format = to_format(analyze_format);
      result = cmd_analyze(analyze, err);
    } else if (filter_cmd->parsed()) {
      filter.invocation = invocation;
      result = cmd_filter(filter, err);
    } else if (simulate_cmd->parsed()) {
      simulate.invocation = invocation;
      simulate.format = to_format(simulate_format);
      result = cmd_simulate(simulate, err);
    } else if (compare_cmd->parsed()) {
      compare.invocation = invocation;
      if (!compare_format.empty()) compare.format = to_format(compare_format);
      result = cmd_compare(compare, err);
    } else if (list_presets) {
      for (const auto& name : preset_names()) out << name << '\n';
    }
    for (const auto& path : result.outputs) out << path.string() << '\n';
    return result.exit_code;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitParse;
  }
}

}  // namespace fastrss::cli
