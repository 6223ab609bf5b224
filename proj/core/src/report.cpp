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

#include "fastrss/report.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"

namespace fastrss {

namespace {

using json = nlohmann::ordered_json;

constexpr std::string_view kReportHeader =
    "scenario,bssid,ssid,mode,avg_pps,miss_rate_pct,availability_pct,n_sessions";

std::string csv_field(std::string_view value) {
  if (value.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(value);
  std::string out = "\"";
  for (char c : value) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + '"';
}

std::string fixed(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

// RFC 4180 records; quoted fields may contain separators and newlines.
std::vector<std::vector<std::string>> parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> record;
  std::string field;
  bool quoted = false;
  bool any = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
      continue;
    }
    if (c == '"') {
      quoted = true;
      any = true;
    } else if (c == ',') {
      record.push_back(std::move(field));
      field.clear();
      any = true;
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      if (any || !field.empty()) {
        record.push_back(std::move(field));
        records.push_back(std::move(record));
      }
      record.clear();
      field.clear();
      any = false;
    } else {
      field += c;
      any = true;
    }
  }
  if (quoted) throw ReportFormatError("unterminated quoted CSV field");
  if (any || !field.empty()) {
    record.push_back(std::move(field));
    records.push_back(std::move(record));
  }
  return records;
}

double to_double(const std::string& s, std::string_view column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ReportFormatError("bad number '" + s + "' in column " + std::string(column));
  }
}

CaptureMode to_mode(const std::string& s) {
  const auto mode = parse_capture_mode(s);
  if (!mode) throw ReportFormatError("unknown mode '" + s + "'");
  return *mode;
}

json cell_json(const std::optional<ModeCell>& cell) {
  if (!cell) return nullptr;
  return json{{"avg_pps", cell->avg_pps}, {"miss_rate_pct", cell->miss_rate_pct}};
}

using Key = std::pair<std::string, std::string>;

std::map<Key, const ReportRow*> index_rows(const ReportTable& report, std::string_view side) {
  std::map<Key, const ReportRow*> out;
  for (const auto& row : report.rows) {
    if (!out.emplace(Key{row.scenario, row.bssid}, &row).second) {
      throw ReportFormatError(std::string(side) + " report repeats key " + row.scenario + "/" +
                              row.bssid);
    }
  }
  return out;
}

}  // namespace

std::string ReportTable::to_csv() const {
  std::string out(kReportHeader);
  out += '\n';
  for (const auto& r : rows) {
    out += csv_field(r.scenario) + ',' + csv_field(r.bssid) + ',' + csv_field(r.ssid) + ',' +
           std::string(to_string(r.mode)) + ',' + fixed(r.avg_pps) + ',' +
           fixed(r.miss_rate_pct) + ',' + fixed(r.availability_pct) + ',' +
           std::to_string(r.n_sessions) + '\n';
  }
  return out;
}

std::string ReportTable::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"scenario", r.scenario},
                         {"bssid", r.bssid},
                         {"ssid", r.ssid},
                         {"mode", to_string(r.mode)},
                         {"avg_pps", r.avg_pps},
                         {"miss_rate_pct", r.miss_rate_pct},
                         {"availability_pct", r.availability_pct},
                         {"n_sessions", r.n_sessions}});
  }
  return json{{"rows", rows_json}}.dump(2) + '\n';
}

ReportTable ReportTable::from_csv(std::string_view text) {
  const auto records = parse_csv(text);
  if (records.empty()) throw ReportFormatError("empty report");
  std::string header;
  for (std::size_t i = 0; i < records.front().size(); ++i) {
    header += (i ? "," : "") + records.front()[i];
  }
  if (header != kReportHeader) throw ReportFormatError("unexpected header: " + header);
  ReportTable table;
  for (std::size_t i = 1; i < records.size(); ++i) {
    const auto& f = records[i];
    if (f.size() != 8) {
      throw ReportFormatError("line " + std::to_string(i + 1) + " has " +
                              std::to_string(f.size()) + " fields");
    }
    ReportRow row;
    row.scenario = f[0];
    row.bssid = f[1];
    row.ssid = f[2];
    row.mode = to_mode(f[3]);
    row.avg_pps = to_double(f[4], "avg_pps");
    row.miss_rate_pct = to_double(f[5], "miss_rate_pct");
    row.availability_pct = to_double(f[6], "availability_pct");
    row.n_sessions = static_cast<std::size_t>(to_double(f[7], "n_sessions"));
    table.rows.push_back(std::move(row));
  }
  return table;
}

ReportTable ReportTable::from_json(std::string_view text) {
  ReportTable table;
  try {
    const auto doc = json::parse(text);
    for (const auto& r : doc.at("rows")) {
      ReportRow row;
      row.scenario = r.at("scenario").get<std::string>();
      row.bssid = r.at("bssid").get<std::string>();
      row.ssid = r.at("ssid").get<std::string>();
      row.mode = to_mode(r.at("mode").get<std::string>());
      row.avg_pps = r.at("avg_pps").get<double>();
      row.miss_rate_pct = r.at("miss_rate_pct").get<double>();
      row.availability_pct = r.at("availability_pct").get<double>();
      row.n_sessions = r.at("n_sessions").get<std::size_t>();
      table.rows.push_back(std::move(row));
    }
  } catch (const json::exception& e) {
    throw ReportFormatError(std::string("bad JSON report: ") + e.what());
  }
  return table;
}

ReportRow make_report_row(std::string scenario, const AggregateStats& stats) {
  ReportRow row;
  row.scenario = std::move(scenario);
  row.bssid = stats.bssid.to_string();
  row.ssid = stats.ssid;
  row.mode = stats.mode;
  row.avg_pps = stats.avg_rate_pps.mean;
  row.miss_rate_pct = stats.miss_rate_pct.mean;
  row.availability_pct = stats.availability_pct.mean;
  row.n_sessions = stats.n_sessions;
  return row;
}

ReportTable comparison_report(std::string_view scenario, std::span<const AggregateStats> stats) {
  ReportTable table;
  for (const auto& s : stats) table.rows.push_back(make_report_row(std::string(scenario), s));
  return table;
}

std::string ComparisonTable::to_csv() const {
  std::string out =
      "scenario,bssid,ssid,normal_avg_pps,normal_miss_rate_pct,monitor_avg_pps,"
      "monitor_miss_rate_pct\n";
  auto cell = [](const std::optional<ModeCell>& c) {
    return c ? fixed(c->avg_pps) + ',' + fixed(c->miss_rate_pct) : std::string(",");
  };
  for (const auto& r : rows) {
    out += csv_field(r.scenario) + ',' + csv_field(r.bssid) + ',' + csv_field(r.ssid) + ',' +
           cell(r.normal) + ',' + cell(r.monitor) + '\n';
  }
  return out;
}

std::string ComparisonTable::to_json() const {
  json rows_json = json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"scenario", r.scenario},
                         {"bssid", r.bssid},
                         {"ssid", r.ssid},
                         {"normal", cell_json(r.normal)},
                         {"monitor", cell_json(r.monitor)}});
  }
  return json{{"rows", rows_json}}.dump(2) + '\n';
}

ComparisonTable pair_modes(const ReportTable& report) {
  ComparisonTable table;
  std::map<Key, std::size_t> slot;
  for (const auto& r : report.rows) {
    auto [it, inserted] = slot.try_emplace(Key{r.scenario, r.bssid}, table.rows.size());
    if (inserted) table.rows.push_back({r.scenario, r.bssid, r.ssid, std::nullopt, std::nullopt});
    auto& row = table.rows[it->second];
    (r.mode == CaptureMode::normal ? row.normal : row.monitor) = ModeCell{r.avg_pps, r.miss_rate_pct};
  }
  return table;
}

namespace {

std::string join_offenders(const std::vector<std::string>& offenders) {
  std::string out = "KeyMismatch:";
  for (const auto& o : offenders) out += " " + o;
  return out;
}

}  // namespace

KeyMismatch::KeyMismatch(std::vector<std::string> offenders)
    : std::runtime_error(join_offenders(offenders)), offenders_(std::move(offenders)) {}

ComparisonTable compare_reports(const ReportTable& normal, const ReportTable& monitor) {
  const auto normal_rows = index_rows(normal, "normal");
  const auto monitor_rows = index_rows(monitor, "monitor");
  std::vector<std::string> offenders;
  for (const auto& [key, row] : normal_rows) {
    if (!monitor_rows.count(key)) offenders.push_back(key.first + "/" + key.second + " (normal only)");
  }
  for (const auto& [key, row] : monitor_rows) {
    if (!normal_rows.count(key)) offenders.push_back(key.first + "/" + key.second + " (monitor only)");
  }
  if (!offenders.empty()) throw KeyMismatch(std::move(offenders));

  ComparisonTable table;
  for (const auto& r : normal.rows) {
    const ReportRow* m = monitor_rows.at(Key{r.scenario, r.bssid});
    table.rows.push_back({r.scenario, r.bssid, m->ssid, ModeCell{r.avg_pps, r.miss_rate_pct},
                          ModeCell{m->avg_pps, m->miss_rate_pct}});
  }
  return table;
}

}  // namespace fastrss
