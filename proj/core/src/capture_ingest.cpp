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

#include "fastrss/capture_ingest.hpp"

#include <algorithm>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include "byte_io.hpp"

namespace fastrss {

std::string_view to_string(CaptureErrc code) noexcept {
  switch (code) {
    case CaptureErrc::bad_magic: return "BadMagic";
    case CaptureErrc::unsupported_link_type: return "UnsupportedLinkType";
    case CaptureErrc::truncated_record: return "TruncatedRecord";
    case CaptureErrc::record_too_long: return "RecordTooLong";
    case CaptureErrc::io_error: return "IoError";
  }
  return "Unknown";
}

namespace {

std::string describe(CaptureErrc code, const std::string& what, long long index) {
  std::string msg(to_string(code));
  if (index >= 0) msg += " (record " + std::to_string(index) + ")";
  return msg + ": " + what;
}

constexpr std::size_t kGlobalHeaderLength = 24;
constexpr std::size_t kRecordHeaderLength = 16;

class FieldReader {
 public:
  explicit FieldReader(ByteOrder order) : order_(order) {}
  std::uint32_t u32(const std::uint8_t* p) const {
    return order_ == ByteOrder::little_endian ? detail::load_le32(p) : detail::load_be32(p);
  }
  std::uint16_t u16(const std::uint8_t* p) const {
    return order_ == ByteOrder::little_endian ? detail::load_le16(p) : detail::load_be16(p);
  }

 private:
  ByteOrder order_;
};

class FieldWriter {
 public:
  FieldWriter(ByteOrder order, Bytes& out) : order_(order), out_(out) {}
  void u32(std::uint32_t v) {
    order_ == ByteOrder::little_endian ? detail::append_le32(out_, v) : detail::append_be32(out_, v);
  }
  void u16(std::uint16_t v) {
    order_ == ByteOrder::little_endian ? detail::append_le16(out_, v) : detail::append_be16(out_, v);
  }

 private:
  ByteOrder order_;
  Bytes& out_;
};

}  // namespace

CaptureError::CaptureError(CaptureErrc code, const std::string& what, long long record_index)
    : std::runtime_error(describe(code, what, record_index)),
      code_(code),
      record_index_(record_index) {}

PcapRecord make_record(std::int64_t ts_us, Bytes payload) {
  PcapRecord record;
  record.ts_us = ts_us;
  record.captured_len = static_cast<std::uint32_t>(payload.size());
  record.original_len = record.captured_len;
  record.payload = std::move(payload);
  return record;
}

PcapFile read_pcap(ByteView bytes) {
  if (bytes.size() < 4) throw CaptureError(CaptureErrc::bad_magic, "file shorter than magic");

  PcapFile file;
  const std::uint32_t magic_le = detail::load_le32(bytes.data());
  const std::uint32_t magic_be = detail::load_be32(bytes.data());
  if (magic_le == kPcapMagicMicro || magic_le == kPcapMagicNano) {
    file.meta.byte_order = ByteOrder::little_endian;
  } else if (magic_be == kPcapMagicMicro || magic_be == kPcapMagicNano) {
    file.meta.byte_order = ByteOrder::big_endian;
  } else {
    std::ostringstream os;
    os << "unrecognized magic 0x" << std::hex << magic_be;
    throw CaptureError(CaptureErrc::bad_magic, os.str());
  }
  const FieldReader rd(file.meta.byte_order);
  file.meta.timestamp_resolution = rd.u32(bytes.data()) == kPcapMagicNano
                                       ? TimestampResolution::nano
                                       : TimestampResolution::micro;

  if (bytes.size() < kGlobalHeaderLength) {
    throw CaptureError(CaptureErrc::truncated_record, "global header needs 24 bytes");
  }
  const std::uint32_t link = rd.u32(bytes.data() + 20);
  if (link != static_cast<std::uint32_t>(LinkType::ieee80211_radiotap) &&
      link != static_cast<std::uint32_t>(LinkType::ieee80211_plain)) {
    throw CaptureError(CaptureErrc::unsupported_link_type, "link type " + std::to_string(link));
  }
  file.meta.link_type = static_cast<LinkType>(link);

  const bool nano = file.meta.timestamp_resolution == TimestampResolution::nano;
  std::size_t offset = kGlobalHeaderLength;
  long long index = 0;
  while (offset < bytes.size()) {
    if (offset + kRecordHeaderLength > bytes.size()) {
      throw CaptureError(CaptureErrc::truncated_record, "record header cut short", index);
    }
    const std::uint8_t* h = bytes.data() + offset;
    const std::uint32_t sec = rd.u32(h);
    const std::uint32_t frac = rd.u32(h + 4);
    PcapRecord record;
    record.captured_len = rd.u32(h + 8);
    record.original_len = rd.u32(h + 12);
    offset += kRecordHeaderLength;
    if (record.captured_len > kPcapSnaplen || record.captured_len > record.original_len) {
      throw CaptureError(CaptureErrc::truncated_record,
                         "captured length " + std::to_string(record.captured_len) +
                             " inconsistent with original length " +
                             std::to_string(record.original_len),
                         index);
    }
    if (offset + record.captured_len > bytes.size()) {
      throw CaptureError(CaptureErrc::truncated_record,
                         "payload of " + std::to_string(record.captured_len) + " bytes cut short",
                         index);
    }
    if (nano) {
      record.ts_us = static_cast<std::int64_t>(sec) * 1'000'000 + frac / 1000;
      record.ts_extra_ns = frac % 1000;
    } else {
      record.ts_us = static_cast<std::int64_t>(sec) * 1'000'000 + frac;
    }
    record.payload.assign(bytes.begin() + static_cast<std::ptrdiff_t>(offset),
                          bytes.begin() + static_cast<std::ptrdiff_t>(offset + record.captured_len));
    offset += record.captured_len;
    file.records.push_back(std::move(record));
    ++index;
  }
  return file;
}

PcapFile read_pcap(std::istream& in) {
  const Bytes bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw CaptureError(CaptureErrc::io_error, "stream read failed");
  return read_pcap(ByteView(bytes));
}

PcapFile read_pcap_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CaptureError(CaptureErrc::io_error, "cannot open " + path);
  return read_pcap(in);
}

Bytes write_pcap(const CaptureMeta& meta, std::span<const PcapRecord> records) {
  Bytes out;
  FieldWriter wr(meta.byte_order, out);
  const bool nano = meta.timestamp_resolution == TimestampResolution::nano;
  wr.u32(nano ? kPcapMagicNano : kPcapMagicMicro);
  wr.u16(2);
  wr.u16(4);
  wr.u32(0);  // thiszone
  wr.u32(0);  // sigfigs
  wr.u32(kPcapSnaplen);
  wr.u32(static_cast<std::uint32_t>(meta.link_type));

  long long index = 0;
  for (const auto& record : records) {
    if (record.payload.size() > kPcapSnaplen || record.captured_len > kPcapSnaplen) {
      throw CaptureError(CaptureErrc::record_too_long,
                         std::to_string(record.payload.size()) + " bytes exceeds snaplen", index);
    }
    if (record.captured_len != record.payload.size() ||
        record.original_len < record.captured_len) {
      throw CaptureError(CaptureErrc::truncated_record, "record lengths disagree with payload",
                         index);
    }
    if (record.ts_us < 0) {
      throw CaptureError(CaptureErrc::io_error, "negative timestamp", index);
    }
    const auto sec = static_cast<std::uint32_t>(record.ts_us / 1'000'000);
    const auto usec = static_cast<std::uint32_t>(record.ts_us % 1'000'000);
    wr.u32(sec);
    wr.u32(nano ? usec * 1000 + record.ts_extra_ns : usec);
    wr.u32(record.captured_len);
    wr.u32(record.original_len);
    out.insert(out.end(), record.payload.begin(), record.payload.end());
    ++index;
  }
  return out;
}

void write_pcap(std::ostream& out, const CaptureMeta& meta, std::span<const PcapRecord> records) {
  const Bytes bytes = write_pcap(meta, records);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw CaptureError(CaptureErrc::io_error, "stream write failed");
}

Extraction extract_measurements(const CaptureMeta& meta, std::span<const PcapRecord> records,
                                const ExtractOptions& options) {
  Extraction result;
  std::vector<RssMeasurement> found;
  std::vector<std::size_t> origin;
  for (std::size_t i = 0; i < records.size(); ++i) {
    ++result.stats.total;
    ByteView payload(records[i].payload);
    try {
      RadiotapInfo info;
      if (meta.link_type == LinkType::ieee80211_radiotap) {
        info = decode_radiotap(payload);
        payload = payload.subspan(info.header_length);
      }
      if (info.flags_fcs_present) {
        if (payload.size() < 4) throw CodecError(CodecErrc::truncated_frame, "no room for FCS");
        const auto body = payload.first(payload.size() - 4);
        if (options.verify_fcs &&
            frame_check_sequence(body) != detail::load_le32(payload.data() + body.size())) {
          throw CodecError(CodecErrc::invalid_frame, "FCS mismatch");
        }
        payload = body;
      }
      const BeaconFrame frame = decode_beacon(payload);
      ++result.stats.beacons;
      if (!info.antenna_signal_dbm) {
        ++result.stats.missing_signal;
        continue;
      }
      found.push_back(to_measurement(frame, info, records[i].ts_us));
      origin.push_back(i);
    } catch (const CodecError& e) {
      if (e.code() == CodecErrc::not_a_beacon) {
        ++result.stats.skipped_non_beacon;
      } else {
        ++result.stats.errors;
      }
    }
  }

  std::vector<std::size_t> order(found.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return found[a].capture_time_us < found[b].capture_time_us;
  });
  result.measurements.reserve(found.size());
  result.source_records.reserve(found.size());
  for (std::size_t k : order) {
    result.measurements.push_back(std::move(found[k]));
    result.source_records.push_back(origin[k]);
  }
  return result;
}

std::vector<ApSeries> demux_by_ap(std::span<const RssMeasurement> measurements,
                                  double session_duration_s, std::int64_t session_start_us) {
  std::vector<ApSeries> series;
  std::map<MacAddress, std::size_t> slot;
  for (const auto& m : measurements) {
    auto [it, inserted] = slot.try_emplace(m.bssid, series.size());
    if (inserted) {
      ApSeries s;
      s.bssid = m.bssid;
      s.session_duration_s = session_duration_s;
      s.session_start_us = session_start_us;
      series.push_back(std::move(s));
    }
    ApSeries& s = series[it->second];
    s.ssid = m.ssid;
    s.measurements.push_back(m);
  }
  return series;
}

std::vector<std::size_t> select_card_filtered(std::span<const RssMeasurement> measurements,
                                              const CardFilter& filter) {
  if (filter.report_interval_tu < 100) {
    throw std::invalid_argument("report interval below 100 TU");
  }
  const std::int64_t window_us = static_cast<std::int64_t>(filter.report_interval_tu) * 1024;
  std::optional<std::int64_t> last_window;
  if (filter.session_duration_us) {
    const std::int64_t complete = *filter.session_duration_us / window_us;
    last_window = complete - 1;
  }

  std::map<MacAddress, std::int64_t> reported_window;
  std::vector<std::size_t> kept;
  for (std::size_t i = 0; i < measurements.size(); ++i) {
    const auto& m = measurements[i];
    if (filter.ssid && m.ssid != *filter.ssid) continue;
    if (filter.channel && m.channel != filter.channel) continue;
    const std::int64_t rel = m.capture_time_us - filter.window_origin_us;
    // floor division so samples before the origin fall in negative windows
    const std::int64_t window = rel >= 0 ? rel / window_us : -((-rel + window_us - 1) / window_us);
    if (last_window && (window < 0 || window > *last_window)) continue;
    auto [it, inserted] = reported_window.try_emplace(m.bssid, window);
    if (!inserted) {
      if (window <= it->second) continue;
      it->second = window;
    }
    kept.push_back(i);
  }
  return kept;
}

std::vector<RssMeasurement> apply_card_filters(std::span<const RssMeasurement> measurements,
                                               const CardFilter& filter) {
  std::vector<RssMeasurement> out;
  for (std::size_t i : select_card_filtered(measurements, filter)) out.push_back(measurements[i]);
  return out;
}

}  // namespace fastrss
