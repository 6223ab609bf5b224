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
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "fastrss/frame_codec.hpp"

namespace fastrss {

enum class CaptureErrc {
  bad_magic,
  unsupported_link_type,
  truncated_record,
  record_too_long,
  io_error,
};

std::string_view to_string(CaptureErrc code) noexcept;

class CaptureError : public std::runtime_error {
 public:
  /// record_index is -1 for errors in the global header.
  CaptureError(CaptureErrc code, const std::string& what, long long record_index = -1);
  CaptureErrc code() const noexcept { return code_; }
  long long record_index() const noexcept { return record_index_; }

 private:
  CaptureErrc code_;
  long long record_index_;
};

enum class LinkType : std::uint32_t {
  ieee80211_plain = 105,
  ieee80211_radiotap = 127,
};

enum class TimestampResolution { micro, nano };

/// Byte order of the file, as signalled by how the magic number reads.
enum class ByteOrder { little_endian, big_endian };

inline constexpr std::uint32_t kPcapMagicMicro = 0xa1b2c3d4;
inline constexpr std::uint32_t kPcapMagicNano = 0xa1b23c4d;
inline constexpr std::uint32_t kPcapSnaplen = 65535;

struct CaptureMeta {
  LinkType link_type = LinkType::ieee80211_radiotap;
  TimestampResolution timestamp_resolution = TimestampResolution::micro;
  ByteOrder byte_order = ByteOrder::little_endian;

  friend bool operator==(const CaptureMeta&, const CaptureMeta&) = default;
};

struct PcapRecord {
  std::int64_t ts_us = 0;
  /// Sub-microsecond remainder (0..999) kept for nanosecond captures.
  std::uint32_t ts_extra_ns = 0;
  std::uint32_t captured_len = 0;
  std::uint32_t original_len = 0;
  Bytes payload;

  friend bool operator==(const PcapRecord&, const PcapRecord&) = default;
};

/// A record whose captured and original lengths equal the payload size.
PcapRecord make_record(std::int64_t ts_us, Bytes payload);

struct PcapFile {
  CaptureMeta meta;
  std::vector<PcapRecord> records;
};

PcapFile read_pcap(ByteView bytes);
PcapFile read_pcap(std::istream& in);
PcapFile read_pcap_file(const std::string& path);

Bytes write_pcap(const CaptureMeta& meta, std::span<const PcapRecord> records);
void write_pcap(std::ostream& out, const CaptureMeta& meta, std::span<const PcapRecord> records);

struct DecodeStats {
  std::size_t total = 0;
  std::size_t beacons = 0;
  std::size_t skipped_non_beacon = 0;
  std::size_t errors = 0;
  /// Beacons decoded without an antenna-signal field; included in beacons.
  std::size_t missing_signal = 0;

  friend bool operator==(const DecodeStats&, const DecodeStats&) = default;
};

struct ExtractOptions {
  bool verify_fcs = false;
};

struct Extraction {
  std::vector<RssMeasurement> measurements;
  DecodeStats stats;
  /// source_records[i] is the record index measurements[i] came from.
  std::vector<std::size_t> source_records;
};

/// Decodes every record. Per-record failures land in the stats and never
/// abort the run. Output is stably sorted by capture time.
Extraction extract_measurements(const CaptureMeta& meta, std::span<const PcapRecord> records,
                                const ExtractOptions& options = {});

struct ApSeries {
  MacAddress bssid;
  std::string ssid;
  std::vector<RssMeasurement> measurements;
  double session_duration_s = 0.0;
  std::int64_t session_start_us = 0;
};

/// Groups by bssid in order of first appearance. The series SSID is the one
/// carried by the most recent beacon.
std::vector<ApSeries> demux_by_ap(std::span<const RssMeasurement> measurements,
                                  double session_duration_s, std::int64_t session_start_us = 0);

/// Normal-mode card emulation over a monitor-mode stream.
struct CardFilter {
  std::optional<std::string> ssid;
  std::optional<int> channel;
  std::uint32_t report_interval_tu = 1000;
  /// Reporting windows tile time from this origin.
  std::int64_t window_origin_us = 0;
  /// When set, a window that would close after origin + duration never
  /// reports, so a capture of length D yields at most floor(D / interval)
  /// samples per AP.
  std::optional<std::int64_t> session_duration_us;
};

/// Indices of the measurements that survive the filter. Thinning keeps the
/// first sample of each AP in each report window.
std::vector<std::size_t> select_card_filtered(std::span<const RssMeasurement> measurements,
                                              const CardFilter& filter);

std::vector<RssMeasurement> apply_card_filters(std::span<const RssMeasurement> measurements,
                                               const CardFilter& filter);

}  // namespace fastrss
