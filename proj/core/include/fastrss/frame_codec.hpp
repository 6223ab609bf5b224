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

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace fastrss {

using Bytes = std::vector<std::uint8_t>;
using ByteView = std::span<const std::uint8_t>;

/// Error conditions raised by the radiotap / 802.11 codec.
enum class CodecErrc {
  truncated_header,
  unsupported_version,
  not_a_beacon,
  malformed_element,
  truncated_frame,
  invalid_frame,
  missing_signal,
};

std::string_view to_string(CodecErrc code) noexcept;

class CodecError : public std::runtime_error {
 public:
  CodecError(CodecErrc code, const std::string& what);
  CodecErrc code() const noexcept { return code_; }

 private:
  CodecErrc code_;
};

struct MacAddress {
  std::array<std::uint8_t, 6> octets{};

  static MacAddress broadcast() noexcept;
  /// Parses "aa:bb:cc:dd:ee:ff" (case-insensitive, ':' or '-' separators).
  static std::optional<MacAddress> parse(std::string_view text);
  std::string to_string() const;

  friend auto operator<=>(const MacAddress&, const MacAddress&) = default;
};

// Radiotap present-bitmask bits of the default namespace that we touch.
inline constexpr unsigned kRadiotapTsft = 0;
inline constexpr unsigned kRadiotapFlags = 1;
inline constexpr unsigned kRadiotapRate = 2;
inline constexpr unsigned kRadiotapChannel = 3;
inline constexpr unsigned kRadiotapFhss = 4;
inline constexpr unsigned kRadiotapDbmAntSignal = 5;
inline constexpr unsigned kRadiotapExtBit = 31;

inline constexpr std::uint8_t kRadiotapFlagFcsAtEnd = 0x10;
inline constexpr std::uint16_t kChannelFlag2Ghz = 0x0080;

inline constexpr int kMinRssiDbm = -120;
inline constexpr int kMaxRssiDbm = 0;
inline constexpr std::size_t kMaxSsidLength = 32;

struct RadiotapInfo {
  std::size_t header_length = 8;
  std::optional<int> antenna_signal_dbm;
  std::optional<std::uint16_t> channel_mhz;
  std::uint16_t channel_flags = kChannelFlag2Ghz;  // only meaningful with channel_mhz
  bool flags_fcs_present = false;

  friend bool operator==(const RadiotapInfo&, const RadiotapInfo&) = default;
};

enum class FrameType : std::uint8_t {
  management = 0,
  control = 1,
  data = 2,
  extension = 3,
};

inline constexpr std::uint8_t kBeaconSubtype = 8;

struct MacHeader {
  FrameType frame_type = FrameType::management;
  std::uint8_t frame_subtype = kBeaconSubtype;
  MacAddress destination = MacAddress::broadcast();
  MacAddress source;
  MacAddress bssid;
  std::uint16_t sequence_number = 0;  // 12 bits

  bool is_beacon() const noexcept {
    return frame_type == FrameType::management && frame_subtype == kBeaconSubtype;
  }

  friend bool operator==(const MacHeader&, const MacHeader&) = default;
};

struct InformationElement {
  std::uint8_t id = 0;
  Bytes data;

  friend bool operator==(const InformationElement&, const InformationElement&) = default;
};

inline constexpr std::uint8_t kSsidElementId = 0;

struct BeaconBody {
  std::uint64_t ap_timestamp = 0;        // TSF, microseconds
  std::uint16_t beacon_interval_tu = 100;
  std::uint16_t capability = 0;
  std::string ssid;
  std::vector<InformationElement> extra_elements;

  friend bool operator==(const BeaconBody&, const BeaconBody&) = default;
};

struct BeaconFrame {
  MacHeader mac;
  BeaconBody body;

  friend bool operator==(const BeaconFrame&, const BeaconFrame&) = default;
};

struct RssMeasurement {
  std::int64_t capture_time_us = 0;
  MacAddress bssid;
  std::string ssid;
  int rssi_dbm = 0;
  std::optional<int> channel;  // 1..11 when the frequency is in band

  friend bool operator==(const RssMeasurement&, const RssMeasurement&) = default;
};

/// 2.4 GHz channel map, channels 1..11 only: 2407 + 5 * n MHz.
std::optional<int> channel_from_mhz(std::uint16_t mhz) noexcept;
std::optional<std::uint16_t> mhz_from_channel(int channel) noexcept;

/// Parses a version-0 little-endian radiotap header. Signal values outside
/// [-120, 0] dBm are treated as absent.
RadiotapInfo decode_radiotap(ByteView bytes);

/// Parses an 802.11 beacon starting at the MAC header. A trailing FCS must
/// already have been removed.
BeaconFrame decode_beacon(ByteView bytes);

/// Serializes radiotap + beacon. When info.flags_fcs_present is set, a valid
/// CRC-32 FCS is appended.
Bytes encode_beacon(const BeaconFrame& frame, const RadiotapInfo& info);

/// Serializes only the radiotap header for info.
Bytes encode_radiotap(const RadiotapInfo& info);

/// Bytes of a beacon MAC frame without radiotap or FCS.
Bytes encode_mac_frame(const BeaconFrame& frame);

/// Checks every BeaconFrame invariant; throws CodecError(invalid_frame).
void validate_beacon(const BeaconFrame& frame);

/// CRC-32 frame check sequence over the MAC frame.
std::uint32_t frame_check_sequence(ByteView mac_frame) noexcept;

RssMeasurement to_measurement(const BeaconFrame& frame, const RadiotapInfo& info,
                              std::int64_t capture_time_us);

}  // namespace fastrss
