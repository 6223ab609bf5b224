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

#include "fastrss/frame_codec.hpp"

#include <zlib.h>

#include <cctype>
#include <cstdio>

#include "byte_io.hpp"

namespace fastrss {

std::string_view to_string(CodecErrc code) noexcept {
  switch (code) {
    case CodecErrc::truncated_header: return "TruncatedHeader";
    case CodecErrc::unsupported_version: return "UnsupportedVersion";
    case CodecErrc::not_a_beacon: return "NotABeacon";
    case CodecErrc::malformed_element: return "MalformedElement";
    case CodecErrc::truncated_frame: return "TruncatedFrame";
    case CodecErrc::invalid_frame: return "InvalidFrame";
    case CodecErrc::missing_signal: return "MissingSignal";
  }
  return "Unknown";
}

CodecError::CodecError(CodecErrc code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

MacAddress MacAddress::broadcast() noexcept {
  MacAddress mac;
  mac.octets.fill(0xff);
  return mac;
}

std::optional<MacAddress> MacAddress::parse(std::string_view text) {
  if (text.size() != 17) return std::nullopt;
  MacAddress mac;
  auto hex = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    return -1;
  };
  for (std::size_t i = 0; i < 6; ++i) {
    const std::size_t pos = i * 3;
    const int hi = hex(text[pos]);
    const int lo = hex(text[pos + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    if (i < 5 && text[pos + 2] != ':' && text[pos + 2] != '-') return std::nullopt;
    mac.octets[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return mac;
}

std::string MacAddress::to_string() const {
  char buf[18];
  std::snprintf(buf, sizeof buf, "%02x:%02x:%02x:%02x:%02x:%02x", octets[0], octets[1],
                octets[2], octets[3], octets[4], octets[5]);
  return buf;
}

std::optional<int> channel_from_mhz(std::uint16_t mhz) noexcept {
  if (mhz < 2412 || mhz > 2462 || (mhz - 2407) % 5 != 0) return std::nullopt;
  return (mhz - 2407) / 5;
}

std::optional<std::uint16_t> mhz_from_channel(int channel) noexcept {
  if (channel < 1 || channel > 11) return std::nullopt;
  return static_cast<std::uint16_t>(2407 + 5 * channel);
}

namespace {

struct FieldLayout {
  std::size_t align;
  std::size_t size;
};

// Default-namespace fields up to and including dBm antenna signal.
constexpr FieldLayout kRadiotapLayout[] = {
    {8, 8},  // TSFT
    {1, 1},  // Flags
    {1, 1},  // Rate
    {2, 4},  // Channel: frequency + flags
    {1, 2},  // FHSS
    {1, 1},  // dBm antenna signal
};

constexpr std::size_t align_up(std::size_t offset, std::size_t align) {
  return (offset + align - 1) / align * align;
}

constexpr std::size_t kMacHeaderLength = 24;
constexpr std::size_t kFixedFieldsLength = 12;

}  // namespace

RadiotapInfo decode_radiotap(ByteView bytes) {
  if (bytes.size() < 8) {
    throw CodecError(CodecErrc::truncated_header, "radiotap preamble needs 8 bytes");
  }
  if (bytes[0] != 0) {
    throw CodecError(CodecErrc::unsupported_version,
                     "radiotap version " + std::to_string(bytes[0]));
  }
  const std::size_t length = detail::load_le16(bytes.data() + 2);
  if (length < 8 || length > bytes.size()) {
    throw CodecError(CodecErrc::truncated_header,
                     "declared length " + std::to_string(length) + " with " +
                         std::to_string(bytes.size()) + " bytes available");
  }
  const auto header = bytes.first(length);

  const std::uint32_t present = detail::load_le32(header.data() + 4);
  std::size_t offset = 8;
  for (std::uint32_t word = present; word & (1u << kRadiotapExtBit);) {
    if (offset + 4 > header.size()) {
      throw CodecError(CodecErrc::truncated_header, "extended presence bitmap overruns header");
    }
    word = detail::load_le32(header.data() + offset);
    offset += 4;
  }

  RadiotapInfo info;
  info.header_length = length;
  for (unsigned bit = 0; bit <= kRadiotapDbmAntSignal; ++bit) {
    if (!(present & (1u << bit))) continue;
    const auto [align, size] = kRadiotapLayout[bit];
    offset = align_up(offset, align);
    if (offset + size > header.size()) {
      throw CodecError(CodecErrc::truncated_header, "radiotap field overruns header");
    }
    const std::uint8_t* field = header.data() + offset;
    switch (bit) {
      case kRadiotapFlags:
        info.flags_fcs_present = (field[0] & kRadiotapFlagFcsAtEnd) != 0;
        break;
      case kRadiotapChannel:
        info.channel_mhz = detail::load_le16(field);
        info.channel_flags = detail::load_le16(field + 2);
        break;
      case kRadiotapDbmAntSignal: {
        const int dbm = static_cast<std::int8_t>(field[0]);
        if (dbm >= kMinRssiDbm && dbm <= kMaxRssiDbm) info.antenna_signal_dbm = dbm;
        break;
      }
      default:
        break;
    }
    offset += size;
  }
  return info;
}

BeaconFrame decode_beacon(ByteView bytes) {
  if (bytes.size() < 2) {
    throw CodecError(CodecErrc::truncated_frame, "frame control needs 2 bytes");
  }
  const std::uint16_t fc = detail::load_le16(bytes.data());
  BeaconFrame frame;
  frame.mac.frame_type = static_cast<FrameType>((fc >> 2) & 0x3);
  frame.mac.frame_subtype = static_cast<std::uint8_t>((fc >> 4) & 0xf);
  if (!frame.mac.is_beacon()) {
    throw CodecError(CodecErrc::not_a_beacon,
                     "type " + std::to_string(static_cast<int>(frame.mac.frame_type)) +
                         " subtype " + std::to_string(frame.mac.frame_subtype));
  }
  if (bytes.size() < kMacHeaderLength + kFixedFieldsLength) {
    throw CodecError(CodecErrc::truncated_frame,
                     "beacon needs 36 bytes, got " + std::to_string(bytes.size()));
  }
  const std::uint8_t* p = bytes.data();
  frame.mac.destination = detail::load_mac(p + 4);
  frame.mac.source = detail::load_mac(p + 10);
  frame.mac.bssid = detail::load_mac(p + 16);
  frame.mac.sequence_number = static_cast<std::uint16_t>(detail::load_le16(p + 22) >> 4);

  frame.body.ap_timestamp = detail::load_le64(p + 24);
  frame.body.beacon_interval_tu = detail::load_le16(p + 32);
  frame.body.capability = detail::load_le16(p + 34);
  if (frame.body.beacon_interval_tu == 0) {
    throw CodecError(CodecErrc::invalid_frame, "beacon interval of 0 TU");
  }

  bool have_ssid = false;
  std::size_t offset = kMacHeaderLength + kFixedFieldsLength;
  while (offset < bytes.size()) {
    if (offset + 2 > bytes.size()) {
      throw CodecError(CodecErrc::malformed_element, "element header overruns frame");
    }
    const std::uint8_t id = bytes[offset];
    const std::size_t len = bytes[offset + 1];
    offset += 2;
    if (offset + len > bytes.size()) {
      throw CodecError(CodecErrc::malformed_element,
                       "element " + std::to_string(id) + " length " + std::to_string(len) +
                           " overruns frame");
    }
    const auto data = bytes.subspan(offset, len);
    offset += len;
    if (id == kSsidElementId && !have_ssid) {
      if (len > kMaxSsidLength) {
        throw CodecError(CodecErrc::malformed_element,
                         "SSID length " + std::to_string(len) + " exceeds 32");
      }
      frame.body.ssid.assign(data.begin(), data.end());
      have_ssid = true;
    } else {
      frame.body.extra_elements.push_back({id, Bytes(data.begin(), data.end())});
    }
  }
  return frame;
}

void validate_beacon(const BeaconFrame& frame) {
  if (!frame.mac.is_beacon()) {
    throw CodecError(CodecErrc::invalid_frame, "frame is not management/subtype 8");
  }
  if (frame.mac.bssid != frame.mac.source) {
    throw CodecError(CodecErrc::invalid_frame, "beacon bssid differs from source address");
  }
  if (frame.mac.sequence_number > 0x0fff) {
    throw CodecError(CodecErrc::invalid_frame, "sequence number exceeds 12 bits");
  }
  if (frame.body.ssid.size() > kMaxSsidLength) {
    throw CodecError(CodecErrc::invalid_frame,
                     "SSID of " + std::to_string(frame.body.ssid.size()) + " bytes");
  }
  if (frame.body.beacon_interval_tu == 0) {
    throw CodecError(CodecErrc::invalid_frame, "beacon interval of 0 TU");
  }
  for (const auto& element : frame.body.extra_elements) {
    if (element.data.size() > 255) {
      throw CodecError(CodecErrc::invalid_frame,
                       "element " + std::to_string(element.id) + " longer than 255 bytes");
    }
  }
}

Bytes encode_radiotap(const RadiotapInfo& info) {
  if (info.antenna_signal_dbm &&
      (*info.antenna_signal_dbm < kMinRssiDbm || *info.antenna_signal_dbm > kMaxRssiDbm)) {
    throw CodecError(CodecErrc::invalid_frame,
                     "antenna signal " + std::to_string(*info.antenna_signal_dbm) + " dBm");
  }
  std::uint32_t present = 0;
  Bytes out(8, 0);
  if (info.flags_fcs_present) {
    present |= 1u << kRadiotapFlags;
    out.push_back(kRadiotapFlagFcsAtEnd);
  }
  if (info.channel_mhz) {
    present |= 1u << kRadiotapChannel;
    out.resize(align_up(out.size(), 2), 0);
    detail::append_le16(out, *info.channel_mhz);
    detail::append_le16(out, info.channel_flags);
  }
  if (info.antenna_signal_dbm) {
    present |= 1u << kRadiotapDbmAntSignal;
    out.push_back(static_cast<std::uint8_t>(static_cast<std::int8_t>(*info.antenna_signal_dbm)));
  }
  detail::store_le16(out.data() + 2, static_cast<std::uint16_t>(out.size()));
  detail::store_le32(out.data() + 4, present);
  return out;
}

Bytes encode_mac_frame(const BeaconFrame& frame) {
  validate_beacon(frame);
  Bytes out;
  out.reserve(kMacHeaderLength + kFixedFieldsLength + 2 + frame.body.ssid.size());
  const auto fc = static_cast<std::uint16_t>(static_cast<unsigned>(frame.mac.frame_type) << 2 |
                                             static_cast<unsigned>(frame.mac.frame_subtype) << 4);
  detail::append_le16(out, fc);
  detail::append_le16(out, 0);  // duration
  detail::append_mac(out, frame.mac.destination);
  detail::append_mac(out, frame.mac.source);
  detail::append_mac(out, frame.mac.bssid);
  detail::append_le16(out, static_cast<std::uint16_t>(frame.mac.sequence_number << 4));
  detail::append_le64(out, frame.body.ap_timestamp);
  detail::append_le16(out, frame.body.beacon_interval_tu);
  detail::append_le16(out, frame.body.capability);
  out.push_back(kSsidElementId);
  out.push_back(static_cast<std::uint8_t>(frame.body.ssid.size()));
  out.insert(out.end(), frame.body.ssid.begin(), frame.body.ssid.end());
  for (const auto& element : frame.body.extra_elements) {
    out.push_back(element.id);
    out.push_back(static_cast<std::uint8_t>(element.data.size()));
    out.insert(out.end(), element.data.begin(), element.data.end());
  }
  return out;
}

std::uint32_t frame_check_sequence(ByteView mac_frame) noexcept {
  return static_cast<std::uint32_t>(
      ::crc32(0L, mac_frame.data(), static_cast<uInt>(mac_frame.size())));
}

Bytes encode_beacon(const BeaconFrame& frame, const RadiotapInfo& info) {
  Bytes out = encode_radiotap(info);
  const Bytes mac = encode_mac_frame(frame);
  out.insert(out.end(), mac.begin(), mac.end());
  if (info.flags_fcs_present) detail::append_le32(out, frame_check_sequence(mac));
  return out;
}

RssMeasurement to_measurement(const BeaconFrame& frame, const RadiotapInfo& info,
                              std::int64_t capture_time_us) {
  if (!frame.mac.is_beacon()) {
    throw CodecError(CodecErrc::not_a_beacon, "measurements come from beacon frames only");
  }
  if (!info.antenna_signal_dbm) {
    throw CodecError(CodecErrc::missing_signal, "radiotap header carries no antenna signal");
  }
  RssMeasurement m;
  m.capture_time_us = capture_time_us;
  m.bssid = frame.mac.bssid;
  m.ssid = frame.body.ssid;
  m.rssi_dbm = *info.antenna_signal_dbm;
  if (info.channel_mhz) m.channel = channel_from_mhz(*info.channel_mhz);
  return m;
}

}  // namespace fastrss
