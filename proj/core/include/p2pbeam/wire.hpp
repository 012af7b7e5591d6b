#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>

#include "p2pbeam/types.hpp"

namespace p2pbeam {

// 40-byte little-endian IMU datagram:
//   0 u32 client_id | 4 u32 seq | 8 f64 timestamp_s | 16 f32 ax ay az | 28 f32 gx gy gz
constexpr std::size_t kImuDatagramSize = 40;
using ImuDatagram = std::array<std::byte, kImuDatagramSize>;

ImuDatagram encode(const ImuSample& sample);
// Throws DecodeError on a wrong length or non-finite fields.
ImuSample decode(std::span<const std::byte> bytes);

// Round-trips a sample through the wire image (float32 quantisation).
ImuSample quantize(const ImuSample& sample);

// 16-byte little-endian beam feedback sent back to a client:
//   0 u32 client_id | 4 u32 frame | 8 f32 bearing_deg | 12 u32 sector
constexpr std::size_t kSectorCommandSize = 16;
using SectorCommandDatagram = std::array<std::byte, kSectorCommandSize>;

struct SectorCommand {
  ClientId client_id = 0;
  std::uint32_t frame = 0;
  float bearing_deg = 0.0f;
  std::uint32_t sector = 0;

  friend bool operator==(const SectorCommand&, const SectorCommand&) = default;
};

SectorCommandDatagram encode(const SectorCommand& cmd);
SectorCommand decode_sector_command(std::span<const std::byte> bytes);

}  // namespace p2pbeam
