#include "p2pbeam/wire.hpp"

#include <bit>
#include <cmath>
#include <string>

#include "p2pbeam/errors.hpp"

namespace p2pbeam {

namespace {

void put_u32(std::byte* out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xffu);
}

void put_u64(std::byte* out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out[i] = static_cast<std::byte>((v >> (8 * i)) & 0xffu);
}

std::uint32_t get_u32(const std::byte* in) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(const std::byte* in) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(in[i]) << (8 * i);
  return v;
}

void put_f32(std::byte* out, double v) { put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v))); }

float get_f32(const std::byte* in) { return std::bit_cast<float>(get_u32(in)); }

}  // namespace

ImuDatagram encode(const ImuSample& s) {
  ImuDatagram out{};
  put_u32(out.data() + 0, s.client_id);
  put_u32(out.data() + 4, s.seq);
  put_u64(out.data() + 8, std::bit_cast<std::uint64_t>(s.timestamp_s));
  for (int i = 0; i < 3; ++i) put_f32(out.data() + 16 + 4 * i, s.accel_mps2[i]);
  for (int i = 0; i < 3; ++i) put_f32(out.data() + 28 + 4 * i, s.gyro_radps[i]);
  return out;
}

ImuSample decode(std::span<const std::byte> bytes) {
  if (bytes.size() != kImuDatagramSize)
    throw DecodeError("IMU datagram must be 40 bytes, got " + std::to_string(bytes.size()));
  ImuSample s;
  s.client_id = get_u32(bytes.data());
  s.seq = get_u32(bytes.data() + 4);
  s.timestamp_s = std::bit_cast<double>(get_u64(bytes.data() + 8));
  for (int i = 0; i < 3; ++i) s.accel_mps2[i] = get_f32(bytes.data() + 16 + 4 * i);
  for (int i = 0; i < 3; ++i) s.gyro_radps[i] = get_f32(bytes.data() + 28 + 4 * i);
  if (!std::isfinite(s.timestamp_s) || !s.accel_mps2.allFinite() || !s.gyro_radps.allFinite())
    throw DecodeError("IMU datagram carries non-finite values");
  return s;
}

ImuSample quantize(const ImuSample& sample) {
  const ImuDatagram d = encode(sample);
  return decode(d);
}

SectorCommandDatagram encode(const SectorCommand& cmd) {
  SectorCommandDatagram out{};
  put_u32(out.data() + 0, cmd.client_id);
  put_u32(out.data() + 4, cmd.frame);
  put_u32(out.data() + 8, std::bit_cast<std::uint32_t>(cmd.bearing_deg));
  put_u32(out.data() + 12, cmd.sector);
  return out;
}

SectorCommand decode_sector_command(std::span<const std::byte> bytes) {
  if (bytes.size() != kSectorCommandSize)
    throw DecodeError("sector command must be 16 bytes, got " + std::to_string(bytes.size()));
  SectorCommand c;
  c.client_id = get_u32(bytes.data());
  c.frame = get_u32(bytes.data() + 4);
  c.bearing_deg = std::bit_cast<float>(get_u32(bytes.data() + 8));
  c.sector = get_u32(bytes.data() + 12);
  if (!std::isfinite(c.bearing_deg)) throw DecodeError("sector command carries a non-finite bearing");
  return c;
}

}  // namespace p2pbeam
