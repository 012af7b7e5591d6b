#include "p2pbeam/capture.hpp"

#include <bit>
#include <cstring>

#include "p2pbeam/errors.hpp"
#include "p2pbeam/wire.hpp"

namespace p2pbeam {

namespace {

void append_u32(std::vector<std::byte>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
}

void append_u64(std::vector<std::byte>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((v >> (8 * i)) & 0xffu));
}

void append_f64(std::vector<std::byte>& out, double v) { append_u64(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  Reader(const std::vector<std::byte>& buf, std::size_t pos, std::size_t end) : buf_(buf), pos_(pos), end_(end) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(buf_[pos_ + i]) << (8 * i);
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t remaining() const { return end_ - pos_; }

 private:
  void need(std::size_t n) const {
    if (pos_ + n > end_) throw DecodeError("capture record truncated");
  }
  const std::vector<std::byte>& buf_;
  std::size_t pos_;
  std::size_t end_;
};

}  // namespace

CaptureWriter::CaptureWriter(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw Error("cannot open capture file " + path.string());
}

void CaptureWriter::write_record(CaptureTag tag, const std::vector<std::byte>& body) {
  std::vector<std::byte> head;
  append_u32(head, static_cast<std::uint32_t>(body.size() + 1));
  head.push_back(static_cast<std::byte>(tag));
  out_.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
  out_.write(reinterpret_cast<const char*>(body.data()), static_cast<std::streamsize>(body.size()));
}

void CaptureWriter::write_config(const std::string& config_json) {
  std::vector<std::byte> body(config_json.size());
  std::memcpy(body.data(), config_json.data(), config_json.size());
  write_record(CaptureTag::kConfig, body);
}

void CaptureWriter::write_radar(const PointCloudFrame& frame, std::uint32_t instant) {
  std::vector<std::byte> body;
  body.reserve(24 + frame.points.size() * 32);
  append_u64(body, static_cast<std::uint64_t>(frame.frame_index));
  append_f64(body, frame.timestamp_s);
  append_u32(body, instant);
  append_u32(body, static_cast<std::uint32_t>(frame.points.size()));
  for (const auto& p : frame.points) {
    append_f64(body, p.x);
    append_f64(body, p.y);
    append_f64(body, p.z);
    append_f64(body, p.doppler_mps);
  }
  write_record(CaptureTag::kRadar, body);
}

void CaptureWriter::write_imu(const ImuSample& sample) {
  const auto d = encode(sample);
  write_record(CaptureTag::kImu, std::vector<std::byte>(d.begin(), d.end()));
}

Capture read_capture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open capture file " + path.string());
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<std::byte> buf(raw.size());
  std::memcpy(buf.data(), raw.data(), raw.size());

  Capture cap;
  std::size_t pos = 0;
  while (pos < buf.size()) {
    Reader len_reader(buf, pos, buf.size());
    const std::uint32_t len = len_reader.u32();
    pos += 4;
    if (len == 0 || pos + len > buf.size()) throw DecodeError("capture record truncated");
    const auto tag = static_cast<CaptureTag>(buf[pos]);
    const std::size_t body = pos + 1;
    const std::size_t end = pos + len;
    switch (tag) {
      case CaptureTag::kConfig:
        cap.config_json.assign(reinterpret_cast<const char*>(buf.data() + body), end - body);
        break;
      case CaptureTag::kRadar: {
        Reader r(buf, body, end);
        PointCloudFrame f;
        f.frame_index = static_cast<std::int64_t>(r.u64());
        f.timestamp_s = r.f64();
        const std::uint32_t instant = r.u32();
        const std::uint32_t n = r.u32();
        if (r.remaining() != static_cast<std::size_t>(n) * 32) throw DecodeError("capture radar record size mismatch");
        f.points.resize(n);
        for (auto& p : f.points) {
          p.x = r.f64();
          p.y = r.f64();
          p.z = r.f64();
          p.doppler_mps = r.f64();
        }
        auto& w = cap.radar[f.frame_index];
        if (instant != w.size()) throw DecodeError("capture radar instants out of order");
        w.push_back(std::move(f));
        break;
      }
      case CaptureTag::kImu:
        cap.imu.push_back(decode(std::span<const std::byte>(buf.data() + body, end - body)));
        break;
      default:
        throw DecodeError("unknown capture record tag");
    }
    pos = end;
  }
  return cap;
}

std::vector<PointCloudFrame> CaptureRadarSource::window(std::int64_t frame_index) {
  auto it = capture_.radar.find(frame_index);
  if (it == capture_.radar.end()) throw RangeError("capture has no radar window for frame " + std::to_string(frame_index));
  return it->second;
}

CaptureImuSource::CaptureImuSource(const Capture& capture) {
  for (const auto& s : capture.imu) push(s);
}

}  // namespace p2pbeam
