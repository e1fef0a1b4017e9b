#include "arc/protocol.hpp"

#include <bit>
#include <cstring>

namespace arc::net {

void put_u16(std::vector<uint8_t>& out, uint16_t v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_u32(std::vector<uint8_t>& out, uint32_t v) {
    out.push_back(static_cast<uint8_t>(v >> 24));
    out.push_back(static_cast<uint8_t>(v >> 16));
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v));
}

void put_f32(std::vector<uint8_t>& out, float v) { put_u32(out, std::bit_cast<uint32_t>(v)); }

uint8_t ByteReader::u8() {
    if (remaining() < 1) throw ProtocolError("payload truncated");
    return bytes_[pos_++];
}

uint16_t ByteReader::u16() {
    if (remaining() < 2) throw ProtocolError("payload truncated");
    const uint16_t v = static_cast<uint16_t>(bytes_[pos_] << 8) | bytes_[pos_ + 1];
    pos_ += 2;
    return v;
}

uint32_t ByteReader::u32() {
    if (remaining() < 4) throw ProtocolError("payload truncated");
    const uint32_t v = (static_cast<uint32_t>(bytes_[pos_]) << 24) |
                       (static_cast<uint32_t>(bytes_[pos_ + 1]) << 16) |
                       (static_cast<uint32_t>(bytes_[pos_ + 2]) << 8) | bytes_[pos_ + 3];
    pos_ += 4;
    return v;
}

float ByteReader::f32() { return std::bit_cast<float>(u32()); }

std::span<const uint8_t> ByteReader::take(size_t n) {
    if (remaining() < n) throw ProtocolError("payload truncated");
    const auto out = bytes_.subspan(pos_, n);
    pos_ += n;
    return out;
}

void ByteReader::expect_end() const {
    if (remaining() != 0) throw ProtocolError("payload has trailing bytes");
}

std::vector<uint8_t> encode_frame(uint8_t type, std::span<const uint8_t> payload) {
    if (payload.size() > kMaxPayload) throw ProtocolError("payload exceeds 16 MiB cap");
    const uint32_t len = static_cast<uint32_t>(payload.size());
    std::vector<uint8_t> out(kHeaderSize + payload.size());
    std::memcpy(out.data(), kMagic, 4);
    out[4] = type;
    out[5] = static_cast<uint8_t>(len >> 24);
    out[6] = static_cast<uint8_t>(len >> 16);
    out[7] = static_cast<uint8_t>(len >> 8);
    out[8] = static_cast<uint8_t>(len);
    if (!payload.empty()) std::memcpy(out.data() + kHeaderSize, payload.data(), payload.size());
    return out;
}

Frame decode_frame(std::span<const uint8_t> bytes) {
    if (bytes.size() < kHeaderSize) throw ProtocolError("frame shorter than header");
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw ProtocolError("bad magic");
    ByteReader r(bytes.subspan(4));
    Frame f;
    f.type = r.u8();
    const uint32_t len = r.u32();
    if (len > kMaxPayload) throw ProtocolError("payload exceeds 16 MiB cap");
    if (r.remaining() != len) throw ProtocolError("frame length mismatch");
    const auto body = r.take(len);
    f.payload.assign(body.begin(), body.end());
    return f;
}

std::vector<uint8_t> encode_image_payload(const GrayImage& img) {
    if (img.width <= 0 || img.height <= 0 || img.width > 0xFFFF || img.height > 0xFFFF)
        throw ProtocolError("image dimensions outside wire range");
    std::vector<uint8_t> out;
    out.reserve(4 + img.pixels.size());
    put_u16(out, static_cast<uint16_t>(img.width));
    put_u16(out, static_cast<uint16_t>(img.height));
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage decode_image_payload(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    GrayImage img;
    img.width = r.u16();
    img.height = r.u16();
    if (img.width == 0 || img.height == 0) throw ProtocolError("zero image dimension");
    const auto body = r.take(static_cast<size_t>(img.width) * img.height);
    r.expect_end();
    img.pixels.assign(body.begin(), body.end());
    return img;
}

std::vector<uint8_t> encode_vector_payload(const std::vector<double>& v) {
    if (v.size() > 0xFFFF) throw ProtocolError("vector dimension outside wire range");
    std::vector<uint8_t> out;
    out.reserve(2 + 4 * v.size());
    put_u16(out, static_cast<uint16_t>(v.size()));
    for (const double x : v) put_f32(out, static_cast<float>(x));
    return out;
}

std::vector<double> decode_vector_payload(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    const uint16_t dim = r.u16();
    std::vector<double> v(dim);
    for (uint16_t i = 0; i < dim; ++i) v[i] = r.f32();
    r.expect_end();
    return v;
}

std::vector<uint8_t> encode_detect_response(const std::vector<MarkerDetection>& dets) {
    if (dets.size() > 0xFFFF) throw ProtocolError("detection count outside wire range");
    std::vector<uint8_t> out;
    out.reserve(2 + dets.size() * 36);
    put_u16(out, static_cast<uint16_t>(dets.size()));
    for (const MarkerDetection& d : dets) {
        put_u16(out, d.id);
        out.push_back(static_cast<uint8_t>(d.corrected));
        out.push_back(static_cast<uint8_t>(d.rotation));
        for (const Point2 p : d.corners) {
            put_f32(out, static_cast<float>(p.x));
            put_f32(out, static_cast<float>(p.y));
        }
    }
    return out;
}

std::vector<MarkerDetection> decode_detect_response(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    const uint16_t count = r.u16();
    std::vector<MarkerDetection> dets(count);
    for (MarkerDetection& d : dets) {
        d.id = r.u16();
        d.corrected = r.u8();
        d.rotation = r.u8();
        for (Point2& p : d.corners) {
            p.x = r.f32();
            p.y = r.f32();
        }
    }
    r.expect_end();
    return dets;
}

std::vector<uint8_t> encode_classify_response(const std::string& label, float confidence) {
    if (label.size() > 0xFF) throw ProtocolError("label outside wire range");
    std::vector<uint8_t> out;
    out.push_back(static_cast<uint8_t>(label.size()));
    out.insert(out.end(), label.begin(), label.end());
    put_f32(out, confidence);
    return out;
}

ClassifyReply decode_classify_response(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    const uint8_t len = r.u8();
    const auto label = r.take(len);
    ClassifyReply reply;
    reply.label.assign(label.begin(), label.end());
    reply.confidence = r.f32();
    r.expect_end();
    return reply;
}

std::vector<uint8_t> encode_error_payload(uint8_t code, const std::string& message) {
    if (message.size() > 0xFFFF) throw ProtocolError("error message outside wire range");
    std::vector<uint8_t> out;
    out.push_back(code);
    put_u16(out, static_cast<uint16_t>(message.size()));
    out.insert(out.end(), message.begin(), message.end());
    return out;
}

ErrorReply decode_error_payload(std::span<const uint8_t> payload) {
    ByteReader r(payload);
    ErrorReply reply;
    reply.code = r.u8();
    const uint16_t len = r.u16();
    const auto msg = r.take(len);
    reply.message.assign(msg.begin(), msg.end());
    r.expect_end();
    return reply;
}

}  // namespace arc::net
