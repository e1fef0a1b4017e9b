#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "arc/image.hpp"
#include "arc/pipeline.hpp"

namespace arc::net {

/// Frame layout: magic "ARC1", type byte, payload length (u32 big-endian),
/// payload.  All multi-byte integers and reals on the wire are big-endian.
constexpr uint8_t kMagic[4] = {0x41, 0x52, 0x43, 0x31};
constexpr size_t kHeaderSize = 9;
constexpr size_t kMaxPayload = 16u * 1024 * 1024;

/// Request types; a response echoes the request type with the high bit set.
constexpr uint8_t kTypeDetectMarkers = 0x01;
constexpr uint8_t kTypeClassifyVector = 0x02;
constexpr uint8_t kTypeClassifyImage = 0x03;
constexpr uint8_t kTypePing = 0x05;
constexpr uint8_t kResponseBit = 0x80;
constexpr uint8_t kTypeError = 0xFF;

/// ERROR frame codes.
constexpr uint8_t kErrMalformed = 1;
constexpr uint8_t kErrUnsupported = 2;
constexpr uint8_t kErrInternal = 3;
constexpr uint8_t kErrModelMissing = 4;

struct Frame {
    uint8_t type = 0;
    std::vector<uint8_t> payload;

    friend bool operator==(const Frame&, const Frame&) = default;
};

/// Raised for any wire-format violation (bad magic, truncation, oversize).
struct ProtocolError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<uint8_t> encode_frame(uint8_t type, std::span<const uint8_t> payload);
Frame decode_frame(std::span<const uint8_t> bytes);

/// Big-endian primitives, appending to / reading from byte buffers.
void put_u16(std::vector<uint8_t>& out, uint16_t v);
void put_u32(std::vector<uint8_t>& out, uint32_t v);
void put_f32(std::vector<uint8_t>& out, float v);

/// Sequential big-endian reader over a payload; throws ProtocolError when
/// reads run past the end.
class ByteReader {
  public:
    explicit ByteReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    uint8_t u8();
    uint16_t u16();
    uint32_t u32();
    float f32();
    std::span<const uint8_t> take(size_t n);
    [[nodiscard]] size_t remaining() const { return bytes_.size() - pos_; }
    /// Throws unless the payload was consumed exactly.
    void expect_end() const;

  private:
    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

/// Image payload: w:u16, h:u16, then w*h gray bytes, row-major.
std::vector<uint8_t> encode_image_payload(const GrayImage& img);
GrayImage decode_image_payload(std::span<const uint8_t> payload);

/// Vector payload: dim:u16, then dim f32 values.
std::vector<uint8_t> encode_vector_payload(const std::vector<double>& v);
std::vector<double> decode_vector_payload(std::span<const uint8_t> payload);

/// DETECT response payload: count:u16, then per detection id:u16,
/// corrected:u8, rotation:u8, and the four corners as 8 f32 (x,y pairs).
std::vector<uint8_t> encode_detect_response(const std::vector<MarkerDetection>& dets);
std::vector<MarkerDetection> decode_detect_response(std::span<const uint8_t> payload);

/// CLASSIFY response payload: label_len:u8, label bytes, confidence:f32.
/// An empty label signals that nothing was classified.
std::vector<uint8_t> encode_classify_response(const std::string& label, float confidence);
struct ClassifyReply {
    std::string label;
    float confidence = 0;
};
ClassifyReply decode_classify_response(std::span<const uint8_t> payload);

/// ERROR payload: code:u8, msg_len:u16, UTF-8 message.
std::vector<uint8_t> encode_error_payload(uint8_t code, const std::string& message);
struct ErrorReply {
    uint8_t code = 0;
    std::string message;
};
ErrorReply decode_error_payload(std::span<const uint8_t> payload);

}  // namespace arc::net
