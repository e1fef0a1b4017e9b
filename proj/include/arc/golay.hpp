#pragma once

#include <cstdint>
#include <optional>

namespace arc {

/// Result of decoding a 24-bit codeword.
struct GolayDecode {
    uint16_t id = 0;    ///< Recovered 12-bit payload.
    int corrected = 0;  ///< Bit errors fixed, 0..3.
};

/// Encodes a 12-bit identifier into a systematic [24,12,8] extended-Golay
/// codeword: payload in bits 23..12, parity in bits 11..0.  Throws
/// std::out_of_range for identifiers above 4095.
uint32_t golay_encode(uint16_t id);

/// Decodes a 24-bit word by syndrome lookup, correcting up to 3 bit errors.
/// Returns std::nullopt when the word is 4 or more bit flips away from every
/// codeword.  Throws std::out_of_range for words above 2^24 - 1.
std::optional<GolayDecode> golay_decode(uint32_t word);

}  // namespace arc
