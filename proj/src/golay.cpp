#include "arc/golay.hpp"

#include <array>
#include <bit>
#include <stdexcept>

namespace arc {

namespace {

/// Parity half of the systematic generator [I | B].  Row i gives the parity
/// contribution of payload bit i (payload bits numbered from the MSB);
/// within a row, bit 11 - j corresponds to parity column j.  B is the
/// standard bordered quadratic-residue construction over GF(11), which makes
/// every codeword weight a multiple of 4 and the minimum distance 8.
constexpr std::array<uint32_t, 12> kParityRows = {
    0xa3b, 0xd1d, 0x68f, 0xb47, 0xda3, 0xed1,
    0x769, 0x3b5, 0x1db, 0x8ed, 0x477, 0xffe,
};

uint32_t parity_of(uint32_t payload) {
    uint32_t p = 0;
    for (int i = 0; i < 12; ++i)
        if ((payload >> (11 - i)) & 1u) p ^= kParityRows[i];
    return p;
}

uint32_t syndrome_of(uint32_t word) { return parity_of(word >> 12) ^ (word & 0xFFFu); }

struct CosetLeader {
    uint32_t pattern = 0;
    int8_t weight = -1;  ///< -1 marks syndromes with no weight <= 3 leader.
};

/// Coset-leader table over all 2^12 syndromes: every error pattern of weight
/// at most 3 has a distinct syndrome (two colliding patterns would sum to a
/// nonzero codeword of weight < 8), so lookup corrects up to 3 flips.
std::array<CosetLeader, 4096> build_leader_table() {
    std::array<CosetLeader, 4096> table{};
    auto insert = [&table](uint32_t pattern, int8_t weight) {
        CosetLeader& slot = table[syndrome_of(pattern)];
        if (slot.weight >= 0) throw std::logic_error("code table: syndrome collision");
        slot = {pattern, weight};
    };
    insert(0, 0);
    for (int a = 0; a < 24; ++a) {
        insert(1u << a, 1);
        for (int b = a + 1; b < 24; ++b) {
            insert((1u << a) | (1u << b), 2);
            for (int c = b + 1; c < 24; ++c) insert((1u << a) | (1u << b) | (1u << c), 3);
        }
    }
    return table;
}

const std::array<CosetLeader, 4096>& leader_table() {
    static const std::array<CosetLeader, 4096> table = build_leader_table();
    return table;
}

}  // namespace

uint32_t golay_encode(uint16_t id) {
    if (id > 0xFFF) throw std::out_of_range("golay_encode: identifier above 4095");
    return (static_cast<uint32_t>(id) << 12) | parity_of(id);
}

std::optional<GolayDecode> golay_decode(uint32_t word) {
    if (word > 0xFFFFFFu) throw std::out_of_range("golay_decode: word above 24 bits");
    const CosetLeader leader = leader_table()[syndrome_of(word)];
    if (leader.weight < 0) return std::nullopt;
    const uint32_t fixed = word ^ leader.pattern;
    return GolayDecode{static_cast<uint16_t>(fixed >> 12), leader.weight};
}

}  // namespace arc
