#include "arc/marker.hpp"

#include <array>
#include <stdexcept>
#include <vector>

#include "arc/golay.hpp"

namespace arc {

namespace {

constexpr int kGrid = kMarkerGridCells;
constexpr double kMinContrast = 30.0;

bool is_border(int gr, int gc) { return gr == 0 || gc == 0 || gr == kGrid - 1 || gc == kGrid - 1; }

/// Data bit index (0 = MSB) of an interior cell, or -1 for the fixed-white
/// center.  Interior cells run row-major and skip the center.
int data_index(int r, int c) {
    const int idx = r * 5 + c;
    if (idx == 12) return -1;
    return idx < 12 ? idx : idx - 1;
}

}  // namespace

GrayImage render_marker(uint16_t id, int32_t cell_px) {
    if (cell_px <= 0) throw std::invalid_argument("render_marker: cell size must be positive");
    const uint32_t word = golay_encode(id);
    const int32_t side = 9 * cell_px;

    GrayImage img;
    img.width = img.height = static_cast<uint32_t>(side);
    img.pixels.assign(static_cast<size_t>(side) * side, 255);
    for (int32_t y = 0; y < side; ++y) {
        for (int32_t x = 0; x < side; ++x) {
            const int gc = x / cell_px - 1;  // Quiet zone at -1 and 7.
            const int gr = y / cell_px - 1;
            if (gr < 0 || gc < 0 || gr >= kGrid || gc >= kGrid) continue;
            bool black;
            if (is_border(gr, gc)) {
                black = true;
            } else {
                const int k = data_index(gr - 1, gc - 1);
                black = k >= 0 && ((word >> (23 - k)) & 1u) != 0;
            }
            if (black) img.pixels[static_cast<size_t>(y) * side + x] = 0;
        }
    }
    return img;
}

std::optional<MarkerRead> read_canonical(const GrayImage& patch) {
    if (patch.width != kMarkerPatchSize || patch.height != kMarkerPatchSize)
        throw std::invalid_argument("read_canonical: patch must be 56x56");

    // Cell value: mean of the central 4x4 pixels of its 8x8 block.
    double cells[kGrid][kGrid];
    for (int gr = 0; gr < kGrid; ++gr) {
        for (int gc = 0; gc < kGrid; ++gc) {
            uint32_t sum = 0;
            for (int dy = 2; dy <= 5; ++dy)
                for (int dx = 2; dx <= 5; ++dx) sum += patch.at(gc * 8 + dx, gr * 8 + dy);
            cells[gr][gc] = sum / 16.0;
        }
    }

    double black_ref = 0;
    int border_cells = 0;
    for (int gr = 0; gr < kGrid; ++gr)
        for (int gc = 0; gc < kGrid; ++gc)
            if (is_border(gr, gc)) {
                black_ref += cells[gr][gc];
                ++border_cells;
            }
    black_ref /= border_cells;
    const double white_ref = cells[3][3];
    if (white_ref - black_ref < kMinContrast) return std::nullopt;

    const double mid = (black_ref + white_ref) / 2.0;
    bool black[kGrid][kGrid];
    for (int gr = 0; gr < kGrid; ++gr)
        for (int gc = 0; gc < kGrid; ++gc) black[gr][gc] = cells[gr][gc] < mid;

    // The border ring must actually read black; this rejects unstructured
    // patches that merely pass the contrast gate.
    for (int gr = 0; gr < kGrid; ++gr)
        for (int gc = 0; gc < kGrid; ++gc)
            if (is_border(gr, gc) && !black[gr][gc]) return std::nullopt;

    bool interior[5][5];
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) interior[r][c] = black[r + 1][c + 1];

    // Try the four grid orientations and keep the cleanest decode.
    struct Candidate {
        int rotation;
        GolayDecode decode;
    };
    std::vector<Candidate> candidates;
    bool grid[5][5];
    for (int r = 0; r < 5; ++r)
        for (int c = 0; c < 5; ++c) grid[r][c] = interior[r][c];
    for (int rot = 0; rot < 4; ++rot) {
        if (rot > 0) {
            bool next[5][5];
            for (int r = 0; r < 5; ++r)
                for (int c = 0; c < 5; ++c) next[r][c] = grid[4 - c][r];
            for (int r = 0; r < 5; ++r)
                for (int c = 0; c < 5; ++c) grid[r][c] = next[r][c];
        }
        uint32_t word = 0;
        for (int r = 0; r < 5; ++r) {
            for (int c = 0; c < 5; ++c) {
                const int k = data_index(r, c);
                if (k >= 0 && grid[r][c]) word |= 1u << (23 - k);
            }
        }
        if (const auto decode = golay_decode(word)) candidates.push_back({rot, *decode});
    }
    if (candidates.empty()) return std::nullopt;

    int best_corrected = 4;
    for (const Candidate& c : candidates) best_corrected = std::min(best_corrected, c.decode.corrected);
    const Candidate* best = nullptr;
    for (const Candidate& c : candidates) {
        if (c.decode.corrected != best_corrected) continue;
        if (best == nullptr) {
            best = &c;
        } else if (c.decode.id != best->decode.id) {
            return std::nullopt;  // Equally clean decodes with conflicting identities.
        }
    }
    return MarkerRead{best->decode.id, best->rotation, best->decode.corrected};
}

}  // namespace arc
