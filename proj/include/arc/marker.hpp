#pragma once

#include <cstdint>
#include <optional>

#include "arc/image.hpp"

namespace arc {

/// Marker geometry: a 7x7 cell grid (black border ring around a 5x5
/// interior whose center cell is fixed white), carrying one 24-bit codeword
/// in the 24 non-center interior cells, row-major, most significant bit
/// first, with bit 1 drawn black.
constexpr int32_t kMarkerGridCells = 7;
/// Canonical patch edge: the 7x7 grid sampled at 8 px per cell.
constexpr int32_t kMarkerPatchSize = 56;

/// Result of reading a canonical marker patch.
struct MarkerRead {
    uint16_t id = 0;    ///< Decoded 12-bit identifier.
    int rotation = 0;   ///< Clockwise quarter turns applied to decode, 0..3.
    int corrected = 0;  ///< Bit errors fixed by the code, 0..3.
};

/// Renders the marker for `id` at `cell_px` pixels per cell, surrounded by a
/// one-cell white quiet zone: the image is 9*cell_px square.  Throws
/// std::out_of_range for identifiers above 4095 and std::invalid_argument
/// for a non-positive cell size.
GrayImage render_marker(uint16_t id, int32_t cell_px = 8);

/// Reads a 56x56 canonical patch (the 7x7 grid without quiet zone).
///
/// Each cell is summarized by the mean of its central 4x4 pixels; the border
/// ring supplies the black reference, the center cell the white reference.
/// Returns std::nullopt when contrast is below 30 levels, when any border
/// cell fails to classify black, when no rotation of the grid yields a
/// decodable codeword, or when the best rotations disagree on the identity.
/// Otherwise picks the rotation needing the fewest corrections (ties go to
/// the smallest rotation).  Throws std::invalid_argument for patch
/// dimensions other than 56x56.
std::optional<MarkerRead> read_canonical(const GrayImage& patch);

}  // namespace arc
