#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "arc/geometry.hpp"
#include "arc/image.hpp"
#include "arc/marker.hpp"
#include "arc/rng.hpp"
#include "support/synth.hpp"

using arc::GrayImage;

namespace {

// Clockwise-rotate a square image by quarter turns (independent pixel
// shuffle, no resampling).
GrayImage rotate_cw(const GrayImage& img, int quarters) {
  GrayImage out = img;
  for (int q = 0; q < (quarters % 4 + 4) % 4; ++q) {
    GrayImage next{out.height, out.width, 0};
    for (uint32_t y = 0; y < out.height; ++y)
      for (uint32_t x = 0; x < out.width; ++x)
        next.at(out.height - 1 - y, x) = out.at(x, y);
    out = next;
  }
  return out;
}

// The canonical 56x56 patch is the rendered marker minus its quiet zone.
GrayImage canonical_patch(uint16_t id) {
  const GrayImage full = arc::render_marker(id, 8);
  GrayImage patch{56, 56, 0};
  for (uint32_t y = 0; y < 56; ++y)
    for (uint32_t x = 0; x < 56; ++x) patch.at(x, y) = full.at(x + 8, y + 8);
  return patch;
}

}  // namespace

TEST_CASE("renderer output has the documented geometry") {
  const GrayImage img = arc::render_marker(0, 8);
  REQUIRE(img.width == 72);
  REQUIRE(img.height == 72);
  // Quiet zone is white, border ring black, center cell white.
  CHECK(img.at(0, 0) == 255);
  CHECK(img.at(7, 71) == 255);
  CHECK(img.at(8, 8) == 0);
  CHECK(img.at(63, 63) == 0);
  CHECK(img.at(36, 36) == 255);  // grid cell (3,3) of the interior
}

TEST_CASE("renderer validates arguments") {
  CHECK_THROWS_AS(arc::render_marker(4096), std::out_of_range);
  CHECK_THROWS_AS(arc::render_marker(0, 0), std::invalid_argument);
  const GrayImage one = arc::render_marker(5, 1);
  CHECK(one.width == 9);
}

TEST_CASE("data cells encode the codeword most significant bit first") {
  // Sample the center pixel of data cell k (row-major interior, skipping the
  // fixed-white center cell).
  auto cell_pixel = [](const GrayImage& img, int k) {
    const int idx = k < 12 ? k : k + 1;
    const int r = idx / 5, c = idx % 5;
    return img.at(uint32_t(8 * (2 + c) + 4), uint32_t(8 * (2 + r) + 4));
  };
  const GrayImage zero = arc::render_marker(0, 8);    // codeword 0x000000
  const GrayImage ones = arc::render_marker(4095, 8); // codeword 0xffffff
  for (int k = 0; k < 24; ++k) {
    CHECK(cell_pixel(zero, k) == 255);
    CHECK(cell_pixel(ones, k) == 0);
  }
  // id 2048 sets payload bit 11 = codeword bit 23 only, among the payload
  // half: exactly data cell 0 is black there.
  const GrayImage top = arc::render_marker(2048, 8);
  CHECK(cell_pixel(top, 0) == 0);
  for (int k = 1; k < 12; ++k) CHECK(cell_pixel(top, k) == 255);
}

TEST_CASE("canonical patches decode to their identity at every rotation") {
  for (uint16_t id : {0, 1, 77, 2047, 4095}) {
    const GrayImage patch = canonical_patch(id);
    for (int rot = 0; rot < 4; ++rot) {
      const auto r = arc::read_canonical(rotate_cw(patch, rot));
      REQUIRE(r.has_value());
      CHECK(r->id == id);
      CHECK(r->corrected == 0);
      // Reading a patch rotated rot turns clockwise requires rotating it a
      // further (4 - rot) % 4 turns to restore the canonical orientation.
      // ids 0 and 4095 render rotation-symmetric grids (all data cells one
      // color), so their reported rotation collapses to 0.
      if (id == 0 || id == 4095) {
        CHECK(r->rotation == 0);
      } else {
        CHECK(r->rotation == (4 - rot) % 4);
      }
    }
  }
}

TEST_CASE("read_canonical reports the smallest rotation on symmetric ties") {
  // id 0's payload region is all white; only the parity cells pattern the
  // grid, and decode succeeds at some rotation with 0 corrections. If
  // several rotations decode to the same id, the smallest wins.
  const auto r = arc::read_canonical(canonical_patch(0));
  REQUIRE(r.has_value());
  CHECK(r->id == 0);
  CHECK(r->rotation == 0);
}

TEST_CASE("read_canonical rejects wrong sizes") {
  CHECK_THROWS_AS(arc::read_canonical(GrayImage{55, 56, 0}),
                  std::invalid_argument);
  CHECK_THROWS_AS(arc::read_canonical(GrayImage{57, 57, 0}),
                  std::invalid_argument);
}

TEST_CASE("flat patches fail the contrast gate") {
  CHECK_FALSE(arc::read_canonical(GrayImage{56, 56, 0}).has_value());
  CHECK_FALSE(arc::read_canonical(GrayImage{56, 56, 255}).has_value());
  CHECK_FALSE(arc::read_canonical(GrayImage{56, 56, 128}).has_value());
}

TEST_CASE("patches without a black border ring are rejected") {
  // Whiten the whole top border row of cells: contrast stays high but the
  // ring no longer reads black.
  GrayImage patch = canonical_patch(1000);
  for (uint32_t y = 0; y < 8; ++y)
    for (uint32_t x = 0; x < 56; ++x) patch.at(x, y) = 255;
  CHECK_FALSE(arc::read_canonical(patch).has_value());
}

TEST_CASE("random noise patches are rejected") {
  arc::SplitMix64 rng(99);
  int accepted = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const GrayImage patch = synth::random_gray(56, 56, rng);
    if (arc::read_canonical(patch).has_value()) ++accepted;
  }
  CHECK(accepted == 0);
}

TEST_CASE("moderate gray-level noise still decodes cleanly") {
  arc::SplitMix64 rng(7);
  for (uint16_t id : {12, 345, 4000}) {
    GrayImage patch = canonical_patch(id);
    synth::add_noise(patch, 20.0, rng);
    const auto r = arc::read_canonical(patch);
    REQUIRE(r.has_value());
    CHECK(r->id == id);
  }
}

TEST_CASE("a flipped data cell is corrected and counted") {
  GrayImage patch = canonical_patch(2500);
  // Interior cell (row 1, col 1) of the 5x5 -> grid cell (2,2): paint the
  // whole 8x8 cell the opposite color of what a lookup of one pixel shows.
  const uint32_t base = 2 * 8;
  const uint8_t now = patch.at(base + 4, base + 4);
  const uint8_t flipped = now < 128 ? uint8_t(255) : uint8_t(0);
  for (uint32_t y = 0; y < 8; ++y)
    for (uint32_t x = 0; x < 8; ++x) patch.at(base + x, base + y) = flipped;
  const auto r = arc::read_canonical(patch);
  REQUIRE(r.has_value());
  CHECK(r->id == 2500);
  CHECK(r->corrected == 1);
  CHECK(r->rotation == 0);
}
