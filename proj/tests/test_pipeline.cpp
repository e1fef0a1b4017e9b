#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <array>
#include <cmath>

#include "arc/geometry.hpp"
#include "arc/image.hpp"
#include "arc/marker.hpp"
#include "arc/pipeline.hpp"
#include "arc/rng.hpp"
#include "arc/segmentation.hpp"
#include "arc/shape_mlp.hpp"
#include "support/synth.hpp"

using arc::DetectConfig;
using arc::GrayImage;
using arc::MarkerDetection;
using arc::Point2;

namespace {

// Pixel coordinates of the marker's black ring corners when the rendered
// sprite (cell size c, one-cell quiet zone) is pasted at (ox, oy): the ring
// spans pixel columns/rows [c, 8c-1].
std::array<Point2, 4> ring_corners(double c, double ox, double oy) {
  return {{{ox + c, oy + c},
           {ox + 8 * c - 1, oy + c},
           {ox + 8 * c - 1, oy + 8 * c - 1},
           {ox + c, oy + 8 * c - 1}}};
}

double corner_error(const std::array<Point2, 4>& got,
                    const std::array<Point2, 4>& want) {
  // Corner lists share clockwise order but may start at different indices.
  double best = std::numeric_limits<double>::infinity();
  for (int s = 0; s < 4; ++s) {
    double worst = 0;
    for (int i = 0; i < 4; ++i) {
      const Point2& g = got[size_t((i + s) % 4)];
      const Point2& w = want[size_t(i)];
      worst = std::max(worst, std::hypot(g.x - w.x, g.y - w.y));
    }
    best = std::min(best, worst);
  }
  return best;
}

const MarkerDetection* find_id(const std::vector<MarkerDetection>& dets,
                               uint16_t id) {
  for (const auto& d : dets)
    if (d.id == id) return &d;
  return nullptr;
}

}  // namespace

TEST_CASE("blank and noise images detect nothing") {
  CHECK(arc::detect_markers(GrayImage{64, 64, 255}).empty());
  CHECK(arc::detect_markers(GrayImage{64, 64, 0}).empty());
  arc::SplitMix64 rng(14);
  const GrayImage noise = synth::random_gray(128, 96, rng);
  CHECK(arc::detect_markers(noise).empty());
}

TEST_CASE("three pasted markers are found with exact ids and corners") {
  GrayImage scene = synth::white_canvas(320, 240);
  synth::paste(scene, arc::render_marker(0, 8), 10, 12);
  synth::paste(scene, arc::render_marker(1000, 8), 140, 30);
  synth::paste(scene, arc::render_marker(4095, 8), 60, 130);
  const auto dets = arc::detect_markers(scene);
  REQUIRE(dets.size() == 3);

  // Sorted by (y, x) of the first corner: ids 0 (y=20), 1000 (y=38), 4095.
  CHECK(dets[0].id == 0);
  CHECK(dets[1].id == 1000);
  CHECK(dets[2].id == 4095);

  const struct {
    uint16_t id;
    double ox, oy;
  } placed[] = {{0, 10, 12}, {1000, 140, 30}, {4095, 60, 130}};
  for (const auto& p : placed) {
    const MarkerDetection* d = find_id(dets, p.id);
    REQUIRE(d != nullptr);
    CHECK(d->corrected == 0);
    CHECK(corner_error(d->corners, ring_corners(8, p.ox, p.oy)) <= 1.5);
  }
}

TEST_CASE("detection is equivariant under small translations") {
  const GrayImage sprite = arc::render_marker(321, 8);
  GrayImage a = synth::white_canvas(160, 160);
  GrayImage b = synth::white_canvas(160, 160);
  synth::paste(a, sprite, 40, 40);
  synth::paste(b, sprite, 43, 45);  // shifted (+3, +5)
  const auto da = arc::detect_markers(a);
  const auto db = arc::detect_markers(b);
  REQUIRE(da.size() == 1);
  REQUIRE(db.size() == 1);
  CHECK(da[0].id == 321);
  CHECK(db[0].id == 321);
  for (int i = 0; i < 4; ++i) {
    CHECK(std::abs(db[0].corners[size_t(i)].x - da[0].corners[size_t(i)].x - 3.0) <= 0.75);
    CHECK(std::abs(db[0].corners[size_t(i)].y - da[0].corners[size_t(i)].y - 5.0) <= 0.75);
  }
}

TEST_CASE("markers survive mild perspective warps") {
  const GrayImage sprite = arc::render_marker(2047, 8);
  const std::array<Point2, 4> src = ring_corners(8, 0, 0);
  // Corner displacements up to ~8 px on a 56 px ring edge (~15%).
  const std::array<Point2, 4> dst = {{{52 + 6, 40 - 3},
                                      {52 + 55 - 4, 40 + 5},
                                      {52 + 55 + 2, 40 + 55 - 6},
                                      {52 - 5, 40 + 55 + 4}}};
  GrayImage scene = synth::white_canvas(200, 160);
  synth::paste_warped(scene, sprite, src, dst);
  const auto dets = arc::detect_markers(scene);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].id == 2047);
  CHECK(dets[0].corrected == 0);
  CHECK(corner_error(dets[0].corners, dst) <= 1.5);
}

TEST_CASE("rotated paste reports the undoing rotation") {
  // Rotating the sprite content by 90 degrees clockwise means the reader
  // must apply three more clockwise turns to decode.
  const GrayImage sprite = arc::render_marker(77, 8);
  GrayImage rotated{sprite.height, sprite.width, 0};
  for (uint32_t y = 0; y < sprite.height; ++y)
    for (uint32_t x = 0; x < sprite.width; ++x)
      rotated.at(sprite.height - 1 - y, x) = sprite.at(x, y);
  GrayImage scene = synth::white_canvas(160, 160);
  synth::paste(scene, rotated, 30, 30);
  const auto dets = arc::detect_markers(scene);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].id == 77);
  CHECK(dets[0].rotation == 3);
}

TEST_CASE("overlap dedupe keeps the cleaner, larger detection") {
  // An axis-aligned marker (cell 9, ring side 62) plus a 30-degree-rotated
  // one placed so their corner-aligned bounding boxes overlap slightly
  // (IoU ~ 0.01) while their ink stays well separated.
  GrayImage scene = synth::white_canvas(176, 176);
  synth::paste(scene, arc::render_marker(5, 9), 10, 10, true);

  const GrayImage sprite = arc::render_marker(900, 8);
  const std::array<Point2, 4> src = ring_corners(8, 0, 0);
  const double phi = 30.0 * 3.14159265358979323846 / 180.0;
  const double cx = 108.6, cy = 108.6;
  std::array<Point2, 4> dst{};
  const double half = 55.0 / 2.0;
  const double sx[4] = {-half, half, half, -half};
  const double sy[4] = {-half, -half, half, half};
  for (int i = 0; i < 4; ++i) {
    dst[size_t(i)] = {cx + sx[i] * std::cos(phi) - sy[i] * std::sin(phi),
                      cy + sx[i] * std::sin(phi) + sy[i] * std::cos(phi)};
  }
  synth::paste_warped(scene, sprite, src, dst, true);

  const auto both = arc::detect_markers(scene);
  REQUIRE(both.size() == 2);
  CHECK(find_id(both, 5) != nullptr);
  CHECK(find_id(both, 900) != nullptr);

  DetectConfig eager;
  eager.dedupe_iou = 0.005;  // even the slight corner overlap collapses
  const auto one = arc::detect_markers(scene, eager);
  REQUIRE(one.size() == 1);
  CHECK(one[0].id == 5);  // equally clean; the larger quad wins
}

TEST_CASE("global threshold config is honored") {
  GrayImage scene = synth::white_canvas(120, 120);
  synth::paste(scene, arc::render_marker(9, 8), 20, 20);
  DetectConfig cfg;
  cfg.adaptive = false;
  cfg.global_threshold = 128;
  const auto dets = arc::detect_markers(scene, cfg);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].id == 9);

  // An absurd global threshold erases everything.
  cfg.global_threshold = 0;
  CHECK(arc::detect_markers(scene, cfg).empty());
}

TEST_CASE("min_area filters small markers") {
  GrayImage scene = synth::white_canvas(120, 120);
  synth::paste(scene, arc::render_marker(41, 2), 30, 30);  // ring 14 px wide
  DetectConfig strict;
  strict.min_area = 1000.0;
  CHECK(arc::detect_markers(scene, strict).empty());
  DetectConfig lax;
  lax.min_area = 60.0;
  const auto dets = arc::detect_markers(scene, lax);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].id == 41);
}

TEST_CASE("recognize_shapes labels regions largest first") {
  // Train a tiny model on two synthetic classes, then present both shapes.
  arc::LabeledDataset data;
  data.labels = {"disc", "square"};
  arc::SplitMix64 rng(77);
  for (int i = 0; i < 30; ++i) {
    const double size = 18.0 + rng.uniform(0.0, 30.0);
    const double angle = rng.uniform(0.0, 2 * 3.14159265358979323846);
    for (int cls = 0; cls < 2; ++cls) {
      const auto kind = cls == 0 ? synth::Shape::Disc : synth::Shape::Square;
      const auto img = synth::draw_shape(kind, size, angle);
      const arc::BinaryImage m = arc::threshold_global(img, 128);
      const auto roots = arc::trace_contours(m);
      REQUIRE(roots.size() == 1);
      data.samples.emplace_back(
          arc::canonicalize(arc::extract_flag_vector(roots[0], m, 24)), cls);
    }
  }
  arc::MlpModel model = arc::mlp_init({24, 12, 2}, 3);
  model.labels = data.labels;
  arc::TrainConfig tc;
  tc.epochs = 200;
  arc::mlp_train(model, data, tc);

  GrayImage scene = synth::white_canvas(220, 120);
  synth::paste(scene, synth::draw_shape(synth::Shape::Square, 52.0), 10, 20);
  synth::paste(scene, synth::draw_shape(synth::Shape::Disc, 34.0), 120, 30);
  DetectConfig cfg;
  cfg.rays = 24;
  // Global threshold to match the training masks: the adaptive default hollows
  // out large solid blobs (interior pixels equal their local window mean).
  cfg.adaptive = false;
  const auto shapes = arc::recognize_shapes(scene, cfg, model);
  REQUIRE(shapes.size() == 2);
  CHECK(shapes[0].pixel_count > shapes[1].pixel_count);
  CHECK(shapes[0].label == "square");
  CHECK(shapes[1].label == "disc");
  // Symmetric shapes centred on their sprite canvases: centroid = paste
  // offset + (canvas-1)/2 exactly.
  CHECK(shapes[0].centroid.x == doctest::Approx(10 + 33.5));  // canvas 68
  CHECK(shapes[0].centroid.y == doctest::Approx(20 + 33.5));
  CHECK(shapes[1].centroid.x == doctest::Approx(120 + 24.5));  // canvas 50
  CHECK(shapes[1].centroid.y == doctest::Approx(30 + 24.5));
}

TEST_CASE("recognize_shapes enforces the ray dimension and skips small regions") {
  const arc::MlpModel model = arc::mlp_init({24, 8, 2}, 1);
  DetectConfig cfg;
  cfg.rays = 70;
  CHECK_THROWS_AS(arc::recognize_shapes(GrayImage{32, 32, 255}, cfg, model),
                  std::invalid_argument);

  arc::MlpModel labeled = arc::mlp_init({70, 8, 2}, 1);
  labeled.labels = {"a", "b"};
  GrayImage scene = synth::white_canvas(64, 64);
  synth::paste(scene, synth::draw_shape(synth::Shape::Disc, 6.0), 10, 10);
  DetectConfig std_cfg;  // min_area 100 > disc area ~28
  CHECK(arc::recognize_shapes(scene, std_cfg, labeled).empty());
}
