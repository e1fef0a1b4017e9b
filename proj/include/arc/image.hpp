#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace arc {

/// 8-bit RGB raster, row-major r,g,b triples.
struct RgbImage {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint8_t> pixels;  // width*height*3 bytes

    RgbImage() = default;
    RgbImage(uint32_t w, uint32_t h) : width(w), height(h), pixels(size_t(w) * h * 3, 0) {}

    uint8_t* rgb(uint32_t x, uint32_t y) { return &pixels[(size_t(y) * width + x) * 3]; }
    const uint8_t* rgb(uint32_t x, uint32_t y) const { return &pixels[(size_t(y) * width + x) * 3]; }
};

/// 8-bit luminance raster, row-major. 0 = black, 255 = white.
struct GrayImage {
    uint32_t width = 0;
    uint32_t height = 0;
    std::vector<uint8_t> pixels;  // width*height bytes

    GrayImage() = default;
    GrayImage(uint32_t w, uint32_t h, uint8_t fill = 0)
        : width(w), height(h), pixels(size_t(w) * h, fill) {}

    uint8_t at(uint32_t x, uint32_t y) const { return pixels[size_t(y) * width + x]; }
    uint8_t& at(uint32_t x, uint32_t y) { return pixels[size_t(y) * width + x]; }
    bool in_bounds(int64_t x, int64_t y) const {
        return x >= 0 && y >= 0 && x < int64_t(width) && y < int64_t(height);
    }

    friend bool operator==(const GrayImage&, const GrayImage&) = default;
};

/// 1-bit foreground mask, packed row-major. Foreground (1) = dark ink.
class BinaryImage {
public:
    BinaryImage() = default;
    BinaryImage(uint32_t w, uint32_t h)
        : width_(w), height_(h), bits_((size_t(w) * h + 7) / 8, 0) {}

    uint32_t width() const { return width_; }
    uint32_t height() const { return height_; }

    bool get(uint32_t x, uint32_t y) const {
        size_t i = size_t(y) * width_ + x;
        return (bits_[i >> 3] >> (i & 7)) & 1;
    }
    void set(uint32_t x, uint32_t y, bool v) {
        size_t i = size_t(y) * width_ + x;
        uint8_t m = uint8_t(1u << (i & 7));
        if (v)
            bits_[i >> 3] |= m;
        else
            bits_[i >> 3] &= uint8_t(~m);
    }
    bool in_bounds(int64_t x, int64_t y) const {
        return x >= 0 && y >= 0 && x < int64_t(width_) && y < int64_t(height_);
    }

    /// Total number of foreground pixels.
    size_t count() const;

    friend bool operator==(const BinaryImage&, const BinaryImage&) = default;

private:
    uint32_t width_ = 0;
    uint32_t height_ = 0;
    std::vector<uint8_t> bits_;
};

/// Prefix-sum table: sums[y][x] = sum of gray values in the rectangle [0,x) x [0,y).
struct IntegralImage {
    uint32_t width = 0;   // source image width
    uint32_t height = 0;  // source image height
    std::vector<uint64_t> sums;  // (width+1) * (height+1)

    uint64_t at(uint32_t x, uint32_t y) const { return sums[size_t(y) * (width + 1) + x]; }

    /// Sum over the half-open window [x0,x1) x [y0,y1). Requires x0<=x1, y0<=y1.
    uint64_t window(uint32_t x0, uint32_t y0, uint32_t x1, uint32_t y1) const {
        return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0);
    }
};

/// Decodes a binary PGM (P5) file. Comments ('#' to end of line) are allowed
/// in the header; maxval must be 1..255. Throws std::runtime_error on
/// malformed headers, unsupported maxval, or truncated pixel data.
GrayImage pgm_read(std::span<const uint8_t> bytes);

/// Encodes as "P5\n<w> <h>\n255\n" followed by raw pixel bytes.
std::vector<uint8_t> pgm_write(const GrayImage& img);

GrayImage pgm_load(const std::string& path);
void pgm_save(const std::string& path, const GrayImage& img);

/// y = round(0.299 r + 0.587 g + 0.114 b), rounding half up.
GrayImage to_grayscale(const RgbImage& img);

/// Foreground iff pixel < t.
BinaryImage threshold_global(const GrayImage& img, uint8_t t);

IntegralImage integral(const GrayImage& img);

/// Windowed-mean threshold for uneven illumination. For each pixel the mean m
/// is taken over the window x window box centered on it, clipped at the image
/// borders (the divisor is the in-bounds pixel count). Foreground iff
/// pixel < m - c, evaluated in exact integer arithmetic:
/// (pixel + c) * count < sum. window must be odd and >= 3.
BinaryImage threshold_adaptive(const GrayImage& img, uint32_t window = 15, int c = 7);

}  // namespace arc
