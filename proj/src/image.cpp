#include "arc/image.hpp"

#include <bit>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace arc {

size_t BinaryImage::count() const {
    size_t n = 0;
    for (uint8_t b : bits_) n += std::popcount(b);
    // trailing bits of the last byte are always zero
    return n;
}

namespace {

class TokenReader {
public:
    explicit TokenReader(std::span<const uint8_t> bytes) : bytes_(bytes) {}

    // Skips whitespace and '#' comments, then reads an unsigned decimal token.
    uint64_t next_uint(const char* what) {
        skip_space_and_comments();
        if (pos_ >= bytes_.size() || !is_digit(bytes_[pos_]))
            throw std::runtime_error(std::string("pgm: malformed header: expected ") + what);
        uint64_t v = 0;
        while (pos_ < bytes_.size() && is_digit(bytes_[pos_])) {
            v = v * 10 + (bytes_[pos_] - '0');
            if (v > std::numeric_limits<uint32_t>::max())
                throw std::runtime_error("pgm: malformed header: value out of range");
            ++pos_;
        }
        return v;
    }

    // The header ends with exactly one whitespace byte before the raster.
    void expect_single_space() {
        if (pos_ >= bytes_.size() || !is_space(bytes_[pos_]))
            throw std::runtime_error("pgm: malformed header: missing separator before pixel data");
        ++pos_;
    }

    size_t pos() const { return pos_; }

private:
    static bool is_space(uint8_t c) {
        return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\v' || c == '\f';
    }
    static bool is_digit(uint8_t c) { return c >= '0' && c <= '9'; }

    void skip_space_and_comments() {
        while (pos_ < bytes_.size()) {
            if (is_space(bytes_[pos_])) {
                ++pos_;
            } else if (bytes_[pos_] == '#') {
                while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
            } else {
                break;
            }
        }
    }

    std::span<const uint8_t> bytes_;
    size_t pos_ = 0;
};

}  // namespace

GrayImage pgm_read(std::span<const uint8_t> bytes) {
    if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
        throw std::runtime_error("pgm: malformed header: not a P5 file");
    TokenReader r(bytes.subspan(2));

    uint64_t w = r.next_uint("width");
    uint64_t h = r.next_uint("height");
    uint64_t maxval = r.next_uint("maxval");
    if (w == 0 || h == 0)
        throw std::runtime_error("pgm: malformed header: zero dimension");
    if (maxval == 0)
        throw std::runtime_error("pgm: malformed header: maxval 0");
    if (maxval > 255)
        throw std::runtime_error("pgm: maxval > 255 unsupported");
    if (w * h > (uint64_t(1) << 30))
        throw std::runtime_error("pgm: malformed header: image too large");
    r.expect_single_space();

    size_t need = size_t(w) * size_t(h);
    size_t start = 2 + r.pos();
    if (bytes.size() - start < need)
        throw std::runtime_error("pgm: truncated pixel data");

    GrayImage img{uint32_t(w), uint32_t(h)};
    std::copy_n(bytes.begin() + start, need, img.pixels.begin());
    return img;
}

std::vector<uint8_t> pgm_write(const GrayImage& img) {
    std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) +
                         "\n255\n";
    std::vector<uint8_t> out;
    out.reserve(header.size() + img.pixels.size());
    out.insert(out.end(), header.begin(), header.end());
    out.insert(out.end(), img.pixels.begin(), img.pixels.end());
    return out;
}

GrayImage pgm_load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)),
                               std::istreambuf_iterator<char>());
    return pgm_read(bytes);
}

void pgm_save(const std::string& path, const GrayImage& img) {
    auto bytes = pgm_write(img);
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!f) throw std::runtime_error("write failed: " + path);
}

GrayImage to_grayscale(const RgbImage& img) {
    GrayImage out(img.width, img.height);
    for (size_t i = 0, n = size_t(img.width) * img.height; i < n; ++i) {
        const uint8_t* p = &img.pixels[i * 3];
        // integer form of round(0.299 r + 0.587 g + 0.114 b), half up
        uint32_t y = (299u * p[0] + 587u * p[1] + 114u * p[2] + 500u) / 1000u;
        out.pixels[i] = uint8_t(y);
    }
    return out;
}

BinaryImage threshold_global(const GrayImage& img, uint8_t t) {
    BinaryImage out(img.width, img.height);
    for (uint32_t y = 0; y < img.height; ++y)
        for (uint32_t x = 0; x < img.width; ++x)
            if (img.at(x, y) < t) out.set(x, y, true);
    return out;
}

IntegralImage integral(const GrayImage& img) {
    IntegralImage ii;
    ii.width = img.width;
    ii.height = img.height;
    ii.sums.assign(size_t(img.width + 1) * (img.height + 1), 0);
    const size_t stride = img.width + 1;
    for (uint32_t y = 0; y < img.height; ++y) {
        uint64_t row = 0;
        for (uint32_t x = 0; x < img.width; ++x) {
            row += img.at(x, y);
            ii.sums[size_t(y + 1) * stride + (x + 1)] = ii.sums[size_t(y) * stride + (x + 1)] + row;
        }
    }
    return ii;
}

BinaryImage threshold_adaptive(const GrayImage& img, uint32_t window, int c) {
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("threshold_adaptive: window must be odd and >= 3");
    const int64_t r = window / 2;
    const IntegralImage ii = integral(img);
    BinaryImage out(img.width, img.height);
    for (int64_t y = 0; y < img.height; ++y) {
        for (int64_t x = 0; x < img.width; ++x) {
            uint32_t x0 = uint32_t(std::max<int64_t>(0, x - r));
            uint32_t y0 = uint32_t(std::max<int64_t>(0, y - r));
            uint32_t x1 = uint32_t(std::min<int64_t>(img.width, x + r + 1));
            uint32_t y1 = uint32_t(std::min<int64_t>(img.height, y + r + 1));
            int64_t count = int64_t(x1 - x0) * (y1 - y0);
            int64_t sum = int64_t(ii.window(x0, y0, x1, y1));
            // pixel < sum/count - c, exactly
            if ((int64_t(img.at(uint32_t(x), uint32_t(y))) + c) * count < sum)
                out.set(uint32_t(x), uint32_t(y), true);
        }
    }
    return out;
}

}  // namespace arc
