#include "arc/template_match.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <stdexcept>

namespace arc {

double ncc(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("ncc: dimension mismatch");
    const size_t n = a.pixels.size();
    if (n == 0) throw std::invalid_argument("ncc: empty image");

    uint64_t sum_a = 0, sum_b = 0;
    for (size_t i = 0; i < n; ++i) {
        sum_a += a.pixels[i];
        sum_b += b.pixels[i];
    }
    const double mean_a = static_cast<double>(sum_a) / static_cast<double>(n);
    const double mean_b = static_cast<double>(sum_b) / static_cast<double>(n);

    double cov = 0, var_a = 0, var_b = 0;
    for (size_t i = 0; i < n; ++i) {
        const double da = a.pixels[i] - mean_a;
        const double db = b.pixels[i] - mean_b;
        cov += da * db;
        var_a += da * da;
        var_b += db * db;
    }
    if (var_a == 0 || var_b == 0) throw std::invalid_argument("ncc: constant image has no correlation");
    return cov / std::sqrt(var_a * var_b);
}

std::optional<MatchResult> best_match(const GrayImage& patch, const TemplateLibrary& lib) {
    if (lib.templates.empty()) throw std::invalid_argument("best_match: empty template library");
    const Template* best = nullptr;
    double best_score = 0;
    for (const Template& t : lib.templates) {
        const double score = ncc(patch, t.image);
        if (best == nullptr || score > best_score) {
            best = &t;
            best_score = score;
        }
    }
    if (best_score < lib.min_score) return std::nullopt;
    return MatchResult{best->label, best_score};
}

TemplateLibrary load_template_library(const std::string& dir, double min_score) {
    namespace fs = std::filesystem;
    TemplateLibrary lib;
    lib.min_score = min_score;
    std::error_code ec;
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.is_regular_file() && entry.path().extension() == ".pgm")
            files.push_back(entry.path());
    }
    if (ec) throw std::runtime_error("cannot read template directory " + dir);
    std::sort(files.begin(), files.end(),
              [](const fs::path& x, const fs::path& y) { return x.filename() < y.filename(); });
    for (const fs::path& f : files) lib.templates.push_back({f.stem().string(), pgm_load(f.string())});
    return lib;
}

}  // namespace arc
