#pragma once

#include <optional>
#include <string>
#include <vector>

#include "arc/image.hpp"

namespace arc {

/// A named canonical patch to match against.
struct Template {
    std::string label;
    GrayImage image;
};

/// Ordered template collection with the acceptance gate for matches.
struct TemplateLibrary {
    std::vector<Template> templates;
    double min_score = 0.7;
};

struct MatchResult {
    std::string label;
    double score = 0;
};

/// Zero-mean normalized cross-correlation of two equal-size images,
/// computed in 64-bit reals: sum((a-mean_a)(b-mean_b)) over the geometric
/// mean of the two deviation energies.  Range [-1, 1].  Throws
/// std::invalid_argument on dimension mismatch or when either image is
/// constant (zero variance).
double ncc(const GrayImage& a, const GrayImage& b);

/// Scores the patch against every template and returns the best label when
/// its score reaches the library's min_score, std::nullopt otherwise.  Ties
/// go to the earlier template.  Throws std::invalid_argument on an empty
/// library; dimension mismatches propagate from ncc.
std::optional<MatchResult> best_match(const GrayImage& patch, const TemplateLibrary& lib);

/// Loads every .pgm file in `dir` as a template, labeled by file name
/// without extension, in lexicographic name order.  Throws
/// std::runtime_error when the directory cannot be read.
TemplateLibrary load_template_library(const std::string& dir, double min_score = 0.7);

}  // namespace arc
