#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "arc/image.hpp"
#include "arc/segmentation.hpp"

namespace arc {

/// Number of rays in the default shape descriptor.
constexpr int kDefaultRayCount = 70;

/// Ray-coverage shape descriptor; values in [0,1].
using FlagVector = std::vector<double>;

/// Casts `rays` rays from the region's centroid (angles 2*pi*k/rays from the
/// +x axis, y downward) and samples each at 0.25 px steps out to the
/// bounding-box diagonal.  Ray k scores the total foreground coverage along
/// it (0.25 px per foreground sample); all rays are normalized by the
/// distance of the farthest foreground sample in any direction, which makes
/// the descriptor scale-invariant and keeps hollow shapes distinguishable
/// from filled ones.  A region whose farthest sample lies no farther than
/// 0.5 px (e.g. a single pixel) yields the all-zero vector.  Throws
/// std::invalid_argument for an empty region or a non-positive ray count.
FlagVector extract_flag_vector(const RegionNode& node, const BinaryImage& mask,
                               int rays = kDefaultRayCount);

/// The cyclic shift of `v` that is lexicographically greatest among all
/// shifts; gives discrete rotation invariance of the descriptor.
FlagVector canonicalize(const FlagVector& v);

/// One fully connected layer: `weights` is out x in, row-major.
struct MlpLayer {
    int in = 0;
    int out = 0;
    std::vector<double> weights;
    std::vector<double> biases;
};

/// Feed-forward classifier: sigmoid hidden layers, softmax output.
struct MlpModel {
    std::vector<int> layer_dims;  ///< [input, hidden..., classes]
    std::vector<MlpLayer> layers;
    std::vector<std::string> labels;  ///< One per class; may be empty for untrained math use.

    [[nodiscard]] int input_dim() const { return layer_dims.front(); }
    [[nodiscard]] int class_count() const { return layer_dims.back(); }
};

struct LabeledDataset {
    /// (descriptor, class index); all descriptors share one dimension.
    std::vector<std::pair<std::vector<double>, int>> samples;
    std::vector<std::string> labels;
};

struct TrainConfig {
    double learning_rate = 0.1;
    int epochs = 500;
    uint64_t seed = 1;
    bool shuffle = true;
};

/// Gradients with the same shapes as the model's layers, plus the sample loss.
struct MlpGradients {
    std::vector<MlpLayer> layers;
    double loss = 0;
};

struct Classification {
    std::string label;
    double confidence = 0;
};

/// Fresh model with weights uniform in (-1/sqrt(fan_in), +1/sqrt(fan_in))
/// from a SplitMix64 stream and zero biases; deterministic in `seed`.
/// Throws std::invalid_argument for fewer than two layers or a dim < 1.
MlpModel mlp_init(const std::vector<int>& layer_dims, uint64_t seed);

/// Class probabilities for one input (softmax with max-logit subtraction).
std::vector<double> mlp_forward(const MlpModel& model, const std::vector<double>& x);

/// Cross-entropy loss -log p[class_index] and its exact gradients.
MlpGradients mlp_backprop(const MlpModel& model, const std::vector<double>& x, int class_index);

/// Per-sample stochastic gradient descent over the dataset; one Fisher-Yates
/// shuffle per epoch from the seeded stream when cfg.shuffle is set.  Loss
/// is recorded before each update; returns the per-epoch mean-loss trace
/// (length cfg.epochs).  Deterministic given the seed.
std::vector<double> mlp_train(MlpModel& model, const LabeledDataset& data, const TrainConfig& cfg);

/// Argmax classification (ties to the lowest class index); confidence is
/// the winning probability.  The model must carry labels.
Classification mlp_classify(const MlpModel& model, const std::vector<double>& v);

/// Text serialization: header line "ARMLP 1", a layer-dims line, a labels
/// line, then per layer one line per output unit holding its weights and
/// bias with 17 significant digits.  Round-trips bit-exactly.
std::string model_save(const MlpModel& model);
MlpModel model_load(const std::string& text);

/// File convenience wrappers around model_save / model_load.
void model_save_file(const MlpModel& model, const std::string& path);
MlpModel model_load_file(const std::string& path);

}  // namespace arc
