#include "arc/shape_mlp.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "arc/rng.hpp"

namespace arc {

namespace {

constexpr double kSampleStep = 0.25;
constexpr double kMinReach = 0.5;

double sigmoid(double t) { return 1.0 / (1.0 + std::exp(-t)); }

/// z = W a + b for one layer.
std::vector<double> affine(const MlpLayer& layer, const std::vector<double>& a) {
    std::vector<double> z(static_cast<size_t>(layer.out));
    for (int o = 0; o < layer.out; ++o) {
        double s = layer.biases[o];
        const double* row = layer.weights.data() + static_cast<size_t>(o) * layer.in;
        for (int i = 0; i < layer.in; ++i) s += row[i] * a[i];
        z[o] = s;
    }
    return z;
}

void softmax_in_place(std::vector<double>& z) {
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0;
    for (double& v : z) {
        v = std::exp(v - m);
        sum += v;
    }
    for (double& v : z) v /= sum;
}

/// Runs the forward pass keeping every layer's activation (index 0 = input).
std::vector<std::vector<double>> forward_trace(const MlpModel& model,
                                               const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != model.input_dim())
        throw std::invalid_argument("mlp: input dimension mismatch");
    std::vector<std::vector<double>> acts;
    acts.reserve(model.layers.size() + 1);
    acts.push_back(x);
    for (size_t l = 0; l < model.layers.size(); ++l) {
        std::vector<double> z = affine(model.layers[l], acts.back());
        if (l + 1 < model.layers.size()) {
            for (double& v : z) v = sigmoid(v);
        } else {
            softmax_in_place(z);
        }
        acts.push_back(std::move(z));
    }
    return acts;
}

}  // namespace

FlagVector extract_flag_vector(const RegionNode& node, const BinaryImage& mask, int rays) {
    if (rays <= 0) throw std::invalid_argument("extract_flag_vector: ray count must be positive");
    const RegionMask region = region_pixels(node, mask);

    const auto mask_w = static_cast<int32_t>(region.mask.width());
    const auto mask_h = static_cast<int32_t>(region.mask.height());
    uint64_t count = 0;
    double cx = 0, cy = 0;
    for (int32_t y = 0; y < mask_h; ++y) {
        for (int32_t x = 0; x < mask_w; ++x) {
            if (!region.mask.get(x, y)) continue;
            ++count;
            cx += x;
            cy += y;
        }
    }
    cx = cx / static_cast<double>(count);
    cy = cy / static_cast<double>(count);

    const double diag = std::hypot(static_cast<double>(mask_w), static_cast<double>(mask_h));
    FlagVector coverage(static_cast<size_t>(rays), 0.0);
    double reach = 0;
    for (int k = 0; k < rays; ++k) {
        const double theta = 2.0 * std::numbers::pi * k / rays;
        const double dx = std::cos(theta);
        const double dy = std::sin(theta);
        for (double t = kSampleStep; t <= diag; t += kSampleStep) {
            const auto sx = static_cast<int32_t>(std::floor(cx + t * dx + 0.5));
            const auto sy = static_cast<int32_t>(std::floor(cy + t * dy + 0.5));
            if (!region.mask.in_bounds(sx, sy) || !region.mask.get(sx, sy)) continue;
            coverage[k] += kSampleStep;
            reach = std::max(reach, t);
        }
    }
    if (reach <= kMinReach) return FlagVector(static_cast<size_t>(rays), 0.0);
    for (double& v : coverage) v /= reach;
    return coverage;
}

FlagVector canonicalize(const FlagVector& v) {
    const size_t n = v.size();
    if (n <= 1) return v;
    size_t best = 0;
    for (size_t s = 1; s < n; ++s) {
        for (size_t i = 0; i < n; ++i) {
            const double a = v[(s + i) % n];
            const double b = v[(best + i) % n];
            if (a != b) {
                if (a > b) best = s;
                break;
            }
        }
    }
    FlagVector out(n);
    for (size_t i = 0; i < n; ++i) out[i] = v[(best + i) % n];
    return out;
}

MlpModel mlp_init(const std::vector<int>& layer_dims, uint64_t seed) {
    if (layer_dims.size() < 2) throw std::invalid_argument("mlp_init: need at least two layers");
    for (const int d : layer_dims)
        if (d < 1) throw std::invalid_argument("mlp_init: layer dims must be positive");

    MlpModel model;
    model.layer_dims = layer_dims;
    SplitMix64 rng(seed);
    for (size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        MlpLayer layer;
        layer.in = layer_dims[l];
        layer.out = layer_dims[l + 1];
        const double bound = 1.0 / std::sqrt(static_cast<double>(layer.in));
        layer.weights.resize(static_cast<size_t>(layer.in) * layer.out);
        for (double& w : layer.weights) w = bound * (2.0 * rng.unit() - 1.0);
        layer.biases.assign(static_cast<size_t>(layer.out), 0.0);
        model.layers.push_back(std::move(layer));
    }
    return model;
}

std::vector<double> mlp_forward(const MlpModel& model, const std::vector<double>& x) {
    return forward_trace(model, x).back();
}

MlpGradients mlp_backprop(const MlpModel& model, const std::vector<double>& x, int class_index) {
    if (class_index < 0 || class_index >= model.class_count())
        throw std::invalid_argument("mlp_backprop: class index out of range");
    const std::vector<std::vector<double>> acts = forward_trace(model, x);
    const std::vector<double>& probs = acts.back();

    MlpGradients grads;
    grads.loss = -std::log(probs[static_cast<size_t>(class_index)]);
    grads.layers.resize(model.layers.size());

    // Softmax + cross-entropy collapse to delta = p - onehot at the output.
    std::vector<double> delta = probs;
    delta[static_cast<size_t>(class_index)] -= 1.0;
    for (size_t l = model.layers.size(); l-- > 0;) {
        const MlpLayer& layer = model.layers[l];
        const std::vector<double>& a_in = acts[l];
        MlpLayer& g = grads.layers[l];
        g.in = layer.in;
        g.out = layer.out;
        g.weights.resize(layer.weights.size());
        g.biases.resize(layer.biases.size());
        for (int o = 0; o < layer.out; ++o) {
            g.biases[o] = delta[o];
            double* row = g.weights.data() + static_cast<size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) row[i] = delta[o] * a_in[i];
        }
        if (l == 0) break;
        std::vector<double> prev(static_cast<size_t>(layer.in), 0.0);
        for (int o = 0; o < layer.out; ++o) {
            const double* row = layer.weights.data() + static_cast<size_t>(o) * layer.in;
            for (int i = 0; i < layer.in; ++i) prev[i] += row[i] * delta[o];
        }
        for (int i = 0; i < layer.in; ++i) prev[i] *= a_in[i] * (1.0 - a_in[i]);
        delta = std::move(prev);
    }
    return grads;
}

std::vector<double> mlp_train(MlpModel& model, const LabeledDataset& data, const TrainConfig& cfg) {
    if (data.samples.empty()) throw std::invalid_argument("mlp_train: empty dataset");
    if (cfg.learning_rate <= 0) throw std::invalid_argument("mlp_train: learning rate must be positive");
    if (cfg.epochs < 0) throw std::invalid_argument("mlp_train: negative epoch count");
    for (const auto& [x, c] : data.samples) {
        if (static_cast<int>(x.size()) != model.input_dim())
            throw std::invalid_argument("mlp_train: sample dimension mismatch");
        if (c < 0 || c >= model.class_count())
            throw std::invalid_argument("mlp_train: class index out of range");
    }

    SplitMix64 rng(cfg.seed);
    std::vector<size_t> order(data.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;

    std::vector<double> trace;
    trace.reserve(static_cast<size_t>(cfg.epochs));
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        if (cfg.shuffle) {
            for (size_t i = order.size() - 1; i > 0; --i)
                std::swap(order[i], order[rng.below(i + 1)]);
        }
        double loss_sum = 0;
        for (const size_t idx : order) {
            const auto& [x, c] = data.samples[idx];
            const MlpGradients grads = mlp_backprop(model, x, c);
            loss_sum += grads.loss;
            for (size_t l = 0; l < model.layers.size(); ++l) {
                MlpLayer& layer = model.layers[l];
                const MlpLayer& g = grads.layers[l];
                for (size_t k = 0; k < layer.weights.size(); ++k)
                    layer.weights[k] -= cfg.learning_rate * g.weights[k];
                for (size_t k = 0; k < layer.biases.size(); ++k)
                    layer.biases[k] -= cfg.learning_rate * g.biases[k];
            }
        }
        trace.push_back(loss_sum / static_cast<double>(data.samples.size()));
    }
    return trace;
}

Classification mlp_classify(const MlpModel& model, const std::vector<double>& v) {
    if (static_cast<int>(model.labels.size()) != model.class_count())
        throw std::invalid_argument("mlp_classify: model carries no class labels");
    const std::vector<double> probs = mlp_forward(model, v);
    size_t best = 0;
    for (size_t i = 1; i < probs.size(); ++i)
        if (probs[i] > probs[best]) best = i;
    return {model.labels[best], probs[best]};
}

std::string model_save(const MlpModel& model) {
    if (static_cast<int>(model.labels.size()) != model.class_count())
        throw std::invalid_argument("model_save: label count must match class count");
    for (const std::string& label : model.labels) {
        if (label.empty()) throw std::invalid_argument("model_save: empty label");
        for (const char ch : label)
            if (std::isspace(static_cast<unsigned char>(ch)))
                throw std::invalid_argument("model_save: label contains whitespace");
    }

    std::string out = "ARMLP 1\n";
    char buf[64];
    for (size_t i = 0; i < model.layer_dims.size(); ++i) {
        if (i) out += ' ';
        out += std::to_string(model.layer_dims[i]);
    }
    out += '\n';
    for (size_t i = 0; i < model.labels.size(); ++i) {
        if (i) out += ' ';
        out += model.labels[i];
    }
    out += '\n';
    for (const MlpLayer& layer : model.layers) {
        for (int o = 0; o < layer.out; ++o) {
            for (int i = 0; i < layer.in; ++i) {
                std::snprintf(buf, sizeof buf, "%.17g",
                              layer.weights[static_cast<size_t>(o) * layer.in + i]);
                out += buf;
                out += ' ';
            }
            std::snprintf(buf, sizeof buf, "%.17g", layer.biases[o]);
            out += buf;
            out += '\n';
        }
    }
    return out;
}

MlpModel model_load(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "ARMLP 1")
        throw std::runtime_error("model file: bad header");

    if (!std::getline(in, line)) throw std::runtime_error("model file: missing layer dims");
    MlpModel model;
    {
        std::istringstream dims(line);
        int d;
        while (dims >> d) model.layer_dims.push_back(d);
        if (!dims.eof()) throw std::runtime_error("model file: bad layer dims");
    }
    if (model.layer_dims.size() < 2) throw std::runtime_error("model file: need at least two layers");
    for (const int d : model.layer_dims)
        if (d < 1) throw std::runtime_error("model file: bad layer dims");

    if (!std::getline(in, line)) throw std::runtime_error("model file: missing labels");
    {
        std::istringstream labels(line);
        std::string label;
        while (labels >> label) model.labels.push_back(label);
    }
    if (static_cast<int>(model.labels.size()) != model.layer_dims.back())
        throw std::runtime_error("model file: label count does not match class count");

    for (size_t l = 0; l + 1 < model.layer_dims.size(); ++l) {
        MlpLayer layer;
        layer.in = model.layer_dims[l];
        layer.out = model.layer_dims[l + 1];
        layer.weights.resize(static_cast<size_t>(layer.in) * layer.out);
        layer.biases.resize(static_cast<size_t>(layer.out));
        for (int o = 0; o < layer.out; ++o) {
            if (!std::getline(in, line)) throw std::runtime_error("model file: missing weight row");
            std::istringstream row(line);
            for (int i = 0; i < layer.in; ++i)
                if (!(row >> layer.weights[static_cast<size_t>(o) * layer.in + i]))
                    throw std::runtime_error("model file: short weight row");
            if (!(row >> layer.biases[o])) throw std::runtime_error("model file: missing bias");
            double extra;
            if (row >> extra) throw std::runtime_error("model file: oversized weight row");
        }
        model.layers.push_back(std::move(layer));
    }
    std::string rest;
    while (std::getline(in, rest))
        if (!rest.empty()) throw std::runtime_error("model file: trailing content");
    return model;
}

void model_save_file(const MlpModel& model, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path);
    const std::string text = model_save(model);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw std::runtime_error("cannot write " + path);
}

MlpModel model_load_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return model_load(buf.str());
}

}  // namespace arc
