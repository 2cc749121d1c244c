#pragma once

#include <chrono>
#include <cstdint>
#include <fstream>
#include <memory>
#include <numeric>
#include <string>
#include <vector>

#include <json.hpp>

#include "advisor.hpp"
#include "dataset.hpp"
#include "layers.hpp"

namespace sg {

// Seeded training run: validation accuracy at each checkpoint plus a final
// evaluation (on the test set when one is supplied to train()).
struct RunResult {
    std::string config_id;
    std::uint64_t seed = 0;
    std::vector<int> checkpoint_steps;
    std::vector<double> checkpoint_accuracy;
    double final_test_accuracy = 0.0;
    std::string final_eval_split; // "test" or "validation"
    double wall_time_seconds = 0.0;
};

inline void to_json(nlohmann::json& j, const RunResult& r) {
    j = nlohmann::json{{"config_id", r.config_id},
                       {"seed", r.seed},
                       {"checkpoint_steps", r.checkpoint_steps},
                       {"checkpoint_accuracy", r.checkpoint_accuracy},
                       {"final_test_accuracy", r.final_test_accuracy},
                       {"final_eval_split", r.final_eval_split},
                       {"wall_time_seconds", r.wall_time_seconds}};
}

inline void from_json(const nlohmann::json& j, RunResult& r) {
    j.at("config_id").get_to(r.config_id);
    j.at("seed").get_to(r.seed);
    j.at("checkpoint_steps").get_to(r.checkpoint_steps);
    j.at("checkpoint_accuracy").get_to(r.checkpoint_accuracy);
    j.at("final_test_accuracy").get_to(r.final_test_accuracy);
    r.final_eval_split = j.value("final_eval_split", "validation");
    r.wall_time_seconds = j.value("wall_time_seconds", 0.0);
}

// Ordered layer stack realizing an ArchitectureSpec. Single-owner while
// training; distinct instances are independent.
class Network {
public:
    Network(ArchitectureSpec spec, std::uint64_t seed) : spec_(std::move(spec)), seed_(seed) {
        if (spec_.conv_blocks.empty() || spec_.fc_layers.empty())
            throw ShapeMismatch("spec needs at least one conv block and one FC layer");
        const int pixel_count = spec_.input_height * spec_.input_width * spec_.input_channels;
        if (spec_.fc_layers.front() != pixel_count)
            throw ShapeMismatch("fc_layers[0] = " + std::to_string(spec_.fc_layers.front()) +
                                " but input has " + std::to_string(pixel_count) + " values");

        Rng rng(seed);
        int in_ch = spec_.input_channels;
        for (int kernels : spec_.conv_blocks) {
            // same padding keeps spatial dims; each block halves them by pooling
            const int pad = (spec_.kernel_size - 1) / 2;
            layers_.push_back(std::make_unique<Conv2d>(in_ch, kernels, spec_.kernel_size,
                                                       spec_.stride, pad, rng));
            layers_.push_back(std::make_unique<ReLU>());
            if (spec_.pool > 0)
                layers_.push_back(std::make_unique<MaxPool>(spec_.pool));
            in_ch = kernels;
        }
        layers_.push_back(std::make_unique<Flatten>());

        auto [h, w] = output_spatial(spec_);
        int prev = h * w * in_ch;
        for (int units : spec_.fc_layers) {
            layers_.push_back(std::make_unique<Dense>(prev, units, rng));
            layers_.push_back(std::make_unique<ReLU>());
            prev = units;
        }
        layers_.push_back(std::make_unique<Dropout>(spec_.dropout_rate, rng.next_u64()));
        layers_.push_back(std::make_unique<Dense>(prev, spec_.num_classes, rng));
    }

    const ArchitectureSpec& spec() const { return spec_; }
    std::uint64_t seed() const { return seed_; }

    Tensor forward(const Tensor& x, Mode mode) {
        Tensor cur = x;
        for (auto& layer : layers_)
            cur = layer->forward(cur, mode);
        return cur;
    }

    Tensor backward(const Tensor& grad_logits) {
        Tensor cur = grad_logits;
        for (auto it = layers_.rbegin(); it != layers_.rend(); ++it)
            cur = (*it)->backward(cur);
        return cur;
    }

    std::vector<Tensor*> params() {
        std::vector<Tensor*> out;
        for (auto& layer : layers_)
            for (Tensor* t : layer->params())
                out.push_back(t);
        return out;
    }

    std::vector<Tensor*> grads() {
        std::vector<Tensor*> out;
        for (auto& layer : layers_)
            for (Tensor* t : layer->grads())
                out.push_back(t);
        return out;
    }

    void zero_grads() {
        for (Tensor* g : grads())
            g->zero();
    }

    std::size_t parameter_count() {
        std::size_t n = 0;
        for (Tensor* p : params())
            n += p->numel();
        return n;
    }

    bool parameters_finite() {
        for (Tensor* p : params())
            for (float v : p->data)
                if (!std::isfinite(v))
                    return false;
        return true;
    }

private:
    ArchitectureSpec spec_;
    std::uint64_t seed_;
    std::vector<std::unique_ptr<Layer>> layers_;
};

inline Network build_network(const ArchitectureSpec& spec, std::uint64_t seed) {
    return Network(spec, seed);
}

// theta <- theta - lr * grad for every parameter tensor.
inline void sgd_step(Network& net, double learning_rate) {
    auto params = net.params();
    auto grads = net.grads();
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!params[i]->same_shape(*grads[i]))
            throw ShapeMismatch("gradient shape " + shape_str(grads[i]->shape) +
                                " vs parameter " + shape_str(params[i]->shape));
        const float lr = static_cast<float>(learning_rate);
        for (std::size_t j = 0; j < params[i]->data.size(); ++j)
            params[i]->data[j] -= lr * grads[i]->data[j];
    }
}

namespace detail {

// Gathers dataset images by index into a [B, C, H, W] float tensor in
// [0, 1], converting the interleaved HWC storage to planar CHW.
inline void fill_batch(const ImageDataset& ds, const std::vector<std::size_t>& indices,
                       std::size_t begin, std::size_t count, Tensor& x, std::vector<int>& y) {
    const int c = ds.channels, h = ds.height, w = ds.width;
    x = Tensor({static_cast<int>(count), c, h, w});
    y.resize(count);
    for (std::size_t b = 0; b < count; ++b) {
        const std::size_t idx = indices[begin + b];
        auto im = ds.image(idx);
        float* dst = x.data.data() + b * std::size_t(c) * h * w;
        for (int ch = 0; ch < c; ++ch)
            for (int p = 0; p < h * w; ++p)
                dst[ch * h * w + p] = float(im[std::size_t(p) * c + ch]) / 255.0f;
        y[b] = ds.labels[idx];
    }
}

} // namespace detail

// Fraction of argmax-correct predictions, dropout in eval mode.
inline double evaluate(Network& net, const ImageDataset& ds, std::size_t batch_size = 256) {
    if (ds.empty())
        throw EmptyDataset("evaluate");
    std::vector<std::size_t> indices(ds.size());
    std::iota(indices.begin(), indices.end(), std::size_t{0});

    std::size_t correct = 0;
    Tensor x;
    std::vector<int> y;
    for (std::size_t at = 0; at < ds.size(); at += batch_size) {
        const std::size_t count = std::min(batch_size, ds.size() - at);
        detail::fill_batch(ds, indices, at, count, x, y);
        Tensor logits = net.forward(x, Mode::Eval);
        const int classes = logits.dim(1);
        for (std::size_t b = 0; b < count; ++b) {
            const float* row = logits.data.data() + b * std::size_t(classes);
            int best = 0;
            for (int j = 1; j < classes; ++j)
                if (row[j] > row[best])
                    best = j;
            if (best == y[b])
                ++correct;
        }
    }
    return double(correct) / double(ds.size());
}

struct TrainOptions {
    int steps = 2000;
    std::size_t batch_size = 32;
    double learning_rate = 0.01;
    std::vector<int> checkpoint_steps = {10, 500, 1000, 1500, 2000};
    std::uint64_t seed = 1;
    const ImageDataset* test_set = nullptr; // used for the final evaluation when set
    std::string config_id;
};

// Seeded mini-batch SGD. Batches walk a Fisher-Yates permutation of the
// training indices, reshuffling when exhausted; validation accuracy is
// recorded at each checkpoint step.
inline RunResult train(Network& net, const ImageDataset& train_set, const ImageDataset& val_set,
                       const TrainOptions& opt) {
    if (train_set.empty() || val_set.empty())
        throw EmptyDataset("train");
    for (std::size_t i = 0; i + 1 < opt.checkpoint_steps.size(); ++i)
        if (opt.checkpoint_steps[i] > opt.checkpoint_steps[i + 1])
            throw DomainError("checkpoint_steps must be sorted ascending");
    if (!opt.checkpoint_steps.empty() && opt.checkpoint_steps.back() > opt.steps)
        throw DomainError("checkpoints beyond the last step");

    const auto t0 = std::chrono::steady_clock::now();
    RunResult result;
    result.config_id = opt.config_id;
    result.seed = opt.seed;

    Rng batch_rng(opt.seed ^ 0x9e3779b97f4a7c15ULL);
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    batch_rng.shuffle(order);
    std::size_t cursor = 0;

    Tensor x, grad;
    std::vector<int> y;
    std::size_t next_checkpoint = 0;

    for (int step = 1; step <= opt.steps; ++step) {
        if (cursor + opt.batch_size > order.size()) {
            batch_rng.shuffle(order);
            cursor = 0;
        }
        detail::fill_batch(train_set, order, cursor, opt.batch_size, x, y);
        cursor += opt.batch_size;

        Tensor logits = net.forward(x, Mode::Train);
        softmax_cross_entropy_batch(logits, y, grad);
        net.zero_grads();
        net.backward(grad);
        sgd_step(net, opt.learning_rate);

        if (next_checkpoint < opt.checkpoint_steps.size() &&
            step == opt.checkpoint_steps[next_checkpoint]) {
            result.checkpoint_steps.push_back(step);
            result.checkpoint_accuracy.push_back(evaluate(net, val_set));
            ++next_checkpoint;
        }
    }

    if (opt.test_set != nullptr) {
        result.final_test_accuracy = evaluate(net, *opt.test_set);
        result.final_eval_split = "test";
    } else {
        result.final_test_accuracy =
            result.checkpoint_accuracy.empty() ? evaluate(net, val_set)
                                               : result.checkpoint_accuracy.back();
        result.final_eval_split = "validation";
    }
    result.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

// Little-endian parameter container: magic 'SGN1', tensor count, then per
// tensor a rank + dims header followed by the raw float32 buffer.
constexpr std::uint32_t kModelMagic = 0x314E4753; // "SGN1"

inline void save_params(Network& net, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw TruncatedFile(path + " cannot be opened for writing");
    auto put32 = [&](std::uint32_t v) { f.write(reinterpret_cast<const char*>(&v), 4); };
    put32(kModelMagic);
    auto params = net.params();
    put32(static_cast<std::uint32_t>(params.size()));
    for (Tensor* t : params) {
        put32(static_cast<std::uint32_t>(t->shape.size()));
        for (int d : t->shape)
            put32(static_cast<std::uint32_t>(d));
        f.write(reinterpret_cast<const char*>(t->data.data()),
                static_cast<std::streamsize>(t->data.size() * sizeof(float)));
    }
}

inline void load_params(Network& net, const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f)
        throw TruncatedFile(path + " cannot be opened");
    auto get32 = [&]() {
        std::uint32_t v = 0;
        f.read(reinterpret_cast<char*>(&v), 4);
        if (!f)
            throw TruncatedFile(path);
        return v;
    };
    if (get32() != kModelMagic)
        throw BadMagic(path + " is not a parameter container");
    auto params = net.params();
    if (get32() != params.size())
        throw ShapeMismatch(path + " tensor count differs from network");
    for (Tensor* t : params) {
        const std::uint32_t rank = get32();
        if (rank != t->shape.size())
            throw ShapeMismatch(path + " tensor rank differs from network");
        for (int d : t->shape)
            if (get32() != static_cast<std::uint32_t>(d))
                throw ShapeMismatch(path + " tensor dims differ from network");
        f.read(reinterpret_cast<char*>(t->data.data()),
               static_cast<std::streamsize>(t->data.size() * sizeof(float)));
        if (!f)
            throw TruncatedFile(path);
    }
}

} // namespace sg
