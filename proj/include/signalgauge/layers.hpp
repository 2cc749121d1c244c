#pragma once

#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "errors.hpp"
#include "rng.hpp"
#include "tensor.hpp"

namespace sg {

enum class Mode { Train, Eval };

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& x, Mode mode) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<Tensor*> params() { return {}; }
    virtual std::vector<Tensor*> grads() { return {}; }
    virtual std::string name() const = 0;
};

namespace detail {

// Glorot uniform: U(-limit, limit) with limit = sqrt(6 / (fan_in + fan_out)).
inline void glorot_fill(Tensor& t, int fan_in, int fan_out, Rng& rng) {
    const double limit = std::sqrt(6.0 / (double(fan_in) + double(fan_out)));
    for (float& v : t.data)
        v = static_cast<float>((2.0 * rng.next_double() - 1.0) * limit);
}

} // namespace detail

// 2-D convolution over [N, C, H, W] input via im2col + gemm.
// out_dim = (in_dim + 2*padding - kernel) / stride + 1.
class Conv2d : public Layer {
public:
    Conv2d(int in_channels, int out_channels, int kernel, int stride, int padding, Rng& rng)
        : in_ch_(in_channels), out_ch_(out_channels), k_(kernel), stride_(stride),
          pad_(padding),
          weights_({out_channels, in_channels * kernel * kernel}),
          bias_({out_channels}),
          grad_w_({out_channels, in_channels * kernel * kernel}),
          grad_b_({out_channels}) {
        detail::glorot_fill(weights_, in_ch_ * k_ * k_, out_ch_ * k_ * k_, rng);
    }

    Tensor forward(const Tensor& x, Mode) override {
        if (x.shape.size() != 4 || x.dim(1) != in_ch_)
            throw ShapeMismatch("Conv2d expects [N," + std::to_string(in_ch_) + ",H,W], got " +
                                shape_str(x.shape));
        const int n = x.dim(0), h = x.dim(2), w = x.dim(3);
        if (h + 2 * pad_ < k_ || w + 2 * pad_ < k_)
            throw ShapeMismatch("Conv2d kernel does not fit input " + shape_str(x.shape));
        out_h_ = (h + 2 * pad_ - k_) / stride_ + 1;
        out_w_ = (w + 2 * pad_ - k_) / stride_ + 1;
        in_h_ = h;
        in_w_ = w;

        const int patch = in_ch_ * k_ * k_;
        const int spatial = out_h_ * out_w_;
        cols_ = Tensor({n, patch, spatial});
        Tensor out({n, out_ch_, out_h_, out_w_});

        for (int s = 0; s < n; ++s) {
            float* col = cols_.data.data() + std::size_t(s) * patch * spatial;
            im2col(x.data.data() + std::size_t(s) * in_ch_ * h * w, col);
            float* o = out.data.data() + std::size_t(s) * out_ch_ * spatial;
            gemm(false, false, out_ch_, spatial, patch, 1.0f, weights_.data.data(), patch, col,
                 spatial, 0.0f, o, spatial);
            for (int oc = 0; oc < out_ch_; ++oc) {
                const float b = bias_.data[static_cast<std::size_t>(oc)];
                for (int p = 0; p < spatial; ++p)
                    o[oc * spatial + p] += b;
            }
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out) override {
        const int n = grad_out.dim(0);
        const int patch = in_ch_ * k_ * k_;
        const int spatial = out_h_ * out_w_;
        Tensor grad_in({n, in_ch_, in_h_, in_w_});
        Tensor dcol({patch, spatial});

        for (int s = 0; s < n; ++s) {
            const float* go = grad_out.data.data() + std::size_t(s) * out_ch_ * spatial;
            const float* col = cols_.data.data() + std::size_t(s) * patch * spatial;
            // dW += dY * cols^T
            gemm(false, true, out_ch_, patch, spatial, 1.0f, go, spatial, col, spatial, 1.0f,
                 grad_w_.data.data(), patch);
            // dcols = W^T * dY
            gemm(true, false, patch, spatial, out_ch_, 1.0f, weights_.data.data(), patch, go,
                 spatial, 0.0f, dcol.data.data(), spatial);
            col2im(dcol.data.data(),
                   grad_in.data.data() + std::size_t(s) * in_ch_ * in_h_ * in_w_);
            for (int oc = 0; oc < out_ch_; ++oc) {
                double acc = 0.0;
                for (int p = 0; p < spatial; ++p)
                    acc += go[oc * spatial + p];
                grad_b_.data[static_cast<std::size_t>(oc)] += static_cast<float>(acc);
            }
        }
        return grad_in;
    }

    std::vector<Tensor*> params() override { return {&weights_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&grad_w_, &grad_b_}; }
    std::string name() const override { return "conv" + std::to_string(out_ch_); }

    Tensor& weights() { return weights_; }
    Tensor& bias() { return bias_; }

private:
    void im2col(const float* img, float* col) const {
        const int spatial = out_h_ * out_w_;
        for (int c = 0; c < in_ch_; ++c) {
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx) {
                    float* dst = col + ((c * k_ + ky) * k_ + kx) * spatial;
                    for (int oy = 0; oy < out_h_; ++oy) {
                        const int iy = oy * stride_ + ky - pad_;
                        for (int ox = 0; ox < out_w_; ++ox) {
                            const int ix = ox * stride_ + kx - pad_;
                            dst[oy * out_w_ + ox] =
                                (iy >= 0 && iy < in_h_ && ix >= 0 && ix < in_w_)
                                    ? img[(c * in_h_ + iy) * in_w_ + ix]
                                    : 0.0f;
                        }
                    }
                }
            }
        }
    }

    void col2im(const float* col, float* img) const {
        const int spatial = out_h_ * out_w_;
        for (int c = 0; c < in_ch_; ++c) {
            for (int ky = 0; ky < k_; ++ky) {
                for (int kx = 0; kx < k_; ++kx) {
                    const float* src = col + ((c * k_ + ky) * k_ + kx) * spatial;
                    for (int oy = 0; oy < out_h_; ++oy) {
                        const int iy = oy * stride_ + ky - pad_;
                        if (iy < 0 || iy >= in_h_)
                            continue;
                        for (int ox = 0; ox < out_w_; ++ox) {
                            const int ix = ox * stride_ + kx - pad_;
                            if (ix < 0 || ix >= in_w_)
                                continue;
                            img[(c * in_h_ + iy) * in_w_ + ix] += src[oy * out_w_ + ox];
                        }
                    }
                }
            }
        }
    }

    int in_ch_, out_ch_, k_, stride_, pad_;
    int in_h_ = 0, in_w_ = 0, out_h_ = 0, out_w_ = 0;
    Tensor weights_, bias_, grad_w_, grad_b_;
    Tensor cols_;
};

class ReLU : public Layer {
public:
    Tensor forward(const Tensor& x, Mode) override {
        mask_.assign(x.data.size(), 0);
        Tensor out = x;
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            if (out.data[i] > 0.0f)
                mask_[i] = 1;
            else
                out.data[i] = 0.0f;
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out) override {
        Tensor grad = grad_out;
        for (std::size_t i = 0; i < grad.data.size(); ++i)
            if (!mask_[i])
                grad.data[i] = 0.0f;
        return grad;
    }

    std::string name() const override { return "relu"; }

private:
    std::vector<std::uint8_t> mask_;
};

// Square max-pool; spatial dims must divide evenly by the window side. Ties
// route the gradient to the first position in row-major order.
class MaxPool : public Layer {
public:
    explicit MaxPool(int side) : side_(side) {}

    Tensor forward(const Tensor& x, Mode) override {
        if (x.shape.size() != 4)
            throw ShapeMismatch("MaxPool expects [N,C,H,W], got " + shape_str(x.shape));
        const int n = x.dim(0), c = x.dim(1), h = x.dim(2), w = x.dim(3);
        if (h % side_ != 0 || w % side_ != 0)
            throw ShapeMismatch("MaxPool " + std::to_string(side_) + "x" +
                                std::to_string(side_) + " does not divide " + shape_str(x.shape));
        in_shape_ = x.shape;
        const int oh = h / side_, ow = w / side_;
        Tensor out({n, c, oh, ow});
        argmax_.assign(out.numel(), 0);

        for (int s = 0; s < n; ++s) {
            for (int ch = 0; ch < c; ++ch) {
                const float* plane = x.data.data() + (std::size_t(s) * c + ch) * h * w;
                const std::size_t obase = (std::size_t(s) * c + ch) * oh * ow;
                for (int oy = 0; oy < oh; ++oy) {
                    for (int ox = 0; ox < ow; ++ox) {
                        float best = plane[oy * side_ * w + ox * side_];
                        int best_idx = oy * side_ * w + ox * side_;
                        for (int dy = 0; dy < side_; ++dy) {
                            for (int dx = 0; dx < side_; ++dx) {
                                const int idx = (oy * side_ + dy) * w + ox * side_ + dx;
                                if (plane[idx] > best) {
                                    best = plane[idx];
                                    best_idx = idx;
                                }
                            }
                        }
                        out.data[obase + std::size_t(oy) * ow + ox] = best;
                        argmax_[obase + std::size_t(oy) * ow + ox] =
                            (std::size_t(s) * c + ch) * h * w + std::size_t(best_idx);
                    }
                }
            }
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out) override {
        Tensor grad_in(in_shape_);
        for (std::size_t i = 0; i < grad_out.data.size(); ++i)
            grad_in.data[argmax_[i]] += grad_out.data[i];
        return grad_in;
    }

    std::string name() const override { return "maxpool" + std::to_string(side_); }

private:
    int side_;
    std::vector<int> in_shape_;
    std::vector<std::size_t> argmax_;
};

class Flatten : public Layer {
public:
    Tensor forward(const Tensor& x, Mode) override {
        in_shape_ = x.shape;
        Tensor out = x;
        out.shape = {x.dim(0), static_cast<int>(x.numel()) / x.dim(0)};
        return out;
    }

    Tensor backward(const Tensor& grad_out) override {
        Tensor grad = grad_out;
        grad.shape = in_shape_;
        return grad;
    }

    std::string name() const override { return "flatten"; }

private:
    std::vector<int> in_shape_;
};

// Affine map y = xW + b over [N, D] input.
class Dense : public Layer {
public:
    Dense(int in_units, int out_units, Rng& rng)
        : in_(in_units), out_(out_units), weights_({in_units, out_units}), bias_({out_units}),
          grad_w_({in_units, out_units}), grad_b_({out_units}) {
        detail::glorot_fill(weights_, in_, out_, rng);
    }

    Tensor forward(const Tensor& x, Mode) override {
        if (x.shape.size() != 2 || x.dim(1) != in_)
            throw ShapeMismatch("Dense expects [N," + std::to_string(in_) + "], got " +
                                shape_str(x.shape));
        input_ = x;
        const int n = x.dim(0);
        Tensor out({n, out_});
        gemm(false, false, n, out_, in_, 1.0f, x.data.data(), in_, weights_.data.data(), out_,
             0.0f, out.data.data(), out_);
        for (int s = 0; s < n; ++s)
            for (int u = 0; u < out_; ++u)
                out.data[std::size_t(s) * out_ + u] += bias_.data[static_cast<std::size_t>(u)];
        return out;
    }

    Tensor backward(const Tensor& grad_out) override {
        const int n = grad_out.dim(0);
        // dW += X^T dY ; dX = dY W^T ; db += column sums of dY
        gemm(true, false, in_, out_, n, 1.0f, input_.data.data(), in_, grad_out.data.data(),
             out_, 1.0f, grad_w_.data.data(), out_);
        Tensor grad_in({n, in_});
        gemm(false, true, n, in_, out_, 1.0f, grad_out.data.data(), out_, weights_.data.data(),
             out_, 0.0f, grad_in.data.data(), in_);
        for (int s = 0; s < n; ++s)
            for (int u = 0; u < out_; ++u)
                grad_b_.data[static_cast<std::size_t>(u)] +=
                    grad_out.data[std::size_t(s) * out_ + u];
        return grad_in;
    }

    std::vector<Tensor*> params() override { return {&weights_, &bias_}; }
    std::vector<Tensor*> grads() override { return {&grad_w_, &grad_b_}; }
    std::string name() const override { return "dense" + std::to_string(out_); }

    Tensor& weights() { return weights_; }
    Tensor& bias() { return bias_; }

private:
    int in_, out_;
    Tensor weights_, bias_, grad_w_, grad_b_;
    Tensor input_;
};

// Inverted dropout: zero with probability `rate` in train mode, scale
// survivors by 1/(1-rate); identity in eval mode.
class Dropout : public Layer {
public:
    Dropout(double rate, std::uint64_t seed) : rate_(rate), rng_(seed) {
        if (rate < 0.0 || rate >= 1.0)
            throw DomainError("dropout rate must be in [0, 1)");
    }

    Tensor forward(const Tensor& x, Mode mode) override {
        if (mode == Mode::Eval || rate_ == 0.0) {
            mask_.clear();
            return x;
        }
        Tensor out = x;
        mask_.assign(x.data.size(), 0);
        const float scale = static_cast<float>(1.0 / (1.0 - rate_));
        for (std::size_t i = 0; i < out.data.size(); ++i) {
            if (rng_.next_double() < rate_) {
                out.data[i] = 0.0f;
            } else {
                mask_[i] = 1;
                out.data[i] *= scale;
            }
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out) override {
        if (mask_.empty())
            return grad_out;
        Tensor grad = grad_out;
        const float scale = static_cast<float>(1.0 / (1.0 - rate_));
        for (std::size_t i = 0; i < grad.data.size(); ++i)
            grad.data[i] = mask_[i] ? grad.data[i] * scale : 0.0f;
        return grad;
    }

    std::string name() const override { return "dropout"; }

private:
    double rate_;
    Rng rng_;
    std::vector<std::uint8_t> mask_;
};

// Numerically stabilized softmax cross-entropy for one sample.
// loss = -log p[label], grad = p - one_hot(label).
inline std::pair<double, std::vector<double>> softmax_cross_entropy(
    const std::vector<double>& logits, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= logits.size())
        throw BadLabel("label " + std::to_string(label) + " for " +
                       std::to_string(logits.size()) + " classes");
    double mx = logits[0];
    for (double v : logits)
        mx = std::max(mx, v);
    double z = 0.0;
    std::vector<double> p(logits.size());
    for (std::size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - mx);
        z += p[i];
    }
    for (double& v : p)
        v /= z;
    const double loss = -std::log(std::max(p[static_cast<std::size_t>(label)], 1e-300));
    p[static_cast<std::size_t>(label)] -= 1.0;
    return {loss, std::move(p)};
}

// Batch form over [N, C] logits: mean loss, grad scaled by 1/N.
inline double softmax_cross_entropy_batch(const Tensor& logits,
                                          const std::vector<int>& labels, Tensor& grad) {
    const int n = logits.dim(0), c = logits.dim(1);
    grad = Tensor({n, c});
    double total = 0.0;
    std::vector<double> row(static_cast<std::size_t>(c));
    for (int s = 0; s < n; ++s) {
        for (int j = 0; j < c; ++j)
            row[static_cast<std::size_t>(j)] = logits.data[std::size_t(s) * c + j];
        auto [loss, g] = softmax_cross_entropy(row, labels[static_cast<std::size_t>(s)]);
        total += loss;
        for (int j = 0; j < c; ++j)
            grad.data[std::size_t(s) * c + j] = static_cast<float>(g[static_cast<std::size_t>(j)] / n);
    }
    return total / n;
}

} // namespace sg
