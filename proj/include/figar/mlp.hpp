#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "figar/param.hpp"
#include "figar/rng.hpp"

namespace figar {

enum class Activation { Tanh, Relu };

// Activated applies the hidden-layer activation to the output layer
// (used for shared trunks whose output is a hidden representation).
enum class OutputTransform { Linear, Softmax, BoundedTanh, BoundedSigmoid, Activated };

/// Forward-pass cache for one input, consumed by Mlp::backward.
struct MlpCache {
    std::vector<double> input;
    std::vector<std::vector<double>> pre;   // pre-activation per layer
    std::vector<std::vector<double>> post;  // post-activation per layer (last = output)
    bool valid = false;
};

inline std::vector<double> softmax(std::span<const double> logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - m);
        z += out[i];
    }
    for (double& v : out) v /= z;
    return out;
}

/// Dense multi-layer perceptron over flat double parameters.
/// layer_sizes includes the input dimension: {in, h1, ..., out}.
class Mlp {
public:
    Mlp() = default;

    Mlp(std::vector<int> layer_sizes, Activation act, OutputTransform out)
        : sizes_(std::move(layer_sizes)), act_(act), out_(out) {
        if (sizes_.size() < 2) throw std::invalid_argument("Mlp: need at least input and output sizes");
        for (int s : sizes_) {
            if (s <= 0) throw std::invalid_argument("Mlp: layer sizes must be positive");
        }
        for (std::size_t l = 1; l < sizes_.size(); ++l) {
            params_.add_segment("W" + std::to_string(l),
                                {static_cast<std::size_t>(sizes_[l]), static_cast<std::size_t>(sizes_[l - 1])});
            params_.add_segment("b" + std::to_string(l), {static_cast<std::size_t>(sizes_[l])});
        }
        lo_.assign(static_cast<std::size_t>(sizes_.back()), -1.0);
        hi_.assign(static_cast<std::size_t>(sizes_.back()), 1.0);
    }

    /// Uniform +-1/sqrt(fan_in) init; final layer scaled down to start
    /// near-uniform (softmax) or near-zero (linear/bounded) outputs.
    void init(Rng& rng, double final_scale = 1.0) {
        for (std::size_t l = 1; l < sizes_.size(); ++l) {
            double bound = 1.0 / std::sqrt(static_cast<double>(sizes_[l - 1]));
            if (l + 1 == sizes_.size()) bound *= final_scale;
            auto w = params_.segment("W" + std::to_string(l));
            for (double& v : w) v = rng.uniform(-bound, bound);
            auto b = params_.segment("b" + std::to_string(l));
            for (double& v : b) v = 0.0;
        }
    }

    int input_dim() const { return sizes_.front(); }
    int output_dim() const { return sizes_.back(); }

    ParamVector& params() { return params_; }
    const ParamVector& params() const { return params_; }

    /// Per-dimension output bounds for the bounded transforms.
    void set_bounds(std::vector<double> lo, std::vector<double> hi) {
        if (lo.size() != hi.size() || static_cast<int>(lo.size()) != output_dim()) {
            throw std::invalid_argument("Mlp::set_bounds: dimension mismatch");
        }
        for (std::size_t i = 0; i < lo.size(); ++i) {
            if (!(lo[i] < hi[i])) throw std::invalid_argument("Mlp::set_bounds: lower must be < upper");
        }
        lo_ = std::move(lo);
        hi_ = std::move(hi);
    }

    std::vector<double> forward(std::span<const double> x) const {
        MlpCache cache;
        return forward(x, cache);
    }

    std::vector<double> forward(std::span<const double> x, MlpCache& cache) const {
        if (static_cast<int>(x.size()) != input_dim()) {
            throw std::invalid_argument("Mlp::forward: input size " + std::to_string(x.size()) +
                                        " != " + std::to_string(input_dim()));
        }
        cache.input.assign(x.begin(), x.end());
        cache.pre.clear();
        cache.post.clear();
        const std::vector<double>* cur = &cache.input;
        for (std::size_t l = 1; l < sizes_.size(); ++l) {
            auto w = params_.segment("W" + std::to_string(l));
            auto b = params_.segment("b" + std::to_string(l));
            std::size_t rows = static_cast<std::size_t>(sizes_[l]);
            std::size_t cols = static_cast<std::size_t>(sizes_[l - 1]);
            std::vector<double> z(rows);
            for (std::size_t r = 0; r < rows; ++r) {
                double acc = b[r];
                const double* wr = w.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) acc += wr[c] * (*cur)[c];
                z[r] = acc;
            }
            cache.pre.push_back(z);
            bool last = (l + 1 == sizes_.size());
            std::vector<double> a;
            if (!last) {
                a.resize(rows);
                for (std::size_t r = 0; r < rows; ++r) a[r] = activate(z[r]);
            } else {
                a = apply_output(z);
            }
            cache.post.push_back(std::move(a));
            cur = &cache.post.back();
        }
        cache.valid = true;
        return cache.post.back();
    }

    /// Backprop. upstream = dL/d(transformed output). Accumulates parameter
    /// gradients into `grad` (layout must match params()) and returns dL/d(input).
    std::vector<double> backward(const MlpCache& cache, std::span<const double> upstream,
                                 ParamVector& grad) const {
        if (!cache.valid) throw std::logic_error("Mlp::backward: forward cache missing");
        if (!grad.same_layout(params_)) throw std::invalid_argument("Mlp::backward: grad layout mismatch");
        if (static_cast<int>(upstream.size()) != output_dim()) {
            throw std::invalid_argument("Mlp::backward: upstream size mismatch");
        }
        std::size_t layers = sizes_.size() - 1;
        std::vector<double> delta = output_backward(cache, upstream);
        for (std::size_t l = layers; l >= 1; --l) {
            std::size_t rows = static_cast<std::size_t>(sizes_[l]);
            std::size_t cols = static_cast<std::size_t>(sizes_[l - 1]);
            const std::vector<double>& below =
                (l == 1) ? cache.input : cache.post[l - 2];
            auto gw = grad.segment("W" + std::to_string(l));
            auto gb = grad.segment("b" + std::to_string(l));
            for (std::size_t r = 0; r < rows; ++r) {
                gb[r] += delta[r];
                double* gwr = gw.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) gwr[c] += delta[r] * below[c];
            }
            auto w = params_.segment("W" + std::to_string(l));
            std::vector<double> down(cols, 0.0);
            for (std::size_t r = 0; r < rows; ++r) {
                const double* wr = w.data() + r * cols;
                for (std::size_t c = 0; c < cols; ++c) down[c] += wr[c] * delta[r];
            }
            if (l == 1) return down;
            // chain through the hidden activation of layer l-1
            const std::vector<double>& zprev = cache.pre[l - 2];
            for (std::size_t c = 0; c < cols; ++c) down[c] *= activate_grad(zprev[c]);
            delta = std::move(down);
        }
        return {};
    }

    Activation activation() const { return act_; }
    OutputTransform output_transform() const { return out_; }
    const std::vector<int>& layer_sizes() const { return sizes_; }

private:
    double activate(double z) const {
        switch (act_) {
            case Activation::Tanh: return std::tanh(z);
            case Activation::Relu: return z > 0.0 ? z : 0.0;
        }
        return 0.0;
    }

    double activate_grad(double z) const {
        switch (act_) {
            case Activation::Tanh: {
                double t = std::tanh(z);
                return 1.0 - t * t;
            }
            case Activation::Relu: return z > 0.0 ? 1.0 : 0.0;
        }
        return 0.0;
    }

    std::vector<double> apply_output(const std::vector<double>& z) const {
        switch (out_) {
            case OutputTransform::Linear: return z;
            case OutputTransform::Activated: {
                std::vector<double> out(z.size());
                for (std::size_t i = 0; i < z.size(); ++i) out[i] = activate(z[i]);
                return out;
            }
            case OutputTransform::Softmax: return softmax(z);
            case OutputTransform::BoundedTanh: {
                std::vector<double> out(z.size());
                for (std::size_t i = 0; i < z.size(); ++i) {
                    out[i] = lo_[i] + (hi_[i] - lo_[i]) * 0.5 * (std::tanh(z[i]) + 1.0);
                }
                return out;
            }
            case OutputTransform::BoundedSigmoid: {
                std::vector<double> out(z.size());
                for (std::size_t i = 0; i < z.size(); ++i) {
                    out[i] = lo_[i] + (hi_[i] - lo_[i]) / (1.0 + std::exp(-z[i]));
                }
                return out;
            }
        }
        return z;
    }

    /// dL/d(final pre-activation) given dL/d(transformed output).
    std::vector<double> output_backward(const MlpCache& cache,
                                        std::span<const double> upstream) const {
        const std::vector<double>& z = cache.pre.back();
        const std::vector<double>& y = cache.post.back();
        std::vector<double> delta(z.size());
        switch (out_) {
            case OutputTransform::Linear:
                delta.assign(upstream.begin(), upstream.end());
                break;
            case OutputTransform::Activated:
                for (std::size_t i = 0; i < z.size(); ++i) delta[i] = upstream[i] * activate_grad(z[i]);
                break;
            case OutputTransform::Softmax: {
                double dot = 0.0;
                for (std::size_t i = 0; i < y.size(); ++i) dot += upstream[i] * y[i];
                for (std::size_t i = 0; i < y.size(); ++i) delta[i] = y[i] * (upstream[i] - dot);
                break;
            }
            case OutputTransform::BoundedTanh:
                for (std::size_t i = 0; i < z.size(); ++i) {
                    double t = std::tanh(z[i]);
                    delta[i] = upstream[i] * (hi_[i] - lo_[i]) * 0.5 * (1.0 - t * t);
                }
                break;
            case OutputTransform::BoundedSigmoid:
                for (std::size_t i = 0; i < z.size(); ++i) {
                    double s = 1.0 / (1.0 + std::exp(-z[i]));
                    delta[i] = upstream[i] * (hi_[i] - lo_[i]) * s * (1.0 - s);
                }
                break;
        }
        return delta;
    }

    std::vector<int> sizes_;
    Activation act_ = Activation::Tanh;
    OutputTransform out_ = OutputTransform::Linear;
    ParamVector params_;
    std::vector<double> lo_, hi_;
};

}  // namespace figar
