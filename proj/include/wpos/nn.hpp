// Copyright 2026 The wpos Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WPOS_NN_HPP
#define WPOS_NN_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "wpos/rng.hpp"
#include "wpos/tensor.hpp"

namespace wpos::nn {

struct AdamParams {
    double learning_rate = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

enum class LayerKind { conv, relu, flatten, dense };

struct LayerSpec {
    LayerKind kind = LayerKind::dense;
    int units = 0;  // dense width or conv output channels
    int kernel_h = 0;
    int kernel_w = 0;
    int pad = 0;

    static LayerSpec make_conv(int out_channels, int kernel_h, int kernel_w, int pad)
    {
        return {LayerKind::conv, out_channels, kernel_h, kernel_w, pad};
    }
    static LayerSpec make_relu() { return {LayerKind::relu, 0, 0, 0, 0}; }
    static LayerSpec make_flatten() { return {LayerKind::flatten, 0, 0, 0, 0}; }
    static LayerSpec make_dense(int units) { return {LayerKind::dense, units, 0, 0, 0}; }
};

struct InputShape {
    int channels = 0, rows = 0, cols = 0;
    bool present() const { return channels > 0; }
};

/// Two-branch architecture joined by concatenation; single-branch models
/// leave branch_b and input_b empty. The final dense layer's width is the
/// class count; softmax is applied by the loss and by predict().
struct ModelSpec {
    std::vector<LayerSpec> branch_e;
    std::vector<LayerSpec> branch_b;
    std::vector<LayerSpec> head;
    InputShape input_e;
    InputShape input_b;
    std::uint64_t init_seed = 1;
    AdamParams adam;
    int batch_size = 256;
    int epochs = 50;
};

struct Parameter {
    std::vector<double> value, grad, m, v;

    explicit Parameter(std::size_t count)
        : value(count, 0.0), grad(count, 0.0), m(count, 0.0), v(count, 0.0)
    {
    }
};

namespace detail {

class Layer {
public:
    virtual ~Layer() = default;
    virtual Tensor forward(const Tensor& in) = 0;
    virtual Tensor backward(const Tensor& grad_out) = 0;
    virtual std::vector<Parameter*> parameters() { return {}; }
};

class ReluLayer final : public Layer {
public:
    Tensor forward(const Tensor& in) override
    {
        mask_.assign(in.size(), false);
        Tensor out = in;
        for (std::size_t i = 0; i < out.v.size(); ++i) {
            if (out.v[i] > 0.0)
                mask_[i] = true;
            else
                out.v[i] = 0.0;
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out) override
    {
        Tensor grad_in = grad_out;
        for (std::size_t i = 0; i < grad_in.v.size(); ++i)
            if (!mask_[i]) grad_in.v[i] = 0.0;
        return grad_in;
    }

private:
    std::vector<bool> mask_;
};

class FlattenLayer final : public Layer {
public:
    Tensor forward(const Tensor& in) override
    {
        c_ = in.c;
        h_ = in.h;
        w_ = in.w;
        Tensor out(in.n, in.per_record(), 1, 1);
        out.v = in.v;
        return out;
    }

    Tensor backward(const Tensor& grad_out) override
    {
        Tensor grad_in(grad_out.n, c_, h_, w_);
        grad_in.v = grad_out.v;
        return grad_in;
    }

private:
    int c_ = 0, h_ = 0, w_ = 0;
};

class DenseLayer final : public Layer {
public:
    DenseLayer(int in_dim, int out_dim, RandomStream& rng)
        : in_dim_(in_dim), out_dim_(out_dim),
          weights_(static_cast<std::size_t>(in_dim) * out_dim), bias_(out_dim)
    {
        const double limit = std::sqrt(6.0 / in_dim);
        for (double& w : weights_.value) w = rng.uniform(-limit, limit);
    }

    Tensor forward(const Tensor& in) override
    {
        if (in.per_record() != in_dim_) throw std::invalid_argument("nn: dense input mismatch");
        input_ = in;
        Tensor out(in.n, out_dim_, 1, 1);
        for (int ni = 0; ni < in.n; ++ni) {
            const double* x = &in.v[static_cast<std::size_t>(ni) * in_dim_];
            double* y = &out.v[static_cast<std::size_t>(ni) * out_dim_];
            for (int j = 0; j < out_dim_; ++j) {
                const double* w = &weights_.value[static_cast<std::size_t>(j) * in_dim_];
                double acc = bias_.value[j];
                for (int i = 0; i < in_dim_; ++i) acc += w[i] * x[i];
                y[j] = acc;
            }
        }
        return out;
    }

    Tensor backward(const Tensor& grad_out) override
    {
        Tensor grad_in(input_.n, input_.c, input_.h, input_.w);
        for (int ni = 0; ni < input_.n; ++ni) {
            const double* x = &input_.v[static_cast<std::size_t>(ni) * in_dim_];
            const double* gy = &grad_out.v[static_cast<std::size_t>(ni) * out_dim_];
            double* gx = &grad_in.v[static_cast<std::size_t>(ni) * in_dim_];
            for (int j = 0; j < out_dim_; ++j) {
                const double g = gy[j];
                if (g == 0.0) continue;
                double* gw = &weights_.grad[static_cast<std::size_t>(j) * in_dim_];
                const double* w = &weights_.value[static_cast<std::size_t>(j) * in_dim_];
                bias_.grad[j] += g;
                for (int i = 0; i < in_dim_; ++i) {
                    gw[i] += g * x[i];
                    gx[i] += g * w[i];
                }
            }
        }
        return grad_in;
    }

    std::vector<Parameter*> parameters() override { return {&weights_, &bias_}; }

private:
    int in_dim_, out_dim_;
    Parameter weights_, bias_;
    Tensor input_;
};

class ConvLayer final : public Layer {
public:
    ConvLayer(int in_channels, int out_channels, int kernel_h, int kernel_w, int pad,
              RandomStream& rng)
        : in_c_(in_channels), out_c_(out_channels), kh_(kernel_h), kw_(kernel_w), pad_(pad),
          weights_(static_cast<std::size_t>(out_channels) * in_channels * kernel_h * kernel_w),
          bias_(out_channels)
    {
        const double limit = std::sqrt(6.0 / (in_channels * kernel_h * kernel_w));
        for (double& w : weights_.value) w = rng.uniform(-limit, limit);
    }

    Tensor forward(const Tensor& in) override
    {
        if (in.c != in_c_) throw std::invalid_argument("nn: conv input channel mismatch");
        input_ = in;
        const int oh = in.h + 2 * pad_ - kh_ + 1;
        const int ow = in.w + 2 * pad_ - kw_ + 1;
        if (oh < 1 || ow < 1) throw std::invalid_argument("nn: conv output collapsed");
        Tensor out(in.n, out_c_, oh, ow);
        for (int ni = 0; ni < in.n; ++ni)
            for (int oc = 0; oc < out_c_; ++oc)
                for (int y = 0; y < oh; ++y)
                    for (int x = 0; x < ow; ++x) {
                        double acc = bias_.value[oc];
                        for (int ic = 0; ic < in_c_; ++ic)
                            for (int ky = 0; ky < kh_; ++ky) {
                                const int iy = y - pad_ + ky;
                                if (iy < 0 || iy >= in.h) continue;
                                for (int kx = 0; kx < kw_; ++kx) {
                                    const int ix = x - pad_ + kx;
                                    if (ix < 0 || ix >= in.w) continue;
                                    acc += weight(oc, ic, ky, kx) * in.at(ni, ic, iy, ix);
                                }
                            }
                        out.at(ni, oc, y, x) = acc;
                    }
        return out;
    }

    Tensor backward(const Tensor& grad_out) override
    {
        Tensor grad_in(input_.n, input_.c, input_.h, input_.w);
        for (int ni = 0; ni < input_.n; ++ni)
            for (int oc = 0; oc < out_c_; ++oc)
                for (int y = 0; y < grad_out.h; ++y)
                    for (int x = 0; x < grad_out.w; ++x) {
                        const double g = grad_out.at(ni, oc, y, x);
                        if (g == 0.0) continue;
                        bias_.grad[oc] += g;
                        for (int ic = 0; ic < in_c_; ++ic)
                            for (int ky = 0; ky < kh_; ++ky) {
                                const int iy = y - pad_ + ky;
                                if (iy < 0 || iy >= input_.h) continue;
                                for (int kx = 0; kx < kw_; ++kx) {
                                    const int ix = x - pad_ + kx;
                                    if (ix < 0 || ix >= input_.w) continue;
                                    grad_weight(oc, ic, ky, kx) += g * input_.at(ni, ic, iy, ix);
                                    grad_in.at(ni, ic, iy, ix) += g * weight(oc, ic, ky, kx);
                                }
                            }
                    }
        return grad_in;
    }

    std::vector<Parameter*> parameters() override { return {&weights_, &bias_}; }

private:
    double& weight(int oc, int ic, int ky, int kx)
    {
        return weights_.value[((static_cast<std::size_t>(oc) * in_c_ + ic) * kh_ + ky) * kw_ + kx];
    }
    double& grad_weight(int oc, int ic, int ky, int kx)
    {
        return weights_.grad[((static_cast<std::size_t>(oc) * in_c_ + ic) * kh_ + ky) * kw_ + kx];
    }

    int in_c_, out_c_, kh_, kw_, pad_;
    Parameter weights_, bias_;
    Tensor input_;
};

struct Stack {
    std::vector<std::unique_ptr<Layer>> layers;

    Tensor forward(Tensor x)
    {
        for (auto& layer : layers) x = layer->forward(x);
        return x;
    }

    Tensor backward(Tensor g)
    {
        for (auto it = layers.rbegin(); it != layers.rend(); ++it) g = (*it)->backward(g);
        return g;
    }
};

inline InputShape build_stack(Stack& stack, const std::vector<LayerSpec>& specs, InputShape shape,
                              RandomStream& rng)
{
    for (const LayerSpec& spec : specs) {
        switch (spec.kind) {
        case LayerKind::conv:
            stack.layers.push_back(std::make_unique<ConvLayer>(shape.channels, spec.units,
                                                               spec.kernel_h, spec.kernel_w,
                                                               spec.pad, rng));
            shape = {spec.units, shape.rows + 2 * spec.pad - spec.kernel_h + 1,
                     shape.cols + 2 * spec.pad - spec.kernel_w + 1};
            break;
        case LayerKind::relu:
            stack.layers.push_back(std::make_unique<ReluLayer>());
            break;
        case LayerKind::flatten:
            stack.layers.push_back(std::make_unique<FlattenLayer>());
            shape = {shape.channels * shape.rows * shape.cols, 1, 1};
            break;
        case LayerKind::dense:
            if (shape.rows != 1 || shape.cols != 1)
                throw std::invalid_argument("nn: dense requires flattened input");
            stack.layers.push_back(std::make_unique<DenseLayer>(shape.channels, spec.units, rng));
            shape = {spec.units, 1, 1};
            break;
        }
    }
    return shape;
}

} // namespace detail

/// Row-wise softmax of a (n, k, 1, 1) tensor.
inline Tensor softmax(const Tensor& logits)
{
    Tensor probs = logits;
    for (int ni = 0; ni < logits.n; ++ni) {
        double* row = &probs.v[static_cast<std::size_t>(ni) * logits.c];
        const double peak = *std::max_element(row, row + logits.c);
        double norm = 0.0;
        for (int k = 0; k < logits.c; ++k) {
            row[k] = std::exp(row[k] - peak);
            norm += row[k];
        }
        for (int k = 0; k < logits.c; ++k) row[k] /= norm;
    }
    return probs;
}

struct EpochMetrics {
    int epoch = 0;
    double loss = 0.0;
    double train_accuracy = 0.0;
    double val_accuracy = 0.0;
};

/// A spec-built network with Adam state. Models own their parameters; one
/// training loop drives a model at a time, while inference on a frozen model
/// is read-only.
class Model {
public:
    explicit Model(const ModelSpec& spec) : spec_(spec)
    {
        if (!spec.input_e.present()) throw std::invalid_argument("nn: missing primary input");
        RandomStream rng(spec.init_seed);
        shape_e_ = detail::build_stack(branch_e_, spec.branch_e, spec.input_e, rng);
        int head_in = shape_e_.channels;
        if (shape_e_.rows != 1 || shape_e_.cols != 1)
            throw std::invalid_argument("nn: branch output must be flattened");
        if (spec.input_b.present()) {
            shape_b_ = detail::build_stack(branch_b_, spec.branch_b, spec.input_b, rng);
            if (shape_b_.rows != 1 || shape_b_.cols != 1)
                throw std::invalid_argument("nn: branch output must be flattened");
            head_in += shape_b_.channels;
        } else if (!spec.branch_b.empty()) {
            throw std::invalid_argument("nn: secondary branch without secondary input");
        }
        InputShape out = detail::build_stack(head_, spec.head, {head_in, 1, 1}, rng);
        n_classes_ = out.channels;

        collect(branch_e_);
        collect(branch_b_);
        collect(head_);
    }

    const ModelSpec& spec() const { return spec_; }
    int class_count() const { return n_classes_; }

    int input_feature_count() const
    {
        int count = spec_.input_e.channels * spec_.input_e.rows * spec_.input_e.cols;
        if (spec_.input_b.present())
            count += spec_.input_b.channels * spec_.input_b.rows * spec_.input_b.cols;
        return count;
    }

    std::vector<Parameter*>& parameters() { return params_; }

    std::size_t parameter_count() const
    {
        std::size_t count = 0;
        for (const Parameter* p : params_) count += p->value.size();
        return count;
    }

    /// Class probabilities for a batch; rows sum to one.
    Tensor forward(const Tensor& e, const Tensor& b)
    {
        Tensor flat_e = branch_e_.forward(e);
        Tensor joined;
        if (spec_.input_b.present()) {
            if (b.n != e.n) throw std::invalid_argument("nn: branch batch mismatch");
            Tensor flat_b = branch_b_.forward(b);
            joined = Tensor(e.n, flat_e.c + flat_b.c, 1, 1);
            for (int ni = 0; ni < e.n; ++ni) {
                for (int k = 0; k < flat_e.c; ++k)
                    joined.at(ni, k, 0, 0) = flat_e.at(ni, k, 0, 0);
                for (int k = 0; k < flat_b.c; ++k)
                    joined.at(ni, flat_e.c + k, 0, 0) = flat_b.at(ni, k, 0, 0);
            }
        } else {
            joined = std::move(flat_e);
        }
        split_ = spec_.input_b.present() ? shape_e_.channels : 0;
        return softmax(head_.forward(joined));
    }

    /// Mean cross-entropy of a batch without touching gradients.
    double loss(const Tensor& e, const Tensor& b, const std::vector<int>& labels)
    {
        const Tensor probs = forward(e, b);
        return cross_entropy(probs, labels);
    }

    /// One optimizer step on a mini-batch; returns the pre-update loss and,
    /// when requested, adds the batch's argmax hits to `correct`.
    double train_step(const Tensor& e, const Tensor& b, const std::vector<int>& labels,
                      int* correct = nullptr)
    {
        const double batch_loss = accumulate_gradients(e, b, labels, correct);
        if (!std::isfinite(batch_loss))
            throw std::runtime_error("nn: non-finite loss; diverging optimization");
        adam_step();
        return batch_loss;
    }

    /// Zeroes and refills gradients for one batch without stepping; also used
    /// directly by the finite-difference checks.
    double accumulate_gradients(const Tensor& e, const Tensor& b, const std::vector<int>& labels,
                                int* correct = nullptr)
    {
        const Tensor probs = forward(e, b);
        if (correct != nullptr) {
            for (int ni = 0; ni < probs.n; ++ni) {
                int arg = 0;
                for (int k = 1; k < probs.c; ++k)
                    if (probs.at(ni, k, 0, 0) > probs.at(ni, arg, 0, 0)) arg = k;
                if (arg == labels[ni]) ++(*correct);
            }
        }
        const double batch_loss = cross_entropy(probs, labels);

        zero_gradients();
        Tensor grad = probs; // softmax + cross-entropy gradient: (p - onehot)/n
        for (int ni = 0; ni < grad.n; ++ni) grad.at(ni, labels[ni], 0, 0) -= 1.0;
        for (double& g : grad.v) g /= grad.n;

        Tensor grad_joined = head_.backward(grad);
        if (spec_.input_b.present()) {
            Tensor grad_e(grad_joined.n, split_, 1, 1);
            Tensor grad_b(grad_joined.n, grad_joined.c - split_, 1, 1);
            for (int ni = 0; ni < grad_joined.n; ++ni) {
                for (int k = 0; k < split_; ++k)
                    grad_e.at(ni, k, 0, 0) = grad_joined.at(ni, k, 0, 0);
                for (int k = split_; k < grad_joined.c; ++k)
                    grad_b.at(ni, k - split_, 0, 0) = grad_joined.at(ni, k, 0, 0);
            }
            branch_e_.backward(grad_e);
            branch_b_.backward(grad_b);
        } else {
            branch_e_.backward(grad_joined);
        }
        return batch_loss;
    }

    void zero_gradients()
    {
        for (Parameter* p : params_)
            std::fill(p->grad.begin(), p->grad.end(), 0.0);
    }

    /// One Adam update from whatever is currently in the gradient buffers.
    void apply_adam_step() { adam_step(); }

private:
    void collect(detail::Stack& stack)
    {
        for (auto& layer : stack.layers)
            for (Parameter* p : layer->parameters()) params_.push_back(p);
    }

    static double cross_entropy(const Tensor& probs, const std::vector<int>& labels)
    {
        if (labels.size() != static_cast<std::size_t>(probs.n))
            throw std::invalid_argument("nn: label count mismatch");
        double total = 0.0;
        for (int ni = 0; ni < probs.n; ++ni) {
            const int label = labels[ni];
            if (label < 0 || label >= probs.c) throw std::invalid_argument("nn: label range");
            total += -std::log(std::max(probs.at(ni, label, 0, 0), 1e-300));
        }
        return total / probs.n;
    }

    void adam_step()
    {
        ++step_;
        const AdamParams& a = spec_.adam;
        const double bc1 = 1.0 - std::pow(a.beta1, step_);
        const double bc2 = 1.0 - std::pow(a.beta2, step_);
        for (Parameter* p : params_) {
            for (std::size_t i = 0; i < p->value.size(); ++i) {
                const double g = p->grad[i];
                p->m[i] = a.beta1 * p->m[i] + (1.0 - a.beta1) * g;
                p->v[i] = a.beta2 * p->v[i] + (1.0 - a.beta2) * g * g;
                const double m_hat = p->m[i] / bc1;
                const double v_hat = p->v[i] / bc2;
                p->value[i] -= a.learning_rate * m_hat / (std::sqrt(v_hat) + a.epsilon);
            }
        }
    }

    ModelSpec spec_;
    detail::Stack branch_e_, branch_b_, head_;
    InputShape shape_e_, shape_b_;
    int n_classes_ = 0;
    int split_ = 0;
    std::vector<Parameter*> params_;
    std::int64_t step_ = 0;
};

/// In-memory labeled dataset; b is empty for single-branch models.
struct LabeledData {
    Tensor e;
    Tensor b;
    std::vector<int> labels;

    int size() const { return e.n; }
};

/// Fresh model with the same spec and copied weights; Adam state starts cold.
inline Model clone_model(Model& source)
{
    Model copy(source.spec());
    for (std::size_t i = 0; i < source.parameters().size(); ++i)
        copy.parameters()[i]->value = source.parameters()[i]->value;
    return copy;
}

inline double accuracy(Model& model, const LabeledData& data, int batch = 512)
{
    if (data.size() == 0) return 0.0;
    int correct = 0;
    for (int begin = 0; begin < data.size(); begin += batch) {
        std::vector<int> rows;
        for (int i = begin; i < std::min(begin + batch, data.size()); ++i) rows.push_back(i);
        const Tensor e = gather(data.e, rows);
        const Tensor b = data.b.empty() ? Tensor() : gather(data.b, rows);
        const Tensor probs = model.forward(e, b);
        for (int ni = 0; ni < probs.n; ++ni) {
            int arg = 0;
            for (int k = 1; k < probs.c; ++k)
                if (probs.at(ni, k, 0, 0) > probs.at(ni, arg, 0, 0)) arg = k;
            if (arg == data.labels[rows[ni]]) ++correct;
        }
    }
    return static_cast<double>(correct) / data.size();
}

/// Batch evaluation parallelized over record stripes. Each worker drives its
/// own clone, so the shared model is never mutated concurrently.
inline double accuracy_parallel(Model& model, const LabeledData& data, int threads)
{
    if (threads <= 1 || data.size() < 64) return accuracy(model, data);
    std::vector<int> correct(threads, 0);
    std::vector<std::thread> pool;
    const int stride = (data.size() + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            Model local = clone_model(model);
            std::vector<int> rows;
            for (int i = w * stride; i < std::min((w + 1) * stride, data.size()); ++i)
                rows.push_back(i);
            if (rows.empty()) return;
            const Tensor e = gather(data.e, rows);
            const Tensor b = data.b.empty() ? Tensor() : gather(data.b, rows);
            const Tensor probs = local.forward(e, b);
            for (int ni = 0; ni < probs.n; ++ni) {
                int arg = 0;
                for (int k = 1; k < probs.c; ++k)
                    if (probs.at(ni, k, 0, 0) > probs.at(ni, arg, 0, 0)) arg = k;
                if (arg == data.labels[rows[ni]]) ++correct[w];
            }
        });
    }
    for (auto& t : pool) t.join();
    int total = 0;
    for (int c : correct) total += c;
    return static_cast<double>(total) / data.size();
}

/// Data-parallel gradient step: stripes of the batch run on model clones and
/// the stripe-weighted gradients drive one Adam update on the shared model.
/// Not bit-reproducible against the single-threaded path.
inline double parallel_train_step(Model& model, const Tensor& e, const Tensor& b,
                                  const std::vector<int>& labels, int threads,
                                  int* correct = nullptr)
{
    const int n = e.n;
    const int workers = std::min(threads, n);
    const int stride = (n + workers - 1) / workers;

    struct StripeResult {
        std::vector<std::vector<double>> grads;
        double loss = 0.0;
        int count = 0;
        int correct = 0;
    };
    std::vector<StripeResult> stripes(workers);
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            std::vector<int> rows;
            for (int i = w * stride; i < std::min((w + 1) * stride, n); ++i) rows.push_back(i);
            if (rows.empty()) return;
            Model local = clone_model(model);
            const Tensor le = gather(e, rows);
            const Tensor lb = b.empty() ? Tensor() : gather(b, rows);
            std::vector<int> ll;
            for (int r : rows) ll.push_back(labels[r]);
            stripes[w].loss = local.accumulate_gradients(le, lb, ll, &stripes[w].correct);
            stripes[w].count = static_cast<int>(rows.size());
            for (Parameter* p : local.parameters()) stripes[w].grads.push_back(p->grad);
        });
    }
    for (auto& t : pool) t.join();

    model.zero_gradients();
    double loss = 0.0;
    for (const StripeResult& stripe : stripes) {
        if (stripe.count == 0) continue;
        const double weight = static_cast<double>(stripe.count) / n;
        loss += weight * stripe.loss;
        if (correct != nullptr) *correct += stripe.correct;
        for (std::size_t pi = 0; pi < model.parameters().size(); ++pi) {
            Parameter* p = model.parameters()[pi];
            for (std::size_t i = 0; i < p->grad.size(); ++i)
                p->grad[i] += weight * stripe.grads[pi][i];
        }
    }
    if (!std::isfinite(loss))
        throw std::runtime_error("nn: non-finite loss; diverging optimization");
    model.apply_adam_step();
    return loss;
}

struct TrainOptions {
    int epochs = 10;
    double val_fraction = 0.1;
    std::uint64_t shuffle_seed = 7;
    int batch_threads = 1; // > 1: data-parallel gradients, not bit-reproducible
};

/// Mini-batch training with a deterministic shuffle stream and a held-out
/// validation slice. Single-threaded; two runs with the same seeds produce
/// identical weights.
inline std::vector<EpochMetrics> train(Model& model, const LabeledData& data,
                                       const TrainOptions& options)
{
    const int total = data.size();
    if (total < 2) throw std::invalid_argument("nn: training needs at least two records");

    RandomStream rng(options.shuffle_seed);
    std::vector<int> order(total);
    for (int i = 0; i < total; ++i) order[i] = i;
    for (int i = total - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform() * (i + 1));
        std::swap(order[i], order[j]);
    }

    const int val_count = std::min(total - 1, static_cast<int>(total * options.val_fraction));
    std::vector<int> val_rows(order.begin(), order.begin() + val_count);
    std::vector<int> train_rows(order.begin() + val_count, order.end());

    LabeledData val;
    if (val_count > 0) {
        val.e = gather(data.e, val_rows);
        if (!data.b.empty()) val.b = gather(data.b, val_rows);
        for (int r : val_rows) val.labels.push_back(data.labels[r]);
    }

    const int batch = std::max(1, model.spec().batch_size);
    std::vector<EpochMetrics> history;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t i = train_rows.size(); i > 1; --i) {
            const std::size_t j = static_cast<std::size_t>(rng.uniform() * i);
            std::swap(train_rows[i - 1], train_rows[j]);
        }

        double loss_sum = 0.0;
        int batches = 0, correct = 0;
        for (std::size_t begin = 0; begin < train_rows.size(); begin += batch) {
            const std::size_t end = std::min(begin + batch, train_rows.size());
            std::vector<int> rows(train_rows.begin() + begin, train_rows.begin() + end);
            Tensor e = gather(data.e, rows);
            Tensor b = data.b.empty() ? Tensor() : gather(data.b, rows);
            std::vector<int> labels;
            labels.reserve(rows.size());
            for (int r : rows) labels.push_back(data.labels[r]);

            if (options.batch_threads > 1)
                loss_sum += parallel_train_step(model, e, b, labels, options.batch_threads,
                                                &correct);
            else
                loss_sum += model.train_step(e, b, labels, &correct);
            ++batches;
        }

        EpochMetrics metrics;
        metrics.epoch = epoch;
        metrics.loss = batches > 0 ? loss_sum / batches : 0.0;
        metrics.train_accuracy =
            train_rows.empty() ? 0.0 : static_cast<double>(correct) / train_rows.size();
        metrics.val_accuracy = val_count > 0 ? accuracy(model, val) : 0.0;
        history.push_back(metrics);
    }
    return history;
}

} // namespace wpos::nn

#endif // WPOS_NN_HPP
