#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "cgtrace/errors.hpp"

namespace cgtrace {

using Shape = std::vector<int>;

int64_t shape_numel(const Shape& shape);
std::string shape_str(const Shape& shape);

struct TensorImpl {
    Shape shape;
    std::vector<double> data;
    std::vector<double> grad;  // allocated lazily, same size as data
    bool requires_grad = false;
    std::vector<std::shared_ptr<TensorImpl>> parents;
    // Pulls this node's grad into the parents' grads.
    std::function<void(TensorImpl&)> backprop;

    void ensure_grad();
};

// Value-semantic handle over a node in the autodiff tape. Copies share
// storage; ops record a backward closure when any input requires grad.
class Tensor {
public:
    Tensor() = default;
    explicit Tensor(Shape shape, bool requires_grad = false);
    Tensor(Shape shape, std::vector<double> data, bool requires_grad = false);

    static Tensor zeros(Shape shape, bool requires_grad = false);
    static Tensor full(Shape shape, double value, bool requires_grad = false);
    static Tensor scalar(double value, bool requires_grad = false);
    // Gaussian init with given stddev.
    static Tensor randn(Shape shape, std::mt19937_64& rng, double stddev,
                        bool requires_grad = false);

    bool defined() const { return impl_ != nullptr; }
    const Shape& shape() const { return impl_->shape; }
    int dim(int i) const { return impl_->shape.at(static_cast<size_t>(i)); }
    int ndim() const { return static_cast<int>(impl_->shape.size()); }
    int64_t numel() const { return static_cast<int64_t>(impl_->data.size()); }

    double* data() { return impl_->data.data(); }
    const double* data() const { return impl_->data.data(); }
    std::vector<double>& vec() { return impl_->data; }
    const std::vector<double>& vec() const { return impl_->data; }

    bool requires_grad() const { return impl_->requires_grad; }
    void set_requires_grad(bool rg) { impl_->requires_grad = rg; }
    bool has_grad() const { return !impl_->grad.empty(); }
    std::vector<double>& grad();
    const std::vector<double>& grad() const;
    void zero_grad();

    double item() const;

    // Reverse-mode accumulation from a scalar loss to all grad-requiring
    // leaves. Throws UsageError if called on a non-scalar.
    void backward() const;

    std::shared_ptr<TensorImpl> impl() const { return impl_; }

private:
    std::shared_ptr<TensorImpl> impl_;
};

// Disables tape recording in scope (inference / preprocessing).
class NoGradGuard {
public:
    NoGradGuard();
    ~NoGradGuard();
    NoGradGuard(const NoGradGuard&) = delete;
    NoGradGuard& operator=(const NoGradGuard&) = delete;

private:
    bool prev_;
};

bool grad_enabled();

struct ConvSpec {
    int in_channels = 0;
    int out_channels = 0;
    int kernel_h = 1;
    int kernel_w = 1;
    int stride = 1;
    int padding = 0;

    void validate() const;
};

// ---- differentiable ops ----------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, double c);
Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
Tensor reshape(const Tensor& a, Shape shape);

// Cross-correlation with zero padding. input [N,Cin,H,W], weights
// [Cout,Cin,kh,kw], bias [Cout].
Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec);
Tensor avg_pool2d(const Tensor& input, int window = 2, int stride = 2);
Tensor relu(const Tensor& input);
Tensor relu6(const Tensor& input);
Tensor sigmoid(const Tensor& input);
// Elementwise natural log; input clamped to >= 1e-12 for stability.
Tensor log(const Tensor& input);
Tensor softmax(const Tensor& logits);  // [N,K], rows sum to 1
// Affine map: input [N,D], weights [K,D], bias [K] -> [N,K].
Tensor fully_connected(const Tensor& input, const Tensor& weights,
                       const Tensor& bias);
// Mean of -log p[label] over rows of a probability matrix.
Tensor cross_entropy(const Tensor& probabilities, const std::vector<int>& labels);
// Fused log-softmax + NLL on raw logits (the training path).
Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& labels);
Tensor l1_loss(const Tensor& a, const Tensor& b);

// [N,C,H,W] -> [N,C]
Tensor global_avg_pool(const Tensor& input);
// channel-axis mean / max maps: [N,C,H,W] -> [N,1,H,W]
Tensor channel_mean_map(const Tensor& input);
Tensor channel_max_map(const Tensor& input);
Tensor concat_channels(const Tensor& a, const Tensor& b);  // along C
Tensor concat_features(const std::vector<Tensor>& parts);  // [N,Di] -> [N,sum Di]
// x [N,C,H,W] * gate [N,C,1,1]
Tensor mul_channel_gate(const Tensor& x, const Tensor& gate);
// x [N,C,H,W] * gate [N,1,H,W]
Tensor mul_spatial_gate(const Tensor& x, const Tensor& gate);
Tensor upsample_nearest2x(const Tensor& input);

// Per-channel batch normalization. running_mean/running_var are updated in
// train mode and consumed in eval mode.
Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  std::vector<double>& running_mean,
                  std::vector<double>& running_var, bool training,
                  double momentum = 0.1, double eps = 1e-5);

// ---- optimizer ---------------------------------------------------------

struct AdamState {
    int step_count = 0;
    double lr = 0.0008;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::vector<std::vector<double>> first_moment;
    std::vector<std::vector<double>> second_moment;
};

class Adam {
public:
    explicit Adam(std::vector<Tensor> params, double lr = 0.0008,
                  double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    void step();
    void zero_grad();
    const AdamState& state() const { return state_; }
    AdamState& state() { return state_; }
    std::vector<Tensor>& params() { return params_; }

private:
    std::vector<Tensor> params_;
    AdamState state_;
};

// ---- layers -----------------------------------------------------------

struct Conv2dLayer {
    Tensor weight;  // [Cout,Cin,kh,kw]
    Tensor bias;    // [Cout]
    ConvSpec spec;

    Conv2dLayer() = default;
    Conv2dLayer(int in_ch, int out_ch, int kernel, int stride, int padding);
    void init_he(std::mt19937_64& rng);
    void init_zero();
    Tensor forward(const Tensor& x) const;
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        fn(prefix + ".weight", weight);
        fn(prefix + ".bias", bias);
    }
};

struct DenseLayer {
    Tensor weight;  // [K,D]
    Tensor bias;    // [K]

    DenseLayer() = default;
    DenseLayer(int in_dim, int out_dim);
    void init_he(std::mt19937_64& rng);
    Tensor forward(const Tensor& x) const;
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        fn(prefix + ".weight", weight);
        fn(prefix + ".bias", bias);
    }
};

struct BatchNorm2dLayer {
    Tensor gamma;
    Tensor beta;
    std::vector<double> running_mean;
    std::vector<double> running_var;
    double momentum = 0.1;
    double eps = 1e-5;

    BatchNorm2dLayer() = default;
    explicit BatchNorm2dLayer(int channels);
    Tensor forward(const Tensor& x, bool training);
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        fn(prefix + ".gamma", gamma);
        fn(prefix + ".beta", beta);
    }
    // Non-trainable state (running statistics), for checkpoints.
    template <typename Fn>
    void visit_buffers(const std::string& prefix, Fn&& fn) {
        fn(prefix + ".running_mean", running_mean);
        fn(prefix + ".running_var", running_var);
    }
};

void ensure_finite(const double* p, int64_t n, const char* what);

}  // namespace cgtrace
