#include "cgtrace/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace cgtrace {

namespace {

thread_local bool g_grad_enabled = true;

bool recording(const std::vector<Tensor>& inputs) {
    if (!g_grad_enabled) return false;
    for (const auto& t : inputs)
        if (t.requires_grad()) return true;
    return false;
}

Tensor make_result(Shape shape, const std::vector<Tensor>& parents) {
    Tensor out(std::move(shape));
    bool rec = recording(parents);
    out.set_requires_grad(rec);
    if (rec) {
        for (const auto& p : parents) out.impl()->parents.push_back(p.impl());
    }
    return out;
}

void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
    if (a.shape() != b.shape())
        throw DimensionError(std::string(op) + ": shape mismatch " +
                             shape_str(a.shape()) + " vs " + shape_str(b.shape()));
}

}  // namespace

int64_t shape_numel(const Shape& shape) {
    int64_t n = 1;
    for (int d : shape) {
        if (d <= 0) throw DimensionError("non-positive extent in shape " + shape_str(shape));
        n *= d;
    }
    return n;
}

std::string shape_str(const Shape& shape) {
    std::ostringstream os;
    os << "[";
    for (size_t i = 0; i < shape.size(); ++i) os << (i ? "," : "") << shape[i];
    os << "]";
    return os.str();
}

void ensure_finite(const double* p, int64_t n, const char* what) {
    for (int64_t i = 0; i < n; ++i)
        if (!std::isfinite(p[i]))
            throw NumericError(std::string("non-finite value in ") + what);
}

void TensorImpl::ensure_grad() {
    if (grad.size() != data.size()) grad.assign(data.size(), 0.0);
}

Tensor::Tensor(Shape shape, bool requires_grad) {
    impl_ = std::make_shared<TensorImpl>();
    impl_->shape = std::move(shape);
    impl_->data.assign(static_cast<size_t>(shape_numel(impl_->shape)), 0.0);
    impl_->requires_grad = requires_grad;
}

Tensor::Tensor(Shape shape, std::vector<double> data, bool requires_grad) {
    impl_ = std::make_shared<TensorImpl>();
    impl_->shape = std::move(shape);
    if (static_cast<int64_t>(data.size()) != shape_numel(impl_->shape))
        throw DimensionError("data length " + std::to_string(data.size()) +
                             " does not match shape " + shape_str(impl_->shape));
    ensure_finite(data.data(), static_cast<int64_t>(data.size()), "tensor init");
    impl_->data = std::move(data);
    impl_->requires_grad = requires_grad;
}

Tensor Tensor::zeros(Shape shape, bool requires_grad) {
    return Tensor(std::move(shape), requires_grad);
}

Tensor Tensor::full(Shape shape, double value, bool requires_grad) {
    Tensor t(std::move(shape), requires_grad);
    std::fill(t.vec().begin(), t.vec().end(), value);
    return t;
}

Tensor Tensor::scalar(double value, bool requires_grad) {
    return Tensor({1}, {value}, requires_grad);
}

Tensor Tensor::randn(Shape shape, std::mt19937_64& rng, double stddev,
                     bool requires_grad) {
    Tensor t(std::move(shape), requires_grad);
    std::normal_distribution<double> dist(0.0, stddev);
    for (auto& v : t.vec()) v = dist(rng);
    return t;
}

std::vector<double>& Tensor::grad() {
    impl_->ensure_grad();
    return impl_->grad;
}

const std::vector<double>& Tensor::grad() const {
    impl_->ensure_grad();
    return impl_->grad;
}

void Tensor::zero_grad() {
    impl_->ensure_grad();
    std::fill(impl_->grad.begin(), impl_->grad.end(), 0.0);
}

double Tensor::item() const {
    if (numel() != 1) throw UsageError("item() on tensor of size " + std::to_string(numel()));
    return impl_->data[0];
}

void Tensor::backward() const {
    if (numel() != 1) throw UsageError("backward() requires a scalar loss");
    // Topological order, leaves first.
    std::vector<TensorImpl*> order;
    std::unordered_set<TensorImpl*> visited{impl_.get()};
    std::vector<std::pair<TensorImpl*, size_t>> stack{{impl_.get(), 0}};
    while (!stack.empty()) {
        auto& [node, idx] = stack.back();
        if (idx < node->parents.size()) {
            TensorImpl* next = node->parents[idx++].get();
            if (visited.insert(next).second) stack.push_back({next, 0});
        } else {
            order.push_back(node);
            stack.pop_back();
        }
    }
    impl_->ensure_grad();
    impl_->grad[0] = 1.0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        TensorImpl* node = *it;
        if (node->backprop) node->backprop(*node);
    }
}

NoGradGuard::NoGradGuard() : prev_(g_grad_enabled) { g_grad_enabled = false; }
NoGradGuard::~NoGradGuard() { g_grad_enabled = prev_; }

bool grad_enabled() { return g_grad_enabled; }

void ConvSpec::validate() const {
    if (kernel_h < 1 || kernel_w < 1) throw DimensionError("conv kernel extents must be >= 1");
    if (stride < 1) throw DimensionError("conv stride must be >= 1");
    if (padding < 0) throw DimensionError("conv padding must be >= 0");
    if (in_channels < 1 || out_channels < 1) throw DimensionError("conv channels must be >= 1");
}

namespace {

int conv_out(int in, int kernel, int stride, int padding) {
    int out = (in + 2 * padding - kernel) / stride + 1;
    if (out < 1) throw DimensionError("conv output extent < 1");
    return out;
}

void acc_grad(TensorImpl& t, const std::vector<double>& g) {
    t.ensure_grad();
    for (size_t i = 0; i < g.size(); ++i) t.grad[i] += g[i];
}

}  // namespace

// ---- elementwise -----------------------------------------------------------

Tensor add(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "add");
    Tensor out = make_result(a.shape(), {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] + pb[i];
    ensure_finite(po, out.numel(), "add");
    if (out.requires_grad()) {
        auto ia = a.impl(), ib = b.impl();
        out.impl()->backprop = [ia, ib](TensorImpl& self) {
            acc_grad(*ia, self.grad);
            acc_grad(*ib, self.grad);
        };
    }
    return out;
}

Tensor sub(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "sub");
    Tensor out = make_result(a.shape(), {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] - pb[i];
    ensure_finite(po, out.numel(), "sub");
    if (out.requires_grad()) {
        auto ia = a.impl(), ib = b.impl();
        out.impl()->backprop = [ia, ib](TensorImpl& self) {
            ia->ensure_grad();
            ib->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) {
                ia->grad[i] += self.grad[i];
                ib->grad[i] -= self.grad[i];
            }
        };
    }
    return out;
}

Tensor mul(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "mul");
    Tensor out = make_result(a.shape(), {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * pb[i];
    ensure_finite(po, out.numel(), "mul");
    if (out.requires_grad()) {
        auto ia = a.impl(), ib = b.impl();
        out.impl()->backprop = [ia, ib](TensorImpl& self) {
            ia->ensure_grad();
            ib->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) {
                ia->grad[i] += self.grad[i] * ib->data[i];
                ib->grad[i] += self.grad[i] * ia->data[i];
            }
        };
    }
    return out;
}

Tensor scale(const Tensor& a, double c) {
    Tensor out = make_result(a.shape(), {a});
    const double* pa = a.data();
    double* po = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) po[i] = pa[i] * c;
    ensure_finite(po, out.numel(), "scale");
    if (out.requires_grad()) {
        auto ia = a.impl();
        out.impl()->backprop = [ia, c](TensorImpl& self) {
            ia->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) ia->grad[i] += self.grad[i] * c;
        };
    }
    return out;
}

Tensor sum(const Tensor& a) {
    Tensor out = make_result({1}, {a});
    double s = 0.0;
    const double* pa = a.data();
    for (int64_t i = 0; i < a.numel(); ++i) s += pa[i];
    out.data()[0] = s;
    ensure_finite(out.data(), 1, "sum");
    if (out.requires_grad()) {
        auto ia = a.impl();
        out.impl()->backprop = [ia](TensorImpl& self) {
            ia->ensure_grad();
            for (auto& g : ia->grad) g += self.grad[0];
        };
    }
    return out;
}

Tensor mean(const Tensor& a) {
    Tensor s = sum(a);
    return scale(s, 1.0 / static_cast<double>(a.numel()));
}

Tensor reshape(const Tensor& a, Shape shape) {
    if (shape_numel(shape) != a.numel())
        throw DimensionError("reshape to " + shape_str(shape) + " from " + shape_str(a.shape()));
    Tensor out = make_result(std::move(shape), {a});
    out.vec() = a.vec();
    if (out.requires_grad()) {
        auto ia = a.impl();
        out.impl()->backprop = [ia](TensorImpl& self) { acc_grad(*ia, self.grad); };
    }
    return out;
}

// ---- convolution ------------------------------------------------------

Tensor conv2d(const Tensor& input, const Tensor& weights, const Tensor& bias,
              const ConvSpec& spec) {
    spec.validate();
    if (input.ndim() != 4) throw DimensionError("conv2d input must be [N,C,H,W]");
    if (weights.ndim() != 4) throw DimensionError("conv2d weights must be [Cout,Cin,kh,kw]");
    const int N = input.dim(0), Cin = input.dim(1), H = input.dim(2), W = input.dim(3);
    const int Cout = weights.dim(0);
    if (Cin != spec.in_channels || Cout != spec.out_channels ||
        weights.dim(1) != Cin || weights.dim(2) != spec.kernel_h ||
        weights.dim(3) != spec.kernel_w || bias.numel() != Cout)
        throw DimensionError("conv2d: spec/tensor shape disagreement");
    const int kh = spec.kernel_h, kw = spec.kernel_w, s = spec.stride, p = spec.padding;
    const int OH = conv_out(H, kh, s, p), OW = conv_out(W, kw, s, p);

    Tensor out = make_result({N, Cout, OH, OW}, {input, weights, bias});
    const double* in = input.data();
    const double* w = weights.data();
    const double* b = bias.data();
    double* o = out.data();
    const int64_t in_c = static_cast<int64_t>(H) * W;
    const int64_t in_n = in_c * Cin;
    const int64_t out_c = static_cast<int64_t>(OH) * OW;
    const int64_t out_n = out_c * Cout;
    const int64_t w_co = static_cast<int64_t>(Cin) * kh * kw;

#pragma omp parallel for collapse(2) schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int co = 0; co < Cout; ++co) {
            double* optr = o + n * out_n + co * out_c;
            for (int64_t i = 0; i < out_c; ++i) optr[i] = b[co];
            for (int ci = 0; ci < Cin; ++ci) {
                const double* iptr = in + n * in_n + ci * in_c;
                for (int ky = 0; ky < kh; ++ky) {
                    for (int kx = 0; kx < kw; ++kx) {
                        const double wv = w[co * w_co + (ci * kh + ky) * kw + kx];
                        if (wv == 0.0) continue;
                        for (int oy = 0; oy < OH; ++oy) {
                            const int iy = oy * s - p + ky;
                            if (iy < 0 || iy >= H) continue;
                            // valid ox range so that 0 <= ox*s - p + kx < W
                            int lo = 0, hi = OW - 1;
                            if (p - kx > 0) lo = (p - kx + s - 1) / s;
                            const int ixmax = W - 1 - kx + p;
                            if (ixmax < 0) continue;
                            if (ixmax / s < hi) hi = ixmax / s;
                            const double* irow = iptr + static_cast<int64_t>(iy) * W - p + kx;
                            double* orow = optr + static_cast<int64_t>(oy) * OW;
                            if (s == 1) {
                                for (int ox = lo; ox <= hi; ++ox) orow[ox] += wv * irow[ox];
                            } else {
                                for (int ox = lo; ox <= hi; ++ox) orow[ox] += wv * irow[ox * s];
                            }
                        }
                    }
                }
            }
        }
    }
    ensure_finite(o, out.numel(), "conv2d");

    if (out.requires_grad()) {
        auto iin = input.impl();
        auto iw = weights.impl();
        auto ib = bias.impl();
        out.impl()->backprop = [=](TensorImpl& self) {
            const double* go = self.grad.data();
            // bias grad
            ib->ensure_grad();
            for (int co = 0; co < Cout; ++co) {
                double s_ = 0.0;
                for (int n = 0; n < N; ++n) {
                    const double* gptr = go + n * out_n + co * out_c;
                    for (int64_t i = 0; i < out_c; ++i) s_ += gptr[i];
                }
                ib->grad[co] += s_;
            }
            // weight grad: disjoint per co
            iw->ensure_grad();
#pragma omp parallel for schedule(static)
            for (int co = 0; co < Cout; ++co) {
                for (int ci = 0; ci < Cin; ++ci) {
                    for (int ky = 0; ky < kh; ++ky) {
                        for (int kx = 0; kx < kw; ++kx) {
                            double acc = 0.0;
                            for (int n = 0; n < N; ++n) {
                                const double* gptr = go + n * out_n + co * out_c;
                                const double* iptr = iin->data.data() + n * in_n + ci * in_c;
                                for (int oy = 0; oy < OH; ++oy) {
                                    const int iy = oy * s - p + ky;
                                    if (iy < 0 || iy >= H) continue;
                                    int lo = 0, hi = OW - 1;
                                    if (p - kx > 0) lo = (p - kx + s - 1) / s;
                                    const int ixmax = W - 1 - kx + p;
                                    if (ixmax < 0) continue;
                                    if (ixmax / s < hi) hi = ixmax / s;
                                    const double* irow = iptr + static_cast<int64_t>(iy) * W - p + kx;
                                    const double* grow = gptr + static_cast<int64_t>(oy) * OW;
                                    for (int ox = lo; ox <= hi; ++ox) acc += grow[ox] * irow[ox * s];
                                }
                            }
                            iw->grad[co * w_co + (ci * kh + ky) * kw + kx] += acc;
                        }
                    }
                }
            }
            // input grad: disjoint per n
            iin->ensure_grad();
#pragma omp parallel for schedule(static)
            for (int n = 0; n < N; ++n) {
                double* giptr = iin->grad.data() + n * in_n;
                const double* wv = iw->data.data();
                for (int co = 0; co < Cout; ++co) {
                    const double* gptr = go + n * out_n + co * out_c;
                    for (int ci = 0; ci < Cin; ++ci) {
                        for (int ky = 0; ky < kh; ++ky) {
                            for (int kx = 0; kx < kw; ++kx) {
                                const double wval = wv[co * w_co + (ci * kh + ky) * kw + kx];
                                if (wval == 0.0) continue;
                                for (int oy = 0; oy < OH; ++oy) {
                                    const int iy = oy * s - p + ky;
                                    if (iy < 0 || iy >= H) continue;
                                    int lo = 0, hi = OW - 1;
                                    if (p - kx > 0) lo = (p - kx + s - 1) / s;
                                    const int ixmax = W - 1 - kx + p;
                                    if (ixmax < 0) continue;
                                    if (ixmax / s < hi) hi = ixmax / s;
                                    double* grow = giptr + ci * in_c + static_cast<int64_t>(iy) * W - p + kx;
                                    const double* gorow = gptr + static_cast<int64_t>(oy) * OW;
                                    for (int ox = lo; ox <= hi; ++ox) grow[ox * s] += wval * gorow[ox];
                                }
                            }
                        }
                    }
                }
            }
        };
    }
    return out;
}

Tensor avg_pool2d(const Tensor& input, int window, int stride) {
    if (input.ndim() != 4) throw DimensionError("avg_pool2d input must be [N,C,H,W]");
    if (window < 1 || stride < 1) throw DimensionError("avg_pool2d window/stride must be >= 1");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    if (window > H || window > W) throw DimensionError("avg_pool2d window larger than input");
    const int OH = (H - window) / stride + 1;
    const int OW = (W - window) / stride + 1;
    Tensor out = make_result({N, C, OH, OW}, {input});
    const double inv = 1.0 / (static_cast<double>(window) * window);
    const double* in = input.data();
    double* o = out.data();
    const int64_t planes = static_cast<int64_t>(N) * C;
#pragma omp parallel for schedule(static)
    for (int64_t pl = 0; pl < planes; ++pl) {
        const double* ip = in + pl * H * W;
        double* op = o + pl * OH * OW;
        for (int oy = 0; oy < OH; ++oy) {
            for (int ox = 0; ox < OW; ++ox) {
                double s = 0.0;
                for (int ky = 0; ky < window; ++ky)
                    for (int kx = 0; kx < window; ++kx)
                        s += ip[(oy * stride + ky) * W + ox * stride + kx];
                op[oy * OW + ox] = s * inv;
            }
        }
    }
    ensure_finite(o, out.numel(), "avg_pool2d");
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [=](TensorImpl& self) {
            ia->ensure_grad();
            const double* go = self.grad.data();
#pragma omp parallel for schedule(static)
            for (int64_t pl = 0; pl < planes; ++pl) {
                double* gp = ia->grad.data() + pl * H * W;
                const double* gop = go + pl * OH * OW;
                for (int oy = 0; oy < OH; ++oy)
                    for (int ox = 0; ox < OW; ++ox) {
                        const double g = gop[oy * OW + ox] * inv;
                        for (int ky = 0; ky < window; ++ky)
                            for (int kx = 0; kx < window; ++kx)
                                gp[(oy * stride + ky) * W + ox * stride + kx] += g;
                    }
            }
        };
    }
    return out;
}

// ---- activations ------------------------------------------------------

Tensor relu(const Tensor& input) {
    Tensor out = make_result(input.shape(), {input});
    const double* x = input.data();
    double* o = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) o[i] = x[i] > 0.0 ? x[i] : 0.0;
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia](TensorImpl& self) {
            ia->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                if (ia->data[i] > 0.0) ia->grad[i] += self.grad[i];
        };
    }
    return out;
}

Tensor relu6(const Tensor& input) {
    Tensor out = make_result(input.shape(), {input});
    const double* x = input.data();
    double* o = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) o[i] = std::min(std::max(0.0, x[i]), 6.0);
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia](TensorImpl& self) {
            ia->ensure_grad();
            // subgradient 0 at both kinks
            for (size_t i = 0; i < self.grad.size(); ++i)
                if (ia->data[i] > 0.0 && ia->data[i] < 6.0) ia->grad[i] += self.grad[i];
        };
    }
    return out;
}

Tensor sigmoid(const Tensor& input) {
    Tensor out = make_result(input.shape(), {input});
    const double* x = input.data();
    double* o = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) {
        const double v = x[i];
        o[i] = v >= 0.0 ? 1.0 / (1.0 + std::exp(-v))
                        : std::exp(v) / (1.0 + std::exp(v));
    }
    ensure_finite(o, out.numel(), "sigmoid");
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia](TensorImpl& self) {
            ia->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i) {
                const double y = self.data[i];
                ia->grad[i] += self.grad[i] * y * (1.0 - y);
            }
        };
    }
    return out;
}

Tensor log(const Tensor& input) {
    Tensor out = make_result(input.shape(), {input});
    const double* x = input.data();
    double* o = out.data();
    for (int64_t i = 0; i < out.numel(); ++i) o[i] = std::log(std::max(x[i], 1e-12));
    ensure_finite(o, out.numel(), "log");
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia](TensorImpl& self) {
            ia->ensure_grad();
            for (size_t i = 0; i < self.grad.size(); ++i)
                ia->grad[i] += self.grad[i] / std::max(ia->data[i], 1e-12);
        };
    }
    return out;
}

Tensor softmax(const Tensor& logits) {
    if (logits.ndim() != 2) throw DimensionError("softmax expects [N,K]");
    const int N = logits.dim(0), K = logits.dim(1);
    if (K < 2) throw DimensionError("softmax expects K >= 2");
    Tensor out = make_result(logits.shape(), {logits});
    const double* z = logits.data();
    double* p = out.data();
    for (int n = 0; n < N; ++n) {
        const double* zr = z + static_cast<int64_t>(n) * K;
        double* pr = p + static_cast<int64_t>(n) * K;
        double mx = zr[0];
        for (int k = 1; k < K; ++k) mx = std::max(mx, zr[k]);
        double s = 0.0;
        for (int k = 0; k < K; ++k) {
            pr[k] = std::exp(zr[k] - mx);
            s += pr[k];
        }
        for (int k = 0; k < K; ++k) pr[k] /= s;
    }
    ensure_finite(p, out.numel(), "softmax");
    if (out.requires_grad()) {
        auto ia = logits.impl();
        out.impl()->backprop = [ia, N, K](TensorImpl& self) {
            ia->ensure_grad();
            for (int n = 0; n < N; ++n) {
                const double* pr = self.data.data() + static_cast<int64_t>(n) * K;
                const double* gr = self.grad.data() + static_cast<int64_t>(n) * K;
                double dot = 0.0;
                for (int k = 0; k < K; ++k) dot += gr[k] * pr[k];
                double* gi = ia->grad.data() + static_cast<int64_t>(n) * K;
                for (int k = 0; k < K; ++k) gi[k] += pr[k] * (gr[k] - dot);
            }
        };
    }
    return out;
}

Tensor fully_connected(const Tensor& input, const Tensor& weights, const Tensor& bias) {
    if (input.ndim() != 2 || weights.ndim() != 2)
        throw DimensionError("fully_connected expects input [N,D], weights [K,D]");
    const int N = input.dim(0), D = input.dim(1), K = weights.dim(0);
    if (weights.dim(1) != D || bias.numel() != K)
        throw DimensionError("fully_connected: shape mismatch");
    Tensor out = make_result({N, K}, {input, weights, bias});
    const double* x = input.data();
    const double* w = weights.data();
    const double* b = bias.data();
    double* o = out.data();
#pragma omp parallel for schedule(static)
    for (int n = 0; n < N; ++n) {
        for (int k = 0; k < K; ++k) {
            double s = b[k];
            const double* xr = x + static_cast<int64_t>(n) * D;
            const double* wr = w + static_cast<int64_t>(k) * D;
            for (int d = 0; d < D; ++d) s += xr[d] * wr[d];
            o[static_cast<int64_t>(n) * K + k] = s;
        }
    }
    ensure_finite(o, out.numel(), "fully_connected");
    if (out.requires_grad()) {
        auto ix = input.impl();
        auto iw = weights.impl();
        auto ib = bias.impl();
        out.impl()->backprop = [=](TensorImpl& self) {
            const double* go = self.grad.data();
            ix->ensure_grad();
            iw->ensure_grad();
            ib->ensure_grad();
            for (int n = 0; n < N; ++n) {
                for (int k = 0; k < K; ++k) {
                    const double g = go[static_cast<int64_t>(n) * K + k];
                    if (g == 0.0) continue;
                    ib->grad[k] += g;
                    const double* xr = ix->data.data() + static_cast<int64_t>(n) * D;
                    const double* wr = iw->data.data() + static_cast<int64_t>(k) * D;
                    double* gxr = ix->grad.data() + static_cast<int64_t>(n) * D;
                    double* gwr = iw->grad.data() + static_cast<int64_t>(k) * D;
                    for (int d = 0; d < D; ++d) {
                        gxr[d] += g * wr[d];
                        gwr[d] += g * xr[d];
                    }
                }
            }
        };
    }
    return out;
}

Tensor cross_entropy(const Tensor& probabilities, const std::vector<int>& labels) {
    if (probabilities.ndim() != 2) throw DimensionError("cross_entropy expects [N,K]");
    const int N = probabilities.dim(0), K = probabilities.dim(1);
    if (static_cast<int>(labels.size()) != N)
        throw DimensionError("cross_entropy: label count mismatch");
    for (int l : labels)
        if (l < 0 || l >= K) throw InputError("cross_entropy: label out of range");
    constexpr double kFloor = 1e-12;
    Tensor out = make_result({1}, {probabilities});
    const double* p = probabilities.data();
    double loss = 0.0;
    for (int n = 0; n < N; ++n)
        loss -= std::log(std::max(p[static_cast<int64_t>(n) * K + labels[n]], kFloor));
    out.data()[0] = loss / N;
    if (out.requires_grad()) {
        auto ip = probabilities.impl();
        out.impl()->backprop = [ip, labels, N, K](TensorImpl& self) {
            ip->ensure_grad();
            const double g = self.grad[0] / N;
            for (int n = 0; n < N; ++n) {
                const int64_t idx = static_cast<int64_t>(n) * K + labels[n];
                if (ip->data[idx] > kFloor) ip->grad[idx] -= g / ip->data[idx];
            }
        };
    }
    return out;
}

Tensor cross_entropy_logits(const Tensor& logits, const std::vector<int>& labels) {
    if (logits.ndim() != 2) throw DimensionError("cross_entropy_logits expects [N,K]");
    const int N = logits.dim(0), K = logits.dim(1);
    if (static_cast<int>(labels.size()) != N)
        throw DimensionError("cross_entropy_logits: label count mismatch");
    for (int l : labels)
        if (l < 0 || l >= K) throw InputError("cross_entropy_logits: label out of range");
    Tensor out = make_result({1}, {logits});
    const double* z = logits.data();
    std::vector<double> probs(static_cast<size_t>(N) * K);
    double loss = 0.0;
    for (int n = 0; n < N; ++n) {
        const double* zr = z + static_cast<int64_t>(n) * K;
        double mx = zr[0];
        for (int k = 1; k < K; ++k) mx = std::max(mx, zr[k]);
        double s = 0.0;
        for (int k = 0; k < K; ++k) s += std::exp(zr[k] - mx);
        const double logz = mx + std::log(s);
        loss += logz - zr[labels[n]];
        for (int k = 0; k < K; ++k)
            probs[static_cast<size_t>(n) * K + k] = std::exp(zr[k] - logz);
    }
    out.data()[0] = loss / N;
    ensure_finite(out.data(), 1, "cross_entropy_logits");
    if (out.requires_grad()) {
        auto iz = logits.impl();
        out.impl()->backprop = [iz, probs = std::move(probs), labels, N, K](TensorImpl& self) {
            iz->ensure_grad();
            const double g = self.grad[0] / N;
            for (int n = 0; n < N; ++n) {
                for (int k = 0; k < K; ++k) {
                    double d = probs[static_cast<size_t>(n) * K + k];
                    if (k == labels[n]) d -= 1.0;
                    iz->grad[static_cast<int64_t>(n) * K + k] += g * d;
                }
            }
        };
    }
    return out;
}

Tensor l1_loss(const Tensor& a, const Tensor& b) {
    check_same_shape(a, b, "l1_loss");
    Tensor out = make_result({1}, {a, b});
    const double* pa = a.data();
    const double* pb = b.data();
    double s = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) s += std::abs(pa[i] - pb[i]);
    out.data()[0] = s / static_cast<double>(a.numel());
    ensure_finite(out.data(), 1, "l1_loss");
    if (out.requires_grad()) {
        auto ia = a.impl(), ib = b.impl();
        const double inv = 1.0 / static_cast<double>(a.numel());
        out.impl()->backprop = [ia, ib, inv](TensorImpl& self) {
            ia->ensure_grad();
            ib->ensure_grad();
            const double g = self.grad[0] * inv;
            for (size_t i = 0; i < ia->data.size(); ++i) {
                const double d = ia->data[i] - ib->data[i];
                const double sg = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
                ia->grad[i] += g * sg;
                ib->grad[i] -= g * sg;
            }
        };
    }
    return out;
}

// ---- pooling / reshuffling helpers ------------------------------------

Tensor global_avg_pool(const Tensor& input) {
    if (input.ndim() != 4) throw DimensionError("global_avg_pool expects [N,C,H,W]");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    Tensor out = make_result({N, C}, {input});
    const double inv = 1.0 / (static_cast<double>(H) * W);
    const double* x = input.data();
    double* o = out.data();
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const double* pl = x + (static_cast<int64_t>(n) * C + c) * H * W;
            double s = 0.0;
            for (int64_t i = 0; i < static_cast<int64_t>(H) * W; ++i) s += pl[i];
            o[static_cast<int64_t>(n) * C + c] = s * inv;
        }
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia, N, C, H, W, inv](TensorImpl& self) {
            ia->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const double g = self.grad[static_cast<int64_t>(n) * C + c] * inv;
                    double* pl = ia->grad.data() + (static_cast<int64_t>(n) * C + c) * H * W;
                    for (int64_t i = 0; i < static_cast<int64_t>(H) * W; ++i) pl[i] += g;
                }
        };
    }
    return out;
}

Tensor channel_mean_map(const Tensor& input) {
    if (input.ndim() != 4) throw DimensionError("channel_mean_map expects [N,C,H,W]");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    Tensor out = make_result({N, 1, H, W}, {input});
    const double* x = input.data();
    double* o = out.data();
    const int64_t hw = static_cast<int64_t>(H) * W;
    for (int n = 0; n < N; ++n)
        for (int64_t i = 0; i < hw; ++i) {
            double s = 0.0;
            for (int c = 0; c < C; ++c) s += x[(static_cast<int64_t>(n) * C + c) * hw + i];
            o[n * hw + i] = s / C;
        }
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia, N, C, hw](TensorImpl& self) {
            ia->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int64_t i = 0; i < hw; ++i) {
                    const double g = self.grad[n * hw + i] / C;
                    for (int c = 0; c < C; ++c)
                        ia->grad[(static_cast<int64_t>(n) * C + c) * hw + i] += g;
                }
        };
    }
    return out;
}

Tensor channel_max_map(const Tensor& input) {
    if (input.ndim() != 4) throw DimensionError("channel_max_map expects [N,C,H,W]");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    Tensor out = make_result({N, 1, H, W}, {input});
    const double* x = input.data();
    double* o = out.data();
    const int64_t hw = static_cast<int64_t>(H) * W;
    std::vector<int> argmax(static_cast<size_t>(N) * hw);
    for (int n = 0; n < N; ++n)
        for (int64_t i = 0; i < hw; ++i) {
            int best = 0;
            double bv = x[static_cast<int64_t>(n) * C * hw + i];
            for (int c = 1; c < C; ++c) {
                const double v = x[(static_cast<int64_t>(n) * C + c) * hw + i];
                if (v > bv) {
                    bv = v;
                    best = c;
                }
            }
            o[n * hw + i] = bv;
            argmax[static_cast<size_t>(n) * hw + i] = best;
        }
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia, N, C, hw, argmax = std::move(argmax)](TensorImpl& self) {
            ia->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int64_t i = 0; i < hw; ++i) {
                    const int c = argmax[static_cast<size_t>(n) * hw + i];
                    ia->grad[(static_cast<int64_t>(n) * C + c) * hw + i] += self.grad[n * hw + i];
                }
        };
    }
    return out;
}

Tensor concat_channels(const Tensor& a, const Tensor& b) {
    if (a.ndim() != 4 || b.ndim() != 4) throw DimensionError("concat_channels expects [N,C,H,W]");
    if (a.dim(0) != b.dim(0) || a.dim(2) != b.dim(2) || a.dim(3) != b.dim(3))
        throw DimensionError("concat_channels: N/H/W mismatch");
    const int N = a.dim(0), Ca = a.dim(1), Cb = b.dim(1), H = a.dim(2), W = a.dim(3);
    Tensor out = make_result({N, Ca + Cb, H, W}, {a, b});
    const int64_t hw = static_cast<int64_t>(H) * W;
    double* o = out.data();
    for (int n = 0; n < N; ++n) {
        std::copy_n(a.data() + static_cast<int64_t>(n) * Ca * hw, Ca * hw,
                    o + static_cast<int64_t>(n) * (Ca + Cb) * hw);
        std::copy_n(b.data() + static_cast<int64_t>(n) * Cb * hw, Cb * hw,
                    o + static_cast<int64_t>(n) * (Ca + Cb) * hw + Ca * hw);
    }
    if (out.requires_grad()) {
        auto ia = a.impl(), ib = b.impl();
        out.impl()->backprop = [ia, ib, N, Ca, Cb, hw](TensorImpl& self) {
            ia->ensure_grad();
            ib->ensure_grad();
            for (int n = 0; n < N; ++n) {
                const double* g = self.grad.data() + static_cast<int64_t>(n) * (Ca + Cb) * hw;
                double* ga = ia->grad.data() + static_cast<int64_t>(n) * Ca * hw;
                double* gb = ib->grad.data() + static_cast<int64_t>(n) * Cb * hw;
                for (int64_t i = 0; i < Ca * hw; ++i) ga[i] += g[i];
                for (int64_t i = 0; i < Cb * hw; ++i) gb[i] += g[Ca * hw + i];
            }
        };
    }
    return out;
}

Tensor concat_features(const std::vector<Tensor>& parts) {
    if (parts.empty()) throw DimensionError("concat_features: empty input");
    const int N = parts[0].dim(0);
    int D = 0;
    for (const auto& p : parts) {
        if (p.ndim() != 2 || p.dim(0) != N)
            throw DimensionError("concat_features: parts must be [N,Di]");
        D += p.dim(1);
    }
    Tensor out = make_result({N, D}, parts);
    double* o = out.data();
    for (int n = 0; n < N; ++n) {
        int off = 0;
        for (const auto& p : parts) {
            const int d = p.dim(1);
            std::copy_n(p.data() + static_cast<int64_t>(n) * d, d,
                        o + static_cast<int64_t>(n) * D + off);
            off += d;
        }
    }
    if (out.requires_grad()) {
        std::vector<std::shared_ptr<TensorImpl>> impls;
        std::vector<int> dims;
        for (const auto& p : parts) {
            impls.push_back(p.impl());
            dims.push_back(p.dim(1));
        }
        out.impl()->backprop = [impls, dims, N, D](TensorImpl& self) {
            for (int n = 0; n < N; ++n) {
                int off = 0;
                for (size_t j = 0; j < impls.size(); ++j) {
                    impls[j]->ensure_grad();
                    for (int d = 0; d < dims[j]; ++d)
                        impls[j]->grad[static_cast<int64_t>(n) * dims[j] + d] +=
                            self.grad[static_cast<int64_t>(n) * D + off + d];
                    off += dims[j];
                }
            }
        };
    }
    return out;
}

Tensor mul_channel_gate(const Tensor& x, const Tensor& gate) {
    if (x.ndim() != 4 || gate.ndim() != 4 || gate.dim(2) != 1 || gate.dim(3) != 1 ||
        gate.dim(0) != x.dim(0) || gate.dim(1) != x.dim(1))
        throw DimensionError("mul_channel_gate: gate must be [N,C,1,1]");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t hw = static_cast<int64_t>(H) * W;
    Tensor out = make_result(x.shape(), {x, gate});
    const double* px = x.data();
    const double* pg = gate.data();
    double* o = out.data();
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const double g = pg[static_cast<int64_t>(n) * C + c];
            const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
            for (int64_t i = 0; i < hw; ++i) o[base + i] = px[base + i] * g;
        }
    if (out.requires_grad()) {
        auto ix = x.impl(), ig = gate.impl();
        out.impl()->backprop = [ix, ig, N, C, hw](TensorImpl& self) {
            ix->ensure_grad();
            ig->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
                    const double g = ig->data[static_cast<int64_t>(n) * C + c];
                    double dg = 0.0;
                    for (int64_t i = 0; i < hw; ++i) {
                        ix->grad[base + i] += self.grad[base + i] * g;
                        dg += self.grad[base + i] * ix->data[base + i];
                    }
                    ig->grad[static_cast<int64_t>(n) * C + c] += dg;
                }
        };
    }
    return out;
}

Tensor mul_spatial_gate(const Tensor& x, const Tensor& gate) {
    if (x.ndim() != 4 || gate.ndim() != 4 || gate.dim(1) != 1 ||
        gate.dim(0) != x.dim(0) || gate.dim(2) != x.dim(2) || gate.dim(3) != x.dim(3))
        throw DimensionError("mul_spatial_gate: gate must be [N,1,H,W]");
    const int N = x.dim(0), C = x.dim(1), H = x.dim(2), W = x.dim(3);
    const int64_t hw = static_cast<int64_t>(H) * W;
    Tensor out = make_result(x.shape(), {x, gate});
    const double* px = x.data();
    const double* pg = gate.data();
    double* o = out.data();
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
            const double* gr = pg + static_cast<int64_t>(n) * hw;
            for (int64_t i = 0; i < hw; ++i) o[base + i] = px[base + i] * gr[i];
        }
    if (out.requires_grad()) {
        auto ix = x.impl(), ig = gate.impl();
        out.impl()->backprop = [ix, ig, N, C, hw](TensorImpl& self) {
            ix->ensure_grad();
            ig->ensure_grad();
            for (int n = 0; n < N; ++n)
                for (int c = 0; c < C; ++c) {
                    const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
                    const double* gr = ig->data.data() + static_cast<int64_t>(n) * hw;
                    double* ggr = ig->grad.data() + static_cast<int64_t>(n) * hw;
                    for (int64_t i = 0; i < hw; ++i) {
                        ix->grad[base + i] += self.grad[base + i] * gr[i];
                        ggr[i] += self.grad[base + i] * ix->data[base + i];
                    }
                }
        };
    }
    return out;
}

Tensor upsample_nearest2x(const Tensor& input) {
    if (input.ndim() != 4) throw DimensionError("upsample_nearest2x expects [N,C,H,W]");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    Tensor out = make_result({N, C, 2 * H, 2 * W}, {input});
    const double* x = input.data();
    double* o = out.data();
    const int64_t planes = static_cast<int64_t>(N) * C;
    for (int64_t pl = 0; pl < planes; ++pl) {
        const double* ip = x + pl * H * W;
        double* op = o + pl * 4 * H * W;
        for (int y = 0; y < 2 * H; ++y)
            for (int xx = 0; xx < 2 * W; ++xx)
                op[static_cast<int64_t>(y) * 2 * W + xx] = ip[(y / 2) * W + xx / 2];
    }
    if (out.requires_grad()) {
        auto ia = input.impl();
        out.impl()->backprop = [ia, planes, H, W](TensorImpl& self) {
            ia->ensure_grad();
            for (int64_t pl = 0; pl < planes; ++pl) {
                const double* gp = self.grad.data() + pl * 4 * H * W;
                double* gi = ia->grad.data() + pl * H * W;
                for (int y = 0; y < 2 * H; ++y)
                    for (int xx = 0; xx < 2 * W; ++xx)
                        gi[(y / 2) * W + xx / 2] += gp[static_cast<int64_t>(y) * 2 * W + xx];
            }
        };
    }
    return out;
}

Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  std::vector<double>& running_mean, std::vector<double>& running_var,
                  bool training, double momentum, double eps) {
    if (input.ndim() != 4) throw DimensionError("batch_norm expects [N,C,H,W]");
    const int N = input.dim(0), C = input.dim(1), H = input.dim(2), W = input.dim(3);
    if (gamma.numel() != C || beta.numel() != C)
        throw DimensionError("batch_norm: gamma/beta must have C entries");
    if (running_mean.size() != static_cast<size_t>(C) ||
        running_var.size() != static_cast<size_t>(C))
        throw DimensionError("batch_norm: running stats must have C entries");
    const int64_t hw = static_cast<int64_t>(H) * W;
    const int64_t per_ch = static_cast<int64_t>(N) * hw;
    if (training && per_ch < 2) throw DimensionError("batch_norm: need N*H*W >= 2 in train mode");

    std::vector<double> mu(C), invstd(C);
    const double* x = input.data();
    if (training) {
        for (int c = 0; c < C; ++c) {
            double s = 0.0;
            for (int n = 0; n < N; ++n) {
                const double* pl = x + (static_cast<int64_t>(n) * C + c) * hw;
                for (int64_t i = 0; i < hw; ++i) s += pl[i];
            }
            const double m = s / per_ch;
            double v = 0.0;
            for (int n = 0; n < N; ++n) {
                const double* pl = x + (static_cast<int64_t>(n) * C + c) * hw;
                for (int64_t i = 0; i < hw; ++i) v += (pl[i] - m) * (pl[i] - m);
            }
            v /= per_ch;
            mu[c] = m;
            invstd[c] = 1.0 / std::sqrt(v + eps);
            running_mean[c] = (1.0 - momentum) * running_mean[c] + momentum * m;
            running_var[c] = (1.0 - momentum) * running_var[c] + momentum * v;
        }
    } else {
        for (int c = 0; c < C; ++c) {
            mu[c] = running_mean[c];
            invstd[c] = 1.0 / std::sqrt(running_var[c] + eps);
        }
    }

    Tensor out = make_result(input.shape(), {input, gamma, beta});
    double* o = out.data();
    const double* g = gamma.data();
    const double* b = beta.data();
    std::vector<double> xhat(static_cast<size_t>(input.numel()));
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c) {
            const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
            for (int64_t i = 0; i < hw; ++i) {
                const double xh = (x[base + i] - mu[c]) * invstd[c];
                xhat[base + i] = xh;
                o[base + i] = g[c] * xh + b[c];
            }
        }
    ensure_finite(o, out.numel(), "batch_norm");

    if (out.requires_grad()) {
        auto ix = input.impl();
        auto ig = gamma.impl();
        auto ib = beta.impl();
        out.impl()->backprop = [=, xhat = std::move(xhat), invstd = std::move(invstd)](
                                   TensorImpl& self) {
            ix->ensure_grad();
            ig->ensure_grad();
            ib->ensure_grad();
            const double* go = self.grad.data();
            for (int c = 0; c < C; ++c) {
                double sum_g = 0.0, sum_gx = 0.0;
                for (int n = 0; n < N; ++n) {
                    const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
                    for (int64_t i = 0; i < hw; ++i) {
                        sum_g += go[base + i];
                        sum_gx += go[base + i] * xhat[base + i];
                    }
                }
                ig->grad[c] += sum_gx;
                ib->grad[c] += sum_g;
                const double gc = ig->data[c];
                if (training) {
                    const double mg = sum_g / per_ch;
                    const double mgx = sum_gx / per_ch;
                    for (int n = 0; n < N; ++n) {
                        const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
                        for (int64_t i = 0; i < hw; ++i)
                            ix->grad[base + i] += gc * invstd[c] *
                                                  (go[base + i] - mg - xhat[base + i] * mgx);
                    }
                } else {
                    for (int n = 0; n < N; ++n) {
                        const int64_t base = (static_cast<int64_t>(n) * C + c) * hw;
                        for (int64_t i = 0; i < hw; ++i)
                            ix->grad[base + i] += gc * invstd[c] * go[base + i];
                    }
                }
            }
        };
    }
    return out;
}

// ---- Adam ---------------------------------------------------------------

Adam::Adam(std::vector<Tensor> params, double lr, double beta1, double beta2, double eps)
    : params_(std::move(params)) {
    state_.lr = lr;
    state_.beta1 = beta1;
    state_.beta2 = beta2;
    state_.eps = eps;
    for (const auto& p : params_) {
        state_.first_moment.emplace_back(p.numel(), 0.0);
        state_.second_moment.emplace_back(p.numel(), 0.0);
    }
}

void Adam::step() {
    ++state_.step_count;
    const double bc1 = 1.0 - std::pow(state_.beta1, state_.step_count);
    const double bc2 = 1.0 - std::pow(state_.beta2, state_.step_count);
    for (size_t j = 0; j < params_.size(); ++j) {
        Tensor& p = params_[j];
        auto& m = state_.first_moment[j];
        auto& v = state_.second_moment[j];
        const auto& g = p.grad();
        double* d = p.data();
        for (size_t i = 0; i < m.size(); ++i) {
            m[i] = state_.beta1 * m[i] + (1.0 - state_.beta1) * g[i];
            v[i] = state_.beta2 * v[i] + (1.0 - state_.beta2) * g[i] * g[i];
            const double mh = m[i] / bc1;
            const double vh = v[i] / bc2;
            d[i] -= state_.lr * mh / (std::sqrt(vh) + state_.eps);
        }
        ensure_finite(d, p.numel(), "adam_step");
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.zero_grad();
}

// ---- layers ---------------------------------------------------------------

Conv2dLayer::Conv2dLayer(int in_ch, int out_ch, int kernel, int stride, int padding) {
    spec = ConvSpec{in_ch, out_ch, kernel, kernel, stride, padding};
    spec.validate();
    weight = Tensor::zeros({out_ch, in_ch, kernel, kernel}, true);
    bias = Tensor::zeros({out_ch}, true);
}

void Conv2dLayer::init_he(std::mt19937_64& rng) {
    const double fan_in = static_cast<double>(spec.in_channels) * spec.kernel_h * spec.kernel_w;
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / fan_in));
    for (auto& v : weight.vec()) v = dist(rng);
    std::fill(bias.vec().begin(), bias.vec().end(), 0.0);
}

void Conv2dLayer::init_zero() {
    std::fill(weight.vec().begin(), weight.vec().end(), 0.0);
    std::fill(bias.vec().begin(), bias.vec().end(), 0.0);
}

Tensor Conv2dLayer::forward(const Tensor& x) const { return conv2d(x, weight, bias, spec); }

DenseLayer::DenseLayer(int in_dim, int out_dim) {
    weight = Tensor::zeros({out_dim, in_dim}, true);
    bias = Tensor::zeros({out_dim}, true);
}

void DenseLayer::init_he(std::mt19937_64& rng) {
    std::normal_distribution<double> dist(0.0, std::sqrt(2.0 / weight.dim(1)));
    for (auto& v : weight.vec()) v = dist(rng);
    std::fill(bias.vec().begin(), bias.vec().end(), 0.0);
}

Tensor DenseLayer::forward(const Tensor& x) const { return fully_connected(x, weight, bias); }

BatchNorm2dLayer::BatchNorm2dLayer(int channels) {
    gamma = Tensor::full({channels}, 1.0, true);
    beta = Tensor::zeros({channels}, true);
    running_mean.assign(channels, 0.0);
    running_var.assign(channels, 1.0);
}

Tensor BatchNorm2dLayer::forward(const Tensor& x, bool training) {
    return batch_norm(x, gamma, beta, running_mean, running_var, training, momentum, eps);
}

}  // namespace cgtrace
