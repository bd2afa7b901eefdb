#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cgtrace/tensor.hpp"
#include "testutil.hpp"

using namespace cgtrace;
using testutil::grad_check;

namespace {

Tensor rg(Shape shape, std::mt19937_64& rng, double stddev = 1.0) {
    return Tensor::randn(shape, rng, stddev, true);
}

}  // namespace

TEST_CASE("elementwise and reduction gradients") {
    std::mt19937_64 rng(1);
    Tensor a = rg({3, 4}, rng), b = rg({3, 4}, rng);
    CHECK(grad_check({a, b}, [&] { return sum(mul(add(a, b), sub(a, b))); }) < 1e-4);
    CHECK(grad_check({a}, [&] { return mean(scale(a, 3.25)); }) < 1e-4);
    CHECK(grad_check({a}, [&] { return sum(reshape(a, {12})); }) < 1e-4);
    CHECK(grad_check({a, b}, [&] { return l1_loss(a, b); }) < 1e-4);
}

TEST_CASE("activation gradients") {
    std::mt19937_64 rng(2);
    Tensor a = rg({2, 8}, rng, 2.0);
    CHECK(grad_check({a}, [&] { return sum(relu(a)); }) < 1e-4);
    CHECK(grad_check({a}, [&] { return sum(relu6(a)); }) < 1e-4);
    CHECK(grad_check({a}, [&] { return sum(sigmoid(a)); }) < 1e-4);
    Tensor pos = Tensor::full({5}, 0.8, true);
    CHECK(grad_check({pos}, [&] { return sum(log(pos)); }) < 1e-4);
}

TEST_CASE("softmax and cross-entropy gradients") {
    std::mt19937_64 rng(3);
    Tensor z = rg({4, 3}, rng);
    const std::vector<int> labels{0, 2, 1, 1};
    // weight rows so the softmax backward sees a non-uniform upstream grad
    Tensor w = rg({4, 3}, rng);
    w.set_requires_grad(false);
    CHECK(grad_check({z}, [&] { return sum(mul(softmax(z), w)); }) < 1e-4);
    CHECK(grad_check({z}, [&] { return cross_entropy_logits(z, labels); }) < 1e-4);
    Tensor zpos = Tensor::randn({3, 2}, rng, 0.1, true);
    CHECK(grad_check({zpos}, [&] { return cross_entropy(softmax(zpos), {1, 0, 1}); }) < 1e-4);
}

TEST_CASE("conv2d gradients for input, weights, bias") {
    std::mt19937_64 rng(4);
    for (const auto& [stride, pad, k] :
         std::vector<std::tuple<int, int, int>>{{1, 1, 3}, {2, 2, 5}, {1, 0, 1}}) {
        Tensor x = rg({2, 3, 7, 7}, rng);
        Tensor w = rg({4, 3, k, k}, rng, 0.5);
        Tensor b = rg({4}, rng);
        ConvSpec spec{3, 4, k, k, stride, pad};
        Tensor mix = Tensor::randn({1}, rng, 1.0, false);
        CHECK(grad_check({x, w, b}, [&] { return mean(conv2d(x, w, b, spec)); }, 5) < 1e-4);
    }
}

TEST_CASE("pooling gradients") {
    std::mt19937_64 rng(5);
    Tensor x = rg({2, 2, 6, 6}, rng);
    CHECK(grad_check({x}, [&] { return sum(avg_pool2d(x)); }) < 1e-4);
    CHECK(grad_check({x}, [&] { return sum(avg_pool2d(x, 3, 2)); }) < 1e-4);
    CHECK(grad_check({x}, [&] { return sum(global_avg_pool(x)); }) < 1e-4);
}

TEST_CASE("fully connected gradients") {
    std::mt19937_64 rng(6);
    Tensor x = rg({3, 5}, rng);
    Tensor w = rg({2, 5}, rng);
    Tensor b = rg({2}, rng);
    CHECK(grad_check({x, w, b}, [&] { return sum(sigmoid(fully_connected(x, w, b))); }) < 1e-4);
}

TEST_CASE("attention helper gradients") {
    std::mt19937_64 rng(7);
    Tensor x = rg({2, 4, 3, 3}, rng);
    Tensor cgate = rg({2, 4, 1, 1}, rng, 0.5);
    Tensor sgate = rg({2, 1, 3, 3}, rng, 0.5);
    CHECK(grad_check({x, cgate}, [&] { return sum(mul_channel_gate(x, sigmoid(cgate))); }) < 1e-4);
    CHECK(grad_check({x, sgate}, [&] { return sum(mul_spatial_gate(x, sigmoid(sgate))); }) < 1e-4);
    CHECK(grad_check({x}, [&] { return sum(mul(channel_mean_map(x), channel_mean_map(x))); }) <
          1e-4);
    // max map: perturbations stay below the argmax gap at h=1e-6
    CHECK(grad_check({x}, [&] { return sum(mul(channel_max_map(x), channel_max_map(x))); }) <
          1e-4);
    Tensor y = rg({2, 2, 3, 3}, rng);
    CHECK(grad_check({x, y}, [&] { return sum(sigmoid(concat_channels(x, y))); }) < 1e-4);
    Tensor f1 = rg({2, 3}, rng), f2 = rg({2, 4}, rng);
    CHECK(grad_check({f1, f2}, [&] {
              return sum(sigmoid(concat_features({f1, f2})));
          }) < 1e-4);
    CHECK(grad_check({x}, [&] { return sum(mul(upsample_nearest2x(x), upsample_nearest2x(x))); }) <
          1e-4);
}

TEST_CASE("batch norm gradients (train mode)") {
    std::mt19937_64 rng(8);
    Tensor x = rg({3, 2, 4, 4}, rng);
    Tensor gamma = Tensor::full({2}, 1.3, true);
    Tensor beta = Tensor::full({2}, -0.2, true);
    CHECK(grad_check({x, gamma, beta}, [&] {
              std::vector<double> rm(2, 0.0), rv(2, 1.0);  // fresh stats per call
              return sum(mul(batch_norm(x, gamma, beta, rm, rv, true),
                             batch_norm(x, gamma, beta, rm, rv, true)));
          }, 5, 1e-4) < 1e-4);  // larger h: variance path cancels badly at 1e-6
}

TEST_CASE("gradient accumulates across shared subexpressions (diamond graph)") {
    std::mt19937_64 rng(9);
    Tensor a = rg({4}, rng);
    CHECK(grad_check({a}, [&] {
              Tensor s = sigmoid(a);
              return sum(add(mul(s, s), s));
          }) < 1e-4);
}

TEST_CASE("backward requires a scalar") {
    std::mt19937_64 rng(10);
    Tensor a = rg({3}, rng);
    Tensor y = relu(a);
    CHECK_THROWS_AS(y.backward(), UsageError);
}

TEST_CASE("no-grad guard suppresses taping") {
    std::mt19937_64 rng(11);
    Tensor a = rg({3}, rng);
    NoGradGuard guard;
    Tensor y = sum(sigmoid(a));
    CHECK_FALSE(y.requires_grad());
    CHECK(y.impl()->parents.empty());
}

TEST_CASE("graph nodes are released once the loss tensor goes out of scope") {
    // Ops whose backward reads the op's own output (sigmoid, softmax) must not
    // capture a shared_ptr to that output inside its backprop closure: that is
    // a reference cycle and the whole upstream graph leaks per training step.
    std::mt19937_64 rng(12);
    Tensor a = rg({4, 3}, rng);
    std::weak_ptr<TensorImpl> sig_node, soft_node;
    {
        Tensor s = sigmoid(a);
        Tensor p = softmax(s);
        Tensor loss = mean(p);
        loss.backward();
        sig_node = s.impl();
        soft_node = p.impl();
    }
    CHECK(sig_node.expired());
    CHECK(soft_node.expired());
}
