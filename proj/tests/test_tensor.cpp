#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>
#include <omp.h>

#include <random>

#include "cgtrace/errors.hpp"
#include "cgtrace/reference.hpp"
#include "cgtrace/tensor.hpp"

using namespace cgtrace;

namespace {

Tensor rand_t(Shape shape, std::mt19937_64& rng) {
    return Tensor::randn(shape, rng, 1.0, false);
}

double max_diff(const Tensor& a, const std::vector<double>& b) {
    REQUIRE(a.numel() == static_cast<int64_t>(b.size()));
    double m = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a.data()[i] - b[i]));
    return m;
}

}  // namespace

TEST_CASE("conv2d matches the brute-force oracle across shapes") {
    std::mt19937_64 rng(11);
    struct Case {
        int N, Cin, H, W, Cout, k, stride, pad;
    };
    const Case cases[] = {
        {1, 1, 5, 5, 1, 3, 1, 1},  {2, 3, 8, 8, 4, 5, 1, 2},  {1, 4, 9, 7, 2, 3, 2, 1},
        {2, 2, 6, 6, 3, 1, 1, 0},  {1, 3, 16, 16, 8, 7, 1, 3}, {1, 2, 8, 8, 2, 3, 2, 0},
    };
    for (const auto& c : cases) {
        CAPTURE(c.H);
        CAPTURE(c.k);
        CAPTURE(c.stride);
        Tensor x = rand_t({c.N, c.Cin, c.H, c.W}, rng);
        Tensor w = rand_t({c.Cout, c.Cin, c.k, c.k}, rng);
        Tensor b = rand_t({c.Cout}, rng);
        ConvSpec spec{c.Cin, c.Cout, c.k, c.k, c.stride, c.pad};
        Tensor out = conv2d(x, w, b, spec);
        auto ref = reference::conv2d_naive(x.vec(), c.N, c.Cin, c.H, c.W, w.vec(), c.Cout, c.k,
                                           c.k, b.vec(), c.stride, c.pad);
        CHECK(max_diff(out, ref) < 1e-12);
    }
}

TEST_CASE("conv2d validates shapes") {
    std::mt19937_64 rng(3);
    Tensor x = rand_t({1, 3, 8, 8}, rng);
    Tensor w = rand_t({4, 2, 3, 3}, rng);  // Cin mismatch
    Tensor b = rand_t({4}, rng);
    CHECK_THROWS_AS(conv2d(x, w, b, ConvSpec{3, 4, 3, 3, 1, 1}), DimensionError);
    CHECK_THROWS_AS((ConvSpec{3, 4, 3, 3, 0, 1}.validate()), DimensionError);
}

TEST_CASE("avg_pool2d matches the oracle") {
    std::mt19937_64 rng(5);
    for (const auto& [H, W, win, stride] :
         std::vector<std::tuple<int, int, int, int>>{{8, 8, 2, 2}, {9, 7, 3, 2}, {6, 6, 2, 1}}) {
        Tensor x = rand_t({2, 3, H, W}, rng);
        Tensor out = avg_pool2d(x, win, stride);
        auto ref = reference::avg_pool2d_naive(x.vec(), 2, 3, H, W, win, stride);
        CHECK(max_diff(out, ref) < 1e-12);
    }
}

TEST_CASE("fully_connected matches the oracle") {
    std::mt19937_64 rng(7);
    Tensor x = rand_t({5, 13}, rng);
    Tensor w = rand_t({4, 13}, rng);
    Tensor b = rand_t({4}, rng);
    Tensor out = fully_connected(x, w, b);
    auto ref = reference::fully_connected_naive(x.vec(), 5, 13, w.vec(), 4, b.vec());
    CHECK(max_diff(out, ref) < 1e-12);
}

TEST_CASE("relu6 clamps at 0 and 6") {
    Tensor x({7}, {-3.0, -0.1, 0.0, 2.5, 6.0, 6.1, 100.0});
    Tensor y = relu6(x);
    const double expect[] = {0.0, 0.0, 0.0, 2.5, 6.0, 6.0, 6.0};
    for (int i = 0; i < 7; ++i) CHECK(y.data()[i] == expect[i]);
}

TEST_CASE("softmax of equal logits is uniform and shift-invariant") {
    Tensor z({1, 2}, {0.0, 0.0});
    Tensor p = softmax(z);
    CHECK(p.data()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(p.data()[1] == doctest::Approx(0.5).epsilon(1e-12));

    std::mt19937_64 rng(9);
    Tensor a = rand_t({3, 4}, rng);
    Tensor b = Tensor::zeros({3, 4});
    for (int i = 0; i < 12; ++i) b.data()[i] = a.data()[i] + 41.5;  // per-row constant shift
    Tensor pa = softmax(a), pb = softmax(b);
    for (int i = 0; i < 12; ++i)
        CHECK(pa.data()[i] == doctest::Approx(pb.data()[i]).epsilon(1e-9));
    for (int n = 0; n < 3; ++n) {
        double s = 0.0;
        for (int k = 0; k < 4; ++k) s += pa.data()[n * 4 + k];
        CHECK(s == doctest::Approx(1.0).epsilon(1e-9));
    }
}

TEST_CASE("sigmoid and log fixtures") {
    Tensor x({3}, {0.0, 2.0, -2.0});
    Tensor y = sigmoid(x);
    CHECK(y.data()[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(y.data()[1] == doctest::Approx(1.0 / (1.0 + std::exp(-2.0))).epsilon(1e-12));
    CHECK(y.data()[1] + y.data()[2] == doctest::Approx(1.0).epsilon(1e-12));

    Tensor e({2}, {1.0, std::exp(1.0)});
    Tensor l = log(e);
    CHECK(l.data()[0] == doctest::Approx(0.0));
    CHECK(l.data()[1] == doctest::Approx(1.0));
}

TEST_CASE("cross_entropy on known probabilities") {
    Tensor p({2, 2}, {0.25, 0.75, 0.5, 0.5});
    Tensor ce = cross_entropy(p, {1, 0});
    CHECK(ce.item() == doctest::Approx(-(std::log(0.75) + std::log(0.5)) / 2.0).epsilon(1e-12));
    CHECK_THROWS_AS(cross_entropy(p, {1}), DimensionError);
    CHECK_THROWS_AS(cross_entropy(p, {1, 2}), InputError);
}

TEST_CASE("cross_entropy_logits equals softmax + cross_entropy") {
    std::mt19937_64 rng(13);
    Tensor z = rand_t({4, 2}, rng);
    const std::vector<int> labels{0, 1, 1, 0};
    Tensor a = cross_entropy_logits(z, labels);
    Tensor b = cross_entropy(softmax(z), labels);
    CHECK(a.item() == doctest::Approx(b.item()).epsilon(1e-10));
}

TEST_CASE("global_avg_pool equals per-channel means") {
    std::mt19937_64 rng(17);
    Tensor x = rand_t({2, 3, 4, 5}, rng);
    Tensor g = global_avg_pool(x);
    for (int n = 0; n < 2; ++n)
        for (int c = 0; c < 3; ++c) {
            double s = 0.0;
            for (int i = 0; i < 20; ++i) s += x.data()[(n * 3 + c) * 20 + i];
            CHECK(g.data()[n * 3 + c] == doctest::Approx(s / 20.0).epsilon(1e-12));
        }
}

TEST_CASE("channel mean/max maps and concat") {
    Tensor x({1, 2, 2, 2}, {1, 2, 3, 4, 5, 6, 7, 8});
    Tensor mean = channel_mean_map(x);
    Tensor mx = channel_max_map(x);
    CHECK(mean.data()[0] == doctest::Approx(3.0));
    CHECK(mx.data()[0] == 5.0);
    Tensor cat = concat_channels(mean, mx);
    CHECK(cat.shape() == Shape{1, 2, 2, 2});
    CHECK(cat.data()[0] == mean.data()[0]);
    CHECK(cat.data()[4] == mx.data()[0]);
}

TEST_CASE("upsample_nearest2x repeats pixels") {
    Tensor x({1, 1, 2, 2}, {1, 2, 3, 4});
    Tensor y = upsample_nearest2x(x);
    CHECK(y.shape() == Shape{1, 1, 4, 4});
    const double expect[] = {1, 1, 2, 2, 1, 1, 2, 2, 3, 3, 4, 4, 3, 3, 4, 4};
    for (int i = 0; i < 16; ++i) CHECK(y.data()[i] == expect[i]);
}

TEST_CASE("batch_norm normalizes in train mode and uses running stats in eval") {
    std::mt19937_64 rng(19);
    Tensor x = rand_t({4, 2, 3, 3}, rng);
    Tensor gamma = Tensor::full({2}, 1.0, true);
    Tensor beta = Tensor::zeros({2}, true);
    std::vector<double> rm(2, 0.0), rv(2, 1.0);
    Tensor y = batch_norm(x, gamma, beta, rm, rv, true);
    // per-channel mean ~ 0, var ~ 1 over N*H*W
    for (int c = 0; c < 2; ++c) {
        double s = 0.0, s2 = 0.0;
        int cnt = 0;
        for (int n = 0; n < 4; ++n)
            for (int i = 0; i < 9; ++i) {
                const double v = y.data()[(n * 2 + c) * 9 + i];
                s += v;
                s2 += v * v;
                ++cnt;
            }
        CHECK(s / cnt == doctest::Approx(0.0).epsilon(1e-9));
        CHECK(s2 / cnt == doctest::Approx(1.0).epsilon(1e-3));  // eps-regularized
    }
    // eval mode with frozen stats is an affine map
    std::vector<double> rm2(2, 0.5), rv2(2, 4.0);
    Tensor z = batch_norm(x, gamma, beta, rm2, rv2, false);
    CHECK(z.data()[0] ==
          doctest::Approx((x.data()[0] - 0.5) / std::sqrt(4.0 + 1e-5)).epsilon(1e-9));
    CHECK(rm2[0] == 0.5);  // untouched in eval mode
}

TEST_CASE("Adam single step matches the hand-computed update") {
    Tensor p = Tensor::full({1}, 2.0, true);
    Adam opt({p}, 0.1);
    p.zero_grad();
    p.grad()[0] = 0.5;
    opt.step();
    // t=1: mhat = g, vhat = g^2 -> update = lr * g / (|g| + eps)
    const double expect = 2.0 - 0.1 * 0.5 / (0.5 + 1e-8);
    CHECK(p.data()[0] == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("results are identical under different thread counts") {
    std::mt19937_64 rng(23);
    Tensor x = rand_t({2, 4, 16, 16}, rng);
    Tensor w = rand_t({8, 4, 3, 3}, rng);
    Tensor b = rand_t({8}, rng);
    ConvSpec spec{4, 8, 3, 3, 1, 1};
    const int old_threads = omp_get_max_threads();
    omp_set_num_threads(1);
    Tensor out1 = conv2d(x, w, b, spec);
    omp_set_num_threads(4);
    Tensor out4 = conv2d(x, w, b, spec);
    omp_set_num_threads(old_threads);
    for (int64_t i = 0; i < out1.numel(); ++i) CHECK(out1.data()[i] == out4.data()[i]);
}

TEST_CASE("elementwise ops and reductions") {
    Tensor a({2}, {1.0, 2.0});
    Tensor b({2}, {3.0, 5.0});
    CHECK(add(a, b).data()[1] == 7.0);
    CHECK(sub(b, a).data()[0] == 2.0);
    CHECK(mul(a, b).data()[1] == 10.0);
    CHECK(scale(a, -2.0).data()[0] == -2.0);
    CHECK(sum(b).item() == 8.0);
    CHECK(mean(b).item() == 4.0);
    CHECK(l1_loss(a, b).item() == doctest::Approx(2.5));
    CHECK_THROWS_AS(add(a, Tensor({3}, {1, 2, 3})), DimensionError);
    Tensor r = reshape(a, {2, 1});
    CHECK(r.shape() == Shape{2, 1});
    CHECK_THROWS_AS(reshape(a, {3}), DimensionError);
}

TEST_CASE("non-finite values are rejected") {
    Tensor a({1}, std::vector<double>{1e308});
    Tensor b({1}, std::vector<double>{1e308});
    CHECK_THROWS_AS(mul(a, b), NumericError);
}
