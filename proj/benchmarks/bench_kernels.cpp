// Compares the OpenMP kernels against the serial reference implementations
// and reports timings plus max absolute deviation.

#include <omp.h>

#include <chrono>
#include <cstdio>
#include <random>

#include "cgtrace/fft.hpp"
#include "cgtrace/reference.hpp"
#include "cgtrace/tensor.hpp"

using namespace cgtrace;

namespace {

double now_ms() {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

double max_abs_diff(const double* a, const double* b, int64_t n) {
    double m = 0.0;
    for (int64_t i = 0; i < n; ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace

int main() {
    std::mt19937_64 rng(7);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::printf("threads: %d\n", omp_get_max_threads());

    {
        const int N = 4, Cin = 16, H = 64, W = 64, Cout = 32, K = 5;
        std::vector<double> input(static_cast<size_t>(N) * Cin * H * W),
            weights(static_cast<size_t>(Cout) * Cin * K * K), bias(Cout);
        for (auto& v : input) v = noise(rng);
        for (auto& v : weights) v = noise(rng);
        for (auto& v : bias) v = noise(rng);

        Tensor x = Tensor::zeros({N, Cin, H, W});
        std::copy(input.begin(), input.end(), x.data());
        Tensor w = Tensor::zeros({Cout, Cin, K, K});
        std::copy(weights.begin(), weights.end(), w.data());
        Tensor b = Tensor::zeros({Cout});
        std::copy(bias.begin(), bias.end(), b.data());
        ConvSpec spec{Cin, Cout, K, K, 1, 2};

        double t0 = now_ms();
        Tensor fast = conv2d(x, w, b, spec);
        double t1 = now_ms();
        auto ref = reference::conv2d_naive(input, N, Cin, H, W, weights, Cout, K, K, bias, 1, 2);
        double t2 = now_ms();
        std::printf("conv2d   %4dx%d %2dx%d: omp %8.2f ms | serial %8.2f ms | maxdiff %.3g\n",
                    H, W, K, K, t1 - t0, t2 - t1, max_abs_diff(fast.data(), ref.data(), fast.numel()));
    }

    {
        const int N = 8, C = 64, H = 128, W = 128;
        std::vector<double> input(static_cast<size_t>(N) * C * H * W);
        for (auto& v : input) v = noise(rng);
        Tensor x = Tensor::zeros({N, C, H, W});
        std::copy(input.begin(), input.end(), x.data());

        double t0 = now_ms();
        Tensor fast = avg_pool2d(x);
        double t1 = now_ms();
        auto ref = reference::avg_pool2d_naive(input, N, C, H, W, 2, 2);
        double t2 = now_ms();
        std::printf("avgpool  %4dx%d      : omp %8.2f ms | serial %8.2f ms | maxdiff %.3g\n",
                    H, W, t1 - t0, t2 - t1, max_abs_diff(fast.data(), ref.data(), fast.numel()));
    }

    {
        const int H = 64, W = 64;
        std::vector<double> plane(static_cast<size_t>(H) * W);
        for (auto& v : plane) v = noise(rng);

        double t0 = now_ms();
        auto fast_spec = fft2d(plane, H, W);
        auto fast = ifft2d_real(fast_spec, H, W);
        double t1 = now_ms();
        auto ref_spec = reference::dft2d_naive(plane, H, W);
        auto ref = reference::idft2d_naive_real(ref_spec, H, W);
        double t2 = now_ms();
        std::printf("fft2d    %4dx%d      : fft %8.2f ms | naive  %8.2f ms | maxdiff %.3g\n", H,
                    W, t1 - t0, t2 - t1,
                    max_abs_diff(fast.data(), ref.data(), static_cast<int64_t>(fast.size())));
    }
    return 0;
}
