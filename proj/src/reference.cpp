#include "cgtrace/reference.hpp"

#include <algorithm>
#include <cmath>

namespace cgtrace::reference {

std::vector<double> conv2d_naive(const std::vector<double>& input, int N, int Cin,
                                 int H, int W, const std::vector<double>& weights,
                                 int Cout, int kh, int kw,
                                 const std::vector<double>& bias, int stride,
                                 int padding) {
    const int OH = (H + 2 * padding - kh) / stride + 1;
    const int OW = (W + 2 * padding - kw) / stride + 1;
    std::vector<double> out(static_cast<size_t>(N) * Cout * OH * OW, 0.0);
    for (int n = 0; n < N; ++n)
        for (int co = 0; co < Cout; ++co)
            for (int oy = 0; oy < OH; ++oy)
                for (int ox = 0; ox < OW; ++ox) {
                    double acc = bias[co];
                    for (int ci = 0; ci < Cin; ++ci)
                        for (int ky = 0; ky < kh; ++ky)
                            for (int kx = 0; kx < kw; ++kx) {
                                const int iy = oy * stride - padding + ky;
                                const int ix = ox * stride - padding + kx;
                                if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                                acc += input[((static_cast<size_t>(n) * Cin + ci) * H + iy) * W + ix] *
                                       weights[((static_cast<size_t>(co) * Cin + ci) * kh + ky) * kw + kx];
                            }
                    out[((static_cast<size_t>(n) * Cout + co) * OH + oy) * OW + ox] = acc;
                }
    return out;
}

std::vector<double> avg_pool2d_naive(const std::vector<double>& input, int N, int C,
                                     int H, int W, int window, int stride) {
    const int OH = (H - window) / stride + 1;
    const int OW = (W - window) / stride + 1;
    std::vector<double> out(static_cast<size_t>(N) * C * OH * OW, 0.0);
    for (int n = 0; n < N; ++n)
        for (int c = 0; c < C; ++c)
            for (int oy = 0; oy < OH; ++oy)
                for (int ox = 0; ox < OW; ++ox) {
                    double acc = 0.0;
                    for (int ky = 0; ky < window; ++ky)
                        for (int kx = 0; kx < window; ++kx)
                            acc += input[((static_cast<size_t>(n) * C + c) * H + oy * stride + ky) * W +
                                         ox * stride + kx];
                    out[((static_cast<size_t>(n) * C + c) * OH + oy) * OW + ox] =
                        acc / (static_cast<double>(window) * window);
                }
    return out;
}

std::vector<double> fully_connected_naive(const std::vector<double>& input, int N,
                                          int D, const std::vector<double>& weights,
                                          int K, const std::vector<double>& bias) {
    std::vector<double> out(static_cast<size_t>(N) * K, 0.0);
    for (int n = 0; n < N; ++n)
        for (int k = 0; k < K; ++k) {
            double acc = bias[k];
            for (int d = 0; d < D; ++d)
                acc += input[static_cast<size_t>(n) * D + d] * weights[static_cast<size_t>(k) * D + d];
            out[static_cast<size_t>(n) * K + k] = acc;
        }
    return out;
}

std::vector<std::complex<double>> dft2d_naive(const std::vector<double>& plane, int H, int W) {
    std::vector<std::complex<double>> spec(static_cast<size_t>(H) * W);
    const double tau = 2.0 * M_PI;
    for (int u = 0; u < H; ++u)
        for (int v = 0; v < W; ++v) {
            std::complex<double> acc(0.0, 0.0);
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const double ang = -tau * (static_cast<double>(u) * y / H +
                                               static_cast<double>(v) * x / W);
                    acc += plane[static_cast<size_t>(y) * W + x] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
            spec[static_cast<size_t>(u) * W + v] = acc;
        }
    return spec;
}

std::vector<double> idft2d_naive_real(const std::vector<std::complex<double>>& spec,
                                      int H, int W) {
    std::vector<double> out(static_cast<size_t>(H) * W);
    const double tau = 2.0 * M_PI;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            std::complex<double> acc(0.0, 0.0);
            for (int u = 0; u < H; ++u)
                for (int v = 0; v < W; ++v) {
                    const double ang = tau * (static_cast<double>(u) * y / H +
                                              static_cast<double>(v) * x / W);
                    acc += spec[static_cast<size_t>(u) * W + v] *
                           std::complex<double>(std::cos(ang), std::sin(ang));
                }
            out[static_cast<size_t>(y) * W + x] = acc.real() / (static_cast<double>(H) * W);
        }
    return out;
}

std::vector<double> high_pass_naive(const std::vector<double>& plane, int H, int W,
                                    double cutoff) {
    auto spec = dft2d_naive(plane, H, W);
    for (int u = 0; u < H; ++u)
        for (int v = 0; v < W; ++v) {
            const int du = std::min(u, H - u);
            const int dv = std::min(v, W - v);
            if (std::sqrt(static_cast<double>(du) * du + static_cast<double>(dv) * dv) <= cutoff)
                spec[static_cast<size_t>(u) * W + v] = 0.0;
        }
    return idft2d_naive_real(spec, H, W);
}

}  // namespace cgtrace::reference
