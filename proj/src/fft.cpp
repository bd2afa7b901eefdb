#include "cgtrace/fft.hpp"

#include <cmath>

#include "cgtrace/errors.hpp"

namespace cgtrace {

namespace {

bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void fft1d(std::vector<std::complex<double>>& a, bool inverse) {
    const int n = static_cast<int>(a.size());
    if (!is_pow2(n)) throw InputError("fft1d: length must be a power of two");
    // bit reversal
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = (inverse ? 2.0 : -2.0) * M_PI / len;
        const std::complex<double> wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (int k = 0; k < len / 2; ++k) {
                const auto u = a[i + k];
                const auto v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wl;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= n;
}

std::vector<std::complex<double>> fft2d(const std::vector<double>& plane, int H, int W) {
    if (!is_pow2(H) || !is_pow2(W))
        throw InputError("fft2d: extents must be powers of two");
    std::vector<std::complex<double>> spec(static_cast<size_t>(H) * W);
    for (size_t i = 0; i < spec.size(); ++i) spec[i] = plane[i];
    std::vector<std::complex<double>> row(W), col(H);
#pragma omp parallel for schedule(static) firstprivate(row)
    for (int y = 0; y < H; ++y) {
        std::copy_n(spec.begin() + static_cast<size_t>(y) * W, W, row.begin());
        fft1d(row, false);
        std::copy_n(row.begin(), W, spec.begin() + static_cast<size_t>(y) * W);
    }
#pragma omp parallel for schedule(static) firstprivate(col)
    for (int x = 0; x < W; ++x) {
        for (int y = 0; y < H; ++y) col[y] = spec[static_cast<size_t>(y) * W + x];
        fft1d(col, false);
        for (int y = 0; y < H; ++y) spec[static_cast<size_t>(y) * W + x] = col[y];
    }
    return spec;
}

std::vector<double> ifft2d_real(std::vector<std::complex<double>> spec, int H, int W) {
    if (!is_pow2(H) || !is_pow2(W))
        throw InputError("ifft2d_real: extents must be powers of two");
    std::vector<std::complex<double>> row(W), col(H);
#pragma omp parallel for schedule(static) firstprivate(col)
    for (int x = 0; x < W; ++x) {
        for (int y = 0; y < H; ++y) col[y] = spec[static_cast<size_t>(y) * W + x];
        fft1d(col, true);
        for (int y = 0; y < H; ++y) spec[static_cast<size_t>(y) * W + x] = col[y];
    }
    std::vector<double> out(static_cast<size_t>(H) * W);
#pragma omp parallel for schedule(static) firstprivate(row)
    for (int y = 0; y < H; ++y) {
        std::copy_n(spec.begin() + static_cast<size_t>(y) * W, W, row.begin());
        fft1d(row, true);
        for (int x = 0; x < W; ++x) out[static_cast<size_t>(y) * W + x] = row[x].real();
    }
    return out;
}

}  // namespace cgtrace
