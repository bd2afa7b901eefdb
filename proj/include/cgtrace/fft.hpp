#pragma once

#include <complex>
#include <vector>

namespace cgtrace {

// In-place iterative radix-2 FFT. Length must be a power of two.
void fft1d(std::vector<std::complex<double>>& a, bool inverse);

// Row-major H x W planes; both extents must be powers of two.
std::vector<std::complex<double>> fft2d(const std::vector<double>& plane, int H, int W);
std::vector<double> ifft2d_real(std::vector<std::complex<double>> spec, int H, int W);

}  // namespace cgtrace
