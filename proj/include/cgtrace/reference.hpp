#pragma once

// Serial, naive reference kernels. These are intentionally written as the
// most direct loop translations and are kept independent of the optimized
// paths in tensor.cpp / fft.cpp. Tests and the benchmark compare against
// them; they must never share code with what they check.

#include <complex>
#include <vector>

namespace cgtrace::reference {

// Direct six-nested-loop cross-correlation. input [N,Cin,H,W] row-major,
// weights [Cout,Cin,kh,kw], zero padding.
std::vector<double> conv2d_naive(const std::vector<double>& input, int N, int Cin,
                                 int H, int W, const std::vector<double>& weights,
                                 int Cout, int kh, int kw,
                                 const std::vector<double>& bias, int stride,
                                 int padding);

std::vector<double> avg_pool2d_naive(const std::vector<double>& input, int N, int C,
                                     int H, int W, int window, int stride);

// input [N,D], weights [K,D], bias [K] -> [N,K]
std::vector<double> fully_connected_naive(const std::vector<double>& input, int N,
                                          int D, const std::vector<double>& weights,
                                          int K, const std::vector<double>& bias);

// O(N^2 M^2) forward 2-D DFT of a real plane.
std::vector<std::complex<double>> dft2d_naive(const std::vector<double>& plane,
                                              int H, int W);
// O(N^2 M^2) inverse DFT, returning the real part.
std::vector<double> idft2d_naive_real(const std::vector<std::complex<double>>& spec,
                                      int H, int W);

// Ideal high-pass of a single plane via the naive DFT pair: zero every bin
// whose periodic distance to DC is <= cutoff.
std::vector<double> high_pass_naive(const std::vector<double>& plane, int H, int W,
                                    double cutoff);

}  // namespace cgtrace::reference
