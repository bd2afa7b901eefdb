#pragma once

#include <random>
#include <vector>

#include "cgtrace/image.hpp"

namespace cgtrace {

// Ideal circular high-pass mask over the centered spectrum.
struct HighPassMask {
    int height = 0;
    int width = 0;
    double cutoff_radius = 30.0;
    std::vector<uint8_t> mask;  // 0 inside the cutoff disk, 1 outside

    HighPassMask(int h, int w, double cutoff);
    bool pass(int u, int v) const { return mask[static_cast<size_t>(u) * width + v] != 0; }
};

// Bilinear resampling to target extents. Same-size input is returned verbatim.
Image rescale(const Image& img, int target_h = 256, int target_w = 256);

// FFT -> ideal high-pass (radius cutoff, centered spectrum) -> inverse FFT.
// Signed residuals are stored offset by +0.5 and clamped into [0,1].
Image high_pass(const Image& img, double cutoff = 30.0);

// Independent Bernoulli horizontal/vertical mirroring.
Image augment_flip(const Image& img, double p_horizontal, double p_vertical,
                   std::mt19937_64& rng);
Image flip_horizontal(const Image& img);
Image flip_vertical(const Image& img);

// Full quantization round trip (RGB->YCbCr, 8x8 DCT, QF-scaled tables,
// rounding, inverse) on decoded pixels; 4:4:4 only.
Image jpeg_recompress(const Image& img, int quality_factor);

// Zero-mean Gaussian noise with variance = level, clamped afterwards.
Image add_gaussian_noise(const Image& img, double level, std::mt19937_64& rng);
// Fraction = density of pixels forced to 0 or 1 with equal probability.
Image add_salt_pepper(const Image& img, double density, std::mt19937_64& rng);

// Separable Gaussian blur (kernel radius 3*sigma).
Image gaussian_blur(const Image& img, double sigma);

double psnr(const Image& a, const Image& b);

}  // namespace cgtrace
