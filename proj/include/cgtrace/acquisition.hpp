#pragma once

#include <array>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cgtrace/image.hpp"
#include "cgtrace/manifest.hpp"
#include "cgtrace/segmentation.hpp"

namespace cgtrace {

// Interpolation kernel for CFA demosaicing; weights sum to 1.
struct DemosaicKernel {
    int half_size = 1;
    std::vector<double> weights;  // (2N+1) x (2N+1)

    static DemosaicKernel bilinear();
    void validate() const;
    double at(int u, int v) const {
        const int n = 2 * half_size + 1;
        return weights[static_cast<size_t>(u + half_size) * n + (v + half_size)];
    }
};

// 8x8 quantization table derived from the standard luminance table.
struct QuantTable {
    std::array<int, 64> values{};
    int quality_factor = 75;

    static QuantTable from_quality(int qf);
};

enum class TraceKind {
    pattern,      // Tr_pt: averaged denoising residuals (hardware side)
    compression,  // Tr_ct: round/truncate residual of the dequantized block
    rendering     // Tr_rt: per-region residual against a re-rendered image
};

struct TraceReport {
    TraceKind kind = TraceKind::pattern;
    int height = 0;
    int width = 0;
    int channels = 1;
    std::vector<double> map;           // signed residual, image-shaped
    double summary = 0.0;              // mean absolute magnitude
    std::vector<double> region_means;  // rendering traces only
};

enum class DenoiserKind { median3x3, gaussian_sigma1 };

// Per-channel sparse-sample interpolation of a Bayer RGGB mosaic
// (normalized convolution over the sampled sites).
Image demosaic(const Image& raw_mosaic, const DemosaicKernel& kernel);
// Sample an RGB image through the RGGB pattern (one channel kept per site).
Image bayer_sample(const Image& rgb);

TraceReport pattern_trace(const std::vector<Image>& images,
                          DenoiserKind denoiser = DenoiserKind::median3x3);

// RT(IDT(D*Q)) - IDT(D*Q) on an 8x8 coefficient block; rounding plus
// truncation to [0,255].
std::array<double, 64> compression_trace(const std::array<double, 64>& coefficients,
                                         const QuantTable& q);

using RenderFn = std::function<Image(const Image&, const SegMap&)>;
TraceReport rendering_trace(const Image& img, const SegMap& segmap, const RenderFn& renderer);

// Desk-scale synthetic classes: a shared procedural scene family, with the
// PG path running CFA sampling -> demosaic -> sensor noise -> JPEG and the
// CG path running smooth shading -> blur -> JPEG.
Image synth_pg(std::mt19937_64& rng, int size = 256);
Image synth_cg(std::mt19937_64& rng, int size = 256);

// Writes 2*n_per_class PNGs plus manifest.csv with train/val/test splits in
// ratio 4.1:1:1. Labels: CG = 1, PG = 0.
DatasetManifest build_dataset(int n_per_class, const std::string& out_dir,
                              std::mt19937_64& rng, int size = 256);

Image median_filter3x3(const Image& img);

}  // namespace cgtrace
