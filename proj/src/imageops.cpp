#include "cgtrace/imageops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgtrace/errors.hpp"
#include "cgtrace/fft.hpp"
#include "cgtrace/jpegcodec.hpp"

namespace cgtrace {

HighPassMask::HighPassMask(int h, int w, double cutoff)
    : height(h), width(w), cutoff_radius(cutoff) {
    if (h <= 0 || w <= 0 || cutoff <= 0.0)
        throw InputError("high-pass mask needs positive extents and cutoff");
    mask.assign(static_cast<size_t>(h) * w, 1);
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v) {
            // periodic distance to the DC bin == distance to the center of
            // the fftshifted spectrum
            const int du = std::min(u, h - u);
            const int dv = std::min(v, w - v);
            if (std::sqrt(static_cast<double>(du) * du + static_cast<double>(dv) * dv) <=
                cutoff)
                mask[static_cast<size_t>(u) * w + v] = 0;
        }
}

Image rescale(const Image& img, int target_h, int target_w) {
    if (img.empty()) throw InputError("rescale: empty input image");
    if (target_h <= 0 || target_w <= 0) throw InputError("rescale: bad target size");
    if (img.height == target_h && img.width == target_w) return img;
    Image out(target_h, target_w, img.channels);
    out.provenance = img.provenance;
    const double sy = static_cast<double>(img.height) / target_h;
    const double sx = static_cast<double>(img.width) / target_w;
    for (int y = 0; y < target_h; ++y) {
        const double fy = std::clamp((y + 0.5) * sy - 0.5, 0.0, img.height - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, img.height - 1);
        const double wy = fy - y0;
        for (int x = 0; x < target_w; ++x) {
            const double fx = std::clamp((x + 0.5) * sx - 0.5, 0.0, img.width - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, img.width - 1);
            const double wx = fx - x0;
            for (int c = 0; c < img.channels; ++c) {
                const double top = (1.0 - wx) * img.at(y0, x0, c) + wx * img.at(y0, x1, c);
                const double bot = (1.0 - wx) * img.at(y1, x0, c) + wx * img.at(y1, x1, c);
                out.at(y, x, c) = (1.0 - wy) * top + wy * bot;
            }
        }
    }
    out.clamp01();
    return out;
}

Image high_pass(const Image& img, double cutoff) {
    const HighPassMask mask(img.height, img.width, cutoff);
    Image out(img.height, img.width, img.channels);
    out.provenance = Provenance::filtered;
    const size_t plane_n = static_cast<size_t>(img.height) * img.width;
    std::vector<double> plane(plane_n);
    for (int c = 0; c < img.channels; ++c) {
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                plane[static_cast<size_t>(y) * img.width + x] = img.at(y, x, c);
        auto spec = fft2d(plane, img.height, img.width);
        for (size_t i = 0; i < plane_n; ++i)
            if (!mask.mask[i]) spec[i] = 0.0;
        auto res = ifft2d_real(std::move(spec), img.height, img.width);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                out.at(y, x, c) = res[static_cast<size_t>(y) * img.width + x] + 0.5;
    }
    out.clamp01();
    return out;
}

Image flip_horizontal(const Image& img) {
    Image out(img.height, img.width, img.channels);
    out.provenance = img.provenance;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(y, img.width - 1 - x, c);
    return out;
}

Image flip_vertical(const Image& img) {
    Image out(img.height, img.width, img.channels);
    out.provenance = img.provenance;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c)
                out.at(y, x, c) = img.at(img.height - 1 - y, x, c);
    return out;
}

Image augment_flip(const Image& img, double p_horizontal, double p_vertical,
                   std::mt19937_64& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const bool fh = unit(rng) < p_horizontal;
    const bool fv = unit(rng) < p_vertical;
    Image out = img;
    if (fh) out = flip_horizontal(out);
    if (fv) out = flip_vertical(out);
    return out;
}

namespace {

// Round-trip one padded plane (values centered around 0, 0..255 scale).
void quant_plane(std::vector<double>& plane, int ph, int pw,
                 const std::array<int, 64>& table) {
    jpegcodec::Block block, rec;
    for (int by = 0; by < ph; by += 8)
        for (int bx = 0; bx < pw; bx += 8) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    block[y * 8 + x] = plane[static_cast<size_t>(by + y) * pw + bx + x];
            rec = jpegcodec::quant_round_trip(block, table);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    plane[static_cast<size_t>(by + y) * pw + bx + x] = rec[y * 8 + x];
        }
}

}  // namespace

Image jpeg_recompress(const Image& img, int quality_factor) {
    if (img.channels != 3) throw InputError("jpeg_recompress: 3-channel image required");
    if (quality_factor < 1 || quality_factor > 100)
        throw InputError("jpeg_recompress: quality factor out of range");
    const int H = img.height, W = img.width;
    const int ph = (H + 7) / 8 * 8;
    const int pw = (W + 7) / 8 * 8;
    const auto lq = jpegcodec::scale_quant_table(jpegcodec::kStdLuminanceQuant, quality_factor);
    const auto cq = jpegcodec::scale_quant_table(jpegcodec::kStdChrominanceQuant, quality_factor);

    // RGB -> YCbCr (full range, 0..255), edge-replicated to block multiples,
    // level-shifted by 128.
    std::vector<double> yp(static_cast<size_t>(ph) * pw);
    std::vector<double> cb(yp.size()), cr(yp.size());
    for (int y = 0; y < ph; ++y) {
        const int sy = std::min(y, H - 1);
        for (int x = 0; x < pw; ++x) {
            const int sx = std::min(x, W - 1);
            const double r = img.at(sy, sx, 0) * 255.0;
            const double g = img.at(sy, sx, 1) * 255.0;
            const double b = img.at(sy, sx, 2) * 255.0;
            const size_t i = static_cast<size_t>(y) * pw + x;
            yp[i] = 0.299 * r + 0.587 * g + 0.114 * b - 128.0;
            cb[i] = -0.168736 * r - 0.331264 * g + 0.5 * b;
            cr[i] = 0.5 * r - 0.418688 * g - 0.081312 * b;
        }
    }
    quant_plane(yp, ph, pw, lq);
    quant_plane(cb, ph, pw, cq);
    quant_plane(cr, ph, pw, cq);

    Image out(H, W, 3);
    out.provenance = Provenance::attacked;
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x) {
            const size_t i = static_cast<size_t>(y) * pw + x;
            const double yy = yp[i] + 128.0;
            const double r = yy + 1.402 * cr[i];
            const double g = yy - 0.344136 * cb[i] - 0.714136 * cr[i];
            const double b = yy + 1.772 * cb[i];
            out.at(y, x, 0) = r / 255.0;
            out.at(y, x, 1) = g / 255.0;
            out.at(y, x, 2) = b / 255.0;
        }
    out.clamp01();
    return out;
}

Image add_gaussian_noise(const Image& img, double level, std::mt19937_64& rng) {
    if (level < 0.0) throw InputError("add_gaussian_noise: negative level");
    Image out = img;
    out.provenance = Provenance::attacked;
    if (level == 0.0) return out;
    std::normal_distribution<double> noise(0.0, std::sqrt(level));
    for (auto& v : out.pixels) v += noise(rng);
    out.clamp01();
    return out;
}

Image add_salt_pepper(const Image& img, double density, std::mt19937_64& rng) {
    if (density < 0.0 || density > 1.0) throw InputError("add_salt_pepper: density must be in [0,1]");
    Image out = img;
    out.provenance = Provenance::attacked;
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const size_t npix = static_cast<size_t>(img.height) * img.width;
    for (size_t p = 0; p < npix; ++p) {
        if (unit(rng) >= density) continue;
        const double v = unit(rng) < 0.5 ? 0.0 : 1.0;
        for (int c = 0; c < img.channels; ++c) out.pixels[p * img.channels + c] = v;
    }
    return out;
}

Image gaussian_blur(const Image& img, double sigma) {
    if (sigma <= 0.0) return img;
    const int radius = std::max(1, static_cast<int>(std::ceil(3.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double ksum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        ksum += kernel[i + radius];
    }
    for (auto& k : kernel) k /= ksum;

    Image tmp(img.height, img.width, img.channels);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    s += kernel[i + radius] *
                         img.at(y, std::clamp(x + i, 0, img.width - 1), c);
                tmp.at(y, x, c) = s;
            }
    Image out(img.height, img.width, img.channels);
    out.provenance = img.provenance;
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                double s = 0.0;
                for (int i = -radius; i <= radius; ++i)
                    s += kernel[i + radius] *
                         tmp.at(std::clamp(y + i, 0, img.height - 1), x, c);
                out.at(y, x, c) = s;
            }
    out.clamp01();
    return out;
}

double psnr(const Image& a, const Image& b) {
    if (a.height != b.height || a.width != b.width || a.channels != b.channels)
        throw DimensionError("psnr: image shape mismatch");
    double mse = 0.0;
    for (size_t i = 0; i < a.pixels.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.pixels.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return -10.0 * std::log10(mse);
}

}  // namespace cgtrace
