#include "cgtrace/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "cgtrace/errors.hpp"
#include "cgtrace/imageops.hpp"
#include "cgtrace/jpegcodec.hpp"

namespace fs = std::filesystem;

namespace cgtrace {

namespace {

// RGGB: channel sampled at (y,x)
int bayer_channel(int y, int x) {
    if (y % 2 == 0 && x % 2 == 0) return 0;  // R
    if (y % 2 == 1 && x % 2 == 1) return 2;  // B
    return 1;                                // G
}

}  // namespace

DemosaicKernel DemosaicKernel::bilinear() {
    DemosaicKernel k;
    k.half_size = 1;
    k.weights = {0.0625, 0.125, 0.0625, 0.125, 0.25, 0.125, 0.0625, 0.125, 0.0625};
    return k;
}

void DemosaicKernel::validate() const {
    const int n = 2 * half_size + 1;
    if (half_size < 1 || weights.size() != static_cast<size_t>(n) * n)
        throw InputError("demosaic kernel: bad extents");
    double s = 0.0;
    for (double w : weights) s += w;
    if (std::abs(s - 1.0) > 1e-9)
        throw InputError("demosaic kernel: weights must sum to 1");
}

QuantTable QuantTable::from_quality(int qf) {
    if (qf < 1 || qf > 100) throw InputError("quality factor out of range");
    QuantTable q;
    q.quality_factor = qf;
    q.values = jpegcodec::scale_quant_table(jpegcodec::kStdLuminanceQuant, qf);
    return q;
}

Image bayer_sample(const Image& rgb) {
    if (rgb.channels != 3) throw InputError("bayer_sample: 3-channel input required");
    Image out(rgb.height, rgb.width, 3);
    for (int y = 0; y < rgb.height; ++y)
        for (int x = 0; x < rgb.width; ++x) {
            const int c = bayer_channel(y, x);
            out.at(y, x, c) = rgb.at(y, x, c);
        }
    return out;
}

Image demosaic(const Image& raw_mosaic, const DemosaicKernel& kernel) {
    kernel.validate();
    if (raw_mosaic.channels != 3) throw InputError("demosaic: expected a 3-channel mosaic");
    // A Bayer mosaic carries exactly one nonzero-capable channel per site.
    for (int y = 0; y < raw_mosaic.height; ++y)
        for (int x = 0; x < raw_mosaic.width; ++x)
            for (int c = 0; c < 3; ++c)
                if (c != bayer_channel(y, x) && raw_mosaic.at(y, x, c) != 0.0)
                    throw InputError("demosaic: input is not an RGGB mosaic");

    const int H = raw_mosaic.height, W = raw_mosaic.width, N = kernel.half_size;
    Image out(H, W, 3);
    out.provenance = raw_mosaic.provenance;
    // Normalized convolution over the sampled sites of each channel.
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            for (int c = 0; c < 3; ++c) {
                double num = 0.0, den = 0.0;
                for (int u = -N; u <= N; ++u)
                    for (int v = -N; v <= N; ++v) {
                        const int yy = y - u, xx = x - v;
                        if (yy < 0 || yy >= H || xx < 0 || xx >= W) continue;
                        if (bayer_channel(yy, xx) != c) continue;
                        const double w = kernel.at(u, v);
                        num += w * raw_mosaic.at(yy, xx, c);
                        den += w;
                    }
                if (std::abs(den) < 1e-12)
                    throw InputError("demosaic: kernel covers no sampled site");
                out.at(y, x, c) = num / den;
            }
    out.clamp01();
    return out;
}

Image median_filter3x3(const Image& img) {
    Image out(img.height, img.width, img.channels);
    out.provenance = img.provenance;
    double window[9];
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            for (int c = 0; c < img.channels; ++c) {
                int n = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx)
                        window[n++] = img.at(std::clamp(y + dy, 0, img.height - 1),
                                             std::clamp(x + dx, 0, img.width - 1), c);
                std::nth_element(window, window + 4, window + 9);
                out.at(y, x, c) = window[4];
            }
    return out;
}

TraceReport pattern_trace(const std::vector<Image>& images, DenoiserKind denoiser) {
    if (images.empty()) throw InputError("pattern_trace: need at least one image");
    const Image& first = images.front();
    for (const auto& img : images)
        if (img.height != first.height || img.width != first.width ||
            img.channels != first.channels)
            throw InputError("pattern_trace: images must share one shape");

    TraceReport report;
    report.kind = TraceKind::pattern;
    report.height = first.height;
    report.width = first.width;
    report.channels = first.channels;
    report.map.assign(first.pixels.size(), 0.0);
    for (const auto& img : images) {
        const Image den = denoiser == DenoiserKind::median3x3 ? median_filter3x3(img)
                                                              : gaussian_blur(img, 1.0);
        for (size_t i = 0; i < img.pixels.size(); ++i)
            report.map[i] += img.pixels[i] - den.pixels[i];
    }
    double abs_sum = 0.0;
    for (auto& v : report.map) {
        v /= static_cast<double>(images.size());
        abs_sum += std::abs(v);
    }
    report.summary = abs_sum / static_cast<double>(report.map.size());
    return report;
}

std::array<double, 64> compression_trace(const std::array<double, 64>& coefficients,
                                         const QuantTable& q) {
    jpegcodec::Block deq, spatial;
    for (int i = 0; i < 64; ++i) deq[i] = coefficients[i] * q.values[i];
    jpegcodec::idct8x8(deq, spatial);
    std::array<double, 64> trace{};
    for (int i = 0; i < 64; ++i) {
        const double rt = std::clamp(std::round(spatial[i]), 0.0, 255.0);
        trace[i] = rt - spatial[i];
    }
    return trace;
}

TraceReport rendering_trace(const Image& img, const SegMap& segmap, const RenderFn& renderer) {
    if (segmap.height != img.height || segmap.width != img.width)
        throw InputError("rendering_trace: segmap shape mismatch");
    if (segmap.num_classes < 1) throw InputError("rendering_trace: region count is 0");
    const Image rendered = renderer(img, segmap);
    if (rendered.height != img.height || rendered.width != img.width ||
        rendered.channels != img.channels)
        throw InputError("rendering_trace: renderer changed the image shape");

    TraceReport report;
    report.kind = TraceKind::rendering;
    report.height = img.height;
    report.width = img.width;
    report.channels = img.channels;
    report.map.resize(img.pixels.size());
    for (size_t i = 0; i < img.pixels.size(); ++i)
        report.map[i] = img.pixels[i] - rendered.pixels[i];

    std::vector<double> sums(segmap.num_classes, 0.0);
    std::vector<int64_t> counts(segmap.num_classes, 0);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x) {
            const int r = segmap.at(y, x);
            for (int c = 0; c < img.channels; ++c)
                sums[r] += report.map[(static_cast<size_t>(y) * img.width + x) * img.channels + c];
            counts[r] += img.channels;
        }
    for (int r = 0; r < segmap.num_classes; ++r)
        if (counts[r] > 0) report.region_means.push_back(sums[r] / counts[r]);
    if (report.region_means.empty())
        throw InputError("rendering_trace: region count is 0");

    double abs_sum = 0.0;
    for (double v : report.map) abs_sum += std::abs(v);
    report.summary = abs_sum / static_cast<double>(report.map.size());
    return report;
}

namespace {

// Shared scene family: gradient background, a few primitives, band-limited
// noise texture of configurable strength.
Image procedural_scene(std::mt19937_64& rng, int size, double texture_amp) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Image img(size, size, 3);

    double c0[3], c1[3];
    for (int c = 0; c < 3; ++c) {
        c0[c] = unit(rng);
        c1[c] = unit(rng);
    }
    const double angle = unit(rng) * 2.0 * M_PI;
    const double gx = std::cos(angle), gy = std::sin(angle);
    for (int y = 0; y < size; ++y)
        for (int x = 0; x < size; ++x) {
            const double t = 0.5 + 0.5 * (gx * (2.0 * x / size - 1.0) + gy * (2.0 * y / size - 1.0));
            for (int c = 0; c < 3; ++c) img.at(y, x, c) = (1.0 - t) * c0[c] + t * c1[c];
        }

    std::uniform_int_distribution<int> nprim_dist(2, 5);
    const int nprim = nprim_dist(rng);
    for (int p = 0; p < nprim; ++p) {
        double col[3] = {unit(rng), unit(rng), unit(rng)};
        const bool circle = unit(rng) < 0.5;
        const double cx = unit(rng) * size, cy = unit(rng) * size;
        const double r1 = (0.08 + 0.25 * unit(rng)) * size;
        const double r2 = (0.08 + 0.25 * unit(rng)) * size;
        const int y0 = std::max(0, static_cast<int>(cy - std::max(r1, r2)));
        const int y1 = std::min(size - 1, static_cast<int>(cy + std::max(r1, r2)));
        const int x0 = std::max(0, static_cast<int>(cx - std::max(r1, r2)));
        const int x1 = std::min(size - 1, static_cast<int>(cx + std::max(r1, r2)));
        for (int y = y0; y <= y1; ++y)
            for (int x = x0; x <= x1; ++x) {
                const bool inside =
                    circle ? ((x - cx) * (x - cx) / (r1 * r1) + (y - cy) * (y - cy) / (r2 * r2) <= 1.0)
                           : (std::abs(x - cx) <= r1 && std::abs(y - cy) <= r2);
                if (inside)
                    for (int c = 0; c < 3; ++c) img.at(y, x, c) = col[c];
            }
    }

    if (texture_amp > 0.0) {
        Image noise(size, size, 3);
        for (auto& v : noise.pixels) v = unit(rng) - 0.5;
        noise = gaussian_blur(noise, 0.8);
        // gaussian_blur clamps into [0,1]; recenter the band-limited field
        for (size_t i = 0; i < img.pixels.size(); ++i)
            img.pixels[i] += texture_amp * (noise.pixels[i] - 0.5) * 8.0;
    }
    img.clamp01();
    return img;
}

}  // namespace

Image synth_pg(std::mt19937_64& rng, int size) {
    Image scene = procedural_scene(rng, size, 0.04);
    Image mosaic = bayer_sample(scene);
    Image img = demosaic(mosaic, DemosaicKernel::bilinear());
    img = add_gaussian_noise(img, 4e-4, rng);
    img = jpeg_recompress(img, 90);
    img.provenance = Provenance::synthetic_pg;
    return img;
}

Image synth_cg(std::mt19937_64& rng, int size) {
    Image scene = procedural_scene(rng, size, 0.01);
    Image img = gaussian_blur(scene, 1.0);
    img = jpeg_recompress(img, 90);
    img.provenance = Provenance::synthetic_cg;
    return img;
}

DatasetManifest build_dataset(int n_per_class, const std::string& out_dir,
                              std::mt19937_64& rng, int size) {
    if (n_per_class < 12) throw InputError("build_dataset: need n_per_class >= 12");
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec || !fs::is_directory(out_dir))
        throw IoError("build_dataset: cannot create " + out_dir);

    // 4.1 : 1 : 1 train/val/test
    const int n_val = std::max(1, static_cast<int>(std::lround(n_per_class / 6.1)));
    const int n_test = n_val;
    const int n_train = n_per_class - n_val - n_test;
    if (n_train < 1) throw InputError("build_dataset: split too small");

    DatasetManifest manifest;
    manifest.root = out_dir;
    auto split_of = [&](int i) {
        if (i < n_train) return Split::train;
        return i < n_train + n_val ? Split::val : Split::test;
    };
    char name[64];
    for (int i = 0; i < n_per_class; ++i) {
        const Image pg = synth_pg(rng, size);
        std::snprintf(name, sizeof(name), "pg_%05d.png", i);
        save_image(pg, (fs::path(out_dir) / name).string());
        manifest.records.push_back({name, 0, split_of(i)});

        const Image cg = synth_cg(rng, size);
        std::snprintf(name, sizeof(name), "cg_%05d.png", i);
        save_image(cg, (fs::path(out_dir) / name).string());
        manifest.records.push_back({name, 1, split_of(i)});
    }
    save_manifest(manifest, (fs::path(out_dir) / "manifest.csv").string());
    return manifest;
}

}  // namespace cgtrace
