#include "cgtrace/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cgtrace/errors.hpp"

namespace cgtrace {

SegMap segment_simple(const Image& img, int k, std::mt19937_64& rng) {
    if (k < 1) throw InputError("segment_simple: K must be >= 1");
    const int64_t npix = static_cast<int64_t>(img.height) * img.width;
    if (k > npix) throw InputError("segment_simple: K exceeds pixel count");

    SegMap seg;
    seg.height = img.height;
    seg.width = img.width;
    seg.num_classes = k;
    seg.labels.assign(static_cast<size_t>(npix), 0);
    if (k == 1) return seg;

    const Image rgb = img;  // features use the first 3 (or 1) channels
    constexpr int kDims = 5;
    auto feature = [&](int64_t p, double* f) {
        const int y = static_cast<int>(p / img.width);
        const int x = static_cast<int>(p % img.width);
        for (int c = 0; c < 3; ++c)
            f[c] = rgb.pixels[static_cast<size_t>(p) * img.channels +
                              std::min(c, img.channels - 1)];
        f[3] = static_cast<double>(x) / img.width;
        f[4] = static_cast<double>(y) / img.height;
    };

    // seeded init: K distinct pixel positions
    std::vector<double> centroids(static_cast<size_t>(k) * kDims);
    std::uniform_int_distribution<int64_t> pick(0, npix - 1);
    std::vector<int64_t> chosen;
    while (static_cast<int>(chosen.size()) < k) {
        const int64_t p = pick(rng);
        if (std::find(chosen.begin(), chosen.end(), p) == chosen.end()) chosen.push_back(p);
    }
    for (int c = 0; c < k; ++c) feature(chosen[c], &centroids[static_cast<size_t>(c) * kDims]);

    std::vector<double> f(kDims);
    std::vector<double> sums(static_cast<size_t>(k) * kDims);
    std::vector<int64_t> counts(k);
    for (int iter = 0; iter < 20; ++iter) {
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (int64_t p = 0; p < npix; ++p) {
            feature(p, f.data());
            int best = 0;
            double bd = std::numeric_limits<double>::max();
            for (int c = 0; c < k; ++c) {
                double d = 0.0;
                for (int j = 0; j < kDims; ++j) {
                    const double diff = f[j] - centroids[static_cast<size_t>(c) * kDims + j];
                    d += diff * diff;
                }
                if (d < bd) {
                    bd = d;
                    best = c;
                }
            }
            seg.labels[static_cast<size_t>(p)] = best;
            ++counts[best];
            for (int j = 0; j < kDims; ++j) sums[static_cast<size_t>(best) * kDims + j] += f[j];
        }
        for (int c = 0; c < k; ++c) {
            if (counts[c] == 0) continue;  // empty cluster keeps its centroid
            for (int j = 0; j < kDims; ++j)
                centroids[static_cast<size_t>(c) * kDims + j] =
                    sums[static_cast<size_t>(c) * kDims + j] / counts[c];
        }
    }
    return seg;
}

SegMap load_segmap(const std::string& path, int expected_h, int expected_w) {
    const Image img = load_image(path);
    if (img.channels != 1) throw InputError("load_segmap: label image must be single-channel");
    if (img.height != expected_h || img.width != expected_w)
        throw InputError("load_segmap: shape mismatch");
    SegMap seg;
    seg.height = img.height;
    seg.width = img.width;
    seg.labels.resize(img.pixels.size());
    int max_label = 0;
    for (size_t i = 0; i < img.pixels.size(); ++i) {
        seg.labels[i] = static_cast<int>(std::lround(img.pixels[i] * 255.0));
        max_label = std::max(max_label, seg.labels[i]);
    }
    seg.num_classes = max_label + 1;
    return seg;
}

void save_segmap(const SegMap& seg, const std::string& path) {
    if (seg.num_classes > 256) throw InputError("save_segmap: more than 256 classes");
    Image img(seg.height, seg.width, 1);
    for (size_t i = 0; i < seg.labels.size(); ++i) img.pixels[i] = seg.labels[i] / 255.0;
    save_image(img, path);
}

Tensor one_hot(const SegMap& seg) {
    const int K = seg.num_classes, H = seg.height, W = seg.width;
    Tensor t({K, H, W});
    double* d = t.data();
    for (int y = 0; y < H; ++y)
        for (int x = 0; x < W; ++x)
            d[(static_cast<int64_t>(seg.at(y, x)) * H + y) * W + x] = 1.0;
    return t;
}

}  // namespace cgtrace
