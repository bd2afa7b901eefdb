#include "cgtrace/glcm.hpp"

#include <algorithm>
#include <cmath>

#include "cgtrace/errors.hpp"

namespace cgtrace {

Glcm compute_glcm(const Image& img, int levels, int offset_dy, int offset_dx) {
    if (levels < 2) throw InputError("compute_glcm: levels must be >= 2");
    const Image gray = to_gray(img);
    if (std::abs(offset_dy) >= gray.height || std::abs(offset_dx) >= gray.width)
        throw InputError("compute_glcm: image smaller than offset");
    Glcm g;
    g.levels = levels;
    g.offset_dy = offset_dy;
    g.offset_dx = offset_dx;
    g.matrix.assign(static_cast<size_t>(levels) * levels, 0.0);

    auto quantize = [levels](double v) {
        return std::min(levels - 1, static_cast<int>(v * levels));
    };
    double total = 0.0;
    for (int y = 0; y < gray.height; ++y) {
        const int y2 = y + offset_dy;
        if (y2 < 0 || y2 >= gray.height) continue;
        for (int x = 0; x < gray.width; ++x) {
            const int x2 = x + offset_dx;
            if (x2 < 0 || x2 >= gray.width) continue;
            const int a = quantize(gray.at(y, x, 0));
            const int b = quantize(gray.at(y2, x2, 0));
            g.matrix[static_cast<size_t>(a) * levels + b] += 1.0;
            g.matrix[static_cast<size_t>(b) * levels + a] += 1.0;  // symmetrize
            total += 2.0;
        }
    }
    if (total == 0.0) throw InputError("compute_glcm: no co-occurring pairs at this offset");
    for (auto& v : g.matrix) v /= total;
    return g;
}

double homogeneity(const Glcm& g) {
    if (!g.normalized) throw UsageError("homogeneity requires a normalized GLCM");
    double s = 0.0;
    for (int i = 0; i < g.levels; ++i)
        for (int j = 0; j < g.levels; ++j)
            s += g.at(i, j) / (1.0 + static_cast<double>(i - j) * (i - j));
    return s;
}

double angular_second_moment(const Glcm& g) {
    if (!g.normalized) throw UsageError("angular_second_moment requires a normalized GLCM");
    double s = 0.0;
    for (int i = 0; i < g.levels; ++i)
        for (int j = 0; j < g.levels; ++j) s += g.at(i, j) * g.at(i, j);
    return s;
}

Image feature_map(const Image& img, GlcmFeature feature, int window, int stride,
                  int levels, bool normalize_display) {
    const Image gray = to_gray(img);
    if (window > gray.height || window > gray.width)
        throw InputError("feature_map: window larger than image");
    if (stride < 1) throw InputError("feature_map: stride must be >= 1");
    const int oh = (gray.height - window) / stride + 1;
    const int ow = (gray.width - window) / stride + 1;
    Image map(oh, ow, 1);
    map.provenance = Provenance::filtered;
    Image patch(window, window, 1);
#pragma omp parallel for schedule(static) firstprivate(patch)
    for (int wy = 0; wy < oh; ++wy) {
        for (int wx = 0; wx < ow; ++wx) {
            for (int y = 0; y < window; ++y)
                for (int x = 0; x < window; ++x)
                    patch.at(y, x, 0) = gray.at(wy * stride + y, wx * stride + x, 0);
            const Glcm g = compute_glcm(patch, levels);
            map.at(wy, wx, 0) = feature == GlcmFeature::homogeneity
                                    ? homogeneity(g)
                                    : angular_second_moment(g);
        }
    }
    if (normalize_display) {
        const auto [mn_it, mx_it] =
            std::minmax_element(map.pixels.begin(), map.pixels.end());
        const double mn = *mn_it, range = *mx_it - *mn_it;
        for (auto& v : map.pixels) v = range > 0.0 ? (v - mn) / range : 0.0;
    }
    return map;
}

}  // namespace cgtrace
