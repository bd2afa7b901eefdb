#include "cgtrace/bridge.hpp"

#include "cgtrace/errors.hpp"

namespace cgtrace {

Tensor image_to_tensor(const Image& img) {
    Tensor t = Tensor::zeros({1, img.channels, img.height, img.width});
    double* d = t.data();
    for (int c = 0; c < img.channels; ++c)
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                d[(static_cast<int64_t>(c) * img.height + y) * img.width + x] = img.at(y, x, c);
    return t;
}

Image tensor_to_image(const Tensor& t, Provenance provenance) {
    const auto& s = t.shape();
    int c0;
    if (s.size() == 4 && s[0] == 1)
        c0 = 1;
    else if (s.size() == 3)
        c0 = 0;
    else
        throw DimensionError("tensor_to_image: expected [1,C,H,W] or [C,H,W]");
    const int C = static_cast<int>(s[c0]), H = static_cast<int>(s[c0 + 1]),
              W = static_cast<int>(s[c0 + 2]);
    if (C != 1 && C != 3) throw DimensionError("tensor_to_image: channels must be 1 or 3");
    Image img(H, W, C);
    img.provenance = provenance;
    const double* d = t.data();
    for (int c = 0; c < C; ++c)
        for (int y = 0; y < H; ++y)
            for (int x = 0; x < W; ++x)
                img.at(y, x, c) = d[(static_cast<int64_t>(c) * H + y) * W + x];
    img.clamp01();
    return img;
}

}  // namespace cgtrace
