#pragma once

#include <string>
#include <vector>

namespace cgtrace {

enum class Provenance { loaded, synthetic_pg, synthetic_cg, rendered, filtered, attacked };

// H x W x C pixel array, values in [0,1], row-major HWC.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 0;  // 1 or 3
    std::vector<double> pixels;
    Provenance provenance = Provenance::loaded;

    Image() = default;
    Image(int h, int w, int c, double fill = 0.0);

    double& at(int y, int x, int ch) {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + ch];
    }
    double at(int y, int x, int ch) const {
        return pixels[(static_cast<size_t>(y) * width + x) * channels + ch];
    }

    void clamp01();
    bool empty() const { return pixels.empty(); }
};

// Luma conversion (0.299/0.587/0.114); identity for single-channel input.
Image to_gray(const Image& img);

// Dispatches on extension: .png, .jpg/.jpeg, .ppm, .pgm.
Image load_image(const std::string& path);
// Writers: PNG and PPM/PGM (binary). 8-bit, values rounded from [0,1].
void save_image(const Image& img, const std::string& path);

}  // namespace cgtrace
