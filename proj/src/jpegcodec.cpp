#include "cgtrace/jpegcodec.hpp"

#include <algorithm>
#include <cmath>

namespace cgtrace::jpegcodec {

const std::array<int, 64> kStdLuminanceQuant = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,
    14, 13, 16, 24, 40,  57,  69,  56,  14, 17, 22, 29, 51,  87,  80,  62,
    18, 22, 37, 56, 68,  109, 103, 77,  24, 35, 55, 64, 81,  104, 113, 92,
    49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

const std::array<int, 64> kStdChrominanceQuant = {
    17, 18, 24, 47, 99, 99, 99, 99, 18, 21, 26, 66, 99, 99, 99, 99,
    24, 26, 56, 99, 99, 99, 99, 99, 47, 66, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99,
    99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99, 99};

std::array<int, 64> scale_quant_table(const std::array<int, 64>& base, int quality) {
    quality = std::clamp(quality, 1, 100);
    const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
    std::array<int, 64> out{};
    for (int i = 0; i < 64; ++i)
        out[i] = std::clamp((base[i] * scale + 50) / 100, 1, 255);
    return out;
}

namespace {

// Cosine basis, computed once.
struct DctBasis {
    double c[8][8];
    DctBasis() {
        for (int k = 0; k < 8; ++k)
            for (int n = 0; n < 8; ++n)
                c[k][n] = std::cos((2 * n + 1) * k * M_PI / 16.0) *
                          (k == 0 ? std::sqrt(1.0 / 8.0) : std::sqrt(2.0 / 8.0));
    }
};
const DctBasis kBasis;

}  // namespace

void dct8x8(const Block& in, Block& out) {
    double tmp[8][8];
    for (int u = 0; u < 8; ++u)
        for (int x = 0; x < 8; ++x) {
            double s = 0.0;
            for (int y = 0; y < 8; ++y) s += kBasis.c[u][y] * in[y * 8 + x];
            tmp[u][x] = s;
        }
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double s = 0.0;
            for (int x = 0; x < 8; ++x) s += kBasis.c[v][x] * tmp[u][x];
            out[u * 8 + v] = s;
        }
}

void idct8x8(const Block& in, Block& out) {
    double tmp[8][8];
    for (int u = 0; u < 8; ++u)
        for (int x = 0; x < 8; ++x) {
            double s = 0.0;
            for (int v = 0; v < 8; ++v) s += kBasis.c[v][x] * in[u * 8 + v];
            tmp[u][x] = s;
        }
    for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) {
            double s = 0.0;
            for (int u = 0; u < 8; ++u) s += kBasis.c[u][y] * tmp[u][x];
            out[y * 8 + x] = s;
        }
}

Block quant_round_trip(const Block& spatial, const std::array<int, 64>& table) {
    Block freq, out;
    dct8x8(spatial, freq);
    for (int i = 0; i < 64; ++i)
        freq[i] = std::round(freq[i] / table[i]) * table[i];
    idct8x8(freq, out);
    return out;
}

}  // namespace cgtrace::jpegcodec
