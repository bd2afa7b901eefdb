#pragma once

// Minimal self-contained JPEG quantization math: 8x8 orthonormal DCT pair,
// the standard quantization tables, and the IJG quality-factor scaling rule.
// Entropy coding is deliberately absent; only decoded pixels matter here.

#include <array>
#include <cstdint>

namespace cgtrace::jpegcodec {

using Block = std::array<double, 64>;

extern const std::array<int, 64> kStdLuminanceQuant;
extern const std::array<int, 64> kStdChrominanceQuant;

// IJG scaling: scale = qf < 50 ? 5000/qf : 200 - 2*qf; entries clamped to [1,255].
std::array<int, 64> scale_quant_table(const std::array<int, 64>& base, int quality);

void dct8x8(const Block& in, Block& out);
void idct8x8(const Block& in, Block& out);

// Quantize-dequantize round trip of one spatial-domain block (values
// centered around 0, i.e. already level-shifted).
Block quant_round_trip(const Block& spatial, const std::array<int, 64>& table);

}  // namespace cgtrace::jpegcodec
