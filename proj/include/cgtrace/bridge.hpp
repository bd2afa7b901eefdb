#pragma once

#include "cgtrace/image.hpp"
#include "cgtrace/tensor.hpp"

namespace cgtrace {

// HWC image in [0,1] -> [1,C,H,W] tensor (no gradient tracking).
Tensor image_to_tensor(const Image& img);

// [1,C,H,W] (or [C,H,W]) tensor -> clamped HWC image.
Image tensor_to_image(const Tensor& t, Provenance provenance = Provenance::rendered);

}  // namespace cgtrace
