#pragma once

#include <random>
#include <string>
#include <vector>

#include "cgtrace/image.hpp"
#include "cgtrace/tensor.hpp"

namespace cgtrace {

// Per-pixel class labels guiding the texture renderer.
struct SegMap {
    int height = 0;
    int width = 0;
    int num_classes = 1;
    std::vector<int> labels;  // row-major, values in [0, num_classes)

    int at(int y, int x) const { return labels[static_cast<size_t>(y) * width + x]; }
};

// Seeded k-means over (r,g,b,x/W,y/H) features, fixed 20 iterations.
SegMap segment_simple(const Image& img, int k, std::mt19937_64& rng);

// Single-channel PGM/PNG label image, pixel value = class id, K = max+1.
SegMap load_segmap(const std::string& path, int expected_h, int expected_w);
void save_segmap(const SegMap& seg, const std::string& path);

// [K,H,W] indicator tensor; channel k is 1 where label == k.
Tensor one_hot(const SegMap& seg);

}  // namespace cgtrace
