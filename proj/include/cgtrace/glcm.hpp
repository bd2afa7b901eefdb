#pragma once

#include <vector>

#include "cgtrace/image.hpp"

namespace cgtrace {

// Normalized symmetric gray-level co-occurrence matrix.
struct Glcm {
    int levels = 0;
    std::vector<double> matrix;  // levels x levels, row-major
    int offset_dy = 0;
    int offset_dx = 1;
    bool symmetric = true;
    bool normalized = true;

    double at(int i, int j) const { return matrix[static_cast<size_t>(i) * levels + j]; }
};

enum class GlcmFeature { homogeneity, asm_energy };

// Quantize to `levels` bins, count co-occurrences at (dy,dx), symmetrize by
// adding the transpose, normalize to sum 1. RGB input is converted via luma.
Glcm compute_glcm(const Image& img, int levels = 8, int offset_dy = 0, int offset_dx = 1);

// sum_ij P_ij / (1 + (i-j)^2)
double homogeneity(const Glcm& g);
// Angular second moment: sum_ij P_ij^2
double angular_second_moment(const Glcm& g);

// Sliding-window feature map. Raw feature values (already in (0,1]);
// optional min-max rescaling for display.
Image feature_map(const Image& img, GlcmFeature feature, int window = 16, int stride = 8,
                  int levels = 8, bool normalize_display = false);

}  // namespace cgtrace
