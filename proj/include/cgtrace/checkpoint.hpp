#pragma once

// Versioned binary checkpoint container. Layout (all little-endian):
//   magic "CGT1" | u32 version | u64 seed | config text | metrics |
//   named tensors (u32-rank shape + float32 values) | u32 CRC32 of payload
// Optimizer moments travel as additional tensors ("<param>.adam_m"/".adam_v",
// plus the scalar "adam.t").

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cgtrace/tensor.hpp"

namespace cgtrace {

struct ModelCheckpoint {
    uint32_t version = 1;
    uint64_t seed = 0;
    std::string config_text;
    std::vector<std::pair<std::string, double>> metrics;

    struct Entry {
        std::string name;
        std::vector<int64_t> shape;
        std::vector<float> values;
    };
    std::vector<Entry> tensors;

    void add_tensor(const std::string& name, const Tensor& t);
    void add_buffer(const std::string& name, const std::vector<double>& v);
    const Entry* find(const std::string& name) const;
    // Copies values into t; throws DimensionError naming the tensor on
    // shape mismatch and IoError if the entry is absent.
    void load_into(const std::string& name, Tensor& t) const;
    void load_into(const std::string& name, std::vector<double>& v) const;
};

void save_checkpoint(const ModelCheckpoint& ckpt, const std::string& path);
ModelCheckpoint load_checkpoint(const std::string& path);

uint32_t crc32(const uint8_t* data, size_t n);

}  // namespace cgtrace
