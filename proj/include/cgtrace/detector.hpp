#pragma once

// Three-branch attention classifier: branch 1 sees the high-pass residual of
// the image, branch 2 the RGB image, branch 3 the high-pass residual of the
// re-rendered image. Each branch is a stack of Conv-BN-ReLU6-AvgPool blocks
// with a channel+spatial attention module before its final 1x1 block; the
// globally pooled branch features concatenate to 256 dims -> FC -> softmax.

#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cgtrace/tensor.hpp"

namespace cgtrace {

enum class AttentionMode { both, swapped, channel_only, spatial_only, none };
enum class AblationMode { three_branch, no_renderer, no_highpass };

AttentionMode attention_mode_from_string(const std::string& s);
AblationMode ablation_mode_from_string(const std::string& s);
std::string to_string(AttentionMode m);
std::string to_string(AblationMode m);

struct AttentionConfig {
    int reduction = 8;      // channel bottleneck ratio r
    int spatial_kernel = 7; // odd
};

struct ChannelAttention {
    Conv2dLayer down;  // [C -> C/r], 1x1
    Conv2dLayer up;    // [C/r -> C], 1x1

    ChannelAttention(int channels, int reduction);
    Tensor forward(const Tensor& fm) const;
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        down.visit(prefix + ".down", fn);
        up.visit(prefix + ".up", fn);
    }
};

struct SpatialAttention {
    Conv2dLayer conv;  // [2 -> 1], k x k

    explicit SpatialAttention(int kernel);
    Tensor forward(const Tensor& fm) const;
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        conv.visit(prefix + ".conv", fn);
    }
};

struct AttentionModule {
    ChannelAttention channel;
    SpatialAttention spatial;
    AttentionMode mode = AttentionMode::both;

    AttentionModule(int channels, const AttentionConfig& cfg);
    Tensor forward(const Tensor& fm) const;
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        channel.visit(prefix + ".channel", fn);
        spatial.visit(prefix + ".spatial", fn);
    }
};

struct ConvPoolBlock {
    Conv2dLayer conv;
    BatchNorm2dLayer bn;

    ConvPoolBlock(int in_ch, int out_ch, int kernel);
    Tensor forward(const Tensor& fm, bool training);
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        conv.visit(prefix + ".conv", fn);
        bn.visit(prefix + ".bn", fn);
    }
    template <typename Fn>
    void visit_buffers(const std::string& prefix, Fn&& fn) {
        bn.visit_buffers(prefix + ".bn", fn);
    }
};

struct Branch {
    std::vector<ConvPoolBlock> blocks;  // pre-attention Conv-Pool stack
    AttentionModule attention;
    ConvPoolBlock final_block;          // 1x1 kernel

    Branch(const std::vector<int>& channels, int final_channels, const AttentionConfig& cfg);
    Tensor forward(const Tensor& input, bool training);  // [N,3,H,W] -> [N,Cfinal]
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i].visit(prefix + ".block" + std::to_string(i), fn);
        attention.visit(prefix + ".attn", fn);
        final_block.visit(prefix + ".final", fn);
    }
    template <typename Fn>
    void visit_buffers(const std::string& prefix, Fn&& fn) {
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i].visit_buffers(prefix + ".block" + std::to_string(i), fn);
        final_block.visit_buffers(prefix + ".final", fn);
    }
};

struct DetectorParams {
    Branch branch1;  // H(Img):      16 -> 32(5x5) -> attn -> 64(1x1)
    Branch branch2;  // Img:         16 -> 32 -> 64(5x5) -> attn -> 128(1x1)
    Branch branch3;  // H(render):   mirrors branch1
    DenseLayer fc{256, 2};
    AblationMode ablation = AblationMode::three_branch;

    explicit DetectorParams(const AttentionConfig& cfg = {},
                            AblationMode ablation = AblationMode::three_branch);
    void init(std::mt19937_64& rng);
    void set_attention_mode(AttentionMode m);

    // Views stacked per sample: hf_original, rgb, hf_rendered ([N,3,H,W] each).
    Tensor forward_logits(const Tensor& hf_original, const Tensor& rgb,
                          const Tensor& hf_rendered, bool training);
    Tensor forward(const Tensor& hf_original, const Tensor& rgb, const Tensor& hf_rendered,
                   bool training);  // probabilities [N,2]; label 1 = CG

    std::vector<Tensor> parameters();  // trainable tensors of active branches
    template <typename Fn>
    void visit(Fn&& fn) {
        branch1.visit("detector.b1", fn);
        branch2.visit("detector.b2", fn);
        branch3.visit("detector.b3", fn);
        fc.visit("detector.fc", fn);
    }
    template <typename Fn>
    void visit_buffers(Fn&& fn) {  // BN running statistics
        branch1.visit_buffers("detector.b1", fn);
        branch2.visit_buffers("detector.b2", fn);
        branch3.visit_buffers("detector.b3", fn);
    }
};

struct TrainSample {
    Tensor hf_original;  // [3,H,W] views, stacked into batches by the loop
    Tensor rgb;
    Tensor hf_rendered;
    int label = 0;
};

struct TrainHyper {
    double lr = 0.0008;
    int batch_size = 64;
    int max_epochs = 400;
    double flip_p = 0.3;
    int early_stop_patience = 0;  // 0 = disabled
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double val_loss = 0.0;
    double train_acc = 0.0;
    double val_acc = 0.0;
};

struct Metrics {
    std::optional<double> acc, tpr, tnr;
};

std::vector<EpochStats> train_detector(DetectorParams& params,
                                       const std::vector<TrainSample>& train_set,
                                       const std::vector<TrainSample>& val_set,
                                       const TrainHyper& hyper, std::mt19937_64& rng);

Metrics evaluate_detector(DetectorParams& params, const std::vector<TrainSample>& samples);

void save_history_csv(const std::vector<EpochStats>& history, const std::string& path);

}  // namespace cgtrace
