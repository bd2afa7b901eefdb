#pragma once

// Segmentation-guided texture renderer: a segmentation response network
// produces per-position condition maps (P1, P2); 16 residual blocks apply
// affine feature modulation AT(FM) = FM * P1 + P2 at half resolution; a
// nearest-neighbor upsample and a global input skip restore the image.

#include <random>
#include <string>
#include <vector>

#include "cgtrace/image.hpp"
#include "cgtrace/segmentation.hpp"
#include "cgtrace/tensor.hpp"

namespace cgtrace {

struct ConditionMaps {
    Tensor p1;  // [1,64,H/2,W/2]
    Tensor p2;
};

Tensor affine_transform(const Tensor& fm, const ConditionMaps& cond);

struct ResidualBlock {
    Conv2dLayer conv1{64, 64, 3, 1, 1};
    Conv2dLayer conv2{64, 64, 3, 1, 1};

    Tensor forward(const Tensor& fm, const ConditionMaps& cond) const;
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        conv1.visit(prefix + ".conv1", fn);
        conv2.visit(prefix + ".conv2", fn);
    }
};

struct SegResponseNet {
    int num_classes = 8;
    std::vector<Conv2dLayer> trunk;    // 5 x 1x1 convs, one stride-2
    std::vector<Conv2dLayer> head_p1;  // 2 x 1x1 convs, 32 -> 32 -> 64
    std::vector<Conv2dLayer> head_p2;

    explicit SegResponseNet(int k = 8);
    ConditionMaps forward(const Tensor& seg_onehot) const;  // [1,K,H,W]
    template <typename Fn>
    void visit(const std::string& prefix, Fn&& fn) {
        for (size_t i = 0; i < trunk.size(); ++i) trunk[i].visit(prefix + ".trunk" + std::to_string(i), fn);
        for (size_t i = 0; i < head_p1.size(); ++i) head_p1[i].visit(prefix + ".p1_" + std::to_string(i), fn);
        for (size_t i = 0; i < head_p2.size(); ++i) head_p2[i].visit(prefix + ".p2_" + std::to_string(i), fn);
    }
};

struct RendererParams {
    Conv2dLayer head{3, 64, 3, 1, 1};
    Conv2dLayer down{64, 64, 3, 2, 1};
    std::vector<ResidualBlock> blocks;  // 16
    Conv2dLayer post{64, 64, 3, 1, 1};  // conv after the trailing affine step
    Conv2dLayer tail1{64, 64, 3, 1, 1};
    Conv2dLayer tail2{64, 3, 3, 1, 1};
    SegResponseNet response;

    explicit RendererParams(int num_classes = 8, int num_blocks = 16);
    // He init. With identity_start the last tail conv is zeroed so the
    // global skip makes render(img) == img at step 0 (training start); the
    // frozen-renderer pipeline passes false to get a non-trivial residual.
    void init(std::mt19937_64& rng, bool identity_start = true);
    void init_zero();

    // [1,3,H,W] + one-hot [1,K,H,W] -> [1,3,H,W], unclamped.
    Tensor forward(const Tensor& img, const Tensor& seg_onehot) const;

    std::vector<Tensor> parameters();
    template <typename Fn>
    void visit(Fn&& fn) {
        head.visit("renderer.head", fn);
        down.visit("renderer.down", fn);
        for (size_t i = 0; i < blocks.size(); ++i)
            blocks[i].visit("renderer.block" + std::to_string(i), fn);
        post.visit("renderer.post", fn);
        tail1.visit("renderer.tail1", fn);
        tail2.visit("renderer.tail2", fn);
        response.visit("renderer.response", fn);
    }
};

// Inference wrapper: clamps into [0,1] and tags provenance=rendered.
Image render(const Image& img, const SegMap& seg, const RendererParams& params);

struct Discriminator {
    std::vector<Conv2dLayer> convs;  // 3->16->32->64->64, 3x3 stride 2
    DenseLayer fc{64, 1};

    Discriminator();
    void init(std::mt19937_64& rng);
    Tensor forward(const Tensor& img) const;  // [N,3,H,W] -> [N,1] in (0,1)
    double score(const Image& img) const;

    std::vector<Tensor> parameters();
    template <typename Fn>
    void visit(Fn&& fn) {
        for (size_t i = 0; i < convs.size(); ++i)
            convs[i].visit("disc.conv" + std::to_string(i), fn);
        fc.visit("disc.fc", fn);
    }
};

struct AdversarialOptions {
    int steps = 100;
    double lr = 0.0008;
    double lambda_l1 = 1.0;    // reconstruction anchor weight
    double alpha_adv = 0.01;   // adversarial weight for the generator
    bool saturating = false;   // minimize log(1-D(G(x))) instead of -log D(G(x))
};

struct AdversarialHistory {
    std::vector<double> g_loss;
    std::vector<double> d_loss;
    std::vector<double> l1;
};

// Alternating D/G Adam updates; seed-deterministic; throws NumericError with
// the step index if a loss goes non-finite.
AdversarialHistory adversarial_train(RendererParams& renderer, Discriminator& discriminator,
                                     const std::vector<Image>& images,
                                     const std::vector<SegMap>& segmaps,
                                     const AdversarialOptions& opts, std::mt19937_64& rng);

}  // namespace cgtrace
