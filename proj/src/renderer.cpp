#include "cgtrace/renderer.hpp"

#include <cmath>

#include "cgtrace/bridge.hpp"
#include "cgtrace/errors.hpp"

namespace cgtrace {

Tensor affine_transform(const Tensor& fm, const ConditionMaps& cond) {
    if (fm.shape() != cond.p1.shape() || fm.shape() != cond.p2.shape())
        throw DimensionError("affine_transform: shape mismatch between features and conditions");
    return add(mul(fm, cond.p1), cond.p2);
}

Tensor ResidualBlock::forward(const Tensor& fm, const ConditionMaps& cond) const {
    Tensor t = relu(conv1.forward(affine_transform(fm, cond)));
    t = relu(conv2.forward(affine_transform(t, cond)));
    return add(t, fm);
}

SegResponseNet::SegResponseNet(int k) : num_classes(k) {
    if (k < 1) throw UsageError("seg response net: class count must be >= 1");
    trunk.emplace_back(k, 32, 1, 1, 0);
    trunk.emplace_back(32, 32, 1, 2, 0);  // the single stride-2 step
    trunk.emplace_back(32, 32, 1, 1, 0);
    trunk.emplace_back(32, 32, 1, 1, 0);
    trunk.emplace_back(32, 32, 1, 1, 0);
    head_p1.emplace_back(32, 32, 1, 1, 0);
    head_p1.emplace_back(32, 64, 1, 1, 0);
    head_p2.emplace_back(32, 32, 1, 1, 0);
    head_p2.emplace_back(32, 64, 1, 1, 0);
}

ConditionMaps SegResponseNet::forward(const Tensor& seg_onehot) const {
    if (seg_onehot.ndim() != 4 || seg_onehot.dim(1) != num_classes)
        throw UsageError("seg response net: one-hot class count mismatch");
    Tensor t = seg_onehot;
    for (const auto& c : trunk) t = relu(c.forward(t));
    Tensor p1 = head_p1[1].forward(relu(head_p1[0].forward(t)));
    Tensor p2 = head_p2[1].forward(relu(head_p2[0].forward(t)));
    return {p1, p2};
}

RendererParams::RendererParams(int num_classes, int num_blocks) : response(num_classes) {
    if (num_blocks < 1) throw UsageError("renderer: need at least one residual block");
    blocks.resize(num_blocks);
}

void RendererParams::init(std::mt19937_64& rng, bool identity_start) {
    head.init_he(rng);
    down.init_he(rng);
    for (auto& b : blocks) {
        b.conv1.init_he(rng);
        b.conv2.init_he(rng);
    }
    post.init_he(rng);
    tail1.init_he(rng);
    if (identity_start) {
        tail2.init_zero();  // global skip dominates: render == input at step 0
    } else {
        tail2.init_he(rng);
        // keep the residual small so the rendered image stays near the
        // input instead of saturating the [0,1] clamp
        double* w = tail2.weight.data();
        for (int64_t i = 0; i < tail2.weight.numel(); ++i) w[i] *= 0.1;
    }
    for (auto& c : response.trunk) c.init_he(rng);
    for (auto& c : response.head_p1) c.init_he(rng);
    for (auto& c : response.head_p2) c.init_he(rng);
}

void RendererParams::init_zero() {
    head.init_zero();
    down.init_zero();
    for (auto& b : blocks) {
        b.conv1.init_zero();
        b.conv2.init_zero();
    }
    post.init_zero();
    tail1.init_zero();
    tail2.init_zero();
    for (auto& c : response.trunk) c.init_zero();
    for (auto& c : response.head_p1) c.init_zero();
    for (auto& c : response.head_p2) c.init_zero();
}

Tensor RendererParams::forward(const Tensor& img, const Tensor& seg_onehot) const {
    if (img.ndim() != 4 || img.dim(1) != 3)
        throw InputError("renderer: expected a [N,3,H,W] input");
    if (img.dim(2) % 2 != 0 || img.dim(3) % 2 != 0)
        throw InputError("renderer: spatial size must be even");
    if (seg_onehot.dim(2) != img.dim(2) || seg_onehot.dim(3) != img.dim(3))
        throw InputError("renderer: segmentation size mismatch");

    const ConditionMaps cond = response.forward(seg_onehot);
    Tensor t = relu(head.forward(img));
    t = relu(down.forward(t));
    for (const auto& b : blocks) t = b.forward(t, cond);
    t = relu(post.forward(affine_transform(t, cond)));
    t = upsample_nearest2x(t);
    t = relu(tail1.forward(t));
    t = tail2.forward(t);
    return add(t, img);  // global skip
}

Image render(const Image& img, const SegMap& seg, const RendererParams& params) {
    if (img.channels != 3) throw InputError("render: 3-channel image required");
    if (seg.height != img.height || seg.width != img.width)
        throw InputError("render: segmentation size mismatch");
    NoGradGuard guard;
    Tensor x = image_to_tensor(img);
    Tensor oh = one_hot(seg);
    oh = reshape(oh, {1, oh.dim(0), oh.dim(1), oh.dim(2)});
    Tensor y = params.forward(x, oh);
    return tensor_to_image(y, Provenance::rendered);
}

std::vector<Tensor> RendererParams::parameters() {
    std::vector<Tensor> out;
    visit([&out](const std::string&, Tensor& t) { out.push_back(t); });
    return out;
}

Discriminator::Discriminator() {
    convs.emplace_back(3, 16, 3, 2, 1);
    convs.emplace_back(16, 32, 3, 2, 1);
    convs.emplace_back(32, 64, 3, 2, 1);
    convs.emplace_back(64, 64, 3, 2, 1);
}

void Discriminator::init(std::mt19937_64& rng) {
    for (auto& c : convs) c.init_he(rng);
    fc.init_he(rng);
}

Tensor Discriminator::forward(const Tensor& img) const {
    if (img.ndim() != 4 || img.dim(1) != 3)
        throw InputError("discriminator: expected a [N,3,H,W] input");
    Tensor t = img;
    for (const auto& c : convs) t = relu(c.forward(t));
    t = global_avg_pool(t);  // [N,64]
    t = fc.forward(t);       // [N,1]
    return sigmoid(t);
}

double Discriminator::score(const Image& img) const {
    NoGradGuard guard;
    return forward(image_to_tensor(img)).item();
}

std::vector<Tensor> Discriminator::parameters() {
    std::vector<Tensor> out;
    visit([&out](const std::string&, Tensor& t) { out.push_back(t); });
    return out;
}

AdversarialHistory adversarial_train(RendererParams& renderer, Discriminator& discriminator,
                                     const std::vector<Image>& images,
                                     const std::vector<SegMap>& segmaps,
                                     const AdversarialOptions& opts, std::mt19937_64& rng) {
    if (images.empty() || images.size() != segmaps.size())
        throw InputError("adversarial_train: need matching, nonempty image/segmap lists");
    if (opts.steps < 0) throw InputError("adversarial_train: negative step count");

    std::vector<Tensor> xs, ohs;
    xs.reserve(images.size());
    for (size_t i = 0; i < images.size(); ++i) {
        NoGradGuard guard;
        xs.push_back(image_to_tensor(images[i]));
        Tensor oh = one_hot(segmaps[i]);
        ohs.push_back(reshape(oh, {1, oh.dim(0), oh.dim(1), oh.dim(2)}));
    }

    Adam adam_g(renderer.parameters(), opts.lr);
    Adam adam_d(discriminator.parameters(), opts.lr);
    std::uniform_int_distribution<size_t> pick(0, images.size() - 1);
    AdversarialHistory history;

    for (int step = 0; step < opts.steps; ++step) {
        const size_t i = pick(rng);
        try {
            // --- discriminator: maximize log D(x) + log(1 - D(G(x))) -----
            Tensor fake_detached;
            {
                NoGradGuard guard;
                fake_detached = renderer.forward(xs[i], ohs[i]);
            }
            Tensor one = Tensor::full({1, 1}, 1.0);
            Tensor d_loss = scale(
                add(log(discriminator.forward(xs[i])),
                    log(sub(one, discriminator.forward(fake_detached)))),
                -1.0);
            adam_d.zero_grad();
            d_loss.backward();
            adam_d.step();
            history.d_loss.push_back(d_loss.item());

            // --- generator: minimize lambda*L1 + alpha*L_adv --------------
            Tensor g_out = renderer.forward(xs[i], ohs[i]);
            Tensor l1 = l1_loss(g_out, xs[i]);
            Tensor g_loss = scale(l1, opts.lambda_l1);
            if (opts.alpha_adv != 0.0) {
                Tensor d_g = discriminator.forward(g_out);
                Tensor adv = opts.saturating ? log(sub(one, d_g)) : scale(log(d_g), -1.0);
                g_loss = add(g_loss, scale(sum(adv), opts.alpha_adv));
            }
            Tensor g_scalar = sum(g_loss);
            adam_g.zero_grad();
            g_scalar.backward();
            adam_g.step();
            history.g_loss.push_back(g_scalar.item());
            history.l1.push_back(l1.item());
        } catch (const NumericError& e) {
            throw NumericError("adversarial_train: non-finite loss at step " +
                               std::to_string(step) + ": " + e.what());
        }
    }
    return history;
}

}  // namespace cgtrace
