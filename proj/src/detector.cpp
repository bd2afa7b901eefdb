#include "cgtrace/detector.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "cgtrace/errors.hpp"

namespace cgtrace {

AttentionMode attention_mode_from_string(const std::string& s) {
    if (s == "both") return AttentionMode::both;
    if (s == "swapped") return AttentionMode::swapped;
    if (s == "channel") return AttentionMode::channel_only;
    if (s == "spatial") return AttentionMode::spatial_only;
    if (s == "none") return AttentionMode::none;
    throw UsageError("unknown attention mode: " + s);
}

AblationMode ablation_mode_from_string(const std::string& s) {
    if (s == "three") return AblationMode::three_branch;
    if (s == "no-renderer") return AblationMode::no_renderer;
    if (s == "no-highpass") return AblationMode::no_highpass;
    throw UsageError("unknown ablation mode: " + s);
}

std::string to_string(AttentionMode m) {
    switch (m) {
        case AttentionMode::both: return "both";
        case AttentionMode::swapped: return "swapped";
        case AttentionMode::channel_only: return "channel";
        case AttentionMode::spatial_only: return "spatial";
        case AttentionMode::none: return "none";
    }
    return "?";
}

std::string to_string(AblationMode m) {
    switch (m) {
        case AblationMode::three_branch: return "three";
        case AblationMode::no_renderer: return "no-renderer";
        case AblationMode::no_highpass: return "no-highpass";
    }
    return "?";
}

ChannelAttention::ChannelAttention(int channels, int reduction)
    : down(channels, channels / std::max(1, reduction), 1, 1, 0),
      up(channels / std::max(1, reduction), channels, 1, 1, 0) {
    if (reduction < 1 || channels % reduction != 0)
        throw UsageError("channel attention: channels must be divisible by the reduction ratio");
}

Tensor ChannelAttention::forward(const Tensor& fm) const {
    Tensor s = global_avg_pool(fm);                       // [N,C]
    s = reshape(s, {fm.dim(0), fm.dim(1), 1, 1});
    Tensor gate = sigmoid(up.forward(relu(down.forward(s))));
    return mul_channel_gate(fm, gate);
}

SpatialAttention::SpatialAttention(int kernel) : conv(2, 1, kernel, 1, kernel / 2) {
    if (kernel < 1 || kernel % 2 == 0)
        throw UsageError("spatial attention: kernel must be odd");
}

Tensor SpatialAttention::forward(const Tensor& fm) const {
    Tensor maps = concat_channels(channel_mean_map(fm), channel_max_map(fm));
    Tensor gate = sigmoid(conv.forward(maps));  // [N,1,H,W]
    return mul_spatial_gate(fm, gate);
}

AttentionModule::AttentionModule(int channels, const AttentionConfig& cfg)
    : channel(channels, cfg.reduction), spatial(cfg.spatial_kernel) {}

Tensor AttentionModule::forward(const Tensor& fm) const {
    switch (mode) {
        case AttentionMode::both: return spatial.forward(channel.forward(fm));
        case AttentionMode::swapped: return channel.forward(spatial.forward(fm));
        case AttentionMode::channel_only: return channel.forward(fm);
        case AttentionMode::spatial_only: return spatial.forward(fm);
        case AttentionMode::none: return fm;
    }
    return fm;
}

ConvPoolBlock::ConvPoolBlock(int in_ch, int out_ch, int kernel)
    : conv(in_ch, out_ch, kernel, 1, kernel / 2), bn(out_ch) {}

Tensor ConvPoolBlock::forward(const Tensor& fm, bool training) {
    return avg_pool2d(relu6(bn.forward(conv.forward(fm), training)));
}

Branch::Branch(const std::vector<int>& channels, int final_channels, const AttentionConfig& cfg)
    : attention(channels.back(), cfg), final_block(channels.back(), final_channels, 1) {
    int in_ch = 3;
    for (int out_ch : channels) {
        blocks.emplace_back(in_ch, out_ch, 5);
        in_ch = out_ch;
    }
}

Tensor Branch::forward(const Tensor& input, bool training) {
    Tensor t = input;
    for (auto& b : blocks) t = b.forward(t, training);
    t = attention.forward(t);
    t = final_block.forward(t, training);
    return global_avg_pool(t);
}

DetectorParams::DetectorParams(const AttentionConfig& cfg, AblationMode ablation_mode)
    : branch1({16, 32}, 64, cfg),
      branch2({16, 32, 64}, 128, cfg),
      branch3({16, 32}, 64, cfg),
      fc(ablation_mode == AblationMode::three_branch ? 256 : 192, 2),
      ablation(ablation_mode) {}

void DetectorParams::init(std::mt19937_64& rng) {
    auto init_branch = [&rng](Branch& b) {
        for (auto& blk : b.blocks) blk.conv.init_he(rng);
        b.attention.channel.down.init_he(rng);
        b.attention.channel.up.init_he(rng);
        b.attention.spatial.conv.init_he(rng);
        b.final_block.conv.init_he(rng);
    };
    init_branch(branch1);
    init_branch(branch2);
    init_branch(branch3);
    fc.init_he(rng);
}

void DetectorParams::set_attention_mode(AttentionMode m) {
    branch1.attention.mode = m;
    branch2.attention.mode = m;
    branch3.attention.mode = m;
}

Tensor DetectorParams::forward_logits(const Tensor& hf_original, const Tensor& rgb,
                                      const Tensor& hf_rendered, bool training) {
    std::vector<Tensor> feats;
    if (ablation != AblationMode::no_highpass)
        feats.push_back(branch1.forward(hf_original, training));
    feats.push_back(branch2.forward(rgb, training));
    if (ablation != AblationMode::no_renderer)
        feats.push_back(branch3.forward(hf_rendered, training));
    return fc.forward(concat_features(feats));
}

Tensor DetectorParams::forward(const Tensor& hf_original, const Tensor& rgb,
                               const Tensor& hf_rendered, bool training) {
    return softmax(forward_logits(hf_original, rgb, hf_rendered, training));
}

std::vector<Tensor> DetectorParams::parameters() {
    std::vector<Tensor> out;
    auto grab = [&out](const std::string&, Tensor& t) { out.push_back(t); };
    if (ablation != AblationMode::no_highpass) branch1.visit("b1", grab);
    branch2.visit("b2", grab);
    if (ablation != AblationMode::no_renderer) branch3.visit("b3", grab);
    fc.visit("fc", grab);
    return out;
}

namespace {

// Stack one view of the chosen samples into a [B,3,H,W] batch, applying the
// per-sample flips consistently with the other views.
Tensor stack_view(const std::vector<TrainSample>& samples, const std::vector<int>& idx,
                  int view, const std::vector<uint8_t>& flip_h, const std::vector<uint8_t>& flip_v) {
    const Tensor& first = samples[idx[0]].rgb;
    const int C = first.dim(0), H = first.dim(1), W = first.dim(2);
    Tensor out = Tensor::zeros({static_cast<int64_t>(idx.size()), C, H, W});
    double* o = out.data();
    for (size_t b = 0; b < idx.size(); ++b) {
        const TrainSample& s = samples[idx[b]];
        const Tensor& v = view == 0 ? s.hf_original : view == 1 ? s.rgb : s.hf_rendered;
        if (v.dim(0) != C || v.dim(1) != H || v.dim(2) != W)
            throw DimensionError("train batch: sample views disagree in shape");
        const double* src = v.data();
        const bool fh = flip_h[idx[b]], fv = flip_v[idx[b]];
        for (int c = 0; c < C; ++c)
            for (int y = 0; y < H; ++y)
                for (int x = 0; x < W; ++x) {
                    const int sy = fv ? H - 1 - y : y;
                    const int sx = fh ? W - 1 - x : x;
                    o[((b * C + c) * static_cast<int64_t>(H) + y) * W + x] =
                        src[(static_cast<int64_t>(c) * H + sy) * W + sx];
                }
    }
    return out;
}

struct BatchScore {
    double loss_sum = 0.0;
    int correct = 0;
};

BatchScore run_batch(DetectorParams& params, const std::vector<TrainSample>& samples,
                     const std::vector<int>& idx, const std::vector<uint8_t>& flip_h,
                     const std::vector<uint8_t>& flip_v, bool training, Adam* opt) {
    Tensor hf = stack_view(samples, idx, 0, flip_h, flip_v);
    Tensor rgb = stack_view(samples, idx, 1, flip_h, flip_v);
    Tensor hfr = stack_view(samples, idx, 2, flip_h, flip_v);
    std::vector<int> labels(idx.size());
    for (size_t b = 0; b < idx.size(); ++b) labels[b] = samples[idx[b]].label;

    Tensor logits = params.forward_logits(hf, rgb, hfr, training);
    Tensor loss = cross_entropy_logits(logits, labels);

    BatchScore score;
    score.loss_sum = loss.item() * static_cast<double>(idx.size());
    const double* z = logits.data();
    for (size_t b = 0; b < idx.size(); ++b)
        if ((z[2 * b + 1] > z[2 * b]) == (labels[b] == 1)) ++score.correct;

    if (opt) {
        opt->zero_grad();
        loss.backward();
        opt->step();
    }
    return score;
}

}  // namespace

std::vector<EpochStats> train_detector(DetectorParams& params,
                                       const std::vector<TrainSample>& train_set,
                                       const std::vector<TrainSample>& val_set,
                                       const TrainHyper& hyper, std::mt19937_64& rng) {
    if (train_set.empty() || val_set.empty())
        throw InputError("train_detector: empty train or val split");
    if (hyper.batch_size < 1 || hyper.max_epochs < 1)
        throw InputError("train_detector: bad batch size or epoch count");

    Adam opt(params.parameters(), hyper.lr);
    std::vector<EpochStats> history;
    std::bernoulli_distribution flip(hyper.flip_p);

    std::vector<int> order(train_set.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::vector<int> val_order(val_set.size());
    for (size_t i = 0; i < val_order.size(); ++i) val_order[i] = static_cast<int>(i);
    const std::vector<uint8_t> no_flip_train(train_set.size(), 0),
        no_flip_val(val_set.size(), 0);

    // Best-epoch snapshot for early stopping.
    double best_val_acc = -1.0;
    int best_epoch = -1;
    std::vector<std::vector<double>> best_params, best_buffers;
    auto snapshot = [&params](std::vector<std::vector<double>>& ps,
                              std::vector<std::vector<double>>& bs) {
        ps.clear();
        bs.clear();
        params.visit([&ps](const std::string&, Tensor& t) {
            ps.emplace_back(t.data(), t.data() + t.numel());
        });
        params.visit_buffers(
            [&bs](const std::string&, std::vector<double>& v) { bs.push_back(v); });
    };
    auto restore = [&params](const std::vector<std::vector<double>>& ps,
                             const std::vector<std::vector<double>>& bs) {
        size_t i = 0, j = 0;
        params.visit([&ps, &i](const std::string&, Tensor& t) {
            std::copy(ps[i].begin(), ps[i].end(), t.data());
            ++i;
        });
        params.visit_buffers(
            [&bs, &j](const std::string&, std::vector<double>& v) { v = bs[j++]; });
    };

    for (int epoch = 0; epoch < hyper.max_epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        std::vector<uint8_t> flip_h(train_set.size()), flip_v(train_set.size());
        for (size_t i = 0; i < train_set.size(); ++i) {
            flip_h[i] = hyper.flip_p > 0.0 && flip(rng);
            flip_v[i] = hyper.flip_p > 0.0 && flip(rng);
        }

        EpochStats stats;
        stats.epoch = epoch;
        int correct = 0;
        for (size_t start = 0; start < order.size(); start += hyper.batch_size) {
            const size_t end = std::min(order.size(), start + hyper.batch_size);
            std::vector<int> idx(order.begin() + start, order.begin() + end);
            const BatchScore s = run_batch(params, train_set, idx, flip_h, flip_v, true, &opt);
            stats.train_loss += s.loss_sum;
            correct += s.correct;
        }
        stats.train_loss /= static_cast<double>(train_set.size());
        stats.train_acc = static_cast<double>(correct) / static_cast<double>(train_set.size());

        {
            NoGradGuard guard;
            int vcorrect = 0;
            for (size_t start = 0; start < val_order.size(); start += hyper.batch_size) {
                const size_t end = std::min(val_order.size(), start + hyper.batch_size);
                std::vector<int> idx(val_order.begin() + start, val_order.begin() + end);
                const BatchScore s =
                    run_batch(params, val_set, idx, no_flip_val, no_flip_val, false, nullptr);
                stats.val_loss += s.loss_sum;
                vcorrect += s.correct;
            }
            stats.val_loss /= static_cast<double>(val_set.size());
            stats.val_acc = static_cast<double>(vcorrect) / static_cast<double>(val_set.size());
        }
        history.push_back(stats);

        if (hyper.early_stop_patience > 0) {
            if (stats.val_acc > best_val_acc) {
                best_val_acc = stats.val_acc;
                best_epoch = epoch;
                snapshot(best_params, best_buffers);
            } else if (epoch - best_epoch >= hyper.early_stop_patience) {
                break;
            }
        }
    }
    if (hyper.early_stop_patience > 0 && best_epoch >= 0) restore(best_params, best_buffers);
    return history;
}

Metrics evaluate_detector(DetectorParams& params, const std::vector<TrainSample>& samples) {
    if (samples.empty()) throw InputError("evaluate_detector: empty split");
    NoGradGuard guard;
    const std::vector<uint8_t> no_flip(samples.size(), 0);
    int64_t tp = 0, tn = 0, fp = 0, fn = 0;
    const int batch = 16;
    for (size_t start = 0; start < samples.size(); start += batch) {
        const size_t end = std::min(samples.size(), start + batch);
        std::vector<int> idx;
        for (size_t i = start; i < end; ++i) idx.push_back(static_cast<int>(i));
        Tensor hf = stack_view(samples, idx, 0, no_flip, no_flip);
        Tensor rgb = stack_view(samples, idx, 1, no_flip, no_flip);
        Tensor hfr = stack_view(samples, idx, 2, no_flip, no_flip);
        Tensor probs = params.forward(hf, rgb, hfr, false);
        const double* p = probs.data();
        for (size_t b = 0; b < idx.size(); ++b) {
            const bool pred_cg = p[2 * b + 1] > p[2 * b];
            const bool is_cg = samples[idx[b]].label == 1;
            if (is_cg)
                pred_cg ? ++tp : ++fn;
            else
                pred_cg ? ++fp : ++tn;
        }
    }
    Metrics m;
    m.acc = static_cast<double>(tp + tn) / static_cast<double>(samples.size());
    if (tp + fn > 0) m.tpr = static_cast<double>(tp) / static_cast<double>(tp + fn);
    if (tn + fp > 0) m.tnr = static_cast<double>(tn) / static_cast<double>(tn + fp);
    return m;
}

void save_history_csv(const std::vector<EpochStats>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write history: " + path);
    out << "epoch,train_loss,val_loss,train_acc,val_acc\n";
    out.precision(10);
    for (const auto& h : history)
        out << h.epoch << ',' << h.train_loss << ',' << h.val_loss << ',' << h.train_acc << ','
            << h.val_acc << '\n';
    if (!out) throw IoError("failed writing history: " + path);
}

}  // namespace cgtrace
