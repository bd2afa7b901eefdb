#include "cgtrace/pipeline.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "cgtrace/bridge.hpp"
#include "cgtrace/errors.hpp"
#include "cgtrace/imageops.hpp"
#include "cgtrace/segmentation.hpp"

namespace cgtrace {

namespace {

// The renderer and per-image segmentation use seeds derived from the run
// seed but fixed across train/eval, so a checkpointed model sees the same
// views at evaluation time that it saw in training.
constexpr uint64_t kRendererSeedSalt = 0x72656e646572ULL;   // "render"
constexpr uint64_t kSegmentSeedSalt = 0x7365676d656eULL;    // "segmen"
constexpr uint64_t kAttackSeedSalt = 0x61747461636bULL;     // "attack"

Tensor drop_batch_dim(const Tensor& t) {
    return reshape(t, {t.dim(1), t.dim(2), t.dim(3)});
}

Image load_record(const DatasetManifest& manifest, const ManifestRecord& rec, int image_size) {
    Image img = load_image(manifest.resolve(rec));
    if (img.channels == 1) {
        Image rgb(img.height, img.width, 3);
        for (int y = 0; y < img.height; ++y)
            for (int x = 0; x < img.width; ++x)
                for (int c = 0; c < 3; ++c) rgb.at(y, x, c) = img.at(y, x, 0);
        img = rgb;
    }
    if (img.height != image_size || img.width != image_size)
        img = rescale(img, image_size, image_size);
    return img;
}

}  // namespace

PipelineContext::PipelineContext(const RunConfig& config)
    : cfg(config), renderer(config.segment_k) {
    cfg.validate();
    std::mt19937_64 rng(cfg.seed ^ kRendererSeedSalt);
    renderer.init(rng, /*identity_start=*/false);
}

TrainSample preprocess_sample(const Image& img, int label, const PipelineContext& ctx) {
    NoGradGuard guard;
    std::mt19937_64 seg_rng(ctx.cfg.seed ^ kSegmentSeedSalt);
    const SegMap seg = segment_simple(img, ctx.cfg.segment_k, seg_rng);
    const Image rendered = render(img, seg, ctx.renderer);
    const Image hf_orig = high_pass(img, ctx.cfg.cutoff);
    const Image hf_rend = high_pass(rendered, ctx.cfg.cutoff);

    TrainSample s;
    s.hf_original = drop_batch_dim(image_to_tensor(hf_orig));
    s.rgb = drop_batch_dim(image_to_tensor(img));
    s.hf_rendered = drop_batch_dim(image_to_tensor(hf_rend));
    s.label = label;
    return s;
}

std::vector<TrainSample> preprocess_split(const DatasetManifest& manifest, Split split,
                                          const PipelineContext& ctx) {
    const auto records = manifest.split_records(split);
    if (records.empty())
        throw InputError("preprocess: manifest has no '" + split_name(split) + "' records");
    std::vector<TrainSample> out(records.size());
    for (size_t i = 0; i < records.size(); ++i) {
        const Image img = load_record(manifest, records[i], ctx.cfg.image_size);
        out[i] = preprocess_sample(img, records[i].label, ctx);
    }
    return out;
}

TrainOutcome train_pipeline(PipelineContext& ctx, DetectorParams& detector,
                            const std::vector<TrainSample>* train_views,
                            const std::vector<TrainSample>* val_views,
                            const DatasetManifest* manifest) {
    std::vector<TrainSample> train_built, val_built;
    if (!train_views || !val_views) {
        if (!manifest) throw InputError("train_pipeline: need a manifest or prebuilt views");
        if (!train_views) {
            train_built = preprocess_split(*manifest, Split::train, ctx);
            train_views = &train_built;
        }
        if (!val_views) {
            val_built = preprocess_split(*manifest, Split::val, ctx);
            val_views = &val_built;
        }
    }

    TrainHyper hyper;
    hyper.lr = ctx.cfg.lr;
    hyper.batch_size = ctx.cfg.batch_size;
    hyper.max_epochs = ctx.cfg.max_epochs;
    hyper.flip_p = ctx.cfg.flip_p;
    hyper.early_stop_patience = ctx.cfg.early_stop_patience;

    std::mt19937_64 rng(ctx.cfg.seed);
    TrainOutcome outcome;
    outcome.history = train_detector(detector, *train_views, *val_views, hyper, rng);
    outcome.val_metrics = evaluate_detector(detector, *val_views);
    return outcome;
}

ModelCheckpoint make_checkpoint(PipelineContext& ctx, DetectorParams& detector,
                                const Metrics& metrics) {
    ModelCheckpoint ckpt;
    ckpt.seed = ctx.cfg.seed;
    ckpt.config_text = ctx.cfg.serialize();
    if (metrics.acc) ckpt.metrics.emplace_back("acc", *metrics.acc);
    if (metrics.tpr) ckpt.metrics.emplace_back("tpr", *metrics.tpr);
    if (metrics.tnr) ckpt.metrics.emplace_back("tnr", *metrics.tnr);
    detector.visit([&ckpt](const std::string& name, Tensor& t) { ckpt.add_tensor(name, t); });
    detector.visit_buffers(
        [&ckpt](const std::string& name, std::vector<double>& v) { ckpt.add_buffer(name, v); });
    ctx.renderer.visit([&ckpt](const std::string& name, Tensor& t) { ckpt.add_tensor(name, t); });
    return ckpt;
}

LoadedModel::LoadedModel(const ModelCheckpoint& ckpt)
    : ctx(RunConfig::parse(ckpt.config_text)),
      detector(AttentionConfig{}, ablation_mode_from_string(
                                      RunConfig::parse(ckpt.config_text).ablation)) {
    detector.set_attention_mode(attention_mode_from_string(ctx.cfg.attention));
    detector.visit([&ckpt](const std::string& name, Tensor& t) { ckpt.load_into(name, t); });
    detector.visit_buffers(
        [&ckpt](const std::string& name, std::vector<double>& v) { ckpt.load_into(name, v); });
    ctx.renderer.visit([&ckpt](const std::string& name, Tensor& t) { ckpt.load_into(name, t); });
}

Metrics evaluate_split(LoadedModel& model, const DatasetManifest& manifest, Split split) {
    const auto samples = preprocess_split(manifest, split, model.ctx);
    return evaluate_detector(model.detector, samples);
}

Image apply_attack(const Image& img, const Attack& attack, std::mt19937_64& rng) {
    switch (attack.kind) {
        case Attack::Kind::none: return img;
        case Attack::Kind::jpeg: return jpeg_recompress(img, static_cast<int>(attack.level));
        case Attack::Kind::gauss: return add_gaussian_noise(img, attack.level, rng);
        case Attack::Kind::salt_pepper: return add_salt_pepper(img, attack.level, rng);
    }
    throw UsageError("apply_attack: unknown attack kind");
}

std::vector<RobustnessRow> robustness_suite(LoadedModel& model, const DatasetManifest& manifest,
                                            const std::vector<Attack>& grid) {
    const auto records = manifest.split_records(Split::test);
    if (records.empty()) throw InputError("robustness: manifest has no test records");

    std::vector<Image> images;
    images.reserve(records.size());
    for (const auto& rec : records)
        images.push_back(load_record(manifest, rec, model.ctx.cfg.image_size));

    std::vector<RobustnessRow> rows;
    Attack baseline;  // Kind::none
    std::vector<Attack> all;
    all.push_back(baseline);
    all.insert(all.end(), grid.begin(), grid.end());

    for (const Attack& attack : all) {
        // fresh, attack-independent noise stream per row for reproducibility
        std::mt19937_64 rng(model.ctx.cfg.seed ^ kAttackSeedSalt);
        std::vector<TrainSample> samples;
        samples.reserve(records.size());
        for (size_t i = 0; i < records.size(); ++i) {
            Image img = images[i];
            if (records[i].label == 1 && attack.kind != Attack::Kind::none) {
                img = apply_attack(img, attack, rng);
                img.provenance = Provenance::attacked;
            }
            samples.push_back(preprocess_sample(img, records[i].label, model.ctx));
        }
        rows.push_back({attack.name(), evaluate_detector(model.detector, samples)});
    }
    return rows;
}

CrossEvalResult cross_eval(LoadedModel& model, const DatasetManifest& train_manifest,
                           const DatasetManifest& test_manifest) {
    CrossEvalResult result;
    std::set<std::string> train_paths;
    for (const auto& rec : train_manifest.records) train_paths.insert(train_manifest.resolve(rec));
    for (const auto& rec : test_manifest.records) {
        const std::string p = test_manifest.resolve(rec);
        if (train_paths.count(p))
            result.overlap_warnings.push_back("overlapping file between manifests: " + p);
    }
    result.metrics = evaluate_split(model, test_manifest, Split::test);
    return result;
}

std::string metrics_csv_row(const std::string& attack, const Metrics& m) {
    std::ostringstream out;
    out.precision(10);
    auto cell = [&out](const std::optional<double>& v) {
        out << ',';
        if (v)
            out << *v;
        else
            out << "NA";
    };
    out << attack;
    cell(m.acc);
    cell(m.tpr);
    cell(m.tnr);
    return out.str();
}

}  // namespace cgtrace
