// cgtrace: CG-vs-PG forensics toolkit command line.

#include <omp.h>

#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "cgtrace/acquisition.hpp"
#include "cgtrace/bridge.hpp"
#include "cgtrace/checkpoint.hpp"
#include "cgtrace/config.hpp"
#include "cgtrace/errors.hpp"
#include "cgtrace/glcm.hpp"
#include "cgtrace/imageops.hpp"
#include "cgtrace/jpegcodec.hpp"
#include "cgtrace/pipeline.hpp"
#include "cgtrace/renderer.hpp"
#include "cgtrace/segmentation.hpp"

namespace {

using namespace cgtrace;

void apply_thread_cap() {
    if (const char* env = std::getenv("CGTRACE_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) omp_set_num_threads(n);
    }
}

struct CommonOverrides {
    std::string config_path;
    RunConfig load(CLI::App* cmd, uint64_t seed, bool seed_given) const {
        RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
        if (seed_given) cfg.seed = seed;
        (void)cmd;
        return cfg;
    }
};

RendererParams make_renderer_from_checkpoint(const std::string& path, RunConfig& cfg) {
    const ModelCheckpoint ckpt = load_checkpoint(path);
    cfg = RunConfig::parse(ckpt.config_text);
    RendererParams renderer(cfg.segment_k);
    renderer.visit([&ckpt](const std::string& name, Tensor& t) { ckpt.load_into(name, t); });
    return renderer;
}

int run(int argc, char** argv) {
    CLI::App app{"CG-vs-PG image forensics toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // allow --seed after the subcommand name

    uint64_t seed = 42;
    bool seed_given = false;
    app.add_option("--seed", seed, "global RNG seed")
        ->each([&seed_given](const std::string&) { seed_given = true; });

    // ---- synth ---------------------------------------------------------
    auto* synth = app.add_subcommand("synth", "build a synthetic PG/CG dataset");
    std::string synth_out = "dataset";
    int synth_n = 400, synth_size = 256;
    synth->add_option("--out", synth_out, "output directory");
    synth->add_option("--n", synth_n, "images per class (>= 12)");
    synth->add_option("--size", synth_size, "image side length");

    // ---- segment -------------------------------------------------------
    auto* segment = app.add_subcommand("segment", "k-means segmentation map");
    std::string seg_in, seg_out = "segmap.png";
    int seg_k = 8;
    segment->add_option("--input", seg_in, "input image")->required();
    segment->add_option("--out", seg_out, "output segmentation map (png)");
    segment->add_option("--k", seg_k, "number of regions");

    // ---- render-train ---------------------------------------------------
    auto* rtrain = app.add_subcommand("render-train", "adversarially train the texture renderer");
    std::string rt_manifest, rt_out = "renderer.ckpt", rt_config;
    int rt_steps = 100;
    rtrain->add_option("--manifest", rt_manifest, "dataset manifest")->required();
    rtrain->add_option("--out", rt_out, "output checkpoint");
    rtrain->add_option("--steps", rt_steps, "training steps");
    rtrain->add_option("--config", rt_config, "run config file");

    // ---- render ---------------------------------------------------------
    auto* render_cmd = app.add_subcommand("render", "re-render an image through the texture renderer");
    std::string rd_in, rd_out = "rendered.png", rd_ckpt;
    int rd_k = 8;
    render_cmd->add_option("--input", rd_in, "input image")->required();
    render_cmd->add_option("--out", rd_out, "output image");
    render_cmd->add_option("--checkpoint", rd_ckpt, "renderer checkpoint (default: seeded init)");
    render_cmd->add_option("--k", rd_k, "segmentation regions");

    // ---- glcm -----------------------------------------------------------
    auto* glcm_cmd = app.add_subcommand("glcm", "GLCM homogeneity/ASM diagnostics");
    std::string gl_in, gl_map;
    int gl_levels = 8, gl_dx = 1, gl_dy = 0, gl_window = 16;
    glcm_cmd->add_option("--input", gl_in, "input image")->required();
    glcm_cmd->add_option("--levels", gl_levels, "gray levels");
    glcm_cmd->add_option("--dx", gl_dx, "offset x");
    glcm_cmd->add_option("--dy", gl_dy, "offset y");
    glcm_cmd->add_option("--feature-map", gl_map, "write sliding-window homogeneity map (png)");
    glcm_cmd->add_option("--window", gl_window, "sliding window size");

    // ---- traces ---------------------------------------------------------
    auto* traces = app.add_subcommand("traces", "acquisition trace diagnostics");
    std::vector<std::string> tr_inputs;
    std::string tr_kind = "pattern";
    int tr_qf = 75, tr_k = 8;
    traces->add_option("--kind", tr_kind, "pattern | compression | rendering");
    traces->add_option("--input", tr_inputs, "input image(s)")->required();
    traces->add_option("--qf", tr_qf, "quality factor (compression trace)");
    traces->add_option("--k", tr_k, "segmentation regions (rendering trace)");

    // ---- filter ---------------------------------------------------------
    auto* filter = app.add_subcommand("filter", "ideal FFT high-pass residual");
    std::string fl_in, fl_out = "highpass.png";
    double fl_cutoff = 30.0;
    filter->add_option("--input", fl_in, "input image")->required();
    filter->add_option("--out", fl_out, "output image");
    filter->add_option("--cutoff", fl_cutoff, "cutoff radius");

    // ---- train ----------------------------------------------------------
    auto* train_cmd = app.add_subcommand("train", "train the three-branch detector");
    std::string tn_manifest, tn_out = "model.ckpt", tn_history, tn_config, tn_renderer;
    train_cmd->add_option("--manifest", tn_manifest, "dataset manifest")->required();
    train_cmd->add_option("--out", tn_out, "output checkpoint");
    train_cmd->add_option("--history", tn_history, "training history CSV");
    train_cmd->add_option("--config", tn_config, "run config file");
    train_cmd->add_option("--renderer", tn_renderer, "renderer checkpoint to reuse");

    // ---- eval / robustness / cross-eval ---------------------------------
    auto* eval_cmd = app.add_subcommand("eval", "evaluate a checkpoint on a split");
    std::string ev_manifest, ev_ckpt, ev_split = "test";
    eval_cmd->add_option("--manifest", ev_manifest, "dataset manifest")->required();
    eval_cmd->add_option("--checkpoint", ev_ckpt, "model checkpoint")->required();
    eval_cmd->add_option("--split", ev_split, "train | val | test");

    auto* robust = app.add_subcommand("robustness", "postprocessing robustness grid");
    std::string rb_manifest, rb_ckpt, rb_grid;
    robust->add_option("--manifest", rb_manifest, "dataset manifest")->required();
    robust->add_option("--checkpoint", rb_ckpt, "model checkpoint")->required();
    robust->add_option("--grid", rb_grid, "attack grid override (kind:level,...)");

    auto* cross = app.add_subcommand("cross-eval", "evaluate across datasets");
    std::string cx_train, cx_test, cx_ckpt;
    cross->add_option("--train-manifest", cx_train, "manifest the model was trained on")->required();
    cross->add_option("--test-manifest", cx_test, "manifest to evaluate")->required();
    cross->add_option("--checkpoint", cx_ckpt, "model checkpoint")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;  // unknown subcommand/flag or missing required option
    }
    apply_thread_cap();

    if (*synth) {
        if (synth_n < 12) throw UsageError("synth: --n must be >= 12");
        if (synth_size < 16) throw UsageError("synth: --size must be >= 16");
        std::mt19937_64 rng(seed);
        const DatasetManifest m = build_dataset(synth_n, synth_out, rng, synth_size);
        std::cout << "wrote " << m.records.size() << " images + manifest to " << synth_out << "\n";
        return 0;
    }

    if (*segment) {
        const Image img = load_image(seg_in);
        std::mt19937_64 rng(seed);
        save_segmap(segment_simple(img, seg_k, rng), seg_out);
        std::cout << "wrote " << seg_out << "\n";
        return 0;
    }

    if (*rtrain) {
        RunConfig cfg = rt_config.empty() ? RunConfig{} : RunConfig::load(rt_config);
        if (seed_given) cfg.seed = seed;
        PipelineContext ctx(cfg);
        Discriminator disc;
        std::mt19937_64 rng(cfg.seed);
        disc.init(rng);

        const DatasetManifest manifest = load_manifest(rt_manifest);
        std::vector<Image> images;
        std::vector<SegMap> segs;
        for (const auto& rec : manifest.split_records(Split::train)) {
            Image img = load_image(manifest.resolve(rec));
            if (img.height != cfg.image_size || img.width != cfg.image_size)
                img = rescale(img, cfg.image_size, cfg.image_size);
            std::mt19937_64 seg_rng(cfg.seed);
            segs.push_back(segment_simple(img, cfg.segment_k, seg_rng));
            images.push_back(std::move(img));
        }
        AdversarialOptions opts;
        opts.steps = rt_steps;
        opts.lr = cfg.lr;
        opts.lambda_l1 = cfg.lambda_l1;
        opts.alpha_adv = cfg.alpha_adv;
        const AdversarialHistory hist = adversarial_train(ctx.renderer, disc, images, segs, opts, rng);

        ModelCheckpoint ckpt;
        ckpt.seed = cfg.seed;
        ckpt.config_text = cfg.serialize();
        if (!hist.l1.empty()) ckpt.metrics.emplace_back("final_l1", hist.l1.back());
        ctx.renderer.visit([&ckpt](const std::string& n, Tensor& t) { ckpt.add_tensor(n, t); });
        save_checkpoint(ckpt, rt_out);
        std::cout << "renderer checkpoint written to " << rt_out << "\n";
        return 0;
    }

    if (*render_cmd) {
        Image img = load_image(rd_in);
        RunConfig cfg;
        cfg.seed = seed;
        cfg.segment_k = rd_k;
        cfg.image_size = img.width;
        RendererParams renderer(rd_k);
        if (!rd_ckpt.empty()) {
            renderer = make_renderer_from_checkpoint(rd_ckpt, cfg);
        } else {
            std::mt19937_64 rng(seed);
            renderer.init(rng);
        }
        std::mt19937_64 seg_rng(cfg.seed);
        const SegMap seg = segment_simple(img, cfg.segment_k, seg_rng);
        save_image(render(img, seg, renderer), rd_out);
        std::cout << "wrote " << rd_out << "\n";
        return 0;
    }

    if (*glcm_cmd) {
        const Image img = load_image(gl_in);
        const Glcm g = compute_glcm(img, gl_levels, gl_dy, gl_dx);
        std::cout << "homogeneity," << homogeneity(g) << "\n"
                  << "asm," << angular_second_moment(g) << "\n";
        if (!gl_map.empty()) {
            const Image fmap = feature_map(img, GlcmFeature::homogeneity, gl_window,
                                           gl_window / 2, gl_levels, true);
            save_image(fmap, gl_map);
            std::cout << "feature map written to " << gl_map << "\n";
        }
        return 0;
    }

    if (*traces) {
        if (tr_kind == "pattern") {
            std::vector<Image> imgs;
            for (const auto& p : tr_inputs) imgs.push_back(load_image(p));
            const TraceReport rep = pattern_trace(imgs);
            std::cout << "pattern_trace_summary," << rep.summary << "\n";
        } else if (tr_kind == "compression") {
            // trace of the first 8x8 luma block of the first input
            const Image img = load_image(tr_inputs.at(0));
            if (img.height < 8 || img.width < 8)
                throw InputError("compression trace: image smaller than one 8x8 block");
            const Image gray = to_gray(img);
            jpegcodec::Block block, coeffs;
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) block[y * 8 + x] = gray.at(y, x, 0) * 255.0;
            jpegcodec::dct8x8(block, coeffs);
            const QuantTable q = QuantTable::from_quality(tr_qf);
            std::array<double, 64> d{};
            for (int i = 0; i < 64; ++i) d[i] = std::round(coeffs[i] / q.values[i]);
            const auto trace = compression_trace(d, q);
            double s = 0.0;
            for (double v : trace) s += std::abs(v);
            std::cout << "compression_trace_summary," << s / 64.0 << "\n";
        } else if (tr_kind == "rendering") {
            const Image img = load_image(tr_inputs.at(0));
            RendererParams renderer(tr_k);
            std::mt19937_64 rng(seed);
            renderer.init(rng);
            std::mt19937_64 seg_rng(seed);
            const SegMap seg = segment_simple(img, tr_k, seg_rng);
            const TraceReport rep = rendering_trace(
                img, seg, [&renderer](const Image& im, const SegMap& sm) {
                    return render(im, sm, renderer);
                });
            std::cout << "rendering_trace_summary," << rep.summary << "\n";
            for (size_t r = 0; r < rep.region_means.size(); ++r)
                std::cout << "region" << r << "," << rep.region_means[r] << "\n";
        } else {
            throw UsageError("traces: unknown kind '" + tr_kind + "'");
        }
        return 0;
    }

    if (*filter) {
        save_image(high_pass(load_image(fl_in), fl_cutoff), fl_out);
        std::cout << "wrote " << fl_out << "\n";
        return 0;
    }

    if (*train_cmd) {
        RunConfig cfg = tn_config.empty() ? RunConfig{} : RunConfig::load(tn_config);
        if (seed_given) cfg.seed = seed;
        PipelineContext ctx(cfg);
        if (!tn_renderer.empty()) {
            const ModelCheckpoint rckpt = load_checkpoint(tn_renderer);
            ctx.renderer.visit(
                [&rckpt](const std::string& n, Tensor& t) { rckpt.load_into(n, t); });
        }
        const DatasetManifest manifest = load_manifest(tn_manifest);

        DetectorParams detector(AttentionConfig{}, ablation_mode_from_string(cfg.ablation));
        detector.set_attention_mode(attention_mode_from_string(cfg.attention));
        std::mt19937_64 init_rng(cfg.seed);
        detector.init(init_rng);

        const TrainOutcome outcome = train_pipeline(ctx, detector, nullptr, nullptr, &manifest);
        if (!tn_history.empty()) save_history_csv(outcome.history, tn_history);
        save_checkpoint(make_checkpoint(ctx, detector, outcome.val_metrics), tn_out);
        std::cout << "attack,acc,tpr,tnr\n"
                  << metrics_csv_row("val", outcome.val_metrics) << "\n";
        return 0;
    }

    if (*eval_cmd) {
        LoadedModel model(load_checkpoint(ev_ckpt));
        const Metrics m =
            evaluate_split(model, load_manifest(ev_manifest), split_from_name(ev_split));
        std::cout << "attack,acc,tpr,tnr\n" << metrics_csv_row("none", m) << "\n";
        return 0;
    }

    if (*robust) {
        LoadedModel model(load_checkpoint(rb_ckpt));
        const std::vector<Attack> grid =
            parse_attack_grid(rb_grid.empty() ? model.ctx.cfg.robustness_grid : rb_grid);
        const auto rows = robustness_suite(model, load_manifest(rb_manifest), grid);
        std::cout << "attack,acc,tpr,tnr\n";
        for (const auto& row : rows) std::cout << metrics_csv_row(row.attack, row.metrics) << "\n";
        return 0;
    }

    if (*cross) {
        LoadedModel model(load_checkpoint(cx_ckpt));
        const CrossEvalResult result =
            cross_eval(model, load_manifest(cx_train), load_manifest(cx_test));
        for (const auto& w : result.overlap_warnings) std::cerr << "warning: " << w << "\n";
        std::cout << "attack,acc,tpr,tnr\n"
                  << metrics_csv_row("cross", result.metrics) << "\n";
        return 0;
    }

    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const cgtrace::UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
