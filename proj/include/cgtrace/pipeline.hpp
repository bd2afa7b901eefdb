#pragma once

// Experiment orchestration: builds the three detector input views
// (high-pass residual, RGB, high-pass of the re-rendered image) from a
// manifest, trains/evaluates the detector, runs the postprocessing
// robustness grid, and persists combined renderer+detector checkpoints.

#include <string>
#include <vector>

#include "cgtrace/checkpoint.hpp"
#include "cgtrace/config.hpp"
#include "cgtrace/detector.hpp"
#include "cgtrace/image.hpp"
#include "cgtrace/manifest.hpp"
#include "cgtrace/renderer.hpp"

namespace cgtrace {

// Renderer + config bundle used to turn one image into the three views.
struct PipelineContext {
    RunConfig cfg;
    RendererParams renderer;

    explicit PipelineContext(const RunConfig& config);
};

TrainSample preprocess_sample(const Image& img, int label, const PipelineContext& ctx);
std::vector<TrainSample> preprocess_split(const DatasetManifest& manifest, Split split,
                                          const PipelineContext& ctx);

struct TrainOutcome {
    std::vector<EpochStats> history;
    Metrics val_metrics;
};

// Trains the detector on the manifest's train/val splits. Views may be
// passed in pre-built (cache reuse); pass nullptr to build them here.
TrainOutcome train_pipeline(PipelineContext& ctx, DetectorParams& detector,
                            const std::vector<TrainSample>* train_views,
                            const std::vector<TrainSample>* val_views,
                            const DatasetManifest* manifest);

// Checkpoint plumbing: one file carries renderer + detector + config.
ModelCheckpoint make_checkpoint(PipelineContext& ctx, DetectorParams& detector,
                                const Metrics& metrics);
// Rebuilds context + detector from a checkpoint (architecture from the
// config snapshot; throws on shape mismatch naming the offending tensor).
struct LoadedModel {
    PipelineContext ctx;
    DetectorParams detector;

    explicit LoadedModel(const ModelCheckpoint& ckpt);
};

Metrics evaluate_split(LoadedModel& model, const DatasetManifest& manifest, Split split);

struct RobustnessRow {
    std::string attack;  // "none" baseline first
    Metrics metrics;
};

// Applies each attack to the CG test images in memory (PG untouched),
// re-evaluates, and prepends the clean baseline row.
std::vector<RobustnessRow> robustness_suite(LoadedModel& model, const DatasetManifest& manifest,
                                            const std::vector<Attack>& grid);

struct CrossEvalResult {
    Metrics metrics;
    std::vector<std::string> overlap_warnings;  // shared paths between manifests
};

CrossEvalResult cross_eval(LoadedModel& model, const DatasetManifest& train_manifest,
                           const DatasetManifest& test_manifest);

std::string metrics_csv_row(const std::string& attack, const Metrics& m);

Image apply_attack(const Image& img, const Attack& attack, std::mt19937_64& rng);

}  // namespace cgtrace
