#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <random>

#include "cgtrace/acquisition.hpp"
#include "cgtrace/errors.hpp"
#include "cgtrace/glcm.hpp"
#include "cgtrace/jpegcodec.hpp"

using namespace cgtrace;
namespace fs = std::filesystem;

TEST_CASE("bilinear demosaic kernel is valid and normalized") {
    DemosaicKernel k = DemosaicKernel::bilinear();
    k.validate();
    double sum = 0.0;
    for (double w : k.weights) sum += w;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-12));

    DemosaicKernel bad = k;
    bad.weights[0] += 0.5;
    CHECK_THROWS_AS(bad.validate(), InputError);
    bad = k;
    bad.weights.pop_back();
    CHECK_THROWS_AS(bad.validate(), InputError);
}

TEST_CASE("bayer_sample keeps exactly one channel per RGGB site") {
    Image rgb(4, 4, 3, 0.5);
    Image mosaic = bayer_sample(rgb);
    // R at even-even, G at even-odd and odd-even, B at odd-odd.
    CHECK(mosaic.at(0, 0, 0) == 0.5);
    CHECK(mosaic.at(0, 0, 1) == 0.0);
    CHECK(mosaic.at(0, 0, 2) == 0.0);
    CHECK(mosaic.at(0, 1, 1) == 0.5);
    CHECK(mosaic.at(1, 0, 1) == 0.5);
    CHECK(mosaic.at(1, 1, 2) == 0.5);
    CHECK(mosaic.at(1, 1, 0) == 0.0);
    Image gray(4, 4, 1, 0.5);
    CHECK_THROWS_AS(bayer_sample(gray), InputError);
}

TEST_CASE("demosaic reconstructs a constant image exactly") {
    Image rgb(8, 8, 3, 0.25);
    Image mosaic = bayer_sample(rgb);
    Image out = demosaic(mosaic, DemosaicKernel::bilinear());
    for (double v : out.pixels) CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("demosaic rejects inputs that are not RGGB mosaics") {
    Image full(8, 8, 3, 0.3);  // every channel populated everywhere
    CHECK_THROWS_AS(demosaic(full, DemosaicKernel::bilinear()), InputError);
}

TEST_CASE("median filter removes isolated impulses and keeps constants") {
    Image img(5, 5, 1, 0.5);
    img.at(2, 2, 0) = 1.0;
    Image out = median_filter3x3(img);
    CHECK(out.at(2, 2, 0) == 0.5);
    for (double v : out.pixels) CHECK(v == 0.5);
}

TEST_CASE("pattern trace of constant images is zero; shapes must agree") {
    std::vector<Image> imgs(3, Image(8, 8, 1, 0.5));
    TraceReport r = pattern_trace(imgs);
    CHECK(r.kind == TraceKind::pattern);
    CHECK(r.summary == doctest::Approx(0.0));
    for (double v : r.map) CHECK(v == doctest::Approx(0.0));

    CHECK_THROWS_AS(pattern_trace({}), InputError);
    imgs.push_back(Image(4, 4, 1, 0.5));
    CHECK_THROWS_AS(pattern_trace(imgs), InputError);
}

TEST_CASE("compression trace is zero for the zero block and for exact multiples") {
    QuantTable q = QuantTable::from_quality(75);
    std::array<double, 64> zero{};
    auto tr = compression_trace(zero, q);
    for (double v : tr) CHECK(v == doctest::Approx(0.0).epsilon(1e-9));

    // Quantization indices chosen so the decoded block is integer-valued and
    // inside [0,255]: DC index 4 with q0=8 decodes to the constant 4.
    std::array<double, 64> grid{};
    grid[0] = 4.0;
    auto tr2 = compression_trace(grid, q);
    double mag = 0.0;
    for (double v : tr2) mag = std::max(mag, std::abs(v));
    CHECK(mag < 1e-9);
}

TEST_CASE("quantization table validates the quality factor") {
    CHECK_THROWS_AS(QuantTable::from_quality(0), InputError);
    CHECK_THROWS_AS(QuantTable::from_quality(101), InputError);
    CHECK(QuantTable::from_quality(50).values ==
          std::array<int, 64>(jpegcodec::kStdLuminanceQuant));
}

TEST_CASE("rendering trace is zero under an identity renderer") {
    Image img(8, 8, 3, 0.4);
    SegMap seg;
    seg.height = 8;
    seg.width = 8;
    seg.num_classes = 1;
    seg.labels.assign(64, 0);
    TraceReport r = rendering_trace(img, seg, [](const Image& i, const SegMap&) { return i; });
    CHECK(r.summary == doctest::Approx(0.0));
    REQUIRE(r.region_means.size() == 1);
    CHECK(r.region_means[0] == doctest::Approx(0.0));
}

TEST_CASE("rendering trace aggregates per region") {
    Image img(2, 2, 1);
    img.at(0, 0, 0) = 0.5;
    img.at(0, 1, 0) = 0.5;
    img.at(1, 0, 0) = 0.9;
    img.at(1, 1, 0) = 0.7;
    SegMap seg;
    seg.height = 2;
    seg.width = 2;
    seg.num_classes = 2;
    seg.labels = {0, 0, 1, 1};
    // Renderer returns all 0.5: residuals are 0,0 in region 0 and 0.4,0.2 in 1.
    TraceReport r = rendering_trace(img, seg, [](const Image& i, const SegMap&) {
        Image out = i;
        for (auto& v : out.pixels) v = 0.5;
        return out;
    });
    REQUIRE(r.region_means.size() == 2);
    CHECK(r.region_means[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(r.region_means[1] == doctest::Approx(0.3).epsilon(1e-12));

    SegMap wrong = seg;
    wrong.width = 3;
    CHECK_THROWS_AS(rendering_trace(img, wrong, [](const Image& i, const SegMap&) { return i; }),
                    InputError);
}

TEST_CASE("synthetic generators are deterministic per seed and tag provenance") {
    std::mt19937_64 a(42), b(42), c(43);
    Image p1 = synth_pg(a, 64);
    Image p2 = synth_pg(b, 64);
    CHECK(p1.pixels == p2.pixels);
    CHECK(p1.provenance == Provenance::synthetic_pg);
    Image p3 = synth_pg(c, 64);
    CHECK(p1.pixels != p3.pixels);

    std::mt19937_64 d(42);
    Image cg = synth_cg(d, 64);
    CHECK(cg.provenance == Provenance::synthetic_cg);
    CHECK(cg.height == 64);
    CHECK(cg.channels == 3);
}

TEST_CASE("synthetic CG images are smoother than PG images on average") {
    std::mt19937_64 rng(7);
    double hom_pg = 0.0, hom_cg = 0.0;
    const int n = 6;
    for (int i = 0; i < n; ++i) {
        hom_pg += homogeneity(compute_glcm(synth_pg(rng, 64), 8, 0, 1));
        hom_cg += homogeneity(compute_glcm(synth_cg(rng, 64), 8, 0, 1));
    }
    CHECK(hom_cg / n > hom_pg / n);
}

TEST_CASE("build_dataset writes images plus a balanced manifest") {
    const fs::path dir = fs::temp_directory_path() / "cgtrace_acq_ds";
    fs::remove_all(dir);
    std::mt19937_64 rng(11);
    DatasetManifest m = build_dataset(12, dir.string(), rng, 32);
    CHECK(m.records.size() == 24);

    int cg = 0, pg = 0;
    for (const auto& rec : m.records) (rec.label == 1 ? cg : pg)++;
    CHECK(cg == 12);
    CHECK(pg == 12);

    const auto val = m.split_records(Split::val);
    const auto test = m.split_records(Split::test);
    const auto train = m.split_records(Split::train);
    CHECK(val.size() == test.size());
    CHECK(train.size() + val.size() + test.size() == 24);
    CHECK(!val.empty());
    for (const auto& rec : m.records) CHECK(fs::exists(m.resolve(rec)));
    CHECK(fs::exists(dir / "manifest.csv"));

    DatasetManifest loaded = load_manifest((dir / "manifest.csv").string());
    CHECK(loaded.records.size() == 24);

    std::mt19937_64 rng2(12);
    CHECK_THROWS_AS(build_dataset(11, dir.string(), rng2, 32), InputError);
    fs::remove_all(dir);
}
