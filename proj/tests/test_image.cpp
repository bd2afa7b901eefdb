#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <random>

#include "cgtrace/errors.hpp"
#include "cgtrace/image.hpp"
#include "cgtrace/imageops.hpp"
#include "cgtrace/jpegcodec.hpp"

using namespace cgtrace;
namespace fs = std::filesystem;

namespace {

Image random_image(int h, int w, int c, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Image img(h, w, c);
    for (auto& v : img.pixels) v = unit(rng);
    return img;
}

// Quantize to the 8-bit grid the writers use, so disk round trips compare equal.
Image quantized8(Image img) {
    for (auto& v : img.pixels) v = std::round(v * 255.0) / 255.0;
    return img;
}

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("cgtrace_img_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("PNG, PPM and PGM files round-trip 8-bit pixel data") {
    TempDir tmp;
    Image rgb = quantized8(random_image(13, 17, 3, 10));
    Image gray = quantized8(random_image(9, 7, 1, 11));

    for (const char* name : {"a.png", "a.ppm"}) {
        const std::string p = (tmp.path / name).string();
        save_image(rgb, p);
        Image back = load_image(p);
        REQUIRE(back.height == rgb.height);
        REQUIRE(back.width == rgb.width);
        REQUIRE(back.channels == 3);
        for (size_t i = 0; i < rgb.pixels.size(); ++i)
            CHECK(back.pixels[i] == doctest::Approx(rgb.pixels[i]).epsilon(1e-12));
    }
    for (const char* name : {"g.png", "g.pgm"}) {
        const std::string p = (tmp.path / name).string();
        save_image(gray, p);
        Image back = load_image(p);
        REQUIRE(back.channels == 1);
        for (size_t i = 0; i < gray.pixels.size(); ++i)
            CHECK(back.pixels[i] == doctest::Approx(gray.pixels[i]).epsilon(1e-12));
    }
}

TEST_CASE("loading a missing file and unknown extensions raise IoError") {
    CHECK_THROWS_AS(load_image("/nonexistent/nope.png"), IoError);
    Image img(4, 4, 3);
    CHECK_THROWS_AS(save_image(img, "/tmp/cgtrace_bad.tiff"), IoError);
}

TEST_CASE("quality-factor scaling follows the IJG rule") {
    using namespace jpegcodec;
    auto at50 = scale_quant_table(kStdLuminanceQuant, 50);
    for (int i = 0; i < 64; ++i) CHECK(at50[i] == kStdLuminanceQuant[i]);

    auto at100 = scale_quant_table(kStdLuminanceQuant, 100);
    for (int i = 0; i < 64; ++i) CHECK(at100[i] == 1);

    // qf=25 -> scale 200: every entry doubled (then rounded/clamped).
    auto at25 = scale_quant_table(kStdLuminanceQuant, 25);
    for (int i = 0; i < 64; ++i) {
        const int expect = std::clamp((kStdLuminanceQuant[i] * 200 + 50) / 100, 1, 255);
        CHECK(at25[i] == expect);
    }
}

TEST_CASE("8x8 DCT pair is an orthonormal round trip") {
    using namespace jpegcodec;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> unit(-128.0, 127.0);
    Block in{}, freq{}, back{};
    for (auto& v : in) v = unit(rng);
    dct8x8(in, freq);
    idct8x8(freq, back);
    for (int i = 0; i < 64; ++i) CHECK(back[i] == doctest::Approx(in[i]).epsilon(1e-9));

    // Parseval: energy preserved by the orthonormal transform.
    double e_in = 0, e_freq = 0;
    for (int i = 0; i < 64; ++i) {
        e_in += in[i] * in[i];
        e_freq += freq[i] * freq[i];
    }
    CHECK(e_freq == doctest::Approx(e_in).epsilon(1e-9));
}

TEST_CASE("quantization with an all-ones table only rounds coefficients") {
    using namespace jpegcodec;
    std::array<int, 64> ones{};
    ones.fill(1);
    Block in{}, freq{}, expect{};
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> unit(-100.0, 100.0);
    for (auto& v : in) v = unit(rng);
    dct8x8(in, freq);
    Block rounded = freq;
    for (auto& v : rounded) v = std::round(v);
    idct8x8(rounded, expect);

    Block got = quant_round_trip(in, ones);
    for (int i = 0; i < 64; ++i) CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-9));
}

TEST_CASE("jpeg_recompress at high quality stays close; low quality degrades") {
    Image img = random_image(32, 32, 3, 14);
    Image q95 = jpeg_recompress(img, 95);
    Image q10 = jpeg_recompress(img, 10);
    REQUIRE(q95.height == 32);
    CHECK(psnr(img, q95) > psnr(img, q10));
    CHECK(q95.provenance == Provenance::attacked);
    CHECK_THROWS_AS(jpeg_recompress(img, 0), InputError);
    CHECK_THROWS_AS(jpeg_recompress(img, 101), InputError);
}

TEST_CASE("rescale is identity at the same size and preserves constants") {
    Image img = random_image(20, 24, 3, 15);
    Image same = rescale(img, 20, 24);
    for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(same.pixels[i] == img.pixels[i]);

    Image flat(10, 10, 1, 0.6);
    Image up = rescale(flat, 23, 31);
    REQUIRE(up.height == 23);
    REQUIRE(up.width == 31);
    for (double v : up.pixels) CHECK(v == doctest::Approx(0.6).epsilon(1e-12));

    CHECK_THROWS_AS(rescale(img, 0, 10), InputError);
}

TEST_CASE("flips are involutive and move known pixels correctly") {
    Image img = random_image(6, 5, 3, 16);
    Image h = flip_horizontal(img);
    CHECK(h.at(2, 0, 1) == img.at(2, 4, 1));
    Image hh = flip_horizontal(h);
    for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(hh.pixels[i] == img.pixels[i]);

    Image v = flip_vertical(img);
    CHECK(v.at(0, 3, 2) == img.at(5, 3, 2));
    Image vv = flip_vertical(v);
    for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(vv.pixels[i] == img.pixels[i]);

    std::mt19937_64 rng(7);
    Image never = augment_flip(img, 0.0, 0.0, rng);
    for (size_t i = 0; i < img.pixels.size(); ++i) CHECK(never.pixels[i] == img.pixels[i]);
    Image always = augment_flip(img, 1.0, 1.0, rng);
    CHECK(always.at(0, 0, 0) == img.at(5, 4, 0));
}

TEST_CASE("noise attacks validate their levels and stay in range") {
    Image img = random_image(16, 16, 3, 17);
    std::mt19937_64 rng(8);
    CHECK_THROWS_AS(add_gaussian_noise(img, -0.1, rng), InputError);
    CHECK_THROWS_AS(add_salt_pepper(img, 1.5, rng), InputError);

    Image g = add_gaussian_noise(img, 0.01, rng);
    for (double v : g.pixels) {
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
    Image sp = add_salt_pepper(img, 0.1, rng);
    int extreme = 0;
    for (double v : sp.pixels) extreme += (v == 0.0 || v == 1.0);
    CHECK(extreme > 0);
    CHECK(sp.provenance == Provenance::attacked);
}

TEST_CASE("psnr is infinite for identical images and finite otherwise") {
    Image img = random_image(8, 8, 1, 18);
    CHECK(std::isinf(psnr(img, img)));
    Image other = img;
    other.pixels[0] += 0.25;
    CHECK(std::isfinite(psnr(img, other)));
    Image mismatched(4, 4, 1);
    CHECK_THROWS_AS(psnr(img, mismatched), DimensionError);
}

TEST_CASE("gaussian_blur preserves constant images; sigma<=0 is a no-op") {
    Image flat(12, 12, 3, 0.4);
    Image out = gaussian_blur(flat, 1.5);
    for (double v : out.pixels) CHECK(v == doctest::Approx(0.4).epsilon(1e-12));
    Image same = gaussian_blur(flat, 0.0);
    for (size_t i = 0; i < flat.pixels.size(); ++i) CHECK(same.pixels[i] == flat.pixels[i]);
}

TEST_CASE("to_gray matches the luma weights") {
    Image img(1, 1, 3);
    img.at(0, 0, 0) = 1.0;
    img.at(0, 0, 1) = 0.5;
    img.at(0, 0, 2) = 0.25;
    Image g = to_gray(img);
    REQUIRE(g.channels == 1);
    CHECK(g.at(0, 0, 0) == doctest::Approx(0.299 + 0.587 * 0.5 + 0.114 * 0.25).epsilon(1e-12));
}
