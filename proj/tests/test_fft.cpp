#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cgtrace/errors.hpp"
#include "cgtrace/fft.hpp"
#include "cgtrace/image.hpp"
#include "cgtrace/imageops.hpp"
#include "cgtrace/reference.hpp"

using namespace cgtrace;

TEST_CASE("fft1d matches a hand DFT and inverts exactly") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const int n = 16;
    std::vector<std::complex<double>> a(n);
    for (auto& v : a) v = {unit(rng), unit(rng)};

    std::vector<std::complex<double>> expect(n);
    for (int k = 0; k < n; ++k)
        for (int t = 0; t < n; ++t)
            expect[k] += a[t] * std::polar(1.0, -2.0 * M_PI * k * t / n);

    auto fwd = a;
    fft1d(fwd, false);
    for (int k = 0; k < n; ++k) CHECK(std::abs(fwd[k] - expect[k]) < 1e-10);

    auto back = fwd;
    fft1d(back, true);
    for (int k = 0; k < n; ++k) CHECK(std::abs(back[k] - a[k]) < 1e-12);
}

TEST_CASE("fft rejects non-power-of-two lengths") {
    std::vector<std::complex<double>> a(12);
    CHECK_THROWS_AS(fft1d(a, false), InputError);
    std::vector<double> plane(6 * 8);
    CHECK_THROWS_AS(fft2d(plane, 6, 8), InputError);
}

TEST_CASE("fft2d matches the naive O(N^4) DFT on 16x16") {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int H = 16, W = 16;
    std::vector<double> plane(H * W);
    for (auto& v : plane) v = unit(rng);

    auto fast = fft2d(plane, H, W);
    auto ref = reference::dft2d_naive(plane, H, W);
    for (size_t i = 0; i < fast.size(); ++i) CHECK(std::abs(fast[i] - ref[i]) < 1e-9);

    auto round = ifft2d_real(fast, H, W);
    for (int i = 0; i < H * W; ++i) CHECK(round[i] == doctest::Approx(plane[i]).epsilon(1e-12));
}

TEST_CASE("high-pass mask uses periodic frequency distance") {
    HighPassMask mask(16, 16, 3.0);
    CHECK_FALSE(mask.pass(0, 0));    // DC blocked
    CHECK_FALSE(mask.pass(3, 0));    // distance 3
    CHECK_FALSE(mask.pass(15, 0));   // periodic distance 1
    CHECK_FALSE(mask.pass(14, 15));  // sqrt(4+1) <= 3
    CHECK(mask.pass(8, 8));          // distance sqrt(128)
    CHECK(mask.pass(4, 0));          // distance 4
}

TEST_CASE("high_pass matches the naive DFT oracle on 16x16") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Image img(16, 16, 3);
    for (auto& v : img.pixels) v = unit(rng);

    const double cutoff = 4.0;
    Image hp = high_pass(img, cutoff);
    for (int c = 0; c < 3; ++c) {
        std::vector<double> plane(16 * 16);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) plane[y * 16 + x] = img.at(y, x, c);
        auto ref = reference::high_pass_naive(plane, 16, 16, cutoff);
        for (int y = 0; y < 16; ++y)
            for (int x = 0; x < 16; ++x) {
                const double expect = std::clamp(ref[y * 16 + x] + 0.5, 0.0, 1.0);
                CHECK(hp.at(y, x, c) == doctest::Approx(expect).epsilon(1e-9));
            }
    }
    CHECK(hp.provenance == Provenance::filtered);
}

TEST_CASE("high_pass of a constant image is flat 0.5") {
    Image img(16, 16, 1);
    for (auto& v : img.pixels) v = 0.37;
    Image hp = high_pass(img, 2.0);
    for (double v : hp.pixels) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("high_pass requires power-of-two extents") {
    Image img(12, 16, 1);
    CHECK_THROWS_AS(high_pass(img, 3.0), InputError);
}
