#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <array>
#include <cmath>

#include "naive_kernels.hpp"
#include "semjpeg/jpeg/dct.hpp"
#include "semjpeg/jpeg/quant.hpp"
#include "semjpeg/util/errors.hpp"
#include "semjpeg/util/rng.hpp"
#include "support/ref_jpeg.hpp"
#include "support/testutil.hpp"

using namespace semjpeg;

TEST_CASE("constant 128 block transforms to all-zero coefficients") {
    std::array<double, 64> block;
    block.fill(128.0);
    const jpeg::DctBlock out = jpeg::forward_dct(block);
    for (double v : out.coefficients) CHECK(std::fabs(v) < 1e-9);
}

TEST_CASE("constant 255 block has DC 1016 and zero AC") {
    std::array<double, 64> block;
    block.fill(255.0);
    const jpeg::DctBlock out = jpeg::forward_dct(block);
    CHECK(out.coefficients[0] == doctest::Approx(8.0 * (255.0 - 128.0)).epsilon(1e-12));
    for (int i = 1; i < 64; ++i) CHECK(std::fabs(out.coefficients[i]) < 1e-9);
}

TEST_CASE("separable DCT matches direct summation on 1000 random blocks") {
    Rng rng(7);
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        std::array<double, 64> block;
        for (double& v : block) v = rng.uniform(0.0, 255.0);
        const jpeg::DctBlock fast = jpeg::forward_dct(block);
        double naive[64];
        reference::naive_forward_dct(block.data(), naive);
        for (int i = 0; i < 64; ++i)
            worst = std::max(worst, std::fabs(fast.coefficients[i] - naive[i]));
    }
    CHECK(worst < 1e-6);
}

TEST_CASE("inverse DCT matches direct summation and round-trips within 1e-9") {
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        std::array<double, 64> block;
        for (double& v : block) v = rng.uniform(0.0, 255.0);
        const jpeg::DctBlock coeffs = jpeg::forward_dct(block);

        double naive[64];
        reference::naive_inverse_dct(coeffs.coefficients.data(), naive);
        const std::array<double, 64> fast = jpeg::inverse_dct(coeffs);
        for (int i = 0; i < 64; ++i) {
            CHECK(std::fabs(fast[i] - naive[i]) < 1e-6);
            CHECK(std::fabs(fast[i] - block[i]) < 1e-9);
        }
    }
}

TEST_CASE("quality 50 reproduces the base table") {
    CHECK(jpeg::scale_quant_matrix(jpeg::base_luma_table(), 50) == jpeg::base_luma_table());
    CHECK(jpeg::scale_quant_matrix(jpeg::base_chroma_table(), 50) == jpeg::base_chroma_table());
}

TEST_CASE("quality 100 gives the all-ones table") {
    const jpeg::QuantMatrix t = jpeg::scale_quant_matrix(jpeg::base_luma_table(), 100);
    for (int v : t.values) CHECK(v == 1);
}

TEST_CASE("quality bounds are enforced") {
    CHECK_THROWS_AS(jpeg::scale_quant_matrix(jpeg::base_luma_table(), 0), ParameterError);
    CHECK_THROWS_AS(jpeg::scale_quant_matrix(jpeg::base_luma_table(), 101), ParameterError);
}

TEST_CASE("scaled tables match a reference codec's DQT output") {
    // encode a dummy image with libjpeg and read its tables off the wire
    testsupport::RefImage dummy;
    dummy.h = dummy.w = 8;
    dummy.c = 3;
    dummy.pixels.assign(8 * 8 * 3, 100);

    for (int quality : {10, 35, 50, 75, 90}) {
        const auto stream = testsupport::ref_encode_444(dummy, quality);
        const auto tables = testsupport::ref_quant_tables_from_stream(stream);
        REQUIRE(tables.size() >= 2);
        const jpeg::QuantMatrix luma = jpeg::scale_quant_matrix(jpeg::base_luma_table(), quality);
        const jpeg::QuantMatrix chroma =
            jpeg::scale_quant_matrix(jpeg::base_chroma_table(), quality);
        for (int i = 0; i < 64; ++i) {
            CHECK(luma.values[i] == tables[0][i]);
            CHECK(chroma.values[i] == tables[1][i]);
        }
    }
}

TEST_CASE("quantized coefficients stay within the signed 12-bit baseline range") {
    Rng rng(13);
    const jpeg::QuantMatrix table = jpeg::scale_quant_matrix(jpeg::base_luma_table(), 100);
    for (int trial = 0; trial < 300; ++trial) {
        std::array<double, 64> block;
        // checkerboard extremes (worst-case AC energy) plus random fills
        for (int i = 0; i < 64; ++i) block[i] = (((i / 8) + i) % 2 == 0) ? 255.0 : 0.0;
        if (trial % 3 == 0)
            for (double& v : block) v = rng.uniform(0.0, 255.0);
        const jpeg::DctBlock coeffs = jpeg::forward_dct(block);
        for (int i = 0; i < 64; ++i) {
            const long q = std::lround(coeffs.coefficients[i] / table.values[i]);
            CHECK(q <= 2047);
            CHECK(q >= -2048);
        }
    }
}
