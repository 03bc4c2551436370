#include <msdet/registration.hpp>
#include <msdet/rng.hpp>

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace msdet;

namespace {

Raster gradient_rgb(int w, int h) {
    Raster r(w, h, 3, 8);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            for (int c = 0; c < 3; ++c)
                r.set(x, y, c, static_cast<std::uint16_t>((x * 3 + y * 2 + c * 40) % 256));
    return r;
}

} // namespace

TEST_CASE("raster invariants") {
    CHECK_THROWS_AS(Raster(0, 4, 1, 8), ValidationError);
    CHECK_THROWS_AS(Raster(4, 4, 2, 8), ValidationError);
    CHECK_THROWS_AS(Raster(4, 4, 3, 16), ValidationError); // 16-bit is IR-only
    CHECK_NOTHROW(Raster(4, 4, 1, 16));
}

TEST_CASE("PPM and PGM round trips") {
    test::TempDir dir("pnm");

    SUBCASE("8-bit RGB PPM") {
        const Raster rgb = gradient_rgb(13, 7);
        write_raster(rgb, dir.file("a.ppm"));
        CHECK(read_raster(dir.file("a.ppm")) == rgb);
        const std::string bytes = test::slurp(dir.file("a.ppm"));
        CHECK(bytes.rfind("P6\n13 7\n255\n", 0) == 0);
        CHECK(bytes.size() == 12 + 13 * 7 * 3);
    }

    SUBCASE("8-bit PGM") {
        Raster ir(5, 4, 1, 8);
        for (int i = 0; i < 20; ++i) ir.data()[static_cast<std::size_t>(i)] = i * 13 % 256;
        write_raster(ir, dir.file("a.pgm"));
        CHECK(read_raster(dir.file("a.pgm")) == ir);
    }

    SUBCASE("16-bit PGM uses big-endian samples") {
        Raster ir(2, 1, 1, 16);
        ir.set(0, 0, 0, 0x1234);
        ir.set(1, 0, 0, 0xFF01);
        write_raster(ir, dir.file("deep.pgm"));
        const std::string bytes = test::slurp(dir.file("deep.pgm"));
        const std::string header = "P5\n2 1\n65535\n";
        REQUIRE(bytes.size() == header.size() + 4);
        CHECK(static_cast<unsigned char>(bytes[header.size()]) == 0x12);
        CHECK(static_cast<unsigned char>(bytes[header.size() + 1]) == 0x34);
        CHECK(static_cast<unsigned char>(bytes[header.size() + 2]) == 0xFF);
        CHECK(static_cast<unsigned char>(bytes[header.size() + 3]) == 0x01);
        CHECK(read_raster(dir.file("deep.pgm")) == ir);
    }

    SUBCASE("header comments are skipped") {
        test::spit(dir.file("comment.pgm"), "P5\n# camera 3\n2 2\n255\n\x01\x02\x03\x04");
        const Raster r = read_raster(dir.file("comment.pgm"));
        CHECK(r.width() == 2);
        CHECK(r.at(1, 1, 0) == 4);
    }

    SUBCASE("format errors") {
        test::spit(dir.file("bad.pgm"), "P7\n2 2\n255\nxxxx");
        CHECK_THROWS_AS(read_raster(dir.file("bad.pgm")), IoError);
        test::spit(dir.file("trunc.pgm"), "P5\n4 4\n255\nxx");
        CHECK_THROWS_AS(read_raster(dir.file("trunc.pgm")), IoError);
        CHECK_THROWS_AS(read_raster(dir.file("absent.pgm")), IoError);
    }
}

TEST_CASE("warp") {
    SUBCASE("identity warp reproduces the source bit-exactly") {
        const Raster src = gradient_rgb(17, 9);
        const Raster out = warp(src, Homography::identity(), 17, 9, 0);
        CHECK(out == src);
    }

    SUBCASE("integer translation on a 3x1 strip") {
        Raster src(3, 1, 1, 8);
        src.set(0, 0, 0, 10);
        src.set(1, 0, 0, 20);
        src.set(2, 0, 0, 30);
        // Output-to-source map x -> x - 1 shifts content right by one pixel.
        const Homography shift({{{1, 0, -1}, {0, 1, 0}, {0, 0, 1}}});
        const Raster out = warp(src, shift, 3, 1, 0);
        CHECK(out.at(0, 0, 0) == 0);
        CHECK(out.at(1, 0, 0) == 10);
        CHECK(out.at(2, 0, 0) == 20);
    }

    SUBCASE("warp then inverse-warp keeps a smooth image close") {
        Raster src(64, 48, 1, 8);
        for (int y = 0; y < 48; ++y)
            for (int x = 0; x < 64; ++x)
                src.set(x, y, 0, static_cast<std::uint16_t>((2 * x + 3 * y) % 250));
        const Homography h({{{1.02, 0.01, 1.5}, {-0.01, 0.98, -0.8}, {0, 0, 1}}});
        const Raster forward = warp(src, h, 64, 48, 0);
        const Raster back = warp(forward, h.inverse(), 64, 48, 0);
        double error_sum = 0.0;
        int counted = 0;
        for (int y = 4; y < 44; ++y) { // interior, away from fill bleed
            for (int x = 4; x < 60; ++x) {
                error_sum += std::abs(static_cast<double>(back.at(x, y, 0)) -
                                      static_cast<double>(src.at(x, y, 0)));
                ++counted;
            }
        }
        CHECK(error_sum / counted < 1.0);
    }

    SUBCASE("row partitioning does not change the output") {
        const Raster src = gradient_rgb(33, 21);
        const Homography h({{{0.97, 0.03, 2.0}, {0.02, 1.01, -1.0}, {1e-5, -1e-5, 1}}});
        const Raster one = warp(src, h, 40, 25, 7, 1);
        const Raster eight = warp(src, h, 40, 25, 7, 8);
        CHECK(one == eight);
    }
}

TEST_CASE("fuse_images") {
    const Raster rgb = gradient_rgb(8, 6);
    Raster ir(8, 6, 1, 8);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 8; ++x) ir.set(x, y, 0, static_cast<std::uint16_t>(x * 36));

    SUBCASE("weight 1 returns the RGB bit-exactly") {
        CHECK(fuse_images(rgb, ir, 1.0) == rgb);
    }

    SUBCASE("weight 0 with gray colormap is the normalized IR replicated") {
        const Raster out = fuse_images(rgb, ir, 0.0);
        // IR spans [0, 252]; pixel value v maps to round(255 * v / 252).
        for (int x = 0; x < 8; ++x) {
            const auto expected = static_cast<std::uint16_t>(
                std::llround(255.0 * (x * 36) / 252.0));
            CHECK(out.at(x, 0, 0) == expected);
            CHECK(out.at(x, 0, 1) == expected);
            CHECK(out.at(x, 0, 2) == expected);
        }
    }

    SUBCASE("hand-evaluated midpoint blend") {
        Raster flat_rgb(1, 1, 3, 8);
        for (int c = 0; c < 3; ++c) flat_rgb.set(0, 0, c, 100);
        // With a fixed [0, 255] range, IR sample 200 stays 200 after the
        // gray colormap, so the blend lands at 150 exactly.
        Raster one_ir(1, 1, 1, 8);
        one_ir.set(0, 0, 0, 200);
        const Raster out = fuse_images(flat_rgb, one_ir, 0.5, Colormap::Gray,
                                       std::make_pair(0.0, 255.0));
        CHECK(out.at(0, 0, 0) == 150);
        CHECK(out.at(0, 0, 1) == 150);
        CHECK(out.at(0, 0, 2) == 150);
    }

    SUBCASE("blend is pointwise monotone in the weight") {
        const Raster low = fuse_images(rgb, ir, 0.25);
        const Raster high = fuse_images(rgb, ir, 0.75);
        for (int y = 0; y < 6; ++y) {
            for (int x = 0; x < 8; ++x) {
                for (int c = 0; c < 3; ++c) {
                    const int target = rgb.at(x, y, c);
                    const int d_low = std::abs(low.at(x, y, c) - target);
                    const int d_high = std::abs(high.at(x, y, c) - target);
                    CHECK(d_high <= d_low + 1); // rounding slack of one step
                }
            }
        }
    }

    SUBCASE("constant IR normalizes to zero") {
        Raster flat_ir(8, 6, 1, 8);
        for (auto& v : flat_ir.data()) v = 77;
        const Raster out = fuse_images(rgb, flat_ir, 0.0);
        for (const auto v : out.data()) CHECK(v == 0);
    }

    SUBCASE("16-bit IR input is supported") {
        Raster deep_ir(8, 6, 1, 16);
        for (int y = 0; y < 6; ++y)
            for (int x = 0; x < 8; ++x)
                deep_ir.set(x, y, 0, static_cast<std::uint16_t>(x * 8000));
        const Raster out = fuse_images(rgb, deep_ir, 0.5);
        CHECK(out.bit_depth() == 8);
        CHECK(out.channels() == 3);
    }

    SUBCASE("iron colormap runs black to white") {
        Raster two_ir(2, 1, 1, 8);
        two_ir.set(0, 0, 0, 0);
        two_ir.set(1, 0, 0, 255);
        Raster black_rgb(2, 1, 3, 8);
        const Raster out = fuse_images(black_rgb, two_ir, 0.0, Colormap::Iron);
        for (int c = 0; c < 3; ++c) {
            CHECK(out.at(0, 0, c) == 0);
            CHECK(out.at(1, 0, c) == 255);
        }
    }

    SUBCASE("contract violations") {
        CHECK_THROWS_AS(fuse_images(rgb, Raster(4, 4, 1, 8), 0.5), ValidationError);
        CHECK_THROWS_AS(fuse_images(rgb, ir, 1.5), ValidationError);
        CHECK_THROWS_AS(fuse_images(Raster(8, 6, 1, 8), ir, 0.5), ValidationError);
    }

    SUBCASE("row partitioning does not change the output") {
        CHECK(fuse_images(rgb, ir, 0.4, Colormap::Iron, std::nullopt, 1) ==
              fuse_images(rgb, ir, 0.4, Colormap::Iron, std::nullopt, 8));
    }
}
