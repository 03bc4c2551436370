#include <msdet/registration.hpp>
#include <msdet/rng.hpp>

#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace msdet;

namespace {

// Well-conditioned random homography: similarity plus small shear and a
// mild projective component, acting on points in [0,640]x[0,480].
Homography random_homography(Rng& rng) {
    const double s = rng.uniform(0.7, 1.4);
    const double theta = rng.uniform(-0.4, 0.4);
    const double shear_x = rng.uniform(-0.15, 0.15);
    const double shear_y = rng.uniform(-0.15, 0.15);
    const double tx = rng.uniform(-30, 30);
    const double ty = rng.uniform(-30, 30);
    const double px = rng.uniform(-1e-4, 1e-4);
    const double py = rng.uniform(-1e-4, 1e-4);
    return Homography({{{s * std::cos(theta), -s * std::sin(theta) + shear_x, tx},
                        {s * std::sin(theta) + shear_y, s * std::cos(theta), ty},
                        {px, py, 1.0}}});
}

std::vector<Correspondence> exact_correspondences(const Homography& h, Rng& rng, int count) {
    std::vector<Correspondence> corrs;
    while (static_cast<int>(corrs.size()) < count) {
        const Point src{rng.uniform(0, 640), rng.uniform(0, 480)};
        const Point dst = apply(h, src);
        // Keep the configuration comfortably non-degenerate.
        bool ok = true;
        for (const auto& c : corrs) {
            if (std::hypot(c.src.x - src.x, c.src.y - src.y) < 40.0) ok = false;
        }
        if (ok) corrs.push_back({src, dst});
    }
    return corrs;
}

double max_entry_error(const Homography& a, const Homography& b) {
    double err = 0.0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            err = std::max(err, std::abs(a.matrix()[r][c] - b.matrix()[r][c]));
    return err;
}

} // namespace

TEST_CASE("homography construction and normalization") {
    const Homography h({{{2, 0, 0}, {0, 2, 0}, {0, 0, 2}}});
    CHECK(h.matrix()[0][0] == 1.0);
    CHECK(h.matrix()[2][2] == 1.0);

    CHECK_THROWS_AS(Homography({{{1, 0, 0}, {0, 1, 0}, {0, 0, 0}}}), ValidationError);
    // Singular after normalization (rank 2).
    CHECK_THROWS_AS(Homography({{{1, 0, 0}, {1, 0, 0}, {0, 0, 1}}}), ValidationError);
    CHECK_THROWS_AS(Homography({{{std::nan(""), 0, 0}, {0, 1, 0}, {0, 0, 1}}}),
                    ValidationError);
}

TEST_CASE("apply fixtures") {
    const Point p = apply(Homography::identity(), {5, 7});
    CHECK(p.x == 5.0);
    CHECK(p.y == 7.0);

    const Homography t({{{1, 0, 3}, {0, 1, -2}, {0, 0, 1}}});
    const Point q = apply(t, {0, 0});
    CHECK(q.x == 3.0);
    CHECK(q.y == -2.0);

    const Homography s({{{2, 0, 0}, {0, 2, 0}, {0, 0, 1}}});
    const Point r = apply(s, {4, 5});
    CHECK(r.x == 8.0);
    CHECK(r.y == 10.0);
}

TEST_CASE("points on the horizon raise a point-at-infinity error") {
    const Homography h({{{1, 0, 0}, {0, 1, 0}, {-0.01, 0, 1}}});
    CHECK_THROWS_AS(apply(h, {100.0, 0.0}), ValidationError);
}

TEST_CASE("inverse and composition round trips") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        const Homography h = random_homography(rng);
        const Homography inv = h.inverse();
        const Point p{rng.uniform(0, 640), rng.uniform(0, 480)};
        const Point round = apply(inv, apply(h, p));
        CHECK(round.x == doctest::Approx(p.x).epsilon(1e-9));
        CHECK(round.y == doctest::Approx(p.y).epsilon(1e-9));
        CHECK(max_entry_error(h.compose(inv), Homography::identity()) < 1e-9);
    }
}

TEST_CASE("estimate_homography") {
    SUBCASE("identity recovery from four points") {
        const std::vector<Correspondence> corrs = {
            {{0, 0}, {0, 0}}, {{100, 0}, {100, 0}}, {{0, 100}, {0, 100}}, {{70, 80}, {70, 80}}};
        const Homography h = estimate_homography(corrs);
        CHECK(max_entry_error(h, Homography::identity()) < 1e-9);
    }

    SUBCASE("exact recovery of random homographies") {
        Rng rng(555);
        for (int trial = 0; trial < 25; ++trial) {
            const Homography truth = random_homography(rng);
            const auto corrs = exact_correspondences(truth, rng, 8);
            const Homography est = estimate_homography(corrs);
            CHECK(max_entry_error(est, truth) < 1e-6);
        }
    }

    SUBCASE("robust mode shrugs off gross outliers") {
        Rng rng(556);
        for (int trial = 0; trial < 10; ++trial) {
            const Homography truth = random_homography(rng);
            auto corrs = exact_correspondences(truth, rng, 8);
            corrs.push_back({{50, 50}, {5000, -3000}});
            corrs.push_back({{400, 300}, {-2000, 4000}});
            const Homography est =
                estimate_homography(corrs, RansacParams{500, 1.5, 17});
            CHECK(max_entry_error(est, truth) < 1e-6);
        }
    }

    SUBCASE("robust mode is deterministic for a fixed seed") {
        Rng rng(557);
        const Homography truth = random_homography(rng);
        auto corrs = exact_correspondences(truth, rng, 10);
        corrs.push_back({{10, 10}, {9999, 9999}});
        const Homography a = estimate_homography(corrs, RansacParams{300, 2.0, 42});
        const Homography b = estimate_homography(corrs, RansacParams{300, 2.0, 42});
        CHECK(max_entry_error(a, b) == 0.0);
    }

    SUBCASE("arity and degeneracy errors") {
        const std::vector<Correspondence> three = {
            {{0, 0}, {0, 0}}, {{1, 0}, {1, 0}}, {{0, 1}, {0, 1}}};
        CHECK_THROWS_AS(estimate_homography(three), ValidationError);

        const std::vector<Correspondence> collinear = {
            {{0, 0}, {0, 0}}, {{1, 1}, {1, 1}}, {{2, 2}, {2, 2}}, {{3, 0}, {3, 0}}};
        CHECK_THROWS_AS(estimate_homography(collinear), ValidationError);
    }

    SUBCASE("no consensus when every sample is degenerate") {
        // All source points collinear: every minimal sample is rejected and
        // no model ever reaches four inliers.
        std::vector<Correspondence> corrs;
        for (int i = 0; i < 12; ++i) {
            corrs.push_back({{static_cast<double>(i), 2.0 * i},
                             {static_cast<double>(3 * i % 7), static_cast<double>(5 * i % 11)}});
        }
        CHECK_THROWS_AS(estimate_homography(corrs, RansacParams{50, 2.0, 3}),
                        ValidationError);
    }
}

TEST_CASE("correspondence CSV parsing") {
    test::TempDir dir("csv");
    test::spit(dir.file("pts.csv"),
               "src_x,src_y,dst_x,dst_y\n0,0,10,10\n1.5,2.5,11.5,12.5\n");
    const auto corrs = load_correspondences_csv(dir.file("pts.csv"));
    REQUIRE(corrs.size() == 2);
    CHECK(corrs[1].src.x == 1.5);
    CHECK(corrs[1].dst.y == 12.5);

    test::spit(dir.file("bad_header.csv"), "x,y,u,v\n0,0,0,0\n");
    CHECK_THROWS_AS(load_correspondences_csv(dir.file("bad_header.csv")), IoError);

    test::spit(dir.file("bad_row.csv"), "src_x,src_y,dst_x,dst_y\n1,2,3\n");
    CHECK_THROWS_AS(load_correspondences_csv(dir.file("bad_row.csv")), IoError);
}

TEST_CASE("homography JSON round trip") {
    test::TempDir dir("hjson");
    Rng rng(77);
    const Homography h = random_homography(rng);
    save_homography_json(h, dir.file("h.json"));
    const Homography back = load_homography_json(dir.file("h.json"));
    CHECK(max_entry_error(h, back) == 0.0);

    const std::string text = test::slurp(dir.file("h.json"));
    save_homography_json(h, dir.file("h2.json"));
    CHECK(text == test::slurp(dir.file("h2.json")));

    test::spit(dir.file("bad.json"), "{\"h\": [[1,0],[0,1]]}");
    CHECK_THROWS_AS(load_homography_json(dir.file("bad.json")), IoError);
}
