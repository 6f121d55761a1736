#include <doctest.h>

#include <cmath>

#include "lbvs/features.hpp"
#include "test_support.hpp"

using namespace lbvs;

namespace {

/// Oracle: direct separable [1 4 6 4 1]/16 smoothing + even-index decimation,
/// written independently of the pyramid implementation.
Field2D oracle_reduce(const Field2D& f) {
    const double k[5] = {1, 4, 6, 4, 1};
    Field2D out((f.width + 1) / 2, (f.height + 1) / 2);
    for (int oy = 0; oy < out.height; ++oy)
        for (int ox = 0; ox < out.width; ++ox) {
            double acc = 0.0;
            for (int dy = -2; dy <= 2; ++dy)
                for (int dx = -2; dx <= 2; ++dx)
                    acc += k[dy + 2] * k[dx + 2] *
                           f.at_clamped(2 * ox + dx, 2 * oy + dy);
            out.at(ox, oy) = acc / 256.0;
        }
    return out;
}

/// Oracle: bilinear sample with the same pixel-center convention, written out
/// longhand per pixel.
double oracle_bilinear(const Field2D& f, double fx, double fy) {
    fx = std::clamp(fx, 0.0, static_cast<double>(f.width - 1));
    fy = std::clamp(fy, 0.0, static_cast<double>(f.height - 1));
    const int x0 = static_cast<int>(fx), y0 = static_cast<int>(fy);
    const int x1 = std::min(x0 + 1, f.width - 1), y1 = std::min(y0 + 1, f.height - 1);
    const double ax = fx - x0, ay = fy - y0;
    return (1 - ay) * ((1 - ax) * f.at(x0, y0) + ax * f.at(x1, y0)) +
           ay * ((1 - ax) * f.at(x0, y1) + ax * f.at(x1, y1));
}

Field2D oracle_resize(const Field2D& f, int w, int h) {
    Field2D out(w, h);
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x)
            out.at(x, y) = oracle_bilinear(f, (x + 0.5) * f.width / w - 0.5,
                                           (y + 0.5) * f.height / h - 0.5);
    return out;
}

Field2D rot90(const Field2D& f) {
    Field2D out(f.height, f.width);
    for (int y = 0; y < f.height; ++y)
        for (int x = 0; x < f.width; ++x) out.at(f.height - 1 - y, x) = f.at(x, y);
    return out;
}

}  // namespace

TEST_CASE("gaussian_pyramid keeps constants constant and halves sizes") {
    Field2D f(512, 512, 5.0);
    const Pyramid p = gaussian_pyramid(f, 9);
    REQUIRE(p.level_count() == 9);
    int expected = 512;
    for (int k = 0; k < 9; ++k) {
        CHECK(p.level(k).width == expected);
        CHECK(p.level(k).height == expected);
        expected = (expected + 1) / 2;
        for (double v : p.level(k).v) CHECK(v == doctest::Approx(5.0).epsilon(1e-12));
    }
    CHECK(p.level(8).width == 2);
}

TEST_CASE("gaussian_pyramid matches the direct convolution oracle") {
    SUBCASE("centered impulse") {
        Field2D f(9, 9, 0.0);
        f.at(4, 4) = 1.0;
        const Pyramid p = gaussian_pyramid(f, 2);
        // Aligned coarse pixel (2,2) sees the kernel's central tap product.
        CHECK(p.level(1).at(2, 2) == doctest::Approx((6.0 / 16) * (6.0 / 16)).epsilon(1e-12));
        CHECK(testsupport::max_abs_diff(p.level(1), oracle_reduce(f)) < 1e-12);
    }
    SUBCASE("random field, odd and even sizes") {
        Rng rng(17);
        for (const auto [w, h] : {std::pair{13, 9}, {16, 8}, {7, 12}}) {
            const Field2D f = testsupport::random_field(w, h, rng);
            const Pyramid p = gaussian_pyramid(f, 3);
            CHECK(testsupport::max_abs_diff(p.level(1), oracle_reduce(f)) < 1e-12);
            CHECK(testsupport::max_abs_diff(p.level(2), oracle_reduce(oracle_reduce(f))) < 1e-12);
        }
    }
}

TEST_CASE("gaussian_pyramid rejects impossible level counts") {
    Field2D f(16, 16, 0.0);
    CHECK_THROWS_AS(gaussian_pyramid(f, 6), DataError);
    CHECK(max_pyramid_levels(16, 16) == 5);
    CHECK(max_pyramid_levels(512, 512) == 10);
    CHECK(max_pyramid_levels(1, 1) == 1);
}

TEST_CASE("center_surround basics and oracle") {
    SUBCASE("constant pyramid gives a zero map") {
        const Pyramid p = gaussian_pyramid(Field2D(64, 64, 3.3), 5);
        const Field2D cs = center_surround(p, 1, 2);
        for (double v : cs.v) CHECK(v == doctest::Approx(0.0).epsilon(1e-12));
    }
    SUBCASE("constant difference") {
        Pyramid p;
        p.levels.push_back(Field2D(8, 8, 1.0));
        p.levels.push_back(Field2D(4, 4, 0.0));
        const Field2D cs = center_surround(p, 0, 1);
        for (double v : cs.v) CHECK(v == 1.0);
    }
    SUBCASE("bright block against upsample-and-subtract oracle") {
        Field2D f(16, 16, 0.1);
        f.at(7, 7) = f.at(8, 7) = f.at(7, 8) = f.at(8, 8) = 1.0;
        const Pyramid p = gaussian_pyramid(f, 4);
        const Field2D cs = center_surround(p, 1, 2);
        const Field2D up = oracle_resize(p.level(3), p.level(1).width, p.level(1).height);
        for (std::size_t i = 0; i < cs.size(); ++i)
            CHECK(cs.v[i] == doctest::Approx(std::fabs(p.level(1).v[i] - up.v[i])).epsilon(1e-9));
    }
    SUBCASE("invalid indices") {
        const Pyramid p = gaussian_pyramid(Field2D(16, 16, 1.0), 3);
        CHECK_THROWS_AS(center_surround(p, 1, 2), DataError);
    }
}

TEST_CASE("across_scale_combine") {
    Rng rng(29);
    SUBCASE("singleton equals its own normalization") {
        const Field2D m = testsupport::random_field(6, 5, rng);
        const Field2D combined = across_scale_combine({m}, 6, 5);
        CHECK(testsupport::max_abs_diff(combined, normalize01(m)) < 1e-12);
    }
    SUBCASE("duplicates are absorbed by normalization") {
        const Field2D m = testsupport::random_field(6, 5, rng);
        CHECK(testsupport::max_abs_diff(across_scale_combine({m, m}, 6, 5),
                                        across_scale_combine({m}, 6, 5)) < 1e-12);
    }
    SUBCASE("mixed resolutions match the resize-sum oracle") {
        const Field2D a = testsupport::random_field(4, 4, rng);
        const Field2D b = testsupport::random_field(2, 2, rng);
        const Field2D combined = across_scale_combine({a, b}, 4, 4);
        Field2D expected(4, 4);
        const Field2D bu = oracle_resize(b, 4, 4);
        for (std::size_t i = 0; i < expected.size(); ++i) expected.v[i] = a.v[i] + bu.v[i];
        CHECK(testsupport::max_abs_diff(combined, normalize01(expected)) < 1e-9);
    }
    SUBCASE("empty list is an error") {
        CHECK_THROWS_AS(across_scale_combine({}, 2, 2), DataError);
    }
}

TEST_CASE("normalize01 endpoints, degenerate rule and affine invariance") {
    Field2D f(2, 1);
    f.v = {2.0, 4.0};
    const Field2D n = normalize01(f);
    CHECK(n.v[0] == 0.0);
    CHECK(n.v[1] == 1.0);

    const Field2D c = normalize01(Field2D(3, 3, 7.0));
    for (double v : c.v) CHECK(v == 0.0);

    Rng rng(31);
    const Field2D r = testsupport::random_field(8, 8, rng);
    Field2D affine(8, 8);
    for (std::size_t i = 0; i < r.size(); ++i) affine.v[i] = 3.7 * r.v[i] - 11.0;
    CHECK(testsupport::max_abs_diff(normalize01(r), normalize01(affine)) < 1e-12);
}

TEST_CASE("intensity_feature: constant input, disc localization, bounds") {
    SUBCASE("constant luma gives the zero map") {
        int levels = 0;
        const Field2D out = intensity_feature(Field2D(64, 64, 123.0), {}, &levels);
        CHECK(levels == 7);  // 64 px supports 7 levels
        for (double v : out.v) CHECK(v == 0.0);
    }
    SUBCASE("bright disc on a dark ground peaks near the disc") {
        Field2D f(128, 128, 10.0);
        const int cx = 80, cy = 60, radius = 9;
        for (int y = 0; y < 128; ++y)
            for (int x = 0; x < 128; ++x)
                if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
                    f.at(x, y) = 200.0;
        const Field2D out = intensity_feature(f);
        int best_x = 0, best_y = 0;
        double best = -1.0;
        for (int y = 0; y < 128; ++y)
            for (int x = 0; x < 128; ++x)
                if (out.at(x, y) > best) {
                    best = out.at(x, y);
                    best_x = x;
                    best_y = y;
                }
        const double dist = std::hypot(best_x - cx, best_y - cy);
        CHECK(dist <= 2.5 * radius);
    }
    SUBCASE("bounds hold for random input") {
        Rng rng(37);
        const Field2D out = intensity_feature(testsupport::random_field(64, 64, rng, 0.0, 500.0));
        CHECK(field_min(out) >= 0.0);
        CHECK(field_max(out) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("intensity/color/orientation are invariant to positive affine input scaling") {
    Rng rng(41);
    const Field2D f = testsupport::random_field(64, 64, rng, 0.0, 100.0);
    Field2D g(64, 64);
    for (std::size_t i = 0; i < f.size(); ++i) g.v[i] = 2.5 * f.v[i] + 40.0;

    CHECK(testsupport::max_abs_diff(intensity_feature(f), intensity_feature(g)) < 1e-9);
    CHECK(testsupport::max_abs_diff(orientation_feature(f), orientation_feature(g)) < 1e-9);

    OpponentPair opp{testsupport::random_field(64, 64, rng, -1.0, 1.0),
                     testsupport::random_field(64, 64, rng, -1.0, 1.0)};
    OpponentPair scaled{Field2D(64, 64), Field2D(64, 64)};
    for (std::size_t i = 0; i < opp.rg.size(); ++i) {
        scaled.rg.v[i] = 0.3 * opp.rg.v[i] + 0.1;
        scaled.by.v[i] = 0.3 * opp.by.v[i] + 0.1;
    }
    CHECK(testsupport::max_abs_diff(color_feature(opp), color_feature(scaled)) < 1e-9);
}

TEST_CASE("color_feature: achromatic zero and rg/by symmetry") {
    const OpponentPair zero{Field2D(64, 64, 0.0), Field2D(64, 64, 0.0)};
    for (double v : color_feature(zero).v) CHECK(v == 0.0);

    Rng rng(43);
    OpponentPair opp{testsupport::random_field(64, 64, rng, -1.0, 1.0),
                     testsupport::random_field(64, 64, rng, -1.0, 1.0)};
    OpponentPair swapped{opp.by, opp.rg};
    CHECK(testsupport::max_abs_diff(color_feature(opp), color_feature(swapped)) < 1e-12);
}

TEST_CASE("color_feature: red disc on green ground peaks near the disc") {
    // Opponent signs: red -> rg > 0, green -> rg < 0.
    Field2D rg(96, 96, -0.4);
    Field2D by(96, 96, 0.0);
    const int cx = 30, cy = 48, radius = 8;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            if ((x - cx) * (x - cx) + (y - cy) * (y - cy) <= radius * radius)
                rg.at(x, y) = 0.6;
    const Field2D out = color_feature({rg, by});
    int best_x = 0, best_y = 0;
    double best = -1.0;
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x)
            if (out.at(x, y) > best) {
                best = out.at(x, y);
                best_x = x;
                best_y = y;
            }
    CHECK(std::hypot(best_x - cx, best_y - cy) <= 2.5 * radius);
}

TEST_CASE("orientation_feature: constant zero, grating localization, rotation equivariance") {
    SUBCASE("constant field") {
        for (double v : orientation_feature(Field2D(64, 64, 9.0)).v) CHECK(v == 0.0);
    }
    SUBCASE("grating patch attracts the maximum") {
        Field2D f(128, 128, 50.0);
        for (int y = 40; y < 80; ++y)
            for (int x = 40; x < 80; ++x)
                f.at(x, y) = 50.0 + 30.0 * std::cos(2.0 * M_PI * x / 7.0);
        const Field2D out = orientation_feature(f);
        int best_x = 0, best_y = 0;
        double best = -1.0;
        for (int y = 0; y < 128; ++y)
            for (int x = 0; x < 128; ++x)
                if (out.at(x, y) > best) {
                    best = out.at(x, y);
                    best_x = x;
                    best_y = y;
                }
        CHECK(best_x >= 30);
        CHECK(best_x < 90);
        CHECK(best_y >= 30);
        CHECK(best_y < 90);
    }
    SUBCASE("rotating the input by 90 degrees rotates the combined map") {
        Rng rng(47);
        // Odd dimensions keep even-index decimation aligned under rotation.
        Field2D f = testsupport::random_field(65, 65, rng, 0.0, 10.0);
        // Smooth the noise a little so the maps carry structure.
        f = gaussian_pyramid(f, 1).level(0);
        const Field2D rotated_out = orientation_feature(rot90(f));
        const Field2D out_rotated = rot90(orientation_feature(f));
        CHECK(testsupport::max_abs_diff(rotated_out, out_rotated) < 1e-3);
    }
}

TEST_CASE("motion_feature boundary rules") {
    Rng rng(53);
    const Field2D frame = testsupport::random_field(64, 64, rng, 0.0, 100.0);
    SUBCASE("first frame gives the zero map") {
        const Field2D out = motion_feature(nullptr, frame);
        for (double v : out.v) CHECK(v == 0.0);
    }
    SUBCASE("identical frames give the zero map") {
        const Field2D out = motion_feature(&frame, frame);
        for (double v : out.v) CHECK(v == 0.0);
    }
    SUBCASE("dimension mismatch is an error") {
        const Field2D small = testsupport::random_field(32, 32, rng);
        CHECK_THROWS_AS(motion_feature(&small, frame), DataError);
    }
}

TEST_CASE("block_matching_flow recovers a global shift (exhaustive SAD oracle)") {
    Rng rng(59);
    const int w = 96, h = 64;
    Field2D prev = testsupport::random_field(w, h, rng, 0.0, 1.0);
    // Textured but smooth enough that SAD has a clean minimum.
    prev = gaussian_pyramid(prev, 1).level(0);
    Field2D curr(w, h);
    const int shift = 2;
    for (int y = 0; y < h; ++y)
        for (int x = 0; x < w; ++x) curr.at(x, y) = prev.at_clamped(x - shift, y);

    const FlowField flow = block_matching_flow(prev, curr, 16, 8);
    // Interior blocks report the motion vector (+2, 0), magnitude 2.
    for (int by = 1; by + 1 < flow.dx.height; ++by)
        for (int bx = 1; bx + 1 < flow.dx.width; ++bx) {
            CHECK(flow.dx.at(bx, by) == doctest::Approx(shift));
            CHECK(flow.dy.at(bx, by) == doctest::Approx(0.0));
            CHECK(std::hypot(flow.dx.at(bx, by), flow.dy.at(bx, by)) == doctest::Approx(2.0));
        }

    // Against an independent exhaustive SAD oracle on one interior block.
    {
        const int bx = 2, by = 1, bs = 16;
        double best_sad = 1e300;
        int best_dx = 0, best_dy = 0, best_mag = 1 << 30;
        for (int dy = -8; dy <= 8; ++dy)
            for (int dx = -8; dx <= 8; ++dx) {
                if (bx * bs + dx < 0 || by * bs + dy < 0 || (bx + 1) * bs + dx > w ||
                    (by + 1) * bs + dy > h)
                    continue;
                double sad = 0.0;
                for (int y = by * bs; y < (by + 1) * bs; ++y)
                    for (int x = bx * bs; x < (bx + 1) * bs; ++x)
                        sad += std::fabs(curr.at(x, y) - prev.at(x + dx, y + dy));
                const int mag = dx * dx + dy * dy;
                if (sad < best_sad || (sad == best_sad && mag < best_mag)) {
                    best_sad = sad;
                    best_dx = dx;
                    best_dy = dy;
                    best_mag = mag;
                }
            }
        CHECK(flow.dx.at(bx, by) == doctest::Approx(-best_dx));
        CHECK(flow.dy.at(bx, by) == doctest::Approx(-best_dy));
    }
}

TEST_CASE("motion_feature magnitude is symmetric under time reversal of a translation") {
    Rng rng(61);
    Field2D a = testsupport::random_field(96, 96, rng, 0.0, 1.0);
    a = gaussian_pyramid(a, 1).level(0);
    Field2D b(96, 96);
    for (int y = 0; y < 96; ++y)
        for (int x = 0; x < 96; ++x) b.at(x, y) = a.at_clamped(x - 3, y);

    const Field2D fwd = motion_feature(&a, b);
    const Field2D rev = motion_feature(&b, a);
    // Compare away from the borders where clamped content differs.
    double max_diff = 0.0;
    for (int y = 24; y < 72; ++y)
        for (int x = 24; x < 72; ++x)
            max_diff = std::max(max_diff, std::fabs(fwd.at(x, y) - rev.at(x, y)));
    CHECK(max_diff < 1e-6);
}

TEST_CASE("feature maps have max exactly 1 unless identically zero") {
    Rng rng(67);
    const Field2D luma = testsupport::random_field(64, 64, rng, 0.0, 200.0);
    for (const Field2D& m :
         {intensity_feature(luma), orientation_feature(luma),
          color_feature({testsupport::random_field(64, 64, rng, -1.0, 1.0),
                         testsupport::random_field(64, 64, rng, -1.0, 1.0)})}) {
        CHECK(field_min(m) >= 0.0);
        CHECK(field_max(m) == doctest::Approx(1.0).epsilon(1e-12));
    }
}
